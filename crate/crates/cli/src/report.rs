//! Report shapes emitted by the commands, in text and JSON form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use qmc_reach::{ReachReport, StateVector, SubspaceBasis};

/// Amplitudes with magnitude at or below this are left out of dumps.
pub const AMPLITUDE_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub index: usize,
    pub re: f64,
    pub im: f64,
}

pub type BasisDump = Vec<Vec<Amplitude>>;

pub fn dump_vector(v: &StateVector) -> Vec<Amplitude> {
    v.amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > AMPLITUDE_CUTOFF)
        .map(|(index, a)| Amplitude {
            index,
            re: a.re,
            im: a.im,
        })
        .collect()
}

pub fn dump_basis(basis: &SubspaceBasis) -> BasisDump {
    basis.vectors().iter().map(dump_vector).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachJson {
    pub reachable_dim: usize,
    pub iterations: usize,
    pub saturated: bool,
    pub branch_evals: usize,
    pub wall_time_s: f64,
    pub basis: BasisDump,
}

impl ReachJson {
    pub fn from_report(report: &ReachReport) -> Self {
        ReachJson {
            reachable_dim: report.dim(),
            iterations: report.iterations,
            saturated: report.saturated,
            branch_evals: report.branch_evals,
            wall_time_s: report.wall_time.as_secs_f64(),
            basis: dump_basis(&report.subspace),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckJson {
    pub engine_dim: usize,
    pub oracle_dim: usize,
    /// Largest residual of an engine vector against the oracle span.
    pub engine_in_oracle: f64,
    /// Largest residual of an oracle vector against the engine span.
    pub oracle_in_engine: f64,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub engine_basis: Option<BasisDump>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_basis: Option<BasisDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepJson {
    pub qubits: usize,
    pub seeds: u64,
    pub agreed: u64,
    pub disagreements: Vec<SweepFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub seed: u64,
    pub check: CheckJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub qubits: usize,
    pub op_type: String,
    pub initial_dim: usize,
    pub time_s: Option<f64>,
    pub reachable_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

pub fn format_amplitude(a: &Amplitude) -> String {
    format!("({}, {:+.12}, {:+.12})", a.index, a.re, a.im)
}

pub fn format_basis(title: &str, basis: &BasisDump) -> String {
    let mut out = format!("{title}:\n");
    for (i, v) in basis.iter().enumerate() {
        let terms: Vec<String> = v.iter().map(format_amplitude).collect();
        let _ = writeln!(out, "  v{i}: {}", terms.join(" "));
    }
    out
}

pub fn format_reach(r: &ReachJson) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "reachable_dim: {}", r.reachable_dim);
    let _ = writeln!(out, "iterations: {}", r.iterations);
    let _ = writeln!(out, "branch_evals: {}", r.branch_evals);
    let _ = writeln!(out, "saturated: {}", r.saturated);
    let _ = writeln!(out, "wall_time_s: {:.6}", r.wall_time_s);
    out.push_str(&format_basis("basis", &r.basis));
    out
}

pub fn format_check(c: &CheckJson) -> String {
    let mut out = format!(
        "engine: {}, oracle: {}, agree: {}\n",
        c.engine_dim, c.oracle_dim, c.agree
    );
    let _ = writeln!(
        out,
        "residuals: engine-in-oracle {:.1e}, oracle-in-engine {:.1e}",
        c.engine_in_oracle, c.oracle_in_engine
    );
    if let Some(b) = &c.engine_basis {
        out.push_str(&format_basis("engine basis", b));
    }
    if let Some(b) = &c.oracle_basis {
        out.push_str(&format_basis("oracle basis", b));
    }
    out
}

pub fn format_bench(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<12} {:>8} {:<10} {:>12} {:>12} {:>14}\n",
        "name", "#qubits", "op type", "initial dim", "time (s)", "reachable dim"
    );
    for r in rows {
        let time = r.time_s.map_or("-".to_string(), |t| format!("{t:.6}"));
        let dim = match (&r.reachable_dim, &r.error) {
            (Some(d), _) => d.to_string(),
            (None, Some(e)) => format!("error: {e}"),
            (None, None) => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:<10} {:>12} {:>12} {:>14}",
            r.name, r.qubits, r.op_type, r.initial_dim, time, dim
        );
    }
    out
}
