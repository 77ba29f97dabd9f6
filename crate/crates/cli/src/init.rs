//! Initial-state resolution: command-line entries, the `// @init` pragma in a
//! QASM file, and JSON amplitude files.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use qmc_reach::{ReachError, Result, StateVector, C64};

/// Amplitude file: `{"states": [[[re, im], ...], ...]}`, one entry per vector.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitFile {
    states: Vec<Vec<[f64; 2]>>,
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| ReachError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Entries of the first `// @init` comment, or `None` when there is none.
pub fn pragma(qasm: &str) -> Option<Vec<String>> {
    qasm.lines().find_map(|line| {
        let rest = line.trim().strip_prefix("//")?.trim_start();
        let entries = rest.strip_prefix("@init")?;
        if !entries.is_empty() && !entries.starts_with(char::is_whitespace) {
            return None;
        }
        Some(entries.split_whitespace().map(str::to_string).collect())
    })
}

fn load_amplitudes(path: &Path) -> Result<Vec<StateVector>> {
    let text = read_file(path)?;
    let file: InitFile = serde_json::from_str(&text).map_err(|e| ReachError::Parse {
        line: e.line(),
        message: format!("{}: {e}", path.display()),
    })?;
    if file.states.is_empty() {
        return Err(ReachError::Usage(format!(
            "{}: no states listed",
            path.display()
        )));
    }
    file.states
        .into_iter()
        .map(|amps| {
            StateVector::from_amplitudes(
                amps.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
            )
        })
        .collect()
}

/// Decodes init entries; `@file.json` paths are taken relative to `base`.
/// An empty list means the all-zeros basis state.
pub fn resolve(entries: &[String], base: &Path, num_qubits: usize) -> Result<Vec<StateVector>> {
    if entries.is_empty() {
        return Ok(vec![StateVector::basis(num_qubits, 0)?]);
    }
    let mut out = Vec::new();
    for entry in entries {
        if let Some(file) = entry.strip_prefix('@') {
            out.extend(load_amplitudes(&base.join(file))?);
        } else {
            out.push(StateVector::from_label(entry)?);
        }
    }
    if let Some(v) = out.iter().find(|v| v.num_qubits() != num_qubits) {
        return Err(ReachError::Usage(format!(
            "initial state has {} qubits, circuit has {num_qubits}",
            v.num_qubits()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pragma_is_found_and_split() {
        let src = "OPENQASM 2.0;\n// a comment\n  //  @init 000 +-1 @x.json\nqreg q[3];";
        assert_eq!(pragma(src).unwrap(), vec!["000", "+-1", "@x.json"]);
        assert_eq!(pragma("// @init\n").unwrap(), Vec::<String>::new());
        assert!(pragma("// @initial 0\n").is_none());
        assert!(pragma("qreg q[1];").is_none());
    }

    #[test]
    fn empty_entries_mean_all_zeros() {
        let v = resolve(&[], Path::new("."), 2).unwrap();
        assert_eq!(v, vec![StateVector::from_label("00").unwrap()]);
    }

    #[test]
    fn width_mismatch_is_a_usage_error() {
        let err = resolve(&["000".to_string()], Path::new("."), 2).unwrap_err();
        assert!(matches!(err, ReachError::Usage(_)));
    }
}
