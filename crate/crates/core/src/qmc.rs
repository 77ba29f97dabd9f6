//! Quantum Markov chains: a circuit body plus single-qubit channel sites.
//!
//! A site at `position` fires immediately before the gate with that index;
//! `position == body.len()` fires after the last gate. Sites sharing a position
//! fire in declaration order. One step of the chain is the super-operator
//! `E(ρ) = Σ_b E_b ρ E_b†` where each branch operator `E_b` picks one Kraus
//! matrix per site and interleaves it with the gates.

use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::numerics::{DenseMatrix, C64};
use crate::qasm::Circuit;

/// Default branch count above which [`build_qmc`] records a warning.
pub const DEFAULT_BRANCH_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelKind {
    BitFlip {
        p: f64,
    },
    PhaseFlip {
        p: f64,
    },
    AmplitudeDamping {
        gamma: f64,
    },
    MeasureZ,
    /// Measure, then flip the qubit back to `|0⟩` on outcome one.
    Reset,
    CustomKraus(Vec<DenseMatrix>),
}

impl ChannelKind {
    /// Name used in channel files.
    pub fn file_name(&self) -> &'static str {
        match self {
            ChannelKind::BitFlip { .. } => "bitflip",
            ChannelKind::PhaseFlip { .. } => "phaseflip",
            ChannelKind::AmplitudeDamping { .. } => "amplitude_damping",
            ChannelKind::MeasureZ => "measure_z",
            ChannelKind::Reset => "reset",
            ChannelKind::CustomKraus(_) => "custom",
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, ChannelKind::CustomKraus(_))
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_probability(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ReachError::usage(format!(
            "{name} must lie in [0, 1], got {value}"
        )))
    }
}

/// Kraus matrices of a single-qubit channel.
pub fn kraus_for(kind: &ChannelKind) -> Result<Vec<DenseMatrix>> {
    let zero = re(0.0);
    let one = re(1.0);
    Ok(match kind {
        ChannelKind::BitFlip { p } => {
            check_probability("bit-flip probability", *p)?;
            let (a, b) = ((1.0 - p).sqrt(), p.sqrt());
            vec![
                DenseMatrix::two_by_two(re(a), zero, zero, re(a)),
                DenseMatrix::two_by_two(zero, re(b), re(b), zero),
            ]
        }
        ChannelKind::PhaseFlip { p } => {
            check_probability("phase-flip probability", *p)?;
            let (a, b) = ((1.0 - p).sqrt(), p.sqrt());
            vec![
                DenseMatrix::two_by_two(re(a), zero, zero, re(a)),
                DenseMatrix::two_by_two(re(b), zero, zero, re(-b)),
            ]
        }
        ChannelKind::AmplitudeDamping { gamma } => {
            check_probability("damping rate", *gamma)?;
            vec![
                DenseMatrix::two_by_two(one, zero, zero, re((1.0 - gamma).sqrt())),
                DenseMatrix::two_by_two(zero, re(gamma.sqrt()), zero, zero),
            ]
        }
        ChannelKind::MeasureZ => vec![
            DenseMatrix::two_by_two(one, zero, zero, zero),
            DenseMatrix::two_by_two(zero, zero, zero, one),
        ],
        // {P0, X·P1}
        ChannelKind::Reset => vec![
            DenseMatrix::two_by_two(one, zero, zero, zero),
            DenseMatrix::two_by_two(zero, one, zero, zero),
        ],
        ChannelKind::CustomKraus(ms) => {
            if ms.is_empty() {
                return Err(ReachError::usage(
                    "custom channel needs at least one Kraus matrix",
                ));
            }
            if let Some(m) = ms.iter().find(|m| !m.is_square_2x2()) {
                return Err(ReachError::usage(format!(
                    "custom Kraus matrices must be 2x2, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
            if ms
                .iter()
                .flat_map(|m| m.entries())
                .any(|e| !e.re.is_finite() || !e.im.is_finite())
            {
                return Err(ReachError::usage("custom Kraus entries must be finite"));
            }
            ms.clone()
        }
    })
}

/// Largest entrywise deviation of `Σ K†K` from the identity.
pub fn completeness_defect(kraus: &[DenseMatrix]) -> f64 {
    let n = kraus.first().map_or(2, DenseMatrix::rows);
    let mut sum = DenseMatrix::zeros(n, n);
    for k in kraus {
        let kk = k.adjoint().matmul(k).expect("square Kraus matrix");
        sum = sum.add(&kk).expect("same shape");
    }
    sum.max_abs_diff(&DenseMatrix::identity(n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSite {
    pub position: usize,
    pub qubit: usize,
    pub kind: ChannelKind,
}

impl ChannelSite {
    pub fn new(position: usize, qubit: usize, kind: ChannelKind) -> Self {
        ChannelSite {
            position,
            qubit,
            kind,
        }
    }
}

/// A site whose Kraus list has been validated and materialized.
#[derive(Debug, Clone)]
pub struct ResolvedSite {
    pub site: ChannelSite,
    pub kraus: Vec<DenseMatrix>,
}

/// Per-site Kraus lists in firing order.
#[derive(Debug, Clone)]
pub struct KrausBranchPlan<'a> {
    sites: &'a [ResolvedSite],
}

impl<'a> KrausBranchPlan<'a> {
    pub fn branch_count(&self) -> usize {
        self.sites.iter().map(|s| s.kraus.len()).product()
    }

    pub fn kraus_lists(&self) -> impl Iterator<Item = &'a [DenseMatrix]> {
        self.sites.iter().map(|s| s.kraus.as_slice())
    }

    /// All index tuples, first site most significant.
    pub fn branches(&self) -> BranchIndices {
        BranchIndices {
            radices: self.sites.iter().map(|s| s.kraus.len()).collect(),
            next: Some(vec![0; self.sites.len()]),
        }
    }
}

/// Odometer over the Cartesian product of per-site Kraus index sets.
#[derive(Debug, Clone)]
pub struct BranchIndices {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for BranchIndices {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < self.radices[i] {
                carried = false;
                break;
            }
            succ[i] = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(current)
    }
}

#[derive(Debug, Clone)]
pub struct QuantumMarkovChain {
    body: Circuit,
    sites: Vec<ResolvedSite>,
    warnings: Vec<String>,
}

impl QuantumMarkovChain {
    pub fn num_qubits(&self) -> usize {
        self.body.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.body.num_qubits
    }

    pub fn body(&self) -> &Circuit {
        &self.body
    }

    /// Sites sorted by `(position, declaration order)`.
    pub fn sites(&self) -> &[ResolvedSite] {
        &self.sites
    }

    pub fn plan(&self) -> KrausBranchPlan<'_> {
        KrausBranchPlan { sites: &self.sites }
    }

    pub fn branch_count(&self) -> usize {
        self.plan().branch_count()
    }

    pub fn is_unitary(&self) -> bool {
        self.sites.is_empty()
    }

    /// Non-fatal findings from construction: branch-count overflow and
    /// incomplete custom Kraus sets.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Copy with the Kraus list of site `site_index` permuted by `perm`.
    pub fn with_permuted_kraus(&self, site_index: usize, perm: &[usize]) -> Result<Self> {
        let mut out = self.clone();
        let site = out
            .sites
            .get_mut(site_index)
            .ok_or_else(|| ReachError::usage(format!("no site {site_index}")))?;
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..site.kraus.len()).collect::<Vec<_>>() {
            return Err(ReachError::usage("not a permutation of the Kraus list"));
        }
        site.kraus = perm.iter().map(|&i| site.kraus[i].clone()).collect();
        Ok(out)
    }
}

/// Validates sites against `body` and assembles the chain.
pub fn build_qmc(body: Circuit, sites: Vec<ChannelSite>) -> Result<QuantumMarkovChain> {
    build_qmc_with_limit(body, sites, DEFAULT_BRANCH_LIMIT)
}

pub fn build_qmc_with_limit(
    body: Circuit,
    sites: Vec<ChannelSite>,
    branch_limit: usize,
) -> Result<QuantumMarkovChain> {
    let mut warnings = Vec::new();
    let mut resolved = Vec::with_capacity(sites.len());
    for (i, site) in sites.into_iter().enumerate() {
        if site.position > body.len() {
            return Err(ReachError::usage(format!(
                "channel site {i} ({}): position {} exceeds body length {}",
                site.kind.file_name(),
                site.position,
                body.len()
            )));
        }
        if site.qubit >= body.num_qubits {
            return Err(ReachError::usage(format!(
                "channel site {i} ({}): qubit {} out of range for {} qubits",
                site.kind.file_name(),
                site.qubit,
                body.num_qubits
            )));
        }
        let kraus = kraus_for(&site.kind)
            .map_err(|e| ReachError::usage(format!("channel site {i}: {e}")))?;
        let defect = completeness_defect(&kraus);
        if defect > 1e-10 {
            if site.kind.is_builtin() {
                return Err(ReachError::Invariant(format!(
                    "channel site {i}: built-in Kraus set incomplete (defect {defect:e})"
                )));
            }
            warnings.push(format!(
                "channel site {i}: custom Kraus set is not trace preserving (max |ΣK†K - I| = {defect:.3e})"
            ));
        }
        resolved.push(ResolvedSite { site, kraus });
    }
    // Stable sort keeps declaration order within a position.
    resolved.sort_by_key(|r| r.site.position);
    let qmc = QuantumMarkovChain {
        body,
        sites: resolved,
        warnings,
    };
    let count = qmc.branch_count();
    let mut qmc = qmc;
    if count > branch_limit {
        qmc.warnings.push(format!(
            "branch count {count} exceeds the configured limit {branch_limit}"
        ));
    }
    Ok(qmc)
}

/// One entry of a channel specification file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    pub kind: String,
    pub position: usize,
    pub qubit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Kraus matrices as row-major `[[re, im], ...]` lists of four entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Vec<[f64; 2]>>>,
}

/// Top-level channel specification document: `{"channels": [...]}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub channels: Vec<ChannelEntry>,
}

impl ChannelEntry {
    pub fn to_site(&self) -> Result<ChannelSite> {
        let kind_name = self.kind.as_str();
        let allow = |p: bool, gamma: bool, kraus: bool| -> Result<()> {
            let stray = [
                (self.p.is_some() && !p, "p"),
                (self.gamma.is_some() && !gamma, "gamma"),
                (self.kraus.is_some() && !kraus, "kraus"),
            ];
            match stray.iter().find(|(bad, _)| *bad) {
                Some((_, field)) => Err(ReachError::usage(format!(
                    "field '{field}' is not valid for channel kind '{kind_name}'"
                ))),
                None => Ok(()),
            }
        };
        let need = |v: Option<f64>, field: &str| {
            v.ok_or_else(|| {
                ReachError::usage(format!(
                    "channel kind '{kind_name}' requires field '{field}'"
                ))
            })
        };
        let kind = match kind_name {
            "bitflip" => {
                allow(true, false, false)?;
                ChannelKind::BitFlip {
                    p: need(self.p, "p")?,
                }
            }
            "phaseflip" => {
                allow(true, false, false)?;
                ChannelKind::PhaseFlip {
                    p: need(self.p, "p")?,
                }
            }
            "amplitude_damping" => {
                allow(false, true, false)?;
                ChannelKind::AmplitudeDamping {
                    gamma: need(self.gamma, "gamma")?,
                }
            }
            "measure_z" => {
                allow(false, false, false)?;
                ChannelKind::MeasureZ
            }
            "reset" => {
                allow(false, false, false)?;
                ChannelKind::Reset
            }
            "custom" => {
                allow(false, false, true)?;
                let raw = self.kraus.as_ref().ok_or_else(|| {
                    ReachError::usage("channel kind 'custom' requires field 'kraus'")
                })?;
                let ms = raw
                    .iter()
                    .map(|m| {
                        if m.len() != 4 {
                            return Err(ReachError::usage(format!(
                                "custom Kraus matrix needs 4 entries, got {}",
                                m.len()
                            )));
                        }
                        DenseMatrix::from_entries(
                            2,
                            2,
                            m.iter().map(|&[r, i]| C64::new(r, i)).collect(),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                ChannelKind::CustomKraus(ms)
            }
            other => return Err(ReachError::usage(format!("unknown channel kind '{other}'"))),
        };
        Ok(ChannelSite::new(self.position, self.qubit, kind))
    }

    pub fn from_site(site: &ChannelSite) -> Self {
        let mut entry = ChannelEntry {
            kind: site.kind.file_name().to_string(),
            position: site.position,
            qubit: site.qubit,
            p: None,
            gamma: None,
            kraus: None,
        };
        match &site.kind {
            ChannelKind::BitFlip { p } | ChannelKind::PhaseFlip { p } => entry.p = Some(*p),
            ChannelKind::AmplitudeDamping { gamma } => entry.gamma = Some(*gamma),
            ChannelKind::CustomKraus(ms) => {
                entry.kraus = Some(
                    ms.iter()
                        .map(|m| m.entries().iter().map(|e| [e.re, e.im]).collect())
                        .collect(),
                )
            }
            ChannelKind::MeasureZ | ChannelKind::Reset => {}
        }
        entry
    }
}

impl ChannelFile {
    /// Parses a channel JSON document; unknown fields are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ReachError::parse(e.line(), e.to_string()))
    }

    pub fn sites(&self) -> Result<Vec<ChannelSite>> {
        self.channels
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.to_site()
                    .map_err(|e| ReachError::usage(format!("channel {i}: {e}")))
            })
            .collect()
    }

    pub fn from_sites(sites: &[ChannelSite]) -> Self {
        ChannelFile {
            channels: sites.iter().map(ChannelEntry::from_site).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel file serializes")
    }
}
