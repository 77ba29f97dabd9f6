//! Breadth-first computation of the reachable subspace.
//!
//! The explored subspace is kept as an orthonormal basis `P'`. Every vector
//! popped from the FIFO frontier is expanded into its Kraus branches; the
//! part of each branch orthogonal to `P'` is normalized and, when it is not
//! null, joins both `P'` and the frontier. The loop stops when the frontier
//! drains or `P'` spans the whole space, so it runs at most `d` times.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use crate::error::{ReachError, Result};
use crate::numerics::{
    gram_schmidt, inner_product, normalize, orthogonalize_against, project_onto, StateVector,
    Tolerances, C64, DEFAULT_QUBIT_CAP,
};
use crate::qmc::QuantumMarkovChain;
use crate::simulator::step_image;

/// Ordered orthonormal basis of a subspace of `(C²)^⊗n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    num_qubits: usize,
    basis: Vec<StateVector>,
}

impl SubspaceBasis {
    pub fn empty(num_qubits: usize) -> Self {
        SubspaceBasis {
            num_qubits,
            basis: Vec::new(),
        }
    }

    /// Orthonormalizes `vectors` (which must all have `num_qubits` qubits).
    pub fn span_of(num_qubits: usize, vectors: &[StateVector], tol: &Tolerances) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.num_qubits() != num_qubits) {
            return Err(ReachError::usage(format!(
                "vector has {} qubits, subspace has {num_qubits}",
                v.num_qubits()
            )));
        }
        Ok(SubspaceBasis {
            num_qubits,
            basis: gram_schmidt(vectors, tol)?,
        })
    }

    /// Wraps vectors that are already orthonormal; checked against `tol.ortho_check`.
    pub fn from_orthonormal(
        num_qubits: usize,
        basis: Vec<StateVector>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let s = SubspaceBasis { num_qubits, basis };
        s.check_orthonormal(tol)?;
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.basis
    }

    pub fn into_vectors(self) -> Vec<StateVector> {
        self.basis
    }

    pub fn project(&self, v: &StateVector) -> StateVector {
        project_onto(&self.basis, v)
    }

    /// `‖v - P v‖`.
    pub fn residual(&self, v: &StateVector) -> Result<f64> {
        if v.num_qubits() != self.num_qubits {
            return Err(ReachError::usage(format!(
                "vector has {} qubits, subspace has {}",
                v.num_qubits(),
                self.num_qubits
            )));
        }
        v.distance(&self.project(v))
    }

    /// Whether `v` lies in the subspace up to `tol.null_threshold · max(1, ‖v‖)`.
    pub fn contains(&self, v: &StateVector, tol: &Tolerances) -> Result<bool> {
        self.contains_within(v, tol.null_threshold)
    }

    /// Same as [`contains`](Self::contains) with an explicit relative threshold.
    pub fn contains_within(&self, v: &StateVector, threshold: f64) -> Result<bool> {
        Ok(self.residual(v)? <= threshold * v.norm().max(1.0))
    }

    /// Largest residual of `other`'s basis vectors against `self`.
    pub fn max_residual_of(&self, other: &SubspaceBasis) -> Result<f64> {
        other
            .basis
            .iter()
            .map(|v| self.residual(v))
            .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
    }

    /// Equal dimension and mutual containment at `threshold`.
    pub fn same_span(&self, other: &SubspaceBasis, threshold: f64) -> Result<bool> {
        Ok(self.dim() == other.dim()
            && self.max_residual_of(other)? <= threshold
            && other.max_residual_of(self)? <= threshold)
    }

    pub fn check_orthonormal(&self, tol: &Tolerances) -> Result<()> {
        for (i, a) in self.basis.iter().enumerate() {
            if a.num_qubits() != self.num_qubits {
                return Err(ReachError::Invariant(format!(
                    "basis vector {i} has wrong width"
                )));
            }
            if (a.norm() - 1.0).abs() > 1e-8 {
                return Err(ReachError::Invariant(format!(
                    "basis vector {i} has norm {}",
                    a.norm()
                )));
            }
            for (j, b) in self.basis[..i].iter().enumerate() {
                let ov = inner_product(b, a)?.norm();
                if ov > tol.ortho_check {
                    return Err(ReachError::Invariant(format!(
                        "basis vectors {j} and {i} overlap by {ov:e}"
                    )));
                }
            }
        }
        if self.dim() > 1 << self.num_qubits {
            return Err(ReachError::Invariant("basis larger than the space".into()));
        }
        Ok(())
    }
}

/// Engine settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachConfig {
    pub tolerances: Tolerances,
    pub qubit_cap: usize,
}

impl Default for ReachConfig {
    fn default() -> Self {
        ReachConfig {
            tolerances: Tolerances::default(),
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

impl ReachConfig {
    pub fn with_tolerances(tolerances: Tolerances) -> Self {
        ReachConfig {
            tolerances,
            ..ReachConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReachReport {
    pub subspace: SubspaceBasis,
    /// Executions of the main loop body.
    pub iterations: usize,
    /// Kraus branches evaluated across all image computations.
    pub branch_evals: usize,
    /// The explored subspace reached the full dimension.
    pub saturated: bool,
    pub wall_time: Duration,
}

impl ReachReport {
    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }
}

/// Computes an orthonormal basis of the subspace reachable from `span(init)`.
pub fn reachable_subspace(
    qmc: &QuantumMarkovChain,
    init: &[StateVector],
    config: &ReachConfig,
) -> Result<ReachReport> {
    let start = Instant::now();
    let tol = &config.tolerances;
    tol.validate()?;
    let n = qmc.num_qubits();
    if n > config.qubit_cap {
        return Err(ReachError::CapExceeded {
            requested: n,
            cap: config.qubit_cap,
        });
    }
    if init.is_empty() {
        return Err(ReachError::usage("initial state list is empty"));
    }
    if let Some(v) = init.iter().find(|v| v.num_qubits() != n) {
        return Err(ReachError::usage(format!(
            "initial state has {} qubits, chain has {n}",
            v.num_qubits()
        )));
    }
    let d = qmc.dim();

    let mut basis = gram_schmidt(init, tol)?;
    if basis.is_empty() {
        return Err(ReachError::usage(
            "every initial state is null at the configured threshold",
        ));
    }
    let mut queue: VecDeque<usize> = (0..basis.len()).collect();
    let mut iterations = 0usize;
    let mut branch_evals = 0usize;

    while basis.len() < d {
        let Some(idx) = queue.pop_front() else { break };
        iterations += 1;
        if iterations > d {
            return Err(ReachError::Invariant(format!(
                "main loop exceeded {d} iterations"
            )));
        }
        let image = step_image(qmc, &basis[idx], tol)?;
        branch_evals += image.len();
        for branch in image.branches {
            if basis.len() == d {
                break;
            }
            // Branches surviving step_image are above branch_drop; rescale before
            // thresholding so the null test is scale-free.
            let inv = 1.0 / branch.norm();
            let mut r = branch.scaled(C64::new(inv, 0.0));
            orthogonalize_against(&mut r, &basis);
            if let Some(u) = normalize(&r, tol) {
                queue.push_back(basis.len());
                basis.push(u);
            }
        }
    }

    let saturated = basis.len() == d;
    Ok(ReachReport {
        subspace: SubspaceBasis {
            num_qubits: n,
            basis,
        },
        iterations,
        branch_evals,
        saturated,
        wall_time: start.elapsed(),
    })
}

/// Outcome of the post-hoc correctness checks on one engine run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofChecks {
    /// Loop ran at most `d` times.
    pub loop_bound: bool,
    /// Every branch image of every basis vector lies in the span.
    pub closure: bool,
    /// Largest relative residual seen in the closure check.
    pub closure_residual: f64,
    /// Every initial vector lies in the span.
    pub init_contained: bool,
}

impl ProofChecks {
    pub fn all_hold(&self) -> bool {
        self.loop_bound && self.closure && self.init_contained
    }
}

/// Verifies loop bound, closure and initial containment at relative threshold `threshold`.
pub fn verify_run(
    qmc: &QuantumMarkovChain,
    init: &[StateVector],
    report: &ReachReport,
    threshold: f64,
) -> Result<ProofChecks> {
    let tol = Tolerances::default();
    let sub = &report.subspace;
    let mut worst = 0.0f64;
    for b in sub.vectors() {
        for img in step_image(qmc, b, &tol)?.branches {
            let rel = sub.residual(&img)? / img.norm().max(1.0);
            worst = worst.max(rel);
        }
    }
    let mut init_contained = true;
    for v in init {
        if v.norm() > tol.null_threshold && !sub.contains_within(v, threshold)? {
            init_contained = false;
        }
    }
    Ok(ProofChecks {
        loop_bound: report.iterations <= qmc.dim(),
        closure: worst <= threshold,
        closure_residual: worst,
        init_contained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qasm::{parse_qasm, Circuit, GateKind, GateOp};
    use crate::qmc::{build_qmc, ChannelKind, ChannelSite};

    fn ket(label: &str) -> StateVector {
        StateVector::from_label(label).unwrap()
    }

    fn qrw3() -> QuantumMarkovChain {
        build_qmc(
            parse_qasm(include_str!("../../../circuits/qrw3.qasm")).unwrap(),
            vec![],
        )
        .unwrap()
    }

    fn sum(labels: &[(&str, f64)]) -> StateVector {
        let n = labels[0].0.len();
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        for (l, c) in labels {
            amps[usize::from_str_radix(l, 2).unwrap()] += C64::new(*c, 0.0);
        }
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn qrw3_reaches_six_dimensions() {
        let qmc = qrw3();
        let report = reachable_subspace(&qmc, &[ket("000")], &ReachConfig::default()).unwrap();
        assert_eq!(report.dim(), 6);
        assert!(!report.saturated);
        let tol = Tolerances::default();
        report.subspace.check_orthonormal(&tol).unwrap();
        let golden = sum(&[("001", 1.0), ("111", 1.0)]);
        assert!(report
            .subspace
            .contains(&golden.scaled(C64::new(0.5f64.sqrt(), 0.0)), &tol)
            .unwrap());
        assert!(!report.subspace.contains(&ket("100"), &tol).unwrap());
        for member in report.subspace.vectors() {
            assert!(report.subspace.contains(member, &tol).unwrap());
        }
    }

    #[test]
    fn identity_chain_keeps_init() {
        let qmc = build_qmc(Circuit::new(2, vec![]).unwrap(), vec![]).unwrap();
        let init = [ket("+0"), ket("01")];
        let report = reachable_subspace(&qmc, &init, &ReachConfig::default()).unwrap();
        assert_eq!(report.dim(), 2);
        for v in &init {
            assert!(report.subspace.contains(v, &Tolerances::default()).unwrap());
        }
        assert_eq!(report.iterations, 2);
    }

    #[test]
    fn saturation_short_circuits() {
        let qmc = build_qmc(
            Circuit::new(1, vec![GateOp::new(GateKind::H, vec![0])]).unwrap(),
            vec![],
        )
        .unwrap();
        let report = reachable_subspace(&qmc, &[ket("0")], &ReachConfig::default()).unwrap();
        assert_eq!(report.dim(), 2);
        assert!(report.saturated);
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn rejects_bad_init() {
        let qmc = qrw3();
        let cfg = ReachConfig::default();
        assert!(matches!(
            reachable_subspace(&qmc, &[], &cfg),
            Err(ReachError::Usage(_))
        ));
        assert!(matches!(
            reachable_subspace(&qmc, &[StateVector::zeros(3)], &cfg),
            Err(ReachError::Usage(_))
        ));
        assert!(matches!(
            reachable_subspace(&qmc, &[ket("00")], &cfg),
            Err(ReachError::Usage(_))
        ));
        let capped = ReachConfig {
            qubit_cap: 2,
            ..cfg
        };
        assert!(matches!(
            reachable_subspace(&qmc, &[ket("000")], &capped),
            Err(ReachError::CapExceeded {
                requested: 3,
                cap: 2
            })
        ));
    }

    #[test]
    fn faulty_walk_passes_proof_checks() {
        let qmc = build_qmc(
            parse_qasm(include_str!("../../../circuits/qrw3.qasm")).unwrap(),
            vec![ChannelSite::new(0, 0, ChannelKind::BitFlip { p: 0.5 })],
        )
        .unwrap();
        let init = [ket("000")];
        let report = reachable_subspace(&qmc, &init, &ReachConfig::default()).unwrap();
        let checks = verify_run(&qmc, &init, &report, 1e-6).unwrap();
        assert!(checks.all_hold(), "{checks:?}");
    }

    #[test]
    fn contains_examples() {
        let s = SubspaceBasis::span_of(2, &[ket("00"), ket("01")], &Tolerances::default()).unwrap();
        let tol = Tolerances::default();
        assert!(s.contains(&ket("0+"), &tol).unwrap());
        assert!(!s.contains(&ket("10"), &tol).unwrap());
        assert!(s.contains(&StateVector::zeros(2), &tol).unwrap());
        assert!(s.contains(&ket("0"), &tol).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let qmc = build_qmc(
            parse_qasm(include_str!("../../../circuits/qrw3.qasm")).unwrap(),
            vec![ChannelSite::new(
                0,
                0,
                ChannelKind::AmplitudeDamping { gamma: 0.3 },
            )],
        )
        .unwrap();
        let a = reachable_subspace(&qmc, &[ket("000")], &ReachConfig::default()).unwrap();
        let b = reachable_subspace(&qmc, &[ket("000")], &ReachConfig::default()).unwrap();
        assert_eq!(a.subspace, b.subspace);
        assert_eq!(
            (a.iterations, a.branch_evals, a.saturated),
            (b.iterations, b.branch_evals, b.saturated)
        );
    }
}
