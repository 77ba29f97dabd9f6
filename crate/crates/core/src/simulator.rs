//! Pure-state simulation of one chain step.
//!
//! Branch operators are never materialized: gates and 2×2 Kraus factors are
//! applied to the vector in firing order, forking at every channel site.

use crate::error::{ReachError, Result};
use crate::numerics::{
    apply_2level_in_place, qubit_mask, StateVector, Tolerances, C64, DEFAULT_QUBIT_CAP,
};
use crate::qasm::{GateKind, GateOp};
use crate::qmc::{QuantumMarkovChain, ResolvedSite};

/// Unnormalized successor vectors, one per surviving Kraus branch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BranchSet {
    pub branches: Vec<StateVector>,
    /// Kraus index chosen at each site, parallel to `branches`.
    pub provenance: Vec<Vec<usize>>,
}

impl BranchSet {
    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// `Σ ‖b‖²`.
    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(StateVector::norm_sqr).sum()
    }

    fn push(&mut self, v: StateVector, choice: Vec<usize>) {
        self.branches.push(v);
        self.provenance.push(choice);
    }
}

/// Matrix `[m00, m01, m10, m11]` of a single-qubit gate.
pub fn single_qubit_matrix(kind: GateKind) -> Option<[C64; 4]> {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let t = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    Some(match kind {
        GateKind::X => [z, o, o, z],
        GateKind::Y => [z, -i, i, z],
        GateKind::Z => [o, z, z, -o],
        GateKind::H => [h, h, h, -h],
        GateKind::S => [o, z, z, i],
        GateKind::Sdg => [o, z, z, -i],
        GateKind::T => [o, z, z, t],
        GateKind::Tdg => [o, z, z, t.conj()],
        GateKind::U3(theta, phi, lambda) => {
            let (s, c) = (theta / 2.0).sin_cos();
            [
                C64::new(c, 0.0),
                -C64::from_polar(s, lambda),
                C64::from_polar(s, phi),
                C64::from_polar(c, phi + lambda),
            ]
        }
        GateKind::Cx | GateKind::Cz | GateKind::Ccx | GateKind::Swap => return None,
    })
}

/// Applies `g` in place; `g` must already be valid for the register.
pub(crate) fn apply_gate_in_place(g: &GateOp, amps: &mut [C64], num_qubits: usize) {
    if let Some(m) = single_qubit_matrix(g.kind) {
        apply_2level_in_place(amps, num_qubits, g.qubits[0], &m);
        return;
    }
    let mask = |q: usize| qubit_mask(num_qubits, q);
    match g.kind {
        GateKind::Cx | GateKind::Ccx => {
            let (controls, target) = g.qubits.split_at(g.qubits.len() - 1);
            let cmask: usize = controls.iter().map(|&q| mask(q)).sum();
            let tmask = mask(target[0]);
            for i in 0..amps.len() {
                if i & cmask == cmask && i & tmask == 0 {
                    amps.swap(i, i | tmask);
                }
            }
        }
        GateKind::Cz => {
            let both = mask(g.qubits[0]) | mask(g.qubits[1]);
            for (i, a) in amps.iter_mut().enumerate() {
                if i & both == both {
                    *a = -*a;
                }
            }
        }
        GateKind::Swap => {
            let (ma, mb) = (mask(g.qubits[0]), mask(g.qubits[1]));
            for i in 0..amps.len() {
                if i & ma != 0 && i & mb == 0 {
                    amps.swap(i, (i & !ma) | mb);
                }
            }
        }
        _ => unreachable!("single-qubit kinds handled above"),
    }
}

/// Standard unitary action of `g` on `v`.
pub fn apply_gate(g: &GateOp, v: &StateVector) -> Result<StateVector> {
    g.validate(v.num_qubits()).map_err(ReachError::Usage)?;
    let mut out = v.clone();
    let n = out.num_qubits();
    apply_gate_in_place(g, out.amplitudes_mut(), n);
    Ok(out)
}

fn apply_gates(ops: &[GateOp], v: &mut StateVector) {
    let n = v.num_qubits();
    for g in ops {
        apply_gate_in_place(g, v.amplitudes_mut(), n);
    }
}

struct Expander<'a> {
    ops: &'a [GateOp],
    sites: &'a [ResolvedSite],
    branch_drop: f64,
    out: BranchSet,
}

impl Expander<'_> {
    fn expand(
        &mut self,
        site_idx: usize,
        cursor: usize,
        mut v: StateVector,
        choice: &mut Vec<usize>,
    ) {
        let Some(rs) = self.sites.get(site_idx) else {
            apply_gates(&self.ops[cursor..], &mut v);
            if v.norm() >= self.branch_drop {
                self.out.push(v, choice.clone());
            }
            return;
        };
        let pos = rs.site.position;
        apply_gates(&self.ops[cursor..pos], &mut v);
        let n = v.num_qubits();
        for (k, m) in rs.kraus.iter().enumerate() {
            let e = m.entries();
            let mut w = v.clone();
            apply_2level_in_place(
                w.amplitudes_mut(),
                n,
                rs.site.qubit,
                &[e[0], e[1], e[2], e[3]],
            );
            if w.norm_sqr() == 0.0 {
                continue;
            }
            choice.push(k);
            self.expand(site_idx + 1, pos, w, choice);
            choice.pop();
        }
    }
}

/// Runs every branch of one step on a register at least as wide as the chain;
/// the chain acts on the leading qubits.
fn branches_on(qmc: &QuantumMarkovChain, v: &StateVector, branch_drop: f64) -> BranchSet {
    debug_assert!(v.num_qubits() >= qmc.num_qubits());
    let mut ex = Expander {
        ops: &qmc.body().ops,
        sites: qmc.sites(),
        branch_drop,
        out: BranchSet::default(),
    };
    ex.expand(0, 0, v.clone(), &mut Vec::with_capacity(qmc.sites().len()));
    ex.out
}

/// Image of `v` under one step: all Kraus-branch successors, in branch-index
/// order, without those whose norm is below `tol.branch_drop`.
pub fn step_image(
    qmc: &QuantumMarkovChain,
    v: &StateVector,
    tol: &Tolerances,
) -> Result<BranchSet> {
    if v.num_qubits() != qmc.num_qubits() {
        return Err(ReachError::usage(format!(
            "state has {} qubits, chain has {}",
            v.num_qubits(),
            qmc.num_qubits()
        )));
    }
    Ok(branches_on(qmc, v, tol.branch_drop))
}

/// Traces out `traced_qubit` by measuring it and resetting it to `|0⟩`:
/// returns `{P0 v, X P1 v}` minus zero branches.
pub fn partial_trace_branches(v: &StateVector, traced_qubit: usize) -> Result<BranchSet> {
    let n = v.num_qubits();
    if traced_qubit >= n {
        return Err(ReachError::usage(format!(
            "traced qubit {traced_qubit} out of range for {n} qubits"
        )));
    }
    let drop = Tolerances::default().branch_drop;
    let mask = qubit_mask(n, traced_qubit);
    let mut out = BranchSet::default();
    for outcome in 0..2 {
        let mut amps = vec![C64::new(0.0, 0.0); v.dim()];
        for (i, &a) in v.amplitudes().iter().enumerate() {
            if (i & mask != 0) == (outcome == 1) {
                amps[i & !mask] = a;
            }
        }
        let b = StateVector::from_amplitudes(amps)?;
        if b.norm() >= drop {
            out.push(b, vec![outcome]);
        }
    }
    Ok(out)
}

/// `(1/√d) Σ_i |i⟩|i⟩` on `2n` qubits, pairing qubit `k` with qubit `n + k`.
pub fn max_entangled(n: usize) -> Result<StateVector> {
    max_entangled_with_cap(n, DEFAULT_QUBIT_CAP)
}

pub fn max_entangled_with_cap(n: usize, cap: usize) -> Result<StateVector> {
    if n == 0 {
        return Err(ReachError::usage("each half needs at least one qubit"));
    }
    if 2 * n > cap {
        return Err(ReachError::CapExceeded {
            requested: 2 * n,
            cap,
        });
    }
    let d = 1usize << n;
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        amps[i * d + i] = amp;
    }
    StateVector::from_amplitudes(amps)
}

/// Pure-state decomposition of the normalized Choi matrix `J(E)/d`:
/// each branch operator applied to the first half of the maximally
/// entangled state.
pub fn choi_branches(qmc: &QuantumMarkovChain) -> Result<BranchSet> {
    choi_branches_with_cap(qmc, DEFAULT_QUBIT_CAP)
}

pub fn choi_branches_with_cap(qmc: &QuantumMarkovChain, cap: usize) -> Result<BranchSet> {
    let phi = max_entangled_with_cap(qmc.num_qubits(), cap)?;
    Ok(branches_on(qmc, &phi, Tolerances::default().branch_drop))
}
