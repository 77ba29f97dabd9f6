//! Brute-force reachability reference.
//!
//! Materializes every branch operator as a dense `d × d` matrix, iterates the
//! density matrix `σ = Σ_{i<d} E^i(ρ)` and extracts its support with a
//! column-pivoted Gram–Schmidt. Gate matrices are built from Kronecker
//! products and bit permutations, independently of the simulator's in-place
//! kernels. Only meant for small registers.

use crate::error::{ReachError, Result};
use crate::numerics::{gram_schmidt, DenseMatrix, StateVector, Tolerances, C64};
use crate::qasm::{GateKind, GateOp};
use crate::qmc::QuantumMarkovChain;
use crate::reach::SubspaceBasis;

/// Largest register the oracle accepts by default.
pub const DEFAULT_ORACLE_CAP: usize = 6;

/// Hermitian positive semidefinite `d × d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    m: DenseMatrix,
}

impl DensityMatrix {
    /// `|v⟩⟨v|`.
    pub fn pure(v: &StateVector) -> Self {
        Self::from_vectors(std::slice::from_ref(v)).expect("one vector")
    }

    /// `Σ_k |v_k⟩⟨v_k|`.
    pub fn from_vectors(vs: &[StateVector]) -> Result<Self> {
        let first = vs
            .first()
            .ok_or_else(|| ReachError::usage("need at least one vector"))?;
        let n = first.num_qubits();
        let d = first.dim();
        let mut m = DenseMatrix::zeros(d, d);
        for v in vs {
            if v.num_qubits() != n {
                return Err(ReachError::usage("vectors differ in width"));
            }
            let a = v.amplitudes();
            for r in 0..d {
                if a[r] == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    let e = m.get(r, c) + a[r] * a[c].conj();
                    m.set(r, c, e);
                }
            }
        }
        Ok(DensityMatrix { num_qubits: n, m })
    }

    pub fn from_matrix(num_qubits: usize, m: DenseMatrix) -> Result<Self> {
        let d = 1usize << num_qubits;
        if m.rows() != d || m.cols() != d {
            return Err(ReachError::usage(format!(
                "{num_qubits}-qubit density matrix must be {d}x{d}"
            )));
        }
        Ok(DensityMatrix { num_qubits, m })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.m.get(i, i)).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        DensityMatrix {
            num_qubits: self.num_qubits,
            m: self.m.scaled(C64::new(s, 0.0)),
        }
    }

    pub fn add(&self, other: &DensityMatrix) -> Result<Self> {
        Ok(DensityMatrix {
            num_qubits: self.num_qubits,
            m: self.m.add(&other.m)?,
        })
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.m.max_abs_diff(&self.m.adjoint())
    }

    /// Hermitian to 1e-10, trace in `(0, 1 + 1e-8]`, and no negative pivot
    /// below -1e-10 in an unpivoted `LDL†` sweep.
    pub fn validate(&self) -> Result<()> {
        if self.hermiticity_defect() > 1e-10 {
            return Err(ReachError::Invariant(
                "density matrix is not Hermitian".into(),
            ));
        }
        let tr = self.trace();
        if !(tr.re > 0.0 && tr.re <= 1.0 + 1e-8 && tr.im.abs() <= 1e-10) {
            return Err(ReachError::Invariant(format!(
                "density matrix trace {tr} out of range"
            )));
        }
        if let Some(p) = ldl_pivots(&self.m).into_iter().find(|&p| p < -1e-10) {
            return Err(ReachError::Invariant(format!(
                "density matrix has negative pivot {p:e}"
            )));
        }
        Ok(())
    }

    /// `Tr_q(self)` kept in the register as `|0⟩⟨0|_q ⊗ Tr_q(self)`.
    pub fn partial_trace_keep_zero(&self, qubit: usize) -> Result<Self> {
        if qubit >= self.num_qubits {
            return Err(ReachError::usage("qubit out of range"));
        }
        let d = self.dim();
        let bit = 1usize << (self.num_qubits - 1 - qubit);
        let mut out = DenseMatrix::zeros(d, d);
        for r in (0..d).filter(|r| r & bit == 0) {
            for c in (0..d).filter(|c| c & bit == 0) {
                let v = self.m.get(r, c) + self.m.get(r | bit, c | bit);
                out.set(r, c, v);
            }
        }
        Ok(DensityMatrix {
            num_qubits: self.num_qubits,
            m: out,
        })
    }
}

/// Diagonal pivots of a plain elimination; all are `>= 0` (to rounding) for PSD input.
fn ldl_pivots(m: &DenseMatrix) -> Vec<f64> {
    let d = m.rows();
    let mut a = m.clone();
    let mut pivots = Vec::with_capacity(d);
    for k in 0..d {
        let p = a.get(k, k).re;
        pivots.push(p);
        if p.abs() <= 1e-14 {
            continue;
        }
        for r in k + 1..d {
            let f = a.get(r, k) / p;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for c in k..d {
                let v = a.get(r, c) - f * a.get(k, c);
                a.set(r, c, v);
            }
        }
    }
    pivots
}

fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = DenseMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let x = a.get(i, j);
            for k in 0..br {
                for l in 0..bc {
                    out.set(i * br + k, j * bc + l, x * b.get(k, l));
                }
            }
        }
    }
    out
}

/// `I ⊗ … ⊗ m ⊗ … ⊗ I` with `m` at position `qubit`.
fn embed_single(m: &DenseMatrix, qubit: usize, n: usize) -> DenseMatrix {
    let left = DenseMatrix::identity(1 << qubit);
    let right = DenseMatrix::identity(1 << (n - 1 - qubit));
    kron(&kron(&left, m), &right)
}

fn oracle_gate_2x2(kind: GateKind) -> Option<DenseMatrix> {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};
    let r = |x: f64| C64::new(x, 0.0);
    let ph = |t: f64| C64::new(t.cos(), t.sin());
    let m = |a, b, c, d| Some(DenseMatrix::two_by_two(a, b, c, d));
    let h = FRAC_1_SQRT_2;
    match kind {
        GateKind::X => m(r(0.0), r(1.0), r(1.0), r(0.0)),
        GateKind::Y => m(r(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), r(0.0)),
        GateKind::Z => m(r(1.0), r(0.0), r(0.0), r(-1.0)),
        GateKind::H => m(r(h), r(h), r(h), r(-h)),
        GateKind::S => m(r(1.0), r(0.0), r(0.0), ph(PI / 2.0)),
        GateKind::Sdg => m(r(1.0), r(0.0), r(0.0), ph(-PI / 2.0)),
        GateKind::T => m(r(1.0), r(0.0), r(0.0), ph(PI / 4.0)),
        GateKind::Tdg => m(r(1.0), r(0.0), r(0.0), ph(-PI / 4.0)),
        GateKind::U3(t, p, l) => {
            let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
            m(r(c), -ph(l) * s, ph(p) * s, ph(p + l) * c)
        }
        _ => None,
    }
}

fn bits_of(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|q| (index >> (n - 1 - q)) & 1 == 1).collect()
}

fn index_of(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

/// Dense matrix of a gate on an `n`-qubit register.
pub fn gate_matrix(g: &GateOp, n: usize) -> DenseMatrix {
    if let Some(m) = oracle_gate_2x2(g.kind) {
        return embed_single(&m, g.qubits[0], n);
    }
    let d = 1usize << n;
    let mut out = DenseMatrix::zeros(d, d);
    for col in 0..d {
        let mut bits = bits_of(col, n);
        let mut amp = C64::new(1.0, 0.0);
        let q = &g.qubits;
        match g.kind {
            GateKind::Cx => bits[q[1]] ^= bits[q[0]],
            GateKind::Ccx => bits[q[2]] ^= bits[q[0]] && bits[q[1]],
            GateKind::Swap => bits.swap(q[0], q[1]),
            GateKind::Cz => {
                if bits[q[0]] && bits[q[1]] {
                    amp = -amp;
                }
            }
            _ => unreachable!(),
        }
        out.set(index_of(&bits), col, amp);
    }
    out
}

/// Every branch operator as a dense matrix, in branch-index order.
pub fn branch_operators(qmc: &QuantumMarkovChain) -> Result<Vec<DenseMatrix>> {
    let n = qmc.num_qubits();
    let ops = &qmc.body().ops;
    let gates: Vec<DenseMatrix> = ops.iter().map(|g| gate_matrix(g, n)).collect();
    let sites = qmc.sites();
    let mut out = Vec::with_capacity(qmc.branch_count());
    for choice in qmc.plan().branches() {
        let mut acc = DenseMatrix::identity(1 << n);
        let mut next_site = 0;
        for pos in 0..=ops.len() {
            while next_site < sites.len() && sites[next_site].site.position == pos {
                let rs = &sites[next_site];
                let k = embed_single(&rs.kraus[choice[next_site]], rs.site.qubit, n);
                acc = k.matmul(&acc)?;
                next_site += 1;
            }
            if let Some(g) = gates.get(pos) {
                acc = g.matmul(&acc)?;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(ReachError::CapExceeded { requested: n, cap })
    } else {
        Ok(())
    }
}

fn apply_channel(ops: &[DenseMatrix], rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = rho.dim();
    let mut acc = DenseMatrix::zeros(d, d);
    for e in ops {
        acc = acc.add(&e.matmul(&rho.m)?.matmul(&e.adjoint())?)?;
    }
    Ok(DensityMatrix {
        num_qubits: rho.num_qubits,
        m: acc,
    })
}

/// `Σ_b E_b ρ E_b†`.
pub fn evolve_density(qmc: &QuantumMarkovChain, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_cap(qmc.num_qubits(), DEFAULT_ORACLE_CAP)?;
    if rho.num_qubits != qmc.num_qubits() {
        return Err(ReachError::usage("density matrix width differs from chain"));
    }
    apply_channel(&branch_operators(qmc)?, rho)
}

/// Orthonormal basis of the column space of `rho`, by Gram–Schmidt with
/// largest-residual column pivoting; stops once every remaining pivot norm
/// is at or below `tol.null_threshold`.
pub fn support_basis(rho: &DensityMatrix, tol: &Tolerances) -> SubspaceBasis {
    let d = rho.dim();
    let mut cols: Vec<Vec<C64>> = (0..d)
        .map(|c| (0..d).map(|r| rho.m.get(r, c)).collect())
        .collect();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let norm = |v: &[C64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    while let Some((best, pivot)) = cols
        .iter()
        .enumerate()
        .map(|(i, c)| (i, norm(c)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        if pivot <= tol.null_threshold {
            break;
        }
        let mut q = cols.swap_remove(best);
        // one more sweep against the accepted basis before normalizing
        for b in &basis {
            let c: C64 = b.iter().zip(&q).map(|(x, y)| x.conj() * y).sum();
            for (qi, bi) in q.iter_mut().zip(b) {
                *qi -= c * bi;
            }
        }
        let nq = norm(&q);
        if nq <= tol.null_threshold {
            continue;
        }
        for x in &mut q {
            *x /= nq;
        }
        for col in &mut cols {
            let c: C64 = q.iter().zip(col.iter()).map(|(x, y)| x.conj() * y).sum();
            for (ci, qi) in col.iter_mut().zip(&q) {
                *ci -= c * qi;
            }
        }
        basis.push(q);
    }
    let vectors = basis
        .into_iter()
        .map(|a| StateVector::from_amplitudes(a).expect("power-of-two column"))
        .collect();
    SubspaceBasis::from_orthonormal(rho.num_qubits, vectors, tol)
        .expect("pivoted Gram-Schmidt output is orthonormal")
}

/// Supports of the partial sums `Σ_{i≤k} E^i(ρ)` for `k = 0..d`.
pub fn saturation_profile(
    qmc: &QuantumMarkovChain,
    rho: &DensityMatrix,
    tol: &Tolerances,
) -> Result<Vec<SubspaceBasis>> {
    check_cap(qmc.num_qubits(), DEFAULT_ORACLE_CAP)?;
    if rho.num_qubits != qmc.num_qubits() {
        return Err(ReachError::usage("density matrix width differs from chain"));
    }
    let ops = branch_operators(qmc)?;
    let d = qmc.dim();
    let normalized = |r: DensityMatrix| {
        let t = r.trace().re;
        if t > 0.0 {
            Some(r.scaled(1.0 / t))
        } else {
            None
        }
    };
    let Some(mut term) = normalized(rho.clone()) else {
        return Err(ReachError::usage("initial density matrix has zero trace"));
    };
    let mut acc = term.clone();
    let mut out = vec![support_basis(&acc, tol)];
    for _ in 1..d {
        // Each term is rescaled to unit trace; positive rescaling leaves every
        // support unchanged.
        match normalized(apply_channel(&ops, &term)?) {
            Some(t) => term = t,
            None => {
                out.push(out.last().expect("non-empty").clone());
                continue;
            }
        }
        let sum = acc.add(&term)?;
        acc = normalized(sum).expect("positive trace");
        out.push(support_basis(&acc, tol));
    }
    Ok(out)
}

/// `supp(Σ_{i<d} E^i(ρ))`.
pub fn oracle_reachable(
    qmc: &QuantumMarkovChain,
    rho: &DensityMatrix,
    tol: &Tolerances,
) -> Result<SubspaceBasis> {
    Ok(saturation_profile(qmc, rho, tol)?
        .pop()
        .expect("profile has d entries"))
}

/// `span(a ∪ b)`.
pub fn join(a: &SubspaceBasis, b: &SubspaceBasis, tol: &Tolerances) -> Result<SubspaceBasis> {
    if a.num_qubits() != b.num_qubits() {
        return Err(ReachError::usage("subspaces live in different spaces"));
    }
    let all: Vec<StateVector> = a.vectors().iter().chain(b.vectors()).cloned().collect();
    let basis = gram_schmidt(&all, tol)?;
    SubspaceBasis::from_orthonormal(a.num_qubits(), basis, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qasm::{parse_qasm, Circuit};
    use crate::qmc::{build_qmc, ChannelKind, ChannelSite};
    use crate::simulator::apply_gate;

    fn ket(label: &str) -> StateVector {
        StateVector::from_label(label).unwrap()
    }

    fn id_chain(n: usize) -> QuantumMarkovChain {
        build_qmc(Circuit::new(n, vec![]).unwrap(), vec![]).unwrap()
    }

    #[test]
    fn identity_chain_leaves_rho_unchanged() {
        let rho = DensityMatrix::from_vectors(&[ket("0+"), ket("1-")]).unwrap();
        let out = evolve_density(&id_chain(2), &rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn unitary_conjugates() {
        let body = parse_qasm("OPENQASM 2.0; qreg q[2]; h q[0]; cx q[0],q[1];").unwrap();
        let qmc = build_qmc(body.clone(), vec![]).unwrap();
        let out = evolve_density(&qmc, &DensityMatrix::pure(&ket("00"))).unwrap();
        let mut v = ket("00");
        for g in &body.ops {
            v = apply_gate(g, &v).unwrap();
        }
        assert!(out.matrix().max_abs_diff(DensityMatrix::pure(&v).matrix()) < 1e-15);
    }

    #[test]
    fn half_bitflip_mixes_completely() {
        let qmc = build_qmc(
            Circuit::new(1, vec![]).unwrap(),
            vec![ChannelSite::new(0, 0, ChannelKind::BitFlip { p: 0.5 })],
        )
        .unwrap();
        let out = evolve_density(&qmc, &DensityMatrix::pure(&ket("0"))).unwrap();
        let half = DenseMatrix::identity(2).scaled(C64::new(0.5, 0.0));
        assert!(out.matrix().max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn support_examples() {
        let tol = Tolerances::default();
        assert_eq!(
            support_basis(&DensityMatrix::pure(&ket("0")), &tol).dim(),
            1
        );
        let mixed =
            DensityMatrix::from_matrix(3, DenseMatrix::identity(8).scaled(C64::new(0.125, 0.0)))
                .unwrap();
        assert_eq!(support_basis(&mixed, &tol).dim(), 8);
        let rho = DensityMatrix::from_vectors(&[ket("0"), ket("+")])
            .unwrap()
            .scaled(0.5);
        rho.validate().unwrap();
        assert_eq!(support_basis(&rho, &tol).dim(), 2);
    }

    #[test]
    fn oracle_small_cases() {
        let tol = Tolerances::default();
        let r = oracle_reachable(&id_chain(1), &DensityMatrix::pure(&ket("0")), &tol).unwrap();
        assert_eq!(r.dim(), 1);
        let qrw = build_qmc(
            parse_qasm(include_str!("../../../circuits/qrw3.qasm")).unwrap(),
            vec![],
        )
        .unwrap();
        let r = oracle_reachable(&qrw, &DensityMatrix::pure(&ket("000")), &tol).unwrap();
        assert_eq!(r.dim(), 6);
    }

    #[test]
    fn oracle_cap_is_enforced() {
        let qmc = id_chain(7);
        let rho = DensityMatrix::pure(&ket("0000000"));
        assert!(matches!(
            evolve_density(&qmc, &rho),
            Err(ReachError::CapExceeded {
                requested: 7,
                cap: 6
            })
        ));
    }

    #[test]
    fn join_examples() {
        let tol = Tolerances::default();
        let z = SubspaceBasis::span_of(1, &[ket("0")], &tol).unwrap();
        let o = SubspaceBasis::span_of(1, &[ket("1")], &tol).unwrap();
        assert_eq!(join(&z, &z, &tol).unwrap().dim(), 1);
        assert_eq!(join(&z, &o, &tol).unwrap().dim(), 2);
        let x = SubspaceBasis::span_of(2, &[ket("0+"), ket("1-")], &tol).unwrap();
        assert!(join(&x, &x, &tol).unwrap().same_span(&x, 1e-10).unwrap());
    }

    #[test]
    fn validation_catches_bad_matrices() {
        let mut m = DenseMatrix::zeros(2, 2);
        m.set(0, 1, C64::new(1.0, 0.0));
        m.set(0, 0, C64::new(0.5, 0.0));
        assert!(DensityMatrix::from_matrix(1, m)
            .unwrap()
            .validate()
            .is_err());
        let neg = DenseMatrix::two_by_two(
            C64::new(1.5, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-0.5, 0.0),
        );
        assert!(DensityMatrix::from_matrix(1, neg)
            .unwrap()
            .validate()
            .is_err());
        DensityMatrix::pure(&ket("+-")).validate().unwrap();
    }

    #[test]
    fn gate_matrices_are_big_endian() {
        let cx = gate_matrix(&GateOp::new(GateKind::Cx, vec![0, 1]), 2);
        // |10⟩ (index 2) → |11⟩ (index 3)
        assert_eq!(cx.get(3, 2), C64::new(1.0, 0.0));
        let x0 = gate_matrix(&GateOp::new(GateKind::X, vec![0]), 2);
        assert_eq!(x0.get(2, 0), C64::new(1.0, 0.0));
    }
}
