//! Dense complex linear algebra used by the simulator and the reachability engine.
//!
//! Basis indices are big-endian: qubit 0 is the most significant bit of the
//! computational-basis label, so `|c p1 p2⟩` has index `4c + 2p1 + p2`.

use num_complex::Complex64;

use crate::error::{ReachError, Result};

pub type C64 = Complex64;

/// Default hard cap on register width for the vector engine.
pub const DEFAULT_QUBIT_CAP: usize = 12;

/// Numerical thresholds shared by the engine, the simulator and the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Residual norm below which a vector counts as zero.
    pub null_threshold: f64,
    /// Branch norm below which a Kraus branch is discarded.
    pub branch_drop: f64,
    /// Allowed deviation in orthonormality assertions.
    pub ortho_check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            null_threshold: 1e-8,
            branch_drop: 1e-12,
            ortho_check: 1e-7,
        }
    }
}

impl Tolerances {
    /// Defaults with a different null threshold.
    pub fn with_null_threshold(null_threshold: f64) -> Result<Self> {
        let tol = Tolerances {
            null_threshold,
            ..Tolerances::default()
        };
        tol.validate()?;
        Ok(tol)
    }

    /// Checks `0 < branch_drop < null_threshold < ortho_check < 1`.
    pub fn validate(&self) -> Result<()> {
        let ordered = 0.0 < self.branch_drop
            && self.branch_drop < self.null_threshold
            && self.null_threshold < self.ortho_check
            && self.ortho_check < 1.0;
        if ordered {
            Ok(())
        } else {
            Err(ReachError::usage(format!(
                "tolerances must satisfy 0 < branch_drop ({}) < null_threshold ({}) < ortho_check ({}) < 1",
                self.branch_drop, self.null_threshold, self.ortho_check
            )))
        }
    }
}

/// Dense amplitude vector over `num_qubits` qubits. Need not be normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zeros(num_qubits: usize) -> Self {
        assert!(num_qubits >= 1, "a state needs at least one qubit");
        StateVector {
            num_qubits,
            amps: vec![C64::new(0.0, 0.0); 1 << num_qubits],
        }
    }

    /// Computational-basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(ReachError::usage("a state needs at least one qubit"));
        }
        if index >= 1 << num_qubits {
            return Err(ReachError::usage(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut v = StateVector::zeros(num_qubits);
        v.amps[index] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// Wraps an amplitude list; its length must be a power of two `>= 2`.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(ReachError::usage(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(ReachError::usage("amplitudes must be finite"));
        }
        Ok(StateVector {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Product state from a label over `{0, 1, +, -}`, leftmost character is qubit 0.
    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.chars().count();
        if n == 0 {
            return Err(ReachError::usage("empty state label"));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut factors = Vec::with_capacity(n);
        for ch in label.chars() {
            let f = match ch {
                '0' => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                '1' => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
                '+' => [C64::new(h, 0.0), C64::new(h, 0.0)],
                '-' => [C64::new(h, 0.0), C64::new(-h, 0.0)],
                other => {
                    return Err(ReachError::usage(format!(
                        "invalid character {other:?} in state label {label:?}"
                    )))
                }
            };
            factors.push(f);
        }
        let mut amps = vec![C64::new(1.0, 0.0)];
        for f in &factors {
            amps = amps.iter().flat_map(|&a| [a * f[0], a * f[1]]).collect();
        }
        Ok(StateVector {
            num_qubits: n,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Hilbert-space dimension `2^num_qubits`.
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-10
    }

    pub fn scaled(&self, alpha: C64) -> StateVector {
        StateVector {
            num_qubits: self.num_qubits,
            amps: self.amps.iter().map(|&a| a * alpha).collect(),
        }
    }

    /// `self -= alpha * other`, dimensions assumed equal.
    fn sub_scaled(&mut self, alpha: C64, other: &StateVector) {
        for (a, &b) in self.amps.iter_mut().zip(&other.amps) {
            *a -= alpha * b;
        }
    }

    /// `‖self - other‖₂`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        check_same_width(self, other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

fn check_same_width(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.num_qubits != b.num_qubits {
        return Err(ReachError::usage(format!(
            "dimension mismatch: {} vs {} qubits",
            a.num_qubits, b.num_qubits
        )));
    }
    Ok(())
}

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            entries: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(ReachError::usage(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(DenseMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// `[[a, b], [c, d]]`.
    pub fn two_by_two(a: C64, b: C64, c: C64, d: C64) -> Self {
        DenseMatrix {
            rows: 2,
            cols: 2,
            entries: vec![a, b, c, d],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: C64) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn scaled(&self, alpha: C64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| e * alpha).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(ReachError::usage(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.entries[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.entries[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(ReachError::usage("matrix shape mismatch in add"));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_square_2x2(&self) -> bool {
        self.rows == 2 && self.cols == 2
    }
}

/// `⟨a|b⟩ = Σ conj(a_k) b_k`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    check_same_width(a, b)?;
    Ok(dot(a, b))
}

fn dot(a: &StateVector, b: &StateVector) -> C64 {
    a.amps
        .iter()
        .zip(&b.amps)
        .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

/// `v / ‖v‖`, or `None` when `‖v‖ <= null_threshold`.
pub fn normalize(v: &StateVector, tol: &Tolerances) -> Option<StateVector> {
    let n = v.norm();
    if n <= tol.null_threshold || !n.is_finite() {
        None
    } else {
        Some(v.scaled(C64::new(1.0 / n, 0.0)))
    }
}

/// Removes from `v` its components along the orthonormal `basis`, twice.
pub(crate) fn orthogonalize_against(v: &mut StateVector, basis: &[StateVector]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            v.sub_scaled(c, b);
        }
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.
///
/// Vectors whose residual norm falls at or below `tol.null_threshold` are
/// dropped, so the output is a maximal orthonormal subset spanning `span(vs)`.
pub fn gram_schmidt(vs: &[StateVector], tol: &Tolerances) -> Result<Vec<StateVector>> {
    let Some(first) = vs.first() else {
        return Ok(Vec::new());
    };
    for v in vs {
        check_same_width(first, v)?;
    }
    let mut out: Vec<StateVector> = Vec::new();
    for v in vs {
        if out.len() == first.dim() {
            break;
        }
        let mut r = v.clone();
        orthogonalize_against(&mut r, &out);
        if let Some(u) = normalize(&r, tol) {
            out.push(u);
        }
    }
    Ok(out)
}

/// `Σ_i ⟨i|s⟩ |i⟩` for an orthonormal `basis`; the zero vector for an empty one.
pub fn project_onto(basis: &[StateVector], s: &StateVector) -> StateVector {
    let mut out = StateVector::zeros(s.num_qubits);
    for b in basis {
        debug_assert_eq!(b.num_qubits, s.num_qubits);
        let c = dot(b, s);
        for (o, &x) in out.amps.iter_mut().zip(&b.amps) {
            *o += c * x;
        }
    }
    out
}

/// Bit mask of `qubit` in a basis index of an `num_qubits`-qubit register.
#[inline]
pub fn qubit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// Applies the 2×2 matrix `m = [m00, m01, m10, m11]` to `target` in place.
pub(crate) fn apply_2level_in_place(
    amps: &mut [C64],
    num_qubits: usize,
    target: usize,
    m: &[C64; 4],
) {
    let mask = qubit_mask(num_qubits, target);
    for i0 in 0..amps.len() {
        if i0 & mask != 0 {
            continue;
        }
        let i1 = i0 | mask;
        let a0 = amps[i0];
        let a1 = amps[i1];
        amps[i0] = m[0] * a0 + m[1] * a1;
        amps[i1] = m[2] * a0 + m[3] * a1;
    }
}

/// Applies a 2×2 matrix (not necessarily unitary) to one qubit of `v`.
pub fn matvec_2level(m: &DenseMatrix, target: usize, v: &StateVector) -> Result<StateVector> {
    if !m.is_square_2x2() {
        return Err(ReachError::usage(format!(
            "expected a 2x2 matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if target >= v.num_qubits {
        return Err(ReachError::usage(format!(
            "target qubit {target} out of range for {} qubits",
            v.num_qubits
        )));
    }
    let mut out = v.clone();
    let e = &m.entries;
    apply_2level_in_place(
        &mut out.amps,
        v.num_qubits,
        target,
        &[e[0], e[1], e[2], e[3]],
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ket(label: &str) -> StateVector {
        StateVector::from_label(label).unwrap()
    }

    fn arb_state(n: usize) -> impl Strategy<Value = StateVector> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_map(|v| {
            StateVector::from_amplitudes(v.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap()
        })
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(inner_product(&ket("0"), &ket("0")).unwrap(), c(1.0, 0.0));
        assert_eq!(inner_product(&ket("0"), &ket("1")).unwrap(), c(0.0, 0.0));
        let v = inner_product(&ket("+"), &ket("0")).unwrap();
        assert!((v - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inner_product_rejects_mismatched_widths() {
        assert!(matches!(
            inner_product(&ket("0"), &ket("00")),
            Err(ReachError::Usage(_))
        ));
    }

    #[test]
    fn normalize_examples() {
        let tol = Tolerances::default();
        let v =
            StateVector::from_amplitudes(vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
                .unwrap();
        assert_eq!(normalize(&v, &tol).unwrap(), ket("00"));
        assert!(normalize(&StateVector::zeros(2), &tol).is_none());
        let tiny = StateVector::from_amplitudes(vec![c(1e-9, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(normalize(&tiny, &tol).is_none());
    }

    #[test]
    fn gram_schmidt_examples() {
        let tol = Tolerances::default();
        let out = gram_schmidt(&[ket("0"), ket("1")], &tol).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out[0].distance(&ket("0")).unwrap() < 1e-12);
        assert!(out[1].distance(&ket("1")).unwrap() < 1e-12);

        assert_eq!(gram_schmidt(&[ket("0"), ket("0")], &tol).unwrap().len(), 1);
        assert!(gram_schmidt(&[], &tol).unwrap().is_empty());

        let inputs = [ket("0"), ket("+")];
        let out = gram_schmidt(&inputs, &tol).unwrap();
        assert_eq!(out.len(), 2);
        assert!(inner_product(&out[0], &out[1]).unwrap().norm() <= tol.ortho_check);
        for v in &inputs {
            let r = v.distance(&project_onto(&out, v)).unwrap();
            assert!(r <= tol.ortho_check);
        }
    }

    #[test]
    fn project_onto_examples() {
        let p = project_onto(&[ket("0")], &ket("+"));
        assert!(p.distance(&ket("0").scaled(c(FRAC_1_SQRT_2, 0.0))).unwrap() < 1e-15);
        let basis = gram_schmidt(&[ket("0"), ket("+")], &Tolerances::default()).unwrap();
        let s = ket("-");
        assert!(project_onto(&basis, &s).distance(&s).unwrap() < 1e-10);
        assert_eq!(project_onto(&[], &ket("+")), StateVector::zeros(1));
    }

    #[test]
    fn matvec_examples() {
        let x = DenseMatrix::two_by_two(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(matvec_2level(&x, 0, &ket("00")).unwrap(), ket("10"));

        let h = FRAC_1_SQRT_2;
        let had = DenseMatrix::two_by_two(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0));
        assert_eq!(had.get(0, 1), c(h, 0.0));
        let out = matvec_2level(&had, 0, &ket("0")).unwrap();
        assert!(out.distance(&ket("+")).unwrap() < 1e-15);

        let damp = DenseMatrix::two_by_two(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(matvec_2level(&damp, 0, &ket("1")).unwrap(), ket("0"));

        assert!(matches!(
            matvec_2level(&x, 2, &ket("00")),
            Err(ReachError::Usage(_))
        ));
    }

    #[test]
    fn labels_are_big_endian() {
        let v = ket("01");
        assert_eq!(v.amplitudes()[1], c(1.0, 0.0));
        let v = ket("100");
        assert_eq!(v.amplitudes()[4], c(1.0, 0.0));
    }

    #[test]
    fn tolerance_ordering_is_enforced() {
        assert!(Tolerances::default().validate().is_ok());
        assert!(Tolerances::with_null_threshold(1e-13).is_err());
        assert!(Tolerances::with_null_threshold(1e-6).is_err());
        assert!(Tolerances::with_null_threshold(1e-9).is_ok());
    }

    proptest! {
        #[test]
        fn inner_product_is_sesquilinear(a in arb_state(2), b in arb_state(2), re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let alpha = c(re, im);
            let ab = inner_product(&a, &b).unwrap();
            let lhs = inner_product(&a, &b.scaled(alpha)).unwrap();
            prop_assert!((lhs - alpha * ab).norm() < 1e-12);
            let lhs = inner_product(&a.scaled(alpha), &b).unwrap();
            prop_assert!((lhs - alpha.conj() * ab).norm() < 1e-12);
        }

        #[test]
        fn gram_schmidt_is_stable_under_rerun(vs in prop::collection::vec(arb_state(2), 0..7)) {
            let tol = Tolerances::default();
            let out = gram_schmidt(&vs, &tol).unwrap();
            prop_assert!(out.len() <= vs.len().min(4));
            let again = gram_schmidt(&out, &tol).unwrap();
            prop_assert_eq!(again.len(), out.len());
            for v in &out {
                prop_assert!(v.distance(&project_onto(&again, v)).unwrap() < 1e-10);
            }
            for v in &vs {
                prop_assert!(v.distance(&project_onto(&out, v)).unwrap() <= tol.ortho_check);
            }
        }

        #[test]
        fn projection_is_linear_idempotent_and_contractive(
            vs in prop::collection::vec(arb_state(3), 1..5),
            s in arb_state(3),
            t in arb_state(3),
        ) {
            let basis = gram_schmidt(&vs, &Tolerances::default()).unwrap();
            let p = project_onto(&basis, &s);
            prop_assert!(project_onto(&basis, &p).distance(&p).unwrap() < 1e-10);
            prop_assert!(p.norm() <= s.norm() + 1e-10);
            let mut sum = s.clone();
            sum.sub_scaled(c(-1.0, 0.0), &t);
            let mut expect = p.clone();
            expect.sub_scaled(c(-1.0, 0.0), &project_onto(&basis, &t));
            prop_assert!(project_onto(&basis, &sum).distance(&expect).unwrap() < 1e-10);
        }

        #[test]
        fn unitary_matvec_preserves_norm(v in arb_state(3), target in 0usize..3, theta in 0.0f64..6.3, phi in 0.0f64..6.3) {
            let (s, co) = (theta / 2.0).sin_cos();
            let u = DenseMatrix::two_by_two(
                c(co, 0.0),
                -C64::from_polar(s, phi),
                C64::from_polar(s, -phi),
                C64::new(co, 0.0),
            );
            let out = matvec_2level(&u, target, &v).unwrap();
            prop_assert!((out.norm() - v.norm()).abs() < 1e-10);
            let id = DenseMatrix::identity(2);
            prop_assert_eq!(matvec_2level(&id, target, &v).unwrap(), v);
        }
    }
}
