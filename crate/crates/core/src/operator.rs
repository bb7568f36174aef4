//! Dense complex operators on composite Hilbert spaces.
//!
//! A [`HilbertSpace`] is an ordered tensor product of qubits and truncated
//! boson modes. The leftmost factor is the slowest-varying index of the
//! composite basis. Qubits use the ordering `|e⟩ = 0`, `|g⟩ = 1`, so that
//! `σz = diag(+1, −1)` and the excited state has `⟨σz⟩ = +1`.
//!
//! ħ = 1 throughout.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Hermiticity tolerance for density matrices.
pub const TOL_HERM: f64 = 1e-9;
/// Unit-trace tolerance for density matrices.
pub const TOL_TRACE: f64 = 1e-9;
/// Most negative eigenvalue tolerated in a density matrix.
pub const TOL_POS: f64 = 1e-8;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    Qubit,
    Boson(usize),
}

impl Factor {
    pub fn dim(self) -> usize {
        match self {
            Factor::Qubit => 2,
            Factor::Boson(d) => d,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Qubit => write!(f, "qubit"),
            Factor::Boson(d) => write!(f, "boson({d})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
    dim: usize,
}

impl HilbertSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptySpace);
        }
        for f in &factors {
            if let Factor::Boson(d) = *f {
                if d < 2 {
                    return Err(Error::FockDimension(d));
                }
            }
        }
        let dim = factors.iter().map(|f| f.dim()).product();
        Ok(Self { factors, dim })
    }

    pub fn qubit() -> Self {
        Self {
            factors: vec![Factor::Qubit],
            dim: 2,
        }
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![Factor::Qubit; n])
    }

    pub fn boson(fock_dim: usize) -> Result<Self> {
        Self::new(vec![Factor::Boson(fock_dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Per-factor level indices of a composite basis index.
    pub fn decompose(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.factors.len()];
        for (slot, f) in self.factors.iter().enumerate().rev() {
            digits[slot] = index % f.dim();
            index /= f.dim();
        }
        digits
    }

    pub fn compose(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.factors.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} levels, got {}",
                self.factors.len(),
                levels.len()
            )));
        }
        let mut index = 0;
        for (&level, f) in levels.iter().zip(&self.factors) {
            if level >= f.dim() {
                return Err(Error::InvalidParameter(format!(
                    "level {level} out of range for {f}"
                )));
            }
            index = index * f.dim() + level;
        }
        Ok(index)
    }

    /// Product basis vector with the given per-factor levels.
    pub fn basis_vector(&self, levels: &[usize]) -> Result<CVector> {
        let mut v = CVector::zeros(self.dim);
        v[self.compose(levels)?] = ONE;
        Ok(v)
    }

    pub fn has_boson(&self) -> bool {
        self.factors.iter().any(|f| matches!(f, Factor::Boson(_)))
    }

    /// Marks composite basis states where some boson factor sits on its
    /// highest retained Fock level.
    pub fn top_fock_mask(&self) -> Vec<bool> {
        (0..self.dim)
            .map(|i| {
                self.decompose(i)
                    .iter()
                    .zip(&self.factors)
                    .any(|(&lvl, f)| matches!(f, Factor::Boson(d) if lvl + 1 == *d))
            })
            .collect()
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", names.join(" ⊗ "))
    }
}

fn mismatch(a: &HilbertSpace, b: &HilbertSpace) -> Error {
    Error::SpaceMismatch {
        left: a.to_string(),
        right: b.to_string(),
    }
}

/// A dense operator tied to the space it acts on.
///
/// The `std::ops` impls on references panic on a space mismatch, like
/// nalgebra does on shape mismatch; the `try_*` methods report it instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: d,
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { space, matrix })
    }

    pub(crate) fn from_parts(space: HilbertSpace, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), space.dim());
        Self { space, matrix }
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self::from_parts(space.clone(), CMatrix::zeros(d, d))
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self::from_parts(space.clone(), CMatrix::identity(d, d))
    }

    pub fn from_real_diagonal(space: &HilbertSpace, diag: &[f64]) -> Result<Self> {
        if diag.len() != space.dim() {
            return Err(Error::Shape {
                rows: diag.len(),
                cols: diag.len(),
                expected: space.dim(),
            });
        }
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::new(space.clone(), CMatrix::from_diagonal(&v))
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(space: &HilbertSpace, ket: &CVector, bra: &CVector) -> Result<Self> {
        if ket.len() != space.dim() || bra.len() != space.dim() {
            return Err(Error::Shape {
                rows: ket.len(),
                cols: bra.len(),
                expected: space.dim(),
            });
        }
        Self::new(space.clone(), ket * bra.adjoint())
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self::from_parts(self.space.clone(), self.matrix.adjoint())
    }

    fn same_space(&self, other: &Operator) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(mismatch(&self.space, &other.space))
        }
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        self.same_space(other)?;
        Ok(Self::from_parts(self.space.clone(), &self.matrix * &other.matrix))
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.same_space(other)?;
        Ok(Self::from_parts(self.space.clone(), &self.matrix + &other.matrix))
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.same_space(other)?;
        Ok(Self::from_parts(self.space.clone(), &self.matrix - &other.matrix))
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.same_space(other)?;
        let m = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Ok(Self::from_parts(self.space.clone(), m))
    }

    pub fn scale(&self, c: Complex64) -> Operator {
        Self::from_parts(self.space.clone(), &self.matrix * c)
    }

    pub fn scale_real(&self, x: f64) -> Operator {
        self.scale(Complex64::new(x, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// `max |A − A†|` entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim() {
            return Err(Error::Shape {
                rows: v.len(),
                cols: 1,
                expected: self.dim(),
            });
        }
        Ok(&self.matrix * v)
    }

    /// `⟨u|A|v⟩`.
    pub fn matrix_element(&self, u: &CVector, v: &CVector) -> Result<Complex64> {
        let av = self.apply(v)?;
        Ok(u.dotc(&av))
    }

    /// Tensor product; the result's factors are `self`'s followed by `other`'s.
    pub fn kron(&self, other: &Operator) -> Operator {
        let mut factors = self.space.factors().to_vec();
        factors.extend_from_slice(other.space.factors());
        let space = HilbertSpace::new(factors).expect("factors already validated");
        Self::from_parts(space, self.matrix.kronecker(&other.matrix))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// All eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermiticity_error(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn symmetrize(m: &mut CMatrix) {
    let d = m.nrows();
    for i in 0..d {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..d {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl Mul<Complex64> for &Operator {
    type Output = Operator;
    fn mul(self, c: Complex64) -> Operator {
        self.scale(c)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, x: f64) -> Operator {
        self.scale_real(x)
    }
}

/// An operator known to be a valid quantum state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity against the default
    /// tolerances.
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermiticity_error();
        if herm > TOL_HERM {
            return Err(Error::InvalidState(format!("not Hermitian ({herm:.3e})")));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let min = op.min_eigenvalue();
        if min < -TOL_POS {
            return Err(Error::InvalidState(format!("eigenvalue {min:.3e} < 0")));
        }
        Ok(Self(op))
    }

    /// `|ψ⟩⟨ψ|` for the normalised `psi`.
    pub fn pure(space: &HilbertSpace, psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let psi = psi / Complex64::new(norm, 0.0);
        Ok(Self(Operator::outer(space, &psi, &psi)?))
    }

    /// Product basis state with the given per-factor levels.
    pub fn basis(space: &HilbertSpace, levels: &[usize]) -> Result<Self> {
        Self::pure(space, &space.basis_vector(levels)?)
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn space(&self) -> &HilbertSpace {
        self.0.space()
    }

    pub fn purity(&self) -> f64 {
        (self.0.matrix() * self.0.matrix()).trace().re
    }

    pub fn expect(&self, a: &Operator) -> Result<Complex64> {
        expect(self, a)
    }
}

/// `Tr(ρA)`. For Hermitian `A` the imaginary part is numerical noise.
pub fn expect(rho: &DensityMatrix, a: &Operator) -> Result<Complex64> {
    trace_product(rho.operator(), a)
}

/// `Tr(XA)` without forming the product.
pub fn trace_product(x: &Operator, a: &Operator) -> Result<Complex64> {
    x.same_space(a)?;
    Ok(trace_of_product(x.matrix(), a.matrix()))
}

pub(crate) fn trace_of_product(x: &CMatrix, a: &CMatrix) -> Complex64 {
    let d = x.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            acc += x[(i, k)] * a[(k, i)];
        }
    }
    acc
}

pub fn dagger(a: &Operator) -> Operator {
    a.dagger()
}

pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.commutator(b)
}

pub fn trace(a: &Operator) -> Complex64 {
    a.trace()
}

#[derive(Debug, Clone)]
pub struct QubitOps {
    pub sigma_x: Operator,
    pub sigma_y: Operator,
    pub sigma_z: Operator,
    pub sigma_plus: Operator,
    pub sigma_minus: Operator,
}

/// Pauli operators in the `|e⟩ = 0, |g⟩ = 1` basis; `σ⁻ = |g⟩⟨e|`.
pub fn qubit_ops() -> QubitOps {
    let space = HilbertSpace::qubit();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let m = |a: [Complex64; 4]| {
        Operator::from_parts(space.clone(), CMatrix::from_row_slice(2, 2, &a))
    };
    QubitOps {
        sigma_x: m([ZERO, ONE, ONE, ZERO]),
        sigma_y: m([ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
        sigma_z: m([ONE, ZERO, ZERO, c(-1.0, 0.0)]),
        sigma_plus: m([ZERO, ONE, ZERO, ZERO]),
        sigma_minus: m([ZERO, ZERO, ONE, ZERO]),
    }
}

#[derive(Debug, Clone)]
pub struct BosonOps {
    pub a: Operator,
    pub a_dag: Operator,
    pub n: Operator,
}

/// Ladder operators on `{|0⟩, …, |fock_dim−1⟩}`.
pub fn boson_ops(fock_dim: usize) -> Result<BosonOps> {
    let space = HilbertSpace::boson(fock_dim)?;
    let mut a = CMatrix::zeros(fock_dim, fock_dim);
    let mut n = CMatrix::zeros(fock_dim, fock_dim);
    for k in 1..fock_dim {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    for k in 0..fock_dim {
        n[(k, k)] = Complex64::new(k as f64, 0.0);
    }
    let a = Operator::from_parts(space.clone(), a);
    Ok(BosonOps {
        a_dag: a.dagger(),
        a,
        n: Operator::from_parts(space, n),
    })
}

/// Places a single-factor operator at `slot` of `space`, identity elsewhere.
pub fn embed(op: &Operator, slot: usize, space: &HilbertSpace) -> Result<Operator> {
    let factors = space.factors();
    if slot >= factors.len() {
        return Err(Error::SlotOutOfRange {
            slot,
            factors: factors.len(),
        });
    }
    let slot_dim = factors[slot].dim();
    if op.dim() != slot_dim {
        return Err(Error::SlotDimension {
            slot,
            op_dim: op.dim(),
            slot_dim,
        });
    }
    let left: usize = factors[..slot].iter().map(|f| f.dim()).product();
    let right: usize = factors[slot + 1..].iter().map(|f| f.dim()).product();
    let m = CMatrix::identity(left, left)
        .kronecker(op.matrix())
        .kronecker(&CMatrix::identity(right, right));
    Ok(Operator::from_parts(space.clone(), m))
}

/// Whether `[H0, X] = −ωX`, i.e. `X` lowers the energy by `ω`.
///
/// Matrix elements touching the top level of a truncated boson factor are
/// not tested. Returns `false` on a space mismatch.
pub fn check_eigenoperator(h0: &Operator, x: &Operator, omega: f64, tol: f64) -> bool {
    eigenoperator_residual(h0, x, omega).is_some_and(|r| r <= tol)
}

pub(crate) fn eigenoperator_residual(h0: &Operator, x: &Operator, omega: f64) -> Option<f64> {
    let c = h0.commutator(x).ok()?;
    let resid = c.matrix() + x.matrix() * Complex64::new(omega, 0.0);
    let mask = h0.space().top_fock_mask();
    let d = h0.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if !mask[i] && !mask[j] {
                worst = worst.max(resid[(i, j)].norm());
            }
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &Operator, b: &Operator, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn sigma_plus_minus_projects_on_excited() {
        let q = qubit_ops();
        let p = &q.sigma_plus * &q.sigma_minus;
        let expected = Operator::from_real_diagonal(&HilbertSpace::qubit(), &[1.0, 0.0]).unwrap();
        assert!(close(&p, &expected, 0.0));
    }

    #[test]
    fn ladder_commutator_is_sigma_z() {
        let q = qubit_ops();
        let c = q.sigma_plus.commutator(&q.sigma_minus).unwrap();
        assert!(close(&c, &q.sigma_z, 0.0));
    }

    #[test]
    fn sigma_minus_lowers() {
        let q = qubit_ops();
        let s = HilbertSpace::qubit();
        let e = s.basis_vector(&[0]).unwrap();
        let g = s.basis_vector(&[1]).unwrap();
        assert_eq!(q.sigma_minus.apply(&e).unwrap(), g);
        assert_eq!(q.sigma_minus.apply(&g).unwrap(), CVector::zeros(2));
    }

    #[test]
    fn sigma_pm_from_cartesian() {
        let q = qubit_ops();
        let plus = (&q.sigma_x + &q.sigma_y.scale(I)).scale_real(0.5);
        let minus = (&q.sigma_x - &q.sigma_y.scale(I)).scale_real(0.5);
        assert!(close(&plus, &q.sigma_plus, 0.0));
        assert!(close(&minus, &q.sigma_minus, 0.0));
    }

    #[test]
    fn two_level_annihilator() {
        let b = boson_ops(2).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert_eq!(b.a.matrix(), &expected);
    }

    #[test]
    fn truncated_commutator_is_identity_below_the_top() {
        let d = 5;
        let b = boson_ops(d).unwrap();
        let c = b.a.commutator(&b.a_dag).unwrap();
        for m in 0..d - 1 {
            for n in 0..d - 1 {
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((c.entry(m, n) - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
        // The top corner is where truncation shows.
        assert!((c.entry(d - 1, d - 1).re - (1.0 - d as f64)).abs() < 1e-12);
    }

    #[test]
    fn number_operator() {
        let b = boson_ops(4).unwrap();
        let n = &b.a_dag * &b.a;
        assert!(close(&n, &b.n, 1e-14));
        let three = HilbertSpace::boson(4).unwrap().basis_vector(&[3]).unwrap();
        let out = b.n.apply(&three).unwrap();
        assert_eq!(out, &three * Complex64::new(3.0, 0.0));
    }

    #[test]
    fn rejects_tiny_fock_space() {
        assert_eq!(boson_ops(1).unwrap_err(), Error::FockDimension(1));
        assert!(HilbertSpace::new(vec![Factor::Qubit, Factor::Boson(0)]).is_err());
    }

    #[test]
    fn embed_is_kron_with_identity() {
        let q = qubit_ops();
        let s = HilbertSpace::qubits(2).unwrap();
        let e = embed(&q.sigma_z, 0, &s).unwrap();
        let want = q.sigma_z.kron(&Operator::identity(&HilbertSpace::qubit()));
        assert_eq!(e, want);
    }

    #[test]
    fn embed_identity_gives_identity() {
        let s = HilbertSpace::new(vec![Factor::Qubit, Factor::Boson(3), Factor::Qubit]).unwrap();
        let id3 = Operator::identity(&HilbertSpace::boson(3).unwrap());
        assert_eq!(embed(&id3, 1, &s).unwrap(), Operator::identity(&s));
    }

    #[test]
    fn embed_rejects_bad_slot() {
        let q = qubit_ops();
        let s = HilbertSpace::new(vec![Factor::Qubit, Factor::Boson(3)]).unwrap();
        assert_eq!(
            embed(&q.sigma_minus, 1, &s).unwrap_err(),
            Error::SlotDimension {
                slot: 1,
                op_dim: 2,
                slot_dim: 3
            }
        );
        assert!(matches!(
            embed(&q.sigma_minus, 2, &s),
            Err(Error::SlotOutOfRange { .. })
        ));
    }

    #[test]
    fn embed_ordering_convention() {
        // σ⁻ on slot 1 of [qubit, qubit] maps |e,e⟩ (index 0) to |e,g⟩ (index 1).
        let q = qubit_ops();
        let s = HilbertSpace::qubits(2).unwrap();
        let op = embed(&q.sigma_minus, 1, &s).unwrap();
        let ee = s.basis_vector(&[0, 0]).unwrap();
        assert_eq!(op.apply(&ee).unwrap(), s.basis_vector(&[0, 1]).unwrap());
    }

    #[test]
    fn pauli_algebra() {
        let q = qubit_ops();
        let c = q.sigma_z.commutator(&q.sigma_minus).unwrap();
        assert!(close(&c, &q.sigma_minus.scale_real(-2.0), 0.0));
        assert_eq!(q.sigma_z.trace(), ZERO);
        let e = DensityMatrix::basis(&HilbertSpace::qubit(), &[0]).unwrap();
        assert_eq!(e.expect(&q.sigma_z).unwrap(), ONE);
    }

    #[test]
    fn expect_rejects_mismatch() {
        let q = qubit_ops();
        let rho = DensityMatrix::basis(&HilbertSpace::boson(2).unwrap(), &[1]).unwrap();
        assert!(matches!(
            rho.expect(&q.sigma_z),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn eigenoperator_examples() {
        let q = qubit_ops();
        let omega = 1.7;
        let h0 = q.sigma_z.scale_real(omega / 2.0);
        assert!(check_eigenoperator(&h0, &q.sigma_minus, omega, 1e-12));
        assert!(!check_eigenoperator(&h0, &q.sigma_x, omega, 1e-6));
        assert!(!check_eigenoperator(&h0, &q.sigma_plus, omega, 1e-6));

        let b = boson_ops(6).unwrap();
        let wf = 0.8;
        let hf = b.n.scale_real(wf);
        assert!(check_eigenoperator(&hf, &b.a, wf, 1e-12));
    }

    #[test]
    fn dicke_slots_are_eigenoperators_at_twice_omega() {
        let q = qubit_ops();
        let n = 3;
        let s = HilbertSpace::qubits(n).unwrap();
        let omega = 0.9;
        let mut h = Operator::zeros(&s);
        for i in 0..n {
            h = &h + &embed(&q.sigma_z, i, &s).unwrap().scale_real(omega);
        }
        for i in 0..n {
            let x = embed(&q.sigma_minus, i, &s).unwrap();
            assert!(check_eigenoperator(&h, &x, 2.0 * omega, 1e-12));
            assert!(!check_eigenoperator(&h, &x, omega, 1e-6));
        }
    }

    #[test]
    fn density_matrix_validation() {
        let s = HilbertSpace::qubit();
        let q = qubit_ops();
        assert!(DensityMatrix::new(q.sigma_x.clone()).is_err());
        let half = Operator::from_real_diagonal(&s, &[0.5, 0.5]).unwrap();
        let rho = DensityMatrix::new(half).unwrap();
        assert!((rho.purity() - 0.5).abs() < 1e-15);
        let neg = Operator::from_real_diagonal(&s, &[1.5, -0.5]).unwrap();
        assert!(DensityMatrix::new(neg).is_err());
    }

    fn arb_matrix(d: usize) -> impl Strategy<Value = CMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_map(move |v| {
            CMatrix::from_iterator(d, d, v.into_iter().map(|(re, im)| Complex64::new(re, im)))
        })
    }

    proptest! {
        #[test]
        fn dagger_is_an_involution(m in arb_matrix(4)) {
            let s = HilbertSpace::qubits(2).unwrap();
            let a = Operator::new(s, m).unwrap();
            prop_assert_eq!(a.dagger().dagger(), a);
        }

        #[test]
        fn commutators_are_traceless(ma in arb_matrix(6), mb in arb_matrix(6)) {
            let s = HilbertSpace::new(vec![Factor::Qubit, Factor::Boson(3)]).unwrap();
            let a = Operator::new(s.clone(), ma).unwrap();
            let b = Operator::new(s, mb).unwrap();
            prop_assert!(a.commutator(&b).unwrap().trace().norm() <= 1e-12);
        }

        #[test]
        fn embed_is_multiplicative(ma in arb_matrix(3), mb in arb_matrix(3), slot in 0usize..3) {
            let factor = HilbertSpace::boson(3).unwrap();
            let s = HilbertSpace::new(vec![Factor::Boson(3); 3]).unwrap();
            let a = Operator::new(factor.clone(), ma).unwrap();
            let b = Operator::new(factor, mb).unwrap();
            let lhs = embed(&(&a * &b), slot, &s).unwrap();
            let rhs = &embed(&a, slot, &s).unwrap() * &embed(&b, slot, &s).unwrap();
            prop_assert!((&lhs - &rhs).max_abs() <= 1e-12);
        }
    }
}
