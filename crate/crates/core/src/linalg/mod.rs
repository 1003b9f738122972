//! Dense complex linear algebra for two-qubit density matrices and their
//! superoperators.
//!
//! Vectorization stacks columns: entry `(r, c)` of a 4x4 operator lands at
//! index `4 c + r`, so that `vec(A rho B) = (B^T kron A) vec(rho)`.

mod eig;
mod ode;

pub use eig::{eig_dense, eigenvalues_dense, EigenDecomposition};
pub use ode::{integrate_linear_ode, integrate_linear_ode_with, Rk4Options};

use nalgebra::{DMatrix, DVector, Matrix4, SVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub type Op4 = Matrix4<C64>;
pub type Vec16 = SVector<C64, 16>;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;

pub fn vectorize(m: &Op4) -> Vec16 {
    Vec16::from_column_slice(m.as_slice())
}

pub fn devectorize(v: &Vec16) -> Op4 {
    Op4::from_column_slice(v.as_slice())
}

/// `|j><k|` as a 4x4 matrix.
pub fn ket_bra(j: usize, k: usize) -> Op4 {
    let mut m = Op4::zeros();
    m[(j, k)] = C64::new(1.0, 0.0);
    m
}

pub fn hermitize(m: &Op4) -> Op4 {
    (m + m.adjoint()).scale(0.5)
}

/// `max |m_jk - conj(m_kj)|`.
pub fn hermiticity_error(m: &Op4) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of the Hermitian part `(m + m^dagger)/2`, ascending.
pub fn hermitian_eigenvalues(m: &Op4) -> [f64; 4] {
    let eig = SymmetricEigen::new(hermitize(m));
    let mut out = [0.0; 4];
    out.copy_from_slice(eig.eigenvalues.as_slice());
    out.sort_by(f64::total_cmp);
    out
}

/// Hilbert-Schmidt inner product `Tr[a^dagger b]`.
pub fn hs_inner(a: &Op4, b: &Op4) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Columns are the dressed states written in the computational basis, so
/// `rho_computational = U rho_dressed U^dagger`.
pub fn dressed_basis_unitary() -> Op4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = 0.0;
    #[rustfmt::skip]
    let u = nalgebra::Matrix4::new(
        1.0, z,  z, z,
        z,   s,  s, z,
        z,  -s,  s, z,
        z,   z,  z, 1.0,
    );
    u.map(|x| C64::new(x, 0.0))
}

/// Random full-rank density matrix `A A^dagger / Tr` from a complex Gaussian-like
/// matrix with uniform entries.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, basis: Basis) -> DensityMatrix {
    let a = Op4::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = a * a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_raw(hermitize(&m.unscale(tr)), basis)
}

/// Random diagonal state with populations uniform on the simplex.
pub fn random_populations<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    let e: [f64; 4] = std::array::from_fn(|_| -rng.gen_range(f64::EPSILON..1.0).ln());
    let sum: f64 = e.iter().sum();
    e.map(|x| x / sum)
}

/// Which basis the entries of a [`DensityMatrix`] refer to.
///
/// Dressed: `|0> = |gg>`, `|1> = (|ge> - |eg>)/sqrt2`, `|2> = (|ge> + |eg>)/sqrt2`,
/// `|3> = |ee>`. Computational: `|gg>, |ge>, |eg>, |ee>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Dressed,
    Computational,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub positivity: f64,
}

impl StateTolerances {
    pub const STRICT: Self = Self {
        hermiticity: HERMITICITY_TOL,
        trace: TRACE_TOL,
        positivity: POSITIVITY_TOL,
    };

    pub fn uniform(tol: f64) -> Self {
        Self {
            hermiticity: tol,
            trace: tol,
            positivity: tol,
        }
    }
}

impl Default for StateTolerances {
    fn default() -> Self {
        Self::STRICT
    }
}

/// Describes the first violated density-matrix invariant, if any.
pub fn state_violation(m: &Op4, tol: &StateTolerances) -> Option<String> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Some("non-finite entry".to_string());
    }
    let herm = hermiticity_error(m);
    if herm > tol.hermiticity {
        return Some(format!("hermiticity error {herm:e} > {:e}", tol.hermiticity));
    }
    let tr = m.trace();
    let tr_err = (tr - C64::new(1.0, 0.0)).norm();
    if tr_err > tol.trace {
        return Some(format!("trace {tr} deviates from one by {tr_err:e}"));
    }
    let min_eig = hermitian_eigenvalues(m)[0];
    if min_eig < -tol.positivity {
        return Some(format!("minimum eigenvalue {min_eig:e} < -{:e}", tol.positivity));
    }
    None
}

/// A two-qubit density matrix tagged with the basis its entries refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Op4,
    basis: Basis,
}

impl DensityMatrix {
    pub fn new(entries: Op4, basis: Basis) -> Result<Self> {
        Self::with_tolerances(entries, basis, &StateTolerances::STRICT)
    }

    pub fn with_tolerances(entries: Op4, basis: Basis, tol: &StateTolerances) -> Result<Self> {
        match state_violation(&entries, tol) {
            Some(msg) => Err(Error::InvalidState(msg)),
            None => Ok(Self { entries, basis }),
        }
    }

    /// Skips validation; for results of exact transformations of valid states.
    pub(crate) fn from_raw(entries: Op4, basis: Basis) -> Self {
        Self { entries, basis }
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(populations: [f64; 4], basis: Basis) -> Result<Self> {
        let mut m = Op4::zeros();
        for (j, p) in populations.into_iter().enumerate() {
            m[(j, j)] = C64::new(p, 0.0);
        }
        Self::new(m, basis)
    }

    /// `|psi><psi|` for a normalised ket.
    pub fn pure(ket: &nalgebra::Vector4<C64>, basis: Basis) -> Result<Self> {
        let norm = ket.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("ket norm is {norm}, expected 1")));
        }
        Self::new(ket * ket.adjoint(), basis)
    }

    pub fn basis_state(j: usize, basis: Basis) -> Self {
        Self::from_raw(ket_bra(j, j), basis)
    }

    pub fn entries(&self) -> &Op4 {
        &self.entries
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.entries[(j, k)]
    }

    pub fn populations(&self) -> [f64; 4] {
        std::array::from_fn(|j| self.entries[(j, j)].re)
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.entries)[0]
    }

    pub fn violation(&self, tol: &StateTolerances) -> Option<String> {
        state_violation(&self.entries, tol)
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.entries - other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// A linear map on vectorized operators (16x16 for the full generator, 3x3
/// for the reduced population generator).
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    matrix: DMatrix<C64>,
}

impl Superoperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Usage(format!(
                "superoperator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("superoperator has non-finite entries".into()));
        }
        Ok(Self { matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Applies a 16x16 generator to a 4x4 operator.
    pub fn apply(&self, op: &Op4) -> Result<Op4> {
        if self.dim() != 16 {
            return Err(Error::Usage(format!(
                "cannot apply a {}-dimensional superoperator to a 4x4 operator",
                self.dim()
            )));
        }
        let v = DVector::from_column_slice(vectorize(op).as_slice());
        let out = &self.matrix * v;
        Ok(Op4::from_column_slice(out.as_slice()))
    }

    /// `max_k |sum_j conj(vec(1)_j) L_jk|`: zero for a trace-preserving generator.
    pub fn trace_preservation_error(&self) -> f64 {
        let n = self.dim();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return f64::NAN;
        }
        (0..n)
            .map(|col| {
                (0..d)
                    .map(|i| self.matrix[(i * d + i, col)])
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

/// One eigenmode: eigenvalue with right and left eigen-operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub eigenvalue: C64,
    pub right: Op4,
    pub left: Op4,
}

/// Biorthonormal eigenbasis of a 16x16 generator:
/// `Tr[left_i^dagger right_j] = delta_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub modes: Vec<Mode>,
}

impl EigenSystem {
    pub fn from_decomposition(dec: &EigenDecomposition) -> Result<Self> {
        if dec.right.nrows() != 16 {
            return Err(Error::Usage(format!(
                "expected a 16-dimensional decomposition, got {}",
                dec.right.nrows()
            )));
        }
        let modes = (0..16)
            .map(|k| Mode {
                eigenvalue: dec.eigenvalues[k],
                right: Op4::from_column_slice(dec.right.column(k).as_slice()),
                left: Op4::from_column_slice(dec.left.column(k).as_slice()),
            })
            .collect();
        Ok(Self { modes })
    }

    /// Numeric eigensystem of a 16x16 generator.
    pub fn numeric(generator: &Superoperator) -> Result<Self> {
        Self::from_decomposition(&eig_dense(generator.matrix())?)
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    /// Matrix of `Tr[left_i^dagger right_j]`.
    pub fn overlap_matrix(&self) -> DMatrix<C64> {
        let n = self.modes.len();
        DMatrix::from_fn(n, n, |i, j| hs_inner(&self.modes[i].left, &self.modes[j].right))
    }

    pub fn biorthonormality_error(&self) -> f64 {
        let n = self.modes.len();
        let id = DMatrix::<C64>::identity(n, n);
        (self.overlap_matrix() - id)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `sum_k Tr[left_k^dagger op] right_k`, which reproduces `op` for a
    /// complete basis.
    pub fn reconstruct(&self, op: &Op4) -> Op4 {
        self.modes
            .iter()
            .fold(Op4::zeros(), |acc, m| acc + m.right * hs_inner(&m.left, op))
    }
}

/// Orthonormal basis of `{v : |A v| <= tol |A|}` from the singular value
/// decomposition; `tol` is relative to the largest singular value.
pub fn null_space(matrix: &DMatrix<C64>, tol: f64) -> Result<Vec<DVector<C64>>> {
    if !matrix.is_square() {
        return Err(Error::Usage("null_space expects a square matrix".into()));
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let n = matrix.ncols();
    if n == 0 {
        return Ok(Vec::new());
    }
    let svd = nalgebra::linalg::SVD::try_new(matrix.clone(), false, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD returned no right singular vectors".into()))?;
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let threshold = tol * sigma_max;
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn op_strategy() -> impl Strategy<Value = Op4> {
        proptest::collection::vec(-1.0f64..1.0, 32)
            .prop_map(|v| Op4::from_fn(|r, col| c(v[2 * (4 * col + r)], v[2 * (4 * col + r) + 1])))
    }

    #[test]
    fn vectorize_identity_and_ket_bra() {
        let v = vectorize(&Op4::identity());
        for (k, z) in v.iter().enumerate() {
            let expected = if [0, 5, 10, 15].contains(&k) { 1.0 } else { 0.0 };
            assert_eq!(*z, c(expected, 0.0), "index {k}");
        }
        let v = vectorize(&ket_bra(0, 1));
        assert_eq!(v[4], c(1.0, 0.0));
        assert_eq!(v.iter().filter(|z| z.norm() != 0.0).count(), 1);
    }

    proptest! {
        #[test]
        fn vectorize_is_linear_and_invertible(a in op_strategy(), b in op_strategy(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let (x, y) = (c(x, 0.3), c(y, -0.7));
            prop_assert_eq!(devectorize(&vectorize(&a)), a);
            let lhs = vectorize(&(a * x + b * y));
            let rhs = vectorize(&a) * x + vectorize(&b) * y;
            prop_assert!((lhs - rhs).norm() < 1e-14);
        }

        #[test]
        fn kron_convention(a in op_strategy(), b in op_strategy(), rho in op_strategy()) {
            let lhs = vectorize(&(a * rho * b));
            let sup = b.transpose().kronecker(&a);
            let rhs = sup * vectorize(&rho);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::diagonal([0.25; 4], Basis::Dressed).is_ok());
        assert!(matches!(
            DensityMatrix::diagonal([0.5, 0.5, 0.5, 0.0], Basis::Dressed),
            Err(Error::InvalidState(_))
        ));
        assert!(DensityMatrix::diagonal([1.2, -0.2, 0.0, 0.0], Basis::Dressed).is_err());
        let mut m = ket_bra(0, 0);
        m[(0, 1)] = c(0.0, 1e-9);
        assert!(DensityMatrix::new(m, Basis::Dressed).is_err());
    }

    #[test]
    fn hermitian_eigenvalues_of_diagonal() {
        let m = Op4::from_diagonal(&nalgebra::Vector4::new(c(0.4, 0.0), c(0.1, 0.0), c(0.3, 0.0), c(0.2, 0.0)));
        let e = hermitian_eigenvalues(&m);
        assert_eq!(e.map(|x| (x * 1e12).round() / 1e12), [0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn null_space_examples() {
        let id = DMatrix::<C64>::identity(3, 3);
        assert!(null_space(&id, 1e-12).unwrap().is_empty());
        let zero = DMatrix::<C64>::zeros(3, 3);
        let ns = null_space(&zero, 1e-12).unwrap();
        assert_eq!(ns.len(), 3);
        let rank2 = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 2.0, 3.0, 2.0, 4.0, 6.5, 0.0, 0.0, 1.0].map(|x| c(x, 0.0)),
        );
        let ns = null_space(&rank2, 1e-12).unwrap();
        assert_eq!(ns.len(), 1);
        assert!((&rank2 * &ns[0]).norm() < 1e-14);
        assert!((ns[0].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dressed_unitary_is_unitary_and_maps_kets() {
        let u = dressed_basis_unitary();
        assert!((u * u.adjoint() - Op4::identity()).norm() < 1e-15);
        // |1> = (|ge> - |eg>)/sqrt2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(u[(1, 1)], c(s, 0.0));
        assert_eq!(u[(2, 1)], c(-s, 0.0));
    }

    #[test]
    fn random_states_are_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let rho = random_density_matrix(&mut rng, Basis::Dressed);
            assert_eq!(rho.violation(&StateTolerances::STRICT), None);
            let p = random_populations(&mut rng);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert!(p.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn superoperator_rejects_non_square() {
        assert!(Superoperator::new(DMatrix::zeros(3, 4)).is_err());
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = c(f64::NAN, 0.0);
        assert!(Superoperator::new(m).is_err());
    }
}
