//! Two-qubit concurrence and the change between dressed and computational
//! bases.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dressed_basis_unitary, eigenvalues_dense, hermitize, Basis, DensityMatrix, Op4};
use crate::params::RateSet;

/// Clamp threshold for rounding noise in eigenvalues and preconditions.
pub const ENTANGLEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct ConcurrenceValue(f64);

impl ConcurrenceValue {
    /// Accepts values within rounding of `[0, 1]` and clamps them.
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < -ENTANGLEMENT_TOL || value > 1.0 + ENTANGLEMENT_TOL {
            return Err(Error::Numerical(format!("concurrence {value} outside [0, 1]")));
        }
        Ok(Self(value.clamp(0.0, 1.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<ConcurrenceValue> for f64 {
    fn from(c: ConcurrenceValue) -> f64 {
        c.0
    }
}

fn require_basis(rho: &DensityMatrix, basis: Basis) -> Result<()> {
    if rho.basis() != basis {
        return Err(Error::Usage(format!(
            "expected a density matrix in the {basis:?} basis, got {:?}",
            rho.basis()
        )));
    }
    Ok(())
}

pub fn dressed_to_computational(rho: &DensityMatrix) -> Result<DensityMatrix> {
    require_basis(rho, Basis::Dressed)?;
    let u = dressed_basis_unitary();
    Ok(DensityMatrix::from_raw(
        hermitize(&(u * rho.entries() * u.adjoint())),
        Basis::Computational,
    ))
}

pub fn computational_to_dressed(rho: &DensityMatrix) -> Result<DensityMatrix> {
    require_basis(rho, Basis::Computational)?;
    let u = dressed_basis_unitary();
    Ok(DensityMatrix::from_raw(
        hermitize(&(u.adjoint() * rho.entries() * u)),
        Basis::Dressed,
    ))
}

/// Product state `|gg>`, `|ge>`, `|eg>` or `|ee>` (computational index 0..4)
/// expressed in the dressed basis.
pub fn product_state(index: usize) -> Result<DensityMatrix> {
    if index > 3 {
        return Err(Error::Usage(format!("computational index {index} out of range")));
    }
    computational_to_dressed(&DensityMatrix::basis_state(index, Basis::Computational))
}

fn spin_flip(rho: &Op4) -> Op4 {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    #[rustfmt::skip]
    let yy = Op4::new(
        z,  z, z, -o,
        z,  z, o,  z,
        z,  o, z,  z,
        -o, z, z,  z,
    );
    yy * rho.conjugate() * yy
}

/// Wootters concurrence `max(0, L1 - L2 - L3 - L4)` with `L_i` the
/// descending square roots of the eigenvalues of `rho rho~`.
pub fn concurrence_general(rho: &DensityMatrix) -> Result<ConcurrenceValue> {
    require_basis(rho, Basis::Computational)?;
    let m = rho.entries() * spin_flip(rho.entries());
    let ev = eigenvalues_dense(&DMatrix::from_column_slice(4, 4, m.as_slice()))?;
    let mut roots = Vec::with_capacity(4);
    for mu in ev {
        if mu.im.abs() > ENTANGLEMENT_TOL || mu.re < -ENTANGLEMENT_TOL {
            return Err(Error::Numerical(format!(
                "eigenvalue {mu} of rho*rho_tilde is not a non-negative real"
            )));
        }
        roots.push(mu.re.max(0.0).sqrt());
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    ConcurrenceValue::new((roots[0] - roots[1] - roots[2] - roots[3]).max(0.0))
}

/// Closed form for states whose only off-diagonal entries are `rho_03` and
/// `rho_12` (computational basis).
pub fn concurrence_x_state(rho: &DensityMatrix) -> Result<ConcurrenceValue> {
    require_basis(rho, Basis::Computational)?;
    const NAMES: [&str; 4] = ["gg", "ge", "eg", "ee"];
    for j in 0..4 {
        for k in 0..4 {
            let anti = j + k == 3;
            if j != k && !anti && rho.get(j, k).norm() > ENTANGLEMENT_TOL {
                return Err(Error::Usage(format!(
                    "not an X-state: entry ({j},{k}) <{}|rho|{}> = {}",
                    NAMES[j],
                    NAMES[k],
                    rho.get(j, k)
                )));
            }
        }
    }
    let p = rho.populations().map(|x| x.max(0.0));
    let a = rho.get(0, 3).norm() - (p[1] * p[2]).sqrt();
    let b = rho.get(1, 2).norm() - (p[0] * p[3]).sqrt();
    ConcurrenceValue::new(2.0 * a.max(b).max(0.0))
}

/// `sqrt((rho22 - rho11)^2 + 4 Im(rho12)^2)` for dressed states without
/// double excitation.
pub fn concurrence_single_excitation(rho: &DensityMatrix) -> Result<ConcurrenceValue> {
    require_basis(rho, Basis::Dressed)?;
    let rho33 = rho.get(3, 3).re;
    let rho03 = rho.get(0, 3).norm();
    if rho33.abs() > ENTANGLEMENT_TOL || rho03 > ENTANGLEMENT_TOL {
        return Err(Error::Usage(format!(
            "single-excitation formula needs rho33 and rho03 negligible, got {rho33:e} and {rho03:e}"
        )));
    }
    let diff = rho.get(2, 2).re - rho.get(1, 1).re;
    let im = rho.get(1, 2).im;
    ConcurrenceValue::new((diff * diff + 4.0 * im * im).sqrt())
}

/// Concurrence at zero temperature for one atom initially excited.
pub fn concurrence_excited_atom_zero_temperature(rates: &RateSet, t: f64) -> Result<ConcurrenceValue> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    let a = (-rates.gamma2_plus * t).exp();
    let b = (-rates.gamma1_minus * t).exp();
    let s = (2.0 * rates.g * t).sin();
    let c = 0.5 * ((a - b).powi(2) + 4.0 * a * b * s * s).sqrt();
    ConcurrenceValue::new(c)
}

/// Concurrence of `P11 |1><1| + (1 - P11) rho_st` with `rho_st` the
/// transient thermal steady state.
pub fn concurrence_transient_steady(p11: f64, n1: f64, n2: f64) -> Result<ConcurrenceValue> {
    if !(0.0..=1.0).contains(&p11) {
        return Err(Error::Domain(format!("P11 must lie in [0, 1], got {p11}")));
    }
    for (name, n) in [("n1", n1), ("n2", n2)] {
        if !(n.is_finite() && n >= 0.0) {
            return Err(Error::Domain(format!("{name} must be finite and non-negative, got {n}")));
        }
    }
    let s = 1.0 + n1 + 2.0 * n2 + 3.0 * n1 * n2;
    let n12 = (n1 + 1.0) * n2 / s;
    let n21 = (n2 + 1.0) * n1 / s;
    let q = 1.0 - p11;
    ConcurrenceValue::new(((n12 * q - p11).abs() - 2.0 * q * (n12 * n21).sqrt()).max(0.0))
}
