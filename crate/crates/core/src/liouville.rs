//! Liouvillian generators in the dressed basis, the zero-temperature closed
//! forms, and the finite-temperature reduced population dynamics.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{
    dressed_basis_unitary, hermitize, ket_bra, null_space, state_violation, Basis, DensityMatrix, EigenSystem,
    Mode, Op4, StateTolerances, Superoperator,
};
use crate::params::RateSet;

/// Size (in units of the decay rate) below which a closed-form denominator
/// counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_occupation(name: &str, n: f64) -> Result<()> {
    if !(n.is_finite() && n >= 0.0) {
        return Err(Error::Domain(format!("{name} must be finite and non-negative, got {n}")));
    }
    Ok(())
}

fn check_rates(rates: &RateSet) -> Result<()> {
    for (name, r) in ["gamma1_plus", "gamma1_minus", "gamma2_plus", "gamma2_minus"]
        .iter()
        .zip(rates.rates())
    {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Domain(format!("{name} must be finite and non-negative, got {r}")));
        }
    }
    for e in rates.energies() {
        if !e.is_finite() {
            return Err(Error::Domain(format!("dressed energy {e} is not finite")));
        }
    }
    Ok(())
}

fn require_dressed(rho: &DensityMatrix) -> Result<()> {
    if rho.basis() != Basis::Dressed {
        return Err(Error::Usage("expected a density matrix in the dressed basis".into()));
    }
    Ok(())
}

/// `-i [H, .] + sum_k w_k D[J_k]` with `D[J] rho = J rho J^dagger - {J^dagger J, rho}/2`.
pub fn lindblad_generator(hamiltonian: &Op4, jumps: &[(f64, Op4)]) -> Result<Superoperator> {
    let id = Op4::identity();
    let mut l = -(id.kronecker(hamiltonian) - hamiltonian.transpose().kronecker(&id)) * I;
    for (weight, jump) in jumps {
        if !(weight.is_finite() && *weight >= 0.0) {
            return Err(Error::Domain(format!("dissipator weight must be non-negative, got {weight}")));
        }
        if *weight == 0.0 {
            continue;
        }
        let jdj = jump.adjoint() * jump;
        let d = jump.conjugate().kronecker(jump) - (id.kronecker(&jdj) + jdj.transpose().kronecker(&id)) * real(0.5);
        l += d * real(*weight);
    }
    Superoperator::new(DMatrix::from_column_slice(16, 16, l.as_slice()))
}

/// Weighted jumps `|j'><j|` of the dressed-state master equation, as
/// `(weight, j', j)`.
pub fn dressed_jumps(rates: &RateSet, n1: f64, n2: f64) -> [(f64, usize, usize); 8] {
    let RateSet {
        gamma1_plus: g1p,
        gamma1_minus: g1m,
        gamma2_plus: g2p,
        gamma2_minus: g2m,
        ..
    } = *rates;
    [
        (g1p * (1.0 + n1), 2, 3),
        (g1p * n1, 3, 2),
        (g2p * (1.0 + n2), 0, 2),
        (g2p * n2, 2, 0),
        (g2m * (1.0 + n2), 1, 3),
        (g2m * n2, 3, 1),
        (g1m * (1.0 + n1), 0, 1),
        (g1m * n1, 1, 0),
    ]
}

/// Dressed-state Liouvillian in the dressed basis. `n1`, `n2` are the bath
/// occupations at `Omega_1` and `Omega_2`.
pub fn build_dressed_generator(rates: &RateSet, n1: f64, n2: f64) -> Result<Superoperator> {
    check_rates(rates)?;
    check_occupation("n1", n1)?;
    check_occupation("n2", n2)?;
    let h = Op4::from_diagonal(&nalgebra::Vector4::from(rates.energies().map(real)));
    let jumps: Vec<(f64, Op4)> = dressed_jumps(rates, n1, n2)
        .iter()
        .map(|&(w, to, from)| (w, ket_bra(to, from)))
        .collect();
    lindblad_generator(&h, &jumps)
}

/// Local-decay model with independent atoms at unit rate, built in the
/// computational basis and returned in the dressed basis. `n1`, `n2` are
/// per-atom thermal occupations.
pub fn build_phenomenological_generator(omega_over_gamma: f64, g: f64, n1: f64, n2: f64) -> Result<Superoperator> {
    for (name, x) in [("omega_over_gamma", omega_over_gamma), ("g", g)] {
        if !x.is_finite() {
            return Err(Error::Domain(format!("{name} must be finite, got {x}")));
        }
    }
    check_occupation("n1", n1)?;
    check_occupation("n2", n2)?;
    let lower = nalgebra::Matrix2::new(0.0, 1.0, 0.0, 0.0).map(real);
    let id2 = nalgebra::Matrix2::<C64>::identity();
    let s1 = lower.kronecker(&id2);
    let s2 = id2.kronecker(&lower);
    let h = (s1.adjoint() * s1 + s2.adjoint() * s2) * real(omega_over_gamma)
        + (s1.adjoint() * s2 + s2.adjoint() * s1) * real(g);
    let jumps = [
        (1.0 + n1, s1),
        (n1, s1.adjoint()),
        (1.0 + n2, s2),
        (n2, s2.adjoint()),
    ];
    let l_comp = lindblad_generator(&h, &jumps)?;
    let u = dressed_basis_unitary();
    let to_comp = u.conjugate().kronecker(&u);
    let to_dressed = u.transpose().kronecker(&u.adjoint());
    let to_comp = DMatrix::from_column_slice(16, 16, to_comp.as_slice());
    let to_dressed = DMatrix::from_column_slice(16, 16, to_dressed.as_slice());
    Superoperator::new(to_dressed * l_comp.matrix() * to_comp)
}

/// `zeta_j = E_j - i Gamma_j / 2` for the four dressed levels at zero
/// temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexFrequencies {
    pub zeta0: C64,
    pub zeta1: C64,
    pub zeta2: C64,
    pub zeta3: C64,
}

impl ComplexFrequencies {
    pub fn as_array(&self) -> [C64; 4] {
        [self.zeta0, self.zeta1, self.zeta2, self.zeta3]
    }

    /// Eigenvalue of the coherence `|j><k|`: `i conj(zeta_k) - i zeta_j`.
    pub fn coherence_eigenvalue(&self, j: usize, k: usize) -> C64 {
        let z = self.as_array();
        I * z[k].conj() - I * z[j]
    }
}

pub fn complex_frequencies(rates: &RateSet) -> ComplexFrequencies {
    let [_, e1, e2, e3] = rates.energies();
    ComplexFrequencies {
        zeta0: real(0.0),
        zeta1: C64::new(e1, -rates.gamma1_minus / 2.0),
        zeta2: C64::new(e2, -rates.gamma2_plus / 2.0),
        zeta3: C64::new(e3, -(rates.gamma1_plus + rates.gamma2_minus) / 2.0),
    }
}

/// Coefficients of the population-sector eigenvectors at zero temperature.
///
/// The slowest cascade mode `|3><3|` has right eigenvector
/// `sum_j d_j |j><j|`. The modes with eigenvalues `-gamma1_minus` and
/// `-gamma2_plus` have left eigenvectors `|1><1| + w1 |3><3|` and
/// `|2><2| + w2 |3><3|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOneCoefficients {
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub w1: f64,
    pub w2: f64,
}

impl TableOneCoefficients {
    pub fn new(rates: &RateSet) -> Result<Self> {
        check_rates(rates)?;
        let RateSet {
            gamma1_plus: g1p,
            gamma1_minus: g1m,
            gamma2_plus: g2p,
            gamma2_minus: g2m,
            ..
        } = *rates;
        let cascade = g1p + g2m;
        let guard = |name: &'static str, value: f64| -> Result<f64> {
            if value.abs() <= DEGENERACY_TOL {
                Err(Error::DegenerateSpectrum {
                    name,
                    value,
                    tolerance: DEGENERACY_TOL,
                })
            } else {
                Ok(value)
            }
        };
        let den1 = guard("gamma1_plus + gamma2_minus - gamma1_minus", cascade - g1m)?;
        let den2 = guard("gamma2_plus - gamma1_plus - gamma2_minus", g2p - cascade)?;
        let d1 = -g2m / den1;
        let d2 = g1p / den2;
        Ok(Self {
            d0: -(1.0 + d1 + d2),
            d1,
            d2,
            d3: 1.0,
            w1: g2m / den1,
            w2: -g1p / den2,
        })
    }
}

/// All 16 eigenmodes of the zero-temperature dressed generator in closed form.
pub fn analytic_eigensystem_zero_temperature(rates: &RateSet, zetas: &ComplexFrequencies) -> Result<EigenSystem> {
    let c = TableOneCoefficients::new(rates)?;
    let p = |j: usize| ket_bra(j, j);
    let mut modes = vec![
        Mode {
            eigenvalue: real(0.0),
            right: p(0),
            left: Op4::identity(),
        },
        Mode {
            eigenvalue: real(-rates.gamma1_minus),
            right: p(1) - p(0),
            left: p(1) + p(3) * real(c.w1),
        },
        Mode {
            eigenvalue: real(-rates.gamma2_plus),
            right: p(2) - p(0),
            left: p(2) + p(3) * real(c.w2),
        },
        Mode {
            eigenvalue: real(-(rates.gamma1_plus + rates.gamma2_minus)),
            right: p(0) * real(c.d0) + p(1) * real(c.d1) + p(2) * real(c.d2) + p(3) * real(c.d3),
            left: p(3),
        },
    ];
    for j in 0..4 {
        for k in 0..4 {
            if j != k {
                modes.push(Mode {
                    eigenvalue: zetas.coherence_eigenvalue(j, k),
                    right: ket_bra(j, k),
                    left: ket_bra(j, k),
                });
            }
        }
    }
    Ok(EigenSystem { modes })
}

/// Eigensystem of the dressed generator: closed form at zero temperature when
/// it is non-degenerate, numeric otherwise.
pub fn dressed_eigensystem(rates: &RateSet, n1: f64, n2: f64) -> Result<EigenSystem> {
    if n1 == 0.0 && n2 == 0.0 {
        match analytic_eigensystem_zero_temperature(rates, &complex_frequencies(rates)) {
            Err(Error::DegenerateSpectrum { .. }) => {}
            other => return other,
        }
    }
    EigenSystem::numeric(&build_dressed_generator(rates, n1, n2)?)
}

/// `rho(t) = sum_k Tr[left_k^dagger rho0] exp(lambda_k t) right_k`.
pub fn spectral_evolve(eigensystem: &EigenSystem, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    require_dressed(rho0)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    let m = eigensystem.modes.iter().fold(Op4::zeros(), |acc, mode| {
        let amp = crate::linalg::hs_inner(&mode.left, rho0.entries());
        if amp == real(0.0) {
            acc
        } else {
            acc + mode.right * (amp * (mode.eigenvalue * t).exp())
        }
    });
    finish(m, t)
}

fn finish(m: Op4, t: f64) -> Result<DensityMatrix> {
    let m = hermitize(&m);
    if let Some(msg) = state_violation(&m, &StateTolerances::uniform(1e-8)) {
        return Err(Error::Numerical(format!("propagated state invalid at t = {t}: {msg}")));
    }
    Ok(DensityMatrix::from_raw(m, Basis::Dressed))
}

/// Zero-temperature closed-form solution for an arbitrary dressed-basis
/// initial state.
pub fn evolve_closed_form_zero_temperature(
    p: &DensityMatrix,
    rates: &RateSet,
    zetas: &ComplexFrequencies,
    t: f64,
) -> Result<DensityMatrix> {
    require_dressed(p)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    // The same denominators as the eigenvectors; reuse their guard.
    TableOneCoefficients::new(rates)?;
    let RateSet {
        gamma1_plus: g1p,
        gamma1_minus: g1m,
        gamma2_plus: g2p,
        gamma2_minus: g2m,
        ..
    } = *rates;
    let cascade = g1p + g2m;
    let [_, p11, p22, p33] = p.populations();
    let e3 = (-cascade * t).exp();
    let e1 = (-g1m * t).exp();
    let e2 = (-g2p * t).exp();
    let rho11 = p33 * g2m * (e1 - e3) / (cascade - g1m) + p11 * e1;
    let rho22 = p33 * g1p * (e2 - e3) / (cascade - g2p) + p22 * e2;
    let rho33 = p33 * e3;
    let mut m = Op4::zeros();
    m[(1, 1)] = real(rho11);
    m[(2, 2)] = real(rho22);
    m[(3, 3)] = real(rho33);
    m[(0, 0)] = real(1.0 - rho11 - rho22 - rho33);
    for j in 0..4 {
        for k in 0..4 {
            if j != k {
                m[(j, k)] = p.get(j, k) * (zetas.coherence_eigenvalue(j, k) * t).exp();
            }
        }
    }
    finish(m, t)
}

/// Population generator on `(|0><0|, |2><2|, |3><3|)` with the slow rates set
/// to zero. Columns sum to zero.
pub fn reduced_generator_finite_temperature(rates: &RateSet, n1: f64, n2: f64) -> Result<Matrix3<f64>> {
    check_rates(rates)?;
    check_occupation("n1", n1)?;
    check_occupation("n2", n2)?;
    let (g1, g2) = (rates.gamma1_plus, rates.gamma2_plus);
    #[rustfmt::skip]
    let l = Matrix3::new(
        -g2 * n2,  g2 * (n2 + 1.0),             0.0,
         g2 * n2, -g2 * (n2 + 1.0) - g1 * n1,   g1 * (n1 + 1.0),
         0.0,      g1 * n1,                    -g1 * (n1 + 1.0),
    );
    Ok(l)
}

/// Stationary populations `(rho00, rho22, rho33)` of the reduced generator.
pub fn transient_steady_populations(n1: f64, n2: f64) -> Result<Vector3<f64>> {
    check_occupation("n1", n1)?;
    check_occupation("n2", n2)?;
    let s = 1.0 + n1 + 2.0 * n2 + 3.0 * n1 * n2;
    Ok(Vector3::new((n1 + 1.0) * (n2 + 1.0) / s, (n1 + 1.0) * n2 / s, n1 * n2 / s))
}

pub fn transient_steady_state(n1: f64, n2: f64) -> Result<DensityMatrix> {
    let p = transient_steady_populations(n1, n2)?;
    DensityMatrix::diagonal([p[0], 0.0, p[1], p[2]], Basis::Dressed)
}

/// Null vector of the reduced generator from the SVD, normalised to unit sum.
pub fn reduced_null_vector(l: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let m = DMatrix::from_fn(3, 3, |i, j| real(l[(i, j)]));
    let ns = null_space(&m, 1e-12)?;
    if ns.len() != 1 {
        return Err(Error::Numerical(format!("expected a one-dimensional null space, found {}", ns.len())));
    }
    let v = &ns[0];
    let sum: C64 = v.iter().sum();
    Ok(Vector3::from_fn(|i, _| (v[i] / sum).re))
}

/// Population dynamics of the local-decay model for a dressed-diagonal
/// initial state at zero temperature.
pub fn evolve_phenomenological_diagonal(p: &DensityMatrix, t: f64) -> Result<[f64; 4]> {
    require_dressed(p)?;
    for j in 0..4 {
        for k in 0..4 {
            if j != k && p.get(j, k).norm() > 1e-12 {
                return Err(Error::Domain(format!(
                    "initial state must be diagonal in the dressed basis; entry ({j},{k}) = {}",
                    p.get(j, k)
                )));
            }
        }
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(phenomenological_populations(p.populations(), t))
}

fn phenomenological_populations([_, p11, p22, p33]: [f64; 4], t: f64) -> [f64; 4] {
    let e = (-t).exp();
    let rho11 = e * (p11 + p33 - p33 * e);
    let rho22 = e * (p22 + p33 - p33 * e);
    let rho33 = p33 * e * e;
    [1.0 - rho11 - rho22 - rho33, rho11, rho22, rho33]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues_dense, integrate_linear_ode, random_density_matrix, random_populations, vectorize};
    use crate::params::{dressed_rates, validity_window, SystemParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rates_at(omega: f64, chi: f64) -> RateSet {
        dressed_rates(&SystemParams::zero_temperature(omega, chi).unwrap()).unwrap()
    }

    fn mid_rates(omega: f64) -> RateSet {
        rates_at(omega, validity_window(omega).chi_mid())
    }

    fn max_abs(m: &Op4) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn sample_rate_sets() -> Vec<RateSet> {
        vec![mid_rates(1e5), rates_at(1e3, 0.3), rates_at(1e5, 1.0), rates_at(1e8, 0.02)]
    }

    #[test]
    fn ground_state_is_stationary_at_zero_temperature() {
        for r in sample_rate_sets() {
            let l = build_dressed_generator(&r, 0.0, 0.0).unwrap();
            assert_eq!(max_abs(&l.apply(&ket_bra(0, 0)).unwrap()), 0.0);
        }
    }

    #[test]
    fn antisymmetric_state_decays_to_ground() {
        let r = mid_rates(1e5);
        let l = build_dressed_generator(&r, 0.0, 0.0).unwrap();
        let out = l.apply(&ket_bra(1, 1)).unwrap();
        let expected = (ket_bra(0, 0) - ket_bra(1, 1)) * real(r.gamma1_minus);
        assert!(max_abs(&(out - expected)) < 1e-15);
    }

    #[test]
    fn coherences_are_eigenvectors_at_zero_temperature() {
        for r in sample_rate_sets() {
            let l = build_dressed_generator(&r, 0.0, 0.0).unwrap();
            let z = complex_frequencies(&r);
            for j in 0..4 {
                for k in 0..4 {
                    if j == k {
                        continue;
                    }
                    let lambda = z.coherence_eigenvalue(j, k);
                    let out = l.apply(&ket_bra(j, k)).unwrap();
                    let err = max_abs(&(out - ket_bra(j, k) * lambda));
                    assert!(err <= 1e-12 * lambda.norm().max(1.0), "({j},{k}): {err}");
                    assert!(lambda.re <= 0.0);
                }
            }
        }
    }

    #[test]
    fn coherences_stay_eigenvectors_at_finite_temperature() {
        let r = mid_rates(1e5);
        let l = build_dressed_generator(&r, 0.7, 0.3).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                if j == k {
                    continue;
                }
                let out = l.apply(&ket_bra(j, k)).unwrap();
                let lambda = out[(j, k)];
                let mut rest = out;
                rest[(j, k)] = real(0.0);
                assert!(max_abs(&rest) <= 1e-12 * lambda.norm().max(1.0));
                assert!(lambda.re < 0.0);
            }
        }
    }

    #[test]
    fn generators_preserve_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for r in sample_rate_sets() {
            let (n1, n2) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
            let l = build_dressed_generator(&r, n1, n2).unwrap();
            assert!(l.trace_preservation_error() < 1e-12);
            let p = build_phenomenological_generator(r.omega, r.g, n1, n2).unwrap();
            assert!(p.trace_preservation_error() < 1e-9 * r.omega.max(1.0));
        }
    }

    #[test]
    fn generator_rejects_negative_input() {
        let r = mid_rates(1e5);
        assert!(matches!(build_dressed_generator(&r, -0.1, 0.0), Err(Error::Domain(_))));
        let bad = r.with_rates(-1.0, r.gamma1_minus, r.gamma2_plus, r.gamma2_minus);
        assert!(matches!(build_dressed_generator(&bad, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(lindblad_generator(&Op4::zeros(), &[(-1.0, ket_bra(0, 1))]).is_err());
    }

    #[test]
    fn complex_frequency_invariants() {
        let r = mid_rates(1e5);
        let z = complex_frequencies(&r);
        assert_eq!(z.zeta0, real(0.0));
        assert_eq!(z.zeta3.im, -(r.gamma1_plus + r.gamma2_minus) / 2.0);
        assert!(((z.zeta2 - z.zeta1).re - 2.0 * r.g).abs() < 1e-15 * r.omega);
        assert!((z.zeta3.re - 2.0 * r.omega).abs() < 1e-15 * r.omega);
        let free = complex_frequencies(&r.with_rates(0.0, 0.0, 0.0, 0.0));
        for (zj, ej) in free.as_array().iter().zip(r.energies()) {
            assert_eq!(*zj, real(ej));
        }
    }

    #[test]
    fn table_one_coefficients() {
        for r in sample_rate_sets() {
            let c = TableOneCoefficients::new(&r).unwrap();
            assert_eq!(c.d3, 1.0);
            assert!((c.d0 + c.d1 + c.d2 + c.d3).abs() < 1e-15);
            // closed form of d0
            let (g1p, g1m, g2p, g2m) = (r.gamma1_plus, r.gamma1_minus, r.gamma2_plus, r.gamma2_minus);
            let d0 = (g2p * g1p + g1m * g2m - g1m * g2p) / ((g2p - g1p - g2m) * (g1m - g1p - g2m));
            assert!((c.d0 - d0).abs() < 1e-12 * d0.abs().max(1.0));
        }
    }

    #[test]
    fn degenerate_rates_are_reported() {
        let r = mid_rates(1e5);
        let bad = r.with_rates(0.5, 0.2, 1.0, 0.5);
        assert!(matches!(TableOneCoefficients::new(&bad), Err(Error::DegenerateSpectrum { .. })));
        let z = complex_frequencies(&bad);
        assert!(analytic_eigensystem_zero_temperature(&bad, &z).is_err());
        let rho = DensityMatrix::basis_state(3, Basis::Dressed);
        assert!(evolve_closed_form_zero_temperature(&rho, &bad, &z, 1.0).is_err());
        // A vanishing denominator without coupling is not defective, and the
        // numeric eigensystem takes over.
        let removable = r.with_rates(0.2, 0.2, 1.0, 0.0);
        assert!(TableOneCoefficients::new(&removable).is_err());
        let es = dressed_eigensystem(&removable, 0.0, 0.0).unwrap();
        assert!(es.biorthonormality_error() < 1e-10);
        let l = build_dressed_generator(&removable, 0.0, 0.0).unwrap();
        for m in &es.modes {
            assert!(max_abs(&(l.apply(&m.right).unwrap() - m.right * m.eigenvalue)) < 1e-9);
        }
    }

    #[test]
    fn analytic_eigensystem_is_biorthonormal_and_exact() {
        for r in sample_rate_sets() {
            let z = complex_frequencies(&r);
            let es = analytic_eigensystem_zero_temperature(&r, &z).unwrap();
            assert!(es.biorthonormality_error() < 1e-10);
            let l = build_dressed_generator(&r, 0.0, 0.0).unwrap();
            let adj = l.matrix().adjoint();
            for m in &es.modes {
                let scale = m.eigenvalue.norm().max(1.0);
                let res = l.apply(&m.right).unwrap() - m.right * m.eigenvalue;
                assert!(max_abs(&res) < 1e-12 * scale);
                let left = nalgebra::DVector::from_column_slice(vectorize(&m.left).as_slice());
                let res = &adj * &left - left * m.eigenvalue.conj();
                assert!(res.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn analytic_eigenvalues_match_numeric() {
        for r in sample_rate_sets() {
            let z = complex_frequencies(&r);
            let analytic = analytic_eigensystem_zero_temperature(&r, &z).unwrap().eigenvalues();
            let numeric = eigenvalues_dense(build_dressed_generator(&r, 0.0, 0.0).unwrap().matrix()).unwrap();
            for a in &analytic {
                let best = numeric.iter().map(|n| (n - a).norm()).fold(f64::INFINITY, f64::min);
                assert!(best <= 1e-10 * a.norm().max(1.0), "{a}: {best}");
            }
        }
    }

    #[test]
    fn spectral_evolution_limits() {
        let r = mid_rates(1e5);
        let es = analytic_eigensystem_zero_temperature(&r, &complex_frequencies(&r)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density_matrix(&mut rng, Basis::Dressed);
        assert!(spectral_evolve(&es, &rho, 0.0).unwrap().max_abs_diff(&rho) < 1e-10);
        let late = spectral_evolve(&es, &rho, 60.0 / r.gamma1_minus).unwrap();
        assert!(late.max_abs_diff(&DensityMatrix::basis_state(0, Basis::Dressed)) < 1e-12);
        assert!(spectral_evolve(&es, &rho, -1.0).is_err());
    }

    #[test]
    fn three_propagators_agree_on_random_states() {
        let r = mid_rates(1e5);
        let z = complex_frequencies(&r);
        let es = analytic_eigensystem_zero_temperature(&r, &z).unwrap();
        let l = build_dressed_generator(&r, 0.0, 0.0).unwrap();
        let t_max = 20.0 / r.gamma2_plus;
        let grid: Vec<f64> = (0..=10).map(|k| t_max * k as f64 / 10.0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let rho0 = random_density_matrix(&mut rng, Basis::Dressed);
            let numeric = integrate_linear_ode(&l, &rho0, &grid).unwrap();
            for (rk, &t) in numeric.iter().zip(&grid) {
                let sp = spectral_evolve(&es, &rho0, t).unwrap();
                let cf = evolve_closed_form_zero_temperature(&rho0, &r, &z, t).unwrap();
                assert!(sp.max_abs_diff(rk) <= 1e-8, "t={t}: {}", sp.max_abs_diff(rk));
                assert!(sp.max_abs_diff(&cf) <= 1e-8);
                assert!(cf.max_abs_diff(rk) <= 1e-8);
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let r = mid_rates(1e5);
        let z = complex_frequencies(&r);
        let cascade = r.gamma1_plus + r.gamma2_minus;
        for t in [0.0, 0.3, 2.0, 50.0] {
            let rho = evolve_closed_form_zero_temperature(&DensityMatrix::basis_state(3, Basis::Dressed), &r, &z, t).unwrap();
            assert!((rho.get(3, 3).re - (-cascade * t).exp()).abs() < 1e-15);
            let rho = evolve_closed_form_zero_temperature(&DensityMatrix::basis_state(1, Basis::Dressed), &r, &z, t).unwrap();
            let p11 = (-r.gamma1_minus * t).exp();
            assert!((rho.get(1, 1).re - p11).abs() < 1e-15);
            assert_eq!(rho.get(2, 2).re, 0.0);
            assert_eq!(rho.get(3, 3).re, 0.0);
            assert!((rho.get(0, 0).re - (1.0 - p11)).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_matches_spectral_for_diagonal_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for r in sample_rate_sets() {
            let z = complex_frequencies(&r);
            let es = analytic_eigensystem_zero_temperature(&r, &z).unwrap();
            for _ in 0..20 {
                let p = DensityMatrix::diagonal(random_populations(&mut rng), Basis::Dressed).unwrap();
                let t = rng.gen_range(0.0..5.0 / r.gamma1_minus.max(1e-3));
                let a = evolve_closed_form_zero_temperature(&p, &r, &z, t).unwrap();
                let b = spectral_evolve(&es, &p, t).unwrap();
                assert!(a.max_abs_diff(&b) <= 1e-10);
            }
        }
    }

    #[test]
    fn antisymmetric_population_is_protected() {
        let omega = 1e5;
        let r = mid_rates(omega);
        let z = complex_frequencies(&r);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // |eg> = (|2> - |1>)/sqrt2
        let ket = nalgebra::Vector4::new(real(0.0), real(-s), real(s), real(0.0));
        let rho0 = DensityMatrix::pure(&ket, Basis::Dressed).unwrap();
        let t_star = 10.0 / r.gamma2_plus;
        let rho = evolve_closed_form_zero_temperature(&rho0, &r, &z, t_star).unwrap();
        let es = analytic_eigensystem_zero_temperature(&r, &z).unwrap();
        let rho_sp = spectral_evolve(&es, &rho0, t_star).unwrap();
        for x in [rho, rho_sp] {
            assert!((x.get(1, 1).re - 0.5).abs() <= r.gamma1_minus * t_star + 1e-6);
        }
    }

    #[test]
    fn reduced_generator_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for r in sample_rate_sets() {
            let zero_t = reduced_generator_finite_temperature(&r, 0.0, 0.0).unwrap();
            assert_eq!(zero_t[(0, 0)], 0.0);
            assert_eq!(zero_t[(1, 0)], 0.0);
            assert_eq!(zero_t[(2, 0)], 0.0);
            assert_eq!(zero_t[(2, 1)], 0.0);
            let v = reduced_null_vector(&zero_t).unwrap();
            assert!((v - Vector3::new(1.0, 0.0, 0.0)).amax() < 1e-12);

            let (n1, n2) = (rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0));
            let l = reduced_generator_finite_temperature(&r, n1, n2).unwrap();
            for col in 0..3 {
                assert!(l.column(col).sum().abs() < 1e-14 * r.gamma2_plus.max(1.0) * (1.0 + n1 + n2));
            }
            let ev = eigenvalues_dense(&DMatrix::from_fn(3, 3, |i, j| real(l[(i, j)]))).unwrap();
            let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
            re.sort_by(f64::total_cmp);
            assert!(re[2].abs() < 1e-12);
            assert!(re[1] < 0.0 && re[0] < 0.0);
        }
    }

    #[test]
    fn transient_steady_state_values() {
        let rho = transient_steady_state(0.0, 0.0).unwrap();
        assert_eq!(rho, DensityMatrix::basis_state(0, Basis::Dressed));
        let p = transient_steady_populations(1.0, 1.0).unwrap();
        assert!((p - Vector3::new(4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0)).amax() < 1e-15);
        assert!(transient_steady_state(-1.0, 0.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for r in sample_rate_sets() {
            let (n1, n2) = (rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0));
            let l = reduced_generator_finite_temperature(&r, n1, n2).unwrap();
            let p = transient_steady_populations(n1, n2).unwrap();
            assert!((l * p).amax() < 1e-12 * r.gamma2_plus.max(1.0) * (1.0 + n1 + n2));
            let oracle = reduced_null_vector(&l).unwrap();
            assert!((oracle - p).amax() < 1e-12);
            // detailed balance ratios n/(n+1)
            assert!((p[1] / p[0] - n2 / (n2 + 1.0)).abs() < 1e-12);
            if n2 > 0.0 {
                assert!((p[2] / p[1] - n1 / (n1 + 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn phenomenological_closed_form_examples() {
        let p = DensityMatrix::basis_state(3, Basis::Dressed);
        let pops = evolve_phenomenological_diagonal(&p, std::f64::consts::LN_2).unwrap();
        for (x, e) in pops.iter().zip([0.25; 4]) {
            assert!((x - e).abs() < 1e-15);
        }
        let late = evolve_phenomenological_diagonal(&p, 60.0).unwrap();
        assert!((late[0] - 1.0).abs() < 1e-15);
        let coherent = DensityMatrix::pure(
            &nalgebra::Vector4::new(real(0.0), real(0.6), real(0.8), real(0.0)),
            Basis::Dressed,
        )
        .unwrap();
        assert!(matches!(evolve_phenomenological_diagonal(&coherent, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn phenomenological_generator_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let grid: Vec<f64> = (0..=12).map(|k| 0.5 * k as f64).collect();
        for (omega, g) in [(50.0, 0.0), (50.0, 3.0), (200.0, 17.0)] {
            let l = build_phenomenological_generator(omega, g, 0.0, 0.0).unwrap();
            for _ in 0..5 {
                let p = DensityMatrix::diagonal(random_populations(&mut rng), Basis::Dressed).unwrap();
                let traj = integrate_linear_ode(&l, &p, &grid).unwrap();
                for (rho, &t) in traj.iter().zip(&grid) {
                    let expected = evolve_phenomenological_diagonal(&p, t).unwrap();
                    for j in 0..4 {
                        assert!((rho.get(j, j).re - expected[j]).abs() < 1e-8, "omega={omega} g={g} t={t}");
                    }
                }
            }
        }
        // g = 0, |ee>: rho33 = exp(-2t)
        let l = build_phenomenological_generator(10.0, 0.0, 0.0, 0.0).unwrap();
        let traj = integrate_linear_ode(&l, &DensityMatrix::basis_state(3, Basis::Dressed), &[0.0, 1.0]).unwrap();
        assert!((traj[1].get(3, 3).re - (-2.0f64).exp()).abs() < 1e-9);
    }
}
