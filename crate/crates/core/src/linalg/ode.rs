//! Fixed-step RK4 for `d vec(rho)/dt = L vec(rho)`.
//!
//! The purely imaginary part of the diagonal, `D = i Im diag(L)`, is removed
//! analytically: the integrator advances `w = exp(-D t) v`, which obeys
//! `w' = exp(-D t) (L - D) exp(D t) w`. The step is set by the real decay
//! rates and by the frequency differences of coupled components, never by the
//! bare oscillation frequencies.

use num_complex::Complex64 as C64;

use super::{devectorize, hermitize, state_violation, DensityMatrix, StateTolerances, Superoperator, Vec16};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rk4Options {
    /// Step is `step_factor / rate`, with `rate` the fastest relevant scale.
    pub step_factor: f64,
    /// Allowed invariant violation at output points before failing.
    pub accuracy_tolerance: f64,
}

impl Default for Rk4Options {
    fn default() -> Self {
        Self {
            step_factor: 0.01,
            accuracy_tolerance: 1e-6,
        }
    }
}

struct Entry {
    row: usize,
    col: usize,
    value: C64,
    /// `Im L_col,col - Im L_row,row`.
    freq: f64,
}

struct Frame {
    entries: Vec<Entry>,
    freqs: [f64; 16],
    stationary: bool,
    max_rate: f64,
}

impl Frame {
    fn new(generator: &Superoperator) -> Self {
        let m = generator.matrix();
        let freqs: [f64; 16] = std::array::from_fn(|a| m[(a, a)].im);
        let mut entries = Vec::new();
        let mut max_rate = 0.0f64;
        for col in 0..16 {
            for row in 0..16 {
                let mut value = m[(row, col)];
                if row == col {
                    value.im = 0.0;
                    max_rate = max_rate.max(value.re.abs());
                }
                if value.re == 0.0 && value.im == 0.0 {
                    continue;
                }
                let freq = freqs[col] - freqs[row];
                max_rate = max_rate.max(freq.abs());
                entries.push(Entry {
                    row,
                    col,
                    value,
                    freq,
                });
            }
        }
        let stationary = entries.iter().all(|e| e.freq == 0.0);
        Frame {
            entries,
            freqs,
            stationary,
            max_rate,
        }
    }

    fn derivative(&self, t: f64, w: &Vec16) -> Vec16 {
        let mut out = Vec16::zeros();
        if self.stationary {
            for e in &self.entries {
                out[e.row] += e.value * w[e.col];
            }
        } else {
            for e in &self.entries {
                let (s, c) = (e.freq * t).sin_cos();
                out[e.row] += e.value * C64::new(c, s) * w[e.col];
            }
        }
        out
    }

    fn to_lab(&self, t: f64, w: &Vec16) -> Vec16 {
        Vec16::from_fn(|a, _| {
            let (s, c) = (self.freqs[a] * t).sin_cos();
            w[a] * C64::new(c, s)
        })
    }
}

pub fn integrate_linear_ode(
    generator: &Superoperator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    integrate_linear_ode_with(generator, rho0, t_grid, &Rk4Options::default())
}

pub fn integrate_linear_ode_with(
    generator: &Superoperator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    options: &Rk4Options,
) -> Result<Vec<DensityMatrix>> {
    if generator.dim() != 16 {
        return Err(Error::Usage(format!(
            "integrator needs a 16-dimensional generator, got {}",
            generator.dim()
        )));
    }
    validate_grid(t_grid)?;
    if !(options.step_factor > 0.0 && options.step_factor.is_finite()) {
        return Err(Error::Domain(format!("step factor must be positive, got {}", options.step_factor)));
    }

    let frame = Frame::new(generator);
    let h_max = if frame.max_rate > 0.0 {
        options.step_factor / frame.max_rate
    } else {
        f64::INFINITY
    };
    let tol = StateTolerances::uniform(options.accuracy_tolerance);
    let basis = rho0.basis();

    let mut w = super::vectorize(rho0.entries());
    let mut out = Vec::with_capacity(t_grid.len());
    let mut t = 0.0;
    for &t_next in t_grid {
        let span = t_next - t;
        if span > 0.0 {
            let steps = if h_max.is_finite() {
                (span / h_max).ceil().max(1.0)
            } else {
                1.0
            };
            if steps > 1e12 {
                return Err(Error::Numerical(format!("{steps:e} RK4 steps required")));
            }
            let steps = steps as u64;
            let h = span / steps as f64;
            for k in 0..steps {
                let s = t + k as f64 * h;
                let k1 = frame.derivative(s, &w);
                let k2 = frame.derivative(s + 0.5 * h, &(w + k1 * C64::new(0.5 * h, 0.0)));
                let k3 = frame.derivative(s + 0.5 * h, &(w + k2 * C64::new(0.5 * h, 0.0)));
                let k4 = frame.derivative(s + h, &(w + k3 * C64::new(h, 0.0)));
                w += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
            }
            t = t_next;
        }
        let rho = hermitize(&devectorize(&frame.to_lab(t, &w)));
        if let Some(msg) = state_violation(&rho, &tol) {
            return Err(Error::IntegrationAccuracy {
                time: t,
                detail: msg,
            });
        }
        out.push(DensityMatrix::from_raw(rho, basis));
    }
    Ok(out)
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Usage("time grid is empty".into()));
    }
    if t_grid[0] != 0.0 {
        return Err(Error::Usage(format!("time grid must start at 0, got {}", t_grid[0])));
    }
    for pair in t_grid.windows(2) {
        if !(pair[1] >= pair[0]) || !pair[1].is_finite() {
            return Err(Error::Usage(format!(
                "time grid must be finite and non-decreasing ({} after {})",
                pair[1], pair[0]
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ket_bra, Basis, Op4};
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Single-qubit-like decay `|1> -> |0>` at rate `gamma`, embedded in the
    /// 4-level space, plus level energies.
    fn decay_generator(gamma: f64, energies: [f64; 4]) -> Superoperator {
        let id = Op4::identity();
        let h = Op4::from_diagonal(&nalgebra::Vector4::from_fn(|j, _| c(energies[j], 0.0)));
        let jump = ket_bra(0, 1) * c(gamma.sqrt(), 0.0);
        let jdj = jump.adjoint() * jump;
        let i = c(0.0, 1.0);
        let l = -(id.kronecker(&h) - h.transpose().kronecker(&id)) * i
            + jump.conjugate().kronecker(&jump)
            - (id.kronecker(&jdj) + jdj.transpose().kronecker(&id)) * c(0.5, 0.0);
        Superoperator::new(DMatrix::from_column_slice(16, 16, l.as_slice())).unwrap()
    }

    fn superposition() -> DensityMatrix {
        let s = 0.5f64.sqrt();
        let ket = nalgebra::Vector4::new(c(s, 0.0), c(0.0, s), c(0.0, 0.0), c(0.0, 0.0));
        DensityMatrix::pure(&ket, Basis::Dressed).unwrap()
    }

    #[test]
    fn matches_exact_decay_with_fast_oscillation() {
        let gamma = 0.7;
        let omega = 1e5;
        let l = decay_generator(gamma, [0.0, omega, 0.0, 0.0]);
        let grid: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
        let traj = integrate_linear_ode(&l, &superposition(), &grid).unwrap();
        for (rho, &t) in traj.iter().zip(&grid) {
            let p1 = 0.5 * (-gamma * t).exp();
            assert!((rho.get(1, 1).re - p1).abs() < 1e-9, "t={t}");
            assert!((rho.get(0, 0).re - (1.0 - p1)).abs() < 1e-9);
            // <0|rho|1> = (1/2)(-i) e^{(i omega - gamma/2) t}
            let phase = C64::from_polar(0.5 * (-gamma * t / 2.0).exp(), omega * t);
            let expected = phase * c(0.0, -1.0);
            assert!((rho.get(0, 1) - expected).norm() < 1e-9, "t={t}: {}", rho.get(0, 1));
        }
    }

    #[test]
    fn step_halving_converges() {
        let l = decay_generator(1.3, [0.0, 2.0, 5.0, 9.0]);
        let grid = [0.0, 0.5, 1.0, 3.0];
        let coarse = integrate_linear_ode(&l, &superposition(), &grid).unwrap();
        let fine = integrate_linear_ode_with(
            &l,
            &superposition(),
            &grid,
            &Rk4Options {
                step_factor: 0.005,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            assert!(a.max_abs_diff(b) < 1e-8);
        }
    }

    #[test]
    fn zero_generator_keeps_state() {
        let l = Superoperator::zeros(16);
        let rho = superposition();
        let traj = integrate_linear_ode(&l, &rho, &[0.0, 1.0, 100.0]).unwrap();
        for r in &traj {
            assert_eq!(r.entries(), rho.entries());
        }
    }

    #[test]
    fn repeated_times_are_allowed() {
        let l = decay_generator(1.0, [0.0; 4]);
        let traj = integrate_linear_ode(&l, &superposition(), &[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(traj[0], traj[1]);
        assert_eq!(traj[2], traj[3]);
    }

    #[test]
    fn rejects_bad_grids() {
        let l = decay_generator(1.0, [0.0; 4]);
        let rho = superposition();
        assert!(integrate_linear_ode(&l, &rho, &[]).is_err());
        assert!(integrate_linear_ode(&l, &rho, &[0.5, 1.0]).is_err());
        assert!(integrate_linear_ode(&l, &rho, &[0.0, 1.0, 0.5]).is_err());
        assert!(integrate_linear_ode(&l, &rho, &[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn non_physical_generator_is_reported() {
        // Pure gain on |0><0| breaks trace preservation.
        let mut m = DMatrix::zeros(16, 16);
        m[(0, 0)] = c(1.0, 0.0);
        let l = Superoperator::new(m).unwrap();
        let rho = DensityMatrix::basis_state(0, Basis::Dressed);
        let err = integrate_linear_ode(&l, &rho, &[0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::IntegrationAccuracy { .. }));
    }
}
