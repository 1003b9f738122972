//! Physical parameters of the coupled-atom model in units where the
//! single-atom decay rate is one.
//!
//! Everything is derived from three dimensionless inputs: the ratio of the
//! atomic transition frequency to the decay rate, the separation parameter
//! `chi = 2 R Omega / c`, and the thermal occupation of the bath at the two
//! dressed transition frequencies.

use serde::Serialize;

use crate::error::{Error, Result};

/// Below this argument the axial factor is evaluated from its Taylor series;
/// the closed form cancels catastrophically there. The parallel factor uses
/// its full series everywhere below 1.
pub const SERIES_SWITCHOVER: f64 = 1e-2;

/// Negative rates smaller in magnitude than this are rounding noise.
const RATE_NOISE: f64 = 1e-14;

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {x}")))
    }
}

/// Geometry factor for dipole components perpendicular to the interatomic
/// axis, `3[(x^2 - 1) sin x + x cos x] / (2 x^3)`.
pub fn geometry_factor_parallel(chi: f64) -> Result<f64> {
    check_finite("chi", chi)?;
    if chi < 0.0 {
        return Err(Error::Domain(format!("chi must be non-negative, got {chi}")));
    }
    if chi < 1.0 {
        return Ok(1.0 - parallel_complement_series(chi));
    }
    let (s, c) = chi.sin_cos();
    Ok(3.0 * ((chi * chi - 1.0) * s + chi * c) / (2.0 * chi.powi(3)))
}

/// Geometry factor for dipole components along the interatomic axis,
/// `3 (sin x - x cos x) / x^3`.
///
/// The master equation for dipoles perpendicular to the axis only uses
/// [`geometry_factor_parallel`]; this one is kept for the full set.
pub fn geometry_factor_axial(chi: f64) -> Result<f64> {
    check_finite("chi", chi)?;
    if chi < 0.0 {
        return Err(Error::Domain(format!("chi must be non-negative, got {chi}")));
    }
    if chi < SERIES_SWITCHOVER {
        let x2 = chi * chi;
        return Ok(1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0);
    }
    let (s, c) = chi.sin_cos();
    Ok(3.0 * (s - chi * c) / chi.powi(3))
}

/// `1 - geometry_factor_parallel(x)` without cancellation for small `x`.
fn one_minus_parallel(x: f64) -> Result<f64> {
    if x >= 1.0 {
        return Ok(1.0 - geometry_factor_parallel(x)?);
    }
    Ok(parallel_complement_series(x))
}

fn parallel_complement_series(x: f64) -> f64 {
    // f(x) = sum_m a_m x^(2m-2) with
    // a_m = (3/2) (-1)^m [1/(2m)! - 1/(2m-1)! - 1/(2m+1)!].
    let x2 = x * x;
    let mut sum = 0.0;
    let mut power = x2;
    // 1/(2m-1)! for m = 2
    let mut inv_fact = 1.0 / 6.0;
    let mut sign = 1.0;
    for m in 2..20 {
        let two_m = 2.0 * m as f64;
        let f_2m = inv_fact / two_m;
        let f_2m1 = f_2m / (two_m + 1.0);
        let a = 1.5 * sign * (f_2m - inv_fact - f_2m1);
        sum -= a * power;
        if (a * power).abs() < 1e-18 * sum.abs() {
            break;
        }
        power *= x2;
        inv_fact = f_2m1;
        sign = -sign;
    }
    sum
}

/// Dipole-dipole coupling `g = 6 / chi^3` in units of the decay rate.
pub fn coupling_g(chi: f64) -> Result<f64> {
    check_finite("chi", chi)?;
    if chi <= 0.0 {
        return Err(Error::Domain(format!("chi must be positive, got {chi}")));
    }
    Ok(6.0 / chi.powi(3))
}

/// Mean Bose-Einstein occupation `1 / (e^x - 1)` for `x = hbar omega / k_B T`.
///
/// Zero temperature is `x = +inf` and gives exactly zero.
pub fn thermal_occupation(hbar_omega_over_kt: f64) -> Result<f64> {
    let x = hbar_omega_over_kt;
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "hbar*omega/kT must be positive (negative temperatures are unsupported), got {x}"
        )));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(1.0 / x.exp_m1())
}

/// How the bath temperature is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Thermal {
    Zero,
    /// Occupations at the two dressed frequencies, given directly.
    Occupations { n1: f64, n2: f64 },
    /// `hbar Omega / k_B T` at the bare atomic frequency; the occupations are
    /// evaluated at the dressed frequencies `Omega_1` and `Omega_2`.
    TemperatureRatio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    pub omega_over_gamma: f64,
    pub chi: f64,
    pub n1: f64,
    pub n2: f64,
}

impl SystemParams {
    pub fn new(omega_over_gamma: f64, chi: f64, thermal: Thermal) -> Result<Self> {
        check_finite("omega_over_gamma", omega_over_gamma)?;
        check_finite("chi", chi)?;
        if omega_over_gamma <= 0.0 {
            return Err(Error::Domain(format!(
                "omega_over_gamma must be positive, got {omega_over_gamma}"
            )));
        }
        if chi <= 0.0 {
            return Err(Error::Domain(format!("chi must be positive, got {chi}")));
        }
        let (n1, n2) = match thermal {
            Thermal::Zero => (0.0, 0.0),
            Thermal::Occupations { n1, n2 } => (n1, n2),
            Thermal::TemperatureRatio(x) => {
                let g = coupling_g(chi)?;
                let r1 = (omega_over_gamma - g) / omega_over_gamma;
                let r2 = (omega_over_gamma + g) / omega_over_gamma;
                if r1 <= 0.0 {
                    return Err(Error::Regime(format!(
                        "g = {g} >= Omega = {omega_over_gamma}: Omega_1 is not positive"
                    )));
                }
                (thermal_occupation(x * r1)?, thermal_occupation(x * r2)?)
            }
        };
        for (name, n) in [("n1", n1), ("n2", n2)] {
            check_finite(name, n)?;
            if n < 0.0 {
                return Err(Error::Domain(format!("{name} must be non-negative, got {n}")));
            }
        }
        Ok(Self {
            omega_over_gamma,
            chi,
            n1,
            n2,
        })
    }

    pub fn zero_temperature(omega_over_gamma: f64, chi: f64) -> Result<Self> {
        Self::new(omega_over_gamma, chi, Thermal::Zero)
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.n1 == 0.0 && self.n2 == 0.0
    }
}

/// Dressed frequencies and the four dressed-state decay rates, all in units
/// of the single-atom decay rate.
///
/// `gamma1_*` belong to transitions at `omega1`, `gamma2_*` to transitions at
/// `omega2`; the `minus` rates connect to the antisymmetric state `|1>` and
/// the `plus` rates to the symmetric state `|2>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSet {
    pub omega: f64,
    pub g: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub gamma1_plus: f64,
    pub gamma1_minus: f64,
    pub gamma2_plus: f64,
    pub gamma2_minus: f64,
}

impl RateSet {
    /// Dressed-state energies `[0, Omega_1, Omega_2, Omega_3]`.
    pub fn energies(&self) -> [f64; 4] {
        [0.0, self.omega1, self.omega2, self.omega3]
    }

    pub fn rates(&self) -> [f64; 4] {
        [
            self.gamma1_plus,
            self.gamma1_minus,
            self.gamma2_plus,
            self.gamma2_minus,
        ]
    }

    /// Same frequencies with every decay rate replaced.
    pub fn with_rates(&self, g1p: f64, g1m: f64, g2p: f64, g2m: f64) -> Self {
        Self {
            gamma1_plus: g1p,
            gamma1_minus: g1m,
            gamma2_plus: g2p,
            gamma2_minus: g2m,
            ..*self
        }
    }
}

fn clamp_rate(name: &str, r: f64) -> Result<f64> {
    if r >= 0.0 {
        Ok(r)
    } else if r > -RATE_NOISE {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("{name} = {r} is negative")))
    }
}

pub fn dressed_rates(params: &SystemParams) -> Result<RateSet> {
    let omega = params.omega_over_gamma;
    let chi = params.chi;
    let g = coupling_g(chi)?;
    let omega1 = omega - g;
    let omega2 = omega + g;
    if omega1 <= 0.0 {
        return Err(Error::Regime(format!(
            "g/Omega = {} >= 1 at chi = {chi}: the lower dressed frequency is not positive",
            g / omega
        )));
    }
    let branch = |omega_i: f64, sign: f64, name: &str| -> Result<f64> {
        let ratio = omega_i / omega;
        let x = chi * ratio;
        let bracket = if sign < 0.0 {
            one_minus_parallel(x)?
        } else {
            1.0 + geometry_factor_parallel(x)?
        };
        clamp_rate(name, ratio.powi(3) * bracket)
    };
    Ok(RateSet {
        omega,
        g,
        omega1,
        omega2,
        omega3: omega1 + omega2,
        gamma1_plus: branch(omega1, 1.0, "gamma1_plus")?,
        gamma1_minus: branch(omega1, -1.0, "gamma1_minus")?,
        gamma2_plus: branch(omega2, 1.0, "gamma2_plus")?,
        gamma2_minus: branch(omega2, -1.0, "gamma2_minus")?,
    })
}

/// Small-chi estimate `(1 + g/Omega)^5 chi^2 / 5` of `gamma2_minus`.
pub fn gamma2_minus_small_chi(omega_over_gamma: f64, chi: f64) -> Result<f64> {
    let a = coupling_g(chi)? / omega_over_gamma;
    Ok((1.0 + a).powi(5) * chi * chi / 5.0)
}

/// The interval of `chi` in which the fast (`plus`) and slow (`minus`) decay
/// channels are well separated and the secular approximation holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub omega_over_gamma: f64,
    /// Minimiser of `gamma2_minus(chi)`.
    pub chi_lo: f64,
    /// Crossing of `gamma2_minus(chi)` with `g/Omega`.
    pub chi_hi: f64,
    /// `g/Omega` at `chi_lo`, the largest value inside the window.
    pub g_over_omega: f64,
    pub rwa_ok: bool,
    /// `(30 / Omega)^(1/5)`.
    pub candidate_30_fifth: f64,
    /// `(39 / Omega)^(1/3)`.
    pub candidate_39_third: f64,
    /// `(39 / Omega)^(1/5)`.
    pub candidate_39_fifth: f64,
    pub warnings: Vec<String>,
}

impl ValidityReport {
    /// Arithmetic mean of the window edges.
    pub fn chi_mid(&self) -> f64 {
        0.5 * (self.chi_lo + self.chi_hi)
    }

    pub fn contains(&self, chi: f64) -> bool {
        self.rwa_ok && chi >= self.chi_lo && chi <= self.chi_hi
    }
}

const WINDOW_CHI_MAX: f64 = 10.0;
const WINDOW_GRID: usize = 4000;

/// Locate the separated-timescale window numerically.
///
/// Never fails: if no window exists `rwa_ok` is false and `warnings` says why.
pub fn validity_window(omega_over_gamma: f64) -> ValidityReport {
    let omega = omega_over_gamma;
    let mut report = ValidityReport {
        omega_over_gamma: omega,
        chi_lo: f64::NAN,
        chi_hi: f64::NAN,
        g_over_omega: f64::NAN,
        rwa_ok: false,
        candidate_30_fifth: (30.0 / omega).powf(0.2),
        candidate_39_third: (39.0 / omega).cbrt(),
        candidate_39_fifth: (39.0 / omega).powf(0.2),
        warnings: Vec::new(),
    };
    if !(omega.is_finite() && omega > 0.0) {
        report
            .warnings
            .push(format!("omega_over_gamma = {omega} is not a positive number"));
        return report;
    }
    if omega < 1e3 {
        report.warnings.push(format!(
            "omega_over_gamma = {omega} is not much larger than one; the secular approximation is doubtful"
        ));
    }

    // g/Omega = 1 at chi_min; below it the lower dressed frequency is negative.
    let chi_min = (6.0 / omega).cbrt() * (1.0 + 1e-9);
    if chi_min >= WINDOW_CHI_MAX {
        report
            .warnings
            .push("no admissible chi below the search limit".to_string());
        return report;
    }
    let g2m = |chi: f64| -> f64 {
        SystemParams::zero_temperature(omega, chi)
            .and_then(|p| dressed_rates(&p))
            .map(|r| r.gamma2_minus)
            .unwrap_or(f64::INFINITY)
    };
    let g_over_omega = |chi: f64| 6.0 / (omega * chi.powi(3));

    let (l0, l1) = (chi_min.ln(), WINDOW_CHI_MAX.ln());
    let grid: Vec<f64> = (0..WINDOW_GRID)
        .map(|k| (l0 + (l1 - l0) * k as f64 / (WINDOW_GRID - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&c| g2m(c)).collect();
    let k_min = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    if k_min == 0 || k_min == WINDOW_GRID - 1 {
        report.warnings.push(
            "gamma2_minus has no interior minimum in the search bracket".to_string(),
        );
        return report;
    }
    let chi_lo = golden_section_min(|l| g2m(l.exp()), grid[k_min - 1].ln(), grid[k_min + 1].ln())
        .exp();

    let excess = |chi: f64| g2m(chi) - g_over_omega(chi);
    let start = grid.partition_point(|&c| c <= chi_lo);
    let bracket = (start.max(1)..WINDOW_GRID)
        .find(|&k| excess(grid[k - 1]) < 0.0 && excess(grid[k]) >= 0.0)
        .map(|k| (grid[k - 1].max(chi_lo), grid[k]));
    let Some((a, b)) = bracket else {
        report.chi_lo = chi_lo;
        report.warnings.push(
            "gamma2_minus never crosses g/Omega above its minimum; no separated window"
                .to_string(),
        );
        return report;
    };
    let chi_hi = bisect(excess, a, b);

    report.chi_lo = chi_lo;
    report.chi_hi = chi_hi;
    report.g_over_omega = g_over_omega(chi_lo);
    report.rwa_ok = chi_lo < chi_hi && report.g_over_omega < 1.0;
    if !report.rwa_ok {
        report
            .warnings
            .push("window is empty or g/Omega reaches one inside it".to_string());
    }
    report
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Root of `f` in `[a, b]` given `f(a) < 0 <= f(b)`.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
