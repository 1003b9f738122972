use rayon::prelude::*;

use dressed_core::entanglement::{
    concurrence_excited_atom_zero_temperature, concurrence_general, concurrence_transient_steady,
    dressed_to_computational, product_state,
};
use dressed_core::linalg::{
    eigenvalues_dense, integrate_linear_ode, DensityMatrix, StateTolerances, Superoperator,
};
use dressed_core::liouville::{
    build_dressed_generator, build_phenomenological_generator, complex_frequencies, dressed_eigensystem,
    evolve_closed_form_zero_temperature, evolve_phenomenological_diagonal, reduced_generator_finite_temperature,
    reduced_null_vector, spectral_evolve, transient_steady_populations, TableOneCoefficients,
};
use dressed_core::params::{dressed_rates, validity_window, RateSet, SystemParams};
use dressed_core::validation::{run_all, CriterionResult, ValidationOptions};
use dressed_core::{Error, C64};

use crate::config::{time_grid, Command, RunConfig};
use crate::table::{Cell, Table};
use crate::CliError;

pub enum Output {
    Table(Table),
    Validation(Vec<CriterionResult>),
}

/// Emitted states must satisfy the propagators' own output tolerance.
const EMIT_TOLERANCE: f64 = 1e-8;

/// Largest analytic/numeric disagreement accepted silently with `--engine both`.
const ENGINE_AGREEMENT: f64 = 1e-6;

pub fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    Ok(match cfg.command {
        Command::RatesSweep => Output::Table(rates_sweep(cfg)?),
        Command::Evolve => Output::Table(evolve(cfg, true)?),
        Command::Concurrence => Output::Table(evolve(cfg, false)?),
        Command::Eigensystem => Output::Table(eigensystem(cfg)?),
        Command::SteadyState => Output::Table(steady_state(cfg)?),
        Command::ComparePheno => Output::Table(compare_pheno(cfg)?),
        Command::Validate => Output::Validation(run_all(&ValidationOptions {
            tolerance_scale: cfg.tolerance_scale,
        })),
    })
}

pub fn rates_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let omega = cfg.omega_over_gamma;
    let window = validity_window(omega);
    let chis = cfg.chi_values();
    let mut table = Table::new([
        "chi",
        "gamma1_plus",
        "gamma1_minus",
        "gamma2_plus",
        "gamma2_minus",
        "g_over_omega",
        "in_window",
        "warnings",
    ]);
    table.warnings.extend(window.warnings.iter().cloned());
    let rows: Vec<Vec<Cell>> = chis
        .par_iter()
        .map(|&chi| {
            let rates = SystemParams::zero_temperature(omega, chi).and_then(|p| dressed_rates(&p));
            let mut row = vec![Cell::Num(chi)];
            match rates {
                Ok(r) => {
                    row.extend(r.rates().map(Cell::Num));
                    row.push(Cell::Num(r.g / omega));
                    row.push(Cell::Bool(window.contains(chi)));
                    row.push(Cell::Empty);
                }
                Err(e) => {
                    row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
                    row.push(Cell::Bool(false));
                    row.push(Cell::Text(e.to_string()));
                }
            }
            row
        })
        .collect();
    table.rows = rows;
    Ok(table)
}

fn system(cfg: &RunConfig, chi: f64) -> Result<(SystemParams, RateSet), CliError> {
    let params = SystemParams::new(cfg.omega_over_gamma, chi, cfg.thermal)?;
    let rates = dressed_rates(&params)?;
    Ok((params, rates))
}

fn check_emitted(states: &[DensityMatrix], grid: &[f64], label: &str) -> Result<(), CliError> {
    let tol = StateTolerances::uniform(EMIT_TOLERANCE);
    for (rho, t) in states.iter().zip(grid) {
        if let Some(msg) = rho.violation(&tol) {
            return Err(CliError::failure(format!("{label} state invalid at t = {t}: {msg}")));
        }
    }
    Ok(())
}

fn numeric_trajectory(l: &Superoperator, rho0: &DensityMatrix, grid: &[f64]) -> Result<Vec<DensityMatrix>, CliError> {
    Ok(integrate_linear_ode(l, rho0, grid)?)
}

/// Analytic propagation: closed forms at zero temperature, spectral
/// propagation with the generator's eigensystem otherwise. Returns `None`
/// with a warning when the closed forms are degenerate.
fn analytic_trajectory(
    rates: &RateSet,
    params: &SystemParams,
    rho0: &DensityMatrix,
    grid: &[f64],
    warnings: &mut Vec<String>,
) -> Result<Option<Vec<DensityMatrix>>, CliError> {
    if params.is_zero_temperature() {
        match TableOneCoefficients::new(rates) {
            Ok(_) => {
                let zetas = complex_frequencies(rates);
                let states = grid
                    .par_iter()
                    .map(|&t| evolve_closed_form_zero_temperature(rho0, rates, &zetas, t))
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(Some(states));
            }
            Err(e @ Error::DegenerateSpectrum { .. }) => {
                warnings.push(format!("analytic engine unavailable ({e}); analytic columns use the numeric engine"));
                return Ok(None);
            }
            Err(e) => return Err(e.into()),
        }
    }
    warnings.push(
        "finite temperature: analytic engine propagates with the numeric eigensystem of the generator".into(),
    );
    let es = dressed_eigensystem(rates, params.n1, params.n2)?;
    let states = grid
        .par_iter()
        .map(|&t| spectral_evolve(&es, rho0, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(states))
}

fn concurrence_of(rho: &DensityMatrix) -> Result<f64, CliError> {
    Ok(concurrence_general(&dressed_to_computational(rho)?)?.value())
}

fn state_columns(prefix: &str) -> Vec<String> {
    let mut cols: Vec<String> = (0..4).map(|j| format!("{prefix}rho{j}{j}")).collect();
    for j in 0..4 {
        for k in j + 1..4 {
            cols.push(format!("{prefix}rho{j}{k}_re"));
            cols.push(format!("{prefix}rho{j}{k}_im"));
        }
    }
    cols.push(format!("{prefix}abs_rho12"));
    cols
}

fn state_cells(rho: &DensityMatrix) -> Vec<Cell> {
    let mut cells: Vec<Cell> = (0..4).map(|j| Cell::Num(rho.get(j, j).re)).collect();
    for j in 0..4 {
        for k in j + 1..4 {
            let z = rho.get(j, k);
            cells.push(Cell::Num(z.re));
            cells.push(Cell::Num(z.im));
        }
    }
    cells.push(Cell::Num(rho.get(1, 2).norm()));
    cells
}

fn default_t_min(rates: &RateSet) -> f64 {
    1e-3 / rates.gamma2_plus.max(rates.gamma1_plus)
}

/// Trajectory with density-matrix columns (`with_states`) or concurrence
/// columns only.
pub fn evolve(cfg: &RunConfig, with_states: bool) -> Result<Table, CliError> {
    let chi = cfg.single_chi()?;
    let (params, rates) = system(cfg, chi)?;
    let t_max = cfg.t_max.unwrap_or(5.0 / rates.gamma1_minus);
    let grid = time_grid(cfg.t_min.unwrap_or(default_t_min(&rates)), t_max, cfg.t_points);
    let rho0 = &cfg.initial;
    let mut warnings = Vec::new();

    let generator = build_dressed_generator(&rates, params.n1, params.n2)?;
    let (analytic, numeric) = rayon::join(
        || -> Result<_, CliError> {
            let mut w = Vec::new();
            let a = if cfg.engine.analytic() {
                analytic_trajectory(&rates, &params, rho0, &grid, &mut w)?
            } else {
                None
            };
            Ok((a, w))
        },
        || -> Result<_, CliError> {
            if cfg.engine.numeric() {
                Ok(Some(numeric_trajectory(&generator, rho0, &grid)?))
            } else {
                Ok(None)
            }
        },
    );
    let (analytic, analytic_warnings) = analytic?;
    let mut numeric = numeric?;
    warnings.extend(analytic_warnings);
    let analytic = match analytic {
        Some(a) => Some(a),
        None if cfg.engine.analytic() => {
            if numeric.is_none() {
                numeric = Some(numeric_trajectory(&generator, rho0, &grid)?);
            }
            numeric.clone()
        }
        None => None,
    };

    let mut engines: Vec<(&str, &Vec<DensityMatrix>)> = Vec::new();
    if let Some(a) = &analytic {
        engines.push(("analytic", a));
    }
    if let (true, Some(n)) = (cfg.engine.numeric(), &numeric) {
        engines.push(("numeric", n));
    }
    for (name, states) in &engines {
        check_emitted(states, &grid, name)?;
    }
    if let (Some(a), Some(n), true) = (&analytic, &numeric, engines.len() == 2) {
        let worst = a.iter().zip(n).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max);
        if worst > ENGINE_AGREEMENT {
            warnings.push(format!("analytic and numeric engines differ by up to {worst:.3e}"));
        }
    }

    let closed_form = params.is_zero_temperature() && rho0.max_abs_diff(&product_state(2)?) <= 1e-12;
    let plateau = if params.is_zero_temperature() {
        None
    } else {
        Some(concurrence_transient_steady(rho0.get(1, 1).re, params.n1, params.n2)?.value())
    };

    let mut columns = vec!["t".to_string()];
    for (name, _) in &engines {
        if with_states {
            columns.extend(state_columns(&format!("{name}_")));
        }
        columns.push(format!("{name}_concurrence"));
    }
    if closed_form {
        columns.push("concurrence_closed_form".into());
    }
    if plateau.is_some() {
        columns.push("concurrence_plateau".into());
    }
    let mut table = Table::new(columns);
    table.warnings = warnings;

    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &t)| -> Result<Vec<Cell>, CliError> {
            let mut row = vec![Cell::Num(t)];
            for (_, states) in &engines {
                if with_states {
                    row.extend(state_cells(&states[i]));
                }
                row.push(Cell::Num(concurrence_of(&states[i])?));
            }
            if closed_form {
                row.push(Cell::Num(concurrence_excited_atom_zero_temperature(&rates, t)?.value()));
            }
            if let Some(p) = plateau {
                row.push(Cell::Num(p));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    table.rows = rows;
    Ok(table)
}

fn sort_spectrum(v: &mut [C64]) {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
}

pub fn eigensystem(cfg: &RunConfig) -> Result<Table, CliError> {
    let chi = cfg.single_chi()?;
    let (params, rates) = system(cfg, chi)?;
    let mut warnings = Vec::new();
    let analytic = if cfg.engine.analytic() {
        if !params.is_zero_temperature() {
            warnings.push("finite temperature: population eigenvalues are computed numerically".into());
        } else if let Err(e) = TableOneCoefficients::new(&rates) {
            warnings.push(format!("closed forms unavailable ({e}); using the numeric eigensystem"));
        }
        let mut ev = dressed_eigensystem(&rates, params.n1, params.n2)?.eigenvalues();
        sort_spectrum(&mut ev);
        Some(ev)
    } else {
        None
    };
    let numeric = if cfg.engine.numeric() {
        let l = build_dressed_generator(&rates, params.n1, params.n2)?;
        let mut ev = eigenvalues_dense(l.matrix())?;
        match &analytic {
            // Order the numeric values to line up with their analytic partners.
            Some(reference) => {
                let mut ordered = Vec::with_capacity(ev.len());
                for a in reference {
                    let (idx, _) = ev
                        .iter()
                        .enumerate()
                        .map(|(i, n)| (i, (n - a).norm()))
                        .min_by(|x, y| x.1.total_cmp(&y.1))
                        .expect("non-empty spectrum");
                    ordered.push(ev.remove(idx));
                }
                ev = ordered;
            }
            None => sort_spectrum(&mut ev),
        }
        Some(ev)
    } else {
        None
    };

    let mut columns = vec!["index".to_string()];
    for (name, v) in [("analytic", &analytic), ("numeric", &numeric)] {
        if v.is_some() {
            columns.push(format!("{name}_re"));
            columns.push(format!("{name}_im"));
        }
    }
    let both = analytic.is_some() && numeric.is_some();
    if both {
        columns.push("abs_diff".into());
    }
    let mut table = Table::new(columns);
    table.warnings = warnings;
    for i in 0..16 {
        let mut row = vec![Cell::Num(i as f64)];
        for v in [&analytic, &numeric].into_iter().flatten() {
            row.push(Cell::Num(v[i].re));
            row.push(Cell::Num(v[i].im));
        }
        if let (Some(a), Some(n)) = (&analytic, &numeric) {
            row.push(Cell::Num((a[i] - n[i]).norm()));
        }
        table.push(row);
    }
    Ok(table)
}

pub fn steady_state(cfg: &RunConfig) -> Result<Table, CliError> {
    let chi = cfg.single_chi()?;
    let (params, rates) = system(cfg, chi)?;
    let (n1, n2) = (params.n1, params.n2);
    let closed = transient_steady_populations(n1, n2)?;
    let p11 = cfg.initial.get(1, 1).re;
    let mut columns = vec!["n1", "n2", "s", "rho00", "rho22", "rho33"];
    if cfg.engine.numeric() {
        columns.extend(["null_rho00", "null_rho22", "null_rho33"]);
    }
    columns.extend(["initial_rho11", "concurrence_plateau"]);
    let mut table = Table::new(columns);
    let mut row: Vec<Cell> = [n1, n2, 1.0 + n1 + 2.0 * n2 + 3.0 * n1 * n2, closed[0], closed[1], closed[2]]
        .map(Cell::Num)
        .to_vec();
    if cfg.engine.numeric() {
        let null = reduced_null_vector(&reduced_generator_finite_temperature(&rates, n1, n2)?)?;
        row.extend(null.iter().map(|&x| Cell::Num(x)));
    }
    row.push(Cell::Num(p11));
    row.push(Cell::Num(concurrence_transient_steady(p11, n1, n2)?.value()));
    table.push(row);
    Ok(table)
}

pub fn compare_pheno(cfg: &RunConfig) -> Result<Table, CliError> {
    let chi = cfg.single_chi()?;
    let (params, rates) = system(cfg, chi)?;
    let t_max = cfg.t_max.unwrap_or(5.0);
    let grid = time_grid(cfg.t_min.unwrap_or(1e-3), t_max, cfg.t_points);
    let rho0 = &cfg.initial;
    let mut warnings = Vec::new();

    let diagonal = (0..4).all(|j| (0..4).all(|k| j == k || rho0.get(j, k).norm() <= 1e-12));
    let closed_forms = cfg.engine.analytic() && params.is_zero_temperature() && diagonal;
    if cfg.engine.analytic() && !closed_forms {
        warnings.push(
            "closed forms need zero temperature and a dressed-diagonal initial state; using the numeric engine".into(),
        );
    }

    let dressed_l = build_dressed_generator(&rates, params.n1, params.n2)?;
    let mut dressed = if closed_forms {
        analytic_trajectory(&rates, &params, rho0, &grid, &mut warnings)?
    } else {
        None
    };
    if dressed.is_none() {
        dressed = Some(numeric_trajectory(&dressed_l, rho0, &grid)?);
    }
    let dressed = dressed.expect("set above");
    check_emitted(&dressed, &grid, "dressed")?;

    // Local-decay model: populations from its closed form, coherences only
    // from the numeric engine.
    let pheno: Vec<([f64; 4], Option<f64>)> = if closed_forms {
        grid.iter()
            .map(|&t| Ok((evolve_phenomenological_diagonal(rho0, t)?, Some(0.0))))
            .collect::<Result<_, Error>>()?
    } else {
        let l = build_phenomenological_generator(cfg.omega_over_gamma, rates.g, params.n1, params.n2)?;
        let states = numeric_trajectory(&l, rho0, &grid)?;
        check_emitted(&states, &grid, "phenomenological")?;
        states.iter().map(|s| (s.populations(), Some(s.get(1, 2).norm()))).collect()
    };

    let mut table = Table::new([
        "t",
        "dressed_rho00",
        "dressed_rho11",
        "dressed_rho22",
        "dressed_rho33",
        "pheno_rho00",
        "pheno_rho11",
        "pheno_rho22",
        "pheno_rho33",
        "max_abs_diff",
        "dressed_abs_rho12",
        "pheno_abs_rho12",
    ]);
    table.warnings = warnings;
    for ((t, rho), (p, coh)) in grid.iter().zip(&dressed).zip(&pheno) {
        let d = rho.populations();
        let diff = (0..4).map(|j| (d[j] - p[j]).abs()).fold(0.0, f64::max);
        let mut row = vec![Cell::Num(*t)];
        row.extend(d.map(Cell::Num));
        row.extend(p.map(Cell::Num));
        row.push(Cell::Num(diff));
        row.push(Cell::Num(rho.get(1, 2).norm()));
        row.push(coh.map_or(Cell::Empty, Cell::Num));
        table.push(row);
    }
    Ok(table)
}

pub fn validation_table(results: &[CriterionResult]) -> Table {
    let mut table = Table::new(["name", "pass", "residual", "tolerance"]);
    for r in results {
        table.push(vec![
            Cell::Text(r.name.clone()),
            Cell::Bool(r.pass),
            Cell::Num(r.residual),
            Cell::Num(r.tolerance),
        ]);
    }
    table
}
