use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use dressed_core::entanglement::{computational_to_dressed, product_state};
use dressed_core::linalg::{Basis, DensityMatrix, Op4};
use dressed_core::params::{validity_window, Thermal};
use dressed_core::C64;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    RatesSweep,
    Evolve,
    Eigensystem,
    SteadyState,
    Concurrence,
    Validate,
    ComparePheno,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Analytic,
    Numeric,
    Both,
}

impl Engine {
    pub fn analytic(self) -> bool {
        self != Engine::Numeric
    }

    pub fn numeric(self) -> bool {
        self != Engine::Analytic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Dressed-state master equation for two dipole-coupled atoms.
///
/// Every flag may also be given in a `--config` file as `key = value`, with
/// the flag name as key; flags on the command line win.
#[derive(Debug, Default, Parser)]
#[command(name = "dressed", version, allow_negative_numbers = true)]
pub struct Args {
    #[arg(long, value_enum)]
    pub command: Option<Command>,
    /// Atomic frequency in units of the single-atom decay rate.
    #[arg(long)]
    pub omega_over_gamma: Option<f64>,
    /// Dimensionless separation; defaults to the validity-window midpoint.
    #[arg(long, conflicts_with = "chi_range")]
    pub chi: Option<f64>,
    /// Log-spaced separation sweep `lo:hi:count`.
    #[arg(long)]
    pub chi_range: Option<String>,
    /// Bath occupation at the lower dressed frequency.
    #[arg(long)]
    pub n1: Option<f64>,
    /// Bath occupation at the upper dressed frequency.
    #[arg(long)]
    pub n2: Option<f64>,
    /// `hbar Omega / k_B T`; sets both occupations.
    #[arg(long, conflicts_with_all = ["n1", "n2"])]
    pub temp_ratio: Option<f64>,
    /// ket-eg, ket-ge, ket-ee, ket-gg, ket-0..ket-3, diagonal:p0,p1,p2,p3 or file:PATH.
    #[arg(long)]
    pub initial: Option<String>,
    /// First nonzero time of a log grid.
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_points: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write a gnuplot script for the CSV output.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub tolerance_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChiSpec {
    Single(f64),
    Range { lo: f64, hi: f64, count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub omega_over_gamma: f64,
    pub chi: Option<ChiSpec>,
    pub thermal: Thermal,
    pub initial: DensityMatrix,
    pub initial_label: String,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_points: usize,
    pub engine: Engine,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub gnuplot: Option<PathBuf>,
    pub tolerance_scale: f64,
}

pub const DEFAULT_OMEGA: f64 = 1e5;
pub const DEFAULT_T_POINTS: usize = 200;

const KEYS: [&str; 16] = [
    "command",
    "omega-over-gamma",
    "chi",
    "chi-range",
    "n1",
    "n2",
    "temp-ratio",
    "initial",
    "t-min",
    "t-max",
    "t-points",
    "engine",
    "format",
    "output",
    "gnuplot",
    "tolerance-scale",
];

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::usage(format!("config line {}: unknown key '{key}'", lineno + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::usage(format!("config line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::usage(format!("{key}: cannot parse '{s}'")))
}

fn parse_enum<T: ValueEnum>(key: &str, s: &str) -> Result<T, CliError> {
    T::from_str(s.trim(), true).map_err(|_| CliError::usage(format!("{key}: unknown value '{s}'")))
}

/// Fills every flag left unset on the command line from the config file.
pub fn merge(mut args: Args, file: &BTreeMap<String, String>) -> Result<Args, CliError> {
    fn fill<T>(slot: &mut Option<T>, file: &BTreeMap<String, String>, key: &str, parse: impl Fn(&str, &str) -> Result<T, CliError>) -> Result<(), CliError> {
        if slot.is_none() {
            if let Some(v) = file.get(key) {
                *slot = Some(parse(key, v)?);
            }
        }
        Ok(())
    }
    let path = |_: &str, s: &str| Ok(PathBuf::from(s));
    let text = |_: &str, s: &str| Ok(s.to_string());

    fill(&mut args.command, file, "command", parse_enum)?;
    fill(&mut args.omega_over_gamma, file, "omega-over-gamma", parse_num)?;
    // The separation and the temperature are each one setting: a flag for
    // either form overrides both forms in the file.
    if args.chi.is_none() && args.chi_range.is_none() {
        fill(&mut args.chi, file, "chi", parse_num)?;
        fill(&mut args.chi_range, file, "chi-range", text)?;
    }
    if args.n1.is_none() && args.n2.is_none() && args.temp_ratio.is_none() {
        fill(&mut args.n1, file, "n1", parse_num)?;
        fill(&mut args.n2, file, "n2", parse_num)?;
        fill(&mut args.temp_ratio, file, "temp-ratio", parse_num)?;
    }
    fill(&mut args.initial, file, "initial", text)?;
    fill(&mut args.t_min, file, "t-min", parse_num)?;
    fill(&mut args.t_max, file, "t-max", parse_num)?;
    fill(&mut args.t_points, file, "t-points", parse_num)?;
    fill(&mut args.engine, file, "engine", parse_enum)?;
    fill(&mut args.format, file, "format", parse_enum)?;
    fill(&mut args.output, file, "output", path)?;
    fill(&mut args.gnuplot, file, "gnuplot", path)?;
    fill(&mut args.tolerance_scale, file, "tolerance-scale", parse_num)?;
    Ok(args)
}

pub fn parse_chi_range(s: &str) -> Result<ChiSpec, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!("chi-range must be lo:hi:count, got '{s}'")));
    }
    let lo: f64 = parse_num("chi-range", parts[0])?;
    let hi: f64 = parse_num("chi-range", parts[1])?;
    let count: usize = parse_num("chi-range", parts[2])?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err(CliError::usage(format!(
            "chi-range needs 0 < lo <= hi and count >= 1, got '{s}'"
        )));
    }
    Ok(ChiSpec::Range { lo, hi, count })
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect();
    v[0] = lo;
    v[count - 1] = hi;
    v
}

pub fn parse_initial(spec: &str) -> Result<DensityMatrix, CliError> {
    let basis_state = |j| Ok(DensityMatrix::basis_state(j, Basis::Dressed));
    let product = |j| product_state(j).map_err(CliError::from);
    match spec.trim() {
        "ket-gg" => product(0),
        "ket-ge" => product(1),
        "ket-eg" => product(2),
        "ket-ee" => product(3),
        "ket-0" => basis_state(0),
        "ket-1" => basis_state(1),
        "ket-2" => basis_state(2),
        "ket-3" => basis_state(3),
        s => {
            if let Some(rest) = s.strip_prefix("diagonal:") {
                parse_diagonal(rest)
            } else if let Some(path) = s.strip_prefix("file:") {
                read_state_file(Path::new(path))
            } else {
                Err(CliError::usage(format!("unknown initial state '{s}'")))
            }
        }
    }
}

fn parse_diagonal(s: &str) -> Result<DensityMatrix, CliError> {
    let values: Vec<f64> = s
        .split(',')
        .map(|p| parse_num("initial", p))
        .collect::<Result<_, _>>()?;
    if values.len() != 4 {
        return Err(CliError::usage(format!("diagonal initial state needs 4 values, got {}", values.len())));
    }
    if values.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(CliError::usage(format!("populations must be non-negative, got {values:?}")));
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(CliError::usage(format!("populations must sum to 1, got {sum}")));
    }
    let p = [values[0] / sum, values[1] / sum, values[2] / sum, values[3] / sum];
    Ok(DensityMatrix::diagonal(p, Basis::Dressed)?)
}

/// Four rows of four complex entries written as `re im` pairs, optionally
/// preceded by `basis = computational` (the default is dressed).
pub fn parse_state_text(text: &str) -> Result<DensityMatrix, CliError> {
    let mut basis = Basis::Dressed;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            if k.trim() != "basis" {
                return Err(CliError::usage(format!("state file: unknown key '{}'", k.trim())));
            }
            basis = match v.trim() {
                "dressed" => Basis::Dressed,
                "computational" => Basis::Computational,
                other => return Err(CliError::usage(format!("state file: unknown basis '{other}'"))),
            };
            continue;
        }
        rows.push(
            line.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| parse_num("state file", t))
                .collect::<Result<_, _>>()?,
        );
    }
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 8) {
        return Err(CliError::usage("state file needs 4 rows of 8 numbers (re im pairs)"));
    }
    let m = Op4::from_fn(|j, k| C64::new(rows[j][2 * k], rows[j][2 * k + 1]));
    let rho = DensityMatrix::new(m, basis)?;
    Ok(match basis {
        Basis::Dressed => rho,
        Basis::Computational => computational_to_dressed(&rho)?,
    })
}

fn read_state_file(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read state file {}: {e}", path.display())))?;
    parse_state_text(&text)
}

impl RunConfig {
    pub fn from_args(args: Args) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", p.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        let args = merge(args, &file)?;
        let command = args
            .command
            .ok_or_else(|| CliError::usage("no command given (use --command)"))?;

        let omega_over_gamma = args.omega_over_gamma.unwrap_or(DEFAULT_OMEGA);
        if !(omega_over_gamma > 0.0 && omega_over_gamma.is_finite()) {
            return Err(CliError::usage(format!("omega-over-gamma must be positive, got {omega_over_gamma}")));
        }
        let chi = match (args.chi, &args.chi_range) {
            (Some(_), Some(_)) => return Err(CliError::usage("give either chi or chi-range, not both")),
            (Some(c), None) => Some(ChiSpec::Single(c)),
            (None, Some(r)) => Some(parse_chi_range(r)?),
            (None, None) => None,
        };
        let thermal = match (args.n1, args.n2, args.temp_ratio) {
            (None, None, None) => Thermal::Zero,
            (_, _, Some(_)) if args.n1.is_some() || args.n2.is_some() => {
                return Err(CliError::usage("give either n1/n2 or temp-ratio, not both"))
            }
            (_, _, Some(x)) => Thermal::TemperatureRatio(x),
            (n1, n2, None) => Thermal::Occupations {
                n1: n1.unwrap_or(0.0),
                n2: n2.unwrap_or(0.0),
            },
        };
        let initial_label = args.initial.unwrap_or_else(|| "ket-eg".to_string());
        let initial = parse_initial(&initial_label)?;
        let t_points = args.t_points.unwrap_or(DEFAULT_T_POINTS);
        if t_points == 0 {
            return Err(CliError::usage("t-points must be at least 1"));
        }
        for (name, v) in [("t-min", args.t_min), ("t-max", args.t_max)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(CliError::usage(format!("{name} must be finite and non-negative, got {v}")));
                }
            }
        }
        let format = args.format.unwrap_or(if command == Command::Validate {
            Format::Json
        } else {
            Format::Csv
        });
        if args.gnuplot.is_some() && (format != Format::Csv || args.output.is_none()) {
            return Err(CliError::usage("gnuplot script needs CSV output written to --output"));
        }
        let tolerance_scale = args.tolerance_scale.unwrap_or(1.0);
        if !(tolerance_scale >= 0.0 && tolerance_scale.is_finite()) {
            return Err(CliError::usage(format!("tolerance-scale must be non-negative, got {tolerance_scale}")));
        }
        Ok(Self {
            command,
            omega_over_gamma,
            chi,
            thermal,
            initial,
            initial_label,
            t_min: args.t_min,
            t_max: args.t_max,
            t_points,
            engine: args.engine.unwrap_or(Engine::Both),
            format,
            output: args.output,
            gnuplot: args.gnuplot,
            tolerance_scale,
        })
    }

    /// The single separation for trajectory-type commands.
    pub fn single_chi(&self) -> Result<f64, CliError> {
        match self.chi {
            Some(ChiSpec::Single(c)) => Ok(c),
            Some(ChiSpec::Range { .. }) => Err(CliError::usage("chi-range is only valid for rates-sweep")),
            None => {
                let w = validity_window(self.omega_over_gamma);
                if w.chi_mid().is_finite() {
                    Ok(w.chi_mid())
                } else {
                    Err(CliError::usage(format!(
                        "no validity window at omega-over-gamma = {}; give --chi",
                        self.omega_over_gamma
                    )))
                }
            }
        }
    }

    pub fn chi_values(&self) -> Vec<f64> {
        match self.chi {
            Some(ChiSpec::Single(c)) => vec![c],
            Some(ChiSpec::Range { lo, hi, count }) => log_space(lo, hi, count),
            None => log_space(1e-2, 10.0, DEFAULT_T_POINTS),
        }
    }
}

/// Time grid starting at zero: log-spaced from `t_min` when `t_max / t_min`
/// exceeds three decades, linear otherwise.
pub fn time_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![0.0];
    }
    if t_max == 0.0 {
        return vec![0.0; points];
    }
    if t_min > 0.0 && t_max / t_min > 1e3 {
        let mut grid = vec![0.0];
        grid.extend(log_space(t_min, t_max, points - 1));
        grid
    } else {
        (0..points)
            .map(|k| t_max * k as f64 / (points - 1) as f64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let m = parse_config_text("# comment\ncommand = evolve\nomega_over_gamma = 1e4 # trailing\n\nn1=0.1\n").unwrap();
        assert_eq!(m["command"], "evolve");
        assert_eq!(m["omega-over-gamma"], "1e4");
        assert_eq!(m["n1"], "0.1");
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("chi 1").is_err());
        assert!(parse_config_text("chi = 1\nchi = 2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_text("command = evolve\nchi-range = 0.1:1:5\nn1 = 0.2\nt-points = 7").unwrap();
        let args = Args {
            chi: Some(0.5),
            temp_ratio: Some(3.0),
            ..Default::default()
        };
        let merged = merge(args, &file).unwrap();
        assert_eq!(merged.command, Some(Command::Evolve));
        assert_eq!(merged.chi, Some(0.5));
        assert_eq!(merged.chi_range, None);
        assert_eq!(merged.n1, None);
        assert_eq!(merged.temp_ratio, Some(3.0));
        assert_eq!(merged.t_points, Some(7));
    }

    #[test]
    fn chi_range_and_log_space() {
        assert_eq!(parse_chi_range("0.01:10:200").unwrap(), ChiSpec::Range { lo: 0.01, hi: 10.0, count: 200 });
        for bad in ["1:2", "0:1:3", "2:1:3", "1:2:0", "a:b:c"] {
            assert!(parse_chi_range(bad).is_err(), "{bad}");
        }
        let v = log_space(0.01, 10.0, 4);
        assert_eq!(v[0], 0.01);
        assert_eq!(v[3], 10.0);
        assert!((v[1] - 0.1).abs() < 1e-15);
        assert_eq!(log_space(2.0, 3.0, 1), vec![2.0]);
    }

    #[test]
    fn grids() {
        assert_eq!(time_grid(1e-3, 2.0, 1), vec![0.0]);
        assert_eq!(time_grid(0.1, 2.0, 3), vec![0.0, 1.0, 2.0]);
        let g = time_grid(1e-3, 10.0, 5);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 1e-3);
        assert_eq!(g[4], 10.0);
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn initial_states() {
        let eg = parse_initial("ket-eg").unwrap();
        assert!((eg.get(1, 1).re - 0.5).abs() < 1e-15);
        assert!((eg.get(1, 2).re + 0.5).abs() < 1e-15);
        assert_eq!(parse_initial("ket-1").unwrap().get(1, 1).re, 1.0);
        let d = parse_initial("diagonal:0.1,0.2,0.3,0.4").unwrap();
        assert_eq!(d.populations(), [0.1, 0.2, 0.3, 0.4]);
        assert!(parse_initial("diagonal:0.5,0.5,0.5,0").is_err());
        assert!(parse_initial("diagonal:1,0,0").is_err());
        assert!(parse_initial("diagonal:1.5,-0.5,0,0").is_err());
        assert!(parse_initial("ket-x").is_err());
    }

    #[test]
    fn state_text() {
        let text = "basis = computational\n0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0\n0 0 0 0 1 0 0 0\n0 0 0 0 0 0 0 0\n";
        let rho = parse_state_text(text).unwrap();
        assert!(rho.max_abs_diff(&parse_initial("ket-eg").unwrap()) < 1e-15);
        assert!(parse_state_text("1 0 0 0").is_err());
        let not_psd = "1 0 0 0 0 0 0 0\n0 0 1 0 0 0 0 0\n0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0\n";
        assert!(parse_state_text(not_psd).is_err());
    }
}
