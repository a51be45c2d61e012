//! Command-line front end: fit a model from a CSV file and write its
//! confidence band, or run the Monte Carlo coverage harness.

pub mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;
use tikhonov_bands::{
    build_band, deconv_fit, deconv_residuals, dkw_band, funreg_fit, funreg_residuals, npiv_fit,
    npiv_residuals, preset, run_coverage, BandMethod, BandRequest, DeconvData, Grid, KernelSpec,
    McConfig, NoiseDensity, ProcessIndex,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{source} ({path})")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("too few rows: {0} (need at least 2)")]
    TooFewRows(usize),

    #[error("unknown preset {0:?} (available: fig1a, fig1b, fig2a, fig2b)")]
    UnknownPreset(String),

    #[error("invalid noise spec {0:?} (use epanechnikov:<scale> or table:<path>)")]
    InvalidNoiseSpec(String),

    #[error(transparent)]
    Core(#[from] tikhonov_bands::Error),
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("must be positive".into())
    }
}

fn alpha_value(s: &str) -> Result<f64, String> {
    positive_f64(s).map_err(|_| "alpha must be positive".to_string())
}

fn bandwidth_value(s: &str) -> Result<f64, String> {
    positive_f64(s).map_err(|_| "h must be positive".to_string())
}

fn gamma_value(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err("gamma must lie in (0, 1)".into())
    }
}

fn bounds_value(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("{s:?} is not of the form a,b"));
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| format!("{:?} is not a number", parts[0]))?;
    let b: f64 = parts[1].trim().parse().map_err(|_| format!("{:?} is not a number", parts[1]))?;
    if a < b {
        Ok((a, b))
    } else {
        Err("bounds must satisfy a < b".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Gauss,
    Concentration,
}

impl From<MethodArg> for BandMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Gauss => BandMethod::Gauss,
            MethodArg::Concentration => BandMethod::Concentration,
        }
    }
}

fn process_value(s: &str) -> Result<ProcessIndex, String> {
    match s {
        "1" => Ok(ProcessIndex::One),
        "2" => Ok(ProcessIndex::Two),
        _ => Err("process must be 1 or 2".into()),
    }
}

/// Band options shared by the model-fitting subcommands.
#[derive(Debug, Clone, Args)]
pub struct BandArgs {
    /// Miscoverage level of the band
    #[arg(long, default_value = "0.05", value_parser = gamma_value, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Band construction method
    #[arg(long, value_enum, default_value = "gauss")]
    pub method: MethodArg,
    /// Additive slack constant in the half-width numerator
    #[arg(long, default_value = "0", allow_negative_numbers = true)]
    pub c0: f64,
    /// Simulated Gaussian paths for the quantile
    #[arg(long, default_value = "2000")]
    pub draws: usize,
    /// Seed for the Gaussian draws and the Rademacher signs
    #[arg(long, default_value = "0")]
    pub seed: u64,
}

impl BandArgs {
    fn request(&self, method: BandMethod, process: ProcessIndex) -> BandRequest {
        BandRequest {
            method,
            process,
            gamma: self.gamma,
            c0: self.c0,
            gauss_draws: self.draws,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tikhonov-bands",
    about = "Tikhonov-regularized fits for ill-posed models with uniform confidence bands",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Instrumental regression from a y,z,w CSV
    Npiv {
        /// Input CSV with header y,z,w
        #[arg(long)]
        input: PathBuf,
        /// Band CSV output path (metadata goes to `<out>.meta.json`)
        #[arg(long)]
        out: PathBuf,
        /// Regularization parameter
        #[arg(long, value_parser = alpha_value, allow_negative_numbers = true)]
        alpha: f64,
        /// Kernel bandwidth
        #[arg(long = "h", value_parser = bandwidth_value, allow_negative_numbers = true)]
        h: f64,
        /// Variance process the band is built from
        #[arg(long, default_value = "1", value_parser = process_value)]
        process: ProcessIndex,
        /// Grid points per axis
        #[arg(long = "grid", default_value = "100")]
        grid_m: usize,
        /// Half-width of the evaluation box; observations outside are dropped
        #[arg(long, default_value = "1", value_parser = positive_f64)]
        truncation: f64,
        #[command(flatten)]
        band: BandArgs,
    },

    /// Functional linear/IV regression from a wide y,z_1..,w_1.. CSV
    Funreg {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = alpha_value, allow_negative_numbers = true)]
        alpha: f64,
        /// Domain of the regressor curves as a,b
        #[arg(long = "t-bounds", default_value = "0,1", value_parser = bounds_value, allow_hyphen_values = true)]
        t_bounds: (f64, f64),
        /// Domain of the instrument curves as a,b
        #[arg(long = "s-bounds", default_value = "0,1", value_parser = bounds_value, allow_hyphen_values = true)]
        s_bounds: (f64, f64),
        #[command(flatten)]
        band: BandArgs,
    },

    /// Density deconvolution from a single-column y CSV with known noise
    Deconv {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = alpha_value, allow_negative_numbers = true)]
        alpha: f64,
        /// Noise density: `epanechnikov:<scale>` or `table:<csv with u,f>`
        #[arg(long, default_value = "epanechnikov:1")]
        noise: String,
        /// Evaluation interval as a,b (default: data range widened by the
        /// noise support)
        #[arg(long = "z-bounds", value_parser = bounds_value, allow_hyphen_values = true)]
        z_bounds: Option<(f64, f64)>,
        #[arg(long = "grid", default_value = "100")]
        grid_m: usize,
        #[command(flatten)]
        band: BandArgs,
    },

    /// Monte Carlo coverage experiment for the simulated design
    Mc {
        /// Report JSON output path
        #[arg(long)]
        out: PathBuf,
        /// Named tuning configuration (fig1a, fig1b, fig2a, fig2b)
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "reps")]
        replications: Option<usize>,
        #[arg(long, value_parser = alpha_value, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long = "h", value_parser = bandwidth_value, allow_negative_numbers = true)]
        h: Option<f64>,
        #[arg(long, value_parser = gamma_value, allow_negative_numbers = true)]
        gamma: Option<f64>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long, value_parser = process_value)]
        process: Option<ProcessIndex>,
        #[arg(long = "grid")]
        grid_m: Option<usize>,
        #[arg(long, value_parser = positive_f64)]
        truncation: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },

    /// Distribution-function band from a single-column x CSV
    Dkw {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "0.05", value_parser = gamma_value, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long = "grid", default_value = "100")]
        grid_m: usize,
    },
}

fn parse_noise(spec: &str) -> Result<NoiseDensity, CliError> {
    let (kind, value) = spec
        .split_once(':')
        .ok_or_else(|| CliError::InvalidNoiseSpec(spec.into()))?;
    match kind {
        "epanechnikov" => {
            let scale: f64 = value
                .parse()
                .map_err(|_| CliError::InvalidNoiseSpec(spec.into()))?;
            let density = NoiseDensity::Epanechnikov { scale };
            density.validate()?;
            Ok(density)
        }
        "table" => io::load_density_csv(std::path::Path::new(value)),
        _ => Err(CliError::InvalidNoiseSpec(spec.into())),
    }
}

/// Flag-level overrides applied on top of a preset (or the default
/// configuration) to form a Monte Carlo run.
#[derive(Debug, Clone, Default)]
pub struct McOverrides {
    pub n: Option<usize>,
    pub replications: Option<usize>,
    pub alpha: Option<f64>,
    pub h: Option<f64>,
    pub gamma: Option<f64>,
    pub method: Option<BandMethod>,
    pub process: Option<ProcessIndex>,
    pub grid_m: Option<usize>,
    pub truncation: Option<f64>,
    pub seed: Option<u64>,
}

/// Resolve the Monte Carlo configuration from a preset plus overrides.
pub fn resolve_mc_config(
    preset_name: Option<&str>,
    over: McOverrides,
) -> Result<McConfig, CliError> {
    let base = match preset_name {
        Some(name) => preset(name).ok_or_else(|| CliError::UnknownPreset(name.into()))?,
        None => McConfig {
            n: 1000,
            replications: 200,
            alpha: 0.14,
            h: 1.0,
            gamma: 0.05,
            method: BandMethod::Gauss,
            process_index: ProcessIndex::One,
            grid_m: 100,
            truncation: 1.0,
            master_seed: 0,
        },
    };
    Ok(McConfig {
        n: over.n.unwrap_or(base.n),
        replications: over.replications.unwrap_or(base.replications),
        alpha: over.alpha.unwrap_or(base.alpha),
        h: over.h.unwrap_or(base.h),
        gamma: over.gamma.unwrap_or(base.gamma),
        method: over.method.unwrap_or(base.method),
        process_index: over.process.unwrap_or(base.process_index),
        grid_m: over.grid_m.unwrap_or(base.grid_m),
        truncation: over.truncation.unwrap_or(base.truncation),
        master_seed: over.seed.unwrap_or(base.master_seed),
    })
}

/// Run one parsed command, returning the summary line to print on success.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Npiv { input, out, alpha, h, process, grid_m, truncation, band } => {
            let data = io::load_npiv_csv(&input)?;
            let grid = Grid::uniform(-truncation, truncation, grid_m)?;
            let fit = npiv_fit(&data, alpha, h, &grid, &grid, KernelSpec::Epanechnikov)?;
            let res = npiv_residuals(&fit, process, KernelSpec::Epanechnikov)?;
            let req = band.request(band.method.into(), process);
            let cb = build_band(&fit, &res, &req)?;
            io::write_band_csv(&cb, &out)?;
            Ok(format!(
                "wrote {} (half-width {:.6}, n = {})",
                out.display(),
                cb.half_width,
                cb.diagnostics.n
            ))
        }

        Command::Funreg { input, out, alpha, t_bounds, s_bounds, band } => {
            let data = io::load_funreg_csv(&input, t_bounds, s_bounds)?;
            let fit = funreg_fit(&data, alpha)?;
            let res = funreg_residuals(&fit, &data)?;
            let req = band.request(band.method.into(), ProcessIndex::One);
            let cb = build_band(&fit, &res, &req)?;
            io::write_band_csv(&cb, &out)?;
            Ok(format!(
                "wrote {} (half-width {:.6}, n = {})",
                out.display(),
                cb.half_width,
                cb.diagnostics.n
            ))
        }

        Command::Deconv { input, out, alpha, noise, z_bounds, grid_m, band } => {
            let y = io::load_column_csv(&input, "y")?;
            let density = parse_noise(&noise)?;
            let (lo, hi) = match z_bounds {
                Some(b) => b,
                None => {
                    let (supp_lo, supp_hi) = density.support();
                    let min = y.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    (min - supp_hi, max - supp_lo)
                }
            };
            let grid = Grid::uniform(lo, hi, grid_m)?;
            let data = DeconvData::new(y, density, grid)?;
            let fit = deconv_fit(&data, alpha)?;
            let res = deconv_residuals(&data)?;
            let req = band.request(band.method.into(), ProcessIndex::Two);
            let cb = build_band(&fit, &res, &req)?;
            io::write_band_csv(&cb, &out)?;
            Ok(format!(
                "wrote {} (half-width {:.6}, n = {})",
                out.display(),
                cb.half_width,
                cb.diagnostics.n
            ))
        }

        Command::Mc {
            out,
            preset,
            n,
            replications,
            alpha,
            h,
            gamma,
            method,
            process,
            grid_m,
            truncation,
            seed,
        } => {
            let config = resolve_mc_config(
                preset.as_deref(),
                McOverrides {
                    n,
                    replications,
                    alpha,
                    h,
                    gamma,
                    method: method.map(Into::into),
                    process,
                    grid_m,
                    truncation,
                    seed,
                },
            )?;
            let report = run_coverage(&config)?;
            io::write(&out, &format!("{}\n", report.to_json()))?;
            Ok(format!(
                "wrote {} (coverage {:.3}, mean half-width {:.4}, {} replications)",
                out.display(),
                report.coverage,
                report.mean_half_width,
                report.replications_used
            ))
        }

        Command::Dkw { input, out, gamma, grid_m } => {
            let x = io::load_column_csv(&input, "x")?;
            let min = x.iter().copied().fold(f64::INFINITY, f64::min);
            let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if min >= max {
                return Err(CliError::Core(tikhonov_bands::Error::DegenerateSample(
                    "all sample values identical".into(),
                )));
            }
            let grid = Grid::uniform(min, max, grid_m)?;
            let band = dkw_band(&x, gamma, &grid)?;
            io::write_ecdf_csv(&band, &out)?;
            Ok(format!(
                "wrote {} (half-width {:.6}, n = {})",
                out.display(),
                band.half_width,
                band.n
            ))
        }
    }
}
