use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "isochrone",
    version,
    about = "Characteristic-system analysis of non-strictly hyperbolic systems"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Read defaults from a key=value config file; flags given on the command
    /// line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one characteristic with its variational data.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Period as a function of the amplitude of the model's orbit family,
    /// with an isochronicity verdict.
    #[command(allow_negative_numbers = true)]
    PeriodMap(PeriodMapArgs),
    /// Monodromy matrix and Floquet multipliers of one periodic orbit.
    #[command(allow_negative_numbers = true)]
    Monodromy(MonodromyArgs),
    /// First zero of the gradient indicator along one characteristic.
    #[command(allow_negative_numbers = true)]
    Blowup(BlowupArgs),
    /// Sabatini's function of the model's Lienard reduction.
    #[command(allow_negative_numbers = true)]
    Sabatini(SabatiniArgs),
    /// Periods of the oscillator built from an involution.
    #[command(allow_negative_numbers = true)]
    Involution(InvolutionArgs),
    /// Snapshots of the characteristic fan seeded by an initial profile.
    #[command(allow_negative_numbers = true)]
    Field(FieldArgs),
    /// First crossing of neighbouring characteristics.
    #[command(allow_negative_numbers = true)]
    Crossing(CrossingArgs),
    /// Regenerate the CSV table of a JSON result file.
    Convert(ConvertArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Simulate(_) => "simulate",
            Self::PeriodMap(_) => "period-map",
            Self::Monodromy(_) => "monodromy",
            Self::Blowup(_) => "blowup",
            Self::Sabatini(_) => "sabatini",
            Self::Involution(_) => "involution",
            Self::Field(_) => "field",
            Self::Crossing(_) => "crossing",
            Self::Convert(_) => "convert",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Plasma,
    PlasmaCalibrated,
    Relativistic,
    RelativisticReduced,
    Hopf,
    Harmonic,
    Transformed,
    Involution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformKind {
    Identity,
    Swap,
    /// `(Z1 + Z2^2, Z2)`.
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InvolutionKind {
    /// `H(x) = -x`.
    Trivial,
    /// `H(x) = -x / (1 + a x)`.
    Mobius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    /// Last component `amplitude * exp(-x^2)`, others zero.
    Gaussian,
    /// Last component `amplitude`, others zero.
    Constant,
    /// Every component equal to `amplitude * x`.
    Linear,
    Zero,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Spatial dimension of the radial plasma models.
    #[arg(long)]
    pub d: Option<u32>,
    /// Calibration coefficient.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Constant background density of the relativistic models.
    #[arg(long)]
    pub c: Option<f64>,
    /// Use the candidate background K (M - 2K s^2) / (M + K s^2)^(5/2) with
    /// this K instead of a constant.
    #[arg(long)]
    pub doping_k: Option<f64>,
    #[arg(long)]
    pub doping_m: Option<f64>,
    /// Centre of the candidate background.
    #[arg(long, default_value_t = 0.0)]
    pub doping_x0: f64,
    /// Initial momentum of the reduced relativistic model.
    #[arg(long)]
    pub p0: Option<f64>,
    /// Initial field of the reduced relativistic model.
    #[arg(long)]
    pub e0: Option<f64>,
    /// Tabulation window of the reduced relativistic model, `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<Interval>,
    #[arg(long, value_enum)]
    pub transform: Option<TransformKind>,
    #[arg(long, value_enum)]
    pub involution: Option<InvolutionKind>,
    /// Parameter of the Mobius involution.
    #[arg(long)]
    pub a: Option<f64>,
    /// Frequency of the involution oscillator.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Interval on which the involution is defined, `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<Interval>,
}

#[derive(Debug, Clone, Args)]
pub struct IntegratorArgs {
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub h_init: Option<f64>,
    #[arg(long)]
    pub h_min: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Integration horizon (search horizon for periods, scan horizon for
    /// blow-up and crossings).
    #[arg(long)]
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; the format follows the extension (.csv, .json, .svg).
    /// Repeatable. Without it the JSON document goes to stdout.
    #[arg(long)]
    pub out: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct StartArgs {
    /// Initial position of the characteristic.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Initial state `Y(0)`, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<List>,
    /// Initial gradient `Y_x(0)`, comma separated; a single value is
    /// broadcast.
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<List>,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub profile: ProfileKind,
    #[arg(long, default_value_t = 0.2)]
    pub amplitude: f64,
    /// Seeding window `lo:hi`.
    #[arg(long, allow_hyphen_values = true, default_value = "-3:3")]
    pub seeds: Interval,
    /// Number of seeded characteristics.
    #[arg(long, default_value_t = 64)]
    pub nx: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Number of output samples on `[0, t_max]`.
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PeriodMapArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Amplitude grid `lo:hi:N`.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<Range>,
    /// Isochronicity tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol_iso: f64,
}

#[derive(Debug, Clone, Args)]
pub struct MonodromyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BlowupArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SabatiniArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Points at which tau is reported, comma separated.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub z: List,
    /// Half-width of the window sampled for the verdict.
    #[arg(long, default_value_t = 1.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Bound on `|tau(z)| / z^6` for an isochronous verdict.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct InvolutionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Amplitude grid `lo:hi:N`.
    #[arg(long, allow_hyphen_values = true, default_value = "0.2:0.8:3")]
    pub h: Range,
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Snapshot times `lo:hi:N`; defaults to 101 times on `[0, t_max]`.
    #[arg(long, allow_hyphen_values = true)]
    pub times: Option<Range>,
}

#[derive(Debug, Clone, Args)]
pub struct CrossingArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    /// JSON result written by another subcommand.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// `lo:hi:N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected lo:hi:N, got `{s}`"));
        };
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|e| format!("bad lower bound `{lo}`: {e}"))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|e| format!("bad upper bound `{hi}`: {e}"))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|e| format!("bad point count `{n}`: {e}"))?;
        if !(lo.is_finite() && hi.is_finite()) || hi < lo || n == 0 {
            return Err(format!("need finite lo <= hi and N >= 1, got `{s}`"));
        }
        Ok(Self { lo, hi, n })
    }
}

/// `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|e| format!("bad lower bound `{lo}`: {e}"))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|e| format!("bad upper bound `{hi}`: {e}"))?;
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(format!("need lo < hi, got `{s}`"));
        }
        Ok(Self { lo, hi })
    }
}

/// Comma-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad number `{p}`: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(List)
    }
}
