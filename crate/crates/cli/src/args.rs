use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slicereg::RegistrationConfig;

#[derive(Debug, Parser)]
#[command(
    name = "slicereg",
    version,
    about = "Slice interpolation by symmetric curvature-regularized registration",
    allow_negative_numbers = true
)]
pub struct Cli {
    /// More diagnostics on stderr (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Both slices deform toward the in-between position.
    Symmetric,
    /// Slice 1 is the fixed reference, slice 2 is warped onto it.
    Single,
    /// Intensity blend without registration.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Disk,
    Rectangle,
    Blob,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Curvature weight.
    #[arg(long, default_value_t = RegistrationConfig::DEFAULT_ALPHA)]
    pub alpha: f64,

    /// Time step of the semi-implicit iteration.
    #[arg(long, default_value_t = RegistrationConfig::DEFAULT_TAU)]
    pub tau: f64,

    /// Iteration cap.
    #[arg(long, default_value_t = RegistrationConfig::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,

    /// Stop once the largest per-pixel update is below this, in pixels.
    #[arg(long, default_value_t = RegistrationConfig::DEFAULT_TOL)]
    pub tol: f64,
}

impl SolverArgs {
    pub fn config(&self, ratio: f64) -> RegistrationConfig {
        RegistrationConfig {
            alpha: self.alpha,
            tau: self.tau,
            ratio,
            max_iters: self.max_iters,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Register two slices and write the displacement field (DF2).
    Register {
        slice1: PathBuf,
        slice2: PathBuf,

        /// Output field file.
        #[arg(short, long)]
        output: PathBuf,

        /// Relative position of the matched slice, in (0, 1).
        #[arg(long, default_value_t = RegistrationConfig::DEFAULT_RATIO)]
        ratio: f64,

        #[arg(long, value_enum, default_value_t = Method::Symmetric)]
        method: Method,

        /// Also write both field components as PGMs, `<PREFIX>_u1.pgm` and
        /// `<PREFIX>_u2.pgm`, with zero at mid-gray.
        #[arg(long, value_name = "PREFIX")]
        field_preview: Option<PathBuf>,

        #[command(flatten)]
        solver: SolverArgs,
    },

    /// Synthesize slices between two inputs.
    ///
    /// With `--ratio` one slice is written per listed ratio; otherwise
    /// `--per-gap` evenly spaced slices are written. Several outputs are
    /// numbered `<stem>_<k>.<ext>`.
    Interpolate {
        slice1: PathBuf,
        slice2: PathBuf,

        #[arg(short, long)]
        output: PathBuf,

        /// Positions of the output slices, in (0, 1); comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "per_gap")]
        ratio: Vec<f64>,

        /// Number of evenly spaced slices to insert.
        #[arg(long)]
        per_gap: Option<usize>,

        #[arg(long, value_enum, default_value_t = Method::Symmetric)]
        method: Method,

        /// Also write each interpolant unquantized, as row-major
        /// little-endian f32 values without a header.
        #[arg(long, value_name = "PATH")]
        raw_out: Option<PathBuf>,

        #[command(flatten)]
        solver: SolverArgs,
    },

    /// Upsample a stack: insert `--per-gap` slices between each
    /// adjacent pair and write the result as `slice_NNN.pgm`.
    Stack {
        #[arg(required = true, num_args = 2..)]
        slices: Vec<PathBuf>,

        #[arg(short, long)]
        output_dir: PathBuf,

        #[arg(long, default_value_t = 1)]
        per_gap: usize,

        #[arg(long, value_enum, default_value_t = Method::Symmetric)]
        method: Method,

        #[command(flatten)]
        solver: SolverArgs,
    },

    /// Print the mean squared difference (8-bit scale) of two images.
    Evaluate {
        original: PathBuf,
        candidate: PathBuf,
    },

    /// Render a synthetic slice pair and its exact midpoint.
    Phantom {
        r1: PathBuf,
        r2: PathBuf,
        mid: PathBuf,

        #[arg(long, value_enum, default_value_t = Shape::Disk)]
        shape: Shape,

        #[arg(long, default_value_t = 64)]
        width: usize,

        #[arg(long, default_value_t = 64)]
        height: usize,

        #[arg(long, default_value_t = 10.0)]
        radius: f64,

        #[arg(long, default_value_t = 8.0)]
        half_width: f64,

        #[arg(long, default_value_t = 8.0)]
        half_height: f64,

        #[arg(long, default_value_t = 5.0)]
        sigma: f64,

        /// Shape center in slice 1 as `x,y`; defaults to the grid center.
        #[arg(long, value_parser = parse_pair)]
        center: Option<(f64, f64)>,

        /// Center motion from slice 1 to slice 2 as `dx,dy`.
        #[arg(long, value_parser = parse_pair, default_value = "0,0")]
        translate: (f64, f64),

        /// Size of slice 2's shape relative to slice 1's.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,

        /// Width of the edge ramp in pixels; 0 gives hard edges.
        #[arg(long, default_value_t = 1.0)]
        softness: f64,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated numbers, got `{s}`"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((num(a)?, num(b)?))
}
