//! Command-line front end for `slicereg`.
//!
//! Exit codes: 0 success, 2 argument error, 3 I/O or decode error,
//! 4 numerical divergence.

pub mod args;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use log::{info, LevelFilter};
use slicereg::{
    generate_phantom_pair, interpolate_at_ratio, interpolate_stack, linear_interpolate, load_pgm,
    msd, register_single_direction, register_symmetric, save_pgm, DisplacementField, Grid, Image2D,
    PhantomShape, PhantomSpec, RegistrationConfig, RegistrationResult,
};
use thiserror::Error;

pub use args::{Cli, Command, Method, Shape, SolverArgs};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_DIVERGENCE: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: {source}", path.display())]
    Load {
        path: PathBuf,
        source: slicereg::Error,
    },

    #[error(transparent)]
    Library(#[from] slicereg::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Load { .. } => EXIT_IO,
            CliError::Library(slicereg::Error::Divergence { .. }) => EXIT_DIVERGENCE,
            CliError::Library(slicereg::Error::Decode { .. }) => EXIT_IO,
            CliError::Library(_) => EXIT_USAGE,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and maps the
/// outcome to an exit code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    init_logging(cli.verbose);
    let stdout = io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slicereg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        2 => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Runs a parsed command, writing summary lines to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Register {
            slice1,
            slice2,
            output,
            ratio,
            method,
            field_preview,
            solver,
        } => {
            let (r1, r2) = (read_pgm(slice1)?, read_pgm(slice2)?);
            let cfg = solver.config(*ratio);
            let res = match method {
                Method::Symmetric => register_symmetric(&r1, &r2, &cfg)?,
                Method::Single => register_single_direction(&r1, &r2, &cfg)?,
                Method::Linear => {
                    return Err(CliError::Usage(
                        "register needs --method symmetric or single".into(),
                    ))
                }
            };
            write_file(output, &res.field.to_df2())?;
            if let Some(prefix) = field_preview {
                let (a, b) = preview_images(&res.field);
                write_file(&suffixed(prefix, "_u1.pgm"), &save_pgm(&a))?;
                write_file(&suffixed(prefix, "_u2.pgm"), &save_pgm(&b))?;
            }
            writeln!(out, "{}", summary_line(&res)).map_err(stdout_error)?;
        }

        Command::Interpolate {
            slice1,
            slice2,
            output,
            ratio,
            per_gap,
            method,
            raw_out,
            solver,
        } => {
            let (r1, r2) = (read_pgm(slice1)?, read_pgm(slice2)?);
            let slices = if ratio.is_empty() {
                interpolate_evenly(&r1, &r2, per_gap.unwrap_or(1), *method, solver)?
            } else {
                interpolate_ratios(&r1, &r2, ratio, *method, solver)?
            };
            let n = slices.len();
            for (k, img) in slices.iter().enumerate() {
                write_file(&numbered(output, k + 1, n), &save_pgm(img))?;
                if let Some(raw) = raw_out {
                    write_file(&numbered(raw, k + 1, n), &raw_f32(img))?;
                }
            }
        }

        Command::Stack {
            slices,
            output_dir,
            per_gap,
            method,
            solver,
        } => {
            let input = slices
                .iter()
                .map(|p| read_pgm(p))
                .collect::<Result<Vec<_>>>()?;
            let stack = upsample(&input, *per_gap, *method, solver)?;
            fs::create_dir_all(output_dir).map_err(|source| CliError::Io {
                path: output_dir.clone(),
                source,
            })?;
            let digits = stack.len().saturating_sub(1).to_string().len().max(3);
            for (k, img) in stack.iter().enumerate() {
                let path = output_dir.join(format!("slice_{k:0digits$}.pgm"));
                write_file(&path, &save_pgm(img))?;
            }
            info!("wrote {} slices to {}", stack.len(), output_dir.display());
        }

        Command::Evaluate {
            original,
            candidate,
        } => {
            let (a, b) = (read_pgm(original)?, read_pgm(candidate)?);
            writeln!(out, "msd={}", msd(&a, &b)?).map_err(stdout_error)?;
        }

        Command::Phantom {
            r1,
            r2,
            mid,
            shape,
            width,
            height,
            radius,
            half_width,
            half_height,
            sigma,
            center,
            translate,
            scale,
            softness,
        } => {
            let shape = match shape {
                Shape::Disk => PhantomShape::Disk { radius: *radius },
                Shape::Rectangle => PhantomShape::Rectangle {
                    half_width: *half_width,
                    half_height: *half_height,
                },
                Shape::Blob => PhantomShape::GaussianBlob { sigma: *sigma },
            };
            let mut spec = PhantomSpec::disk(*width, *height, *radius)
                .with_shape(shape)
                .with_translation(translate.0, translate.1)
                .with_scale(*scale)
                .with_edge_softness(*softness);
            if let Some((x, y)) = center {
                spec = spec.with_center(*x, *y);
            }
            let (a, b, m) = generate_phantom_pair(&spec)?;
            write_file(r1, &save_pgm(&a))?;
            write_file(r2, &save_pgm(&b))?;
            write_file(mid, &save_pgm(&m))?;
        }
    }
    Ok(())
}

/// `key=value` summary of a registration run.
pub fn summary_line(res: &RegistrationResult) -> String {
    format!(
        "iterations={} converged={} initial_ssd={} final_ssd={} initial_energy={} final_energy={}",
        res.iterations,
        res.converged,
        res.initial_ssd(),
        res.final_ssd(),
        res.initial_energy(),
        res.final_energy()
    )
}

fn register(
    r1: &Image2D,
    r2: &Image2D,
    method: Method,
    cfg: &RegistrationConfig,
) -> Result<DisplacementField> {
    let res = match method {
        Method::Symmetric => register_symmetric(r1, r2, cfg)?,
        Method::Single => register_single_direction(r1, r2, cfg)?,
        Method::Linear => unreachable!("linear blending needs no field"),
    };
    info!(
        "registered in {} iterations (converged={}), ssd {} -> {}",
        res.iterations,
        res.converged,
        res.initial_ssd(),
        res.final_ssd()
    );
    Ok(res.field)
}

/// One slice per requested ratio. The symmetric model is registered at
/// each ratio; the single-direction field does not depend on it and is
/// computed once.
fn interpolate_ratios(
    r1: &Image2D,
    r2: &Image2D,
    ratios: &[f64],
    method: Method,
    solver: &SolverArgs,
) -> Result<Vec<Image2D>> {
    match method {
        Method::Linear => Ok(ratios
            .iter()
            .map(|&r| linear_interpolate(r1, r2, r))
            .collect::<slicereg::Result<_>>()?),
        Method::Single => {
            let field = register(
                r1,
                r2,
                method,
                &solver.config(RegistrationConfig::DEFAULT_RATIO),
            )?;
            Ok(ratios
                .iter()
                .map(|&r| interpolate_at_ratio(r1, r2, &field, r))
                .collect::<slicereg::Result<_>>()?)
        }
        Method::Symmetric => ratios
            .iter()
            .map(|&r| {
                let field = register(r1, r2, method, &solver.config(r))?;
                Ok(interpolate_at_ratio(r1, r2, &field, r)?)
            })
            .collect(),
    }
}

fn interpolate_evenly(
    r1: &Image2D,
    r2: &Image2D,
    per_gap: usize,
    method: Method,
    solver: &SolverArgs,
) -> Result<Vec<Image2D>> {
    if per_gap == 0 {
        return Err(CliError::Usage("--per-gap must be at least 1".into()));
    }
    let stack = upsample(&[r1.clone(), r2.clone()], per_gap, method, solver)?;
    Ok(stack[1..=per_gap].to_vec())
}

/// Inserts `per_gap` slices at ratios `j / (per_gap + 1)` in every gap.
fn upsample(
    slices: &[Image2D],
    per_gap: usize,
    method: Method,
    solver: &SolverArgs,
) -> Result<Vec<Image2D>> {
    let cfg = solver.config(RegistrationConfig::DEFAULT_RATIO);
    if method == Method::Symmetric {
        return Ok(interpolate_stack(slices, per_gap, &cfg)?);
    }
    if slices.len() < 2 {
        return Err(CliError::Usage("a stack needs at least 2 slices".into()));
    }
    let mut out = vec![slices[0].clone()];
    for pair in slices.windows(2) {
        pair[0].ensure_same_shape(&pair[1])?;
        let field = match method {
            Method::Single => Some(register(&pair[0], &pair[1], method, &cfg)?),
            _ => None,
        };
        for j in 1..=per_gap {
            let r = j as f64 / (per_gap + 1) as f64;
            out.push(match &field {
                Some(f) => interpolate_at_ratio(&pair[0], &pair[1], f, r)?,
                None => linear_interpolate(&pair[0], &pair[1], r)?,
            });
        }
        out.push(pair[1].clone());
    }
    Ok(out)
}

/// Field components mapped to `[0, 1]` with zero at 0.5, sharing one scale.
fn preview_images(field: &DisplacementField) -> (Grid, Grid) {
    let m = field.max_abs();
    let scale = if m > 0.0 { 0.5 / m } else { 0.0 };
    info!("field preview: mid-gray is 0, black/white are -/+{m} px");
    (
        field.u1.map(|v| 0.5 + scale * v),
        field.u2.map(|v| 0.5 + scale * v),
    )
}

fn raw_f32(img: &Image2D) -> Vec<u8> {
    img.data()
        .iter()
        .flat_map(|&v| (v as f32).to_le_bytes())
        .collect()
}

fn read_pgm(path: &Path) -> Result<Image2D> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_pgm(&bytes).map_err(|source| CliError::Load {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    info!("wrote {}", path.display());
    Ok(())
}

fn stdout_error(source: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// `path` itself when there is one output, else `<stem>_<k>.<ext>`.
fn numbered(path: &Path, k: usize, count: usize) -> PathBuf {
    if count == 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{k}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{k}"),
    };
    path.with_file_name(name)
}
