//! Command-line front end: analyze, net, check, reconstruct, align, meridian, export.

// `!(x <= t)` rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use surf4::align::rigid_align;
use surf4::bonnet::{self, ReconstructOptions};
use surf4::catalog;
use surf4::io::{self as formats, FileKind, SampledPatch};
use surf4::meridian::{self, MeridianSpec, SphereCurvature};
use surf4::net::{self, NetOptions};
use surf4::report;
use surf4::surface::{ParamPoint, SurfaceModel, Vec4};
use surf4::{Error, ErrorCategory};

const EXIT_INPUT: u8 = 2;
const EXIT_THRESHOLD: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

/// Invariants, principal nets and reconstruction for surfaces in R^4.
///
/// Exit codes: 0 success, 2 input error, 3 tolerance or threshold failure,
/// 4 numerical breakdown.
#[derive(Parser)]
#[command(name = "surf4", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct SurfaceArgs {
    /// Catalog name, or `@file.csv` for a sampled patch or a grid with positions.
    #[arg(long)]
    surface: String,
    /// Comma-separated catalog parameters.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    params: Vec<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Pointwise invariants, figures and class predicates on a grid of points.
    Analyze {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Sample count per direction, `NUxNV`.
        #[arg(long, default_value = "32x32")]
        grid: String,
        /// Jet order, 2 or 3.
        #[arg(long, default_value_t = 3)]
        order: u8,
        /// Step of the frame differences.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a curvature-line net and write its invariant grid.
    Net {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, default_value = "21x21")]
        grid: String,
        /// Net steps `DUxDV` in arc length.
        #[arg(long, default_value = "0.1x0.1")]
        steps: String,
        /// Parameter point of node (0, 0), `U,V`.
        #[arg(long, allow_hyphen_values = true)]
        seed: String,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the compatibility equations on a grid file.
    Check {
        /// Grid file; standard input when absent.
        input: Option<PathBuf>,
        #[arg(long, default_value_t = surf4::tolerances::COMPATIBILITY)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a surface patch from a grid file.
    Reconstruct {
        input: Option<PathBuf>,
        /// Largest admissible compatibility residual.
        #[arg(long, default_value_t = surf4::tolerances::COMPATIBILITY)]
        threshold: f64,
        /// Patch output (csv4d).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional JSON summary.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Best rigid motion between two point sets given as patch or grid files.
    Align {
        candidate: PathBuf,
        reference: PathBuf,
        /// Fail with exit code 3 when the RMS exceeds this value.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a meridian surface and check its defining constancy.
    Meridian {
        #[arg(long, value_enum)]
        family: MeridianFamily,
        /// constant_K: K,alpha,beta[,b]; cmc: a,b[,C]; constant_k: a,b[,C[,branch]]; custom: b0,b1.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        params: Vec<f64>,
        #[arg(long, default_value = "32x16")]
        grid: String,
        #[arg(long, value_enum, default_value_t = MeshFormat::Csv4d)]
        format: MeshFormat,
        /// Mesh output; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a surface or a patch as a mesh.
    Export {
        /// A surface selector; alternatively `--input`.
        #[arg(long)]
        surface: Option<String>,
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        params: Vec<f64>,
        /// Patch or grid file with positions.
        #[arg(long, conflicts_with = "surface")]
        input: Option<PathBuf>,
        #[arg(long, default_value = "32x32")]
        grid: String,
        #[arg(long, value_enum)]
        format: MeshFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MeridianFamily {
    #[value(name = "constant_K")]
    ConstantGauss,
    Cmc,
    #[value(name = "constant_k")]
    ConstantK,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshFormat {
    Obj,
    Csv4d,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.category() {
            ErrorCategory::Input => EXIT_INPUT,
            ErrorCategory::Threshold => EXIT_THRESHOLD,
            ErrorCategory::Numerical => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

fn parse_pair<T: std::str::FromStr>(s: &str, sep: char, what: &str) -> CliResult<(T, T)> {
    let bad = || input_error(format!("cannot parse {what} `{s}`"));
    let (a, b) = s.split_once(sep).ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn read_input(path: Option<&Path>) -> CliResult<String> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| input_error(format!("{}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| input_error(format!("cannot write {}: {e}", p.display()))),
        None => {
            io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// A patch from a patch file or from the positions of a grid file.
fn patch_from_text(text: &str, origin: &str) -> CliResult<SampledPatch> {
    match formats::file_kind(text)? {
        FileKind::Patch => Ok(formats::parse_csv4d(text)?),
        FileKind::Grid => SampledPatch::from_grid(&formats::parse_grid(text)?)
            .ok_or_else(|| input_error(format!("{origin}: grid carries no positions"))),
    }
}

fn load_surface(args: &SurfaceArgs) -> CliResult<SurfaceModel> {
    match args.surface.strip_prefix('@') {
        Some(path) => {
            let patch = patch_from_text(&read_input(Some(Path::new(path)))?, path)?;
            Ok(formats::sampled_surface(&patch, path)?)
        }
        None => Ok(catalog::catalog(&args.surface, &args.params)?),
    }
}

fn meridian_spec(family: MeridianFamily, p: &[f64]) -> CliResult<MeridianSpec> {
    let arity = |lo: usize, hi: usize, names: &str| {
        if p.len() < lo || p.len() > hi {
            Err(input_error(format!(
                "expected parameters {names}, got {} values",
                p.len()
            )))
        } else {
            Ok(())
        }
    };
    let opt = |i: usize, default: f64| p.get(i).copied().unwrap_or(default);
    let spec = match family {
        MeridianFamily::ConstantGauss => {
            arity(3, 4, "K,alpha,beta[,b]")?;
            meridian::constant_k_gauss_profile(p[0], p[1], p[2])?.with_curvature(SphereCurvature::Constant(opt(3, 1.0)))
        }
        MeridianFamily::Cmc => {
            arity(2, 3, "a,b[,C]")?;
            meridian::cmc_profile(p[0], p[1], opt(2, 0.0))?
        }
        MeridianFamily::ConstantK => {
            arity(2, 4, "a,b[,C[,branch]]")?;
            meridian::constant_k_profile_detailed(p[0], p[1], opt(2, 0.0), opt(3, 1.0), None)?.0
        }
        MeridianFamily::Custom => {
            arity(2, 2, "b0,b1")?;
            meridian::custom_sine_spec(p[0], p[1])
        }
    };
    Ok(spec)
}

fn mesh_bytes(patch: &SampledPatch, format: MeshFormat) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        MeshFormat::Obj => formats::write_obj(patch, &mut buf)?,
        MeshFormat::Csv4d => formats::write_csv4d(patch, &mut buf)?,
    }
    Ok(buf)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analyze {
            surface,
            grid,
            order,
            h,
            out,
        } => {
            let model = load_surface(&surface)?;
            let (nu, nv) = parse_pair::<usize>(&grid, 'x', "grid")?;
            if !(2..=3).contains(&order) {
                return Err(input_error(format!("order must be 2 or 3, got {order}")));
            }
            let r = report::analyze(&model, nu, nv, order, h);
            eprintln!(
                "analyzed {} points of {} ({} failed)",
                r.summary.points,
                model.label(),
                r.summary.failures
            );
            emit(out.as_deref(), &json(&r)?)
        }
        Command::Net {
            surface,
            grid,
            steps,
            seed,
            h,
            out,
        } => {
            let model = load_surface(&surface)?;
            let (nu, nv) = parse_pair::<usize>(&grid, 'x', "grid")?;
            let (du, dv) = parse_pair::<f64>(&steps, 'x', "steps")?;
            let (u, v) = parse_pair::<f64>(&seed, ',', "seed")?;
            let options = NetOptions {
                frame_step: h,
                ..Default::default()
            };
            let g = net::build_net_with(&model, ParamPoint::new(u, v), nu, nv, du, dv, &options)?;
            eprintln!("net {nu}x{nv} on {}, holonomy {:.3e}", model.label(), g.holonomy);
            let mut buf = Vec::new();
            formats::write_grid(&g, &mut buf)?;
            emit(out.as_deref(), &buf)
        }
        Command::Check { input, threshold, out } => {
            let g = formats::parse_grid(&read_input(input.as_deref())?)?;
            let r = report::check_report(&g, threshold);
            emit(out.as_deref(), &json(&r)?)?;
            let worst = r.worst();
            let [i, j] = worst.worst_node;
            if r.passed {
                eprintln!(
                    "max residual {:.3e} ({} at node ({i}, {j}))",
                    r.max_residual, worst.name
                );
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_THRESHOLD,
                    message: format!(
                        "residual of {} is {:.6e} at node ({i}, {j}), threshold {threshold:e}",
                        worst.name, worst.max_abs
                    ),
                })
            }
        }
        Command::Reconstruct {
            input,
            threshold,
            out,
            report: report_path,
        } => {
            let g = formats::parse_grid(&read_input(input.as_deref())?)?;
            let options = ReconstructOptions {
                threshold: Some(threshold),
                ..Default::default()
            };
            let frame = [Vec4::x(), Vec4::y(), Vec4::z(), Vec4::w()];
            let patch = bonnet::reconstruct_with(&g, &frame, Vec4::zeros(), &options)?;
            let r = report::reconstruct_report(&g, &patch);
            eprintln!(
                "reconstructed {}x{}: gram drift {:.3e}, path defect {:.3e}{}",
                patch.nu,
                patch.nv,
                patch.gram_drift,
                patch.path_defect,
                if r.unique_up_to_motion {
                    ""
                } else {
                    " (no uniqueness guarantee)"
                }
            );
            if let Some(p) = report_path {
                emit(Some(&p), &json(&r)?)?;
            }
            let mut buf = Vec::new();
            formats::write_csv4d(&SampledPatch::from_reconstruction(&patch, g.du, g.dv), &mut buf)?;
            emit(out.as_deref(), &buf)
        }
        Command::Align {
            candidate,
            reference,
            threshold,
            out,
        } => {
            let c = patch_from_text(&read_input(Some(&candidate))?, &candidate.display().to_string())?;
            let r = patch_from_text(&read_input(Some(&reference))?, &reference.display().to_string())?;
            let a = rigid_align(&c.positions, &r.positions)?;
            let rep = report::align_report(&a, &c.positions, &r.positions);
            emit(out.as_deref(), &json(&rep)?)?;
            eprintln!("rms {:.6e}", rep.rms);
            match threshold {
                Some(t) if !(rep.rms <= t) => Err(Failure {
                    code: EXIT_THRESHOLD,
                    message: format!("alignment rms {:e} exceeds {t:e}", rep.rms),
                }),
                _ => Ok(()),
            }
        }
        Command::Meridian {
            family,
            params,
            grid,
            format,
            out,
            report: report_path,
        } => {
            let spec = meridian_spec(family, &params)?;
            let (nu, nv) = parse_pair::<usize>(&grid, 'x', "grid")?;
            let r = report::meridian_report(&spec, nu, nv)?;
            let model = meridian::meridian_surface(&spec)?;
            emit(
                out.as_deref(),
                &mesh_bytes(&SampledPatch::from_model(&model, nu, nv)?, format)?,
            )?;
            if let Some(p) = report_path {
                emit(Some(&p), &json(&r)?)?;
            }
            for c in &r.constancy {
                eprintln!(
                    "{}: target {:e}, max deviation {:.3e} (tolerance {:e})",
                    c.quantity, c.target, c.max_deviation, c.tolerance
                );
            }
            if r.satisfied() {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_THRESHOLD,
                    message: format!("{} surface misses its defining constancy", r.family),
                })
            }
        }
        Command::Export {
            surface,
            params,
            input,
            grid,
            format,
            out,
        } => {
            let patch = match (surface, input) {
                (Some(surface), None) => {
                    let model = load_surface(&SurfaceArgs { surface, params })?;
                    let (nu, nv) = parse_pair::<usize>(&grid, 'x', "grid")?;
                    SampledPatch::from_model(&model, nu, nv)?
                }
                (None, Some(path)) => patch_from_text(&read_input(Some(&path))?, &path.display().to_string())?,
                _ => return Err(input_error("give either --surface or --input")),
            };
            emit(out.as_deref(), &mesh_bytes(&patch, format)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
