//! The `framescale` command line.
//!
//! Exit codes: 0 when a verdict was computed (including negative ones),
//! 1 for usage errors, 2 for unreadable or unsuitable input, 3 when two
//! independent computations of the same quantity disagree.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::frame::{verify_parseval, Frame, ParsevalTarget};
use crate::io::{self, FileFormat, Report, ScalingRecord};
use crate::obstruction::{closeness_obstruction, dichotomy_check, DichotomyBranch};
use crate::piecewise::{
    construct_from_orthogonal_split, construct_r2, construct_r3_detailed, construct_r4_special, derive_seed,
    search_piecewise, verify_piecewise, PiecewiseReport, PiecewiseScaling, SearchOptions, SearchRoute,
};
use crate::projection::OrthogonalProjection;
use crate::scalability::solve_standard_scaling;
use crate::transport::{to_canonical, transport_scaling};
use crate::DEFAULT_TOL;

#[derive(Parser, Debug)]
#[command(name = "framescale", version, about = "Scalable and piecewise scalable frames")]
struct Cli {
    /// Numerical tolerance [default: 1e-8; `verify` defaults to the report's]
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Input frame format (inferred from the extension when omitted)
    #[arg(long, global = true, value_enum)]
    format: Option<FileFormat>,
    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frame operator, frame bounds and condition number
    Analyze { input: PathBuf },
    /// Standard scaling by nonnegative least squares
    Scale {
        input: PathBuf,
        /// Scale to Parseval for the range of this projection instead of the identity
        #[arg(long)]
        projection: Option<PathBuf>,
    },
    /// Piecewise scaling by a constructor or by randomized search
    Piecewise(PiecewiseArgs),
    /// Re-check the scaling recorded in a report
    Verify {
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Closeness obstructions to piecewise scalability
    Obstruct {
        input: PathBuf,
        /// Random projections per applicable rank for the dichotomy check
        #[arg(long, default_value_t = 0)]
        dichotomy_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Move a piecewise scaling along a unitary
    Transport(TransportArgs),
    /// The canonical Parseval frame S^{-1/2} x_i
    CanonicalParseval {
        input: PathBuf,
        #[arg(long)]
        frame_out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Construct {
    R2,
    R3,
    R4special,
    Split,
}

#[derive(Args, Debug)]
struct PiecewiseArgs {
    input: PathBuf,
    /// Use a specific constructor instead of searching
    #[arg(long, value_enum)]
    construct: Option<Construct>,
    /// Projection matrix file (r2, split; restricts the search to this projection)
    #[arg(long)]
    projection: Option<PathBuf>,
    /// Zero-based vectors scaled on the range of P (split)
    #[arg(long, value_delimiter = ',')]
    p_indices: Vec<usize>,
    /// Zero-based vectors scaled on the complement of P (split)
    #[arg(long, value_delimiter = ',')]
    q_indices: Vec<usize>,
    /// Zero-based vectors x1,x2,x3,x4 (r4special)
    #[arg(long, value_delimiter = ',', num_args = 1)]
    indices: Vec<usize>,
    /// Projection ranks tried by the search
    #[arg(long, value_delimiter = ',')]
    rank: Vec<usize>,
    /// Random projections per rank
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("target").required(true).args(["unitary", "to_canonical"])))]
struct TransportArgs {
    input: PathBuf,
    /// Report holding a piecewise scaling of the input frame
    #[arg(long)]
    report: PathBuf,
    /// Orthogonal matrix file
    #[arg(long)]
    unitary: Option<PathBuf>,
    /// Transport onto a coordinate projection of the same rank
    #[arg(long)]
    to_canonical: bool,
    /// Write the transported frame here
    #[arg(long)]
    frame_out: Option<PathBuf>,
}

pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    1
                }
            };
        }
    };
    match execute(&cli, err) {
        Ok(report) => {
            let text = report.to_json();
            let written = match &cli.out {
                Some(path) => fs::write(path, text).map_err(Error::from),
                None => out.write_all(text.as_bytes()).map_err(Error::from),
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    2
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => 1,
        Error::Inconsistency(_) => 3,
        _ => 2,
    }
}

fn execute(cli: &Cli, err: &mut impl Write) -> Result<Report> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("--tol must be positive, got {tol}")));
    }
    let load = |path: &Path| io::load_frame(path, cli.format);
    match &cli.command {
        Command::Analyze { input } => analyze(&load(input)?, input, tol),
        Command::Scale { input, projection } => {
            let p = projection.as_deref().map(|p| load_projection(p, tol)).transpose()?;
            scale(&load(input)?, input, p.as_ref(), tol, err)
        }
        Command::Piecewise(args) => piecewise(&load(&args.input)?, args, tol),
        Command::Verify { input, report } => {
            let recorded = Report::load(report)?;
            verify(&load(input)?, input, &recorded, cli.tol.unwrap_or(recorded.tolerance))
        }
        Command::Obstruct { input, dichotomy_samples, seed } => obstruct(&load(input)?, input, *dichotomy_samples, *seed, tol),
        Command::Transport(args) => transport(&load(&args.input)?, args, tol),
        Command::CanonicalParseval { input, frame_out } => canonical(&load(input)?, input, frame_out.as_deref(), tol),
    }
}

fn load_projection(path: &Path, tol: f64) -> Result<OrthogonalProjection> {
    OrthogonalProjection::from_matrix(io::load_matrix(path)?, tol)
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// JSON has no infinities; they are written as null.
fn finite(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

fn analyze(frame: &Frame, input: &Path, tol: f64) -> Result<Report> {
    let bounds = frame.frame_bounds();
    let s = frame.frame_operator();
    let n = frame.dim();
    let identity = nalgebra::DMatrix::<f64>::identity(n, n);
    let tight = &identity * (s.trace() / n as f64);
    let mut report = Report::new("analyze", &display(input), tol, if bounds.spanning { "frame" } else { "not-spanning" });
    report.residuals.insert("parseval".into(), (&s - &identity).norm());
    report.residuals.insert("tightness".into(), (&s - tight).norm());
    report.details = Some(json!({
        "vectors": frame.len(),
        "dim": n,
        "rank": frame.rank(),
        "lower_bound": bounds.lower,
        "upper_bound": bounds.upper,
        "condition_number": finite(bounds.condition_number),
        "unit_norm": frame.is_unit_norm(tol),
        "frame_operator": io::matrix_to_rows(&s),
    }));
    Ok(report)
}

fn scale(frame: &Frame, input: &Path, target: Option<&OrthogonalProjection>, tol: f64, err: &mut impl Write) -> Result<Report> {
    let target = match target {
        Some(p) => {
            if p.dim() != frame.dim() {
                return Err(Error::DimensionMismatch { index: 0, expected: frame.dim(), found: p.dim() });
            }
            ParsevalTarget::Range(p)
        }
        None => ParsevalTarget::Identity(frame.dim()),
    };
    let verdict = solve_standard_scaling(frame.vectors(), target, tol)?;
    for w in &verdict.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let mut report = Report::new("scale", &display(input), tol, if verdict.feasible { "feasible" } else { "infeasible" });
    report.residuals.insert("parseval".into(), verdict.residual);
    if let Some(s) = verdict.scaling.as_ref().filter(|_| verdict.feasible) {
        report.scaling = Some(ScalingRecord::Standard { c: s.constants.clone() });
    }
    report.certificate = verdict.certificate.map(|c| c.tag().to_string());
    report.details = Some(json!({
        "converged": verdict.converged,
        "target_rank": target.matrix().trace().round() as usize,
        "warnings": verdict.warnings,
    }));
    Ok(report)
}

fn piecewise_residuals(report: &mut Report, check: &PiecewiseReport) {
    report.residuals.insert("direct".into(), check.direct_residual);
    report.residuals.insert("p_side".into(), check.p_side.residual);
    report.residuals.insert("q_side".into(), check.q_side.residual);
    report.residuals.insert("cross".into(), check.cross_norm);
    report.residuals.insert("route_gap".into(), check.route_gap);
}

fn piecewise(frame: &Frame, args: &PiecewiseArgs, tol: f64) -> Result<Report> {
    let projection = args.projection.as_deref().map(|p| load_projection(p, tol)).transpose()?;
    let mut details = serde_json::Map::new();
    let mut seed = None;
    let found: Option<PiecewiseScaling> = match args.construct {
        Some(Construct::R2) => {
            let p = projection.unwrap_or(OrthogonalProjection::canonical(&[0], frame.dim())?);
            details.insert("route".into(), json!("r2"));
            Some(construct_r2(frame, &p, tol)?)
        }
        Some(Construct::R3) => {
            let c = construct_r3_detailed(frame, tol)?;
            details.insert("route".into(), json!("r3"));
            details.insert("triple".into(), json!(c.triple));
            details.insert("inner_product".into(), json!(c.inner_product));
            details.insert("lambda".into(), json!(c.lambda));
            details.insert("norm_identity_gap".into(), json!(c.norm_identity_gap));
            Some(c.scaling)
        }
        Some(Construct::R4special) => {
            let idx: [usize; 4] = match args.indices.as_slice() {
                [] => [0, 1, 2, 3],
                &[a, b, c, d] => [a, b, c, d],
                other => return Err(Error::InvalidArgument(format!("--indices needs 4 entries, got {}", other.len()))),
            };
            details.insert("route".into(), json!("r4special"));
            details.insert("indices".into(), json!(idx));
            Some(construct_r4_special(frame, idx, tol)?)
        }
        Some(Construct::Split) => {
            let p = projection.ok_or_else(|| Error::InvalidArgument("split needs --projection".into()))?;
            details.insert("route".into(), json!("split"));
            Some(construct_from_orthogonal_split(frame, &p, &args.p_indices, &args.q_indices, tol)?)
        }
        None => {
            seed = Some(args.seed);
            match projection {
                Some(p) => {
                    details.insert("route".into(), json!("fixed-projection"));
                    crate::piecewise::try_split(frame, &p, tol)
                }
                None => {
                    let opts = SearchOptions {
                        ranks: (!args.rank.is_empty()).then(|| args.rank.clone()),
                        budget: args.budget,
                        seed: args.seed,
                        tol,
                    };
                    let outcome = search_piecewise(frame, &opts)?;
                    details.insert("ranks".into(), json!(outcome.ranks));
                    details.insert("budget".into(), json!(args.budget));
                    if let Some(route) = &outcome.route {
                        details.insert("route".into(), route_json(route));
                    }
                    outcome.scaling
                }
            }
        }
    };
    let Some(ps) = found else {
        details.insert(
            "note".into(),
            json!("no scaling found within the search budget; this does not show that none exists"),
        );
        let mut report = Report::new("piecewise", &display(&args.input), tol, "not-found");
        report.seed = seed;
        report.details = Some(details.into());
        return Ok(report);
    };
    let check = verify_piecewise(frame, &ps, tol)?;
    let mut report = Report::new("piecewise", &display(&args.input), tol, if check.passed { "found" } else { "failed" });
    piecewise_residuals(&mut report, &check);
    report.scaling = Some(ScalingRecord::from_piecewise(&ps));
    report.seed = seed;
    details.insert("projection_rank".into(), json!(ps.projection.rank()));
    report.details = Some(details.into());
    Ok(report)
}

fn route_json(route: &SearchRoute) -> serde_json::Value {
    match route {
        SearchRoute::StandardScaling => json!("standard-scaling"),
        SearchRoute::Planar => json!("r2"),
        SearchRoute::Spatial => json!("r3"),
        SearchRoute::RandomSplit { rank, candidate } => json!({"random-split": {"rank": rank, "candidate": candidate}}),
    }
}

fn verify(frame: &Frame, input: &Path, recorded: &Report, tol: f64) -> Result<Report> {
    let scaling = recorded.scaling.as_ref().ok_or_else(|| Error::Format {
        path: recorded.input.clone(),
        message: "report carries no scaling".into(),
    })?;
    let mut report = Report::new("verify", &display(input), tol, "fail");
    let passed = match scaling {
        ScalingRecord::Standard { c } => {
            if c.len() != frame.len() {
                return Err(Error::DimensionMismatch { index: 0, expected: frame.len(), found: c.len() });
            }
            let scaled: Vec<_> = frame.vectors().iter().zip(c).map(|(v, ci)| v * *ci).collect();
            let check = verify_parseval(&scaled, ParsevalTarget::Identity(frame.dim()), tol)?;
            report.residuals.insert("parseval".into(), check.residual);
            check.passed
        }
        ScalingRecord::Piecewise { .. } => {
            let ps = scaling.to_piecewise(tol)?.expect("piecewise record");
            let check = verify_piecewise(frame, &ps, tol)?;
            piecewise_residuals(&mut report, &check);
            check.passed
        }
    };
    report.verdict = if passed { "pass" } else { "fail" }.into();
    let max_drift = report
        .residuals
        .iter()
        .filter_map(|(k, v)| recorded.residuals.get(k).map(|r| (v - r).abs()))
        .fold(0.0, f64::max);
    report.scaling = Some(scaling.clone());
    report.details = Some(json!({
        "recorded_verdict": recorded.verdict,
        "recorded_command": recorded.command,
        "max_residual_drift": max_drift,
    }));
    Ok(report)
}

fn obstruct(frame: &Frame, input: &Path, samples: usize, seed: u64, tol: f64) -> Result<Report> {
    let obs = closeness_obstruction(frame);
    let obstructed = !obs.applicable_ranks.is_empty();
    let mut report = Report::new("obstruct", &display(input), tol, if obstructed { "obstructed" } else { "none" });
    report.residuals.insert("epsilon".into(), obs.epsilon);
    if obstructed {
        report.certificate = Some(obs.theorem.tag().to_string());
    }
    let mut details = json!({
        "epsilon": finite(obs.epsilon),
        "applicable_ranks": obs.applicable_ranks,
        "unit_norm": obs.unit_norm,
        "farthest_pair": obs.farthest_pair,
    });
    if obstructed && samples > 0 {
        report.seed = Some(seed);
        let mut counts = serde_json::Map::new();
        for &rank in &obs.applicable_ranks {
            let (mut range, mut complement, mut both) = (0usize, 0usize, 0usize);
            for k in 0..samples {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, rank as u64, k as u64));
                let p = OrthogonalProjection::random(frame.dim(), rank, rand::Rng::random(&mut rng))?;
                match dichotomy_check(frame, &p, obs.epsilon)? {
                    DichotomyBranch::Range => range += 1,
                    DichotomyBranch::Complement => complement += 1,
                    DichotomyBranch::Both => both += 1,
                }
            }
            counts.insert(rank.to_string(), json!({"range": range, "complement": complement, "both": both}));
        }
        details["dichotomy"] = counts.into();
    }
    report.details = Some(details);
    Ok(report)
}

fn transport(frame: &Frame, args: &TransportArgs, tol: f64) -> Result<Report> {
    let recorded = Report::load(&args.report)?;
    let ps = recorded
        .scaling
        .as_ref()
        .map(|s| s.to_piecewise(tol))
        .transpose()?
        .flatten()
        .ok_or_else(|| Error::Format { path: display(&args.report), message: "report carries no piecewise scaling".into() })?;
    let before = verify_piecewise(frame, &ps, tol)?;
    let (moved, moved_ps, unitary) = if args.to_canonical {
        let (f, s) = to_canonical(frame, &ps, tol)?;
        let u = crate::transport::intertwiner(&ps.projection, &s.projection)?;
        (f, s, u)
    } else {
        let path = args.unitary.as_deref().expect("clap enforces the target group");
        let u = io::load_matrix(path)?;
        let (f, s) = transport_scaling(frame, &ps, &u, tol)?;
        (f, s, u)
    };
    let after = verify_piecewise(&moved, &moved_ps, tol)?;
    if let Some(path) = &args.frame_out {
        io::save_frame(&moved, path, None)?;
    }
    let mut report = Report::new("transport", &display(&args.input), tol, if after.passed { "pass" } else { "fail" });
    piecewise_residuals(&mut report, &after);
    report.scaling = Some(ScalingRecord::from_piecewise(&moved_ps));
    report.details = Some(json!({
        "residual_drift": (after.direct_residual - before.direct_residual).abs(),
        "unitary": io::matrix_to_rows(&unitary),
        "frame": moved.to_rows(),
    }));
    Ok(report)
}

fn canonical(frame: &Frame, input: &Path, frame_out: Option<&Path>, tol: f64) -> Result<Report> {
    let parseval = frame.canonical_parseval()?;
    let check = verify_parseval(parseval.vectors(), ParsevalTarget::Identity(frame.dim()), tol)?;
    if let Some(path) = frame_out {
        io::save_frame(&parseval, path, None)?;
    }
    let mut report = Report::new("canonical-parseval", &display(input), tol, if check.passed { "parseval" } else { "failed" });
    report.residuals.insert("parseval".into(), check.residual);
    report.details = Some(json!({ "frame": parseval.to_rows() }));
    Ok(report)
}
