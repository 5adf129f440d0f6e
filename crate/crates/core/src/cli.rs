//! Command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 when a numerical flag is raised
//! (gap above threshold, solver not converged, tolerance exceeded), 2 for
//! usage and configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::boundary::{BoundaryData, DataKind};
use crate::config::{to_c, DataSpec, RunConfig};
use crate::error::{Error, Result};
use crate::interp::{boundary_convergence, dual_leaf, duality_check, interpolate, leaf, upper_value, HullCertificate};
use crate::oracle::{hilbert_oracle, real_hull_oracle, Atom};

#[derive(Debug, Parser)]
#[command(name = "cinterp", version, about = "Complex interpolation of convex boundary data on the unit disc")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Overrides the configured gap threshold.
    #[arg(long, global = true)]
    pub gap_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Hull certificates at the configured points.
    Eval,
    /// Leaf through a point and its harmonicity residual.
    Leaf,
    /// Dual leaf with Fenchel and holomorphy checks.
    Dual,
    /// Legendre transform of the interpolant against the dual interpolant.
    Duality,
    /// Deviation from the boundary data along a radius.
    Boundary,
    /// Comparison against closed-form or convex-hull oracles.
    Oracle,
    /// Growth and convexity report for the boundary data.
    Validate,
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct Context {
    config: RunConfig,
    data: BoundaryData,
    hash: String,
    out: PathBuf,
}

fn execute(cli: &Cli) -> Result<bool> {
    let path = cli.common.config.as_ref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = cli.common.seed {
        config.seed = seed;
    }
    if let Some(g) = cli.common.gap_threshold {
        config.gap_threshold = g;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let data = config.data.build(base)?;
    fs::create_dir_all(&cli.common.out)?;
    let ctx = Context { hash: config.hash(), config, data, out: cli.common.out.clone() };
    let body = || match cli.command {
        Command::Eval => cmd_eval(&ctx),
        Command::Leaf => cmd_leaf(&ctx),
        Command::Dual => cmd_dual(&ctx),
        Command::Duality => cmd_duality(&ctx),
        Command::Boundary => cmd_boundary(&ctx),
        Command::Oracle => cmd_oracle(&ctx),
        Command::Validate => cmd_validate(&ctx),
    };
    match cli.common.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(body),
        None => body(),
    }
}

fn write_json(ctx: &Context, name: &str, mut value: serde_json::Value) -> Result<()> {
    value["config_hash"] = json!(ctx.hash);
    value["solver"] = serde_json::to_value(ctx.config.solver)?;
    value["seed"] = json!(ctx.config.seed);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    fs::write(ctx.out.join(name), text)?;
    Ok(())
}

fn write_csv<R: Serialize>(ctx: &Context, name: &str, rows: &[R]) -> Result<()> {
    let mut file = fs::File::create(ctx.out.join(name))?;
    writeln!(file, "# config_hash={}", ctx.hash)?;
    writeln!(file, "# solver={}", serde_json::to_string(&ctx.config.solver)?)?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn points(ctx: &Context) -> Result<Vec<(Complex64, Complex64)>> {
    let pts = &ctx.config.queries.points;
    if pts.is_empty() {
        return Err(Error::Config("queries.points is empty".into()));
    }
    Ok(pts.iter().map(|p| (Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3]))).collect())
}

fn certificate_ok(ctx: &Context, c: &HullCertificate) -> bool {
    c.converged() && c.gap <= ctx.config.gap_threshold
}

fn cmd_eval(ctx: &Context) -> Result<bool> {
    let params = &ctx.config.solver;
    let certs =
        points(ctx)?.par_iter().map(|&(t, w)| interpolate(&ctx.data, t, w, params)).collect::<Result<Vec<_>>>()?;
    let pass = certs.iter().all(|c| certificate_ok(ctx, c));
    let summary: Vec<_> =
        certs.iter().map(|c| json!({"value": c.value(), "error_bar": c.error_bar(), "certificate": c})).collect();
    write_json(ctx, "eval.json", json!({"gap_threshold": ctx.config.gap_threshold, "pass": pass, "results": summary}))?;
    let worst = certs.iter().map(|c| c.gap).fold(f64::NEG_INFINITY, f64::max);
    println!("eval: {} points, max gap {worst:.3e}, {}", certs.len(), verdict(pass));
    Ok(pass)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FLAGGED"
    }
}

#[derive(Serialize)]
struct LeafRow {
    t_re: f64,
    t_im: f64,
    f_re: f64,
    f_im: f64,
    value: f64,
    poisson: f64,
    residual: f64,
}

fn cmd_leaf(ctx: &Context) -> Result<bool> {
    let q = ctx.config.queries.leaf.as_ref().ok_or_else(|| Error::Config("queries.leaf is missing".into()))?;
    let tests: Vec<Complex64> = q.test_points.iter().copied().map(to_c).collect();
    let report = leaf(&ctx.data, to_c(q.t0), to_c(q.w0), &ctx.config.solver, &tests)?;
    let rows: Vec<LeafRow> = report
        .samples
        .iter()
        .map(|s| LeafRow {
            t_re: s.t.re,
            t_im: s.t.im,
            f_re: s.f.re,
            f_im: s.f.im,
            value: s.value,
            poisson: s.poisson,
            residual: s.residual,
        })
        .collect();
    write_csv(ctx, "leaf.csv", &rows)?;
    let pass = certificate_ok(ctx, &report.certificate);
    write_json(
        ctx,
        "leaf.json",
        json!({"pass": pass, "max_residual": report.max_residual, "certificate": report.certificate}),
    )?;
    println!("leaf: max residual {:.3e}, gap {:.3e}, {}", report.max_residual, report.certificate.gap, verdict(pass));
    Ok(pass)
}

fn cmd_dual(ctx: &Context) -> Result<bool> {
    let q = ctx.config.queries.leaf.as_ref().ok_or_else(|| Error::Config("queries.leaf is missing".into()))?;
    let tests: Vec<Complex64> = q.test_points.iter().copied().map(to_c).collect();
    let up = upper_value(&ctx.data, to_c(q.t0), to_c(q.w0), &ctx.config.solver)?;
    let report = dual_leaf(&ctx.data, &up.disc, &ctx.config.solver, &tests, ctx.config.seed)?;
    let tol = ctx.config.gap_threshold;
    let pass = report.max_fenchel_defect <= tol && report.holomorphy_residual <= tol;
    write_json(ctx, "dual_leaf.json", json!({"pass": pass, "tolerance": tol, "report": report, "leaf": up}))?;
    println!(
        "dual: Fenchel defect {:.3e}, holomorphy residual {:.3e}, {}",
        report.max_fenchel_defect,
        report.holomorphy_residual,
        verdict(pass)
    );
    Ok(pass)
}

#[derive(Serialize)]
struct DualityCsv {
    t0_re: f64,
    t0_im: f64,
    z_re: f64,
    z_im: f64,
    legendre: f64,
    direct: f64,
    defect: f64,
}

fn cmd_duality(ctx: &Context) -> Result<bool> {
    let q = ctx.config.queries.duality.as_ref().ok_or_else(|| Error::Config("queries.duality is missing".into()))?;
    let zs: Vec<Complex64> = q.z_points.iter().copied().map(to_c).collect();
    let mut rows = Vec::new();
    for &t0 in &q.t0 {
        let t0 = to_c(t0);
        for r in duality_check(&ctx.data, t0, &zs, &ctx.config.solver, q.search_resolution)? {
            rows.push(DualityCsv {
                t0_re: t0.re,
                t0_im: t0.im,
                z_re: r.z.re,
                z_im: r.z.im,
                legendre: r.legendre,
                direct: r.direct,
                defect: r.defect,
            });
        }
    }
    write_csv(ctx, "duality.csv", &rows)?;
    let worst = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
    let pass = worst <= ctx.config.gap_threshold;
    println!("duality: {} comparisons, max defect {worst:.3e}, {}", rows.len(), verdict(pass));
    Ok(pass)
}

#[derive(Serialize)]
struct BoundaryRow {
    r: f64,
    deviation: f64,
}

fn cmd_boundary(ctx: &Context) -> Result<bool> {
    let q = ctx.config.queries.boundary.as_ref().ok_or_else(|| Error::Config("queries.boundary is missing".into()))?;
    let ws: Vec<Complex64> = q.w_grid.iter().copied().map(to_c).collect();
    let rows = boundary_convergence(&ctx.data, q.s_index, &q.radii, &ws, &ctx.config.solver)?;
    let out: Vec<BoundaryRow> = rows.iter().map(|r| BoundaryRow { r: r.r, deviation: r.deviation }).collect();
    write_csv(ctx, "boundary.csv", &out)?;
    // deviations may not grow towards the boundary beyond solver resolution
    let pass = rows.windows(2).all(|p| p[1].deviation <= p[0].deviation + 2e-8);
    for r in &rows {
        println!("boundary: r = {}, d = {:.3e}", r.r, r.deviation);
    }
    println!("boundary: {}", verdict(pass));
    Ok(pass)
}

#[derive(Serialize)]
struct OracleRow {
    t_re: f64,
    t_im: f64,
    w_re: f64,
    w_im: f64,
    oracle: f64,
    solver: f64,
    difference: f64,
}

fn cmd_oracle(ctx: &Context) -> Result<bool> {
    let q = ctx.config.queries.oracle.as_ref().ok_or_else(|| Error::Config("queries.oracle is missing".into()))?;
    let spec = &ctx.config.data;
    let grid = ctx.data.grid();
    let oracle: Box<dyn Fn(Complex64, Complex64) -> Result<f64> + Sync> = match (ctx.data.kind(), spec) {
        (DataKind::HilbertWeight, _) => {
            let u = spec.weights(grid).expect("weight data");
            let p = ctx.data.p();
            let grid = grid.clone();
            Box::new(move |t, w| hilbert_oracle(&u, &grid, p, t, w))
        }
        (DataKind::RealOnly, DataSpec::RealOnly { c0, p, .. }) => {
            let atom_grid = crate::boundary::CircleGrid::new(q.atom_grid_m)?;
            if q.atom_x_count < 2 {
                return Err(Error::Config("atom_x_count must be at least 2".into()));
            }
            let [lo, hi] = q.atom_x_range;
            let h = (hi - lo) / (q.atom_x_count - 1) as f64;
            let mut atoms = Vec::new();
            for &s in atom_grid.points() {
                for i in 0..q.atom_x_count {
                    let x = lo + i as f64 * h;
                    atoms.push(Atom::new(s, x, spec.psi_value(s, x).expect("real data"))?);
                }
            }
            let (c0, p) = (*c0, *p);
            Box::new(move |t, w| Ok(real_hull_oracle(&atoms, t, w.re)? + c0 * w.im.abs().powf(p)))
        }
        _ => return Err(Error::Config("no oracle for this kind of boundary data".into())),
    };
    let rows = q
        .points
        .par_iter()
        .map(|p| {
            let (t, w) = (Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3]));
            let o = oracle(t, w)?;
            let v = interpolate(&ctx.data, t, w, &ctx.config.solver)?.value();
            Ok(OracleRow { t_re: t.re, t_im: t.im, w_re: w.re, w_im: w.im, oracle: o, solver: v, difference: v - o })
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(ctx, "oracle.csv", &rows)?;
    let worst = rows.iter().map(|r| r.difference.abs()).fold(0.0, f64::max);
    let pass = worst <= q.tolerance;
    println!("oracle: {} points, max |difference| {worst:.3e}, {}", rows.len(), verdict(pass));
    Ok(pass)
}

fn cmd_validate(ctx: &Context) -> Result<bool> {
    let q = &ctx.config.queries.validate;
    let seed = ctx.config.seed;
    let growth = ctx.data.validate_growth(q.budget.max(1), seed);
    let convexity = ctx.data.convexity_defect(q.budget.max(1) / 10 + 1, q.convexity_radius, seed);
    let dual_convexity = ctx.data.dual().convexity_defect(q.budget.max(1) / 10 + 1, q.convexity_radius, seed);
    let strictness = ctx.data.strict_convexity_margin(100, seed);
    let homogeneity = ctx.config.data.norm_family(ctx.data.grid()).map(|f| f.complex_homogeneity_defect());
    let pass = growth.max_violation() == 0.0 && convexity <= 1e-9 && dual_convexity <= 1e-9;
    write_json(
        ctx,
        "validate.json",
        json!({
            "pass": pass,
            "kind": ctx.data.kind(),
            "p": ctx.data.p(),
            "growth": ctx.data.growth(),
            "dual_growth": ctx.data.dual_growth(),
            "growth_report": growth,
            "convexity_defect": convexity,
            "dual_convexity_defect": dual_convexity,
            "strict_convexity_margin": strictness,
            "complex_homogeneity_defect": homogeneity,
        }),
    )?;
    println!(
        "validate: growth violation {:.3e}, convexity defect {convexity:.3e}, {}",
        growth.max_violation(),
        verdict(pass)
    );
    Ok(pass)
}
