//! Command-line front end: model ingestion, ray/grid sweeps, curvature
//! evaluation, boundary asymptotics, verification suites, CSV/SVG output.
//!
//! Exit codes: 0 = all requested predicates pass, 1 = a predicate failed,
//! 2 = input or domain error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use wpgeom::dim1::{
    boundary_classifier, completeness_test, curvature_boundedness_scan, weight_polynomial,
    wp_leading, BoundaryModel1D, RaySpec,
};
use wpgeom::hodge::validate_polarization;
use wpgeom::hodge_metric::{domination_constant, hodge_metric_direct};
use wpgeom::models::{decomposition_at, wp_geometry_checklist, Model};
use wpgeom::partial::{fourfold_report, ph_at_point, scalar_curvature, FourfoldOptions};
use wpgeom::verify::{fd_curvature, fd_metric_from_potential, lemma_suite, tensor_rel_diff, FdConfig};
use wpgeom::wp::{covariant_frame, wp_curvature, wp_metric, wp_ricci};
use wpgeom::{Error, Tolerances};

mod csvout;
mod svg;

#[derive(Parser)]
#[command(
    name = "wpgeom",
    about = "Weil-Petersson / partial Hodge / Hodge metrics and curvature on \
             moduli of polarized Calabi-Yau manifolds, from period data",
    long_about = None,
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a model file: polarization parity/nondegeneracy and the
    /// horizontal-slice axioms on sample points.
    Validate {
        model: PathBuf,
        #[command(flatten)]
        points: PointArgs,
    },
    /// Sweep points and emit one CSV row per point.
    ///
    /// Columns (per requested quantity): coordinates, r, log(1/r), metric
    /// entries, curvature scalars and predicate flags, printed with 17
    /// significant digits so identical inputs produce identical bytes.
    Sweep {
        model: PathBuf,
        #[command(flatten)]
        points: PointArgs,
        /// Weil-Petersson metric and curvature columns.
        #[arg(long)]
        wp: bool,
        /// Partial Hodge columns; optional explicit μ (default m+2 for
        /// weight 4, m+3 otherwise).
        #[arg(long, value_name = "MU", num_args = 0..=1, default_missing_value = "default")]
        ph: Option<String>,
        /// Hodge metric (Hom-norm) columns.
        #[arg(long)]
        hodge: bool,
        /// One-variable boundary chain columns (weight 3 only).
        #[arg(long)]
        dim1: bool,
        /// Run the identity suite at every point and add a pass flag.
        #[arg(long)]
        suites: bool,
        /// Output CSV path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print metric and curvature tensors at explicit points.
    Curvature {
        model: PathBuf,
        #[command(flatten)]
        points: PointArgs,
        /// μ for the partial Hodge metric.
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Boundary asymptotics: weight polynomial, completeness, classifier,
    /// leading Weil-Petersson behavior, truncation bound, boundedness scan.
    Asymptotics {
        model: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        r0: f64,
        #[arg(long, default_value_t = 0.5)]
        factor: f64,
        #[arg(long, default_value_t = 40)]
        count: usize,
        /// Run the scan against ω_μ instead of the Hodge-metric chain
        /// (reported as exploratory).
        #[arg(long)]
        mu: Option<f64>,
        /// Emit the JSON report here instead of stdout text.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verification suites (identities + finite-difference oracles);
    /// emits a machine-readable JSON report.
    Verify {
        model: PathBuf,
        #[arg(long, default_value = "all")]
        suite: String,
        #[command(flatten)]
        points: PointArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render one CSV column as a deterministic SVG line plot.
    Report {
        csv: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long)]
        out: PathBuf,
        /// Plot |value| on a log axis.
        #[arg(long)]
        log: bool,
    },
}

#[derive(Args, Clone)]
struct PointArgs {
    /// Geometric ray: "r0=1e-5,factor=0.5,count=20[,angle=0]".
    #[arg(long)]
    ray: Option<String>,
    /// Explicit points "re[,im];re[,im];..." .
    #[arg(long)]
    points: Option<String>,
    /// Rectangular grid "re0,re1,im0,im1,n" (n×n points).
    #[arg(long)]
    grid: Option<String>,
}

fn parse_ray(spec: &str) -> Result<(f64, f64, usize, f64), Error> {
    let (mut r0, mut factor, mut count, mut angle) = (1e-2_f64, 0.5_f64, 20usize, 0.0_f64);
    for part in spec.split(',') {
        let mut kv = part.splitn(2, '=');
        let key = kv.next().unwrap_or("").trim();
        let val = kv
            .next()
            .ok_or_else(|| Error::InvalidInput(format!("ray spec entry '{part}' is not key=value")))?
            .trim();
        match key {
            "r0" => r0 = val.parse().map_err(|e| Error::InvalidInput(format!("r0: {e}")))?,
            "factor" => factor = val.parse().map_err(|e| Error::InvalidInput(format!("factor: {e}")))?,
            "count" => count = val.parse().map_err(|e| Error::InvalidInput(format!("count: {e}")))?,
            "angle" => angle = val.parse().map_err(|e| Error::InvalidInput(format!("angle: {e}")))?,
            other => return Err(Error::InvalidInput(format!("unknown ray key '{other}'"))),
        }
    }
    if count == 0 || r0 <= 0.0 || factor <= 0.0 || factor >= 1.0 {
        return Err(Error::InvalidInput(
            "ray needs r0 > 0, 0 < factor < 1, count ≥ 1".into(),
        ));
    }
    Ok((r0, factor, count, angle))
}

impl PointArgs {
    fn resolve(&self, model: &Model) -> Result<Vec<Vec<Complex64>>, Error> {
        if model.vars() != 1 && self.points.is_none() {
            return Err(Error::InvalidInput(
                "multi-variable models need explicit --points".into(),
            ));
        }
        if let Some(spec) = &self.ray {
            let (r0, factor, count, angle) = parse_ray(spec)?;
            return Ok((0..count)
                .map(|j| vec![Complex64::from_polar(r0 * factor.powi(j as i32), angle)])
                .collect());
        }
        if let Some(spec) = &self.grid {
            let vals: Vec<f64> = spec
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Error::InvalidInput(format!("grid spec: {e}")))?;
            if vals.len() != 5 {
                return Err(Error::InvalidInput(
                    "grid spec is re0,re1,im0,im1,n".into(),
                ));
            }
            let n = vals[4] as usize;
            if n < 2 {
                return Err(Error::InvalidInput("grid resolution must be ≥ 2".into()));
            }
            let mut out = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    let re = vals[0] + (vals[1] - vals[0]) * a as f64 / (n - 1) as f64;
                    let im = vals[2] + (vals[3] - vals[2]) * b as f64 / (n - 1) as f64;
                    out.push(vec![Complex64::new(re, im)]);
                }
            }
            return Ok(out);
        }
        if let Some(spec) = &self.points {
            let mut out = Vec::new();
            for p in spec.split(';') {
                let coords: Vec<Complex64> = p
                    .split_whitespace()
                    .map(|zs| {
                        let parts: Vec<&str> = zs.split(',').collect();
                        let re: f64 = parts[0].parse().map_err(|e| {
                            Error::InvalidInput(format!("point '{zs}': {e}"))
                        })?;
                        let im: f64 = if parts.len() > 1 {
                            parts[1].parse().map_err(|e| {
                                Error::InvalidInput(format!("point '{zs}': {e}"))
                            })?
                        } else {
                            0.0
                        };
                        Ok(Complex64::new(re, im))
                    })
                    .collect::<Result<_, Error>>()?;
                if coords.len() != model.vars() {
                    return Err(Error::InvalidInput(format!(
                        "point '{p}' has {} coordinates, model needs {}",
                        coords.len(),
                        model.vars()
                    )));
                }
                out.push(coords);
            }
            if out.is_empty() {
                return Err(Error::InvalidInput("no points supplied".into()));
            }
            return Ok(out);
        }
        // default: a short ray inside the validity domain
        let r0 = model.default_radius();
        Ok((0..5)
            .map(|j| vec![Complex64::new(r0 * 0.5_f64.powi(j), 0.0)])
            .collect())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let tol = Tolerances::default();
    match cli.command {
        Command::Validate { model, points } => {
            let m = Model::load(&model)?;
            let pol_rep = validate_polarization(m.polarization(), &tol)?;
            print!("{}", pol_rep.render_text());
            let pts = points.resolve(&m)?;
            let rep = wp_geometry_checklist(&m, &pts, &tol)?;
            print!("{}", rep.render_text());
            Ok(pol_rep.pass() && rep.pass())
        }
        Command::Sweep {
            model,
            points,
            wp,
            ph,
            hodge,
            dim1,
            suites,
            out,
        } => {
            let m = Model::load(&model)?;
            let pts = points.resolve(&m)?;
            let mu = match &ph {
                None => None,
                Some(s) if s == "default" => Some(None),
                Some(s) => Some(Some(s.parse::<f64>().map_err(|e| {
                    Error::InvalidInput(format!("--ph value: {e}"))
                })?)),
            };
            let table = csvout::sweep_table(&m, &pts, wp, mu, hodge, dim1, suites, &tol)?;
            let text = table.render();
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            if let Some(flag) = table.sign_change_column("wp_sec") {
                eprintln!("note: WP holomorphic sectional curvature changes sign along the sweep = {flag}");
            }
            Ok(table.all_pass())
        }
        Command::Curvature { model, points, mu } => {
            let m = Model::load(&model)?;
            let pts = points.resolve(&m)?;
            let mut pass = true;
            for z in &pts {
                println!("point {:?}", z);
                let jet = m.jet(z, 3)?;
                let g = wp_metric(&jet, m.polarization(), &tol)?;
                println!("  wp metric: {}", fmt_mat(&g.matrix));
                let frame = covariant_frame(&jet, m.polarization(), &tol)?;
                let r = wp_curvature(&frame, &g, m.polarization());
                println!("  wp R_{{1 1bar 1 1bar}}-block max |entry|: {:.12e}", r.tensor.max_abs());
                println!("  convention: {}", r.convention);
                let ric = wp_ricci(&r, &g, &tol)?;
                println!("  wp Ricci: {}", fmt_mat(&ric));
                match ph_at_point(&m, z, mu, &tol) {
                    Ok(pt) => {
                        println!("  partial Hodge metric: {}", fmt_mat(&pt.h.matrix));
                        let rho = scalar_curvature(&pt.curvature, &pt.h, &tol)?;
                        println!("  partial Hodge scalar curvature: {:.12e}", rho);
                    }
                    Err(e) => {
                        pass = false;
                        println!("  partial Hodge: failed ({e})");
                    }
                }
                let dec = decomposition_at(&jet, m.polarization(), &tol)?;
                let jet_h = m.jet(z, (m.weight() as usize).min(4))?;
                let dec_h = decomposition_at(&jet_h, m.polarization(), &tol)?;
                let hh = hodge_metric_direct(&jet_h, &dec_h, m.polarization(), &tol)?;
                println!("  hodge metric: {}", fmt_mat(&hh.matrix));
                let c_dom = domination_constant(&g.matrix, &hh.matrix)?;
                println!("  domination constant g ≤ C h^H: C = {:.12e}", c_dom);
                let _ = dec;
            }
            Ok(pass)
        }
        Command::Asymptotics {
            model,
            r0,
            factor,
            count,
            mu,
            out,
        } => {
            let m = Model::load(&model)?;
            let boundary = BoundaryModel1D::from_model(&m)?;
            let mut lines: Vec<String> = Vec::new();
            let poly = weight_polynomial(&boundary, &tol)?;
            lines.push(format!(
                "weight polynomial coefficients (in u = log 1/r): {poly:?}"
            ));
            let (complete, ratio) = completeness_test(&boundary, &tol);
            lines.push(format!(
                "completeness (N A0 != 0): {complete} (|N A0|/|A0| = {ratio:.6e})"
            ));
            let classification = boundary_classifier(&boundary, &tol)?;
            lines.push(format!("classification: {classification:?}"));
            let mut pass = true;
            if complete {
                let lead = wp_leading(&boundary, &tol)?;
                lines.push(format!(
                    "leading asymptotics: l = {}, λ r² (log 1/r)² → {}",
                    lead.l, lead.limit
                ));
                for (u, val, dev) in &lead.samples {
                    lines.push(format!("  u = {u:5}: value {val:.12e} (deviation {dev:.3e})"));
                }
            }
            if let Ok(tb) = wpgeom::dim1::truncation_bound(&boundary, 0.5, 0, (boundary.delta / 8.0).min(1e-3)) {
                lines.push(format!(
                    "truncation bound (μ=0.5, s=0): (k0, l0) = ({}, {}), bound {:.6e}, empirical {:.6e}, dominated {}",
                    tb.k0, tb.l0, tb.bound, tb.empirical, tb.dominated
                ));
                pass &= tb.dominated;
            }
            if m.weight() == 3 {
                match curvature_boundedness_scan(&m, &RaySpec { r0, factor, count }, mu, &tol) {
                    Ok(scan) => {
                        let tag = if scan.exploratory_metric.is_some() {
                            " (exploratory: partial Hodge metric)"
                        } else {
                            ""
                        };
                        lines.push(format!(
                            "boundedness scan{tag}: sup|ρ| = {:.6e}, trend ratio = {:.3}, bounded = {}",
                            scan.sup_abs_rho, scan.trend_ratio, scan.bounded
                        ));
                        if scan.exploratory_metric.is_none() {
                            pass &= scan.bounded;
                        }
                    }
                    Err(Error::Refused(msg)) => {
                        lines.push(format!("boundedness scan refused: {msg}"));
                    }
                    Err(e) => return Err(e),
                }
            }
            let text = lines.join("\n") + "\n";
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(pass)
        }
        Command::Verify {
            model,
            suite,
            points,
            out,
        } => {
            let m = Model::load(&model)?;
            let pts = points.resolve(&m)?;
            let cfg = FdConfig::default();
            let mut reports = Vec::new();
            if suite == "all" || suite == "lemmas" {
                reports.push(lemma_suite(&m, &pts, &cfg, &tol)?);
            }
            if suite == "all" || suite == "oracles" {
                reports.push(oracle_suite(&m, &pts, &cfg, &tol)?);
            }
            if m.weight() == 4 && (suite == "all" || suite == "bounds") {
                reports.push(fourfold_report(&m, &pts, &FourfoldOptions::default(), &tol)?);
            }
            if reports.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "unknown suite '{suite}' (use all, lemmas, oracles, bounds)"
                )));
            }
            let json = serde_json::to_string_pretty(&reports)?;
            match out {
                Some(path) => std::fs::write(path, &json)?,
                None => println!("{json}"),
            }
            for r in &reports {
                eprint!("{}", r.render_text());
            }
            Ok(reports.iter().all(|r| r.pass()))
        }
        Command::Report {
            csv,
            column,
            out,
            log,
        } => {
            let text = std::fs::read_to_string(&csv)?;
            let svg_text = svg::plot_column(&text, &column, log)?;
            std::fs::write(out, svg_text)?;
            Ok(true)
        }
    }
}

/// FD-oracle agreement suite: closed-form metric and curvature against the
/// difference oracles, per model point.
fn oracle_suite(
    model: &Model,
    points: &[Vec<Complex64>],
    cfg: &FdConfig,
    tol: &Tolerances,
) -> Result<wpgeom::Report, Error> {
    let mut rep = wpgeom::Report::new("finite-difference oracle agreement");
    let mut metric_diff = 0.0_f64;
    let mut curv_diff = 0.0_f64;
    let mut ph_diff = 0.0_f64;
    for z in points {
        let jet = model.jet(z, 2)?;
        let g = wp_metric(&jet, model.polarization(), tol)?;
        let fd_g = fd_metric_from_potential(model, z, cfg)?;
        metric_diff = metric_diff.max(
            wpgeom::linalg::fnorm(&(&fd_g - &g.matrix))
                / wpgeom::linalg::fnorm(&g.matrix).max(1e-300),
        );
        let frame = covariant_frame(&jet, model.polarization(), tol)?;
        let exact = wp_curvature(&frame, &g, model.polarization());
        let metric_fn = |p: &[Complex64]| -> Result<wpgeom::linalg::CMat, Error> {
            let jet = model.jet(p, 1)?;
            Ok(wp_metric(&jet, model.polarization(), tol)?.matrix)
        };
        let fd_r = fd_curvature(&metric_fn, z, cfg, tol)?;
        curv_diff = curv_diff.max(tensor_rel_diff(&fd_r.tensor, &exact.tensor));

        let ph_fn = |p: &[Complex64]| -> Result<wpgeom::linalg::CMat, Error> {
            Ok(ph_at_point(model, p, None, tol)?.h.matrix)
        };
        let pt = ph_at_point(model, z, None, tol)?;
        let fd_ph = fd_curvature(&ph_fn, z, cfg, tol)?;
        ph_diff = ph_diff.max(tensor_rel_diff(&fd_ph.tensor, &pt.curvature.tensor));
    }
    rep.check_residual(
        "metric vs potential differences",
        "closed-form g against -∂∂̄ log S by central differences",
        metric_diff,
        cfg.tolerance("fd metric"),
    );
    rep.check_residual(
        "curvature vs metric differences",
        "g⊗g + g⊗g - F against the difference curvature of g",
        curv_diff,
        cfg.tolerance("fd curvature"),
    );
    rep.check_residual(
        "partial Hodge curvature vs differences",
        "term-by-term curvature of ω_μ against the difference curvature of h",
        ph_diff,
        cfg.tolerance("fd gencurv"),
    );
    Ok(rep)
}

fn fmt_mat(m: &wpgeom::linalg::CMat) -> String {
    let mut parts = Vec::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:+.12e}{:+.12e}i", m[(i, j)].re, m[(i, j)].im))
            .collect();
        parts.push(format!("[{}]", row.join(", ")));
    }
    parts.join(" ")
}
