//! The subcommand implementations: grid/portrait/string data emission,
//! rotation-number printing, and the verification run.

use crate::checks::{run_all, CheckContext};
use crate::config::{Format, RunConfig};
use crate::output::{fmt_f64, write_atomic, SvgCanvas, PALETTE};
use crate::report::VerificationReport;
use poncelet_core::canonical::{find_caustic_with_resolution, rotation_number_with_resolution, string_curve, string_length};
use poncelet_core::grid::{
    build_polygon_with_resolution, confocality_residual, equivalence_gap, fit_grid_set,
    grid_sets, grid_xy_coords, lambda_of_fit, radial_set_is_degenerate, GridSet, SetKind,
};
use poncelet_core::linespace::phase_portrait;
use poncelet_core::{ConfocalFamily, Error};
use serde::Serialize;
use std::fmt::Write as _;

pub enum CmdError {
    Computation(String),
    Io(String),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Computation(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e.to_string())
    }
}

fn family(cfg: &RunConfig) -> Result<ConfocalFamily, Error> {
    ConfocalFamily::new(cfg.a1sq, cfg.a2sq)
}

// ── grid ────────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct GridSetJson {
    kind: String,
    index: u32,
    points: usize,
    at_infinity: usize,
    lambda: Option<f64>,
    fit_residual: Option<f64>,
    axis_gap: Option<f64>,
    pencil_gap: Option<f64>,
    degenerate_axis_member: bool,
}

#[derive(Serialize)]
struct EquivalenceJson {
    kind: String,
    index_a: u32,
    index_b: u32,
    gap: Option<f64>,
}

#[derive(Serialize)]
struct GridJson {
    a1sq: f64,
    a2sq: f64,
    lambda_gamma: f64,
    lambda_caustic: f64,
    n: u32,
    k: u32,
    x0: f64,
    distinct_points: usize,
    sets: Vec<GridSetJson>,
    equivalences: Vec<EquivalenceJson>,
}

pub fn cmd_grid(cfg: &RunConfig) -> Result<(), CmdError> {
    let f = family(cfg)?;
    let poly = build_polygon_with_resolution(&f, cfg.lambda_gamma, cfg.n, cfg.k, cfg.x0, cfg.resolution)?;
    let chart = poly.chart()?;
    let sets = grid_sets(&poly)?;
    let coords = grid_xy_coords(&poly, &chart)?;

    // CSV: one row per distinct grid point, enumerated by angular set
    if cfg.formats.contains(&Format::Csv) {
        let mut csv = String::from("kind,index,j,x1,x2,chart_x,chart_y\n");
        for s in sets.iter().filter(|s| s.kind == SetKind::P) {
            for (j, g) in s.points.iter().enumerate() {
                let coord = coords
                    .iter()
                    .find(|c| (c.i, c.j) == (g.i.max(g.j), g.i.min(g.j)))
                    .expect("every grid point has chart coordinates");
                let (x1, x2) = match g.position {
                    Some(p) => (fmt_f64(p.x1), fmt_f64(p.x2)),
                    None => ("inf".to_string(), "inf".to_string()),
                };
                let _ = writeln!(
                    csv,
                    "P,{},{},{},{},{},{}",
                    s.index,
                    j,
                    x1,
                    x2,
                    fmt_f64(coord.x),
                    fmt_f64(coord.y)
                );
            }
        }
        write_atomic(&cfg.out_dir.join("grid.csv"), &csv)?;
    }

    if cfg.formats.contains(&Format::Json) {
        let mut set_json = Vec::new();
        for s in &sets {
            let degenerate = radial_set_is_degenerate(&f, s);
            let (lambda, fit_residual, axis_gap, pencil_gap) = if degenerate {
                (None, None, None, None)
            } else {
                let fit = fit_grid_set(&f, s)?;
                let res = confocality_residual(&f, &fit)?;
                (
                    Some(lambda_of_fit(&f, &fit)?),
                    Some(fit.residual),
                    Some(res.axis_gap),
                    Some(res.pencil_gap),
                )
            };
            set_json.push(GridSetJson {
                kind: format!("{:?}", s.kind),
                index: s.index,
                points: s.points.len(),
                at_infinity: s.points.iter().filter(|g| g.position.is_none()).count(),
                lambda,
                fit_residual,
                axis_gap,
                pencil_gap,
                degenerate_axis_member: degenerate,
            });
        }
        let mut equivalences = Vec::new();
        for kind in [SetKind::P, SetKind::Q] {
            let group: Vec<&GridSet> = sets
                .iter()
                .filter(|s| s.kind == kind && !radial_set_is_degenerate(&f, s))
                .collect();
            for (ia, a) in group.iter().enumerate() {
                for b in group.iter().skip(ia + 1) {
                    let gap = if f.is_circle() {
                        None
                    } else {
                        Some(equivalence_gap(&f, a, b)?)
                    };
                    equivalences.push(EquivalenceJson {
                        kind: format!("{kind:?}"),
                        index_a: a.index,
                        index_b: b.index,
                        gap,
                    });
                }
            }
        }
        let mut distinct: Vec<(u32, u32)> = Vec::new();
        for s in &sets {
            for g in &s.points {
                let key = (g.i.min(g.j), g.i.max(g.j));
                if !distinct.contains(&key) {
                    distinct.push(key);
                }
            }
        }
        let json = GridJson {
            a1sq: cfg.a1sq,
            a2sq: cfg.a2sq,
            lambda_gamma: cfg.lambda_gamma,
            lambda_caustic: poly.lambda_caustic,
            n: cfg.n,
            k: cfg.k,
            x0: cfg.x0,
            distinct_points: distinct.len(),
            sets: set_json,
            equivalences,
        };
        let text = serde_json::to_string_pretty(&json).expect("grid json serializes");
        write_atomic(&cfg.out_dir.join("grid.json"), &(text + "\n"))?;
    }

    if cfg.formats.contains(&Format::Svg) {
        let (e1, e2) = f.conic(cfg.lambda_gamma)?.semi_axes_sq();
        let mut svg = SvgCanvas::centered(e1.sqrt(), e2.sqrt());
        let (c1, c2) = f.conic(poly.lambda_caustic)?.semi_axes_sq();
        svg.ellipse(e1.sqrt(), e2.sqrt(), "#222222", e1.sqrt() / 220.0);
        svg.ellipse(c1.sqrt(), c2.sqrt(), "#888888", e1.sqrt() / 300.0);
        for line in &poly.side_lines {
            svg.line_clipped(line.phi(), line.p(), "#bbbbbb", e1.sqrt() / 400.0);
        }
        for s in sets.iter().filter(|s| s.kind == SetKind::P) {
            let color = PALETTE[s.index as usize % PALETTE.len()];
            for g in &s.points {
                if let Some(p) = g.position {
                    svg.circle(p, e1.sqrt() / 90.0, color);
                }
            }
        }
        write_atomic(&cfg.out_dir.join("grid.svg"), &svg.finish())?;
    }
    Ok(())
}

// ── portrait ────────────────────────────────────────────────────────────

pub fn cmd_portrait(cfg: &RunConfig) -> Result<(), CmdError> {
    let f = family(cfg)?;
    let lambdas = if cfg.lambdas.is_empty() {
        default_portrait_lambdas(&f, cfg.lambda_gamma)
    } else {
        cfg.lambdas.clone()
    };
    let curves = phase_portrait(&f, cfg.lambda_gamma, &lambdas, cfg.samples)?;

    if cfg.formats.contains(&Format::Csv) {
        let mut csv = String::from("lambda,branch,phi,p\n");
        for curve in &curves {
            for (branch, pts) in [("upper", &curve.upper), ("lower", &curve.lower)] {
                for (phi, p) in pts.iter() {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{}",
                        fmt_f64(curve.lambda),
                        branch,
                        fmt_f64(*phi),
                        fmt_f64(*p)
                    );
                }
            }
        }
        write_atomic(&cfg.out_dir.join("portrait.csv"), &csv)?;
    }

    if cfg.formats.contains(&Format::Svg) {
        let boundary = f.conic(cfg.lambda_gamma)?;
        let p_max = boundary.support(0.0)?.max(boundary.support(std::f64::consts::FRAC_PI_2)?);
        let mut svg = SvgCanvas::centered(std::f64::consts::TAU / 2.0, p_max);
        let step = std::f64::consts::TAU / cfg.samples as f64;
        for (idx, curve) in curves.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            for pts in [&curve.upper, &curve.lower] {
                // split at sampling gaps so hyperbola-caustic arcs stay arcs
                let mut run: Vec<(f64, f64)> = Vec::new();
                for &(phi, p) in pts.iter() {
                    let shifted = phi - std::f64::consts::PI;
                    if let Some(&(prev, _)) = run.last() {
                        if shifted - prev > 1.5 * step {
                            svg.polyline(&run, color, p_max / 180.0);
                            run.clear();
                        }
                    }
                    run.push((shifted, p));
                }
                svg.polyline(&run, color, p_max / 180.0);
            }
        }
        write_atomic(&cfg.out_dir.join("portrait.svg"), &svg.finish())?;
    }
    Ok(())
}

fn default_portrait_lambdas(f: &ConfocalFamily, lambda_gamma: f64) -> Vec<f64> {
    let span_e = lambda_gamma + f.a2_sq();
    let mut out = Vec::new();
    // hyperbola caustics and the focal separatrix exist only with distinct
    // foci; a circle family is foliated by ellipse caustics alone
    if !f.is_circle() {
        for frac in [0.6, 0.25] {
            out.push(-f.a2_sq() - frac * (f.a1_sq() - f.a2_sq()));
        }
        out.push(-f.a2_sq());
    }
    for frac in [0.15, 0.4, 0.65, 0.9] {
        out.push(-f.a2_sq() + frac * span_e);
    }
    out
}

// ── rotnum / string ─────────────────────────────────────────────────────

pub fn cmd_rotnum(cfg: &RunConfig) -> Result<String, CmdError> {
    let f = family(cfg)?;
    let lambda_caustic = match cfg.lambda_caustic {
        Some(l) => l,
        None => find_caustic_with_resolution(&f, cfg.lambda_gamma, cfg.k, cfg.n, cfg.resolution)?,
    };
    let c = rotation_number_with_resolution(&f, lambda_caustic, cfg.lambda_gamma, cfg.resolution)?;
    Ok(format!(
        "lambda_caustic = {}\nc = {}\nspread = {:.3e}\n",
        fmt_f64(lambda_caustic),
        fmt_f64(c.value),
        c.spread
    ))
}

pub fn cmd_string(cfg: &RunConfig) -> Result<String, CmdError> {
    let f = family(cfg)?;
    let lambda_caustic = match cfg.lambda_caustic {
        Some(l) => l,
        None => find_caustic_with_resolution(&f, cfg.lambda_gamma, cfg.k, cfg.n, cfg.resolution)?,
    };
    let length = string_length(&f, lambda_caustic, cfg.lambda_gamma)?;
    let pts = string_curve(&f, lambda_caustic, length, cfg.samples)?;
    let mut csv = String::from("x1,x2\n");
    for p in &pts {
        let _ = writeln!(csv, "{},{}", fmt_f64(p.x1), fmt_f64(p.x2));
    }
    write_atomic(&cfg.out_dir.join("string.csv"), &csv)?;
    Ok(format!(
        "lambda_caustic = {}\nstring_length = {}\npoints = {}\n",
        fmt_f64(lambda_caustic),
        fmt_f64(length),
        pts.len()
    ))
}

// ── verify ──────────────────────────────────────────────────────────────

pub fn cmd_verify(cfg: &RunConfig) -> Result<(VerificationReport, String), CmdError> {
    let ctx = CheckContext::new(cfg.clone())?;
    let report = VerificationReport::new(run_all(&ctx));
    if cfg.formats.contains(&Format::Json) {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        write_atomic(&cfg.out_dir.join("verify_report.json"), &(text + "\n"))?;
    }
    let table = report.render_table();
    Ok((report, table))
}
