//! Slice plots: the indicatrix, the Killing spheres and the geodesic rays in
//! a plane through the origin of `m`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::config::{ProblemConfig, SliceSpec};
use super::{solve_problem, RunReport};
use crate::criterion::GeodesicProblem;
use crate::error::{Error, Result};
use crate::solvers::{degenerate_at, GeodesicRay, RayKind, SOUNDNESS_TOL};

const SIZE: f64 = 800.0;
const MARGIN: f64 = 20.0;
/// Blue branches stop this many extents from the origin.
const CLIP: f64 = 1.5;
/// Rays are in the plane when their off-plane part is below this fraction.
const IN_PLANE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlueBranch {
    /// `+1` or `-1`: the branch is `K(z, z) = level`.
    pub level: f64,
    pub segments: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedRay {
    /// Point with `F = 1` in `m`-coordinates.
    pub y: Vec<f64>,
    /// Its coordinates along the plane axes.
    pub plane: [f64; 2],
    pub kind: RayKind,
}

/// Sampled geometry, in plane coordinates along `axes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub axes: [Vec<f64>; 2],
    pub extent: f64,
    pub green: Vec<[f64; 2]>,
    pub blue: Vec<BlueBranch>,
    pub red: Vec<RedRay>,
    pub warnings: Vec<String>,
}

impl PlotData {
    /// The `m`-vector with plane coordinates `p`.
    pub fn lift(&self, p: [f64; 2]) -> DVector<f64> {
        DVector::from_column_slice(&self.axes[0]) * p[0] + DVector::from_column_slice(&self.axes[1]) * p[1]
    }
}

#[derive(Debug, Clone)]
pub struct SvgPlot {
    pub svg: String,
    pub data: PlotData,
    /// The solve report, including rays found by the in-plane search.
    pub report: RunReport,
}

/// Solves the configuration and draws the slice `plane`.
pub fn render_slice(cfg: &ProblemConfig, plane: &SliceSpec) -> Result<SvgPlot> {
    let problem = cfg.problem()?;
    let n = problem.dim_m();
    for axis in &plane.axes {
        crate::error::check_len(n, axis.len())?;
    }
    let u = plane.axis(0);
    let w = plane.axis(1);
    if (u.norm() - 1.0).abs() > 1e-9 || (w.norm() - 1.0).abs() > 1e-9 || u.dot(&w).abs() > 1e-9 {
        return Err(Error::Unsupported("plane axes must be orthonormal".into()));
    }
    if plane.resolution < 8 {
        return Err(Error::Unsupported("plot resolution must be at least 8".into()));
    }
    let mut report = solve_problem(cfg, &problem)?;
    let mut warnings = Vec::new();
    if problem.has_isotropy() {
        warnings.push("nontrivial isotropy: only enumerated rays are drawn".to_string());
    } else {
        let extra = plane_rays(&problem, &report, &u, &w, plane.resolution, &mut warnings);
        if !extra.is_empty() {
            let mut solve = report.solve_report();
            solve.merge_rays(&problem, extra, cfg.solve.dedup_angle);
            report.rays = solve.rays;
            report.audit = solve.audit;
        }
    }

    let green = green_curve(&problem, &u, &w, plane.resolution);
    let radius = green.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    let extent = plane.extent.unwrap_or_else(|| (1.2 * radius).max(2.0));

    let q = DMatrix::from_columns(&[u.clone(), w.clone()]);
    let q = q.transpose() * problem.killing().matrix() * &q;
    let blue = if q.amax() <= problem.killing().null_tol() {
        warnings.push(format!(
            "the Killing form vanishes on the plane {}; no Killing sphere to draw",
            plane.label
        ));
        Vec::new()
    } else {
        blue_branches(&q, plane.resolution.max(720) * 2, CLIP * extent)
    };

    let red = report
        .rays
        .iter()
        .filter_map(|r| {
            let y = r.direction();
            let p = [u.dot(&y), w.dot(&y)];
            let off = (&y - &u * p[0] - &w * p[1]).norm();
            (off <= IN_PLANE * y.norm() && p[0].hypot(p[1]) > 1e-8).then(|| RedRay {
                y: y.iter().copied().collect(),
                plane: p,
                kind: r.kind,
            })
        })
        .collect();

    let data = PlotData {
        axes: plane.axes.clone(),
        extent,
        green,
        blue,
        red,
        warnings,
    };
    let svg = to_svg(&data, &plane.label, &report);
    Ok(SvgPlot { svg, data, report })
}

fn direction(u: &DVector<f64>, w: &DVector<f64>, theta: f64) -> DVector<f64> {
    u * theta.cos() + w * theta.sin()
}

fn green_curve(problem: &GeodesicProblem, u: &DVector<f64>, w: &DVector<f64>, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / n as f64;
            let f = problem.randers().norm(&direction(u, w, theta));
            [theta.cos() / f, theta.sin() / f]
        })
        .collect()
}

fn blue_branches(q: &DMatrix<f64>, n: usize, clip: f64) -> Vec<BlueBranch> {
    let tol = 1e-12 * q.amax();
    let mut out = Vec::new();
    for level in [1.0, -1.0] {
        let mut segments: Vec<Vec<[f64; 2]>> = Vec::new();
        let mut current: Vec<[f64; 2]> = Vec::new();
        let mut first_open = false;
        for i in 0..n {
            let theta = 2.0 * PI * i as f64 / n as f64;
            let (c, s) = (theta.cos(), theta.sin());
            let value = level * (q[(0, 0)] * c * c + 2.0 * q[(0, 1)] * c * s + q[(1, 1)] * s * s);
            let r = if value > tol { 1.0 / value.sqrt() } else { f64::INFINITY };
            if r <= clip {
                if i == 0 {
                    first_open = true;
                }
                current.push([r * c, r * s]);
            } else if !current.is_empty() {
                segments.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            if current.len() == n {
                // closed curve
                let start = current[0];
                current.push(start);
                segments.push(current);
            } else if first_open && !segments.is_empty() {
                current.extend(segments.remove(0));
                segments.insert(0, current);
            } else {
                segments.push(current);
            }
        }
        if !segments.is_empty() {
            out.push(BlueBranch { level, segments });
        }
    }
    out
}

/// Rays in the plane found by a one-parameter search over the unit circle,
/// so that directions inside a continuum still get drawn.
fn plane_rays(
    problem: &GeodesicProblem,
    report: &RunReport,
    u: &DVector<f64>,
    w: &DVector<f64>,
    n: usize,
    warnings: &mut Vec<String>,
) -> Vec<GeodesicRay> {
    let scale = problem.scale();
    let residual = |theta: f64| -> Option<DVector<f64>> {
        let d = direction(u, w, theta);
        let x = &d / problem.randers().alpha_norm(&d);
        problem.randers_residual(&x).ok().map(|r| DVector::from_vec(r.components) / scale)
    };
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / n as f64;
            (theta, residual(theta).map_or(f64::INFINITY, |r| r.norm()))
        })
        .collect();
    let zeros = samples.iter().filter(|(_, r)| *r < 1e-10).count();
    if zeros * 8 > n {
        warnings.push("the plane lies inside a continuum of geodesic rays".to_string());
        return Vec::new();
    }
    let mut found = Vec::new();
    for i in 0..n {
        let (theta, r) = samples[i];
        let prev = samples[(i + n - 1) % n].1;
        let next = samples[(i + 1) % n].1;
        if !(r <= prev && r < next) {
            continue;
        }
        let Some(theta) = refine(&residual, theta) else {
            continue;
        };
        let d = direction(u, w, theta);
        let kind = if report.continuum_detected && degenerate_at(problem, &d) {
            RayKind::ContinuumMember
        } else {
            RayKind::Isolated
        };
        if let Ok(ray) = GeodesicRay::from_vector(problem, &d, kind) {
            if ray.residual_norm < SOUNDNESS_TOL {
                found.push(ray);
            }
        }
    }
    found
}

/// Gauss-Newton in the angle with a central-difference derivative.
fn refine(residual: &impl Fn(f64) -> Option<DVector<f64>>, mut theta: f64) -> Option<f64> {
    let h = 1e-6;
    for _ in 0..60 {
        let r = residual(theta)?;
        if r.norm() < 1e-14 {
            return Some(theta);
        }
        let dr = (residual(theta + h)? - residual(theta - h)?) / (2.0 * h);
        let denom = dr.norm_squared();
        if denom < 1e-24 {
            return None;
        }
        let step = -dr.dot(&r) / denom;
        theta += step.clamp(-0.1, 0.1);
        if step.abs() < 1e-15 {
            break;
        }
    }
    (residual(theta)?.norm() < 1e-11).then_some(theta)
}

fn to_svg(data: &PlotData, label: &str, report: &RunReport) -> String {
    let px = (SIZE / 2.0 - MARGIN) / data.extent;
    let at = |p: [f64; 2]| (SIZE / 2.0 + p[0] * px, SIZE / 2.0 - p[1] * px);
    let points = |pts: &[[f64; 2]]| {
        let mut s = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = at(*p);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.3},{y:.3}");
        }
        s
    };
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="800" height="800" viewBox="0 0 800 800">"#
    );
    let _ = writeln!(svg, "<title>{} slice {}</title>", escape(&report.algebra.label), escape(label));
    let _ = writeln!(svg, r##"<rect id="background" x="0" y="0" width="800" height="800" fill="#ffffff"/>"##);
    let _ = writeln!(svg, r##"<g id="axes" stroke="#c0c0c0" stroke-width="1">"##);
    let _ = writeln!(svg, r#"<line id="axis-1" x1="0" y1="400" x2="800" y2="400"/>"#);
    let _ = writeln!(svg, r#"<line id="axis-2" x1="400" y1="0" x2="400" y2="800"/>"#);
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r##"<g id="blue" fill="none" stroke="#1f4fd1" stroke-width="2">"##);
    for branch in &data.blue {
        let tag = if branch.level > 0.0 { "pos" } else { "neg" };
        for (i, seg) in branch.segments.iter().enumerate() {
            let _ = writeln!(svg, r#"<polyline id="blue-{tag}-{i}" points="{}"/>"#, points(seg));
        }
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r##"<g id="green" fill="none" stroke="#1f9d3a" stroke-width="2">"##);
    let _ = writeln!(svg, r#"<polygon id="green-indicatrix" points="{}"/>"#, points(&data.green));
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r##"<g id="red" stroke="#d11f1f" stroke-width="2" fill="#d11f1f">"##);
    for (i, ray) in data.red.iter().enumerate() {
        let len = ray.plane[0].hypot(ray.plane[1]);
        let end = [ray.plane[0] / len * data.extent, ray.plane[1] / len * data.extent];
        let (x0, y0) = at([0.0, 0.0]);
        let (x1, y1) = at(end);
        let (cx, cy) = at(ray.plane);
        let _ = writeln!(svg, r#"<line id="red-{i}" x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}"/>"#);
        let _ = writeln!(svg, r#"<circle id="red-{i}-point" cx="{cx:.3}" cy="{cy:.3}" r="4"/>"#);
    }
    let _ = writeln!(svg, "</g>");

    for (i, w) in data.warnings.iter().enumerate() {
        let _ = writeln!(
            svg,
            r##"<text id="warning-{i}" x="20" y="{}" font-family="sans-serif" font-size="14" fill="#a05000">{}</text>"##,
            30 + 20 * i,
            escape(w)
        );
    }
    let _ = writeln!(
        svg,
        r##"<text id="caption" x="20" y="780" font-family="sans-serif" font-size="14" fill="#333333">{} | half-width {:.4} | rays {}</text>"##,
        escape(label),
        data.extent,
        report.audit.count
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
