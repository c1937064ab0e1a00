//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits nonzero if any fails.
//!
//! Reference values come from closed forms written out below, independent of
//! the library's residual and bracket code.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hgeo::report::{parse_config, render_slice, run_audit_sweep, Family};
use hgeo::solvers::{
    case1_support_points, enumerate_rays, variational_critical_points, RayCount, SolveConfig,
    SolveReport,
};
use hgeo::{GeodesicProblem, LieAlgebra, RandersStructure, Signature};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = fn() -> Result<String, String>;

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || {
        format!("took {:.2} s, limit {limit} s", elapsed.as_secs_f64())
    })
}

fn angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let a = a / a.norm();
    let b = b / b.norm();
    2.0 * (0.5 * (a - b).norm()).min(1.0).asin()
}

#[derive(Clone, Copy, PartialEq)]
enum Fam {
    So3,
    Sl2,
}

/// `[x, y]` for the three-parameter families, written out by hand.
fn bracket(f: Fam, (a, b, c): (f64, f64, f64), x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
    let e1 = c * (x[1] * y[2] - x[2] * y[1]);
    let m13 = x[0] * y[2] - x[2] * y[0];
    let e2 = match f {
        Fam::So3 => -b * m13,
        Fam::Sl2 => b * m13,
    };
    let e3 = a * (x[0] * y[1] - x[1] * y[0]);
    [e1, e2, e3]
}

/// `(x + |x| V) · [x, E_i]` for `α = I`.
fn oracle_residual(f: Fam, p: (f64, f64, f64), drift: &[f64; 3], x: &[f64; 3]) -> [f64; 3] {
    let s = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let u = [x[0] + s * drift[0], x[1] + s * drift[1], x[2] + s * drift[2]];
    let mut r = [0.0; 3];
    for (i, ri) in r.iter_mut().enumerate() {
        let mut e = [0.0; 3];
        e[i] = 1.0;
        let b = bracket(f, p, x, &e);
        *ri = u[0] * b[0] + u[1] * b[1] + u[2] * b[2];
    }
    r
}

fn norm3(r: [f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

struct Fixture {
    fam: Fam,
    params: (f64, f64, f64),
    drift: [f64; 3],
    expected: Vec<DVector<f64>>,
}

fn fixtures() -> Vec<Fixture> {
    let r3 = 3f64.sqrt() / 2.0;
    let r15 = 15f64.sqrt() / 4.0;
    vec![
        Fixture {
            fam: Fam::So3,
            params: (1.0, 2.0, 1.0),
            drift: [0.5, 0.0, 0.0],
            expected: vec![v(&[1.0, 0.0, 0.0]), v(&[-1.0, 0.0, 0.0]), v(&[0.5, r3, 0.0]), v(&[0.5, -r3, 0.0])],
        },
        Fixture {
            fam: Fam::So3,
            params: (2.0, 2.0, 3.0),
            drift: [0.5, 0.0, 0.0],
            expected: vec![v(&[1.0, 0.0, 0.0]), v(&[-1.0, 0.0, 0.0])],
        },
        Fixture {
            fam: Fam::Sl2,
            params: (1.0, 1.0, 1.0),
            drift: [0.5, 0.0, 0.0],
            expected: vec![
                v(&[1.0, 0.0, 0.0]),
                v(&[-1.0, 0.0, 0.0]),
                v(&[-0.25, r15, 0.0]),
                v(&[-0.25, -r15, 0.0]),
            ],
        },
    ]
}

impl Fixture {
    fn problem(&self) -> GeodesicProblem {
        let (a, b, c) = self.params;
        let algebra = match self.fam {
            Fam::So3 => LieAlgebra::so3(a, b, c),
            Fam::Sl2 => LieAlgebra::sl2(a, b, c),
        };
        GeodesicProblem::on_group(algebra, RandersStructure::with_identity(v(&self.drift)).unwrap())
            .unwrap()
    }
}

/// Each expected direction matched by exactly one ray and vice versa.
fn match_rays(report: &SolveReport, expected: &[DVector<f64>], tol: f64) -> Result<f64, String> {
    ensure(report.rays.len() == expected.len(), || {
        format!("{} rays, expected {}", report.rays.len(), expected.len())
    })?;
    let mut worst: f64 = 0.0;
    for e in expected {
        let best = report
            .rays
            .iter()
            .map(|r| angle(&r.direction(), e))
            .fold(f64::INFINITY, f64::min);
        ensure(best < tol, || format!("no ray within {tol:e} of {:?}", e.as_slice()))?;
        worst = worst.max(best);
    }
    Ok(worst)
}

fn killing_exactness() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (a, b, c) = (
            rng.random_range(0.2..5.0),
            rng.random_range(0.2..5.0),
            rng.random_range(0.2..5.0),
        );
        let so3 = LieAlgebra::so3(a, b, c).killing_matrix();
        let sl2 = LieAlgebra::sl2(a, b, c).killing_matrix();
        let want_so3 = [-2.0 * a * b, -2.0 * a * c, -2.0 * b * c];
        let want_sl2 = [2.0 * a * b, -2.0 * a * c, 2.0 * b * c];
        for i in 0..3 {
            for j in 0..3 {
                let (ds, dl) = if i == j { (want_so3[i], want_sl2[i]) } else { (0.0, 0.0) };
                worst = worst.max((so3[(i, j)] - ds).abs()).max((sl2[(i, j)] - dl).abs());
            }
        }
    }
    ensure(worst < 1e-10, || format!("max deviation {worst:e}"))?;
    within(start.elapsed(), 1.0)?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn fixture_rays(index: usize, limit: Option<f64>) -> Result<String, String> {
    let f = &fixtures()[index];
    let start = Instant::now();
    let report = enumerate_rays(&f.problem(), &SolveConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let worst = match_rays(&report, &f.expected, 1e-8)?;
    if let Some(limit) = limit {
        within(elapsed, limit)?;
    }
    Ok(format!(
        "{} rays, worst angle {worst:.1e}, {:.2} s",
        report.rays.len(),
        elapsed.as_secs_f64()
    ))
}

fn fixture_a() -> Result<String, String> {
    fixture_rays(0, Some(2.0))
}

fn fixture_b() -> Result<String, String> {
    fixture_rays(1, None)
}

fn fixture_indefinite() -> Result<String, String> {
    let msg = fixture_rays(2, None)?;
    let f = &fixtures()[2];
    let report = enumerate_rays(&f.problem(), &SolveConfig::default()).map_err(|e| e.to_string())?;
    let a = &report.audit;
    ensure(a.signature == Signature { p: 2, q: 1, k: 0 }, || format!("signature {}", a.signature))?;
    ensure(a.required_minimum == 4 && a.pass, || format!("audit {a:?}"))?;
    Ok(format!("{msg}, signature {}", a.signature))
}

fn continuum() -> Result<String, String> {
    let p = GeodesicProblem::on_group(LieAlgebra::so3(1.0, 1.0, 1.0), RandersStructure::euclidean(3))
        .unwrap();
    let report = enumerate_rays(&p, &SolveConfig::default()).map_err(|e| e.to_string())?;
    ensure(report.continuum_detected, || "no continuum detected".into())?;
    ensure(report.audit.count == RayCount::Infinite, || "count is finite".into())?;
    Ok(format!("{} distinct degenerate rays", report.stats.degenerate_distinct))
}

/// Local minimum of the oracle residual on the unit sphere by compass search.
fn pattern_search(residual: &impl Fn(&[f64; 3]) -> f64, mut x: [f64; 3]) -> ([f64; 3], f64) {
    let mut best = residual(&x);
    let mut step = 0.01;
    while step > 1e-13 {
        let mut improved = false;
        // tangent basis at x
        let n = DVector::from_row_slice(&x);
        let helper = if x[0].abs() < 0.9 { v(&[1.0, 0.0, 0.0]) } else { v(&[0.0, 1.0, 0.0]) };
        let t1 = (&helper - &n * n.dot(&helper)).normalize();
        let t2 = n.cross(&t1);
        for t in [&t1, &t2] {
            for sign in [1.0, -1.0] {
                let y = (&n + t * (sign * step)).normalize();
                let y = [y[0], y[1], y[2]];
                let r = residual(&y);
                if r < best {
                    best = r;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, best)
}

fn oracle_equivalence() -> Result<String, String> {
    let start = Instant::now();
    const SAMPLES: usize = 500_000;
    let mut summary = Vec::new();
    for (idx, f) in fixtures().iter().enumerate() {
        let residual = |x: &[f64; 3]| norm3(oracle_residual(f.fam, f.params, &f.drift, x));
        let mut rng = ChaCha8Rng::seed_from_u64(100 + idx as u64);
        let mut candidates: Vec<([f64; 3], f64)> = Vec::new();
        for _ in 0..SAMPLES {
            let g: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let n = norm3(g);
            let x = g.map(|c| c / n);
            let r = residual(&x);
            if r < 0.02 {
                candidates.push((x, r));
            }
        }
        // greedy clustering, lowest residual first
        candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut centres: Vec<[f64; 3]> = Vec::new();
        for (x, _) in &candidates {
            let xv = v(x);
            if centres.iter().all(|c| angle(&v(c), &xv) > 0.05) {
                centres.push(*x);
            }
        }
        let mut roots: Vec<DVector<f64>> = Vec::new();
        for c in centres {
            let (x, r) = pattern_search(&residual, c);
            let xv = v(&x);
            if r < 1e-9 && roots.iter().all(|q| angle(q, &xv) > 1e-3) {
                roots.push(xv);
            }
        }
        let report = enumerate_rays(&f.problem(), &SolveConfig::default()).map_err(|e| e.to_string())?;
        for root in &roots {
            let best = report.rays.iter().map(|r| angle(&r.direction(), root)).fold(f64::INFINITY, f64::min);
            ensure(best <= 1e-3, || format!("fixture {idx}: oracle root {:?} not enumerated", root.as_slice()))?;
        }
        for ray in &report.rays {
            let best = roots.iter().map(|q| angle(q, &ray.direction())).fold(f64::INFINITY, f64::min);
            ensure(best <= 1e-3, || format!("fixture {idx}: ray {:?} missed by oracle", ray.y.y))?;
        }
        summary.push(roots.len().to_string());
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("oracle roots {}, {:.1} s", summary.join("/"), start.elapsed().as_secs_f64()))
}

/// `g_y(y, w)` for `α = I` from the closed form `F(y) (y/|y| + V) · w`.
fn oracle_fundamental(drift: &[f64; 3], y: &DVector<f64>, w: &DVector<f64>) -> f64 {
    let s = y.norm();
    let f = s + v(drift).dot(y);
    f * (y / s + v(drift)).dot(w)
}

fn killing_form(f: Fam, (a, b, c): (f64, f64, f64), x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let d = match f {
        Fam::So3 => [-2.0 * a * b, -2.0 * a * c, -2.0 * b * c],
        Fam::Sl2 => [2.0 * a * b, -2.0 * a * c, 2.0 * b * c],
    };
    d[0] * x[0] * y[0] + d[1] * x[1] * y[1] + d[2] * x[2] * y[2]
}

fn variational_agreement() -> Result<String, String> {
    let mut counts = Vec::new();
    for (idx, f) in fixtures().iter().enumerate() {
        let p = f.problem();
        let cfg = SolveConfig::default();
        let report = enumerate_rays(&p, &cfg).map_err(|e| e.to_string())?;
        let found = variational_critical_points(&p, &cfg).map_err(|e| e.to_string())?;
        for ray in &report.rays {
            let best = found
                .points
                .iter()
                .map(|c| angle(&c.ray.direction(), &ray.direction()))
                .fold(f64::INFINITY, f64::min);
            ensure(best < 1e-6, || format!("fixture {idx}: ray {:?} not critical", ray.y.y))?;
        }
        for c in &found.points {
            let y = c.ray.direction();
            let lambda = killing_form(f.fam, f.params, &y, &y);
            for i in 0..3 {
                let mut w = DVector::zeros(3);
                w[i] = 1.0;
                let gap = (killing_form(f.fam, f.params, &y, &w) - lambda * oracle_fundamental(&f.drift, &y, &w)).abs();
                ensure(gap < 1e-8 * (1.0 + lambda.abs()), || {
                    format!("fixture {idx}: multiplier residual {gap:e}")
                })?;
            }
        }
        counts.push(format!("{}", found.points.len()));
    }
    Ok(format!("critical points {}", counts.join("/")))
}

fn case1() -> Result<String, String> {
    let p = GeodesicProblem::on_group(
        LieAlgebra::heisenberg(),
        RandersStructure::with_identity(v(&[0.5, 0.0, 0.0])).unwrap(),
    )
    .unwrap();
    let w = [v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])];
    let s = case1_support_points(&p, &w, &SolveConfig::default()).map_err(|e| e.to_string())?;
    let e1 = (s.n1() - v(&[2.0 / 3.0, 0.0, 0.0])).amax();
    let e2 = (s.n2() - v(&[-2.0, 0.0, 0.0])).amax();
    ensure(e1 < 1e-10 && e2 < 1e-10, || format!("errors {e1:e}, {e2:e}"))?;
    // [x, E1] = -x2 E3, [x, E2] = x1 E3, [x, E3] = 0, and V has no E3 part
    for n in [s.n1(), s.n2()] {
        let u3 = n[2];
        let r = (u3 * n[1]).abs().max((u3 * n[0]).abs());
        ensure(r < 1e-10, || format!("oracle residual {r:e}"))?;
    }
    ensure(s.residual_n1 < 1e-10 && s.residual_n2 < 1e-10, || "library residual too large".into())?;
    ensure((s.n1() + s.n2()).norm() > 1e-3, || "n1 = -n2".into())?;
    Ok(format!("max error {:.1e}", e1.max(e2)))
}

fn sweep() -> Result<String, String> {
    let start = Instant::now();
    let mut parts = Vec::new();
    for (family, min) in [(Family::So3, 2), (Family::Sl2, 4), (Family::Heisenberg, 2)] {
        let s = run_audit_sweep(family, 100, 42, &SolveConfig::default()).map_err(|e| e.to_string())?;
        ensure(s.failures.is_empty(), || format!("{}: failures {:?}", family.name(), s.failures))?;
        ensure(s.min_count.at_least(min), || format!("{}: min count {}", family.name(), s.min_count))?;
        parts.push(format!("{} min {}", family.name(), s.min_count));
    }
    within(start.elapsed(), 180.0)?;
    Ok(format!("{}, {:.0} s", parts.join(", "), start.elapsed().as_secs_f64()))
}

fn hygiene() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_fd: f64 = 0.0;
    let mut worst_euler: f64 = 0.0;
    for _ in 0..1000 {
        let mut drift: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let scale = rng.random_range(0.0..0.9) / norm3(drift);
        drift = drift.map(|c| c * scale);
        let r = RandersStructure::with_identity(v(&drift)).unwrap();
        let y = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let h = 1e-5;
        let fd = (r.norm(&(&y + &w * h)).powi(2) - r.norm(&(&y - &w * h)).powi(2)) / (4.0 * h);
        let g = r.fundamental_directional(&y, &w).unwrap();
        let denom = g.abs().max(r.norm(&y) * w.norm());
        worst_fd = worst_fd.max((g - fd).abs() / denom);
        let f2 = r.norm(&y).powi(2);
        worst_euler = worst_euler.max((r.fundamental_directional(&y, &y).unwrap() - f2).abs() / f2);
    }
    ensure(worst_fd < 1e-6, || format!("finite difference error {worst_fd:e}"))?;
    ensure(worst_euler < 1e-10, || format!("Euler identity error {worst_euler:e}"))?;
    Ok(format!("fd {worst_fd:.1e}, euler {worst_euler:.1e}"))
}

fn plots() -> Result<String, String> {
    let configs = [
        ("[algebra]\nfamily = \"so3\"\na = 0.5\nb = 0.5\nc = 3\n", Fam::So3, (0.5, 0.5, 3.0), [0.0; 3]),
        (
            "[algebra]\nfamily = \"sl2\"\na = 1\nb = 1\nc = 1\n[metric]\nv = [0.5, 0, 0]\n",
            Fam::Sl2,
            (1.0, 1.0, 1.0),
            [0.5, 0.0, 0.0],
        ),
    ];
    let mut parts = Vec::new();
    for (text, fam, params, drift) in configs {
        let cfg = parse_config(text).map_err(|e| e.to_string())?;
        let plane = cfg.slice.clone().ok_or("no plane")?;
        let plot = render_slice(&cfg, &plane).map_err(|e| e.to_string())?;
        let d = &plot.data;
        for p in &d.green {
            let z = d.lift(*p);
            let f = z.norm() + v(&drift).dot(&z);
            ensure((f - 1.0).abs() < 1e-9, || format!("green point with F = {f}"))?;
        }
        for branch in &d.blue {
            for seg in &branch.segments {
                for p in seg {
                    let z = d.lift(*p);
                    let k = killing_form(fam, params, &z, &z);
                    ensure((k - branch.level).abs() < 1e-9, || format!("blue point with K = {k}"))?;
                }
            }
        }
        // red rays are exactly the in-plane rays of the report, each a true root
        let in_plane: Vec<&hgeo::solvers::GeodesicRay> =
            plot.report.rays.iter().filter(|r| r.y.y[2].abs() <= 1e-7 * r.direction().norm()).collect();
        ensure(in_plane.len() == d.red.len(), || format!("{} in-plane rays, {} red", in_plane.len(), d.red.len()))?;
        for red in &d.red {
            let y = v(&red.y);
            ensure(in_plane.iter().any(|r| angle(&r.direction(), &y) < 1e-12), || "phantom red ray".into())?;
            let r = norm3(oracle_residual(fam, params, &drift, &[y[0], y[1], y[2]]));
            ensure(r < 1e-9, || format!("red ray residual {r:e}"))?;
        }
        // every in-plane solution on a fine circle scan is drawn
        let n = 20_000;
        let residual = |t: f64| norm3(oracle_residual(fam, params, &drift, &[t.cos(), t.sin(), 0.0]));
        let mut roots = 0;
        for i in 0..n {
            let t = 2.0 * PI * i as f64 / n as f64;
            let h = 2.0 * PI / n as f64;
            let (a, b, c) = (residual(t - h), residual(t), residual(t + h));
            if b <= a && b < c && b < 1e-3 {
                roots += 1;
                let dir = v(&[t.cos(), t.sin(), 0.0]);
                ensure(d.red.iter().any(|r| angle(&v(&r.y), &dir) < 2.0 * h), || format!("in-plane root at {t} not drawn"))?;
            }
        }
        ensure(roots == d.red.len(), || format!("{roots} scan roots, {} red rays", d.red.len()))?;
        parts.push(format!("{} red", d.red.len()));
    }
    Ok(parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 11] = [
        ("Killing form exactness", killing_exactness),
        ("definite fixture with four rays", fixture_a),
        ("definite fixture with two rays", fixture_b),
        ("indefinite fixture", fixture_indefinite),
        ("continuum detection", continuum),
        ("brute-force oracle equivalence", oracle_equivalence),
        ("variational agreement", variational_agreement),
        ("flat Killing form support points", case1),
        ("lower-bound sweep", sweep),
        ("numerical hygiene", hygiene),
        ("plot correctness", plots),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Err(format!("panicked: {msg}"))
            });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail}) [{secs:.2} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
