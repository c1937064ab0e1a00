//! Configuration, end-to-end runs, JSON reports, slice plots and sweeps.

mod config;
mod json;
mod plot;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::criterion::GeodesicProblem;
use crate::error::{Error, Result};
use crate::solvers::{
    degenerate_at,
    case1_support_points, default_hyperplane, enumerate_rays, theorem_audit,
    variational_critical_points, AuditVerdict, CriticalKind, CriticalPoint, GeodesicRay,
    KillingSummary, RayKind, SolveReport, SupportPoints, SOUNDNESS_TOL,
};

pub use config::{
    parse_config, AlgebraEcho, ConfigError, Diagnostic, DiagnosticKind, Family, ProblemConfig,
    SliceSpec, DEFAULT_RESOLUTION,
};
pub use json::{to_json_compact, to_json_pretty};
pub use plot::{render_slice, BlueBranch, PlotData, RedRay, SvgPlot};
pub use sweep::{run_audit_sweep, sample_trial, SweepSummary, SweepTrial};

pub const REPORT_VERSION: &str = "hgeo-report/1";

/// Which of the two constructions complemented the enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Flat Killing form: support points of a hyperplane containing `[m, m]`.
    SupportPoints,
    /// Critical points of `K(z,z)/F²(z)` on the indicatrix.
    Variational,
    /// `K(z,z)/F²(z)` is constant, so every direction is critical.
    Plateau,
}

/// Everything `solve` writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub algebra: AlgebraEcho,
    pub killing: KillingSummary,
    pub rays: Vec<GeodesicRay>,
    pub continuum_detected: bool,
    pub audit: AuditVerdict,
    pub construction: Construction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_points: Option<SupportPoints>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub critical_points: Vec<CriticalPoint>,
    pub stats: crate::solvers::SolveStats,
}

impl RunReport {
    pub fn solve_report(&self) -> SolveReport {
        SolveReport {
            rays: self.rays.clone(),
            continuum_detected: self.continuum_detected,
            killing: self.killing.clone(),
            audit: self.audit.clone(),
            stats: self.stats.clone(),
        }
    }
}

/// Enumerates rays, adds the support-point or variational rays depending on
/// the Killing form, and audits the merged list.
pub fn run_solve(cfg: &ProblemConfig) -> Result<RunReport> {
    let problem = cfg.problem()?;
    solve_problem(cfg, &problem)
}

pub(crate) fn solve_problem(cfg: &ProblemConfig, problem: &GeodesicProblem) -> Result<RunReport> {
    let mut report = enumerate_rays(problem, &cfg.solve)?;
    let mut support_points = None;
    let mut critical_points = Vec::new();
    let construction = if problem.killing().signature().is_flat() {
        let hyperplane = match &cfg.case1_hyperplane {
            Some(w) => w.clone(),
            None => default_hyperplane(problem)?,
        };
        let points = case1_support_points(problem, &hyperplane, &cfg.solve)?;
        report.merge_rays(problem, points.rays(problem)?, cfg.solve.dedup_angle);
        support_points = Some(points);
        Construction::SupportPoints
    } else {
        let found = variational_critical_points(problem, &cfg.solve)?;
        if found.plateau {
            Construction::Plateau
        } else {
            let continuum = report.continuum_detected;
            let extra = found.points.iter().map(|p| {
                let mut ray = p.ray.clone();
                if continuum
                    && (p.kind == CriticalKind::Degenerate
                        || (!problem.has_isotropy() && degenerate_at(problem, &ray.direction())))
                {
                    ray.kind = RayKind::ContinuumMember;
                }
                ray
            });
            report.merge_rays(problem, extra, cfg.solve.dedup_angle);
            critical_points = found.points;
            Construction::Variational
        }
    };
    Ok(RunReport {
        version: REPORT_VERSION.to_string(),
        algebra: cfg.echo(),
        killing: report.killing,
        rays: report.rays,
        continuum_detected: report.continuum_detected,
        audit: report.audit,
        construction,
        support_points,
        critical_points,
        stats: report.stats,
    })
}

/// Killing form data without solving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub version: String,
    pub algebra: AlgebraEcho,
    pub killing: KillingSummary,
    pub required_minimum: usize,
    pub construction: Construction,
    pub randers_reversible: bool,
}

pub fn run_analyze(cfg: &ProblemConfig) -> Result<AnalyzeReport> {
    let problem = cfg.problem()?;
    let signature = problem.killing().signature();
    Ok(AnalyzeReport {
        version: REPORT_VERSION.to_string(),
        algebra: cfg.echo(),
        killing: KillingSummary::of(&problem),
        required_minimum: if signature.is_indefinite() { 4 } else { 2 },
        construction: if signature.is_flat() {
            Construction::SupportPoints
        } else {
            Construction::Variational
        },
        randers_reversible: problem.randers().is_reversible(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub rays_checked: usize,
    pub max_residual: f64,
    /// Indices of rays whose residual is not below the soundness tolerance
    /// or whose point is off the indicatrix.
    pub failed_rays: Vec<usize>,
    /// The stored audit agrees with one recomputed from the stored rays.
    pub audit_consistent: bool,
    pub audit_pass: bool,
    pub pass: bool,
}

/// Re-evaluates every stored ray against the configuration, independently
/// of the solver that produced it.
pub fn verify_report(report: &RunReport, cfg: &ProblemConfig) -> Result<VerifyOutcome> {
    if report.version != REPORT_VERSION {
        return Err(Error::Unsupported(format!(
            "report version {:?}, expected {REPORT_VERSION:?}",
            report.version
        )));
    }
    let problem = cfg.problem()?;
    let mut max_residual: f64 = 0.0;
    let mut failed_rays = Vec::new();
    for (i, ray) in report.rays.iter().enumerate() {
        let x = ray.direction();
        if x.len() != problem.dim_m() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim_m(),
                got: x.len(),
            });
        }
        let residual = match &ray.h_part {
            Some(h) if problem.has_isotropy() => {
                let hv = nalgebra::DVector::from_column_slice(h);
                let y = problem.embed_m(&x) + problem.decomposition().h_basis() * hv;
                problem.general_residual(&y)?.norm
            }
            _ => problem.residual_m(&x)?.norm,
        };
        max_residual = max_residual.max(residual);
        let on_indicatrix = (problem.randers().norm(&x) - 1.0).abs() < 1e-9;
        if !(residual < SOUNDNESS_TOL) || !on_indicatrix {
            failed_rays.push(i);
        }
    }
    let recomputed = theorem_audit(&problem, &report.solve_report());
    let audit_consistent = recomputed == report.audit;
    Ok(VerifyOutcome {
        rays_checked: report.rays.len(),
        max_residual,
        audit_pass: recomputed.pass,
        pass: failed_rays.is_empty() && audit_consistent && recomputed.pass,
        failed_rays,
        audit_consistent,
    })
}
