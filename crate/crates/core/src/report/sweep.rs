//! Randomized checks of the lower bound over a family of problems.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Family, ProblemConfig};
use super::run_solve;
use crate::error::{Error, Result};
use crate::solvers::{RayCount, SolveConfig};

/// Largest `α(V, V)` drawn in a sweep.
const DRIFT_BOUND: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrial {
    pub params: [f64; 3],
    pub v: [f64; 3],
}

/// The `index`-th sampled configuration of a sweep: `a, b, c` uniform in
/// `[0.2, 5]`, `V` uniform in the ball `|V|² ≤ 0.8`.
pub fn sample_trial(rng: &mut impl Rng) -> SweepTrial {
    let mut params = [0.0; 3];
    for p in &mut params {
        *p = rng.random_range(0.2..=5.0);
    }
    let g: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt().max(f64::MIN_POSITIVE);
    let radius = DRIFT_BOUND.sqrt() * rng.random::<f64>().cbrt();
    SweepTrial {
        params,
        v: g.map(|x| x / norm * radius),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub family: Family,
    pub trials: usize,
    pub rng_seed: u64,
    pub min_count: RayCount,
    pub max_count: RayCount,
    /// Trial indices whose audit failed.
    pub failures: Vec<usize>,
    /// Ray count (or `infinite`) to number of trials.
    pub distribution: BTreeMap<String, usize>,
    pub required_minimum: BTreeMap<usize, usize>,
    pub elapsed_seconds: f64,
}

fn rank(c: RayCount) -> usize {
    match c {
        RayCount::Finite(n) => n,
        RayCount::Infinite => usize::MAX,
    }
}

/// Solves `trials` random configurations of `family` with `α = I` and
/// collects the audit outcomes.
pub fn run_audit_sweep(
    family: Family,
    trials: usize,
    rng_seed: u64,
    solve: &SolveConfig,
) -> Result<SweepSummary> {
    if trials == 0 {
        return Err(Error::InvalidSolveConfig("a sweep needs at least one trial".into()));
    }
    if family == Family::Custom {
        return Err(Error::Unsupported("sweeps need a parametric family".into()));
    }
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let samples: Vec<SweepTrial> = (0..trials).map(|_| sample_trial(&mut rng)).collect();
    let outcomes: Vec<Result<(RayCount, usize, bool)>> = samples
        .par_iter()
        .map(|t| {
            let cfg = ProblemConfig::family(family, t.params, &t.v, solve.clone())?;
            let report = run_solve(&cfg)?;
            Ok((report.audit.count, report.audit.required_minimum, report.audit.pass))
        })
        .collect();

    let mut failures = Vec::new();
    let mut distribution = BTreeMap::new();
    let mut required_minimum = BTreeMap::new();
    let mut min_count = RayCount::Infinite;
    let mut max_count = RayCount::Finite(0);
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let (count, required, pass) = outcome?;
        if !pass {
            failures.push(i);
        }
        *distribution.entry(count.to_string()).or_insert(0) += 1;
        *required_minimum.entry(required).or_insert(0) += 1;
        if rank(count) < rank(min_count) {
            min_count = count;
        }
        if rank(count) > rank(max_count) {
            max_count = count;
        }
    }
    Ok(SweepSummary {
        family,
        trials,
        rng_seed,
        min_count,
        max_count,
        failures,
        distribution,
        required_minimum,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}
