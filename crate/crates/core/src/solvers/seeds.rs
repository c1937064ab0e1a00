//! Starting directions for the multistart searches.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// `count` quasi-uniform unit vectors in `R^dim`.
///
/// Uses the golden-angle spiral on `S^2`, equal spacing on the circle and, in
/// higher dimension, the additive recurrence with generalized golden ratio
/// pushed through Box-Muller.
pub fn lattice_directions(count: usize, dim: usize) -> Vec<DVector<f64>> {
    match dim {
        0 => Vec::new(),
        1 => (0..count)
            .map(|i| DVector::from_element(1, if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect(),
        2 => (0..count)
            .map(|i| {
                let t = std::f64::consts::TAU * (i as f64 + 0.5) / count as f64;
                DVector::from_column_slice(&[t.cos(), t.sin()])
            })
            .collect(),
        3 => (0..count)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = GOLDEN_ANGLE * i as f64;
                DVector::from_column_slice(&[r * phi.cos(), r * phi.sin(), z])
            })
            .collect(),
        _ => {
            let pairs = dim.div_ceil(2);
            let width = 2 * pairs;
            let g = generalized_golden(width);
            let steps: Vec<f64> = (1..=width).map(|k| 1.0 / g.powi(k as i32)).collect();
            (0..count)
                .filter_map(|i| {
                    let mut gauss = Vec::with_capacity(width);
                    for p in 0..pairs {
                        let u1 = (0.5 + steps[2 * p] * (i + 1) as f64).fract();
                        let u2 = (0.5 + steps[2 * p + 1] * (i + 1) as f64).fract();
                        let r = (-2.0 * (1.0 - u1).max(f64::MIN_POSITIVE).ln()).sqrt();
                        let t = std::f64::consts::TAU * u2;
                        gauss.push(r * t.cos());
                        gauss.push(r * t.sin());
                    }
                    let v = DVector::from_iterator(dim, gauss.into_iter().take(dim));
                    let n = v.norm();
                    (n > 1e-12).then(|| v / n)
                })
                .collect()
        }
    }
}

/// Unique positive root of `x^(d+1) = x + 1`.
fn generalized_golden(d: usize) -> f64 {
    let mut x = 2.0_f64;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (d as f64 + 1.0));
    }
    x
}

/// `count` uniformly random unit vectors from a seeded generator.
pub fn random_directions(count: usize, dim: usize, rng_seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count && dim > 0 {
        let v = DVector::from_fn(dim, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
        let n = v.norm();
        if n > 1e-12 {
            out.push(v / n);
        }
    }
    out
}

/// Three quarters lattice, one quarter seeded random.
pub fn seed_directions(count: usize, dim: usize, rng_seed: u64) -> Vec<DVector<f64>> {
    let random = count / 4;
    let mut seeds = lattice_directions(count - random, dim);
    seeds.extend(random_directions(random, dim, rng_seed));
    seeds
}
