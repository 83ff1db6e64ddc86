//! Adaptive rejection sampling for log-concave densities on the real line
//! (tangent envelope, no squeeze), with a grid fallback.

use rand::Rng;

use crate::math::{log_add_exp, open_uniform, sample_log_weights};

const MAX_POINTS: usize = 64;
const MAX_EXPANSIONS: usize = 60;
const MAX_TRIALS: usize = 500;

/// Draws from the density proportional to `exp(h(x))`, where `logf` returns
/// `(h(x), h'(x))`. Returns `None` when the envelope cannot be built (the
/// function is not numerically log-concave or has no finite mode).
pub fn ars_sample<F, R>(logf: F, init: &[f64], rng: &mut R) -> Option<f64>
where
    F: Fn(f64) -> (f64, f64),
    R: Rng + ?Sized,
{
    let mut xs: Vec<f64> = init.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.is_empty() {
        return None;
    }
    let mut pts: Vec<(f64, f64, f64)> = xs
        .iter()
        .map(|&x| {
            let (h, d) = logf(x);
            (x, h, d)
        })
        .collect();
    // push the outer abscissae past the mode on both sides
    let mut step = 1.0;
    for _ in 0..MAX_EXPANSIONS {
        if pts[0].2 > 0.0 {
            break;
        }
        let x = pts[0].0 - step;
        let (h, d) = logf(x);
        pts.insert(0, (x, h, d));
        step *= 2.0;
    }
    step = 1.0;
    for _ in 0..MAX_EXPANSIONS {
        if pts[pts.len() - 1].2 < 0.0 {
            break;
        }
        let x = pts[pts.len() - 1].0 + step;
        let (h, d) = logf(x);
        pts.push((x, h, d));
        step *= 2.0;
    }
    if !(pts[0].2 > 0.0 && pts[pts.len() - 1].2 < 0.0) {
        return None;
    }
    for _ in 0..MAX_TRIALS {
        if pts.iter().any(|p| !p.1.is_finite() || !p.2.is_finite()) {
            return None;
        }
        if pts.windows(2).any(|w| w[1].2 > w[0].2 + 1e-9 * (1.0 + w[0].2.abs())) {
            return None;
        }
        let z = hull_knots(&pts);
        let logmass: Vec<f64> = (0..pts.len())
            .map(|i| segment_log_mass(pts[i], z[i], z[i + 1]))
            .collect();
        let seg = sample_log_weights(&logmass, rng);
        let (x0, h0, d0) = pts[seg];
        let x = sample_segment(d0, z[seg], z[seg + 1], rng);
        if !x.is_finite() {
            return None;
        }
        let upper = h0 + d0 * (x - x0);
        let (h, d) = logf(x);
        if open_uniform(rng).ln() <= h - upper {
            return Some(x);
        }
        if pts.len() < MAX_POINTS {
            let pos = pts.partition_point(|p| p.0 < x);
            if pts.get(pos).is_none_or(|p| p.0 != x) {
                pts.insert(pos, (x, h, d));
            }
        }
    }
    None
}

/// Knots `z_0 = -inf < z_1 < ... < z_m = +inf` where consecutive tangents meet.
fn hull_knots(pts: &[(f64, f64, f64)]) -> Vec<f64> {
    let mut z = Vec::with_capacity(pts.len() + 1);
    z.push(f64::NEG_INFINITY);
    for w in pts.windows(2) {
        let (x1, h1, d1) = w[0];
        let (x2, h2, d2) = w[1];
        let knot = if (d1 - d2).abs() < 1e-12 {
            0.5 * (x1 + x2)
        } else {
            (h2 - h1 - x2 * d2 + x1 * d1) / (d1 - d2)
        };
        z.push(knot.clamp(x1, x2));
    }
    z.push(f64::INFINITY);
    z
}

/// `ln ∫_a^b exp(h + d (x - x0)) dx`, stable for slopes near zero.
fn segment_log_mass((x0, h, d): (f64, f64, f64), a: f64, b: f64) -> f64 {
    if b <= a {
        return f64::NEG_INFINITY;
    }
    if d == 0.0 {
        return h + (b - a).ln();
    }
    let width = b - a;
    if d > 0.0 {
        let ub = h + d * (b - x0);
        ub + (-(-d * width).exp_m1()).ln() - d.ln()
    } else {
        let ua = h + d * (a - x0);
        ua + (-(d * width).exp_m1()).ln() - (-d).ln()
    }
}

/// Draws from the density proportional to `exp(d x)` on `[a, b]`.
fn sample_segment<R: Rng + ?Sized>(d: f64, a: f64, b: f64, rng: &mut R) -> f64 {
    let v = open_uniform(rng);
    if d == 0.0 {
        return a + v * (b - a);
    }
    let width = b - a;
    if d > 0.0 {
        // mass piles up at b
        b + (v * (-d * width).exp_m1()).ln_1p() / d
    } else {
        a + (v * (d * width).exp_m1()).ln_1p() / d
    }
}

/// Griddy-Gibbs draw: evaluates `h` on `points` equally spaced abscissae in
/// `[lo, hi]`, picks a cell proportionally and jitters uniformly within it.
pub fn grid_sample<F, R>(h: F, lo: f64, hi: f64, points: usize, rng: &mut R) -> f64
where
    F: Fn(f64) -> f64,
    R: Rng + ?Sized,
{
    let width = (hi - lo) / points as f64;
    let logw: Vec<f64> = (0..points).map(|i| h(lo + (i as f64 + 0.5) * width)).collect();
    let cell = sample_log_weights(&logw, rng);
    lo + (cell as f64 + rng.random::<f64>()) * width
}

/// Normalized grid density, used as an oracle in tests.
pub fn grid_density<F: Fn(f64) -> f64>(h: F, lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let width = (hi - lo) / points as f64;
    let logw: Vec<f64> = (0..points).map(|i| h(lo + (i as f64 + 0.5) * width)).collect();
    let norm = logw.iter().copied().fold(f64::NEG_INFINITY, log_add_exp);
    logw.iter().map(|w| (w - norm).exp()).collect()
}
