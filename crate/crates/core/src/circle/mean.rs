use std::f64::consts::{PI, TAU};

use super::{arc_distance, Circle, CirclePoint};
use crate::error::{Error, Result};
use crate::frechet::{EmpiricalMeasure, MeanSet};

/// Minimizers closer than this are merged.
const MERGE_TOLERANCE: f64 = 1e-9;

fn frechet_direct(mu: &EmpiricalMeasure<CirclePoint>, x: CirclePoint) -> f64 {
    mu.iter()
        .map(|(a, w)| {
            let d = arc_distance(x, *a);
            w * d * d
        })
        .sum()
}

fn merge_sorted(mut points: Vec<f64>, tol: f64) -> Vec<CirclePoint> {
    points.sort_by(f64::total_cmp);
    let mut out: Vec<CirclePoint> = Vec::with_capacity(points.len());
    for p in points {
        let p = CirclePoint::new(p);
        if out.iter().all(|q| arc_distance(*q, p) >= tol) {
            out.push(p);
        }
    }
    out
}

fn mean_set(minimizers: Vec<CirclePoint>, value: f64) -> MeanSet<CirclePoint> {
    MeanSet::from_minimizers(&Circle, minimizers, value).expect("circle distance is infallible")
}

/// Exact global minimizers of the empirical Fréchet function for `d^2`.
///
/// Between consecutive antipodes of the atoms every atom keeps a fixed
/// unwrapped representative, so the Fréchet function is a quadratic with
/// leading coefficient `sum w_i`. The antipodes are swept in sorted order,
/// updating the first two weighted moments of the representatives as each
/// atom's representative jumps by `2 pi`; each arc's vertex is clamped into
/// the (closed) arc. Candidates close to the best value are re-evaluated
/// directly from arc lengths before ties are decided.
pub fn intrinsic_mean_exact(mu: &EmpiricalMeasure<CirclePoint>) -> MeanSet<CirclePoint> {
    let mut breaks: Vec<(f64, f64)> = mu.iter().map(|(x, w)| (x.antipode().angle(), w)).collect();
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = breaks.len();

    // Before the sweep every representative sits at `antipode - pi`.
    let total: f64 = breaks.iter().map(|b| b.1).sum();
    let mut s: f64 = breaks.iter().map(|(a, w)| w * (a - PI)).sum();
    let mut q: f64 = breaks.iter().map(|(a, w)| w * (a - PI) * (a - PI)).sum();

    let mut candidates: Vec<(f64, f64)> = Vec::with_capacity(n);
    for j in 0..n {
        let (a, w) = breaks[j];
        // crossing the antipode moves the representative from a - pi to a + pi
        s += w * TAU;
        q += w * 4.0 * PI * a;
        let lo = a;
        let hi = if j + 1 < n { breaks[j + 1].0 } else { breaks[0].0 + TAU };
        let v = (s / total).clamp(lo, hi);
        let f = total * v * v - 2.0 * v * s + q;
        candidates.push((f, v));
    }

    let best = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let screen = best + 1e-7 * (1.0 + best.abs());
    let exact: Vec<(f64, CirclePoint)> = candidates
        .iter()
        .filter(|c| c.0 <= screen)
        .map(|c| {
            let p = CirclePoint::new(c.1);
            (frechet_direct(mu, p), p)
        })
        .collect();
    let min_value = exact.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * (1.0 + min_value);
    let winners = exact
        .iter()
        .filter(|e| e.0 <= min_value + tie)
        .map(|e| e.1.angle())
        .collect();
    mean_set(merge_sorted(winners, MERGE_TOLERANCE), min_value)
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Grid search over `grid_size` equally spaced angles followed by
/// golden-section refinement around every competitive grid minimum.
pub fn brute_force_mean(mu: &EmpiricalMeasure<CirclePoint>, grid_size: usize) -> Result<MeanSet<CirclePoint>> {
    if grid_size < 1000 {
        return Err(Error::InvalidInput(format!("grid size must be at least 1000, got {grid_size}")));
    }
    let h = TAU / grid_size as f64;
    let grid: Vec<f64> = (0..grid_size).map(|j| -PI + h * j as f64).collect();
    let mut values = vec![0.0; grid_size];
    for (atom, w) in mu.iter() {
        let a = atom.angle();
        for (v, x) in values.iter_mut().zip(&grid) {
            let d = (x - a).abs();
            let d = d.min(TAU - d);
            *v += w * d * d;
        }
    }
    let grid_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    // |F'| <= 2 pi, so a cell can only hide the global minimum if its
    // grid value is within 2 pi h of the best grid value.
    let screen = grid_min + 2.0 * TAU * h;
    let eval = |x: f64| frechet_direct(mu, CirclePoint::new(x));
    let mut refined = Vec::new();
    for j in 0..grid_size {
        let prev = values[(j + grid_size - 1) % grid_size];
        let next = values[(j + 1) % grid_size];
        if values[j] <= screen && values[j] <= prev && values[j] <= next {
            let x = golden_section(eval, grid[j] - h, grid[j] + h);
            refined.push((eval(x), x));
        }
    }
    let best = refined.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let winners = refined
        .iter()
        .filter(|r| r.0 <= best + 1e-10)
        .map(|r| r.1)
        .collect();
    Ok(mean_set(merge_sorted(winners, h), best))
}
