use super::lp::LinearProgram;
use super::measure::{sq_dist, w2_distance, w2_squared, DiscreteMeasure};
use crate::error::{Error, Result};
use crate::frechet::MeanSet;
use crate::stats;

pub const MAX_MARGINALS: usize = 4;
pub const MAX_ATOMS_PER_MARGINAL: usize = 8;
/// Cap on the optimal bases visited while enumerating barycenters.
pub const MAX_OPTIMAL_BASES: usize = 16;
const MERGE_TOLERANCE: f64 = 1e-9;

fn check_weights(k: usize, weights: &[f64]) -> Result<()> {
    if weights.len() != k {
        return Err(Error::InvalidInput(format!("{k} measures but {} weights", weights.len())));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    let total = stats::compensated_sum(weights);
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// `sum_i weights_i W_2^2(candidate, measures_i)`.
pub fn frechet_functional_w(measures: &[DiscreteMeasure], weights: &[f64], candidate: &DiscreteMeasure) -> Result<f64> {
    check_weights(measures.len(), weights)?;
    let mut total = 0.0;
    for (m, w) in measures.iter().zip(weights) {
        total += w * w2_squared(candidate, m)?.0;
    }
    Ok(total)
}

/// Wasserstein barycenters from the multi-marginal transport problem over
/// the product of the supports, with cost
/// `sum_i w_i |x_i - sum_k w_k x_k|^2` per tuple. Every optimal vertex found
/// among at most [`MAX_OPTIMAL_BASES`] optimal bases is pushed forward by
/// the weighted average and returned as a barycenter.
pub fn barycenter_multimarginal(measures: &[DiscreteMeasure], weights: &[f64]) -> Result<MeanSet<DiscreteMeasure>> {
    let k = measures.len();
    if k == 0 {
        return Err(Error::InvalidInput("barycenter needs at least one measure".into()));
    }
    if k > MAX_MARGINALS {
        return Err(Error::TooLarge(format!("{k} measures exceed the limit of {MAX_MARGINALS}")));
    }
    if let Some(m) = measures.iter().find(|m| m.len() > MAX_ATOMS_PER_MARGINAL) {
        return Err(Error::TooLarge(format!(
            "a measure with {} atoms exceeds the limit of {MAX_ATOMS_PER_MARGINAL}",
            m.len()
        )));
    }
    check_weights(k, weights)?;
    let dim = measures[0].dim();
    if measures.iter().any(|m| m.dim() != dim) {
        return Err(Error::InvalidInput("measures live in different dimensions".into()));
    }

    let sizes: Vec<usize> = measures.iter().map(|m| m.len()).collect();
    let tuples = sizes.iter().product::<usize>();
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let rows = sizes.iter().sum::<usize>();

    let mut a = vec![vec![0.0; tuples]; rows];
    let mut c = Vec::with_capacity(tuples);
    let mut centers = Vec::with_capacity(tuples);
    for t in 0..tuples {
        let idx = tuple_index(t, &sizes);
        let mut center = vec![0.0; dim];
        for (i, &j) in idx.iter().enumerate() {
            for (cd, x) in center.iter_mut().zip(&measures[i].support()[j]) {
                *cd += weights[i] * x;
            }
            a[offsets[i] + j][t] = 1.0;
        }
        let cost = idx
            .iter()
            .enumerate()
            .map(|(i, &j)| weights[i] * sq_dist(&measures[i].support()[j], &center))
            .sum();
        c.push(cost);
        centers.push(center);
    }
    let b: Vec<f64> = measures.iter().flat_map(|m| m.weights().iter().copied()).collect();
    let lp = LinearProgram { a, b, c };
    let vertices = lp.optimal_vertices(MAX_OPTIMAL_BASES)?;
    let value = vertices[0].objective.max(0.0);

    let mut barycenters: Vec<DiscreteMeasure> = Vec::new();
    for v in &vertices {
        let atoms = v.x.iter().zip(&centers).map(|(p, x)| (x.clone(), *p)).collect();
        let bar = DiscreteMeasure::from_atoms(atoms, MERGE_TOLERANCE)?;
        if !barycenters.iter().any(|b| same_measure(b, &bar)) {
            barycenters.push(bar);
        }
    }

    let mut diameter: f64 = 0.0;
    for i in 0..barycenters.len() {
        for j in (i + 1)..barycenters.len() {
            diameter = diameter.max(w2_distance(&barycenters[i], &barycenters[j])?.0);
        }
    }
    Ok(MeanSet {
        minimizers: barycenters,
        frechet_value: value,
        diameter,
        unique: diameter < crate::frechet::UNIQUENESS_TOLERANCE,
        degeneracy: None,
    })
}

/// Mixed-radix decomposition of a tuple number, first marginal slowest.
fn tuple_index(mut t: usize, sizes: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; sizes.len()];
    for i in (0..sizes.len()).rev() {
        idx[i] = t % sizes[i];
        t /= sizes[i];
    }
    idx
}

/// Equality of sorted measures up to the merge tolerance.
fn same_measure(a: &DiscreteMeasure, b: &DiscreteMeasure) -> bool {
    a.len() == b.len()
        && a.support()
            .iter()
            .zip(b.support())
            .all(|(x, y)| sq_dist(x, y).sqrt() <= MERGE_TOLERANCE)
        && a.weights().iter().zip(b.weights()).all(|(v, w)| (v - w).abs() <= MERGE_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(p: [f64; 2]) -> DiscreteMeasure {
        DiscreteMeasure::uniform(vec![p.to_vec(), vec![-p[0], -p[1]]]).unwrap()
    }

    #[test]
    fn single_measure_is_its_own_barycenter() {
        let mu = DiscreteMeasure::new(vec![vec![0.0, 1.0], vec![2.0, 0.5], vec![-1.0, 0.0]], vec![0.2, 0.3, 0.5])
            .unwrap();
        let set = barycenter_multimarginal(&[mu.clone()], &[1.0]).unwrap();
        assert_eq!(set.minimizers.len(), 1);
        assert!(set.frechet_value.abs() < 1e-12);
        assert!(w2_distance(&set.minimizers[0], &mu).unwrap().0 < 1e-9);
    }

    #[test]
    fn identical_measures() {
        let mu = sym([0.3, -0.7]);
        let set = barycenter_multimarginal(&[mu.clone(), mu.clone()], &[0.5, 0.5]).unwrap();
        assert!(set.frechet_value.abs() < 1e-12);
        assert!(set.unique);
        assert!(w2_distance(&set.minimizers[0], &mu).unwrap().0 < 1e-9);
    }

    #[test]
    fn two_symmetric_measures_have_two_barycenters() {
        let mu = sym([0.0, 1.0]);
        let nu = sym([1.0, 0.0]);
        let set = barycenter_multimarginal(&[mu.clone(), nu.clone()], &[0.5, 0.5]).unwrap();
        assert!((set.frechet_value - 0.5).abs() < 1e-9);
        assert_eq!(set.minimizers.len(), 2);
        assert!((set.diameter - 1.0).abs() < 1e-9);
        let e = sym([-0.5, 0.5]);
        let f = sym([0.5, 0.5]);
        for target in [&e, &f] {
            assert!(set.minimizers.iter().any(|b| w2_distance(b, target).unwrap().0 < 1e-9));
        }
        for b in &set.minimizers {
            let v = frechet_functional_w(&[mu.clone(), nu.clone()], &[0.5, 0.5], b).unwrap();
            assert!((v - set.frechet_value).abs() < 1e-9);
        }
        let at_mu = frechet_functional_w(&[mu.clone(), nu.clone()], &[0.5, 0.5], &mu).unwrap();
        assert!((at_mu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn limits() {
        let m = DiscreteMeasure::uniform((0..9).map(|i| vec![i as f64]).collect()).unwrap();
        assert!(matches!(barycenter_multimarginal(&[m.clone()], &[1.0]), Err(Error::TooLarge(_))));
        let d = DiscreteMeasure::dirac(vec![0.0]).unwrap();
        let five = vec![d; 5];
        assert!(matches!(barycenter_multimarginal(&five, &[0.2; 5]), Err(Error::TooLarge(_))));
    }
}
