//! Closest no-signaling behavior to observed frequencies in weighted
//! Kullback-Leibler divergence.

use nalgebra::{DMatrix, DVector};

use super::types::{BehaviorTable, BellScenario, CountsTable};
use crate::error::{Error, Result};

/// Probabilities are floored here inside the logarithm.
pub const KL_FLOOR: f64 = 1e-12;
const MAX_ITERATIONS: usize = 10_000;
const DYKSTRA_ITERATIONS: usize = 20_000;

/// `sum_xy w_xy sum_ab f log(f / p)`, with p floored at [`KL_FLOOR`].
pub fn weighted_kl(f: &BehaviorTable, weights: &[f64], p: &BehaviorTable) -> f64 {
    let d2 = f.scenario().outcomes.pow(2);
    f.probabilities()
        .iter()
        .zip(p.probabilities())
        .enumerate()
        .filter(|(_, (fi, _))| **fi > 0.0)
        .map(|(i, (fi, pi))| weights[i / d2] * fi * (fi / pi.max(KL_FLOOR)).ln())
        .sum()
}

/// Euclidean projection onto `{p >= 0, normalized, no-signaling}`.
struct NsProjector {
    /// Orthonormal basis of the constraint row space, one column per row.
    rows: DMatrix<f64>,
    center: DVector<f64>,
}

impl NsProjector {
    fn new(sc: BellScenario) -> Self {
        let (m, d) = (sc.settings, sc.outcomes);
        let n = sc.joint_len();
        let mut cons: Vec<Vec<f64>> = Vec::new();
        for x in 0..m {
            for y in 0..m {
                let mut r = vec![0.0; n];
                for k in 0..d * d {
                    r[sc.joint_index(x, y, k / d, k % d)] = 1.0;
                }
                cons.push(r);
            }
        }
        // Alice's marginal at y equals the one at y = 0, and likewise for Bob.
        for x in 0..m {
            for y in 1..m {
                for a in 0..d {
                    let mut r = vec![0.0; n];
                    for b in 0..d {
                        r[sc.joint_index(x, y, a, b)] += 1.0;
                        r[sc.joint_index(x, 0, a, b)] -= 1.0;
                    }
                    cons.push(r);
                }
            }
        }
        for y in 0..m {
            for x in 1..m {
                for b in 0..d {
                    let mut r = vec![0.0; n];
                    for a in 0..d {
                        r[sc.joint_index(x, y, a, b)] += 1.0;
                        r[sc.joint_index(0, y, a, b)] -= 1.0;
                    }
                    cons.push(r);
                }
            }
        }
        let a = DMatrix::from_fn(cons.len(), n, |i, j| cons[i][j]);
        let svd = a.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let smax = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-10 * smax)
            .collect();
        let rows = DMatrix::from_fn(n, keep.len(), |i, j| v_t[(keep[j], i)]);
        Self {
            rows,
            center: DVector::from_element(n, 1.0 / (d * d) as f64),
        }
    }

    fn affine(&self, p: &DVector<f64>) -> DVector<f64> {
        let dev = p - &self.center;
        p - &self.rows * (self.rows.transpose() * dev)
    }

    /// Dykstra's alternating projections between the affine set and the
    /// orthant, finishing on the affine set.
    fn project(&self, p: &DVector<f64>) -> DVector<f64> {
        let n = p.len();
        let mut x = p.clone();
        let mut pa = DVector::zeros(n);
        let mut po = DVector::zeros(n);
        for _ in 0..DYKSTRA_ITERATIONS {
            let y = self.affine(&(&x + &pa));
            pa = &x + &pa - &y;
            let z = (&y + &po).map(|v| v.max(0.0));
            po = &y + &po - &z;
            let change = (&z - &x).amax();
            x = z;
            if change < 1e-15 {
                break;
            }
        }
        // Both constraint sets hold to round-off at convergence; this pass
        // makes the equalities exact and clips any resulting -1e-17.
        self.affine(&x).map(|v| v.max(0.0))
    }
}

/// Fit to frequencies `f` with one weight per setting pair (`[x][y]` order).
pub fn no_signaling_fit(f: &BehaviorTable, weights: &[f64]) -> Result<BehaviorTable> {
    let sc = f.scenario();
    let blocks = sc.settings * sc.settings;
    if weights.len() != blocks || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidInput(format!("need {blocks} nonnegative weights")));
    }
    if f.probabilities().iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidInput("negative frequency".into()));
    }
    let d2 = sc.outcomes.pow(2);
    let proj = NsProjector::new(sc);
    let fv = DVector::from_column_slice(f.probabilities());
    let wv = DVector::from_fn(fv.len(), |i, _| weights[i / d2]);
    let objective = |p: &DVector<f64>| -> f64 {
        (0..p.len())
            .filter(|&i| fv[i] > 0.0)
            .map(|i| -wv[i] * fv[i] * p[i].max(KL_FLOOR).ln())
            .sum()
    };
    let gradient = |p: &DVector<f64>| DVector::from_fn(p.len(), |i, _| -wv[i] * fv[i] / p[i].max(KL_FLOOR));

    let mut p = proj.project(&fv);
    let mut value = objective(&p);
    let mut step = 1e-2;
    for _ in 0..MAX_ITERATIONS {
        let g = gradient(&p);
        let mut accepted = None;
        while step > 1e-20 {
            let cand = proj.project(&(&p - &g * step));
            let diff = &cand - &p;
            let cv = objective(&cand);
            if cv <= value + g.dot(&diff) + diff.norm_squared() / (2.0 * step) {
                accepted = Some((cand, cv, diff.amax()));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cv, change)) = accepted else { break };
        let done = change < 1e-13 || (value - cv).abs() <= 1e-15 * value.abs().max(1.0);
        p = cand;
        value = cv;
        if done {
            break;
        }
        step *= 2.0;
    }
    BehaviorTable::new(sc, p.iter().copied().collect())
}

/// Fit with weights proportional to the counts recorded per setting pair.
pub fn no_signaling_fit_counts(counts: &CountsTable) -> Result<BehaviorTable> {
    let m = counts.scenario().settings;
    let totals: Vec<f64> = (0..m * m).map(|k| counts.setting_total(k / m, k % m)).collect();
    let sum: f64 = totals.iter().sum();
    let weights: Vec<f64> = totals.iter().map(|t| t / sum).collect();
    no_signaling_fit(&counts.to_behavior(), &weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::tilted::tilted_inequality;

    #[test]
    fn no_signaling_input_is_fixed() {
        let p = tilted_inequality(0.7).unwrap().optimal_behavior();
        let q = no_signaling_fit(&p, &[0.25; 4]).unwrap();
        for (a, b) in p.probabilities().iter().zip(q.probabilities()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn projection_is_feasible() {
        let sc = BellScenario::new(3, 2).unwrap();
        let proj = NsProjector::new(sc);
        let raw = DVector::from_fn(sc.joint_len(), |i, _| ((i * 7919) % 13) as f64 / 13.0 - 0.2);
        let p = proj.project(&raw);
        let t = BehaviorTable::new(sc, p.iter().copied().collect()).unwrap();
        assert!(t.no_signaling_residual() < 1e-10);
        assert!(p.iter().all(|v| *v >= 0.0));
    }
}
