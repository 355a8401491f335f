//! Two-outcome canonical form (only outcome 0 appears) and the detection
//! efficiency needed to violate it.
//!
//! Substituting `pA(1|x) = 1 - pA(0|x)`, `p(01|xy) = pA(0|x) - p(00|xy)`,
//! `p(10|xy) = pB(0|y) - p(00|xy)` and
//! `p(11|xy) = 1 - pA(0|x) - pB(0|y) + p(00|xy)` leaves
//!
//! ```text
//! s~00_xy = sum_ab (-1)^(a+b) s^ab_xy
//! s~A_x   = sA_x^0 - sA_x^1 + sum_y sum_a (-1)^a s^a1_xy
//! s~B_y   = sB_y^0 - sB_y^1 + sum_x sum_b (-1)^b s^1b_xy
//! ```
//!
//! plus the constant `sum_xy s^11_xy + sum_x sA_x^1 + sum_y sB_y^1`, which
//! moves into the bound.

use serde::{Deserialize, Serialize};

use super::lhv::lhv_bound;
use super::types::{BehaviorTable, BellInequality};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalInequality {
    /// Outcome-0 representation; every coefficient with an outcome 1 is zero.
    pub inequality: BellInequality,
    /// Original value minus canonical value on any no-signaling behavior.
    pub offset: f64,
    /// Local bound of the canonical form.
    pub bound: f64,
}

impl CanonicalInequality {
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            inequality: self.inequality.scaled(k),
            offset: self.offset * k,
            bound: self.bound * k,
        }
    }

    /// Scaled so the largest coefficient magnitude is one.
    pub fn normalized(&self) -> Self {
        let m = self.inequality.max_abs();
        if m == 0.0 {
            self.clone()
        } else {
            self.scaled(1.0 / m)
        }
    }

    /// Sums J = sum s~00 p(00|xy), A = sum s~A pA(0|x), B = sum s~B pB(0|y).
    pub fn correlator_sums(&self, p: &BehaviorTable) -> Result<(f64, f64, f64)> {
        let sc = self.inequality.scenario();
        if p.scenario() != sc {
            return Err(Error::InvalidInput("behavior and inequality scenarios differ".into()));
        }
        let m = sc.settings;
        let mut j = 0.0;
        let mut a = 0.0;
        let mut b = 0.0;
        for x in 0..m {
            a += self.inequality.marginal_a(x, 0) * p.marginal_a(x, 0);
            b += self.inequality.marginal_b(x, 0) * p.marginal_b(x, 0);
            for y in 0..m {
                j += self.inequality.joint(x, y, 0, 0) * p.get(x, y, 0, 0);
            }
        }
        Ok((j, a, b))
    }
}

pub fn canonical_form(ineq: &BellInequality) -> Result<CanonicalInequality> {
    let sc = ineq.scenario();
    if sc.outcomes != 2 {
        return Err(Error::UnsupportedOutcomes {
            expected: 2,
            found: sc.outcomes,
        });
    }
    let m = sc.settings;
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut out = BellInequality::zeros(sc);
    let mut offset = 0.0;
    for x in 0..m {
        for y in 0..m {
            let s00: f64 = (0..4).map(|k| sign(k / 2 + k % 2) * ineq.joint(x, y, k / 2, k % 2)).sum();
            out.set_joint(x, y, 0, 0, s00);
            offset += ineq.joint(x, y, 1, 1);
        }
    }
    for x in 0..m {
        let mut sa = ineq.marginal_a(x, 0) - ineq.marginal_a(x, 1);
        for y in 0..m {
            sa += ineq.joint(x, y, 0, 1) - ineq.joint(x, y, 1, 1);
        }
        out.set_marginal_a(x, 0, sa);
        offset += ineq.marginal_a(x, 1);
    }
    for y in 0..m {
        let mut sb = ineq.marginal_b(y, 0) - ineq.marginal_b(y, 1);
        for x in 0..m {
            sb += ineq.joint(x, y, 1, 0) - ineq.joint(x, y, 1, 1);
        }
        out.set_marginal_b(y, 0, sb);
        offset += ineq.marginal_b(y, 1);
    }
    let bound = lhv_bound(ineq)? - offset;
    Ok(CanonicalInequality {
        inequality: out,
        offset,
        bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EfficiencyMode {
    /// eta_A = eta_B = eta
    Symmetric,
    /// eta_A = eta, eta_B = 1
    AsymmetricB1,
}

const EFFICIENCY_TOL: f64 = 1e-12;

/// Lowest efficiency above which the behavior, with undetected events
/// assigned to outcome 1, still violates the canonical inequality.
///
/// Solves `eta_A eta_B J + eta_A A + eta_B B = C~` and returns the largest
/// root in (0, 1]; for larger efficiencies the left side exceeds the bound.
pub fn efficiency_threshold(canon: &CanonicalInequality, p: &BehaviorTable, mode: EfficiencyMode) -> Result<f64> {
    let (j, a, b) = canon.correlator_sums(p)?;
    let c = canon.bound;
    let scale = 1.0 + c.abs() + j.abs() + a.abs() + b.abs();
    let g1 = j + a + b - c;
    if g1 < -EFFICIENCY_TOL * scale {
        return Err(Error::NotViolatedAtAnyEfficiency);
    }
    if g1.abs() <= EFFICIENCY_TOL * scale {
        return Ok(1.0);
    }
    let eta = match mode {
        EfficiencyMode::AsymmetricB1 => {
            // eta (J + A) + B = C~
            let slope = j + a;
            if slope <= 0.0 {
                return Err(Error::NotViolatedAtAnyEfficiency);
            }
            (c - b) / slope
        }
        EfficiencyMode::Symmetric => {
            // J eta^2 + (A + B) eta - C~ = 0
            let lin = a + b;
            let roots: Vec<f64> = if j.abs() < EFFICIENCY_TOL * scale {
                vec![c / lin]
            } else {
                let disc = lin * lin + 4.0 * j * c;
                if disc < 0.0 {
                    return Err(Error::NotViolatedAtAnyEfficiency);
                }
                let sq = disc.sqrt();
                // Stable pair of roots.
                let qq = -0.5 * (lin + lin.signum() * sq);
                if qq == 0.0 {
                    vec![0.0]
                } else {
                    vec![qq / j, -c / qq]
                }
            };
            roots
                .into_iter()
                .filter(|r| r.is_finite() && *r > 0.0 && *r <= 1.0 + 1e-12)
                .fold(f64::NAN, f64::max)
        }
    };
    if !eta.is_finite() {
        // No crossing in (0, 1]: the bound is violated at every efficiency.
        return Ok(0.0);
    }
    Ok(eta.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::tilted::{tilted_coefficients, tilted_inequality};
    use crate::bell::types::BellScenario;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tilted_canonical_coefficients() {
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let c = canonical_form(&tilted_coefficients(alpha)).unwrap().normalized();
            let s = &c.inequality;
            assert_abs_diff_eq!(s.marginal_a(0, 0), alpha / 2.0 - 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(s.marginal_a(1, 0), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(s.marginal_b(0, 0), -1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(s.marginal_b(1, 0), 0.0, epsilon = 1e-14);
            for (x, y, v) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)] {
                assert_abs_diff_eq!(s.joint(x, y, 0, 0), v, epsilon = 1e-14);
            }
            let expected = (alpha + 2.0 + alpha - 2.0) / 4.0;
            assert_abs_diff_eq!(c.bound, expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_stays_zero() {
        let c = canonical_form(&BellInequality::zeros(BellScenario::chsh())).unwrap();
        assert_eq!(c.inequality.max_abs(), 0.0);
        assert_eq!(c.bound, 0.0);
    }

    #[test]
    fn needs_two_outcomes() {
        let s = BellInequality::zeros(BellScenario::new(2, 3).unwrap());
        assert!(matches!(canonical_form(&s), Err(Error::UnsupportedOutcomes { .. })));
    }

    #[test]
    fn chsh_threshold() {
        let p = tilted_inequality(0.0).unwrap().optimal_behavior();
        let c = canonical_form(&BellInequality::chsh()).unwrap();
        let eta = efficiency_threshold(&c, &p, EfficiencyMode::Symmetric).unwrap();
        assert_abs_diff_eq!(eta, 2.0 / (1.0 + 2f64.sqrt()), epsilon = 1e-10);
    }

    #[test]
    fn on_bound_needs_full_efficiency() {
        let sc = BellScenario::chsh();
        let p = BehaviorTable::deterministic(sc, &[0, 0], &[0, 0]).unwrap();
        let c = canonical_form(&BellInequality::chsh()).unwrap();
        assert_eq!(efficiency_threshold(&c, &p, EfficiencyMode::Symmetric).unwrap(), 1.0);
        let q = BehaviorTable::deterministic(sc, &[1, 1], &[0, 0]).unwrap();
        let v = efficiency_threshold(&c, &q, EfficiencyMode::Symmetric);
        assert!(v.is_ok() || matches!(v, Err(Error::NotViolatedAtAnyEfficiency)));
    }

    #[test]
    fn local_behavior_below_bound_fails() {
        let p = BehaviorTable::uniform(BellScenario::chsh());
        let c = canonical_form(&BellInequality::chsh()).unwrap();
        assert!(matches!(
            efficiency_threshold(&c, &p, EfficiencyMode::Symmetric),
            Err(Error::NotViolatedAtAnyEfficiency)
        ));
    }
}
