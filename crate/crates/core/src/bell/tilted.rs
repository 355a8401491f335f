//! The tilted CHSH family
//! `alpha [pA(0|0) - pA(1|0)] + sum_xy (-1)^{xy} [p(a=b|xy) - p(a!=b|xy)] <= alpha + 2`
//! with its maximally violating state and settings.

use nalgebra::DVector;
use num_complex::Complex64;

use super::types::{BehaviorTable, BellInequality, BellScenario};
use crate::error::{Error, Result};
use crate::mathcore::{qubit_observable_pvm, MeasurementSet, QuantumState};

#[derive(Clone, Debug)]
pub struct TiltedSetup {
    pub alpha: f64,
    pub inequality: BellInequality,
    /// alpha + 2
    pub lhv_bound: f64,
    /// sqrt(8 + 2 alpha^2)
    pub quantum_bound: f64,
    /// cos(theta)|00> + sin(theta)|11>
    pub state: QuantumState,
    pub theta: f64,
    pub mu: f64,
    pub settings_a: Vec<MeasurementSet>,
    pub settings_b: Vec<MeasurementSet>,
}

impl TiltedSetup {
    pub fn optimal_behavior(&self) -> BehaviorTable {
        BehaviorTable::from_state(&self.state, &self.settings_a, &self.settings_b)
            .expect("tilted settings match the two-qubit state")
    }

    /// Concurrence sin(2 theta) of the optimal state.
    pub fn concurrence(&self) -> f64 {
        (2.0 * self.theta).sin()
    }
}

/// Coefficients only. For alpha > 1 the marginal coefficients leave [-1, 1].
pub fn tilted_coefficients(alpha: f64) -> BellInequality {
    let mut s = BellInequality::zeros(BellScenario::chsh());
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let sign = if (x * y + a + b) % 2 == 0 { 1.0 } else { -1.0 };
                    s.set_joint(x, y, a, b, sign);
                }
            }
        }
    }
    s.set_marginal_a(0, 0, alpha);
    s.set_marginal_a(0, 1, -alpha);
    s
}

/// Tilt parameter whose optimal state has the given concurrence.
pub fn alpha_for_concurrence(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidInput(format!("concurrence {c} outside [0,1]")));
    }
    // c^2 = (1 - t)/(1 + t) with t = (alpha/2)^2
    let t = (1.0 - c * c) / (1.0 + c * c);
    Ok(2.0 * t.sqrt())
}

pub fn tilted_inequality(alpha: f64) -> Result<TiltedSetup> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("tilt {alpha} outside [0,2]")));
    }
    let t = (alpha / 2.0).powi(2);
    let root = ((1.0 - t) / (1.0 + t)).sqrt();
    let theta = 0.5 * root.asin();
    let mu = root.atan();
    let ket = DVector::from_vec(vec![
        Complex64::new(theta.cos(), 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(theta.sin(), 0.0),
    ]);
    let state = QuantumState::pure(&ket, vec![2, 2])?;
    let settings_a = vec![qubit_observable_pvm([0.0, 0.0, 1.0])?, qubit_observable_pvm([1.0, 0.0, 0.0])?];
    let settings_b = vec![
        qubit_observable_pvm([mu.sin(), 0.0, mu.cos()])?,
        qubit_observable_pvm([-mu.sin(), 0.0, mu.cos()])?,
    ];
    Ok(TiltedSetup {
        alpha,
        inequality: tilted_coefficients(alpha),
        lhv_bound: alpha + 2.0,
        quantum_bound: (8.0 + 2.0 * alpha * alpha).sqrt(),
        state,
        theta,
        mu,
        settings_a,
        settings_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::lhv::lhv_bound;
    use approx::assert_abs_diff_eq;

    #[test]
    fn endpoints() {
        let t0 = tilted_inequality(0.0).unwrap();
        assert_abs_diff_eq!(t0.theta, std::f64::consts::FRAC_PI_4, epsilon = 1e-12);
        assert_abs_diff_eq!(t0.quantum_bound, 8f64.sqrt(), epsilon = 1e-15);
        let t2 = tilted_inequality(2.0).unwrap();
        assert_abs_diff_eq!(t2.theta, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t2.quantum_bound, 4.0, epsilon = 1e-15);
        assert!(tilted_inequality(2.5).is_err());
    }

    #[test]
    fn bounds_and_violation() {
        for alpha in [0.0, 0.5, 1.0, 1.5, 2.0] {
            let t = tilted_inequality(alpha).unwrap();
            assert_eq!(lhv_bound(&t.inequality).unwrap(), alpha + 2.0);
            let q = t.inequality.evaluate(&t.optimal_behavior()).unwrap();
            assert_abs_diff_eq!(q, t.quantum_bound, epsilon = 1e-10);
        }
    }

    #[test]
    fn concurrence_round_trip() {
        let a = alpha_for_concurrence(0.375).unwrap();
        assert_abs_diff_eq!(tilted_inequality(a).unwrap().concurrence(), 0.375, epsilon = 1e-12);
    }
}
