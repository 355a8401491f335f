//! Local bound by exhaustive search over deterministic strategies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::types::{BellInequality, BellScenario};
use crate::error::{Error, Result};

/// Largest d^(2m) accepted.
pub const MAX_STRATEGY_PAIRS: f64 = 1e8;

/// Deterministic responses: Alice outputs `alice[x]`, Bob `bob[y]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

pub fn check_size(scenario: BellScenario) -> Result<()> {
    let n = scenario.strategy_pairs();
    if n > MAX_STRATEGY_PAIRS {
        return Err(Error::TooLargeScenario { strategies: n });
    }
    Ok(())
}

/// Mixed-radix counter over [0, d)^m; digit 0 varies fastest.
fn decode(mut k: usize, m: usize, d: usize, out: &mut [usize]) {
    for slot in out.iter_mut().take(m) {
        *slot = k % d;
        k /= d;
    }
}

/// Value of a deterministic strategy pair.
pub fn strategy_value(ineq: &BellInequality, alice: &[usize], bob: &[usize]) -> f64 {
    let m = ineq.scenario().settings;
    let mut v = 0.0;
    for x in 0..m {
        v += ineq.marginal_a(x, alice[x]);
        v += ineq.marginal_b(x, bob[x]);
        for y in 0..m {
            v += ineq.joint(x, y, alice[x], bob[y]);
        }
    }
    v
}

/// Best Bob response to a fixed Alice strategy. Bob's terms separate over
/// his settings, so each b(y) is chosen independently.
fn best_response(ineq: &BellInequality, alice: &[usize]) -> (f64, Vec<usize>) {
    let BellScenario { settings: m, outcomes: d } = ineq.scenario();
    let mut value: f64 = (0..m).map(|x| ineq.marginal_a(x, alice[x])).sum();
    let mut bob = vec![0; m];
    for y in 0..m {
        let mut best = f64::NEG_INFINITY;
        for b in 0..d {
            let v = ineq.marginal_b(y, b) + (0..m).map(|x| ineq.joint(x, y, alice[x], b)).sum::<f64>();
            if v > best {
                best = v;
                bob[y] = b;
            }
        }
        value += best;
    }
    (value, bob)
}

/// Exact local bound and a strategy pair attaining it. Ties keep the first
/// Alice strategy in counter order.
pub fn lhv_bound_with_strategy(ineq: &BellInequality) -> Result<(f64, DeterministicStrategy)> {
    let sc = ineq.scenario();
    check_size(sc)?;
    let (m, d) = (sc.settings, sc.outcomes);
    let count = d.pow(m as u32);
    let eval = |k: usize| {
        let mut alice = vec![0; m];
        decode(k, m, d, &mut alice);
        let (_, bob) = best_response(ineq, &alice);
        // Re-summed in the fixed order of `strategy_value` so the bound does
        // not depend on how it was found.
        let v = strategy_value(ineq, &alice, &bob);
        (v, k, DeterministicStrategy { alice, bob })
    };
    let pick = |a: (f64, usize, DeterministicStrategy), b: (f64, usize, DeterministicStrategy)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let best = if count >= 4096 {
        (0..count)
            .into_par_iter()
            .map(eval)
            .reduce(|| (f64::NEG_INFINITY, usize::MAX, DeterministicStrategy { alice: vec![], bob: vec![] }), pick)
    } else {
        (0..count).map(eval).reduce(pick).expect("at least one strategy")
    };
    Ok((best.0, best.2))
}

pub fn lhv_bound(ineq: &BellInequality) -> Result<f64> {
    Ok(lhv_bound_with_strategy(ineq)?.0)
}

/// Every deterministic strategy pair, Alice's counter outermost.
pub fn all_strategies(scenario: BellScenario) -> Result<Vec<DeterministicStrategy>> {
    check_size(scenario)?;
    let (m, d) = (scenario.settings, scenario.outcomes);
    let count = d.pow(m as u32);
    let mut out = Vec::with_capacity(count * count);
    for ka in 0..count {
        for kb in 0..count {
            let mut alice = vec![0; m];
            let mut bob = vec![0; m];
            decode(ka, m, d, &mut alice);
            decode(kb, m, d, &mut bob);
            out.push(DeterministicStrategy { alice, bob });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chsh_probability_form_bound_is_zero() {
        assert_eq!(lhv_bound(&BellInequality::chsh()).unwrap(), 0.0);
    }

    #[test]
    fn zero_inequality() {
        let z = BellInequality::zeros(BellScenario::new(3, 3).unwrap());
        assert_eq!(lhv_bound(&z).unwrap(), 0.0);
    }

    #[test]
    fn guard() {
        let big = BellInequality::zeros(BellScenario::new(14, 2).unwrap());
        assert!(matches!(lhv_bound(&big), Err(Error::TooLargeScenario { .. })));
    }

    #[test]
    fn strategy_attains_bound() {
        let ineq = BellInequality::chsh().scaled(-1.0);
        let (c, s) = lhv_bound_with_strategy(&ineq).unwrap();
        assert_eq!(strategy_value(&ineq, &s.alice, &s.bob), c);
        assert_eq!(all_strategies(BellScenario::chsh()).unwrap().len(), 16);
    }
}
