//! Bipartite Bell scenarios, inequalities, behaviors and coincidence counts.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::{MeasurementSet, QuantumState};

/// Two parties, `settings` inputs and `outcomes` outputs each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellScenario {
    pub settings: usize,
    pub outcomes: usize,
}

impl BellScenario {
    pub fn new(settings: usize, outcomes: usize) -> Result<Self> {
        if settings < 1 || outcomes < 2 {
            return Err(Error::InvalidInput(format!(
                "scenario needs at least one setting and two outcomes, got m={settings}, d={outcomes}"
            )));
        }
        Ok(Self { settings, outcomes })
    }

    pub fn chsh() -> Self {
        Self {
            settings: 2,
            outcomes: 2,
        }
    }

    pub fn joint_len(&self) -> usize {
        let (m, d) = (self.settings, self.outcomes);
        m * m * d * d
    }

    pub fn marginal_len(&self) -> usize {
        self.settings * self.outcomes
    }

    pub fn joint_index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        let (m, d) = (self.settings, self.outcomes);
        ((x * m + y) * d + a) * d + b
    }

    /// The shift d*m used in the gap ratio.
    pub fn dm(&self) -> f64 {
        (self.settings * self.outcomes) as f64
    }

    /// Number of deterministic strategy pairs, d^(2m).
    pub fn strategy_pairs(&self) -> f64 {
        (self.outcomes as f64).powi(2 * self.settings as i32)
    }
}

/// `sum s[x][y][a][b] p(ab|xy) + sum sA[x][a] pA(a|x) + sum sB[y][b] pB(b|y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellInequality {
    scenario: BellScenario,
    joint: Vec<f64>,
    marginal_a: Vec<f64>,
    marginal_b: Vec<f64>,
}

impl BellInequality {
    pub fn zeros(scenario: BellScenario) -> Self {
        Self {
            scenario,
            joint: vec![0.0; scenario.joint_len()],
            marginal_a: vec![0.0; scenario.marginal_len()],
            marginal_b: vec![0.0; scenario.marginal_len()],
        }
    }

    /// Flat coefficient vectors in `[x][y][a][b]`, `[x][a]` and `[y][b]` order.
    pub fn new(scenario: BellScenario, joint: Vec<f64>, marginal_a: Vec<f64>, marginal_b: Vec<f64>) -> Result<Self> {
        if joint.len() != scenario.joint_len()
            || marginal_a.len() != scenario.marginal_len()
            || marginal_b.len() != scenario.marginal_len()
        {
            return Err(Error::InvalidInput("coefficient array sizes do not match the scenario".into()));
        }
        if joint.iter().chain(&marginal_a).chain(&marginal_b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self {
            scenario,
            joint,
            marginal_a,
            marginal_b,
        })
    }

    /// The CHSH inequality in probability form,
    /// `p(00|00) + p(00|01) + p(00|10) - p(00|11) - pA(0|0) - pB(0|0) <= 0`.
    pub fn chsh() -> Self {
        let sc = BellScenario::chsh();
        let mut s = Self::zeros(sc);
        for (x, y, v) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)] {
            s.set_joint(x, y, 0, 0, v);
        }
        s.set_marginal_a(0, 0, -1.0);
        s.set_marginal_b(0, 0, -1.0);
        s
    }

    pub fn scenario(&self) -> BellScenario {
        self.scenario
    }

    pub fn joint(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.joint[self.scenario.joint_index(x, y, a, b)]
    }

    pub fn set_joint(&mut self, x: usize, y: usize, a: usize, b: usize, v: f64) {
        let i = self.scenario.joint_index(x, y, a, b);
        self.joint[i] = v;
    }

    pub fn marginal_a(&self, x: usize, a: usize) -> f64 {
        self.marginal_a[x * self.scenario.outcomes + a]
    }

    pub fn set_marginal_a(&mut self, x: usize, a: usize, v: f64) {
        self.marginal_a[x * self.scenario.outcomes + a] = v;
    }

    pub fn marginal_b(&self, y: usize, b: usize) -> f64 {
        self.marginal_b[y * self.scenario.outcomes + b]
    }

    pub fn set_marginal_b(&mut self, y: usize, b: usize, v: f64) {
        self.marginal_b[y * self.scenario.outcomes + b] = v;
    }

    pub fn joint_coefficients(&self) -> &[f64] {
        &self.joint
    }

    pub fn marginal_a_coefficients(&self) -> &[f64] {
        &self.marginal_a
    }

    pub fn marginal_b_coefficients(&self) -> &[f64] {
        &self.marginal_b
    }

    fn coefficients(&self) -> impl Iterator<Item = &f64> {
        self.joint.iter().chain(&self.marginal_a).chain(&self.marginal_b)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            scenario: self.scenario,
            joint: self.joint.iter().map(|v| v * k).collect(),
            marginal_a: self.marginal_a.iter().map(|v| v * k).collect(),
            marginal_b: self.marginal_b.iter().map(|v| v * k).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// All coefficients in [-1, 1].
    pub fn in_box(&self) -> bool {
        self.max_abs() <= 1.0
    }

    /// Left-hand side on a behavior; marginals are averaged over the other
    /// party's settings.
    pub fn evaluate(&self, p: &BehaviorTable) -> Result<f64> {
        if p.scenario != self.scenario {
            return Err(Error::InvalidInput("behavior and inequality scenarios differ".into()));
        }
        let (m, d) = (self.scenario.settings, self.scenario.outcomes);
        let mut v: f64 = self.joint.iter().zip(&p.probs).map(|(s, q)| s * q).sum();
        for x in 0..m {
            for a in 0..d {
                v += self.marginal_a(x, a) * p.marginal_a(x, a);
                v += self.marginal_b(x, a) * p.marginal_b(x, a);
            }
        }
        Ok(v)
    }

    /// Signed coefficients times probability labels, one setting pair per line.
    pub fn format_terms(&self, bound: Option<f64>) -> String {
        let (m, d) = (self.scenario.settings, self.scenario.outcomes);
        let mut terms: Vec<String> = Vec::new();
        let mut push = |c: f64, label: String| {
            if c != 0.0 {
                terms.push(format!("{}{:.4} {}", if c < 0.0 { "- " } else { "+ " }, c.abs(), label));
            }
        };
        for x in 0..m {
            for y in 0..m {
                for a in 0..d {
                    for b in 0..d {
                        push(self.joint(x, y, a, b), format!("p({a}{b}|{x}{y})"));
                    }
                }
            }
        }
        for x in 0..m {
            for a in 0..d {
                push(self.marginal_a(x, a), format!("p_A({a}|{x})"));
            }
        }
        for y in 0..m {
            for b in 0..d {
                push(self.marginal_b(y, b), format!("p_B({b}|{y})"));
            }
        }
        let mut out = String::new();
        if terms.is_empty() {
            out.push('0');
        }
        for (i, t) in terms.iter().enumerate() {
            let t = if i == 0 { t.trim_start_matches("+ ").to_string() } else { t.clone() };
            if i > 0 {
                out.push(if i % (d * d) == 0 { '\n' } else { ' ' });
            }
            out.push_str(&t);
        }
        if let Some(c) = bound {
            let _ = write!(out, " <= {c:.4}");
        }
        out
    }
}

/// Conditional probabilities p(ab|xy).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorTable {
    scenario: BellScenario,
    probs: Vec<f64>,
}

pub const NORMALIZATION_TOL: f64 = 1e-9;

impl BehaviorTable {
    pub fn new(scenario: BellScenario, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != scenario.joint_len() {
            return Err(Error::InvalidInput("probability array size does not match the scenario".into()));
        }
        if probs.iter().any(|&p| !(-NORMALIZATION_TOL..=1.0 + NORMALIZATION_TOL).contains(&p)) {
            return Err(Error::InvalidInput("probability outside [0,1]".into()));
        }
        let t = Self { scenario, probs };
        let (m, d) = (scenario.settings, scenario.outcomes);
        for x in 0..m {
            for y in 0..m {
                let s: f64 = (0..d * d).map(|k| t.get(x, y, k / d, k % d)).sum();
                if (s - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::InvalidInput(format!("p(..|{x}{y}) sums to {s}")));
                }
            }
        }
        Ok(t)
    }

    pub(crate) fn new_unchecked(scenario: BellScenario, probs: Vec<f64>) -> Self {
        Self { scenario, probs }
    }

    pub fn uniform(scenario: BellScenario) -> Self {
        let d = scenario.outcomes as f64;
        Self::new_unchecked(scenario, vec![1.0 / (d * d); scenario.joint_len()])
    }

    /// Local deterministic behavior with responses a = alice[x], b = bob[y].
    pub fn deterministic(scenario: BellScenario, alice: &[usize], bob: &[usize]) -> Result<Self> {
        let (m, d) = (scenario.settings, scenario.outcomes);
        if alice.len() != m || bob.len() != m || alice.iter().chain(bob).any(|&o| o >= d) {
            return Err(Error::InvalidInput("invalid deterministic strategy".into()));
        }
        let mut probs = vec![0.0; scenario.joint_len()];
        for x in 0..m {
            for y in 0..m {
                probs[scenario.joint_index(x, y, alice[x], bob[y])] = 1.0;
            }
        }
        Ok(Self::new_unchecked(scenario, probs))
    }

    /// Convex combination; weights are normalized.
    pub fn mixture(parts: &[(f64, BehaviorTable)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::InvalidInput("empty mixture".into()));
        };
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if total <= 0.0 || parts.iter().any(|(w, t)| *w < 0.0 || t.scenario != first.scenario) {
            return Err(Error::InvalidInput("invalid mixture".into()));
        }
        let mut probs = vec![0.0; first.probs.len()];
        for (w, t) in parts {
            for (p, q) in probs.iter_mut().zip(&t.probs) {
                *p += w / total * q;
            }
        }
        Ok(Self::new_unchecked(first.scenario, probs))
    }

    /// p(ab|xy) = Tr(rho M_a^x (x) M_b^y).
    pub fn from_state(state: &QuantumState, settings_a: &[MeasurementSet], settings_b: &[MeasurementSet]) -> Result<Self> {
        let m = settings_a.len();
        if m == 0 || settings_b.len() != m {
            return Err(Error::InvalidInput("both parties need the same nonzero number of settings".into()));
        }
        let d = settings_a[0].len();
        if settings_a.iter().chain(settings_b).any(|s| s.len() != d) {
            return Err(Error::InvalidInput("all settings need the same number of outcomes".into()));
        }
        let (da, db) = (settings_a[0].dim(), settings_b[0].dim());
        if settings_a.iter().any(|s| s.dim() != da) || settings_b.iter().any(|s| s.dim() != db) || da * db != state.dim() {
            return Err(Error::InvalidInput("measurement dimensions do not match the state".into()));
        }
        let scenario = BellScenario::new(m, d)?;
        let mut probs = vec![0.0; scenario.joint_len()];
        for (x, sa) in settings_a.iter().enumerate() {
            for (y, sb) in settings_b.iter().enumerate() {
                for (a, ea) in sa.effects().iter().enumerate() {
                    for (b, eb) in sb.effects().iter().enumerate() {
                        probs[scenario.joint_index(x, y, a, b)] = state.matrix().hs_inner(&ea.kron(eb));
                    }
                }
            }
        }
        Ok(Self::new_unchecked(scenario, probs))
    }

    pub fn scenario(&self) -> BellScenario {
        self.scenario
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.probs[self.scenario.joint_index(x, y, a, b)]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// pA(a|x) averaged over Bob's settings.
    pub fn marginal_a(&self, x: usize, a: usize) -> f64 {
        let (m, d) = (self.scenario.settings, self.scenario.outcomes);
        let s: f64 = (0..m).flat_map(|y| (0..d).map(move |b| (y, b))).map(|(y, b)| self.get(x, y, a, b)).sum();
        s / m as f64
    }

    /// pB(b|y) averaged over Alice's settings.
    pub fn marginal_b(&self, y: usize, b: usize) -> f64 {
        let (m, d) = (self.scenario.settings, self.scenario.outcomes);
        let s: f64 = (0..m).flat_map(|x| (0..d).map(move |a| (x, a))).map(|(x, a)| self.get(x, y, a, b)).sum();
        s / m as f64
    }

    /// Largest violation of the no-signaling equalities.
    pub fn no_signaling_residual(&self) -> f64 {
        let (m, d) = (self.scenario.settings, self.scenario.outcomes);
        let mut worst: f64 = 0.0;
        for x in 0..m {
            for a in 0..d {
                let base: f64 = (0..d).map(|b| self.get(x, 0, a, b)).sum();
                for y in 1..m {
                    let v: f64 = (0..d).map(|b| self.get(x, y, a, b)).sum();
                    worst = worst.max((v - base).abs());
                }
            }
        }
        for y in 0..m {
            for b in 0..d {
                let base: f64 = (0..d).map(|a| self.get(0, y, a, b)).sum();
                for x in 1..m {
                    let v: f64 = (0..d).map(|a| self.get(x, y, a, b)).sum();
                    worst = worst.max((v - base).abs());
                }
            }
        }
        worst
    }
}

/// Coincidence counts c(ab|xy).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountsTable {
    scenario: BellScenario,
    counts: Vec<f64>,
}

impl CountsTable {
    pub fn new(scenario: BellScenario, counts: Vec<f64>) -> Result<Self> {
        if counts.len() != scenario.joint_len() {
            return Err(Error::InvalidInput("count array size does not match the scenario".into()));
        }
        if counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
            return Err(Error::InvalidInput("negative count".into()));
        }
        let t = Self { scenario, counts };
        let m = scenario.settings;
        for x in 0..m {
            for y in 0..m {
                if t.setting_total(x, y) <= 0.0 {
                    return Err(Error::InvalidInput(format!("no counts for settings ({x},{y})")));
                }
            }
        }
        Ok(t)
    }

    /// Expected counts: `per_setting * p(ab|xy)`.
    pub fn from_behavior(p: &BehaviorTable, per_setting: f64) -> Result<Self> {
        Self::new(p.scenario, p.probs.iter().map(|q| q.max(0.0) * per_setting).collect())
    }

    /// Independent Poisson counts with means `per_setting * p(ab|xy)`.
    pub fn sample_poisson<R: Rng + ?Sized>(p: &BehaviorTable, per_setting: f64, rng: &mut R) -> Result<Self> {
        let counts = p
            .probs
            .iter()
            .map(|&q| {
                let mean = q.max(0.0) * per_setting;
                if mean > 0.0 {
                    Poisson::new(mean).map(|d| d.sample(rng)).unwrap_or(0.0)
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(p.scenario, counts)
    }

    pub fn scenario(&self) -> BellScenario {
        self.scenario
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.counts[self.scenario.joint_index(x, y, a, b)]
    }

    pub fn values(&self) -> &[f64] {
        &self.counts
    }

    pub fn setting_total(&self, x: usize, y: usize) -> f64 {
        let d = self.scenario.outcomes;
        (0..d * d).map(|k| self.get(x, y, k / d, k % d)).sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            scenario: self.scenario,
            counts: self.counts.iter().map(|c| c * k).collect(),
        }
    }

    /// Relative frequencies per setting pair.
    pub fn to_behavior(&self) -> BehaviorTable {
        let (m, d) = (self.scenario.settings, self.scenario.outcomes);
        let mut probs = vec![0.0; self.counts.len()];
        for x in 0..m {
            for y in 0..m {
                let t = self.setting_total(x, y);
                for a in 0..d {
                    for b in 0..d {
                        let i = self.scenario.joint_index(x, y, a, b);
                        probs[i] = self.counts[i] / t;
                    }
                }
            }
        }
        BehaviorTable::new_unchecked(self.scenario, probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::qubit_observable_pvm;
    use nalgebra::DVector;
    use num_complex::Complex64;

    fn singlet() -> QuantumState {
        let s = 1.0 / 2f64.sqrt();
        let v = DVector::from_vec(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        QuantumState::pure(&v, vec![2, 2]).unwrap()
    }

    #[test]
    fn singlet_correlations() {
        let dirs = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.6, 0.0, 0.8]];
        let sets: Vec<_> = dirs.iter().map(|&d| qubit_observable_pvm(d).unwrap()).collect();
        let p = BehaviorTable::from_state(&singlet(), &sets, &sets).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let corr = p.get(x, y, 0, 0) + p.get(x, y, 1, 1) - p.get(x, y, 0, 1) - p.get(x, y, 1, 0);
                let dot: f64 = (0..3).map(|k| dirs[x][k] * dirs[y][k]).sum();
                assert!((corr + dot).abs() < 1e-12);
            }
        }
        assert!(p.no_signaling_residual() < 1e-12);
    }

    #[test]
    fn product_state_factorizes() {
        let mut rng = crate::mathcore::RngSeed(3).rng();
        let a = QuantumState::random_mixed(vec![2], &mut rng);
        let b = QuantumState::random_mixed(vec![2], &mut rng);
        let sets: Vec<_> = [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0]].iter().map(|&d| qubit_observable_pvm(d).unwrap()).collect();
        let p = BehaviorTable::from_state(&a.kron(&b), &sets, &sets).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let pa = a.matrix().hs_inner(&sets[x].effects()[i]);
                        let pb = b.matrix().hs_inner(&sets[y].effects()[j]);
                        assert!((p.get(x, y, i, j) - pa * pb).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn validation() {
        let sc = BellScenario::chsh();
        assert!(BehaviorTable::new(sc, vec![0.25; 15]).is_err());
        assert!(BehaviorTable::new(sc, vec![0.3; 16]).is_err());
        assert!(CountsTable::new(sc, vec![0.0; 16]).is_err());
        assert!(BellScenario::new(2, 1).is_err());
        assert!(BehaviorTable::deterministic(sc, &[0, 2], &[0, 0]).is_err());
    }

    #[test]
    fn chsh_on_deterministic_is_local() {
        let sc = BellScenario::chsh();
        let ineq = BellInequality::chsh();
        for s in 0..16usize {
            let p = BehaviorTable::deterministic(sc, &[s & 1, (s >> 1) & 1], &[(s >> 2) & 1, (s >> 3) & 1]).unwrap();
            assert!(ineq.evaluate(&p).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn format_lists_terms() {
        let text = BellInequality::chsh().format_terms(Some(0.0));
        assert!(text.starts_with("1.0000 p(00|00)"));
        assert!(text.contains("- 1.0000 p(00|11)"));
        assert!(text.contains("- 1.0000 p_A(0|0)"));
        assert!(text.ends_with("<= 0.0000"));
    }
}
