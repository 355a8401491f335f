//! Maximizing the gap ratio `R = (Q - dQ + dm) / (C + dm)` over inequalities
//! with coefficients in [-1, 1].
//!
//! Only joint coefficients are varied; marginal coefficients stay zero. With
//! free marginals in the box, C reaches -dm for two settings and the ratio
//! is unbounded near C = -dm. Joint coefficients alone keep R <= m^2 when
//! m^2 <= dm; for m^2 > dm (e.g. m = 3, d = 2) R can still diverge on
//! nonlocal data, while local data keep R <= 1.
//!
//! Each local search is projected gradient ascent with backtracking on a
//! smoothed ratio: C is replaced by a log-sum-exp over deterministic
//! strategies at decreasing temperatures and dQ by `sqrt(dQ^2 + delta^2)`.
//! Restarts follow `x_{k+1} = (s_k + x_k) / 2`, where `s_k` is the optimum
//! reached from `x_k`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lhv::{check_size, lhv_bound};
use super::types::{BellInequality, CountsTable};
use super::value::{gap_ratio, quantum_value, QuantumValue};
use crate::error::{Error, Result};
use crate::mathcore::RngSeed;

/// Denominators `C + dm` at or below this count as infeasible.
pub const MIN_DENOMINATOR: f64 = 1e-12;
/// Above this many strategy pairs C is used unsmoothed.
const SMOOTH_STRATEGY_LIMIT: f64 = 65_536.0;
const TEMPERATURES: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
const DQ_SMOOTHING: f64 = 1e-9;
const STAGE_ITERATIONS: usize = 300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapOptions {
    /// Restarts per chain.
    pub trials: usize,
    /// Independent restart chains, each with its own seed.
    pub chains: usize,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self { trials: 20, chains: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub inequality: BellInequality,
    pub r: f64,
    pub q: f64,
    pub dq: f64,
    /// Local bound of `inequality`.
    pub c: f64,
    /// Best R after each restart of the winning chain.
    pub history: Vec<f64>,
}

/// Exact R of an inequality on counts; -inf when `C + dm` is not positive.
pub fn exact_ratio(ineq: &BellInequality, counts: &CountsTable) -> Result<(f64, QuantumValue, f64)> {
    let qv = quantum_value(ineq, counts)?;
    let c = lhv_bound(ineq)?;
    let dm = ineq.scenario().dm();
    let r = if c + dm <= MIN_DENOMINATOR { f64::NEG_INFINITY } else { gap_ratio(qv, c, dm) };
    Ok((r, qv, c))
}

/// Data and strategy tables shared by every local search.
struct Problem {
    n: usize,
    d2: usize,
    dm: f64,
    /// c_i / N per cell
    freq: Vec<f64>,
    counts: Vec<f64>,
    totals: Vec<f64>,
    /// Cells hit by each deterministic strategy pair, or None when too many.
    strategies: Option<Vec<Vec<usize>>>,
    template: BellInequality,
}

impl Problem {
    fn new(counts: &CountsTable) -> Result<Self> {
        let sc = counts.scenario();
        check_size(sc)?;
        let (m, d) = (sc.settings, sc.outcomes);
        let d2 = d * d;
        let blocks = m * m;
        let totals: Vec<f64> = (0..blocks).map(|k| counts.setting_total(k / m, k % m)).collect();
        let vals = counts.values().to_vec();
        let freq = vals.iter().enumerate().map(|(i, c)| c / totals[i / d2]).collect();
        let strategies = (sc.strategy_pairs() <= SMOOTH_STRATEGY_LIMIT).then(|| {
            let per = d.pow(m as u32);
            let mut out = Vec::with_capacity(per * per);
            for ka in 0..per {
                for kb in 0..per {
                    let digit = |k: usize, i: usize| (k / d.pow(i as u32)) % d;
                    let mut cells = Vec::with_capacity(blocks);
                    for x in 0..m {
                        for y in 0..m {
                            cells.push(sc.joint_index(x, y, digit(ka, x), digit(kb, y)));
                        }
                    }
                    out.push(cells);
                }
            }
            out
        });
        Ok(Self {
            n: sc.joint_len(),
            d2,
            dm: sc.dm(),
            freq,
            counts: vals,
            totals,
            strategies,
            template: BellInequality::zeros(sc),
        })
    }

    fn inequality(&self, s: &[f64]) -> BellInequality {
        let sc = self.template.scenario();
        let zero = vec![0.0; sc.marginal_len()];
        BellInequality::new(sc, s.to_vec(), zero.clone(), zero).expect("sizes match")
    }

    /// Smoothed dQ and its gradient.
    fn dq(&self, s: &[f64]) -> (f64, Vec<f64>) {
        let mut var = 0.0;
        let mut grad = vec![0.0; self.n];
        for (blk, &nn) in self.totals.iter().enumerate() {
            let cells = blk * self.d2..(blk + 1) * self.d2;
            let w: f64 = cells.clone().map(|i| s[i] * self.counts[i]).sum();
            let g: Vec<f64> = cells.clone().map(|i| (s[i] * nn - w) / (nn * nn)).collect();
            let gc: f64 = cells.clone().zip(&g).map(|(i, gi)| gi * self.counts[i]).sum();
            for (k, i) in cells.enumerate() {
                var += g[k] * g[k] * self.counts[i];
                // d(var)/ds_i
                grad[i] = 2.0 / (nn * nn) * (nn * g[k] * self.counts[i] - self.counts[i] * gc);
            }
        }
        let dq = (var + DQ_SMOOTHING * DQ_SMOOTHING).sqrt();
        grad.iter_mut().for_each(|v| *v /= 2.0 * dq);
        (dq, grad)
    }

    /// Log-sum-exp C at temperature tau and its gradient; exact C with the
    /// active strategy's subgradient when strategies are not tabulated.
    fn c(&self, s: &[f64], tau: f64) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.n];
        match &self.strategies {
            Some(strats) => {
                let z: Vec<f64> = strats.iter().map(|c| c.iter().map(|&i| s[i]).sum()).collect();
                let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = z.iter().map(|v| ((v - zmax) / tau).exp()).collect();
                let total: f64 = w.iter().sum();
                for (cells, wk) in strats.iter().zip(&w) {
                    for &i in cells {
                        grad[i] += wk / total;
                    }
                }
                (zmax + tau * total.ln(), grad)
            }
            None => {
                let ineq = self.inequality(s);
                let (c, strat) = super::lhv::lhv_bound_with_strategy(&ineq).expect("size checked");
                let sc = self.template.scenario();
                let m = sc.settings;
                for x in 0..m {
                    for y in 0..m {
                        grad[sc.joint_index(x, y, strat.alice[x], strat.bob[y])] = 1.0;
                    }
                }
                (c, grad)
            }
        }
    }

    fn objective(&self, s: &[f64], tau: f64) -> (f64, Vec<f64>) {
        let q: f64 = s.iter().zip(&self.freq).map(|(a, b)| a * b).sum();
        let (dq, gdq) = self.dq(s);
        let (c, gc) = self.c(s, tau);
        let den = c + self.dm;
        if den <= MIN_DENOMINATOR {
            return (f64::NEG_INFINITY, vec![0.0; self.n]);
        }
        let num = q - dq + self.dm;
        let r = num / den;
        let grad = (0..self.n)
            .map(|i| (self.freq[i] - gdq[i]) / den - num * gc[i] / (den * den))
            .collect();
        (r, grad)
    }

    /// Exact ratio via the same routines a caller would use.
    fn exact(&self, s: &[f64]) -> f64 {
        let q: f64 = s.iter().zip(&self.freq).map(|(a, b)| a * b).sum();
        let (dq, _) = self.dq(s);
        let dq = (dq * dq - DQ_SMOOTHING * DQ_SMOOTHING).max(0.0).sqrt();
        let c = lhv_bound(&self.inequality(s)).expect("size checked");
        if c + self.dm <= MIN_DENOMINATOR {
            f64::NEG_INFINITY
        } else {
            (q - dq + self.dm) / (c + self.dm)
        }
    }

    fn local_search(&self, start: &[f64]) -> Vec<f64> {
        let mut s: Vec<f64> = start.iter().map(|v| v.clamp(-1.0, 1.0)).collect();
        while self.objective(&s, TEMPERATURES[0]).0 == f64::NEG_INFINITY {
            s.iter_mut().for_each(|v| *v *= 0.5);
        }
        for &tau in &TEMPERATURES {
            let (mut val, mut grad) = self.objective(&s, tau);
            let mut step = 1.0;
            for _ in 0..STAGE_ITERATIONS {
                let mut moved = None;
                while step > 1e-14 {
                    let cand: Vec<f64> = s.iter().zip(&grad).map(|(v, g)| (v + step * g).clamp(-1.0, 1.0)).collect();
                    let dot: f64 = cand.iter().zip(&s).zip(&grad).map(|((c, v), g)| (c - v) * g).sum();
                    let (cv, cg) = self.objective(&cand, tau);
                    if dot > 0.0 && cv >= val + 1e-4 * dot {
                        moved = Some((cand, cv, cg));
                        break;
                    }
                    step *= 0.5;
                }
                let Some((cand, cv, cg)) = moved else { break };
                let change = cand.iter().zip(&s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                s = cand;
                val = cv;
                grad = cg;
                if change < 1e-12 {
                    break;
                }
                step = (step * 2.0).min(1e3);
            }
        }
        s
    }

    /// One restart chain; returns (best coefficients, best exact R, history).
    fn chain(&self, trials: usize, seed: RngSeed) -> (Vec<f64>, f64, Vec<f64>) {
        let mut rng = seed.rng();
        let mut x: Vec<f64> = (0..self.n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let mut best = (vec![0.0; self.n], f64::NEG_INFINITY);
        let mut history = Vec::with_capacity(trials);
        for _ in 0..trials {
            let s = self.local_search(&x);
            let r = self.exact(&s);
            if r > best.1 {
                best = (s.clone(), r);
            }
            history.push(best.1);
            x = x.iter().zip(&s).map(|(a, b)| 0.5 * (a + b)).collect();
        }
        (best.0, best.1, history)
    }
}

/// Best inequality found from `options.trials` restarts in each of
/// `options.chains` chains; chain k is seeded with `seed.derive(k)`.
pub fn maximize_gap(counts: &CountsTable, options: GapOptions, seed: RngSeed) -> Result<GapResult> {
    if options.trials == 0 || options.chains == 0 {
        return Err(Error::InvalidInput("trials and chains must be at least 1".into()));
    }
    let problem = Problem::new(counts)?;
    let runs: Vec<(Vec<f64>, f64, Vec<f64>)> = (0..options.chains)
        .into_par_iter()
        .map(|k| problem.chain(options.trials, seed.derive(k as u64)))
        .collect();
    let (s, _, history) = runs
        .into_iter()
        .reduce(|a, b| if b.1 > a.1 { b } else { a })
        .expect("at least one chain");
    let inequality = problem.inequality(&s);
    let (r, qv, c) = exact_ratio(&inequality, counts)?;
    Ok(GapResult {
        inequality,
        r,
        q: qv.q,
        dq: qv.dq,
        c,
        history,
    })
}
