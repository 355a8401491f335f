//! Quantum value of an inequality on coincidence counts, with Gaussian
//! propagation of Poisson count errors.

use serde::{Deserialize, Serialize};

use super::types::{BellInequality, CountsTable};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumValue {
    pub q: f64,
    pub dq: f64,
}

/// Effective weight of cell (x, y, a, b): its joint coefficient plus the
/// marginal coefficients shared over the other party's m settings.
fn cell_weight(ineq: &BellInequality, x: usize, y: usize, a: usize, b: usize) -> f64 {
    let m = ineq.scenario().settings as f64;
    ineq.joint(x, y, a, b) + ineq.marginal_a(x, a) / m + ineq.marginal_b(y, b) / m
}

/// `Q = sum_xy sum_ab w_ab c_ab / N_xy` and
/// `dQ = sqrt(sum (dQ/dc)^2 c)` with `dQ/dc_ab = (w_ab N_xy - sum w c) / N_xy^2`.
pub fn quantum_value(ineq: &BellInequality, counts: &CountsTable) -> Result<QuantumValue> {
    let sc = ineq.scenario();
    if counts.scenario() != sc {
        return Err(Error::InvalidInput("counts and inequality scenarios differ".into()));
    }
    let (m, d) = (sc.settings, sc.outcomes);
    let mut q = 0.0;
    let mut var = 0.0;
    for x in 0..m {
        for y in 0..m {
            let n = counts.setting_total(x, y);
            let mut wc = 0.0;
            for a in 0..d {
                for b in 0..d {
                    wc += cell_weight(ineq, x, y, a, b) * counts.get(x, y, a, b);
                }
            }
            q += wc / n;
            for a in 0..d {
                for b in 0..d {
                    let c = counts.get(x, y, a, b);
                    let g = (cell_weight(ineq, x, y, a, b) * n - wc) / (n * n);
                    var += g * g * c;
                }
            }
        }
    }
    Ok(QuantumValue { q, dq: var.sqrt() })
}

/// Gap ratio `(Q - dQ + dm) / (C + dm)`.
pub fn gap_ratio(q: QuantumValue, c: f64, dm: f64) -> f64 {
    (q.q - q.dq + dm) / (c + dm)
}
