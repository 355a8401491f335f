//! Closed forms of the composed imposition on the maximally mixed state and
//! the positivity census over random generators.
//!
//! Imposing every k-party marginal of a state on I gives, by
//! inclusion-exclusion over subsets S with |S| = j <= k,
//!
//! ```text
//! sum_S (-1)^(k-j) C(N-j-1, k-j) sigma_S (x) I/d^(N-j)
//! ```
//!
//! with sigma of the empty set equal to I. For k = 2 this is
//! `sum sigma_ij - (N-2) sum sigma_i + (N-1)(N-2)/2 I`.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::marginal::{impose_all, k_subsets, MarginalSpec};
use crate::error::{Error, Result};
use crate::mathcore::{embed_with_maximally_mixed, HermitianMatrix, QuantumState, RngSeed};
use crate::qse::GeneratorKind;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Weight of a j-party reduction when all k-party marginals are imposed on I.
pub fn closed_form_coefficient(parties: usize, k: usize, j: usize) -> f64 {
    if j > k {
        return 0.0;
    }
    let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
    if j == parties {
        return sign * if k == j { 1.0 } else { 0.0 };
    }
    sign * binomial(parties - j - 1, k - j)
}

/// Closed-form value of imposing every k-party marginal of `generator` on I.
pub fn closed_form_all_k(generator: &QuantumState, k: usize) -> Result<HermitianMatrix> {
    let dims = generator.dims().to_vec();
    let n = dims.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!("need 0 < k < N, got k={k}, N={n}")));
    }
    let total = generator.dim();
    let mut out = HermitianMatrix::identity(total).scale(closed_form_coefficient(n, k, 0) / total as f64);
    for j in 1..=k {
        let c = closed_form_coefficient(n, k, j);
        for s in k_subsets(n, j) {
            let red = generator.partial_trace(&s)?;
            out.axpy(c, &embed_with_maximally_mixed(red.matrix(), &dims, &s)?);
        }
    }
    Ok(out)
}

/// Number of PSD outputs of `impose_all(I, .)` for m randomly chosen
/// k-party marginals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NpmRow {
    pub m: usize,
    pub psd: usize,
    pub trials: usize,
}

pub const PSD_CUTOFF: f64 = -1e-10;

/// For each m, `trials` generators each get m of the C(N, k) subsets drawn
/// uniformly; trial t of row m uses `seed.derive(m * trials + t)`.
pub fn npm_sweep(
    parties: usize,
    k: usize,
    local_dim: usize,
    ms: &[usize],
    trials: usize,
    generator: GeneratorKind,
    seed: RngSeed,
) -> Result<Vec<NpmRow>> {
    if k == 0 || k >= parties {
        return Err(Error::InvalidInput(format!("need 0 < k < N, got k={k}, N={parties}")));
    }
    let subsets = k_subsets(parties, k);
    if let Some(&m) = ms.iter().find(|&&m| m > subsets.len()) {
        return Err(Error::InvalidInput(format!("m={m} exceeds the {} available marginals", subsets.len())));
    }
    let dims = vec![local_dim; parties];
    let identity = QuantumState::maximally_mixed(dims.clone()).into_matrix();
    ms.iter()
        .map(|&m| {
            let psd = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = seed.derive((m * trials + t) as u64).rng();
                    let gen = match generator {
                        GeneratorKind::HilbertSchmidt => QuantumState::random_mixed(dims.clone(), &mut rng),
                        GeneratorKind::HaarPure => QuantumState::random_pure(dims.clone(), &mut rng),
                    };
                    let chosen: Vec<Vec<usize>> =
                        sample(&mut rng, subsets.len(), m).into_iter().map(|i| subsets[i].clone()).collect();
                    let spec = MarginalSpec::from_generator(&gen, local_dim, &chosen)?;
                    let out = impose_all(&identity, &spec)?;
                    Ok(usize::from(out.min_eigenvalue() >= PSD_CUTOFF))
                })
                .collect::<Result<Vec<usize>>>()?
                .into_iter()
                .sum();
            Ok(NpmRow { m, psd, trials })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients() {
        // N = 4, k = 3: +1 on triples, -1 on pairs, +1 on singles, -1 on I.
        let c: Vec<f64> = (0..=3).map(|j| closed_form_coefficient(4, 3, j)).collect();
        assert_eq!(c, vec![-1.0, 1.0, -1.0, 1.0]);
        for n in 3..8 {
            assert_eq!(closed_form_coefficient(n, 2, 1), -((n - 2) as f64));
            assert_eq!(closed_form_coefficient(n, 2, 0), ((n - 1) * (n - 2) / 2) as f64);
        }
        // N = 2, k = 1: sigma_A + sigma_B - I.
        assert_eq!(closed_form_coefficient(2, 1, 0), -1.0);
    }

    #[test]
    fn empty_selection_keeps_identity() {
        let rows = npm_sweep(3, 2, 2, &[0], 7, GeneratorKind::HaarPure, RngSeed(1)).unwrap();
        assert_eq!(rows, vec![NpmRow { m: 0, psd: 7, trials: 7 }]);
    }

    #[test]
    fn rejects_too_many_marginals() {
        assert!(npm_sweep(3, 2, 2, &[4], 1, GeneratorKind::HaarPure, RngSeed(1)).is_err());
    }
}
