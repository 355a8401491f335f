//! Marginal imposition `Q_J(rho) = rho - rho_J (x) I/d_Jc + sigma_J (x) I/d_Jc`.
//!
//! Reductions are embedded with the normalized maximally mixed state on the
//! complement, so all three terms have unit trace and Q preserves the trace.

use crate::error::{Error, Result};
use crate::mathcore::state::{partial_trace_raw, SplitIndex};
use crate::mathcore::{hs_distance, HermitianMatrix, QuantumState};

/// One prescribed reduction. Subsystems are kept in increasing order, so
/// `state` is written in that order whatever order `subset` lists them in.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalTarget {
    subset: Vec<usize>,
    state: QuantumState,
    split: SplitIndex,
}

impl MarginalTarget {
    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn state(&self) -> &QuantumState {
        &self.state
    }
}

/// N parties of local dimension d and their prescribed marginals.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalSpec {
    parties: usize,
    local_dim: usize,
    targets: Vec<MarginalTarget>,
}

impl MarginalSpec {
    pub fn new(parties: usize, local_dim: usize, targets: Vec<(Vec<usize>, QuantumState)>) -> Result<Self> {
        if parties < 2 || local_dim < 2 {
            return Err(Error::InvalidInput("need at least two parties of dimension at least two".into()));
        }
        let dims = vec![local_dim; parties];
        let mut out = Vec::with_capacity(targets.len());
        for (mut subset, state) in targets {
            subset.sort_unstable();
            if subset.len() >= parties {
                return Err(Error::InvalidSubsystem("a marginal cannot cover every party".into()));
            }
            let split = SplitIndex::new(&dims, &subset)?;
            if state.dim() != split.kept.len() {
                return Err(Error::InvalidInput(format!(
                    "marginal on {subset:?} has dimension {}, expected {}",
                    state.dim(),
                    split.kept.len()
                )));
            }
            out.push(MarginalTarget { subset, state, split });
        }
        Ok(Self {
            parties,
            local_dim,
            targets: out,
        })
    }

    /// Marginals of `generator` on each subset.
    pub fn from_generator(generator: &QuantumState, local_dim: usize, subsets: &[Vec<usize>]) -> Result<Self> {
        let parties = generator.dims().len();
        if generator.dims().iter().any(|&d| d != local_dim) {
            return Err(Error::InvalidInput("generator does not have uniform local dimension".into()));
        }
        let targets = subsets
            .iter()
            .map(|s| Ok((s.clone(), generator.partial_trace(s)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parties, local_dim, targets)
    }

    /// Every k-party marginal equal to the maximally mixed state; a pure
    /// solution is an AME(N, d) state when k = N/2.
    pub fn maximally_mixed(parties: usize, local_dim: usize, k: usize) -> Result<Self> {
        let targets = k_subsets(parties, k)
            .into_iter()
            .map(|s| (s, QuantumState::maximally_mixed(vec![local_dim; k])))
            .collect();
        Self::new(parties, local_dim, targets)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.local_dim; self.parties]
    }

    pub fn total_dim(&self) -> usize {
        self.local_dim.pow(self.parties as u32)
    }

    pub fn targets(&self) -> &[MarginalTarget] {
        &self.targets
    }

    /// `D_M`: root mean square Hilbert-Schmidt distance between prescribed
    /// and actual marginals.
    pub fn marginal_distance(&self, rho: &HermitianMatrix) -> Result<f64> {
        if self.targets.is_empty() {
            return Ok(0.0);
        }
        let dims = self.dims();
        let mut acc = 0.0;
        for t in &self.targets {
            let red = HermitianMatrix::hermitize(partial_trace_raw(rho.as_matrix(), &dims, &t.subset)?);
            acc += hs_distance(&red, t.state.matrix())?.powi(2);
        }
        Ok((acc / self.targets.len() as f64).sqrt())
    }
}

/// Sorted k-element subsets of {0..n-1} in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn check_dim(rho: &HermitianMatrix, spec: &MarginalSpec) -> Result<()> {
    if rho.dim() != spec.total_dim() {
        return Err(Error::InvalidInput(format!(
            "matrix dimension {} does not match {} parties of dimension {}",
            rho.dim(),
            spec.parties,
            spec.local_dim
        )));
    }
    Ok(())
}

fn apply(rho: &mut HermitianMatrix, target: &MarginalTarget, dims: &[usize]) -> Result<()> {
    let red = partial_trace_raw(rho.as_matrix(), dims, &target.subset)?;
    let delta = target.state.matrix().as_matrix() - red;
    let scale = 1.0 / target.split.traced.len() as f64;
    let mut m = std::mem::replace(rho, HermitianMatrix::zeros(0)).into_matrix();
    for (a, &ka) in target.split.kept.iter().enumerate() {
        for (b, &kb) in target.split.kept.iter().enumerate() {
            let v = delta[(a, b)] * scale;
            for &t in &target.split.traced {
                m[(ka + t, kb + t)] += v;
            }
        }
    }
    *rho = HermitianMatrix::hermitize(m);
    Ok(())
}

/// `Q_J` for the target at `index`.
pub fn impose_marginal(rho: &HermitianMatrix, spec: &MarginalSpec, index: usize) -> Result<HermitianMatrix> {
    check_dim(rho, spec)?;
    let target = spec
        .targets
        .get(index)
        .ok_or_else(|| Error::InvalidInput(format!("no marginal target {index}")))?;
    let mut out = rho.clone();
    apply(&mut out, target, &spec.dims())?;
    Ok(out)
}

/// Composition of all `Q_J` in target order.
pub fn impose_all(rho: &HermitianMatrix, spec: &MarginalSpec) -> Result<HermitianMatrix> {
    check_dim(rho, spec)?;
    let dims = spec.dims();
    let mut out = rho.clone();
    for t in &spec.targets {
        apply(&mut out, t, &dims)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::RngSeed;
    use approx::assert_abs_diff_eq;

    fn max_diff(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        (a.as_matrix() - b.as_matrix()).camax()
    }

    #[test]
    fn imposes_and_preserves_trace() {
        let mut rng = RngSeed(4).rng();
        let gen = QuantumState::random_mixed(vec![2, 2, 2], &mut rng);
        let spec = MarginalSpec::from_generator(&gen, 2, &[vec![0, 2]]).unwrap();
        let rho = QuantumState::random_mixed(vec![2, 2, 2], &mut rng);
        let out = impose_marginal(rho.matrix(), &spec, 0).unwrap();
        assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-12);
        let red = HermitianMatrix::hermitize(partial_trace_raw(out.as_matrix(), &[2, 2, 2], &[0, 2]).unwrap());
        assert!(max_diff(&red, gen.partial_trace(&[0, 2]).unwrap().matrix()) < 1e-12);
        // The disjoint party keeps its reduction.
        let c0 = partial_trace_raw(rho.matrix().as_matrix(), &[2, 2, 2], &[1]).unwrap();
        let c1 = partial_trace_raw(out.as_matrix(), &[2, 2, 2], &[1]).unwrap();
        assert!((c0 - c1).camax() < 1e-12);
    }

    #[test]
    fn generator_is_fixed() {
        let mut rng = RngSeed(5).rng();
        let gen = QuantumState::random_pure(vec![3, 3, 3], &mut rng);
        let spec = MarginalSpec::from_generator(&gen, 3, &k_subsets(3, 2)).unwrap();
        assert!(max_diff(&impose_all(gen.matrix(), &spec).unwrap(), gen.matrix()) < 1e-12);
        assert!(spec.marginal_distance(gen.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn can_break_positivity() {
        // rho = a|00><00| + (1-a)|11><11|, target sigma_A = g|0><0| + (1-g)|1><1|.
        let (a, g) = (0.9, 0.1);
        let rho = HermitianMatrix::diagonal(&[a, 0.0, 0.0, 1.0 - a]);
        let sigma = QuantumState::new(HermitianMatrix::diagonal(&[g, 1.0 - g]), vec![2]).unwrap();
        let spec = MarginalSpec::new(2, 2, vec![(vec![0], sigma)]).unwrap();
        let out = impose_all(&rho, &spec).unwrap();
        assert_abs_diff_eq!(out.get(1, 1).re, -0.4, epsilon = 1e-14);
        assert!(out.min_eigenvalue() < -0.39);
    }

    #[test]
    fn subset_order_is_irrelevant() {
        let mut rng = RngSeed(6).rng();
        let gen = QuantumState::random_mixed(vec![2, 2, 2], &mut rng);
        let a = MarginalSpec::from_generator(&gen, 2, &[vec![2, 0]]).unwrap();
        let b = MarginalSpec::from_generator(&gen, 2, &[vec![0, 2]]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_targets() {
        let s = QuantumState::maximally_mixed(vec![2]);
        assert!(MarginalSpec::new(2, 2, vec![(vec![0, 1], QuantumState::maximally_mixed(vec![2, 2]))]).is_err());
        assert!(MarginalSpec::new(2, 3, vec![(vec![0], s.clone())]).is_err());
        assert!(MarginalSpec::new(2, 2, vec![(vec![2], s)]).is_err());
        assert_eq!(k_subsets(5, 2).len(), 10);
    }
}
