//! Density matrices on tensor-product spaces, partial traces and
//! maximally-mixed embeddings.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{CMatrix, CVector, HermitianMatrix};
use crate::error::{Error, Result};

pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

/// Offsets of the kept and traced multi-indices in the full index space.
///
/// Subsystem 0 is the most significant digit, matching `kron(A, B)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitIndex {
    pub kept: Vec<usize>,
    pub traced: Vec<usize>,
}

pub fn check_subsystems(dims: &[usize], keep: &[usize]) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystem("empty subsystem set".into()));
    }
    for (i, &k) in keep.iter().enumerate() {
        if k >= dims.len() {
            return Err(Error::InvalidSubsystem(format!(
                "index {k} out of range for {} subsystems",
                dims.len()
            )));
        }
        if keep[..i].contains(&k) {
            return Err(Error::InvalidSubsystem(format!("index {k} repeated")));
        }
    }
    Ok(())
}

fn offsets(dims: &[usize], strides: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &base in &out {
            for i in 0..dims[s] {
                next.push(base + i * strides[s]);
            }
        }
        out = next;
    }
    out
}

impl SplitIndex {
    pub fn new(dims: &[usize], keep: &[usize]) -> Result<Self> {
        check_subsystems(dims, keep)?;
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        let n = dims.len();
        let mut strides = vec![1usize; n];
        for s in (0..n.saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        let traced_set: Vec<usize> = (0..n).filter(|s| !keep_sorted.contains(s)).collect();
        Ok(Self {
            kept: offsets(dims, &strides, &keep_sorted),
            traced: offsets(dims, &strides, &traced_set),
        })
    }
}

/// Tr over the complement of `keep`. Works for any square matrix.
pub fn partial_trace_raw(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    check_dims(m.nrows(), dims)?;
    let idx = SplitIndex::new(dims, keep)?;
    let dk = idx.kept.len();
    let mut out = CMatrix::zeros(dk, dk);
    for (a, &ka) in idx.kept.iter().enumerate() {
        for (b, &kb) in idx.kept.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &idx.traced {
                acc += m[(ka + t, kb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// s on `keep`, tensored with the normalized maximally mixed state on the rest.
pub fn embed_raw(s: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let idx = SplitIndex::new(dims, keep)?;
    if s.nrows() != idx.kept.len() || s.ncols() != idx.kept.len() {
        return Err(Error::InvalidInput(format!(
            "marginal has dimension {}, subsystem set needs {}",
            s.nrows(),
            idx.kept.len()
        )));
    }
    let total: usize = dims.iter().product();
    let inv = Complex64::new(1.0 / idx.traced.len() as f64, 0.0);
    let mut out = CMatrix::zeros(total, total);
    for (a, &ka) in idx.kept.iter().enumerate() {
        for (b, &kb) in idx.kept.iter().enumerate() {
            let v = s[(a, b)] * inv;
            for &t in &idx.traced {
                out[(ka + t, kb + t)] = v;
            }
        }
    }
    Ok(out)
}

fn check_dims(n: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidInput("subsystem dimensions must be positive".into()));
    }
    let total: usize = dims.iter().product();
    if total != n {
        return Err(Error::InvalidInput(format!(
            "matrix dimension {n} does not equal product of subsystem dimensions {total}"
        )));
    }
    Ok(())
}

pub fn partial_trace_hermitian(m: &HermitianMatrix, dims: &[usize], keep: &[usize]) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix::hermitize(partial_trace_raw(m.as_matrix(), dims, keep)?))
}

pub fn embed_with_maximally_mixed(s: &HermitianMatrix, dims: &[usize], keep: &[usize]) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix::hermitize(embed_raw(s.as_matrix(), dims, keep)?))
}

/// Density matrix with its subsystem dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    matrix: HermitianMatrix,
    dims: Vec<usize>,
}

impl QuantumState {
    /// Validates trace one and positivity, both to 1e-10.
    pub fn new(matrix: HermitianMatrix, dims: Vec<usize>) -> Result<Self> {
        check_dims(matrix.dim(), &dims)?;
        let tr = matrix.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidInput(format!("trace is {tr}, expected 1")));
        }
        let min = matrix.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidInput(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix, dims })
    }

    /// Single-system state.
    pub fn from_matrix(matrix: HermitianMatrix) -> Result<Self> {
        let d = matrix.dim();
        Self::new(matrix, vec![d])
    }

    pub(crate) fn new_unchecked(matrix: HermitianMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.dim(), dims.iter().product::<usize>());
        Self { matrix, dims }
    }

    pub fn pure(ket: &CVector, dims: Vec<usize>) -> Result<Self> {
        let norm = ket.norm();
        if norm == 0.0 {
            return Err(Error::InvalidInput("zero vector".into()));
        }
        let v = ket.unscale(norm);
        check_dims(v.len(), &dims)?;
        Ok(Self::new_unchecked(HermitianMatrix::projector(&v), dims))
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self::new_unchecked(HermitianMatrix::identity(d).scale(1.0 / d as f64), dims)
    }

    /// Haar-random pure state (normalized complex Gaussian vector).
    pub fn random_pure<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Self {
        let d: usize = dims.iter().product();
        let v = gaussian_vector(d, rng);
        let n = v.norm();
        Self::new_unchecked(HermitianMatrix::projector(&v.unscale(n)), dims)
    }

    /// Hilbert-Schmidt random mixed state G G^dagger / Tr(G G^dagger) with a
    /// square Ginibre matrix G.
    pub fn random_mixed<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Self {
        let d: usize = dims.iter().product();
        let g = super::random::ginibre(d, d, rng);
        let m = HermitianMatrix::hermitize(&g * g.adjoint());
        let tr = m.trace();
        Self::new_unchecked(m.scale(1.0 / tr), dims)
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.hs_inner(&self.matrix)
    }

    /// Reduced state on `keep`, ordered by ascending subsystem index.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<QuantumState> {
        let m = partial_trace_hermitian(&self.matrix, &self.dims, keep)?;
        let mut k = keep.to_vec();
        k.sort_unstable();
        Ok(Self::new_unchecked(m, k.iter().map(|&s| self.dims[s]).collect()))
    }

    /// (1 - lambda) rho + lambda I/d
    pub fn with_white_noise(&self, lambda: f64) -> Result<QuantumState> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidInput(format!("noise level {lambda} outside [0,1]")));
        }
        let d = self.dim() as f64;
        let mut m = self.matrix.scale(1.0 - lambda);
        m.axpy(lambda / d, &HermitianMatrix::identity(self.dim()));
        Ok(Self::new_unchecked(m, self.dims.clone()))
    }

    pub fn kron(&self, other: &QuantumState) -> QuantumState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new_unchecked(self.matrix.kron(&other.matrix), dims)
    }

    /// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        fidelity(&self.matrix, &other.matrix)
    }
}

pub fn fidelity(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    for m in [a, b] {
        let min = m.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidInput(format!("negative eigenvalue {min:e}")));
        }
    }
    let s = a.sqrt_psd();
    let inner = b.conjugate_by(s.as_matrix());
    // Eigenvalues at round-off level would add O(sqrt(eps)) each; drop them.
    let ev = inner.eigenvalues();
    let cut = 64.0 * f64::EPSILON * ev[0].abs() * a.dim() as f64;
    let tr: f64 = ev.iter().filter(|&&v| v > cut).map(|&v| v.sqrt()).sum();
    Ok(tr * tr)
}

fn gaussian_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    DVector::from_fn(d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::matrix::hs_distance;
    use crate::mathcore::RngSeed;
    use approx::assert_abs_diff_eq;

    fn ket(entries: &[(f64, f64)]) -> CVector {
        DVector::from_iterator(entries.len(), entries.iter().map(|&(r, i)| Complex64::new(r, i)))
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = RngSeed(7).rng();
        let a = QuantumState::random_mixed(vec![2], &mut rng);
        let b = QuantumState::random_mixed(vec![3], &mut rng);
        let ab = a.kron(&b);
        let ra = ab.partial_trace(&[0]).unwrap();
        let rb = ab.partial_trace(&[1]).unwrap();
        assert!(hs_distance(ra.matrix(), a.matrix()).unwrap() < 1e-12);
        assert!(hs_distance(rb.matrix(), b.matrix()).unwrap() < 1e-12);
        assert_eq!(rb.dims(), &[3]);
    }

    #[test]
    fn bell_state_marginal_is_maximally_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let phi = QuantumState::pure(&ket(&[(s, 0.0), (0.0, 0.0), (0.0, 0.0), (s, 0.0)]), vec![2, 2]).unwrap();
        let r = phi.partial_trace(&[0]).unwrap();
        assert!(hs_distance(r.matrix(), &HermitianMatrix::identity(2).scale(0.5)).unwrap() < 1e-14);
    }

    #[test]
    fn partial_trace_three_parties_middle() {
        let mut rng = RngSeed(3).rng();
        let a = QuantumState::random_mixed(vec![2], &mut rng);
        let b = QuantumState::random_mixed(vec![3], &mut rng);
        let c = QuantumState::random_mixed(vec![2], &mut rng);
        let abc = a.kron(&b).kron(&c);
        let ac = abc.partial_trace(&[2, 0]).unwrap();
        assert!(hs_distance(ac.matrix(), a.kron(&c).matrix()).unwrap() < 1e-12);
        let bb = abc.partial_trace(&[1]).unwrap();
        assert!(hs_distance(bb.matrix(), b.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn keep_everything_is_identity_map() {
        let mut rng = RngSeed(1).rng();
        let r = QuantumState::random_mixed(vec![2, 2], &mut rng);
        let same = r.partial_trace(&[0, 1]).unwrap();
        assert!(hs_distance(same.matrix(), r.matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn subsystem_errors() {
        let r = QuantumState::maximally_mixed(vec![2, 2]);
        assert!(matches!(r.partial_trace(&[2]), Err(Error::InvalidSubsystem(_))));
        assert!(matches!(r.partial_trace(&[]), Err(Error::InvalidSubsystem(_))));
        assert!(matches!(r.partial_trace(&[0, 0]), Err(Error::InvalidSubsystem(_))));
    }

    #[test]
    fn embed_then_trace_recovers_marginal() {
        let mut rng = RngSeed(11).rng();
        let s = QuantumState::random_mixed(vec![2, 2], &mut rng);
        let dims = [2, 2, 2];
        let e = embed_with_maximally_mixed(s.matrix(), &dims, &[0, 2]).unwrap();
        assert_abs_diff_eq!(e.trace(), 1.0, epsilon = 1e-14);
        let back = partial_trace_hermitian(&e, &dims, &[0, 2]).unwrap();
        assert!(hs_distance(&back, s.matrix()).unwrap() < 1e-14);
        let mid = partial_trace_hermitian(&e, &dims, &[1]).unwrap();
        assert!(hs_distance(&mid, &HermitianMatrix::identity(2).scale(0.5)).unwrap() < 1e-14);
    }

    #[test]
    fn state_validation() {
        assert!(QuantumState::from_matrix(HermitianMatrix::identity(2)).is_err());
        assert!(QuantumState::from_matrix(HermitianMatrix::diagonal(&[1.5, -0.5])).is_err());
        assert!(QuantumState::new(HermitianMatrix::diagonal(&[0.5, 0.5]), vec![3]).is_err());
    }

    #[test]
    fn fidelity_pure_reduces_to_overlap() {
        let mut rng = RngSeed(5).rng();
        let a = QuantumState::random_mixed(vec![3], &mut rng);
        let v = gaussian_vector(3, &mut rng);
        let v = v.unscale(v.norm());
        let b = QuantumState::pure(&v, vec![3]).unwrap();
        let direct = a.matrix().expectation(&v);
        assert_abs_diff_eq!(a.fidelity(&b).unwrap(), direct, epsilon = 1e-9);
        assert_abs_diff_eq!(b.fidelity(&b).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn fidelity_symmetric_and_bounded() {
        let mut rng = RngSeed(9).rng();
        for _ in 0..20 {
            let a = QuantumState::random_mixed(vec![4], &mut rng);
            let b = QuantumState::random_mixed(vec![4], &mut rng);
            let f1 = a.fidelity(&b).unwrap();
            let f2 = b.fidelity(&a).unwrap();
            assert_abs_diff_eq!(f1, f2, epsilon = 1e-9);
            assert!((0.0..=1.0 + 1e-12).contains(&f1));
        }
    }

    #[test]
    fn white_noise_limits() {
        let mut rng = RngSeed(2).rng();
        let a = QuantumState::random_pure(vec![2], &mut rng);
        let full = a.with_white_noise(1.0).unwrap();
        assert!(hs_distance(full.matrix(), QuantumState::maximally_mixed(vec![2]).matrix()).unwrap() < 1e-15);
        assert!(a.with_white_noise(1.5).is_err());
    }
}
