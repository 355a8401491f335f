//! Measurement sets: PVMs, POVMs and Hilbert-Schmidt orthogonal observable
//! bases, plus the standard constructions (mutually unbiased bases, Pauli
//! product bases).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, HermitianMatrix};
use super::random::{haar_unitary, RngSeed};
use crate::error::{Error, Result};

pub const COMPLETENESS_TOL: f64 = 1e-8;
pub const EFFECT_PSD_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementKind {
    Pvm,
    Povm,
    /// Hilbert-Schmidt orthogonal observables; data are expectation values.
    ObservableBasis,
}

#[derive(Clone, Debug)]
pub struct MeasurementSet {
    effects: Vec<HermitianMatrix>,
    kind: MeasurementKind,
}

impl MeasurementSet {
    pub fn new(effects: Vec<HermitianMatrix>, kind: MeasurementKind) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::InvalidInput("measurement has no effects".into()));
        };
        let d = first.dim();
        if effects.iter().any(|e| e.dim() != d) {
            return Err(Error::InvalidInput("effects have different dimensions".into()));
        }
        match kind {
            MeasurementKind::ObservableBasis => {
                for i in 0..effects.len() {
                    for j in 0..i {
                        let ov = effects[i].hs_inner(&effects[j]);
                        if ov.abs() > COMPLETENESS_TOL {
                            return Err(Error::InvalidInput(format!(
                                "observables {j} and {i} are not orthogonal (overlap {ov:e})"
                            )));
                        }
                    }
                }
            }
            MeasurementKind::Pvm | MeasurementKind::Povm => {
                for (i, e) in effects.iter().enumerate() {
                    let min = e.min_eigenvalue();
                    if min < -EFFECT_PSD_TOL {
                        return Err(Error::InvalidInput(format!(
                            "effect {i} has negative eigenvalue {min:e}"
                        )));
                    }
                }
                let mut sum = HermitianMatrix::zeros(d);
                for e in &effects {
                    sum.axpy(1.0, e);
                }
                let dev = (sum.as_matrix() - CMatrix::identity(d, d)).camax();
                if dev > COMPLETENESS_TOL {
                    return Err(Error::InvalidInput(format!(
                        "effects do not sum to identity (deviation {dev:e})"
                    )));
                }
                if kind == MeasurementKind::Pvm {
                    for i in 0..effects.len() {
                        for j in 0..effects.len() {
                            let prod = effects[i].as_matrix() * effects[j].as_matrix();
                            let expected = if i == j {
                                effects[i].as_matrix().clone()
                            } else {
                                CMatrix::zeros(d, d)
                            };
                            if (prod - expected).camax() > COMPLETENESS_TOL {
                                return Err(Error::InvalidInput(format!(
                                    "effects {i} and {j} are not orthogonal projectors"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(Self { effects, kind })
    }

    /// Rank-one PVM from the columns of a unitary.
    pub fn from_basis(u: &CMatrix) -> Self {
        let effects = (0..u.ncols())
            .map(|j| HermitianMatrix::projector(&u.column(j).into_owned()))
            .collect();
        Self {
            effects,
            kind: MeasurementKind::Pvm,
        }
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    pub fn kind(&self) -> MeasurementKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    /// Tr(rho E_i) for every effect.
    pub fn born_probabilities(&self, rho: &HermitianMatrix) -> Vec<f64> {
        self.effects.iter().map(|e| rho.hs_inner(e)).collect()
    }
}

/// Dimension of the real span of all effects, from the Gram matrix rank.
pub fn span_dimension(sets: &[MeasurementSet]) -> usize {
    let all: Vec<&HermitianMatrix> = sets.iter().flat_map(|s| s.effects.iter()).collect();
    let n = all.len();
    let gram = DMatrix::from_fn(n, n, |i, j| all[i].hs_inner(all[j]));
    let sv = gram.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-9 * max.max(1.0)).count()
}

/// Qubit PVM for the observable n.sigma; outcome 0 is the +1 eigenvalue.
pub fn qubit_observable_pvm(direction: [f64; 3]) -> Result<MeasurementSet> {
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidInput("zero direction".into()));
    }
    let [x, y, z] = direction.map(|v| v / norm);
    let id = HermitianMatrix::identity(2);
    let obs = HermitianMatrix::hermitize(CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(z, 0.0),
            Complex64::new(x, -y),
            Complex64::new(x, y),
            Complex64::new(-z, 0.0),
        ],
    ));
    Ok(MeasurementSet {
        effects: vec![(&id + &obs).scale(0.5), (&id - &obs).scale(0.5)],
        kind: MeasurementKind::Pvm,
    })
}

/// PVM in a Haar-random basis.
pub fn random_pvm<R: Rng + ?Sized>(d: usize, rng: &mut R) -> MeasurementSet {
    MeasurementSet::from_basis(&haar_unitary(d, rng))
}

// ── Pauli product bases ──

fn qubit_basis(axis: usize) -> CMatrix {
    let s = 1.0 / 2f64.sqrt();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match axis {
        // sigma_3
        0 => CMatrix::identity(2, 2),
        // sigma_1
        1 => CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
        // sigma_2
        _ => CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(0.0, s), c(0.0, -s)]),
    }
}

/// All 3^n tensor products of single-qubit Pauli eigenbases. Qubit 0 is the
/// slowest-varying label; axes run sigma_3, sigma_1, sigma_2.
pub fn pauli_product_bases(n: usize) -> Result<Vec<MeasurementSet>> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one qubit".into()));
    }
    let count = 3usize.pow(n as u32);
    let mut out = Vec::with_capacity(count);
    for label in 0..count {
        let mut u = CMatrix::identity(1, 1);
        let mut rest = label;
        let mut axes = vec![0; n];
        for q in (0..n).rev() {
            axes[q] = rest % 3;
            rest /= 3;
        }
        for &a in &axes {
            u = u.kronecker(&qubit_basis(a));
        }
        out.push(MeasurementSet::from_basis(&u));
    }
    Ok(out)
}

/// Normalized Pauli strings (I, X, Y, Z)^{n} / sqrt(2^n) as an observable
/// basis of the Hermitian matrices.
pub fn pauli_observable_basis(n: usize) -> Result<MeasurementSet> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one qubit".into()));
    }
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let paulis = [
        CMatrix::identity(2, 2),
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
    ];
    let count = 4usize.pow(n as u32);
    let norm = 1.0 / (2f64.powi(n as i32)).sqrt();
    let mut effects = Vec::with_capacity(count);
    for label in 0..count {
        let mut m = CMatrix::identity(1, 1);
        let mut rest = label;
        let mut idx = vec![0; n];
        for q in (0..n).rev() {
            idx[q] = rest % 4;
            rest /= 4;
        }
        for &i in &idx {
            m = m.kronecker(&paulis[i]);
        }
        effects.push(HermitianMatrix::hermitize(m).scale(norm));
    }
    Ok(MeasurementSet {
        effects,
        kind: MeasurementKind::ObservableBasis,
    })
}

// ── Mutually unbiased bases ──

/// Returns (p, n) with d = p^n, or None.
pub fn prime_power(d: usize) -> Option<(usize, usize)> {
    if d < 2 {
        return None;
    }
    let p = (2..=d).find(|k| d % k == 0)?;
    let mut rest = d;
    let mut n = 0;
    while rest % p == 0 {
        rest /= p;
        n += 1;
    }
    (rest == 1).then_some((p, n))
}

/// Finite field GF(p^n); elements are integers whose base-p digits are the
/// polynomial coefficients (digit i multiplies t^i).
struct GaloisField {
    p: usize,
    n: usize,
    modulus: Vec<usize>,
}

fn poly_rem(mut a: Vec<usize>, b: &[usize], p: usize) -> Vec<usize> {
    // b monic
    let db = b.len() - 1;
    while a.len() > db {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - db;
        if lead != 0 {
            for (i, &bi) in b.iter().enumerate() {
                a[shift + i] = (a[shift + i] + p - (lead * bi) % p) % p;
            }
        }
        a.pop();
    }
    a
}

fn poly_mul(a: &[usize], b: &[usize], p: usize) -> Vec<usize> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

fn monic_polys(p: usize, degree: usize) -> impl Iterator<Item = Vec<usize>> {
    let count = p.pow(degree as u32);
    (0..count).map(move |mut k| {
        let mut c = Vec::with_capacity(degree + 1);
        for _ in 0..degree {
            c.push(k % p);
            k /= p;
        }
        c.push(1);
        c
    })
}

impl GaloisField {
    fn new(p: usize, n: usize) -> Self {
        let modulus = monic_polys(p, n)
            .find(|f| {
                (1..=n / 2).all(|deg| {
                    monic_polys(p, deg).all(|g| poly_rem(f.clone(), &g, p).iter().any(|&c| c != 0))
                })
            })
            .expect("an irreducible polynomial exists for every degree");
        Self { p, n, modulus }
    }

    fn size(&self) -> usize {
        self.p.pow(self.n as u32)
    }

    fn digits(&self, mut x: usize) -> Vec<usize> {
        let mut d = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            d.push(x % self.p);
            x /= self.p;
        }
        d
    }

    fn from_digits(&self, d: &[usize]) -> usize {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        let prod = poly_mul(&self.digits(a), &self.digits(b), self.p);
        let mut r = poly_rem(prod, &self.modulus, self.p);
        r.resize(self.n, 0);
        self.from_digits(&r)
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let (da, db) = (self.digits(a), self.digits(b));
        let s: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.from_digits(&s)
    }

    /// Absolute trace x + x^p + ... + x^{p^{n-1}}, an element of GF(p).
    fn trace(&self, x: usize) -> usize {
        let mut acc = 0;
        let mut power = x;
        for _ in 0..self.n {
            acc = self.add(acc, power);
            let mut next = 1;
            for _ in 0..self.p {
                next = self.mul(next, power);
            }
            power = next;
        }
        acc % self.p
    }
}

/// Generalized Pauli X^b Z^c on n qudits of dimension p; qudit 0 is the most
/// significant digit of the basis label.
fn displacement(p: usize, b: &[usize], c: &[usize]) -> CMatrix {
    let n = b.len();
    let d = p.pow(n as u32);
    let omega = 2.0 * std::f64::consts::PI / p as f64;
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        let mut digits = vec![0; n];
        let mut rest = j;
        for q in (0..n).rev() {
            digits[q] = rest % p;
            rest /= p;
        }
        let phase: usize = digits.iter().zip(c).map(|(x, y)| x * y).sum::<usize>() % p;
        let target = digits
            .iter()
            .zip(b)
            .fold(0, |acc, (x, y)| acc * p + (x + y) % p);
        m[(target, j)] = Complex64::from_polar(1.0, omega * phase as f64);
    }
    m
}

/// Common eigenbasis of commuting unitaries, from a generic Hermitian
/// combination of them.
fn common_eigenbasis(generators: &[CMatrix]) -> CMatrix {
    let d = generators[0].nrows();
    let mut rng = RngSeed(0x5eed).rng();
    loop {
        let mut h = CMatrix::zeros(d, d);
        for g in generators {
            let w = Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU));
            h += g * w + g.adjoint() * w.conj();
        }
        let e = HermitianMatrix::hermitize(h).eigh();
        let gap = e
            .values
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min);
        if gap > 1e-6 {
            return e.vectors;
        }
    }
}

/// d + 1 mutually unbiased bases for prime-power d.
///
/// Each basis diagonalizes one maximal commuting class of generalized Pauli
/// operators. For d = 2 the order is sigma_3, sigma_1, sigma_2; for prime d
/// the classes are Z, X, XZ, XZ^2, ..., XZ^{d-1}.
pub fn mub_bases(d: usize) -> Result<Vec<MeasurementSet>> {
    let (p, n) = prime_power(d).ok_or(Error::UnsupportedDimension(d))?;
    let field = GaloisField::new(p, n);
    let basis_elem: Vec<usize> = (0..n).map(|i| p.pow(i as u32)).collect();
    // Gram matrix of the trace form in the polynomial basis.
    let gram: Vec<Vec<usize>> = basis_elem
        .iter()
        .map(|&ei| basis_elem.iter().map(|&ej| field.trace(field.mul(ei, ej))).collect())
        .collect();
    let unit = |i: usize| -> Vec<usize> { (0..n).map(|k| usize::from(k == i)).collect() };

    let mut out = Vec::with_capacity(d + 1);
    out.push(MeasurementSet::from_basis(&CMatrix::identity(d, d)));
    for a in 0..field.size() {
        let generators: Vec<CMatrix> = (0..n)
            .map(|i| {
                let prod = field.digits(field.mul(a, basis_elem[i]));
                let c: Vec<usize> = (0..n)
                    .map(|r| (0..n).map(|s| gram[r][s] * prod[s]).sum::<usize>() % p)
                    .collect();
                displacement(p, &unit(i), &c)
            })
            .collect();
        out.push(MeasurementSet::from_basis(&common_eigenbasis(&generators)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn max_overlap_error(bases: &[MeasurementSet]) -> f64 {
        let d = bases[0].dim() as f64;
        let mut worst: f64 = 0.0;
        for i in 0..bases.len() {
            for j in 0..i {
                for e in bases[i].effects() {
                    for f in bases[j].effects() {
                        worst = worst.max((e.hs_inner(f) - 1.0 / d).abs());
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn mub_qubit_is_pauli_eigenbases() {
        let b = mub_bases(2).unwrap();
        assert_eq!(b.len(), 3);
        // sigma_3, sigma_1, sigma_2: <E_0> of each Pauli on its own basis is +-1
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let paulis = [
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        ];
        for (set, pauli) in b.iter().zip(&paulis) {
            let p = HermitianMatrix::new(pauli.clone()).unwrap();
            for e in set.effects() {
                assert_abs_diff_eq!(e.hs_inner(&p).abs(), 1.0, epsilon = 1e-10);
            }
            MeasurementSet::new(set.effects().to_vec(), MeasurementKind::Pvm).unwrap();
        }
    }

    #[test]
    fn mub_overlaps() {
        for d in [2, 3, 4, 5, 7, 8, 9] {
            let b = mub_bases(d).unwrap();
            assert_eq!(b.len(), d + 1);
            assert!(max_overlap_error(&b) < 1e-9, "d = {d}");
            for set in &b {
                MeasurementSet::new(set.effects().to_vec(), MeasurementKind::Pvm).unwrap();
            }
        }
    }

    #[test]
    fn mub_rejects_composite() {
        assert!(matches!(mub_bases(6), Err(Error::UnsupportedDimension(6))));
        assert!(matches!(mub_bases(1), Err(Error::UnsupportedDimension(1))));
    }

    #[test]
    fn pauli_bases_counts_and_completeness() {
        assert_eq!(pauli_product_bases(1).unwrap().len(), 3);
        let two = pauli_product_bases(2).unwrap();
        assert_eq!(two.len(), 9);
        for set in &two {
            assert_eq!(set.len(), 4);
            MeasurementSet::new(set.effects().to_vec(), MeasurementKind::Pvm).unwrap();
        }
        assert_eq!(span_dimension(&two), 16);
    }

    #[test]
    fn observable_basis_validates() {
        let basis = pauli_observable_basis(2).unwrap();
        assert_eq!(basis.len(), 16);
        MeasurementSet::new(basis.effects().to_vec(), MeasurementKind::ObservableBasis).unwrap();
        assert_eq!(span_dimension(&[basis]), 16);
    }

    #[test]
    fn invalid_sets_rejected() {
        let half = HermitianMatrix::identity(2).scale(0.5);
        assert!(MeasurementSet::new(vec![half.clone()], MeasurementKind::Povm).is_err());
        // valid POVM, not a PVM
        assert!(MeasurementSet::new(vec![half.clone(), half.clone()], MeasurementKind::Povm).is_ok());
        assert!(MeasurementSet::new(vec![half.clone(), half], MeasurementKind::Pvm).is_err());
        assert!(MeasurementSet::new(vec![], MeasurementKind::Pvm).is_err());
    }

    #[test]
    fn observable_pvm_outcome_zero_is_plus() {
        let m = qubit_observable_pvm([0.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(m.effects()[0].get(0, 0).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn born_probabilities_sum_to_one() {
        let mut rng = RngSeed(4).rng();
        let rho = crate::mathcore::QuantumState::random_mixed(vec![3], &mut rng);
        for set in mub_bases(3).unwrap() {
            let p = set.born_probabilities(rho.matrix());
            assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }
}
