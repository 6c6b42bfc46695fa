//! Small dense complex linear algebra.
//!
//! Everything here works on vectors of length `B` or `E` (a handful of
//! antennas), so plain `Vec` storage and an unblocked Cholesky factorization
//! are all that is needed.

use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Column vector of complex channel or filter coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self(entries)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    /// Unit basis vector `e_index` of the given length.
    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * factor).collect())
    }

    /// `self^H other` without a length check; callers guarantee equal lengths.
    pub(crate) fn dot(&self, other: &Self) -> Complex64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
    }

    pub(crate) fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// Conjugate-linear inner product `a^H b`.
pub fn inner(a: &ComplexVector, b: &ComplexVector) -> Result<Complex64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.dot(b))
}

/// Squared Euclidean norm `||a||^2`.
pub fn sq_norm(a: &ComplexVector) -> f64 {
    a.norm_sqr()
}

/// Square complex matrix stored row-major, intended to hold Hermitian
/// operands of the form `sum_i p_i v_i v_i^H + s I`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// `s I` of dimension `dim`.
    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(s, 0.0);
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries. The entries are taken as given;
    /// use [`HermitianMatrix::is_hermitian`] to validate.
    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    /// In-place rank-one update `A += weight * v v^H`.
    pub fn add_outer(&mut self, weight: f64, v: &ComplexVector) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        for i in 0..self.dim {
            let vi = v[i] * weight;
            for j in 0..self.dim {
                self.data[i * self.dim + j] += vi * v[j].conj();
            }
        }
        Ok(())
    }

    pub fn mul_vec(&self, x: &ComplexVector) -> Result<ComplexVector> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let out = (0..self.dim)
            .map(|i| {
                let row = &self.data[i * self.dim..(i + 1) * self.dim];
                row.iter()
                    .zip(x.iter())
                    .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b)
            })
            .collect();
        Ok(ComplexVector(out))
    }

    /// Checks `A = A^H` entrywise, relative to the largest entry magnitude.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= rel_tol * scale)
        })
    }

    fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Solves `A x = b` for Hermitian positive definite `A` by Cholesky
/// factorization `A = L L^H` followed by two triangular solves.
///
/// Only the lower triangle of `A` is read. A pivot that is negative beyond
/// rounding (relative to the largest diagonal entry) means the input was not
/// positive definite and is reported as an error. Pivots lost to rounding in
/// nearly singular inputs, such as strong rank-one terms over a tiny noise
/// floor, are clamped to the rounding level so the solve stays finite.
pub fn hpd_solve(a: &HermitianMatrix, b: &ComplexVector) -> Result<ComplexVector> {
    let n = a.dim;
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    if !b.is_finite() {
        return Err(Error::NonFinite("right-hand side"));
    }

    let max_diag = (0..n).map(|i| a.get(i, i).re).fold(0.0, f64::max);
    // Rounding in the pivot update is bounded by a small multiple of
    // n^2 eps max_diag; anything more negative is genuine indefiniteness.
    let floor = (n as f64) * f64::EPSILON * max_diag;
    let tolerance = 16.0 * (n * n) as f64 * f64::EPSILON * max_diag;
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = a.get(j, j).re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > -tolerance) || !(floor > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let d = d.max(floor);
        let ljj = d.sqrt();
        l[j * n + j] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }

    // L y = b
    let mut y = b.0.clone();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i].re;
    }
    // L^H x = y
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i].conj() * y[k];
        }
        y[i] = s / l[i * n + i].re;
    }
    Ok(ComplexVector(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vector(rng: &mut impl Rng, len: usize) -> ComplexVector {
        ComplexVector::new(
            (0..len)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
    }

    #[test]
    fn inner_examples() {
        let a = ComplexVector::new(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(inner(&a, &a).unwrap(), c(2.0, 0.0));

        let e1 = ComplexVector::basis(2, 0);
        let e2 = ComplexVector::basis(2, 1);
        assert_eq!(inner(&e1, &e2).unwrap(), c(0.0, 0.0));

        let i = ComplexVector::new(vec![c(0.0, 1.0)]);
        let one = ComplexVector::new(vec![c(1.0, 0.0)]);
        assert_eq!(inner(&i, &one).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn inner_rejects_length_mismatch() {
        let a = ComplexVector::zeros(2);
        let b = ComplexVector::zeros(3);
        assert!(matches!(
            inner(&a, &b),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn sq_norm_examples() {
        let v = ComplexVector::new(vec![c(3.0, 0.0), c(0.0, 4.0)]);
        assert_eq!(sq_norm(&v), 25.0);
        assert_eq!(sq_norm(&ComplexVector::zeros(4)), 0.0);
        assert_eq!(sq_norm(&ComplexVector::basis(3, 1)), 1.0);
    }

    #[test]
    fn sq_norm_matches_inner() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v = random_vector(&mut rng, 5);
            let ip = inner(&v, &v).unwrap();
            assert!(ip.im.abs() <= 1e-14);
            assert!((ip.re - sq_norm(&v)).abs() <= 1e-14 * sq_norm(&v).max(1.0));
        }
    }

    #[test]
    fn inner_is_conjugate_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a = random_vector(&mut rng, 4);
            let b = random_vector(&mut rng, 4);
            let ab = inner(&a, &b).unwrap();
            let ba = inner(&b, &a).unwrap();
            assert!((ab - ba.conj()).norm() <= 1e-15);
        }
    }

    #[test]
    fn solve_scaled_identity() {
        let a = HermitianMatrix::scaled_identity(2, 2.0);
        let b = ComplexVector::new(vec![c(4.0, 0.0), c(0.0, 2.0)]);
        let x = hpd_solve(&a, &b).unwrap();
        assert!((x[0] - c(2.0, 0.0)).norm() <= 1e-15);
        assert!((x[1] - c(0.0, 1.0)).norm() <= 1e-15);
    }

    #[test]
    fn solve_rank_one_on_basis_vector() {
        let e1 = ComplexVector::basis(3, 0);
        let mut a = HermitianMatrix::scaled_identity(3, 1.0);
        a.add_outer(1.0, &e1).unwrap();
        let x = hpd_solve(&a, &e1).unwrap();
        assert!((x[0] - c(0.5, 0.0)).norm() <= 1e-15);
        assert_eq!((x[1], x[2]), (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn solve_random_hpd_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let mut a = HermitianMatrix::scaled_identity(4, rng.random_range(1e-3..1.0));
            for _ in 0..4 {
                let v = random_vector(&mut rng, 4);
                a.add_outer(rng.random_range(0.0..10.0), &v).unwrap();
            }
            assert!(a.is_hermitian(1e-12));
            let b = random_vector(&mut rng, 4);
            let x = hpd_solve(&a, &b).unwrap();
            let ax = a.mul_vec(&x).unwrap();
            let resid: f64 = ax
                .iter()
                .zip(b.iter())
                .map(|(p, q)| (p - q).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid <= 1e-10 * sq_norm(&b).sqrt(), "residual {resid}");
        }
    }

    #[test]
    fn solve_tiny_noise_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &n0 in &[1e-16, 1e-13, 1e-8] {
            for _ in 0..50 {
                let mut a = HermitianMatrix::scaled_identity(4, n0);
                for _ in 0..3 {
                    let v = random_vector(&mut rng, 4);
                    a.add_outer(rng.random_range(0.0..1.0), &v).unwrap();
                }
                let b = random_vector(&mut rng, 4);
                let x = hpd_solve(&a, &b).unwrap();
                assert!(x.is_finite());
            }
        }
    }

    #[test]
    fn solve_rank_one_keeps_direction() {
        // (P g g^H + N0 I) g = (P ||g||^2 + N0) g, so the solution is parallel to g.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let g = random_vector(&mut rng, 4);
            let mut a = HermitianMatrix::scaled_identity(4, rng.random_range(0.01..1.0));
            a.add_outer(rng.random_range(0.1..10.0), &g).unwrap();
            let x = hpd_solve(&a, &g).unwrap();
            let proj = g.dot(&x) / sq_norm(&g);
            let cross: f64 = x
                .iter()
                .zip(g.iter())
                .map(|(xi, gi)| (xi - proj * gi).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(cross <= 1e-10 * sq_norm(&x).sqrt());
        }
    }

    #[test]
    fn solve_rejects_indefinite_and_non_finite() {
        let a = HermitianMatrix::scaled_identity(2, -1.0);
        let b = ComplexVector::basis(2, 0);
        assert!(matches!(hpd_solve(&a, &b), Err(Error::NotPositiveDefinite { .. })));
        let a = HermitianMatrix::from_rows(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1e-6, 0.0)])
            .unwrap();
        assert!(matches!(hpd_solve(&a, &b), Err(Error::NotPositiveDefinite { pivot: 1, .. })));

        let a = HermitianMatrix::scaled_identity(2, 1.0);
        let bad = ComplexVector::new(vec![c(f64::NAN, 0.0), c(0.0, 0.0)]);
        assert!(matches!(hpd_solve(&a, &bad), Err(Error::NonFinite(_))));
        assert!(matches!(
            hpd_solve(&a, &ComplexVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
