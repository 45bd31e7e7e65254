//! Complex vector primitives, seeded random streams and the small numerical
//! kernels the simulator is built on.

mod lambert;
mod order_stats;
mod zf;

use std::ops::{Deref, Index};

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub use lambert::lambert_w_m1;
pub use order_stats::{max_gamma_expectation, MaxGammaForm, EULER_GAMMA};
pub use zf::{zf_directions, ZfSolver, RANK_TOLERANCE};

/// A column vector of complex channel coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Unit vector `e_index` of dimension `n`.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// I.i.d. CN(0, 1) entries.
    pub fn standard_normal(n: usize, rng: &mut RngStream) -> Self {
        Self((0..n).map(|_| rng.complex_normal()).collect())
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.0
    }

    /// Hermitian inner product `self^H other`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        inner(&self.0, &other.0)
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|z| z * factor).collect())
    }

    /// `self / ||self||`. A zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scaled(1.0 / n)
    }

    /// `cos^2` of the angle between two vectors, `|a^H b|^2 / (||a||^2 ||b||^2)`.
    pub fn cos2(&self, other: &ComplexVector) -> f64 {
        let den = self.norm_sqr() * other.norm_sqr();
        if den == 0.0 {
            return 0.0;
        }
        (self.inner(other).norm_sqr() / den).min(1.0)
    }
}

impl Deref for ComplexVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
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

#[inline]
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
pub(crate) fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// A deterministic random stream keyed by `(seed, stream_id)`.
///
/// Backed by ChaCha8, whose 2^64 independent streams let every Monte Carlo
/// trial own a stream regardless of which thread runs it.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// A CN(0, 1) sample: independent real and imaginary parts of variance 1/2.
    pub fn complex_normal(&mut self) -> Complex64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// `n` mutually orthogonal unit vectors in `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalSet {
    vectors: Vec<ComplexVector>,
}

impl OrthonormalSet {
    /// Wraps vectors the caller guarantees to be orthonormal.
    pub fn from_vectors(vectors: Vec<ComplexVector>) -> Self {
        Self { vectors }
    }

    /// The standard basis `e_1, ..., e_n`.
    pub fn standard(n: usize) -> Self {
        Self {
            vectors: (0..n).map(|i| ComplexVector::basis(n, i)).collect(),
        }
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Largest entry of `|U^H U - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - target).norm());
            }
        }
        worst
    }
}

/// Draws a Haar-distributed orthonormal basis of `C^n`.
///
/// Orthonormalizes an i.i.d. CN(0, 1) matrix column by column (modified
/// Gram-Schmidt, two passes). The implied `R` factor has a positive real
/// diagonal, which is what makes the result exactly Haar.
pub fn haar_orthonormal_set(rng: &mut RngStream, n: usize) -> Result<OrthonormalSet> {
    if n == 0 {
        return Err(Error::InvalidDimension(
            "orthonormal set needs n >= 1".into(),
        ));
    }
    let mut vectors: Vec<ComplexVector> = Vec::with_capacity(n);
    while vectors.len() < n {
        let mut v = ComplexVector::standard_normal(n, rng).into_entries();
        for _ in 0..2 {
            for u in &vectors {
                let proj = inner(u, &v);
                for (x, y) in v.iter_mut().zip(u.iter()) {
                    *x -= proj * y;
                }
            }
        }
        let norm = norm_sqr(&v).sqrt();
        // A draw inside the span of the previous columns has probability zero;
        // redraw rather than divide by ~0.
        if norm < 1e-8 {
            continue;
        }
        let scale = 1.0 / norm;
        vectors.push(ComplexVector(v.into_iter().map(|z| z * scale).collect()));
    }
    Ok(OrthonormalSet { vectors })
}

/// A unit vector drawn uniformly from the sphere in `C^n`.
pub fn isotropic_unit_vector(n: usize, rng: &mut RngStream) -> ComplexVector {
    loop {
        let v = ComplexVector::standard_normal(n, rng);
        if v.norm_sqr() > 0.0 {
            return v.normalized();
        }
    }
}
