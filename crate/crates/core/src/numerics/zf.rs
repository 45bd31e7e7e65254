//! Zero-forcing directions through the pseudo-inverse of the stacked
//! channel matrix.
//!
//! With `A = [h_1 ... h_n]` (`nt x n`), the zero-forcing matrix is
//! `Z = A (A^H A)^{-1} = (A^+)^H`, so `h_j^H z_k = delta_jk`. We get `A^+`
//! from a one-sided (Hestenes) Jacobi SVD: rotating the columns of `A` until
//! they are mutually orthogonal yields `A W = U S` with `W` unitary, and then
//! `Z = (A W) S^{-2} W^H`.

use num_complex::Complex64;

use super::{inner, norm_sqr, ComplexVector};
use crate::error::{Error, Result};

/// A channel set is singular when `sigma_min < RANK_TOLERANCE * sigma_max`.
pub const RANK_TOLERANCE: f64 = 1e-9;

const MAX_SWEEPS: usize = 60;
const ORTHO_EPS: f64 = 1e-15;

/// Reusable scratch space for repeated zero-forcing solves of size `<= nt`.
///
/// Greedy user selection solves thousands of small problems per block;
/// keeping the buffers around avoids reallocating for each candidate set.
#[derive(Clone, Debug)]
pub struct ZfSolver {
    nt: usize,
    n: usize,
    // column-major nt x n
    a: Vec<Complex64>,
    // column-major n x n
    w: Vec<Complex64>,
    sigma2: Vec<f64>,
    // column-major nt x n, unit-norm zero-forcing directions
    dirs: Vec<Complex64>,
    // |h_k^H v_k|^2 for the inputs as given
    alignment: Vec<f64>,
}

impl ZfSolver {
    pub fn new(nt: usize) -> Self {
        Self {
            nt,
            n: 0,
            a: Vec::with_capacity(nt * nt),
            w: Vec::with_capacity(nt * nt),
            sigma2: Vec::with_capacity(nt),
            dirs: Vec::with_capacity(nt * nt),
            alignment: Vec::with_capacity(nt),
        }
    }

    /// Number of directions produced by the last successful solve.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unit-norm direction for the `k`-th channel of the last solve.
    pub fn direction(&self, k: usize) -> &[Complex64] {
        &self.dirs[k * self.nt..(k + 1) * self.nt]
    }

    /// `|h_k^H v_k|^2` for the `k`-th channel of the last solve.
    pub fn alignment(&self, k: usize) -> f64 {
        self.alignment[k]
    }

    /// Solves for the zero-forcing directions of `channels`.
    pub fn solve<'a, I>(&mut self, channels: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a [Complex64]>,
    {
        let nt = self.nt;
        self.a.clear();
        for h in channels {
            if h.len() != nt {
                return Err(Error::InvalidDimension(format!(
                    "channel of length {} in a {nt}-antenna solve",
                    h.len()
                )));
            }
            self.a.extend_from_slice(h);
        }
        let n = self.a.len() / nt;
        self.n = 0;
        if n == 0 || n > nt {
            return Err(Error::InvalidDimension(format!(
                "zero-forcing needs 1..={nt} channels, got {n}"
            )));
        }

        self.w.clear();
        self.w.resize(n * n, Complex64::new(0.0, 0.0));
        for k in 0..n {
            self.w[k * n + k] = Complex64::new(1.0, 0.0);
        }

        self.orthogonalize_columns(n);

        self.sigma2.clear();
        for j in 0..n {
            self.sigma2.push(norm_sqr(&self.a[j * nt..(j + 1) * nt]));
        }
        let max2 = self.sigma2.iter().cloned().fold(0.0, f64::max);
        let min2 = self.sigma2.iter().cloned().fold(f64::INFINITY, f64::min);
        if max2 == 0.0 || !(min2 >= RANK_TOLERANCE * RANK_TOLERANCE * max2) {
            return Err(Error::SingularSet);
        }

        // Z[:, k] = sum_j (A W)[:, j] / sigma_j^2 * conj(W[k, j])
        self.dirs.clear();
        self.dirs.resize(nt * n, Complex64::new(0.0, 0.0));
        self.alignment.clear();
        for k in 0..n {
            let z = &mut self.dirs[k * nt..(k + 1) * nt];
            for j in 0..n {
                let coef = self.w[j * n + k].conj() / self.sigma2[j];
                let col = &self.a[j * nt..(j + 1) * nt];
                for (zi, ai) in z.iter_mut().zip(col) {
                    *zi += ai * coef;
                }
            }
            let znorm2 = norm_sqr(z);
            let scale = 1.0 / znorm2.sqrt();
            for zi in z.iter_mut() {
                *zi *= scale;
            }
            // h_k^H z_k = 1, hence |h_k^H v_k|^2 = 1 / ||z_k||^2.
            self.alignment.push(1.0 / znorm2);
        }
        self.n = n;
        Ok(())
    }

    fn orthogonalize_columns(&mut self, n: usize) {
        let nt = self.nt;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let (alpha, beta, gamma) = {
                        let ap = &self.a[p * nt..(p + 1) * nt];
                        let aq = &self.a[q * nt..(q + 1) * nt];
                        (norm_sqr(ap), norm_sqr(aq), inner(ap, aq))
                    };
                    let g = gamma.norm();
                    if g == 0.0 || g <= ORTHO_EPS * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let phase_conj = (gamma / g).conj();
                    let zeta = (beta - alpha) / (2.0 * g);
                    let t = if zeta >= 0.0 {
                        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                    } else {
                        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate(&mut self.a, nt, p, q, phase_conj, c, s);
                    rotate(&mut self.w, n, p, q, phase_conj, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
    }
}

/// Column update `(x_p, x_q) <- (c x_p - s y, s x_p + c y)` with `y = e^{-i phi} x_q`.
#[inline]
fn rotate(
    m: &mut [Complex64],
    rows: usize,
    p: usize,
    q: usize,
    phase_conj: Complex64,
    c: f64,
    s: f64,
) {
    for i in 0..rows {
        let xp = m[p * rows + i];
        let xq = m[q * rows + i] * phase_conj;
        m[p * rows + i] = xp * c - xq * s;
        m[q * rows + i] = xp * s + xq * c;
    }
}

/// Unit-norm zero-forcing directions for a set of (quantized) channels.
///
/// `v_k` is the normalized projection of `h_k` onto the null space of the
/// other channels, so `h_j^H v_k = 0` for `j != k`.
pub fn zf_directions(channels: &[ComplexVector]) -> Result<Vec<ComplexVector>> {
    let nt = channels
        .first()
        .map(|h| h.len())
        .ok_or_else(|| Error::InvalidDimension("zero-forcing needs at least one channel".into()))?;
    let mut solver = ZfSolver::new(nt);
    solver.solve(channels.iter().map(|h| h.entries()))?;
    Ok((0..solver.len())
        .map(|k| ComplexVector::new(solver.direction(k).to_vec()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_user_is_matched_filter() {
        let h = ComplexVector::new(vec![c(1.0, -2.0), c(0.5, 0.5), c(0.0, 3.0)]);
        let v = zf_directions(std::slice::from_ref(&h)).unwrap();
        let expected = h.normalized();
        for (a, b) in v[0].iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn orthogonal_inputs_are_returned_normalized() {
        let h1 = ComplexVector::new(vec![c(2.0, 0.0), c(0.0, 0.0)]);
        let h2 = ComplexVector::new(vec![c(0.0, 0.0), c(0.0, -3.0)]);
        let v = zf_directions(&[h1.clone(), h2.clone()]).unwrap();
        assert!((v[0].cos2(&h1) - 1.0).abs() < 1e-15);
        assert!((v[1].cos2(&h2) - 1.0).abs() < 1e-15);
        assert!(v[0].inner(&h1).re > 0.0);
    }

    #[test]
    fn random_sets_are_zero_forced() {
        for stream in 0..500 {
            let mut rng = RngStream::new(9, stream);
            let nt = 4;
            let n = 1 + (stream as usize % 4);
            let hs: Vec<_> = (0..n)
                .map(|_| ComplexVector::standard_normal(nt, &mut rng))
                .collect();
            let vs = zf_directions(&hs).unwrap();
            for (k, v) in vs.iter().enumerate() {
                assert!((v.norm() - 1.0).abs() <= 1e-10);
                assert!(hs[k].inner(v).norm() > 1e-6);
                for (j, h) in hs.iter().enumerate() {
                    if j != k {
                        assert!(h.inner(v).norm() <= 1e-8, "cross {j},{k}");
                    }
                }
            }
        }
    }

    #[test]
    fn duplicate_channels_are_singular() {
        let mut rng = RngStream::new(1, 2);
        let h = ComplexVector::standard_normal(4, &mut rng);
        let g = h.scaled(-0.7);
        assert_eq!(zf_directions(&[h, g]), Err(Error::SingularSet));
    }

    #[test]
    fn too_many_channels_is_a_dimension_error() {
        let hs = vec![
            ComplexVector::basis(2, 0),
            ComplexVector::basis(2, 1),
            ComplexVector::basis(2, 0),
        ];
        assert!(matches!(
            zf_directions(&hs),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn alignment_matches_inner_product() {
        let mut rng = RngStream::new(4, 4);
        let hs: Vec<_> = (0..3)
            .map(|_| ComplexVector::standard_normal(4, &mut rng).normalized())
            .collect();
        let mut solver = ZfSolver::new(4);
        solver.solve(hs.iter().map(|h| h.entries())).unwrap();
        for (k, h) in hs.iter().enumerate() {
            let direct = inner(h, solver.direction(k)).norm_sqr();
            assert!((direct - solver.alignment(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn ordering_only_changes_phase() {
        let mut rng = RngStream::new(8, 3);
        let hs: Vec<_> = (0..3)
            .map(|_| ComplexVector::standard_normal(4, &mut rng))
            .collect();
        let forward = zf_directions(&hs).unwrap();
        let reversed: Vec<_> = hs.iter().rev().cloned().collect();
        let backward = zf_directions(&reversed).unwrap();
        for k in 0..3 {
            assert!((forward[k].cos2(&backward[2 - k]) - 1.0).abs() < 1e-10);
        }
    }
}
