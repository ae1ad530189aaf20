//! Banded linear algebra for the symmetric chain/ring operators produced by the
//! second-difference stencil.
//!
//! Periodic (ring) operators are not banded in natural order because of the
//! wrap-around coupling. Reordering the unknowns as `0, n-1, 1, n-2, 2, ...`
//! places every ring neighbour within distance two, so both boundary kinds end
//! up as band matrices and never need dense storage.

use std::ops::{Add, Mul, Sub};

use num_complex::{Complex64, ComplexFloat};

use crate::error::{Error, Result};

/// Scalar types the banded routines operate on.
pub trait Scalar:
    ComplexFloat<Real = f64> + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + From<f64>
{
    fn real(v: f64) -> Self {
        <Self as From<f64>>::from(v)
    }
}

impl Scalar for f64 {}
impl Scalar for Complex64 {}

/// Real symmetric tridiagonal operator, optionally closed into a ring.
///
/// `off[i]` couples unknowns `i` and `i + 1`; on a ring `off[n - 1]` couples
/// `n - 1` and `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymOperator {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub ring: bool,
}

impl SymOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = A x`.
    pub fn apply<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        let mut y: Vec<T> = (0..n).map(|i| x[i] * T::real(self.diag[i])).collect();
        for i in 0..n.saturating_sub(1) {
            let s = T::real(self.off[i]);
            y[i] = y[i] + s * x[i + 1];
            y[i + 1] = y[i + 1] + s * x[i];
        }
        if self.ring && n > 2 {
            let s = T::real(self.off[n - 1]);
            y[n - 1] = y[n - 1] + s * x[0];
            y[0] = y[0] + s * x[n - 1];
        }
        y
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let closed = self.ring && n > 2;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i + 1 < n {
                r += self.off[i].abs();
            } else if closed {
                r += self.off[n - 1].abs();
            }
            if i > 0 {
                r += self.off[i - 1].abs();
            } else if closed {
                r += self.off[n - 1].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Unknown ordering that makes the operator banded, and the bandwidth.
    fn ordering(&self) -> (Vec<usize>, usize) {
        let n = self.len();
        if !self.ring || n <= 2 {
            return ((0..n).collect(), 1);
        }
        let perm = (0..n)
            .map(|q| if q % 2 == 0 { q / 2 } else { n - 1 - (q - 1) / 2 })
            .collect();
        (perm, 2)
    }

    /// Band representation of `alpha * I + beta * A` in the banding order.
    pub fn affine_band<T: Scalar>(&self, alpha: T, beta: T) -> BandedSystem<T> {
        let n = self.len();
        let (perm, bw) = self.ordering();
        let mut pos = vec![0usize; n];
        for (q, &i) in perm.iter().enumerate() {
            pos[i] = q;
        }
        let mut band = BandMatrix::zeros(n, bw, bw);
        for i in 0..n {
            band.add(pos[i], pos[i], alpha + beta * T::real(self.diag[i]));
        }
        let mut couple = |i: usize, j: usize, s: f64| {
            let v = beta * T::real(s);
            band.add(pos[i], pos[j], v);
            band.add(pos[j], pos[i], v);
        };
        for i in 0..n.saturating_sub(1) {
            couple(i, i + 1, self.off[i]);
        }
        if self.ring && n > 2 {
            couple(n - 1, 0, self.off[n - 1]);
        }
        BandedSystem { band, perm }
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester inertia).
    pub fn count_below(&self, sigma: f64) -> usize {
        let sys = self.affine_band(-sigma, 1.0);
        sys.band.negative_pivots()
    }
}

/// Band matrix with room for the fill produced by partial pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![T::real(0.0); n * width],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> T {
        self.data[self.idx(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let k = self.idx(i, j);
        self.data[k] = self.data[k] + v;
    }

    /// Count of negative pivots of an LDL^T-style elimination without pivoting.
    /// Only meaningful for real symmetric matrices.
    fn negative_pivots(mut self) -> usize {
        let n = self.n;
        let scale = self
            .data
            .iter()
            .map(|v| v.abs())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * scale;
        let mut negatives = 0;
        for k in 0..n {
            let mut d = self.get(k, k).re();
            if d.abs() < tiny {
                d = -tiny;
                self.set(k, k, T::real(d));
            }
            if d < 0.0 {
                negatives += 1;
            }
            let last = (k + self.kl).min(n - 1);
            for i in k + 1..=last {
                let l = self.get(i, k) / T::real(d);
                if l == T::real(0.0) {
                    continue;
                }
                for j in k + 1..=(k + self.ku).min(n - 1) {
                    let v = self.get(i, j) - l * self.get(k, j);
                    self.set(i, j, v);
                }
            }
        }
        negatives
    }

    /// LU factorisation with partial pivoting.
    ///
    /// With `nudge_zero_pivots`, an exactly vanishing pivot is replaced by a
    /// tiny multiple of the matrix scale instead of failing; inverse iteration
    /// relies on this.
    pub fn factor(mut self, nudge_zero_pivots: bool) -> Result<BandLu<T>> {
        let n = self.n;
        let kl = self.kl;
        let span = kl + self.ku;
        let scale = self
            .data
            .iter()
            .map(|v| v.abs())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let a = self.get(i, k).abs();
                if a > best {
                    best = a;
                    p = i;
                }
            }
            piv[k] = p;
            let last_col = (k + span).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
            }
            let mut pivot = self.get(k, k);
            if pivot.abs() == 0.0 {
                if nudge_zero_pivots {
                    pivot = T::real(f64::EPSILON * scale);
                    self.set(k, k, pivot);
                } else {
                    return Err(Error::SingularSystem { pivot: k });
                }
            }
            for i in k + 1..=last_row {
                let l = self.get(i, k) / pivot;
                self.set(i, k, l);
                if l == T::real(0.0) {
                    continue;
                }
                for j in k + 1..=last_col {
                    let v = self.get(i, j) - l * self.get(k, j);
                    self.set(i, j, v);
                }
            }
        }
        Ok(BandLu { band: self, piv })
    }
}

/// Factored band matrix.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    band: BandMatrix<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> BandLu<T> {
    pub fn solve_in_place(&self, b: &mut [T]) {
        let a = &self.band;
        let n = a.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..=(k + a.kl).min(n - 1) {
                b[i] = b[i] - a.get(i, k) * bk;
            }
        }
        let span = a.kl + a.ku;
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + span).min(n - 1) {
                s = s - a.get(k, j) * b[j];
            }
            b[k] = s / a.get(k, k);
        }
    }
}

/// A band matrix together with the ordering used to build it.
#[derive(Debug, Clone)]
pub struct BandedSystem<T> {
    band: BandMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> BandedSystem<T> {
    pub fn factor(self, nudge_zero_pivots: bool) -> Result<FactoredSystem<T>> {
        Ok(FactoredSystem {
            lu: self.band.factor(nudge_zero_pivots)?,
            perm: self.perm,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FactoredSystem<T> {
    lu: BandLu<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> FactoredSystem<T> {
    /// Solves in the operator's natural ordering.
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut b: Vec<T> = self.perm.iter().map(|&i| rhs[i]).collect();
        self.lu.solve_in_place(&mut b);
        let mut out = vec![T::real(0.0); rhs.len()];
        for (q, &i) in self.perm.iter().enumerate() {
            out[i] = b[q];
        }
        out
    }
}
