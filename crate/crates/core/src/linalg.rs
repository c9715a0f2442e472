//! Dense linear algebra helpers: pivoted LU determinants, solves and spectra.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// A determinant stored as `exp(log_abs) * phase`, so large or tiny values do not overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Determinant {
    pub log_abs: f64,
    #[serde(serialize_with = "serialize_complex")]
    pub phase: Complex64,
    /// A pivot was exactly zero.
    pub zero: bool,
}

fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl Determinant {
    pub fn value(&self) -> Complex64 {
        if self.zero {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * self.log_abs.exp()
        }
    }

    /// Real part of the value; for real matrices this is the determinant itself.
    pub fn real(&self) -> f64 {
        self.value().re
    }

    /// `log det` when the determinant is real and positive.
    pub fn log_positive(&self) -> Result<f64> {
        if self.zero || self.phase.re <= 0.0 || self.phase.im.abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "determinant is not positive (phase {}, zero {})",
                self.phase, self.zero
            )));
        }
        Ok(self.log_abs)
    }
}

/// Determinant of a square matrix by LU factorization with partial pivoting.
pub fn log_det<T>(mut a: DMatrix<T>) -> Determinant
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "determinant of a non-square matrix");
    let mut log_abs = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    // column-major storage: entry (i, j) lives at i + j n
    let s = a.as_mut_slice();
    for k in 0..n {
        let col = k * n;
        let (mut p, mut best) = (k, s[col + k].modulus());
        for i in k + 1..n {
            let m = s[col + i].modulus();
            if m > best {
                best = m;
                p = i;
            }
        }
        if best == 0.0 {
            return Determinant {
                log_abs: f64::NEG_INFINITY,
                phase: Complex64::new(0.0, 0.0),
                zero: true,
            };
        }
        if p != k {
            for j in 0..n {
                s.swap(j * n + p, j * n + k);
            }
            phase = -phase;
        }
        let pivot = s[col + k];
        log_abs += best.ln();
        phase *= Complex64::new(pivot.real(), pivot.imaginary()) / best;
        let inv = T::one() / pivot;
        for i in k + 1..n {
            s[col + i] *= inv;
        }
        let (left, right) = s.split_at_mut((k + 1) * n);
        let multipliers = &left[col + k + 1..col + n];
        for j in 0..n - k - 1 {
            let c = &mut right[j * n..(j + 1) * n];
            let akj = c[k];
            if akj == T::zero() {
                continue;
            }
            for (dst, &l) in c[k + 1..].iter_mut().zip(multipliers) {
                *dst -= l * akj;
            }
        }
    }
    Determinant {
        log_abs,
        phase,
        zero: false,
    }
}

/// `log det(I + lambda M)`
pub fn det_identity_plus(m: &DMatrix<f64>, lambda: f64) -> Determinant {
    let n = m.nrows();
    log_det(DMatrix::identity(n, n) + m * lambda)
}

pub fn det_identity_plus_complex(m: &DMatrix<f64>, lambda: Complex64) -> Determinant {
    let n = m.nrows();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        Complex64::new(id, 0.0) + lambda * m[(i, j)]
    });
    log_det(a)
}

/// Solves `a X = b`, failing on an exactly singular factorization.
pub fn solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.clone().lu().solve(b).ok_or(Error::NearSingular {
        condition: f64::INFINITY,
    })
}

pub fn solve_vec(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.clone().lu().solve(b).ok_or(Error::NearSingular {
        condition: f64::INFINITY,
    })
}

pub fn inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.clone().try_inverse().ok_or(Error::NearSingular {
        condition: f64::INFINITY,
    })
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Largest eigenvalue magnitude of a symmetric matrix by power iteration.
pub fn power_iteration_norm(m: &DMatrix<f64>, iterations: usize) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = norm;
        v = w / norm;
    }
    estimate
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = m.singular_values();
    let (lo, hi) = (s.min(), s.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Maximum absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
