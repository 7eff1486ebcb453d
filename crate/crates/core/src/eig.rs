//! Smallest eigenvalue of symmetric-definite pencils `A x = λ M x`.
//!
//! `M = L Lᵀ` is factored, the pencil is reduced to `S = L⁻¹ A L⁻ᵀ`, and the
//! spectrum of `S` is computed with cyclic Jacobi rotations.

use thiserror::Error;

use crate::linalg::Matrix;
use crate::Scalar;

const ASYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigError {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: A is {0}x{0}, M is {1}x{1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix asymmetry {0:e} exceeds tolerance")]
    Asymmetric(f64),
    #[error("mass matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotSpd { pivot: usize, value: f64 },
    #[error("Jacobi iteration did not converge in {0} sweeps")]
    NoConvergence(usize),
}

/// A symmetric pencil `(A, M)`; `M` is expected to be positive definite.
#[derive(Clone, Debug)]
pub struct SymPair<T> {
    a: Matrix<T>,
    m: Matrix<T>,
}

impl<T: Scalar> SymPair<T> {
    /// Symmetrizes both matrices after checking that they are symmetric up
    /// to a relative tolerance of `1e-10`.
    pub fn new(a: Matrix<T>, m: Matrix<T>) -> Result<Self, EigError> {
        for x in [&a, &m] {
            if !x.is_square() {
                return Err(EigError::NotSquare(x.rows(), x.cols()));
            }
        }
        if a.rows() != m.rows() {
            return Err(EigError::DimensionMismatch(a.rows(), m.rows()));
        }
        for x in [&a, &m] {
            let scale = x.max_abs().max(T::one());
            let asym = (x.asymmetry() / scale).to_f64_lossy();
            if asym > ASYMMETRY_TOL {
                return Err(EigError::Asymmetric(asym));
            }
        }
        Ok(Self {
            a: a.symmetrized(),
            m: m.symmetrized(),
        })
    }

    /// Wraps matrices that are symmetric by construction.
    pub(crate) fn from_symmetric(a: Matrix<T>, m: Matrix<T>) -> Self {
        debug_assert!(a.asymmetry() == T::zero() && m.asymmetry() == T::zero());
        Self { a, m }
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn m(&self) -> &Matrix<T> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn lambda_min(&self) -> Result<T, EigError> {
        Ok(self.eigenvalues()?[0])
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<T>, EigError> {
        let l = cholesky(&self.m)?;
        let s = reduce(&self.a, &l);
        let mut ev = jacobi_eigenvalues(s)?;
        ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        Ok(ev)
    }

    /// `true` when every eigenvalue is strictly greater than `sigma`, decided
    /// by attempting a Cholesky factorization of `A − σM`.
    pub fn exceeds(&self, sigma: T) -> bool {
        cholesky(&self.a.add_scaled(&self.m, -sigma)).is_ok()
    }
}

pub fn lambda_min<T: Scalar>(pair: &SymPair<T>) -> Result<T, EigError> {
    pair.lambda_min()
}

/// Lower triangular Cholesky factor.
pub fn cholesky<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>, EigError> {
    let n = m.rows();
    // row-major lower factor: row i holds l[i][0..=i]
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        let (done, rest) = l.split_at_mut(i * n);
        let row_i = &mut rest[..n];
        for j in 0..=i {
            let row_j: &[T] = if j == i { &row_i[..] } else { &done[j * n..j * n + n] };
            let dot = dot(&row_i[..j], &row_j[..j]);
            let v = m[(i, j)] - dot;
            if j == i {
                if v.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
                    return Err(EigError::NotSpd {
                        pivot: i,
                        value: v.to_f64().unwrap_or(f64::NAN),
                    });
                }
                row_i[i] = v.sqrt();
            } else {
                row_i[j] = v / done[j * n + j];
            }
        }
    }
    Ok(Matrix::from_fn(n, n, |i, j| l[i * n + j]))
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

// S = L⁻¹ A L⁻ᵀ by two triangular solves.
fn reduce<T: Scalar>(a: &Matrix<T>, l: &Matrix<T>) -> Matrix<T> {
    let n = a.rows();
    // Y = L⁻¹ A, column by column
    let mut y = a.clone();
    for c in 0..n {
        for i in 0..n {
            let mut s = y[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * y[(k, c)];
            }
            y[(i, c)] = s / l[(i, i)];
        }
    }
    // S = Y L⁻ᵀ, i.e. Sᵀ = L⁻¹ Yᵀ; solve row by row
    let mut s = y;
    for r in 0..n {
        for i in 0..n {
            let mut v = s[(r, i)];
            for k in 0..i {
                v -= l[(i, k)] * s[(r, k)];
            }
            s[(r, i)] = v / l[(i, i)];
        }
    }
    s.symmetrized()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi, unsorted.
pub fn jacobi_eigenvalues<T: Scalar>(mut s: Matrix<T>) -> Result<Vec<T>, EigError> {
    let n = s.rows();
    let norm = s.frobenius();
    let tol = T::lit(1e-13).max(T::epsilon() * T::lit(4.0)) * norm;
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off += s[(i, j)] * s[(i, j)];
            }
        }
        if (off + off).sqrt() <= tol {
            return Ok((0..n).map(|i| s[(i, i)]).collect());
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut s, p, q);
            }
        }
    }
    Err(EigError::NoConvergence(MAX_SWEEPS))
}

fn rotate<T: Scalar>(s: &mut Matrix<T>, p: usize, q: usize) {
    let apq = s[(p, q)];
    if apq == T::zero() {
        return;
    }
    let app = s[(p, p)];
    let aqq = s[(q, q)];
    let theta = (aqq - app) / (apq + apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
    let c = T::one() / (t * t + T::one()).sqrt();
    let sn = t * c;
    let tau = sn / (T::one() + c);
    s[(p, p)] = app - t * apq;
    s[(q, q)] = aqq + t * apq;
    s[(p, q)] = T::zero();
    s[(q, p)] = T::zero();
    for r in 0..s.rows() {
        if r == p || r == q {
            continue;
        }
        let srp = s[(r, p)];
        let srq = s[(r, q)];
        let np = srp - sn * (srq + tau * srp);
        let nq = srq + sn * (srp - tau * srq);
        s[(r, p)] = np;
        s[(p, r)] = np;
        s[(r, q)] = nq;
        s[(q, r)] = nq;
    }
}
