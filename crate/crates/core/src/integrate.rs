//! Gauss–Legendre quadrature and reference mass matrices.

use crate::linalg::Matrix;
use crate::polybasis::{RefElement, Shape};
use crate::Scalar;

/// Gauss–Legendre rule with `n` points mapped to `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let nt = T::from_usize_lossy(n);
        let half = T::lit(0.5);
        let mut points = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            // Newton on P_n starting from the Tricomi estimate
            let guess = T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nt + half);
            let mut x = guess.cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            points[i] = half * (T::one() - x);
            points[n - 1 - i] = half * (T::one() + x);
            weights[i] = half * w;
            weights[n - 1 - i] = half * w;
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn legendre_with_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kt = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kt - T::one()) * x * p1 - (kt - T::one()) * p0) / kt;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nt = T::from_usize_lossy(n);
    let d = nt * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Tensor or collapsed quadrature points `(x, y, w)` on a reference element.
pub fn reference_rule<T: Scalar>(shape: Shape, n: usize) -> Vec<(T, T, T)> {
    let gl = GaussLegendre::<T>::new(n);
    let mut out = Vec::with_capacity(n * n);
    for (&v, &wv) in gl.points.iter().zip(&gl.weights) {
        for (&u, &wu) in gl.points.iter().zip(&gl.weights) {
            match shape {
                Shape::Square => out.push((u, v, wu * wv)),
                // Duffy: (u, v) -> (u (1 - v), v), Jacobian 1 - v
                Shape::Triangle => out.push((u * (T::one() - v), v, wu * wv * (T::one() - v))),
            }
        }
    }
    out
}

/// `∫ φ̂_a φ̂_b`, `∫ φ̂_a φ̂_b x̂` and `∫ φ̂_a φ̂_b ŷ` over the reference element.
#[derive(Clone, Debug)]
pub struct MassMatrices<T> {
    pub m_l: Matrix<T>,
    pub m_x: Matrix<T>,
    pub m_y: Matrix<T>,
}

/// Points per axis that integrate `φ̂_a φ̂_b x̂` exactly.
pub fn default_points(shape: Shape, p: usize) -> usize {
    match shape {
        Shape::Square => p + 2,
        Shape::Triangle => p + 3,
    }
}

pub fn mass_matrices<T: Scalar>(el: &RefElement<T>) -> MassMatrices<T> {
    mass_matrices_with_points(el, default_points(el.shape(), el.degree()))
}

pub fn mass_matrices_with_points<T: Scalar>(el: &RefElement<T>, n: usize) -> MassMatrices<T> {
    match el.shape() {
        Shape::Square => square_mass(el, n),
        Shape::Triangle => generic_mass(el, &reference_rule(Shape::Triangle, n)),
    }
}

fn generic_mass<T: Scalar>(el: &RefElement<T>, rule: &[(T, T, T)]) -> MassMatrices<T> {
    let nn = el.n_nodes();
    let mut m_l = Matrix::zeros(nn, nn);
    let mut m_x = Matrix::zeros(nn, nn);
    let mut m_y = Matrix::zeros(nn, nn);
    let mut phi = vec![T::zero(); nn];
    for &(x, y, w) in rule {
        el.eval_basis_unchecked(x, y, &mut phi);
        for a in 0..nn {
            let wa = w * phi[a];
            for b in a..nn {
                let v = wa * phi[b];
                m_l[(a, b)] += v;
                m_x[(a, b)] += v * x;
                m_y[(a, b)] += v * y;
            }
        }
    }
    for m in [&mut m_l, &mut m_x, &mut m_y] {
        for a in 0..nn {
            for b in 0..a {
                m[(a, b)] = m[(b, a)];
            }
        }
    }
    MassMatrices { m_l, m_x, m_y }
}

// Qₚ factorizes: M_L = L⊗L, M_x = L⊗X, M_y = X⊗L with 1-D moments L and X.
fn square_mass<T: Scalar>(el: &RefElement<T>, n: usize) -> MassMatrices<T> {
    let p = el.degree();
    let gl = GaussLegendre::<T>::new(n);
    let vals: Vec<Vec<T>> = gl.points.iter().map(|&t| el.line().eval(t)).collect();
    let mut l1 = Matrix::zeros(p + 1, p + 1);
    let mut x1 = Matrix::zeros(p + 1, p + 1);
    for (q, row) in vals.iter().enumerate() {
        let (t, w) = (gl.points[q], gl.weights[q]);
        for i in 0..=p {
            for j in i..=p {
                let v = w * row[i] * row[j];
                l1[(i, j)] += v;
                x1[(i, j)] += v * t;
            }
        }
    }
    for i in 0..=p {
        for j in 0..i {
            l1[(i, j)] = l1[(j, i)];
            x1[(i, j)] = x1[(j, i)];
        }
    }
    let grid = el.grid();
    let nn = grid.len();
    let build = |fx: &Matrix<T>, fy: &Matrix<T>| {
        Matrix::from_fn(nn, nn, |a, b| {
            let (ia, ja) = grid[a];
            let (ib, jb) = grid[b];
            fx[(ia, ib)] * fy[(ja, jb)]
        })
    };
    MassMatrices {
        m_l: build(&l1, &l1),
        m_x: build(&x1, &l1),
        m_y: build(&l1, &x1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..=14 {
            let gl = GaussLegendre::<f64>::new(n);
            assert!(close(gl.weights.iter().sum(), 1.0, 1e-14));
            for k in 0..2 * n {
                let s: f64 = gl
                    .points
                    .iter()
                    .zip(&gl.weights)
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                assert!(close(s, 1.0 / (k as f64 + 1.0), 1e-14), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn q1_mass_matrix() {
        let el = RefElement::<f64>::new(Shape::Square, 1).unwrap();
        let mm = mass_matrices(&el);
        // node order (0,0),(1,0),(0,1),(1,1)
        let want = [
            [1.0 / 9.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 36.0],
            [1.0 / 18.0, 1.0 / 9.0, 1.0 / 36.0, 1.0 / 18.0],
            [1.0 / 18.0, 1.0 / 36.0, 1.0 / 9.0, 1.0 / 18.0],
            [1.0 / 36.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 9.0],
        ];
        for (a, row) in want.iter().enumerate() {
            for (b, &w) in row.iter().enumerate() {
                assert!(close(mm.m_l[(a, b)], w, 1e-15));
            }
        }
        assert!(close(mm.m_x.sum(), 0.5, 1e-15));
        assert!(close(mm.m_y.sum(), 0.5, 1e-15));
    }

    #[test]
    fn mass_sums_to_area() {
        for p in 1..=12 {
            for shape in [Shape::Square, Shape::Triangle] {
                let el = RefElement::<f64>::new(shape, p).unwrap();
                let mm = mass_matrices(&el);
                assert!(close(mm.m_l.sum(), shape.area(), 1e-12), "{shape:?} p={p}");
                assert_eq!(mm.m_l.asymmetry(), 0.0);
                assert_eq!(mm.m_x.asymmetry(), 0.0);
            }
        }
    }

    #[test]
    fn f32_rule_is_usable() {
        let el = RefElement::<f32>::new(Shape::Triangle, 2).unwrap();
        let mm = mass_matrices(&el);
        assert!((mm.m_l.sum() - 0.5).abs() < 1e-5);
    }
}
