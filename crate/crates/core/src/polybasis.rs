//! Reference elements and equispaced Lagrange bases.
//!
//! The unit square carries the tensor space Qₚ and the unit triangle
//! `{x, y ≥ 0, x + y ≤ 1}` the complete space Pₚ. Nodes are ordered
//! lexicographically in `(j, i)`, i.e. row by row from the bottom edge.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

pub const MAX_DEGREE: usize = 12;

const DOMAIN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Triangle,
    Square,
}

impl Shape {
    pub fn n_vertices(self) -> usize {
        match self {
            Shape::Triangle => 3,
            Shape::Square => 4,
        }
    }

    pub fn area(self) -> f64 {
        match self {
            Shape::Triangle => 0.5,
            Shape::Square => 1.0,
        }
    }

    /// Reference coordinates of the vertices in counter-clockwise order.
    pub fn vertices(self) -> &'static [[f64; 2]] {
        match self {
            Shape::Triangle => &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            Shape::Square => &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }
}

/// Topological position of a node. Vertex and edge ids follow the
/// counter-clockwise vertex order; edge `k` runs from vertex `k` to `k + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Vertex(usize),
    Edge(usize),
    Interior,
}

#[derive(Debug, Error, PartialEq)]
pub enum BasisError {
    #[error("polynomial degree {0} outside supported range 1..={MAX_DEGREE}")]
    DegreeOutOfRange(usize),
    #[error("point ({0}, {1}) outside the reference domain")]
    OutsideDomain(f64, f64),
}

/// Lagrange cardinal functions on `p + 1` equispaced points of `[0, 1]`,
/// evaluated in barycentric form.
#[derive(Clone, Debug)]
pub struct Lagrange1d<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> Lagrange1d<T> {
    pub fn equispaced(p: usize) -> Self {
        let pt = T::from_usize_lossy(p);
        let nodes: Vec<T> = (0..=p).map(|i| T::from_usize_lossy(i) / pt).collect();
        // w_i ∝ (-1)^i binom(p, i) for equispaced nodes
        let mut weights = Vec::with_capacity(p + 1);
        let mut binom = T::one();
        for i in 0..=p {
            let sign = if i % 2 == 0 { T::one() } else { -T::one() };
            weights.push(sign * binom);
            binom = binom * T::from_usize_lossy(p - i) / T::from_usize_lossy(i + 1);
        }
        Self { nodes, weights }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Writes `L_i(t)` for all `i` into `out`.
    pub fn eval_into(&self, t: T, out: &mut [T]) {
        debug_assert_eq!(out.len(), self.nodes.len());
        if let Some(hit) = self.nodes.iter().position(|&x| x == t) {
            out.iter_mut().for_each(|v| *v = T::zero());
            out[hit] = T::one();
            return;
        }
        let mut denom = T::zero();
        for (i, (&x, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let term = w / (t - x);
            out[i] = term;
            denom += term;
        }
        out.iter_mut().for_each(|v| *v /= denom);
    }

    pub fn eval(&self, t: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.nodes.len()];
        self.eval_into(t, &mut out);
        out
    }
}

/// A reference element together with its Lagrange node layout.
#[derive(Clone, Debug)]
pub struct RefElement<T> {
    shape: Shape,
    degree: usize,
    nodes: Vec<[T; 2]>,
    kinds: Vec<NodeKind>,
    /// integer grid indices `(i, j)` with node at `(i/p, j/p)`
    grid: Vec<(usize, usize)>,
    line: Lagrange1d<T>,
}

pub fn make_ref_element<T: Scalar>(shape: Shape, p: usize) -> Result<RefElement<T>, BasisError> {
    RefElement::new(shape, p)
}

impl<T: Scalar> RefElement<T> {
    pub fn new(shape: Shape, p: usize) -> Result<Self, BasisError> {
        if !(1..=MAX_DEGREE).contains(&p) {
            return Err(BasisError::DegreeOutOfRange(p));
        }
        let pt = T::from_usize_lossy(p);
        let mut grid = Vec::new();
        for j in 0..=p {
            let imax = match shape {
                Shape::Square => p,
                Shape::Triangle => p - j,
            };
            for i in 0..=imax {
                grid.push((i, j));
            }
        }
        let nodes = grid
            .iter()
            .map(|&(i, j)| [T::from_usize_lossy(i) / pt, T::from_usize_lossy(j) / pt])
            .collect();
        let kinds = grid.iter().map(|&(i, j)| classify(shape, p, i, j)).collect();
        Ok(Self {
            shape,
            degree: p,
            nodes,
            kinds,
            grid,
            line: Lagrange1d::equispaced(p),
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[T; 2]] {
        &self.nodes
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn grid(&self) -> &[(usize, usize)] {
        &self.grid
    }

    pub fn line(&self) -> &Lagrange1d<T> {
        &self.line
    }

    /// Node index of reference vertex `k` (counter-clockwise numbering).
    pub fn vertex_node(&self, k: usize) -> usize {
        self.kinds
            .iter()
            .position(|&kind| kind == NodeKind::Vertex(k))
            .expect("vertex node present")
    }

    /// Node index at grid position `(i, j)`.
    pub fn node_at(&self, i: usize, j: usize) -> Option<usize> {
        self.grid.iter().position(|&g| g == (i, j))
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        let tol = T::lit(DOMAIN_TOL);
        let inside_box = x >= -tol && y >= -tol;
        match self.shape {
            Shape::Square => inside_box && x <= T::one() + tol && y <= T::one() + tol,
            Shape::Triangle => inside_box && x + y <= T::one() + tol,
        }
    }

    /// Values of all basis functions at `(x, y)`, in node order.
    pub fn eval_basis(&self, x: T, y: T) -> Result<Vec<T>, BasisError> {
        if !self.contains(x, y) {
            return Err(BasisError::OutsideDomain(x.to_f64_lossy(), y.to_f64_lossy()));
        }
        let mut out = vec![T::zero(); self.n_nodes()];
        self.eval_basis_unchecked(x, y, &mut out);
        Ok(out)
    }

    /// Same as [`eval_basis`](Self::eval_basis) without the domain check;
    /// used by quadrature loops.
    pub fn eval_basis_unchecked(&self, x: T, y: T, out: &mut [T]) {
        let p = self.degree;
        match self.shape {
            Shape::Square => {
                let mut lx = vec![T::zero(); p + 1];
                let mut ly = vec![T::zero(); p + 1];
                self.line.eval_into(x, &mut lx);
                self.line.eval_into(y, &mut ly);
                for (o, &(i, j)) in out.iter_mut().zip(&self.grid) {
                    *o = lx[i] * ly[j];
                }
            }
            Shape::Triangle => {
                let pt = T::from_usize_lossy(p);
                let bary = [pt * (T::one() - x - y), pt * x, pt * y];
                // f[b][k] = Π_{m<k} (p λ_b - m) / (m + 1)
                let mut f = [vec![T::one(); p + 1], vec![T::one(); p + 1], vec![T::one(); p + 1]];
                for (b, fb) in f.iter_mut().enumerate() {
                    for k in 1..=p {
                        let m = T::from_usize_lossy(k - 1);
                        fb[k] = fb[k - 1] * (bary[b] - m) / T::from_usize_lossy(k);
                    }
                }
                for (o, &(i, j)) in out.iter_mut().zip(&self.grid) {
                    *o = f[1][i] * f[2][j] * f[0][p - i - j];
                }
            }
        }
    }
}

fn classify(shape: Shape, p: usize, i: usize, j: usize) -> NodeKind {
    match shape {
        Shape::Square => match (i, j) {
            (0, 0) => NodeKind::Vertex(0),
            (i, 0) if i == p => NodeKind::Vertex(1),
            (i, j) if i == p && j == p => NodeKind::Vertex(2),
            (0, j) if j == p => NodeKind::Vertex(3),
            (_, 0) => NodeKind::Edge(0),
            (i, _) if i == p => NodeKind::Edge(1),
            (_, j) if j == p => NodeKind::Edge(2),
            (0, _) => NodeKind::Edge(3),
            _ => NodeKind::Interior,
        },
        Shape::Triangle => match (i, j) {
            (0, 0) => NodeKind::Vertex(0),
            (i, 0) if i == p => NodeKind::Vertex(1),
            (0, j) if j == p => NodeKind::Vertex(2),
            (_, 0) => NodeKind::Edge(0),
            (i, j) if i + j == p => NodeKind::Edge(1),
            (0, _) => NodeKind::Edge(2),
            _ => NodeKind::Interior,
        },
    }
}
