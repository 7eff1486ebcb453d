//! Constrained local bases for quadrilaterals with hanging nodes.
//!
//! A hanging edge of `T` is one half of an edge of a coarser neighbour. The
//! trace of a conforming function on that half is the coarse edge polynomial,
//! so the Lagrange values of `T` at nodes on a hanging edge are fixed by the
//! `p + 1` coarse edge nodes. Collecting these relations gives a matrix `C`
//! with `u_local = C · u_free`, and the local pencil becomes
//! `M(T) = Cᵀ M_loc C`, `A(T) = W ∘ M(T)`.

use thiserror::Error;

use crate::eig::SymPair;
use crate::integrate::mass_matrices;
use crate::linalg::Matrix;
use crate::polybasis::{Lagrange1d, RefElement, Shape};
use crate::weights::{candidate_exponents_upto, sweep_min, tuples, GenerationSet, NodeWeights, Strategy, WeightsError};
use crate::Scalar;

const DROP_TOL: f64 = 1e-14;
pub const MAX_HANGING_DEGREE: usize = 5;

#[derive(Debug, Error)]
pub enum HangingError {
    #[error("unsupported hanging patch: p = {p}, {n_hanging} hanging nodes")]
    Unsupported { p: usize, n_hanging: usize },
    #[error("edge {0} is not an edge of a quadrilateral")]
    BadEdge(usize),
    #[error("expected {expected} weights, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Weights(#[from] WeightsError),
}

/// One edge of the unit square that is half of a coarse edge.
///
/// Edge `k` runs from reference vertex `k` to `k + 1` (counter-clockwise).
/// The anchor is the end shared with the coarse edge; the other end is the
/// hanging node at the coarse midpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HangingEdge {
    pub edge: usize,
    pub anchor_at_start: bool,
}

impl HangingEdge {
    /// Reference vertex (ccw index) of the anchor.
    pub fn anchor_vertex(&self) -> usize {
        if self.anchor_at_start {
            self.edge
        } else {
            (self.edge + 1) % 4
        }
    }

    /// Reference vertex (ccw index) of the hanging node.
    pub fn hanging_vertex(&self) -> usize {
        if self.anchor_at_start {
            (self.edge + 1) % 4
        } else {
            self.edge
        }
    }
}

/// A free coefficient of the constrained space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FreeNode {
    /// a Lagrange node of `T` itself
    Local(usize),
    /// node `k` of the coarse edge behind hanging edge `edge`, counted from
    /// the anchor (`k = 0`) to the far coarse vertex (`k = p`)
    Coarse { edge: usize, k: usize },
}

/// Local space of a square with hanging edges.
#[derive(Clone, Debug)]
pub struct ConstrainedElement<T> {
    el: RefElement<T>,
    hanging: Vec<HangingEdge>,
    free_nodes: Vec<FreeNode>,
    constraint: Matrix<T>,
}

impl<T: Scalar> ConstrainedElement<T> {
    pub fn new(p: usize, hanging: &[HangingEdge]) -> Result<Self, HangingError> {
        if let Some(h) = hanging.iter().find(|h| h.edge > 3) {
            return Err(HangingError::BadEdge(h.edge));
        }
        let el = RefElement::<T>::new(Shape::Square, p).map_err(WeightsError::from)?;
        let line = Lagrange1d::<T>::equispaced(p);
        let verts = Shape::Square.vertices();
        let mut free_nodes: Vec<FreeNode> = Vec::new();
        let mut rows: Vec<Vec<(usize, T)>> = Vec::with_capacity(el.n_nodes());
        let slot = |node: FreeNode, free: &mut Vec<FreeNode>| -> usize {
            free.iter().position(|&f| f == node).unwrap_or_else(|| {
                free.push(node);
                free.len() - 1
            })
        };
        for (a, &[x, y]) in el.nodes().iter().enumerate() {
            let on = hanging.iter().find_map(|h| {
                let start = verts[h.anchor_vertex()];
                let end = verts[h.hanging_vertex()];
                edge_parameter([x, y], start, end).map(|t| (h, t))
            });
            let row = match on {
                None => vec![(slot(FreeNode::Local(a), &mut free_nodes), T::one())],
                Some((h, t)) => {
                    let s = t * T::lit(0.5);
                    let card = line.eval(s);
                    let mut row = Vec::new();
                    for (k, &v) in card.iter().enumerate() {
                        if v.abs() <= T::lit(DROP_TOL) {
                            continue;
                        }
                        let node = if k == 0 {
                            FreeNode::Local(el.vertex_node(h.anchor_vertex()))
                        } else {
                            FreeNode::Coarse { edge: h.edge, k }
                        };
                        row.push((slot(node, &mut free_nodes), v));
                    }
                    row
                }
            };
            rows.push(row);
        }
        let mut constraint = Matrix::zeros(el.n_nodes(), free_nodes.len());
        for (a, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                constraint[(a, j)] = v;
            }
        }
        Ok(Self {
            el,
            hanging: hanging.to_vec(),
            free_nodes,
            constraint,
        })
    }

    pub fn element(&self) -> &RefElement<T> {
        &self.el
    }

    pub fn hanging_edges(&self) -> &[HangingEdge] {
        &self.hanging
    }

    pub fn free_nodes(&self) -> &[FreeNode] {
        &self.free_nodes
    }

    pub fn n_free(&self) -> usize {
        self.free_nodes.len()
    }

    pub fn constraint(&self) -> &Matrix<T> {
        &self.constraint
    }

    /// `Cᵀ M C`.
    pub fn reduce_mass(&self, m_loc: &Matrix<T>) -> Matrix<T> {
        self.constraint.congruence(m_loc).symmetrized()
    }

    /// Free-node weights from the vertex values of `T` (ccw order) and the far
    /// coarse vertex of every hanging edge.
    ///
    /// Values given for hanging corners are ignored: a hanging corner gets the
    /// mean of its two coarse endpoints. Local nodes interpolate bilinearly in
    /// the corners of `T`, coarse nodes linearly along the coarse edge.
    pub fn weights(&self, corners: &[(T, T); 4], far: &[(T, T)]) -> Result<NodeWeights<T>, HangingError> {
        if far.len() != self.hanging.len() {
            return Err(HangingError::DimensionMismatch {
                expected: self.hanging.len(),
                got: far.len(),
            });
        }
        let half = T::lit(0.5);
        let mut c = *corners;
        for (h, &(fp, fm)) in self.hanging.iter().zip(far) {
            let (ap, am) = corners[h.anchor_vertex()];
            c[h.hanging_vertex()] = (half * (ap + fp), half * (am + fm));
        }
        let one = T::one();
        let bilinear = |x: T, y: T, pick: fn(&(T, T)) -> T| {
            pick(&c[0]) * (one - x) * (one - y)
                + pick(&c[1]) * x * (one - y)
                + pick(&c[2]) * x * y
                + pick(&c[3]) * (one - x) * y
        };
        let pt = T::from_usize_lossy(self.el.degree());
        let mut h_plus = Vec::with_capacity(self.n_free());
        let mut h_minus = Vec::with_capacity(self.n_free());
        for node in &self.free_nodes {
            let (hp, hm) = match *node {
                FreeNode::Local(a) => {
                    let [x, y] = self.el.nodes()[a];
                    (bilinear(x, y, |v| v.0), bilinear(x, y, |v| v.1))
                }
                FreeNode::Coarse { edge, k } => {
                    let i = self.hanging.iter().position(|h| h.edge == edge).expect("known edge");
                    let (ap, am) = corners[self.hanging[i].anchor_vertex()];
                    let (fp, fm) = far[i];
                    let s = T::from_usize_lossy(k) / pt;
                    ((one - s) * ap + s * fp, (one - s) * am + s * fm)
                }
            };
            h_plus.push(hp);
            h_minus.push(hm);
        }
        Ok(NodeWeights { h_plus, h_minus })
    }
}

// Parameter of `q` along the segment `start → end`, if it lies on it.
fn edge_parameter<T: Scalar>(q: [T; 2], start: [f64; 2], end: [f64; 2]) -> Option<T> {
    let tol = T::lit(1e-12);
    let (sx, sy) = (T::lit(start[0]), T::lit(start[1]));
    let (dx, dy) = (T::lit(end[0]) - sx, T::lit(end[1]) - sy);
    let (qx, qy) = (q[0] - sx, q[1] - sy);
    if (qx * dy - qy * dx).abs() > tol {
        return None;
    }
    let t = (qx * dx + qy * dy) / (dx * dx + dy * dy);
    (t >= -tol && t <= T::one() + tol).then_some(t)
}

/// The element of a red-refined coarse square next to 0, 1 or 2 coarse
/// neighbours.
///
/// In patch coordinates `T = [0,1]²` and the coarse edges run from the anchor
/// `(0,0)` to `(0,2)` (left) and, with two hanging nodes, to `(2,0)` (bottom).
#[derive(Clone, Debug)]
pub struct HangingPatch<T> {
    pub n_hanging: usize,
    pub element: ConstrainedElement<T>,
    /// `Cᵀ M_loc C`
    pub mass: Matrix<T>,
}

impl<T: Scalar> HangingPatch<T> {
    pub fn free_nodes(&self) -> &[FreeNode] {
        self.element.free_nodes()
    }

    pub fn constraint(&self) -> &Matrix<T> {
        self.element.constraint()
    }

    /// Vertices carrying independent exponents, as patch coordinates: the
    /// anchor, the fine corner opposite to it, the far end of the left coarse
    /// edge, and either the fine corner `(1,0)` or the far end `(2,0)` of the
    /// bottom coarse edge.
    pub fn weighted_vertices(&self) -> Vec<[u8; 2]> {
        match self.n_hanging {
            0 => vec![[0, 0], [1, 1], [0, 1], [1, 0]],
            1 => vec![[0, 0], [1, 1], [0, 2], [1, 0]],
            _ => vec![[0, 0], [1, 1], [0, 2], [2, 0]],
        }
    }

    /// Element-chain distance between two weighted vertices: two for coarse
    /// vertices that share no element with each other or with a fine corner
    /// other than the one opposite the anchor.
    pub fn vertex_dist(&self, a: [u8; 2], b: [u8; 2]) -> u32 {
        if a == b {
            return 0;
        }
        let far = |v: [u8; 2]| v == [0, 2] || v == [2, 0];
        let fine_off_diag = |v: [u8; 2]| v == [1, 0] || v == [0, 1];
        let two = (far(a) && far(b)) || (far(a) && fine_off_diag(b)) || (far(b) && fine_off_diag(a));
        if two && self.n_hanging > 0 {
            2
        } else {
            1
        }
    }

    /// `(hp, hm)` at the ccw corners of `T` and at the far coarse vertices,
    /// from exponents listed in [`weighted_vertices`](Self::weighted_vertices)
    /// order.
    pub fn pencil(&self, exponents: &[f64]) -> Result<SymPair<T>, HangingError> {
        let verts = self.weighted_vertices();
        if exponents.len() != verts.len() {
            return Err(HangingError::DimensionMismatch {
                expected: verts.len(),
                got: exponents.len(),
            });
        }
        let h = |v: [u8; 2]| {
            let e = verts.iter().position(|&w| w == v).map(|i| exponents[i]).unwrap_or(0.0);
            let e = T::lit(e) * T::lit(0.5);
            (T::lit(2.0).powf(-e), T::lit(2.0).powf(e))
        };
        let corners = [h([0, 0]), h([1, 0]), h([1, 1]), h([0, 1])];
        let far: Vec<(T, T)> = self
            .element
            .hanging_edges()
            .iter()
            .map(|e| if e.edge == 3 { h([0, 2]) } else { h([2, 0]) })
            .collect();
        let w = self.element.weights(&corners, &far)?;
        patch_pencil(self, &w)
    }
}

pub fn build_patch<T: Scalar>(p: usize, n_hanging: usize) -> Result<HangingPatch<T>, HangingError> {
    let limit = if n_hanging == 0 {
        crate::polybasis::MAX_DEGREE
    } else {
        MAX_HANGING_DEGREE
    };
    if n_hanging > 2 || p == 0 || p > limit {
        return Err(HangingError::Unsupported { p, n_hanging });
    }
    // left edge (0,1) → (0,0) has its anchor at the end, bottom edge at the start
    let mut edges = Vec::new();
    if n_hanging >= 1 {
        edges.push(HangingEdge {
            edge: 3,
            anchor_at_start: false,
        });
    }
    if n_hanging == 2 {
        edges.push(HangingEdge {
            edge: 0,
            anchor_at_start: true,
        });
    }
    let element = ConstrainedElement::new(p, &edges)?;
    let mass = element.reduce_mass(&mass_matrices(element.element()).m_l);
    Ok(HangingPatch {
        n_hanging,
        element,
        mass,
    })
}

/// `M(T) = Cᵀ M_loc C` and `A(T) = W ∘ M(T)` over the free nodes.
pub fn patch_pencil<T: Scalar>(patch: &HangingPatch<T>, w: &NodeWeights<T>) -> Result<SymPair<T>, HangingError> {
    if w.h_plus.len() != patch.element.n_free() {
        return Err(HangingError::DimensionMismatch {
            expected: patch.element.n_free(),
            got: w.h_plus.len(),
        });
    }
    let a = crate::weights::assemble_a(&patch.mass, w)?;
    Ok(SymPair::from_symmetric(a, patch.mass.clone()))
}

pub fn constrained_pencil<T: Scalar>(
    el: &ConstrainedElement<T>,
    m_loc: &Matrix<T>,
    w: &NodeWeights<T>,
) -> Result<SymPair<T>, HangingError> {
    if w.h_plus.len() != el.n_free() {
        return Err(HangingError::DimensionMismatch {
            expected: el.n_free(),
            got: w.h_plus.len(),
        });
    }
    let m = el.reduce_mass(m_loc);
    let a = crate::weights::assemble_a(&m, w)?;
    Ok(SymPair::from_symmetric(a, m))
}

/// Minimum of `λ_min` over all Q-R weight configurations of the patch.
pub fn min_lambda_hanging<T: Scalar>(p: usize, n_hanging: usize, mu: f64) -> Result<(f64, Vec<f64>), HangingError> {
    let patch = build_patch::<T>(p, n_hanging)?;
    let verts = patch.weighted_vertices();
    let cands = candidate_exponents_upto(&GenerationSet::for_strategy(Strategy::Qr), mu, 2.0 * mu);
    let configs: Vec<Vec<f64>> = tuples(&cands, verts.len())
        .into_iter()
        .filter(|e| e.contains(&0.0))
        .filter(|e| {
            (0..e.len()).all(|i| {
                (0..i).all(|j| (e[i] - e[j]).abs() <= mu * patch.vertex_dist(verts[i], verts[j]) as f64 + 1e-12)
            })
        })
        .collect();
    let best = sweep_min(&configs, |e| {
        patch.pencil(e).map_err(|err| match err {
            HangingError::Weights(w) => w,
            other => unreachable!("patch weights: {other}"),
        })
    })?;
    let (i, lam) = best.expect("uniform configuration present");
    Ok((lam, configs[i].clone()))
}
