//! Certification of concrete meshes: local pencils with the realized `h_z`
//! weights on every active element.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eig::SymPair;
use crate::hanging::{constrained_pencil, ConstrainedElement, HangingEdge, MAX_HANGING_DEGREE};
use crate::integrate::{mass_matrices, MassMatrices};
use crate::mesh::{ElementId, Mesh, MeshError, MuBoundReport};
use crate::polybasis::{RefElement, Shape, MAX_DEGREE};
use crate::weights::{assemble_a, general_quad_pencils, node_weights, WeightConfig};
use crate::Scalar;

const KEY_SCALE: f64 = 1e9;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("degree {p} is not supported ({reason})")]
    Unsupported { p: usize, reason: &'static str },
    #[error("degenerate quadrilateral")]
    Degenerate,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Parameters of `B(x̂, ŷ) = x₀ + R(θ)·(h_x x̂ + s h_y ŷ + α x̂ŷ, h_y ŷ + β x̂ŷ)`
/// for a quad with corners `B(0,0), B(1,0), B(1,1), B(0,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearParams {
    pub x0: f64,
    pub y0: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub s: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `β / h_y`
    pub c1: f64,
    /// `(α − βs) / h_x`
    pub c2: f64,
}

impl BilinearParams {
    pub fn map(&self, x: f64, y: f64) -> [f64; 2] {
        let u = self.h_x * x + self.s * self.h_y * y + self.alpha * x * y;
        let v = self.h_y * y + self.beta * x * y;
        let (sn, cs) = self.theta.sin_cos();
        [self.x0 + cs * u - sn * v, self.y0 + sn * u + cs * v]
    }
}

pub fn extract_bilinear_params(quad: &[[f64; 2]; 4]) -> Result<BilinearParams, CheckError> {
    let [q0, q1, q2, q3] = *quad;
    let a = [q1[0] - q0[0], q1[1] - q0[1]];
    let b = [q3[0] - q0[0], q3[1] - q0[1]];
    let d = [q2[0] - q1[0] - q3[0] + q0[0], q2[1] - q1[1] - q3[1] + q0[1]];
    let h_x = a[0].hypot(a[1]);
    if h_x == 0.0 {
        return Err(CheckError::Degenerate);
    }
    let theta = a[1].atan2(a[0]);
    let (sn, cs) = theta.sin_cos();
    let rot = |v: [f64; 2]| [cs * v[0] + sn * v[1], -sn * v[0] + cs * v[1]];
    let b = rot(b);
    let [alpha, beta] = rot(d);
    let h_y = b[1];
    if h_y <= 0.0 {
        return Err(CheckError::Degenerate);
    }
    let s = b[0] / h_y;
    Ok(BilinearParams {
        x0: q0[0],
        y0: q0[1],
        h_x,
        h_y,
        s,
        theta,
        alpha,
        beta,
        c1: beta / h_y,
        c2: (alpha - beta * s) / h_x,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    NotCertified,
}

/// How the local pencil of an element was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PencilPath {
    Triangle,
    Affine,
    GeneralQuad,
    Hanging,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub mu: f64,
    pub p: usize,
    pub per_element: BTreeMap<ElementId, f64>,
    pub paths: BTreeMap<ElementId, PencilPath>,
    pub min_lambda: f64,
    pub mu_bound_ok: bool,
    pub mu_bound: MuBoundReport,
    pub verdict: Verdict,
    pub worst_element: Option<ElementId>,
    /// `min` and `max` of `h_z / h_T` over vertices `z` of active elements `T`,
    /// with `h_T = 2^{−gen(T)/2}`
    pub hz_over_ht: (f64, f64),
    pub distinct_pencils: usize,
    pub notes: Vec<String>,
}

// Exact data of one pencil; `PencilKey` is its quantized form for
// deduplication.
#[derive(Clone, Debug)]
enum Pencil {
    Triangle {
        e: [f64; 3],
    },
    Quad {
        e: [f64; 4],
        c1: f64,
        c2: f64,
    },
    Hanging {
        edges: Vec<(usize, bool)>,
        corners: [f64; 4],
        far: Vec<f64>,
        c1: f64,
        c2: f64,
    },
}

impl Pencil {
    fn key(&self) -> PencilKey {
        match self {
            Pencil::Triangle { e } => PencilKey::Triangle { e: e.map(quantize) },
            Pencil::Quad { e, c1, c2 } => PencilKey::Quad {
                e: e.map(quantize),
                c1: quantize(*c1),
                c2: quantize(*c2),
            },
            Pencil::Hanging {
                edges,
                corners,
                far,
                c1,
                c2,
            } => PencilKey::Hanging {
                edges: edges.clone(),
                corners: corners.map(quantize),
                far: far.iter().copied().map(quantize).collect(),
                c1: quantize(*c1),
                c2: quantize(*c2),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum PencilKey {
    Triangle {
        e: [i64; 3],
    },
    Quad {
        e: [i64; 4],
        c1: i64,
        c2: i64,
    },
    Hanging {
        edges: Vec<(usize, bool)>,
        corners: [i64; 4],
        far: Vec<i64>,
        c1: i64,
        c2: i64,
    },
}

fn quantize(x: f64) -> i64 {
    (x * KEY_SCALE).round() as i64
}

// Shared reference data for one degree.
struct Kernels<T> {
    square: RefElement<T>,
    square_mass: MassMatrices<T>,
    triangle: RefElement<T>,
    triangle_mass: MassMatrices<T>,
}

fn solve<T: Scalar>(p: usize, pencil: &Pencil, k: &Kernels<T>) -> Result<f64, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let pair: SymPair<T> = match pencil {
        Pencil::Triangle { e } => {
            let cfg = WeightConfig {
                vertex_exponents: e.to_vec(),
                mu: 0.0,
            };
            let w = node_weights(&k.triangle, &cfg).map_err(|e| err(&e))?;
            let a = assemble_a(&k.triangle_mass.m_l, &w).map_err(|e| err(&e))?;
            SymPair::new(a, k.triangle_mass.m_l.clone()).map_err(|e| err(&e))?
        }
        Pencil::Quad { e, c1, c2 } => {
            let cfg = WeightConfig {
                vertex_exponents: e.to_vec(),
                mu: 0.0,
            };
            let w = node_weights(&k.square, &cfg).map_err(|e| err(&e))?;
            general_quad_pencils(&k.square_mass, &w, T::lit(*c1), T::lit(*c2)).map_err(|e| err(&e))?
        }
        Pencil::Hanging {
            edges,
            corners,
            far,
            c1,
            c2,
        } => {
            let hanging: Vec<HangingEdge> = edges
                .iter()
                .map(|&(edge, anchor_at_start)| HangingEdge { edge, anchor_at_start })
                .collect();
            let el = ConstrainedElement::<T>::new(p, &hanging).map_err(|e| err(&e))?;
            let h = |x: f64| (T::lit(2f64.powf(-x / 2.0)), T::lit(2f64.powf(x / 2.0)));
            let c = corners.map(h);
            let f: Vec<(T, T)> = far.iter().map(|&x| h(x)).collect();
            let w = el.weights(&c, &f).map_err(|e| err(&e))?;
            let m_loc = k
                .square_mass
                .m_l
                .add_scaled(&k.square_mass.m_x, T::lit(*c1))
                .add_scaled(&k.square_mass.m_y, T::lit(*c2));
            constrained_pencil(&el, &m_loc, &w).map_err(|e| err(&e))?
        }
    };
    pair.lambda_min().map(Scalar::to_f64_lossy).map_err(|e| err(&e))
}

/// Rotation of the quad's vertex list with the smallest `|c1|` (first on ties).
fn canonical_rotation(pts: &[[f64; 2]]) -> Result<(usize, BilinearParams), CheckError> {
    let mut best: Option<(usize, BilinearParams)> = None;
    for r in 0..4 {
        let q = [pts[r], pts[(r + 1) % 4], pts[(r + 2) % 4], pts[(r + 3) % 4]];
        let bp = extract_bilinear_params(&q)?;
        if best.is_none_or(|(_, b)| bp.c1.abs() < b.c1.abs() - 1e-12) {
            best = Some((r, bp));
        }
    }
    Ok(best.expect("four rotations"))
}

fn snap(c: f64) -> f64 {
    if c.abs() < 1e-12 {
        0.0
    } else {
        c
    }
}

/// Degree-independent data of a certification: realized weights, pencil
/// keys and grading diagnostics. One preparation serves every degree.
#[derive(Clone, Debug)]
pub struct Prepared {
    mu: f64,
    keys: Vec<(ElementId, usize, PencilPath)>,
    distinct: Vec<Pencil>,
    has_hanging: bool,
    mu_bound: MuBoundReport,
    hz_over_ht: (f64, f64),
}

impl Prepared {
    pub fn new(mesh: &Mesh, mu: f64) -> Result<Self, CheckError> {
        mesh.validate(None)?;
        let exps = mesh.weight_exponents(mu);
        let mu_bound = mesh.check_mu_bound_with(mu, &exps);
        let mut keys = Vec::new();
        let mut distinct: Vec<Pencil> = Vec::new();
        let mut index: HashMap<PencilKey, usize> = HashMap::new();
        let (mut ratio_min, mut ratio_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut has_hanging = false;
        for t in mesh.active_elements() {
            let el = mesh.element(t);
            let e: Vec<f64> = el.verts.iter().map(|&v| exps[v].expect("active vertex")).collect();
            let gen = mesh.gen(t);
            for &ez in &e {
                let r = 2f64.powf((gen - ez) / 2.0);
                ratio_min = ratio_min.min(r);
                ratio_max = ratio_max.max(r);
            }
            let (pencil, path) = element_pencil(mesh, t, &e, &exps)?;
            has_hanging |= path == PencilPath::Hanging;
            let next = distinct.len();
            let i = *index.entry(pencil.key()).or_insert(next);
            if i == next {
                distinct.push(pencil);
            }
            keys.push((t, i, path));
        }
        Ok(Self {
            mu,
            keys,
            distinct,
            has_hanging,
            mu_bound,
            hz_over_ht: (ratio_min, ratio_max),
        })
    }

    pub fn mu_bound(&self) -> &MuBoundReport {
        &self.mu_bound
    }

    pub fn distinct_pencils(&self) -> usize {
        self.distinct.len()
    }

    pub fn certify(&self, p: usize) -> Result<StabilityReport, CheckError> {
        self.certify_with::<f64>(p)
    }

    pub fn certify_with<T: Scalar>(&self, p: usize) -> Result<StabilityReport, CheckError> {
        if p == 0 || p > MAX_DEGREE {
            return Err(CheckError::Unsupported {
                p,
                reason: "degree out of range",
            });
        }
        if self.has_hanging && p > MAX_HANGING_DEGREE {
            return Err(CheckError::Unsupported {
                p,
                reason: "hanging-node elements need p ≤ 5",
            });
        }
        let square = RefElement::<T>::new(Shape::Square, p).expect("checked degree");
        let triangle = RefElement::<T>::new(Shape::Triangle, p).expect("checked degree");
        let kernels = Kernels {
            square_mass: mass_matrices(&square),
            triangle_mass: mass_matrices(&triangle),
            square,
            triangle,
        };
        let solved: Vec<Result<f64, String>> = self.distinct.par_iter().map(|k| solve(p, k, &kernels)).collect();

        let mut per_element = BTreeMap::new();
        let mut paths = BTreeMap::new();
        let mut notes = Vec::new();
        let mut min_lambda = f64::INFINITY;
        let mut worst_element = None;
        for &(t, i, path) in &self.keys {
            paths.insert(t, path);
            match &solved[i] {
                Ok(lam) => {
                    per_element.insert(t, *lam);
                    if *lam < min_lambda {
                        min_lambda = *lam;
                        worst_element = Some(t);
                    }
                }
                Err(msg) => notes.push(format!("element {t}: {msg}")),
            }
        }
        let mu_bound_ok = self.mu_bound.passed;
        if !mu_bound_ok {
            notes.push(format!(
                "grading bound violated: excess {} > C_mu {}",
                self.mu_bound.max_excess, self.mu_bound.c_mu
            ));
        }
        let stable = notes.is_empty() && min_lambda > 0.0 && mu_bound_ok;
        Ok(StabilityReport {
            mu: self.mu,
            p,
            per_element,
            paths,
            min_lambda,
            mu_bound_ok,
            mu_bound: self.mu_bound.clone(),
            verdict: if stable { Verdict::Stable } else { Verdict::NotCertified },
            worst_element,
            hz_over_ht: self.hz_over_ht,
            distinct_pencils: self.distinct.len(),
            notes,
        })
    }
}

/// Certifies `mesh` in `f64`.
pub fn certify(mesh: &Mesh, p: usize, mu: f64) -> Result<StabilityReport, CheckError> {
    Prepared::new(mesh, mu)?.certify(p)
}

pub fn certify_with<T: Scalar>(mesh: &Mesh, p: usize, mu: f64) -> Result<StabilityReport, CheckError> {
    Prepared::new(mesh, mu)?.certify_with::<T>(p)
}

// Pencil of an active element from its vertex exponents `e`, shifted so
// the smallest exponent is zero.
fn element_pencil(
    mesh: &Mesh,
    t: ElementId,
    e: &[f64],
    exps: &[Option<f64>],
) -> Result<(Pencil, PencilPath), CheckError> {
    let pts = mesh.points(t);
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    if mesh.element(t).shape == Shape::Triangle {
        return Ok((
            Pencil::Triangle {
                e: [0, 1, 2].map(|i| e[i] - lo),
            },
            PencilPath::Triangle,
        ));
    }
    let half_edges = fine_half_edges(mesh, t);
    if half_edges.is_empty() {
        let (r, bp) = canonical_rotation(&pts)?;
        // vertex nodes in node order: (0,0), (1,0), (0,1), (1,1)
        let order = [r, (r + 1) % 4, (r + 3) % 4, (r + 2) % 4];
        let (c1, c2) = (snap(bp.c1), snap(bp.c2));
        let path = if c1 == 0.0 && c2 == 0.0 {
            PencilPath::Affine
        } else {
            PencilPath::GeneralQuad
        };
        return Ok((
            Pencil::Quad {
                e: order.map(|i| e[i] - lo),
                c1,
                c2,
            },
            path,
        ));
    }
    let bp = extract_bilinear_params(&[pts[0], pts[1], pts[2], pts[3]])?;
    let far: Vec<f64> = half_edges.iter().map(|h| exps[h.2].expect("active vertex")).collect();
    let lo = far.iter().copied().fold(lo, f64::min);
    let pencil = Pencil::Hanging {
        edges: half_edges.iter().map(|h| (h.0, h.1)).collect(),
        corners: [0, 1, 2, 3].map(|i| e[i] - lo),
        far: far.iter().map(|&f| f - lo).collect(),
        c1: snap(bp.c1),
        c2: snap(bp.c2),
    };
    Ok((pencil, PencilPath::Hanging))
}

// Local edges of `t` that are one half of a coarse edge, as
// (edge, anchor at edge start, far coarse vertex).
fn fine_half_edges(mesh: &Mesh, t: ElementId) -> Vec<(usize, bool, usize)> {
    let el = mesh.element(t);
    let mut out = Vec::new();
    for k in 0..el.n_edges() {
        let (a, b) = el.edge(k);
        if let Some(&[x, y]) = mesh.hanging().get(&b) {
            if x == a || y == a {
                out.push((k, true, if x == a { y } else { x }));
                continue;
            }
        }
        if let Some(&[x, y]) = mesh.hanging().get(&a) {
            if x == b || y == b {
                out.push((k, false, if x == b { y } else { x }));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::{refine_qr, refine_qrb};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn unit_square_parameters() {
        let bp = extract_bilinear_params(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        for v in [bp.s, bp.theta, bp.alpha, bp.beta, bp.c1, bp.c2] {
            assert_eq!(v, 0.0);
        }
        assert_eq!((bp.h_x, bp.h_y), (1.0, 1.0));
    }

    #[test]
    fn parallelogram_parameters_reproduce_corners() {
        let q = [[0.0, 0.0], [2.0, 0.0], [3.0, 1.0], [1.0, 1.0]];
        let bp = extract_bilinear_params(&q).unwrap();
        assert!(close(bp.alpha, 0.0) && close(bp.beta, 0.0));
        assert!(close(bp.h_x, 2.0) && close(bp.h_y, 1.0) && close(bp.s, 1.0));
        for (i, (x, y)) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)].into_iter().enumerate() {
            let m = bp.map(x, y);
            assert!((m[0] - q[i][0]).abs() < 1e-10 && (m[1] - q[i][1]).abs() < 1e-10);
        }
        let flat = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 0.0]];
        assert!(matches!(extract_bilinear_params(&flat), Err(CheckError::Degenerate)));
    }

    #[test]
    fn blue_children_have_c1_zero() {
        let m = refine_qrb(&Mesh::make_initial(1, 2, 0.0), &[0]).unwrap();
        for t in m.active_elements() {
            let (_, bp) = canonical_rotation(&m.points(t)).unwrap();
            assert!(bp.c1.abs() < 1e-12);
            assert!([-0.5, 0.0, 1.0].iter().any(|&c| close(bp.c2, c)), "c2 = {}", bp.c2);
        }
    }

    #[test]
    fn uniform_mesh_is_stable_with_unit_lambda() {
        let r = certify(&Mesh::make_initial(2, 2, 0.3), 3, 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::Stable);
        assert!(r.per_element.values().all(|&l| (l - 1.0).abs() < 1e-12));
        assert_eq!(r.distinct_pencils, 1);
    }

    #[test]
    fn hanging_elements_use_the_constrained_path() {
        let m = refine_qr(&Mesh::make_initial(1, 2, 0.0), &[0]).unwrap();
        let r = certify(&m, 2, 1.0).unwrap();
        assert_eq!(r.paths.values().filter(|&&p| p == PencilPath::Hanging).count(), 2);
        assert_eq!(r.verdict, Verdict::Stable);
        assert!(matches!(certify(&m, 6, 1.0), Err(CheckError::Unsupported { .. })));
    }
}
