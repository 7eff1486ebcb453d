//! Weight configurations, the weighted matrix `A(T)` and the minimization of
//! `λ_min` over all admissible configurations.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eig::{cholesky, EigError, SymPair};
use crate::integrate::{mass_matrices, MassMatrices};
use crate::linalg::Matrix;
use crate::polybasis::{BasisError, NodeKind, RefElement, Shape};
use crate::Scalar;

const DEDUP_TOL: f64 = 1e-12;

/// Refinement strategy whose generations an enumeration draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Qr,
    Qrg,
    Qrb,
    Triangle,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qr" | "q-r" => Ok(Strategy::Qr),
            "qrg" | "q-rg" => Ok(Strategy::Qrg),
            "qrb" | "q-rb" => Ok(Strategy::Qrb),
            "triangle" | "tri" => Ok(Strategy::Triangle),
            other => Err(format!("unknown strategy '{other}'")),
        }
    }
}

/// Generations modulo 2, stored exactly as `m − n·log₂3`.
///
/// An element whose area is `|K|·3ⁿ/2ᵐ` has generation `m − n·log₂3`, so the
/// factor 8/3 is the offset `(3, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationSet {
    offsets: Vec<(i64, i64)>,
}

impl GenerationSet {
    pub const PERIOD: i64 = 2;

    pub fn new(mut offsets: Vec<(i64, i64)>) -> Self {
        offsets.sort_unstable();
        offsets.dedup();
        Self { offsets }
    }

    pub fn for_strategy(strategy: Strategy) -> Self {
        match strategy {
            Strategy::Qr => Self::new(vec![(0, 0)]),
            Strategy::Qrg => Self::new(vec![(0, 0), (1, 0), (3, 1)]),
            Strategy::Qrb => Self::new(vec![(0, 0), (3, 1)]),
            Strategy::Triangle => Self::new(vec![(0, 0), (1, 0)]),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(self.offsets.iter().chain(&other.offsets).copied().collect())
    }

    pub fn offsets(&self) -> &[(i64, i64)] {
        &self.offsets
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offset_values(&self) -> Vec<f64> {
        self.offsets.iter().map(|&(m, n)| generation_value(m, n)).collect()
    }

    /// Exact membership of the generation `m − n·log₂3`.
    pub fn contains_exact(&self, m: i64, n: i64) -> bool {
        self.offsets
            .iter()
            .any(|&(om, on)| on == n && m >= om && (m - om) % Self::PERIOD == 0)
    }

    /// Membership of a floating point generation value.
    pub fn contains(&self, gen: f64, tol: f64) -> bool {
        let period = Self::PERIOD as f64;
        self.offset_values().iter().any(|&o| {
            let k = ((gen - o) / period).round();
            k >= 0.0 && (gen - o - k * period).abs() <= tol
        })
    }
}

pub fn generation_value(m: i64, n: i64) -> f64 {
    m as f64 - n as f64 * 3f64.log2()
}

#[derive(Debug, Error)]
pub enum WeightsError {
    #[error("generation set is empty")]
    EmptyGenerationSet,
    #[error("non-positive node weight at node {0}")]
    NonPositiveWeight(usize),
    #[error("expected {expected} vertex exponents, got {got}")]
    VertexCount { expected: usize, got: usize },
    #[error("mass matrix not SPD for (c1, c2) = ({c1}, {c2}): {source}")]
    NotSpd { c1: f64, c2: f64, source: EigError },
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Normalized vertex exponents `e_z` with `h_z = 2^{−e_z/2}`.
///
/// Exponents are listed for the vertex nodes in element node order; for the
/// square that is `(0,0), (1,0), (0,1), (1,1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub vertex_exponents: Vec<f64>,
    pub mu: f64,
}

/// Per-node `h⁺` and `h⁻`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeWeights<T> {
    pub h_plus: Vec<T>,
    pub h_minus: Vec<T>,
}

impl<T: Scalar> NodeWeights<T> {
    pub fn uniform(n: usize) -> Self {
        Self {
            h_plus: vec![T::one(); n],
            h_minus: vec![T::one(); n],
        }
    }

    /// The matrix `W_ab = ½(h_a⁺h_b⁻ + h_b⁺h_a⁻)`, so that `A = W ∘ M`.
    pub fn coupling(&self) -> Matrix<T> {
        let half = T::lit(0.5);
        let (hp, hm) = (&self.h_plus, &self.h_minus);
        Matrix::from_fn(hp.len(), hp.len(), |a, b| half * (hp[a] * hm[b] + hp[b] * hm[a]))
    }
}

/// All values `o − o′ + 2i + μj` in `[0, μ]`, ascending and duplicate-free.
pub fn candidate_exponents(set: &GenerationSet, mu: f64) -> Vec<f64> {
    candidate_exponents_upto(set, mu, mu)
}

/// Same as [`candidate_exponents`] with values folded into `[0, upper]`.
pub fn candidate_exponents_upto(set: &GenerationSet, mu: f64, upper: f64) -> Vec<f64> {
    let vals = set.offset_values();
    let reach = ((upper + 4.0) / mu.min(2.0)).ceil() as i64 + 2;
    let mut out: Vec<f64> = Vec::new();
    for &o in &vals {
        for &o2 in &vals {
            for i in -reach..=reach {
                for j in -reach..=reach {
                    let v = o - o2 + 2.0 * i as f64 + mu * j as f64;
                    if (-DEDUP_TOL..=upper + DEDUP_TOL).contains(&v) {
                        out.push(v.clamp(0.0, upper));
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    out.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL);
    out
}

/// All normalized exponent tuples (minimum zero) over the candidate values,
/// in lexicographic order of candidate indices.
pub fn enumerate_configs(set: &GenerationSet, mu: f64, n_vertices: usize) -> Result<Vec<WeightConfig>, WeightsError> {
    if set.is_empty() {
        return Err(WeightsError::EmptyGenerationSet);
    }
    let cands = candidate_exponents(set, mu);
    Ok(tuples(&cands, n_vertices)
        .into_iter()
        .filter(|t| t.contains(&0.0))
        .map(|vertex_exponents| WeightConfig { vertex_exponents, mu })
        .collect())
}

pub(crate) fn tuples(vals: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(n)];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                vals.iter().map(move |&v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Node weights interpolated from the vertex exponents: `h⁺` and `h⁻` are
/// interpolated separately, so off the vertices `h⁻ ≠ 1/h⁺` in general.
pub fn node_weights<T: Scalar>(el: &RefElement<T>, cfg: &WeightConfig) -> Result<NodeWeights<T>, WeightsError> {
    let nv = el.shape().n_vertices();
    if cfg.vertex_exponents.len() != nv {
        return Err(WeightsError::VertexCount {
            expected: nv,
            got: cfg.vertex_exponents.len(),
        });
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let e: Vec<T> = cfg.vertex_exponents.iter().map(|&x| T::lit(x)).collect();
    let hp: Vec<T> = e.iter().map(|&x| two.powf(-x * half)).collect();
    let hm: Vec<T> = e.iter().map(|&x| two.powf(x * half)).collect();
    Ok(interpolate_vertex_weights(el, &hp, &hm))
}

/// Interpolates vertex values given in element node order.
pub fn interpolate_vertex_weights<T: Scalar>(el: &RefElement<T>, hp: &[T], hm: &[T]) -> NodeWeights<T> {
    let interp = |v: &[T], x: T, y: T| -> T {
        let one = T::one();
        match el.shape() {
            Shape::Square => v[0] * (one - x) * (one - y) + v[1] * x * (one - y) + v[2] * (one - x) * y + v[3] * x * y,
            Shape::Triangle => v[0] * (one - x - y) + v[1] * x + v[2] * y,
        }
    };
    let mut h_plus = Vec::with_capacity(el.n_nodes());
    let mut h_minus = Vec::with_capacity(el.n_nodes());
    for &[x, y] in el.nodes() {
        h_plus.push(interp(hp, x, y));
        h_minus.push(interp(hm, x, y));
    }
    NodeWeights { h_plus, h_minus }
}

/// Node indices of the vertices, in node order.
pub fn vertex_nodes<T: Scalar>(el: &RefElement<T>) -> Vec<usize> {
    el.kinds()
        .iter()
        .enumerate()
        .filter_map(|(a, k)| matches!(k, NodeKind::Vertex(_)).then_some(a))
        .collect()
}

/// `A_ab = ½(h_a⁺h_b⁻ + h_b⁺h_a⁻)·M_ab`.
pub fn assemble_a<T: Scalar>(mass: &Matrix<T>, w: &NodeWeights<T>) -> Result<Matrix<T>, WeightsError> {
    assert_eq!(mass.rows(), w.h_plus.len(), "dimension mismatch");
    assert_eq!(w.h_plus.len(), w.h_minus.len(), "dimension mismatch");
    for (a, (&p, &m)) in w.h_plus.iter().zip(&w.h_minus).enumerate() {
        if !(p > T::zero() && m > T::zero()) {
            return Err(WeightsError::NonPositiveWeight(a));
        }
    }
    Ok(w.coupling().hadamard(mass))
}

/// Geometry family of the element being certified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometryCase {
    /// parallelograms: `c1 = c2 = 0`
    Affine,
    /// `|c1| ≤ c`, `|c2| ≤ 2c`
    GeneralQuad { c: f64 },
    /// blue children: `c1 = 0`, `c2 ∈ {−½, 0, 1}`
    QrbQuad,
}

impl GeometryCase {
    /// The `(c1, c2)` combinations whose minimum bounds the whole family.
    pub fn corners(&self) -> Vec<(f64, f64)> {
        match *self {
            GeometryCase::Affine => vec![(0.0, 0.0)],
            GeometryCase::GeneralQuad { c } => {
                vec![(-c, -2.0 * c), (c, -2.0 * c), (-c, 2.0 * c), (c, 2.0 * c), (0.0, 0.0)]
            }
            GeometryCase::QrbQuad => vec![(0.0, -0.5), (0.0, 0.0), (0.0, 1.0)],
        }
    }
}

/// `Â = A_L + c1·A_x + c2·A_y` and `M̂ = M_L + c1·M_x + c2·M_y`.
pub fn general_quad_pencils<T: Scalar>(
    mass: &MassMatrices<T>,
    w: &NodeWeights<T>,
    c1: T,
    c2: T,
) -> Result<SymPair<T>, WeightsError> {
    let m = mass.m_l.add_scaled(&mass.m_x, c1).add_scaled(&mass.m_y, c2);
    let a = assemble_a(&m, w)?;
    Ok(SymPair::new(a, m)?)
}

/// Minimizer of a table sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableCell {
    pub lambda_min: f64,
    pub vertex_exponents: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
}

/// Smallest eigenvalue over all configurations of `set` and all corner
/// combinations of `geometry`.
pub fn min_lambda_table<T: Scalar>(
    shape: Shape,
    p: usize,
    set: &GenerationSet,
    mu: f64,
    geometry: GeometryCase,
) -> Result<TableCell, WeightsError> {
    let el = RefElement::<T>::new(shape, p)?;
    let mass = mass_matrices(&el);
    let mut configs = enumerate_configs(set, mu, shape.n_vertices())?;
    // extreme tuples attain the minimum in practice; visiting them first lets
    // the screen discard most of the remaining configurations
    configs.sort_by_key(|c| {
        std::cmp::Reverse(
            c.vertex_exponents
                .iter()
                .filter(|&&e| e == 0.0 || (e - mu).abs() <= DEDUP_TOL)
                .count(),
        )
    });
    let corners = geometry.corners();
    let mut masses = Vec::with_capacity(corners.len());
    for &(c1, c2) in &corners {
        let m = mass
            .m_l
            .add_scaled(&mass.m_x, T::lit(c1))
            .add_scaled(&mass.m_y, T::lit(c2));
        cholesky(&m).map_err(|source| WeightsError::NotSpd { c1, c2, source })?;
        masses.push(m);
    }
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|i| (0..corners.len()).map(move |k| (i, k)))
        .collect();
    let best = sweep_min(&jobs, |&(i, k)| {
        let w = node_weights(&el, &configs[i])?;
        let a = assemble_a(&masses[k], &w)?;
        Ok(SymPair::from_symmetric(a, masses[k].clone()))
    })?;
    let (j, lambda_min) = best.expect("at least the all-zero configuration");
    let (i, k) = jobs[j];
    Ok(TableCell {
        lambda_min,
        vertex_exponents: configs[i].vertex_exponents.clone(),
        c1: corners[k].0,
        c2: corners[k].1,
    })
}

/// Parallel minimum of `λ_min` over pencils built on demand.
///
/// A pencil is solved only if `A − σM` fails to be positive definite for
/// `σ = best + margin`. Every pencil within the margin of the running best is
/// therefore solved exactly, which keeps the result independent of thread
/// scheduling. Returns the index and value of the minimizer; ties go to the
/// lowest index.
pub fn sweep_min<C, T, F>(items: &[C], build: F) -> Result<Option<(usize, f64)>, WeightsError>
where
    C: Sync,
    T: Scalar,
    F: Fn(&C) -> Result<SymPair<T>, WeightsError> + Sync,
{
    let best_bits = AtomicU64::new(f64::INFINITY.to_bits());
    let results: Vec<Option<f64>> = items
        .par_iter()
        .map(|item| -> Result<Option<f64>, WeightsError> {
            let pair = build(item)?;
            let best = f64::from_bits(best_bits.load(Ordering::Relaxed));
            if best.is_finite() {
                let sigma = best + screen_margin(best);
                if pair.exceeds(T::lit(sigma)) {
                    return Ok(None);
                }
            }
            let lam = pair.lambda_min()?.to_f64_lossy();
            let _ = best_bits.fetch_update(Ordering::Relaxed, Ordering::Relaxed, |cur| {
                (lam < f64::from_bits(cur)).then_some(lam.to_bits())
            });
            Ok(Some(lam))
        })
        .collect::<Result<_, _>>()?;
    Ok(results.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).fold(
        None,
        |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, b)) if b <= v => acc,
            _ => Some((i, v)),
        },
    ))
}

fn screen_margin(best: f64) -> f64 {
    1e-8 * best.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l83() -> f64 {
        (8.0f64 / 3.0).log2()
    }

    #[test]
    fn qr_mu2_has_fifteen_configs() {
        let set = GenerationSet::for_strategy(Strategy::Qr);
        assert_eq!(candidate_exponents(&set, 2.0), vec![0.0, 2.0]);
        let cfgs = enumerate_configs(&set, 2.0, 4).unwrap();
        assert_eq!(cfgs.len(), 15);
        assert!(cfgs.iter().any(|c| c.vertex_exponents.iter().all(|&e| e == 0.0)));
    }

    #[test]
    fn qrg_mu2_candidates() {
        let set = GenerationSet::for_strategy(Strategy::Qrg);
        let c = candidate_exponents(&set, 2.0);
        let want = [0.0, 1.0, l83() - 1.0, 2.0 - l83(), l83(), 3.0 - l83(), 2.0];
        for w in want {
            assert!(c.iter().any(|&x| (x - w).abs() < 1e-12), "missing {w}");
        }
        assert_eq!(c.len(), want.len());
    }

    #[test]
    fn empty_set_is_an_error() {
        let set = GenerationSet::new(vec![]);
        assert!(matches!(
            enumerate_configs(&set, 1.0, 3),
            Err(WeightsError::EmptyGenerationSet)
        ));
    }

    #[test]
    fn membership() {
        let qrg = GenerationSet::for_strategy(Strategy::Qrg);
        for g in [0.0, 1.0, l83(), 2.0, 3.0, 2.0 + l83(), 4.0, 5.0] {
            assert!(qrg.contains(g, 1e-12), "{g}");
        }
        assert!(!qrg.contains(l83() - 1.0, 1e-12));
        let qrb = GenerationSet::for_strategy(Strategy::Qrb);
        assert!(qrb.contains_exact(3, 1) && qrb.contains_exact(5, 1) && qrb.contains_exact(4, 0));
        assert!(!qrb.contains_exact(1, 0) && !qrb.contains_exact(4, 1));
        assert!(!GenerationSet::for_strategy(Strategy::Qr).contains(1.0, 1e-12));
    }

    #[test]
    fn node_weight_examples() {
        let q1 = RefElement::<f64>::new(Shape::Square, 1).unwrap();
        let cfg = WeightConfig {
            vertex_exponents: vec![0.0, 0.0, 0.0, 2.0],
            mu: 2.0,
        };
        let w = node_weights(&q1, &cfg).unwrap();
        assert_eq!(w.h_plus, vec![1.0, 1.0, 1.0, 0.5]);
        assert_eq!(w.h_minus, vec![1.0, 1.0, 1.0, 2.0]);
        let mass = mass_matrices(&q1);
        let a = assemble_a(&mass.m_l, &w).unwrap();
        assert!((a[(0, 3)] - 1.25 / 36.0).abs() < 1e-15);
        for i in 0..4 {
            assert!((a[(i, i)] - mass.m_l[(i, i)]).abs() < 1e-15);
        }

        let q2 = RefElement::<f64>::new(Shape::Square, 2).unwrap();
        let w = node_weights(&q2, &cfg).unwrap();
        assert!((w.h_plus[4] - 0.875).abs() < 1e-15);
        assert!((w.h_minus[4] - 1.25).abs() < 1e-15);
    }

    #[test]
    fn uniform_weights_reproduce_mass() {
        let el = RefElement::<f64>::new(Shape::Triangle, 3).unwrap();
        let mass = mass_matrices(&el);
        let cfg = WeightConfig {
            vertex_exponents: vec![0.0; 3],
            mu: 1.0,
        };
        let w = node_weights(&el, &cfg).unwrap();
        assert_eq!(assemble_a(&mass.m_l, &w).unwrap(), mass.m_l);
        let mut bad = w.clone();
        bad.h_minus[2] = 0.0;
        assert!(matches!(
            assemble_a(&mass.m_l, &bad),
            Err(WeightsError::NonPositiveWeight(2))
        ));
    }

    #[test]
    fn affine_corner_reduces_to_plain_pair() {
        let el = RefElement::<f64>::new(Shape::Square, 2).unwrap();
        let mass = mass_matrices(&el);
        let cfg = WeightConfig {
            vertex_exponents: vec![0.0, 1.0, 2.0, 0.0],
            mu: 2.0,
        };
        let w = node_weights(&el, &cfg).unwrap();
        let pair = general_quad_pencils(&mass, &w, 0.0, 0.0).unwrap();
        assert_eq!(pair.m(), &mass.m_l);
        assert_eq!(pair.a(), &assemble_a(&mass.m_l, &w).unwrap());
    }

    #[test]
    fn small_table_cells() {
        let union = GenerationSet::for_strategy(Strategy::Qr).union(&GenerationSet::for_strategy(Strategy::Qrg));
        let cell = min_lambda_table::<f64>(Shape::Square, 1, &union, 2.0, GeometryCase::Affine).unwrap();
        assert!(cell.lambda_min.abs() < 1e-12);
        let cell = min_lambda_table::<f64>(Shape::Square, 2, &union, 1.0, GeometryCase::Affine).unwrap();
        assert!((cell.lambda_min - 0.909009742330268).abs() < 1e-9);
        let tri = GenerationSet::for_strategy(Strategy::Triangle);
        let cell = min_lambda_table::<f64>(Shape::Triangle, 1, &tri, 2.0, GeometryCase::Affine).unwrap();
        assert!((cell.lambda_min - 0.658493649053890).abs() < 1e-9);
        let qrb = GenerationSet::for_strategy(Strategy::Qrb);
        let cell = min_lambda_table::<f64>(Shape::Square, 3, &qrb, 2.0, GeometryCase::QrbQuad).unwrap();
        assert!((cell.lambda_min - 0.766603599479458).abs() < 1e-9);
    }
}
