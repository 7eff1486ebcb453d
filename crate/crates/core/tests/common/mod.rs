#![allow(dead_code)]

pub mod golden;

use std::collections::HashSet;

use h1stab::mesh::{ElementId, ElementKind, Mesh};
use h1stab::refine::refine;
use h1stab::{GenerationSet, MatrixF64, Shape, Strategy};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    }};
}

/// Refines `steps` times, marking each active element with probability
/// `fraction`.
pub fn random_mesh(strategy: Strategy, rows: usize, cols: usize, steps: usize, fraction: f64, seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mesh = Mesh::make_initial(rows, cols, 0.0);
    for _ in 0..steps {
        let marked: Vec<ElementId> = mesh
            .active_elements()
            .into_iter()
            .filter(|_| rng.gen_bool(fraction))
            .collect();
        mesh = refine(&mesh, strategy, &marked).expect("refinement succeeds");
    }
    mesh
}

/// Repeatedly refines the active element touching the origin.
pub fn corner_mesh(strategy: Strategy, rows: usize, cols: usize, steps: usize) -> Mesh {
    let mut mesh = Mesh::make_initial(rows, cols, 0.0);
    for _ in 0..steps {
        let marked: Vec<ElementId> = mesh
            .active_elements()
            .into_iter()
            .filter(|&e| mesh.points(e).contains(&[0.0, 0.0]))
            .collect();
        mesh = refine(&mesh, strategy, &marked).expect("refinement succeeds");
    }
    mesh
}

pub fn uniform_mesh(rows: usize, cols: usize, steps: usize) -> Mesh {
    let mut mesh = Mesh::make_initial(rows, cols, 0.0);
    for _ in 0..steps {
        let all = mesh.active_elements();
        mesh = refine(&mesh, Strategy::Qr, &all).expect("refinement succeeds");
    }
    mesh
}

pub fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
    let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / len2;
    cross.abs() <= 1e-12 * len2 && (-1e-12..=1.0 + 1e-12).contains(&t)
}

/// Closed active elements intersect, decided from coordinates alone.
pub fn touching(mesh: &Mesh, s: ElementId, t: ElementId) -> bool {
    let (ps, pt) = (mesh.points(s), mesh.points(t));
    let on_boundary =
        |p: [f64; 2], poly: &[[f64; 2]]| (0..poly.len()).any(|k| on_segment(p, poly[k], poly[(k + 1) % poly.len()]));
    ps.iter().any(|&p| on_boundary(p, &pt)) || pt.iter().any(|&p| on_boundary(p, &ps))
}

/// `max_T (gen(T) − μ·dist(z, T))` with element chains found by breadth-first
/// search over geometric contact.
pub fn brute_force_exponent(mesh: &Mesh, mu: f64, z: [f64; 2]) -> f64 {
    let active = mesh.active_elements();
    let n = active.len();
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for (i, &t) in active.iter().enumerate() {
        let pts = mesh.points(t);
        if (0..pts.len()).any(|k| on_segment(z, pts[k], pts[(k + 1) % pts.len()])) {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if dist[j] == usize::MAX && touching(mesh, active[i], active[j]) {
                dist[j] = dist[i] + 1;
                queue.push_back(j);
            }
        }
    }
    active
        .iter()
        .zip(&dist)
        .map(|(&t, &d)| mesh.gen(t) - mu * d as f64)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn key(p: [f64; 2]) -> (u64, u64) {
    ((p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits())
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Number of active-element vertices strictly inside edge `k` of `e`, found
/// at the dyadic points 1/2, 1/4 and 3/4.
pub fn interior_points(mesh: &Mesh, used: &HashSet<(u64, u64)>, e: usize) -> Vec<Vec<f64>> {
    let pts = mesh.points(e);
    (0..pts.len())
        .map(|k| {
            let (a, b) = (pts[k], pts[(k + 1) % pts.len()]);
            [0.25, 0.5, 0.75]
                .into_iter()
                .filter(|&t| used.contains(&key(lerp(a, b, t))))
                .collect()
        })
        .collect()
}

pub fn check_invariants(mesh: &Mesh, strategy: Strategy, total_area: f64) -> Result<(), String> {
    let active = mesh.active_elements();
    let area: f64 = active.iter().map(|&e| mesh.area(e)).sum();
    ensure!(
        (area - total_area).abs() <= 1e-12 * total_area,
        "area {area} vs {total_area}"
    );

    for &e in &active {
        let m = mesh.macro_of()[e];
        let expected =
            mesh.area(m) / (*mesh.element(e).area_ratio.numer() as f64 / *mesh.element(e).area_ratio.denom() as f64);
        ensure!(
            (mesh.area(e) - expected).abs() <= 1e-12 * mesh.area(m),
            "element {e} area ratio"
        );
    }

    let used: HashSet<_> = active.iter().flat_map(|&e| mesh.points(e)).map(key).collect();
    for &e in &active {
        for (k, inner) in interior_points(mesh, &used, e).into_iter().enumerate() {
            match strategy {
                Strategy::Qr => ensure!(
                    inner.is_empty() || inner == [0.5],
                    "element {e} edge {k} not 1-irregular: {inner:?}"
                ),
                _ => ensure!(inner.is_empty(), "element {e} edge {k} has hanging nodes {inner:?}"),
            }
        }
    }

    let set = GenerationSet::for_strategy(strategy);
    let tri = GenerationSet::for_strategy(Strategy::Triangle);
    for &e in &active {
        let kind = mesh.element(e).kind;
        let g = mesh.gen(e);
        let allowed = match strategy {
            Strategy::Qr => matches!(kind, ElementKind::Unrefined | ElementKind::RedChild),
            Strategy::Qrg => kind != ElementKind::BlueChild,
            Strategy::Qrb => !kind.is_green(),
            Strategy::Triangle => false,
        };
        ensure!(allowed, "{strategy:?} produced {kind:?}");
        let member = if mesh.element(e).shape == Shape::Triangle {
            tri.contains(g, 1e-12) || set.contains(g, 1e-12)
        } else {
            set.contains(g, 1e-12)
        };
        ensure!(member, "element {e} generation {g} outside the {strategy:?} set");
    }

    let angle = mesh.min_angle();
    ensure!(angle > 1e-2, "min angle {angle}");
    mesh.validate(Some(strategy)).map_err(|e| e.to_string())
}

/// Generalized eigenvalues in ascending order from nalgebra's Cholesky
/// factorization and symmetric eigensolver.
pub fn eig_oracle(a: &MatrixF64, m: &MatrixF64) -> Vec<f64> {
    let na = |x: &MatrixF64| DMatrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)]);
    let l = na(m).cholesky().expect("spd mass").l();
    let li = l.try_inverse().expect("invertible factor");
    let s = &li * na(a) * li.transpose();
    let s = (&s + s.transpose()) * 0.5;
    let mut ev: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Random symmetric `A` and `BᵀB + shift·I` of size `n`.
pub fn random_pencil(n: usize, rng: &mut ChaCha8Rng) -> (MatrixF64, MatrixF64) {
    let x: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let shift = rng.gen_range(0.05..2.0);
    pencil_from(n, &x, &y, shift)
}

pub fn pencil_from(n: usize, x: &[f64], y: &[f64], shift: f64) -> (MatrixF64, MatrixF64) {
    let a = MatrixF64::from_fn(n, n, |i, j| x[i * n + j] + x[j * n + i]);
    let m = MatrixF64::from_fn(n, n, |i, j| {
        (0..n).map(|k| y[k * n + i] * y[k * n + j]).sum::<f64>() + if i == j { shift } else { 0.0 }
    });
    (a, m)
}
