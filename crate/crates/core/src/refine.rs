//! Red, green and blue refinement patterns and the Q-R, Q-RG and Q-RB
//! drivers.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::mesh::{AreaRatio, ElementId, ElementKind, Mesh, MeshError, VertexId};
use crate::polybasis::Shape;
use crate::weights::Strategy;

/// Upper bound on closure iterations of a single driver call.
pub const ITERATION_CAP: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum RefineError {
    #[error("marked element {0} does not exist")]
    InvalidMark(ElementId),
    #[error("closure did not reach a fixpoint within {0} iterations")]
    CapExceeded(usize),
    #[error("element {element} has an unmatched hanging-node configuration {edges:?}")]
    Unmatched { element: ElementId, edges: Vec<usize> },
    #[error("{strategy:?} cannot refine a mesh containing {kind:?} elements")]
    WrongHistory { strategy: Strategy, kind: ElementKind },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternKind {
    Red,
    Green1,
    Green2,
    Green3,
    Blue,
}

/// Point of a pattern in terms of the parent quad `v0..v3`: corner `V(k)`,
/// midpoint `M(k)` of edge `(v_k, v_{k+1})`, or the centre `C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternPoint {
    V(usize),
    M(usize),
    C,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternChild {
    pub points: Vec<PatternPoint>,
    /// `|parent| / |child|`
    pub factor: AreaRatio,
}

/// Children of a pattern anchored at local edge `i`; indices are taken mod 4.
pub fn pattern(kind: PatternKind, i: usize) -> Vec<PatternChild> {
    use PatternPoint::{C, M, V};
    let v = |k: usize| V((i + k) % 4);
    let m = |k: usize| M((i + k) % 4);
    let child = |points: Vec<PatternPoint>, n: i64, d: i64| PatternChild {
        points,
        factor: AreaRatio::new(n, d),
    };
    match kind {
        PatternKind::Red => vec![
            child(vec![v(0), m(0), C, m(3)], 4, 1),
            child(vec![m(0), v(1), m(1), C], 4, 1),
            child(vec![C, m(1), v(2), m(2)], 4, 1),
            child(vec![m(3), C, m(2), v(3)], 4, 1),
        ],
        PatternKind::Green1 => vec![
            child(vec![v(0), m(0), v(3)], 4, 1),
            child(vec![m(0), v(1), v(2)], 4, 1),
            child(vec![m(0), v(2), v(3)], 2, 1),
        ],
        PatternKind::Green2 => vec![
            child(vec![v(0), m(0), v(3)], 4, 1),
            child(vec![m(0), v(1), m(1)], 8, 1),
            child(vec![m(1), v(2), v(3)], 4, 1),
            child(vec![m(0), m(1), v(3)], 8, 3),
        ],
        PatternKind::Green3 => vec![
            child(vec![v(0), m(0), m(2), v(3)], 2, 1),
            child(vec![m(0), v(1), v(2), m(2)], 2, 1),
        ],
        PatternKind::Blue => vec![
            child(vec![v(0), m(0), C, v(3)], 8, 3),
            child(vec![m(0), v(1), m(1), C], 4, 1),
            child(vec![C, m(1), v(2), v(3)], 8, 3),
        ],
    }
}

impl PatternKind {
    fn element_kind(self) -> ElementKind {
        match self {
            PatternKind::Red => ElementKind::RedChild,
            PatternKind::Green1 => ElementKind::Green1,
            PatternKind::Green2 => ElementKind::Green2,
            PatternKind::Green3 => ElementKind::Green3,
            PatternKind::Blue => ElementKind::BlueChild,
        }
    }
}

/// Pattern point coordinates on a parent quad.
pub fn pattern_coords(quad: &[[f64; 2]; 4], p: PatternPoint) -> [f64; 2] {
    match p {
        PatternPoint::V(k) => quad[k],
        PatternPoint::M(k) => {
            let (a, b) = (quad[k], quad[(k + 1) % 4]);
            [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
        }
        PatternPoint::C => {
            let s = quad.iter().fold([0.0, 0.0], |s, q| [s[0] + q[0], s[1] + q[1]]);
            [0.25 * s[0], 0.25 * s[1]]
        }
    }
}

/// `true` when the polygon is strictly convex and counter-clockwise.
pub fn is_convex_ccw(pts: &[[f64; 2]]) -> bool {
    let n = pts.len();
    (0..n).all(|k| {
        let (a, b, c) = (pts[k], pts[(k + 1) % n], pts[(k + 2) % n]);
        (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 1e-14
    })
}

fn apply(mesh: &mut Mesh, e: ElementId, kind: PatternKind, i: usize) -> Result<(), RefineError> {
    let verts = mesh.element(e).verts.clone();
    debug_assert_eq!(verts.len(), 4, "patterns refine quadrilaterals");
    let mut ids = Vec::new();
    for ch in pattern(kind, i) {
        let vs: Vec<VertexId> = ch
            .points
            .iter()
            .map(|&p| match p {
                PatternPoint::V(k) => verts[k],
                PatternPoint::M(k) => mesh.midpoint(verts[k], verts[(k + 1) % 4]),
                PatternPoint::C => mesh.center(&verts),
            })
            .collect();
        let shape = if vs.len() == 3 { Shape::Triangle } else { Shape::Square };
        ids.push((shape, vs, ch.factor));
    }
    for (shape, vs, factor) in ids {
        mesh.add_child(e, shape, vs, kind.element_kind(), factor)?;
    }
    Ok(())
}

// Marks on children of undone patterns move to the parent.
fn resolve_marks(
    mesh: &Mesh,
    marked: &[ElementId],
    undone: impl Fn(ElementKind) -> bool,
) -> Result<BTreeSet<ElementId>, RefineError> {
    let mut out = BTreeSet::new();
    for &e in marked {
        if e >= mesh.elements().len() {
            return Err(RefineError::InvalidMark(e));
        }
        let el = mesh.element(e);
        match el.parent {
            Some(p) if undone(el.kind) => out.insert(p),
            _ => out.insert(e),
        };
    }
    Ok(out)
}

fn check_history(mesh: &Mesh, strategy: Strategy, allowed: &[ElementKind]) -> Result<(), RefineError> {
    for el in mesh.elements() {
        if !allowed.contains(&el.kind) {
            return Err(RefineError::WrongHistory {
                strategy,
                kind: el.kind,
            });
        }
    }
    Ok(())
}

// Removes every pattern whose children satisfy `pred`.
fn undo(mesh: &mut Mesh, pred: impl Fn(ElementKind) -> bool) {
    let parents: Vec<ElementId> = (0..mesh.elements().len())
        .filter(|&e| {
            mesh.is_alive(e)
                && mesh
                    .element(e)
                    .children
                    .first()
                    .is_some_and(|&c| pred(mesh.element(c).kind))
        })
        .collect();
    for p in parents {
        mesh.remove_children(p);
    }
}

// Q-R on a mesh in place; marked ids must be current.
fn qr_in_place(mesh: &mut Mesh, marked: BTreeSet<ElementId>) -> Result<(), RefineError> {
    let mut marked = marked;
    for _ in 0..ITERATION_CAP {
        if marked.is_empty() {
            mesh.refresh_hanging();
            return Ok(());
        }
        for &e in &marked {
            if mesh.is_active(e) && mesh.element(e).shape == Shape::Square {
                apply(mesh, e, PatternKind::Red, 0)?;
            }
        }
        mesh.refresh_hanging();
        marked = mesh.irregular_elements().into_iter().collect();
        for e in mesh.active_elements() {
            if mesh.hanging_edges(e).len() > 3 {
                marked.insert(e);
            }
        }
    }
    Err(RefineError::CapExceeded(ITERATION_CAP))
}

fn finish(mut mesh: Mesh) -> Mesh {
    mesh.compact();
    mesh.refresh_hanging();
    mesh
}

/// Repeated red refinement with the 1-irregularity and 3-neighbour rules.
pub fn refine_qr(mesh: &Mesh, marked: &[ElementId]) -> Result<Mesh, RefineError> {
    check_history(mesh, Strategy::Qr, &[ElementKind::Unrefined, ElementKind::RedChild])?;
    let marks = resolve_marks(mesh, marked, |_| false)?;
    let marks = marks.into_iter().filter(|&e| mesh.is_active(e)).collect();
    let mut out = mesh.clone();
    qr_in_place(&mut out, marks)?;
    Ok(finish(out))
}

fn adjacent_pair(edges: &[usize]) -> Option<usize> {
    // i with {i, i+1} equal to the two edges
    match edges {
        [a, b] if b - a == 1 => Some(*a),
        [0, 3] => Some(3),
        _ => None,
    }
}

/// Q-R followed by green closure; the result has no hanging nodes.
pub fn refine_qrg(mesh: &Mesh, marked: &[ElementId]) -> Result<Mesh, RefineError> {
    let allowed = [
        ElementKind::Unrefined,
        ElementKind::RedChild,
        ElementKind::Green1,
        ElementKind::Green2,
        ElementKind::Green3,
    ];
    check_history(mesh, Strategy::Qrg, &allowed)?;
    let marks = resolve_marks(mesh, marked, ElementKind::is_green)?;
    let mut out = mesh.clone();
    undo(&mut out, ElementKind::is_green);
    let mut marks: BTreeSet<ElementId> = marks.into_iter().filter(|&e| out.is_active(e)).collect();
    for _ in 0..ITERATION_CAP {
        qr_in_place(&mut out, std::mem::take(&mut marks))?;
        for e in out.active_elements() {
            if out.hanging_edges(e).len() > 2 {
                marks.insert(e);
            }
        }
        if marks.is_empty() {
            break;
        }
    }
    if !marks.is_empty() {
        return Err(RefineError::CapExceeded(ITERATION_CAP));
    }
    for e in out.active_elements() {
        let edges: Vec<usize> = out.hanging_edges(e).into_iter().map(|(k, _)| k).collect();
        let (kind, i) = match edges.as_slice() {
            [] => continue,
            [k] => (PatternKind::Green1, *k),
            [a, b] if b - a == 2 => (PatternKind::Green3, *a),
            pair => match adjacent_pair(pair) {
                Some(i) => (PatternKind::Green2, i),
                None => return Err(RefineError::Unmatched { element: e, edges }),
            },
        };
        apply(&mut out, e, kind, i)?;
    }
    Ok(finish(out))
}

/// Q-R followed by blue closure; the result has no hanging nodes.
///
/// Every non-conforming quad must end up with exactly two split edges that
/// meet at a corner. A quad with a single hanging node also splits the
/// adjacent edge of lowest local index whose opposite side is a boundary or
/// an equal edge of one neighbour; the neighbour inherits that split. Quads
/// that cannot be matched are red-refined and the closure restarts.
pub fn refine_qrb(mesh: &Mesh, marked: &[ElementId]) -> Result<Mesh, RefineError> {
    check_history(
        mesh,
        Strategy::Qrb,
        &[ElementKind::Unrefined, ElementKind::RedChild, ElementKind::BlueChild],
    )?;
    let marks = resolve_marks(mesh, marked, |k| k == ElementKind::BlueChild)?;
    let mut out = mesh.clone();
    undo(&mut out, |k| k == ElementKind::BlueChild);
    let mut marks: BTreeSet<ElementId> = marks.into_iter().filter(|&e| out.is_active(e)).collect();
    for _ in 0..ITERATION_CAP {
        qr_in_place(&mut out, std::mem::take(&mut marks))?;
        match blue_closure(&out) {
            Ok(plan) => {
                for (e, i) in plan {
                    apply(&mut out, e, PatternKind::Blue, i)?;
                }
                return Ok(finish(out));
            }
            Err(failed) => marks.extend(failed),
        }
    }
    Err(RefineError::CapExceeded(ITERATION_CAP))
}

type EdgeKey = (VertexId, VertexId);

fn edge_key(a: VertexId, b: VertexId) -> EdgeKey {
    (a.min(b), a.max(b))
}

// Either a blue plan (element, first split edge) or the elements to
// red-refine before trying again.
fn blue_closure(mesh: &Mesh) -> Result<Vec<(ElementId, usize)>, Vec<ElementId>> {
    let edge_map = mesh.edge_map();
    let mut split: HashSet<EdgeKey> = mesh.hanging().values().map(|&[a, b]| (a, b)).collect();
    let active = mesh.active_elements();
    let split_edges = |split: &HashSet<EdgeKey>, e: ElementId| -> Vec<usize> {
        let el = mesh.element(e);
        (0..4)
            .filter(|&k| {
                let (a, b) = el.edge(k);
                split.contains(&edge_key(a, b))
            })
            .collect()
    };
    // a fine half of a coarse edge: one endpoint hangs on an edge through the other
    let is_fine_half = |a: VertexId, b: VertexId| {
        let hangs_on = |h: VertexId, o: VertexId| mesh.hanging().get(&h).is_some_and(|edge| edge.contains(&o));
        hangs_on(a, b) || hangs_on(b, a)
    };
    let mut failed = Vec::new();
    let mut queue: Vec<ElementId> = active.iter().rev().copied().collect();
    while let Some(e) = queue.pop() {
        let s = split_edges(&split, e);
        match s.len() {
            0 => {}
            1 => {
                let i = s[0];
                let el = mesh.element(e);
                let (j0, j1) = ((i + 1) % 4, (i + 3) % 4);
                // rank 0 closes here, rank 1 passes the split on to a neighbour
                let mut best: Option<(u8, usize, Option<ElementId>)> = None;
                for j in [j0.min(j1), j0.max(j1)] {
                    let (a, b) = el.edge(j);
                    let key = edge_key(a, b);
                    let owners = edge_map.get(&key).map_or(&[][..], Vec::as_slice);
                    let rank = match owners.iter().copied().find(|&o| o != e) {
                        None if is_fine_half(a, b) => None,
                        None => Some((0, None)),
                        Some(n) if mesh.element(n).shape != Shape::Square => None,
                        Some(n) => {
                            let mut ns = split_edges(&split, n);
                            let shared = (0..4).find(|&k| {
                                let (x, y) = mesh.element(n).edge(k);
                                edge_key(x, y) == key
                            });
                            ns.extend(shared);
                            ns.sort_unstable();
                            match ns.len() {
                                1 => Some((1, Some(n))),
                                2 if adjacent_pair(&ns).is_some() => Some((0, Some(n))),
                                _ => None,
                            }
                        }
                    };
                    if let Some((r, n)) = rank {
                        if best.is_none_or(|(br, _, _)| r < br) {
                            best = Some((r, j, n));
                        }
                    }
                }
                match best {
                    Some((_, j, n)) => {
                        let (a, b) = el.edge(j);
                        split.insert(edge_key(a, b));
                        queue.extend(n);
                    }
                    None => failed.push(e),
                }
            }
            2 if adjacent_pair(&s).is_some() => {}
            _ => failed.push(e),
        }
    }
    if !failed.is_empty() {
        failed.sort_unstable();
        failed.dedup();
        return Err(failed);
    }
    Ok(active
        .into_iter()
        .filter_map(|e| adjacent_pair(&split_edges(&split, e)).map(|i| (e, i)))
        .collect())
}

/// Refines with the given strategy.
pub fn refine(mesh: &Mesh, strategy: Strategy, marked: &[ElementId]) -> Result<Mesh, RefineError> {
    match strategy {
        Strategy::Qr => refine_qr(mesh, marked),
        Strategy::Qrg => refine_qrg(mesh, marked),
        Strategy::Qrb => refine_qrb(mesh, marked),
        Strategy::Triangle => Err(RefineError::WrongHistory {
            strategy,
            kind: ElementKind::Unrefined,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

    fn area(pts: &[[f64; 2]]) -> f64 {
        let n = pts.len();
        0.5 * (0..n)
            .map(|k| pts[k][0] * pts[(k + 1) % n][1] - pts[k][1] * pts[(k + 1) % n][0])
            .sum::<f64>()
    }

    #[test]
    fn pattern_catalog_areas_and_convexity() {
        let kinds = [
            PatternKind::Red,
            PatternKind::Green1,
            PatternKind::Green2,
            PatternKind::Green3,
            PatternKind::Blue,
        ];
        let skewed = [[0.0, 0.0], [2.0, 0.0], [2.7, 1.3], [0.7, 1.3]];
        for quad in [UNIT, skewed] {
            let total = area(&quad);
            for kind in kinds {
                for i in 0..4 {
                    let mut sum = 0.0;
                    for ch in pattern(kind, i) {
                        let pts: Vec<_> = ch.points.iter().map(|&p| pattern_coords(&quad, p)).collect();
                        assert!(is_convex_ccw(&pts), "{kind:?} {i} {pts:?}");
                        let a = area(&pts);
                        let want = total * *ch.factor.denom() as f64 / *ch.factor.numer() as f64;
                        assert!((a - want).abs() < 1e-12, "{kind:?} {i}");
                        sum += a;
                    }
                    assert!((sum - total).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn blue_has_two_children_of_ratio_eight_thirds() {
        let f: Vec<_> = pattern(PatternKind::Blue, 0).iter().map(|c| c.factor).collect();
        assert_eq!(f.iter().filter(|&&r| r == AreaRatio::new(8, 3)).count(), 2);
        assert_eq!(f.iter().filter(|&&r| r == AreaRatio::from_integer(4)).count(), 1);
    }

    #[test]
    fn empty_marks_leave_mesh_unchanged() {
        let m = Mesh::make_initial(2, 2, 0.0);
        for s in [Strategy::Qr, Strategy::Qrg, Strategy::Qrb] {
            assert_eq!(refine(&m, s, &[]).unwrap(), m);
        }
    }

    #[test]
    fn single_red_refinement() {
        let m = refine_qr(&Mesh::make_initial(1, 1, 0.0), &[0]).unwrap();
        let act = m.active_elements();
        assert_eq!(act.len(), 4);
        for e in act {
            assert_eq!(m.gen_exact(e), Some((2, 0)));
        }
        assert!(m.hanging().is_empty());
        assert!(matches!(refine_qr(&m, &[99]), Err(RefineError::InvalidMark(99))));
    }

    #[test]
    fn qr_enforces_one_irregularity() {
        let m = refine_qr(&Mesh::make_initial(1, 2, 0.0), &[0]).unwrap();
        assert_eq!(m.hanging().len(), 1);
        // the left child touching the right macro element
        let child = m
            .active_elements()
            .into_iter()
            .find(|&e| m.points(e).iter().any(|p| p[0] == 1.0 && p[1] == 0.0))
            .unwrap();
        let m2 = refine_qr(&m, &[child]).unwrap();
        m2.validate(Some(Strategy::Qr)).unwrap();
        let right_refined = m2.elements().iter().any(|el| el.parent == Some(1));
        assert!(right_refined);
    }

    #[test]
    fn qrg_green_closure() {
        let m = refine_qrg(&Mesh::make_initial(1, 2, 0.0), &[0]).unwrap();
        m.validate(Some(Strategy::Qrg)).unwrap();
        let greens: Vec<_> = m
            .active_elements()
            .into_iter()
            .filter(|&e| m.element(e).kind == ElementKind::Green1)
            .collect();
        assert_eq!(greens.len(), 3);
        let m1 = refine_qrg(&Mesh::make_initial(1, 1, 0.0), &[0]).unwrap();
        assert_eq!(m1.active_elements().len(), 4);
    }

    #[test]
    fn qrb_blue_closure() {
        let m = refine_qrb(&Mesh::make_initial(1, 2, 0.0), &[0]).unwrap();
        m.validate(Some(Strategy::Qrb)).unwrap();
        let blues: Vec<_> = m
            .active_elements()
            .into_iter()
            .filter(|&e| m.element(e).kind == ElementKind::BlueChild)
            .collect();
        assert_eq!(blues.len(), 3);
        let mut ratios: Vec<_> = blues.iter().map(|&e| m.element(e).area_ratio).collect();
        ratios.sort();
        assert_eq!(
            ratios,
            vec![AreaRatio::new(8, 3), AreaRatio::new(8, 3), AreaRatio::from_integer(4)]
        );
    }

    #[test]
    fn marking_a_green_child_refines_its_parent() {
        let m = refine_qrg(&Mesh::make_initial(1, 2, 0.0), &[0]).unwrap();
        let g = m
            .active_elements()
            .into_iter()
            .find(|&e| m.element(e).kind.is_green())
            .unwrap();
        let m2 = refine_qrg(&m, &[g]).unwrap();
        m2.validate(Some(Strategy::Qrg)).unwrap();
        assert!(m2
            .active_elements()
            .iter()
            .all(|&e| m2.element(e).kind != ElementKind::Unrefined));
    }

    #[test]
    fn wrong_history_is_rejected() {
        let m = refine_qrg(&Mesh::make_initial(1, 2, 0.0), &[0]).unwrap();
        assert!(matches!(refine_qr(&m, &[0]), Err(RefineError::WrongHistory { .. })));
        assert!(matches!(refine_qrb(&m, &[0]), Err(RefineError::WrongHistory { .. })));
    }
}
