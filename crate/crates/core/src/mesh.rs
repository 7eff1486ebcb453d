//! Quadrilateral and triangle meshes with a refinement forest, exact
//! generations, a hanging-node registry and the `dist`/`gen` combinatorics.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polybasis::Shape;
use crate::weights::{GenerationSet, Strategy};

pub type VertexId = usize;
pub type ElementId = usize;
pub type AreaRatio = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Unrefined,
    RedChild,
    Green1,
    Green2,
    Green3,
    BlueChild,
}

impl ElementKind {
    pub fn is_green(self) -> bool {
        matches!(self, ElementKind::Green1 | ElementKind::Green2 | ElementKind::Green3)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub shape: Shape,
    /// counter-clockwise
    pub verts: Vec<VertexId>,
    pub kind: ElementKind,
    pub parent: Option<ElementId>,
    /// `|K_T| / |T|` with `K_T` the macro element containing `T`
    pub area_ratio: AreaRatio,
    pub children: Vec<ElementId>,
}

impl Element {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Local edge `k` as `(verts[k], verts[k + 1])`.
    pub fn edge(&self, k: usize) -> (VertexId, VertexId) {
        (self.verts[k], self.verts[(k + 1) % self.verts.len()])
    }

    pub fn n_edges(&self) -> usize {
        self.verts.len()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("vertices {0} and {1} are not connected")]
    Disconnected(VertexId, VertexId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown element {0}")]
    UnknownElement(ElementId),
    #[error("area ratio overflow at element {0}")]
    Overflow(ElementId),
    #[error("invalid mesh: {0}")]
    Invalid(String),
}

/// Diagnostics of the grading bound `gen(T′) − gen(T) ≤ μ·dist + C_μ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuBoundReport {
    pub mu: f64,
    /// `max_T (max_{z∈T} e_z − gen(T))`, i.e. the largest
    /// `gen(T′) − gen(T) − μ·dist(T, T′)`
    pub max_excess: f64,
    pub worst_element: Option<ElementId>,
    pub c_mu: f64,
    pub alpha0: usize,
    pub n_macro_vertices: usize,
    /// `max_T max_{z,z′∈V(T)} |e_z − e_z′|`; bounded by `μ` when neighbouring
    /// weights differ by at most `2^{μ/2}`
    pub max_vertex_jump: f64,
    pub neighbor_ratio_ok: bool,
    pub passed: bool,
}

/// Vertex adjacency through closed elements; each element contributes its
/// vertices and the hanging nodes on its edges.
/// `(shape, vertices, kind, parent, area ratio)` of a stored element.
pub type ElementParts = (Shape, Vec<VertexId>, ElementKind, Option<ElementId>, AreaRatio);

#[derive(Clone, Debug)]
pub struct VertexGraph {
    pub adj: Vec<Vec<VertexId>>,
    pub incident: Vec<Vec<ElementId>>,
    pub extended: HashMap<ElementId, Vec<VertexId>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    elements: Vec<Element>,
    alive: Vec<bool>,
    macro_of: Vec<ElementId>,
    hanging: BTreeMap<VertexId, [VertexId; 2]>,
    lookup: HashMap<[u64; 2], VertexId>,
}

fn key(p: [f64; 2]) -> [u64; 2] {
    // +0.0 folds negative zero
    [(p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits()]
}

fn signed_area(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        * 0.5
}

pub(crate) fn ratio_log2(r: AreaRatio) -> Option<(i64, i64)> {
    // r = 2^m / 3^n, returned as (m, n)
    let (mut num, mut den) = (*r.numer(), *r.denom());
    let mut m = 0;
    let mut n = 0;
    for (value, sign) in [(&mut num, 1), (&mut den, -1)] {
        while *value % 2 == 0 {
            *value /= 2;
            m += sign;
        }
        while *value % 3 == 0 {
            *value /= 3;
            n -= sign;
        }
    }
    (num == 1 && den == 1).then_some((m, n))
}

impl Mesh {
    /// `rows × cols` congruent parallelograms with unit cells sheared by
    /// `skew` (vertex `(i, j)` sits at `(i + skew·j, j)`).
    pub fn make_initial(rows: usize, cols: usize, skew: f64) -> Self {
        assert!(rows >= 1 && cols >= 1, "grid needs at least one cell");
        let mut mesh = Self::empty();
        let id = |i: usize, j: usize| j * (cols + 1) + i;
        for j in 0..=rows {
            for i in 0..=cols {
                mesh.add_vertex([i as f64 + skew * j as f64, j as f64]);
            }
        }
        for j in 0..rows {
            for i in 0..cols {
                let verts = vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
                mesh.push_element(Element {
                    shape: Shape::Square,
                    verts,
                    kind: ElementKind::Unrefined,
                    parent: None,
                    area_ratio: AreaRatio::from_integer(1),
                    children: Vec::new(),
                });
            }
        }
        mesh
    }

    fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            elements: Vec::new(),
            alive: Vec::new(),
            macro_of: Vec::new(),
            hanging: BTreeMap::new(),
            lookup: HashMap::new(),
        }
    }

    /// Rebuilds a mesh from stored parts and checks consistency.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        elements: Vec<ElementParts>,
        macro_of: Vec<ElementId>,
    ) -> Result<Self, MeshError> {
        let mut mesh = Self::empty();
        for p in vertices {
            let before = mesh.vertices.len();
            if mesh.add_vertex(p) != before {
                return Err(MeshError::Invalid(format!("duplicate vertex {p:?}")));
            }
        }
        let n = elements.len();
        if macro_of.len() != n {
            return Err(MeshError::Invalid("macro_of length differs from element count".into()));
        }
        for (i, (shape, verts, kind, parent, area_ratio)) in elements.into_iter().enumerate() {
            if verts.len() != shape.n_vertices() {
                return Err(MeshError::Invalid(format!("element {i} has {} vertices", verts.len())));
            }
            if let Some(&v) = verts.iter().find(|&&v| v >= mesh.vertices.len()) {
                return Err(MeshError::UnknownVertex(v));
            }
            match parent {
                Some(p) if p >= i => {
                    return Err(MeshError::Invalid(format!("element {i} has parent {p} not before it")))
                }
                _ => {}
            }
            if *area_ratio.numer() <= 0 || *area_ratio.denom() <= 0 {
                return Err(MeshError::Invalid(format!("element {i} has non-positive area ratio")));
            }
            mesh.elements.push(Element {
                shape,
                verts,
                kind,
                parent,
                area_ratio,
                children: Vec::new(),
            });
            mesh.alive.push(true);
            if let Some(p) = parent {
                mesh.elements[p].children.push(i);
            }
        }
        for (i, &m) in macro_of.iter().enumerate() {
            let expect = match mesh.elements[i].parent {
                None => i,
                Some(p) => mesh.macro_of[p],
            };
            if m != expect {
                return Err(MeshError::Invalid(format!(
                    "element {i} has macro {m}, expected {expect}"
                )));
            }
            mesh.macro_of.push(m);
        }
        mesh.refresh_hanging();
        mesh.check_geometry()?;
        Ok(mesh)
    }

    pub(crate) fn add_vertex(&mut self, p: [f64; 2]) -> VertexId {
        let k = key(p);
        if let Some(&v) = self.lookup.get(&k) {
            return v;
        }
        self.vertices.push([p[0] + 0.0, p[1] + 0.0]);
        self.lookup.insert(k, self.vertices.len() - 1);
        self.vertices.len() - 1
    }

    fn midpoint_coords(&self, a: VertexId, b: VertexId) -> [f64; 2] {
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    /// Existing vertex at the midpoint of `(a, b)`.
    pub fn find_midpoint(&self, a: VertexId, b: VertexId) -> Option<VertexId> {
        self.lookup.get(&key(self.midpoint_coords(a, b))).copied()
    }

    pub(crate) fn midpoint(&mut self, a: VertexId, b: VertexId) -> VertexId {
        self.add_vertex(self.midpoint_coords(a, b))
    }

    pub(crate) fn center(&mut self, verts: &[VertexId]) -> VertexId {
        let mut ids = verts.to_vec();
        ids.sort_unstable();
        let mut c = [0.0, 0.0];
        for &v in &ids {
            c[0] += self.vertices[v][0];
            c[1] += self.vertices[v][1];
        }
        let s = 1.0 / ids.len() as f64;
        self.add_vertex([c[0] * s, c[1] * s])
    }

    fn push_element(&mut self, el: Element) -> ElementId {
        let id = self.elements.len();
        let macro_id = el.parent.map_or(id, |p| self.macro_of[p]);
        if let Some(p) = el.parent {
            self.elements[p].children.push(id);
        }
        self.elements.push(el);
        self.alive.push(true);
        self.macro_of.push(macro_id);
        id
    }

    /// Adds a child of `parent` whose area is `|parent| / factor`.
    pub(crate) fn add_child(
        &mut self,
        parent: ElementId,
        shape: Shape,
        verts: Vec<VertexId>,
        kind: ElementKind,
        factor: AreaRatio,
    ) -> Result<ElementId, MeshError> {
        let r = self.elements[parent].area_ratio;
        let area_ratio = r
            .numer()
            .checked_mul(*factor.numer())
            .zip(r.denom().checked_mul(*factor.denom()))
            .map(|(n, d)| AreaRatio::new(n, d))
            .ok_or(MeshError::Overflow(parent))?;
        Ok(self.push_element(Element {
            shape,
            verts,
            kind,
            parent: Some(parent),
            area_ratio,
            children: Vec::new(),
        }))
    }

    /// Removes the children of `parent`, making it a leaf again.
    pub(crate) fn remove_children(&mut self, parent: ElementId) {
        let children = std::mem::take(&mut self.elements[parent].children);
        for c in children {
            debug_assert!(self.elements[c].is_leaf());
            self.alive[c] = false;
        }
    }

    /// Drops removed elements and renumbers the rest; returns the map from
    /// old to new ids.
    pub(crate) fn compact(&mut self) -> Vec<Option<ElementId>> {
        let mut map = vec![None; self.elements.len()];
        let mut next = 0;
        for (i, &a) in self.alive.iter().enumerate() {
            if a {
                map[i] = Some(next);
                next += 1;
            }
        }
        if next == self.elements.len() {
            return map;
        }
        let old = std::mem::take(&mut self.elements);
        let old_macro = std::mem::take(&mut self.macro_of);
        for (i, mut el) in old.into_iter().enumerate() {
            if map[i].is_none() {
                continue;
            }
            el.parent = el.parent.map(|p| map[p].expect("live parent"));
            el.children = el.children.iter().map(|&c| map[c].expect("live child")).collect();
            self.elements.push(el);
            self.macro_of.push(map[old_macro[i]].expect("live macro"));
        }
        self.alive = vec![true; next];
        map
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> [f64; 2] {
        self.vertices[v]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// All live elements of the refinement forest, active or not.
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, e: ElementId) -> &Element {
        &self.elements[e]
    }

    pub fn is_alive(&self, e: ElementId) -> bool {
        self.alive[e]
    }

    pub fn is_active(&self, e: ElementId) -> bool {
        self.alive[e] && self.elements[e].is_leaf()
    }

    pub fn active_elements(&self) -> Vec<ElementId> {
        (0..self.elements.len()).filter(|&e| self.is_active(e)).collect()
    }

    pub fn macro_elements(&self) -> Vec<ElementId> {
        (0..self.elements.len())
            .filter(|&e| self.alive[e] && self.elements[e].parent.is_none())
            .collect()
    }

    pub fn macro_of(&self) -> &[ElementId] {
        &self.macro_of
    }

    pub fn hanging(&self) -> &BTreeMap<VertexId, [VertexId; 2]> {
        &self.hanging
    }

    pub fn points(&self, e: ElementId) -> Vec<[f64; 2]> {
        self.elements[e].verts.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn area(&self, e: ElementId) -> f64 {
        signed_area(&self.points(e))
    }

    /// `gen(T) = log₂(|K_T| / |T|)`.
    pub fn gen(&self, e: ElementId) -> f64 {
        let r = self.elements[e].area_ratio;
        match ratio_log2(r) {
            Some((m, n)) => crate::weights::generation_value(m, n),
            None => (*r.numer() as f64 / *r.denom() as f64).log2(),
        }
    }

    /// Generation as `m − n·log₂3`, if the area ratio has that form.
    pub fn gen_exact(&self, e: ElementId) -> Option<(i64, i64)> {
        ratio_log2(self.elements[e].area_ratio)
    }

    /// Vertices used by active elements.
    pub fn active_vertices(&self) -> Vec<bool> {
        let mut used = vec![false; self.vertices.len()];
        for e in self.active_elements() {
            for &v in &self.elements[e].verts {
                used[v] = true;
            }
        }
        used
    }

    /// Active elements by undirected edge.
    pub fn edge_map(&self) -> HashMap<(VertexId, VertexId), Vec<ElementId>> {
        let mut map: HashMap<(VertexId, VertexId), Vec<ElementId>> = HashMap::new();
        for e in self.active_elements() {
            let el = &self.elements[e];
            for k in 0..el.n_edges() {
                let (a, b) = el.edge(k);
                map.entry((a.min(b), a.max(b))).or_default().push(e);
            }
        }
        map
    }

    /// Recomputes the hanging-node registry from the active elements.
    pub fn refresh_hanging(&mut self) {
        let used = self.active_vertices();
        let mut hanging = BTreeMap::new();
        for e in self.active_elements() {
            let el = &self.elements[e];
            for k in 0..el.n_edges() {
                let (a, b) = el.edge(k);
                if let Some(m) = self.find_midpoint(a, b) {
                    if used[m] {
                        hanging.insert(m, [a.min(b), a.max(b)]);
                    }
                }
            }
        }
        self.hanging = hanging;
    }

    /// Local edges of `e` that carry a hanging node, with that node.
    pub fn hanging_edges(&self, e: ElementId) -> Vec<(usize, VertexId)> {
        let el = &self.elements[e];
        (0..el.n_edges())
            .filter_map(|k| {
                let (a, b) = el.edge(k);
                self.find_midpoint(a, b)
                    .filter(|m| self.hanging.get(m) == Some(&[a.min(b), a.max(b)]))
                    .map(|m| (k, m))
            })
            .collect()
    }

    /// Active elements with more than one hanging node on some edge.
    pub fn irregular_elements(&self) -> Vec<ElementId> {
        let used = self.active_vertices();
        self.active_elements()
            .into_iter()
            .filter(|&e| {
                let el = &self.elements[e];
                (0..el.n_edges()).any(|k| {
                    let (a, b) = el.edge(k);
                    self.find_midpoint(a, b).is_some_and(|m| {
                        [(a, m), (m, b)]
                            .iter()
                            .any(|&(x, y)| self.find_midpoint(x, y).is_some_and(|q| used[q]))
                    })
                })
            })
            .collect()
    }

    pub fn vertex_graph(&self) -> VertexGraph {
        let mut on_edge: HashMap<(VertexId, VertexId), VertexId> = HashMap::new();
        for (&m, &[a, b]) in &self.hanging {
            on_edge.insert((a, b), m);
        }
        let mut adj = vec![Vec::new(); self.vertices.len()];
        let mut incident = vec![Vec::new(); self.vertices.len()];
        let mut extended = HashMap::new();
        for e in self.active_elements() {
            let el = &self.elements[e];
            let mut ext = el.verts.clone();
            for k in 0..el.n_edges() {
                let (a, b) = el.edge(k);
                if let Some(&m) = on_edge.get(&(a.min(b), a.max(b))) {
                    ext.push(m);
                }
            }
            for &v in &ext {
                incident[v].push(e);
                for &w in &ext {
                    if v != w {
                        adj[v].push(w);
                    }
                }
            }
            extended.insert(e, ext);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        VertexGraph {
            adj,
            incident,
            extended,
        }
    }

    /// Minimal number of closed active elements in a chain from `a` to `b`.
    pub fn dist(&self, a: VertexId, b: VertexId) -> Result<u32, MeshError> {
        for v in [a, b] {
            if v >= self.vertices.len() {
                return Err(MeshError::UnknownVertex(v));
            }
        }
        if a == b {
            return Ok(0);
        }
        let g = self.vertex_graph();
        let d = bfs(&g.adj, a);
        d[b].ok_or(MeshError::Disconnected(a, b))
    }

    /// `e_z = max_T (gen(T) − μ·dist(z, T))` for every vertex (`None` for
    /// vertices outside the active mesh); `h_z = 2^{−e_z/2}`.
    ///
    /// With `g_y` the largest generation at `y`, `e_z = max_y (g_y − μ·d(z, y))`
    /// over graph distances `d`, so one label-setting pass in decreasing `e`
    /// order settles every vertex.
    pub fn weight_exponents(&self, mu: f64) -> Vec<Option<f64>> {
        assert!(mu > 0.0, "mu must be positive");
        let g = self.vertex_graph();
        let mut e: Vec<Option<f64>> = vec![None; self.vertices.len()];
        let mut heap = BinaryHeap::new();
        for (y, inc) in g.incident.iter().enumerate() {
            if let Some(top) = inc.iter().map(|&t| self.gen(t)).reduce(f64::max) {
                e[y] = Some(top);
                heap.push(Label(top, y));
            }
        }
        while let Some(Label(ev, v)) = heap.pop() {
            if e[v] != Some(ev) {
                continue;
            }
            let cand = ev - mu;
            for &w in &g.adj[v] {
                if e[w].is_some_and(|cur| cand > cur) {
                    e[w] = Some(cand);
                    heap.push(Label(cand, w));
                }
            }
        }
        e
    }

    /// `h_z = min_T 2^{(μ·dist(z,T) − gen(T))/2}`.
    pub fn weight_hz(&self, mu: f64, z: VertexId) -> Result<f64, MeshError> {
        let e = self.weight_exponents(mu);
        e.get(z)
            .copied()
            .flatten()
            .map(|e| 2f64.powf(-e / 2.0))
            .ok_or(MeshError::UnknownVertex(z))
    }

    /// Largest vertex valence and vertex count of the macro mesh.
    pub fn macro_stats(&self) -> (usize, usize) {
        let mut valence: HashMap<VertexId, usize> = HashMap::new();
        for e in self.macro_elements() {
            for &v in &self.elements[e].verts {
                *valence.entry(v).or_default() += 1;
            }
        }
        (valence.values().copied().max().unwrap_or(0), valence.len())
    }

    pub fn check_mu_bound(&self, mu: f64) -> MuBoundReport {
        self.check_mu_bound_with(mu, &self.weight_exponents(mu))
    }

    /// [`Mesh::check_mu_bound`] with precomputed [`Mesh::weight_exponents`].
    pub fn check_mu_bound_with(&self, mu: f64, e: &[Option<f64>]) -> MuBoundReport {
        let (alpha0, n_macro_vertices) = self.macro_stats();
        let c_mu = 4.0 + (n_macro_vertices * (alpha0 + 1)) as f64;
        let mut max_excess = f64::NEG_INFINITY;
        let mut worst_element = None;
        let mut max_vertex_jump: f64 = 0.0;
        for t in self.active_elements() {
            let ez: Vec<f64> = self.elements[t]
                .verts
                .iter()
                .map(|&v| e[v].expect("active vertex"))
                .collect();
            let top = ez.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let low = ez.iter().copied().fold(f64::INFINITY, f64::min);
            let excess = top - self.gen(t);
            if excess > max_excess {
                max_excess = excess;
                worst_element = Some(t);
            }
            max_vertex_jump = max_vertex_jump.max(top - low);
        }
        let neighbor_ratio_ok = max_vertex_jump <= mu + 1e-12;
        MuBoundReport {
            mu,
            max_excess,
            worst_element,
            c_mu,
            alpha0,
            n_macro_vertices,
            max_vertex_jump,
            neighbor_ratio_ok,
            passed: max_excess <= c_mu && neighbor_ratio_ok,
        }
    }

    /// Smallest interior angle over the active elements, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = f64::INFINITY;
        for e in self.active_elements() {
            let p = self.points(e);
            let n = p.len();
            for i in 0..n {
                let (a, b, c) = (p[(i + n - 1) % n], p[i], p[(i + 1) % n]);
                let u = [a[0] - b[0], a[1] - b[1]];
                let v = [c[0] - b[0], c[1] - b[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / ((u[0].hypot(u[1])) * (v[0].hypot(v[1])));
                best = best.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        best
    }

    fn check_geometry(&self) -> Result<(), MeshError> {
        for e in 0..self.elements.len() {
            if !self.alive[e] {
                continue;
            }
            let a = self.area(e);
            if a <= 0.0 {
                return Err(MeshError::Invalid(format!("element {e} is not counter-clockwise")));
            }
            let r = self.elements[e].area_ratio;
            let want = self.area(self.macro_of[e]) * *r.denom() as f64 / *r.numer() as f64;
            if (a - want).abs() > 1e-10 * want.max(1.0) {
                return Err(MeshError::Invalid(format!(
                    "element {e} area {a} differs from ratio {r}"
                )));
            }
        }
        let total: f64 = self.active_elements().iter().map(|&e| self.area(e)).sum();
        let macro_total: f64 = self.macro_elements().iter().map(|&e| self.area(e)).sum();
        if (total - macro_total).abs() > 1e-10 * macro_total.max(1.0) {
            return Err(MeshError::Invalid(format!(
                "active area {total} differs from {macro_total}"
            )));
        }
        Ok(())
    }

    /// Checks orientation, area bookkeeping, hanging-node placement,
    /// 1-irregularity and, given a strategy, generation membership and
    /// conformity (Q-RG and Q-RB meshes have no hanging nodes).
    pub fn validate(&self, strategy: Option<Strategy>) -> Result<(), MeshError> {
        self.check_geometry()?;
        for (&m, &[a, b]) in &self.hanging {
            let mid = self.midpoint_coords(a, b);
            let p = self.vertices[m];
            if (p[0] - mid[0]).abs() > 1e-12 || (p[1] - mid[1]).abs() > 1e-12 {
                return Err(MeshError::Invalid(format!(
                    "hanging vertex {m} off the midpoint of ({a}, {b})"
                )));
            }
        }
        if let Some(&e) = self.irregular_elements().first() {
            return Err(MeshError::Invalid(format!(
                "element {e} has two hanging nodes on one edge"
            )));
        }
        if let Some(s) = strategy {
            let set = GenerationSet::for_strategy(s);
            for e in self.active_elements() {
                let ok = self.gen_exact(e).is_some_and(|(m, n)| set.contains_exact(m, n));
                if !ok {
                    return Err(MeshError::Invalid(format!(
                        "element {e} has generation {} outside the {s:?} set",
                        self.gen(e)
                    )));
                }
            }
            if matches!(s, Strategy::Qrg | Strategy::Qrb) && !self.hanging.is_empty() {
                return Err(MeshError::Invalid(format!(
                    "{} hanging nodes in a {s:?} mesh",
                    self.hanging.len()
                )));
            }
        }
        Ok(())
    }
}

// Max-heap entry ordered by the exponent.
struct Label(f64, VertexId);

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Label {}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

fn bfs(adj: &[Vec<VertexId>], src: VertexId) -> Vec<Option<u32>> {
    let mut d = vec![None; adj.len()];
    d[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(v) = q.pop_front() {
        let dv = d[v].expect("visited");
        for &w in &adj[v] {
            if d[w].is_none() {
                d[w] = Some(dv + 1);
                q.push_back(w);
            }
        }
    }
    d
}
