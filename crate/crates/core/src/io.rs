//! Mesh files (JSON), legacy VTK export and table CSV.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{AreaRatio, ElementId, ElementKind, Mesh, MeshError, VertexId};
use crate::polybasis::Shape;

pub const MESH_FILE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("malformed mesh file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported mesh file version {0}")]
    Version(u32),
    #[error("invalid mesh file: {0}")]
    Schema(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRecord {
    pub shape: Shape,
    pub verts: Vec<VertexId>,
    pub kind: ElementKind,
    pub parent: Option<ElementId>,
    /// `[numerator, denominator]` of `|K_T| / |T|`
    pub area_ratio: [i64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HangingRecord {
    pub vertex: VertexId,
    pub edge: [VertexId; 2],
}

/// On-disk form of a [`Mesh`]: every element of the refinement forest with
/// its parent link, plus the hanging-node registry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFile {
    pub version: u32,
    pub vertices: Vec<[f64; 2]>,
    pub elements: Vec<ElementRecord>,
    pub macro_of: Vec<ElementId>,
    pub hanging: Vec<HangingRecord>,
}

impl MeshFile {
    pub fn from_mesh(mesh: &Mesh) -> Self {
        let mut mesh = mesh.clone();
        mesh.compact();
        Self {
            version: MESH_FILE_VERSION,
            vertices: mesh.vertices().to_vec(),
            elements: mesh
                .elements()
                .iter()
                .map(|el| ElementRecord {
                    shape: el.shape,
                    verts: el.verts.clone(),
                    kind: el.kind,
                    parent: el.parent,
                    area_ratio: [*el.area_ratio.numer(), *el.area_ratio.denom()],
                })
                .collect(),
            macro_of: mesh.macro_of().to_vec(),
            hanging: mesh
                .hanging()
                .iter()
                .map(|(&vertex, &edge)| HangingRecord { vertex, edge })
                .collect(),
        }
    }

    pub fn to_mesh(&self) -> Result<Mesh, IoError> {
        if self.version != MESH_FILE_VERSION {
            return Err(IoError::Version(self.version));
        }
        let mut parts = Vec::with_capacity(self.elements.len());
        for (i, r) in self.elements.iter().enumerate() {
            let [n, d] = r.area_ratio;
            if n <= 0 || d <= 0 {
                return Err(IoError::Schema(format!("element {i}: area ratio must be positive")));
            }
            let ratio = AreaRatio::new(n, d);
            if *ratio.numer() != n {
                return Err(IoError::Schema(format!(
                    "element {i}: area ratio {n}/{d} is not reduced"
                )));
            }
            parts.push((r.shape, r.verts.clone(), r.kind, r.parent, ratio));
        }
        let mesh = Mesh::from_parts(self.vertices.clone(), parts, self.macro_of.clone())?;
        let stored: Vec<(VertexId, [VertexId; 2])> = self.hanging.iter().map(|h| (h.vertex, h.edge)).collect();
        let derived: Vec<(VertexId, [VertexId; 2])> = mesh.hanging().iter().map(|(&v, &e)| (v, e)).collect();
        if stored != derived {
            return Err(IoError::Schema(
                "hanging-node registry does not match the elements".into(),
            ));
        }
        Ok(mesh)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mesh file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<(), IoError> {
    fs::write(path, MeshFile::from_mesh(mesh).to_json())?;
    Ok(())
}

pub fn load_mesh(path: &Path) -> Result<Mesh, IoError> {
    MeshFile::from_json(&fs::read_to_string(path)?)?.to_mesh()
}

/// Active elements as legacy VTK 3.0 ASCII polygons with generation and kind
/// as cell data.
pub fn write_vtk<W: Write>(mesh: &Mesh, mut w: W) -> io::Result<()> {
    let active = mesh.active_elements();
    let size: usize = active.iter().map(|&e| mesh.element(e).verts.len() + 1).sum();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "h1stab mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET POLYDATA")?;
    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    writeln!(w, "POLYGONS {} {}", active.len(), size)?;
    for &e in &active {
        let verts = &mesh.element(e).verts;
        write!(w, "{}", verts.len())?;
        for v in verts {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_DATA {}", active.len())?;
    writeln!(w, "SCALARS generation double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for &e in &active {
        writeln!(w, "{}", mesh.gen(e))?;
    }
    writeln!(w, "SCALARS kind int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for &e in &active {
        writeln!(w, "{}", mesh.element(e).kind as i32)?;
    }
    Ok(())
}

/// One table cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub mu: f64,
    pub p: usize,
    pub lambda_min: f64,
}

/// Fixed 15-digit rendering shared by stdout and CSV.
pub fn format_lambda(x: f64) -> String {
    format!("{x:.15}")
}

pub fn write_table_csv<W: Write>(rows: &[TableRow], w: W) -> Result<(), IoError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["mu", "p", "lambda_min"])?;
    for r in rows {
        out.write_record([r.mu.to_string(), r.p.to_string(), format_lambda(r.lambda_min)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_table_csv<R: io::Read>(r: R) -> Result<Vec<TableRow>, IoError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["mu", "p", "lambda_min"] {
        return Err(IoError::Schema(format!("unexpected CSV header {header:?}")));
    }
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}
