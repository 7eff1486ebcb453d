//! Local eigenvalue certificates for H¹-stability of the L²-projection on
//! adaptively refined quadrilateral and triangular meshes.

pub mod checker;
pub mod cli;
pub mod eig;
pub mod hanging;
pub mod integrate;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod polybasis;
pub mod refine;
pub mod scalar;
pub mod weights;

pub use eig::{EigError, SymPair};
pub use integrate::MassMatrices;
pub use linalg::Matrix;
pub use mesh::{Mesh, MeshError};
pub use polybasis::{NodeKind, RefElement, Shape};
pub use scalar::Scalar;
pub use weights::{GenerationSet, GeometryCase, NodeWeights, Strategy, WeightConfig};

pub type MatrixF64 = Matrix<f64>;
pub type RefElementF64 = RefElement<f64>;
pub type MassMatricesF64 = MassMatrices<f64>;
pub type SymPairF64 = SymPair<f64>;
pub type NodeWeightsF64 = NodeWeights<f64>;
