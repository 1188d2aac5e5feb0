//! Numerical lab for mean curvature flow of submanifolds in Euclidean space and round spheres.

pub mod config;
pub mod domain;
pub mod error;
pub mod flow;
pub mod identity;
pub mod immersion;
pub mod io;
pub mod jet;
pub mod mesh;
pub mod pinch;
pub mod reaction;
pub mod run;
pub mod scalar;
pub mod singularity;
pub mod zoo;

pub use error::{Error, Result};

pub type PointGeometryF64 = immersion::PointGeometry<f64>;
pub type ChartPointF64 = domain::ChartPoint<f64>;
pub type TriMeshF64 = mesh::TriMesh<f64>;
pub type JetF64 = jet::Jet<f64>;
