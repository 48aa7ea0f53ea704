//! Convex hulls, α-shapes and volume metrics for point clouds.

pub mod alpha;
pub mod convex;
pub mod delaunay;
pub mod error;
pub mod mesh;
pub mod metrics;
pub mod predicates;
pub mod voxel;

pub use alpha::{alpha_shape, auto_alpha, AlphaComplex, AlphaSelection, AlphaShape};
pub use convex::{affine_dimension, convex_hull};
pub use delaunay::Delaunay;
pub use error::{HullError, Result};
pub use mesh::{mesh_volume, TriangleMesh};
pub use metrics::{analyze_points, unreachability, AlphaChoice, HullMetrics, HullResult};
pub use voxel::{default_voxel_resolution, voxel_volume, VoxelVolume};
