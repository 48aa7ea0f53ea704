//! Kinematics of fiber-actuated tapered soft manipulators and sampling of
//! their reachability clouds.

pub mod activation;
pub mod cloud;
pub mod delta;
pub mod design;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod kinematics;
pub mod ply;
pub mod redundancy;
pub mod rotation;
pub mod sampling;
pub mod stats;

pub use activation::{activation_coefficients, ActivationCoefficients, ActivationState, FiberArchitecture};
pub use cloud::{color_map, generate_cloud, Aabb, CloudPoint, ReachCloud};
pub use delta::{delta_coefficients, DeltaSet};
pub use design::{minimal_design, redundant_design, validate_design, ManipulatorDesign, Violation};
pub use error::{ModelError, Result};
pub use fields::{bending_curvature, local_fields, FieldTable, LocalFields};
pub use geometry::{Taper, TaperedGeometry};
pub use kinematics::{convergence_report, end_effector, integrate, RodConfiguration, DEFAULT_STEPS};
pub use ply::{read_cloud, write_cloud, write_cloud_csv};
pub use redundancy::{distance_field, mean_activation_distance, ActivationDistanceField, SpatialIndex};
pub use rotation::{fiber_rotation, helical_angle_from_revolution};
pub use sampling::SamplerConfig;
pub use stats::{
    curvature_statistics, distal_stations, energy_test, reflection_test, StationStatistics, TwoSampleTest,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
