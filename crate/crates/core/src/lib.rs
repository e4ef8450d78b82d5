//! Rhombic dodecahedral modular robot cells on the face-centred cubic
//! lattice: exact cell geometry, genderless magnetic docking, 120° edge
//! pivots, reconfiguration planning and locomotion analytics.

pub mod analytics;
pub mod docking;
pub mod geometry;
pub mod io;
pub mod kinematics;
pub mod lattice;
pub mod planner;

pub use analytics::{DesignMeta, DesignSummary, Rotation, Trajectory, TrialStats};
pub use docking::{CellLayout, ContactAlignment, FaceLayout, MagnetSpec, Polarity};
pub use geometry::{ContactReport, ContactType, Mesh, Rotation3};
pub use kinematics::{MoveLegality, MoveRules, PivotMove};
pub use lattice::{lattice_distance, neighbors, Cell, CellKind, Configuration, FaceDir, LatticePos, Rotation24};
pub use planner::{Algorithm, GoalCriterion, Plan, PlanError, PlannerOptions};
