//! Unified task and motion planning for tabletop manipulation.
//!
//! The crate couples a symbolic task planner to a kinematic scene model
//! through an object-centric state abstraction: every rigid body is
//! described by the occupancy of the six box sides plus its interior, and
//! every manipulation schema is stated over those side parts. The same
//! abstraction drives grasp synthesis, placement synthesis, scene
//! perception, and plan decomposition into collision-checked trajectories,
//! so a plan that validates symbolically can be executed directly in the
//! simulator.
//!
//! Module map:
//! - [`geom`]: poses, rotation matrices, roll-pitch-yaw conversions, boxes.
//! - [`abstraction`]: side parts, associated spaces, grasp and placement
//!   tables, kinematic chains between hand and object.
//! - [`symbolic`]: ground states, action schemas, grounding, plan
//!   validation, PDDL import and export.
//! - [`planner`]: greedy best-first search with delete-relaxation
//!   heuristics and preferred operators.
//! - [`perception`]: scenes of kinematic bodies and extraction of the
//!   symbolic state they induce.
//! - [`executor`]: decomposition of symbolic plans into smooth joint-space
//!   trajectories plus the kinematic simulator that replays them.
//! - [`bench`]: the two built-in rearrangement benchmarks.

pub mod abstraction;
pub mod bench;
pub mod executor;
pub mod geom;
pub mod perception;
pub mod planner;
pub mod symbolic;
