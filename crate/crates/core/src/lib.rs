//! Spectral-Lagrangian solver for the space-homogeneous Boltzmann equation
//! with Maxwell-molecule collisions, and an advisor for the truncation speed.

pub mod advisor;
pub mod collide;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod moments;
pub mod oracle;
pub mod quadrature;
pub mod scenarios;
pub mod validate;

pub use advisor::MaxwellBound;
pub use collide::{collision_operator, conserve_project, Collision, ConservationBasis};
pub use error::{Error, Result};
pub use evolve::{run_evolution, CollisionRhs, Integrator, RunOptions, RunResult};
pub use grid::{RealField, SpectralField, VelocityGrid};
pub use kernel::CollisionParams;
pub use moments::{moments, HigherMoments, Moments};
pub use scenarios::Scenario;
