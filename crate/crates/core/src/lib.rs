//! Ginzburg–Landau vortices on a flat cone, studied numerically on the
//! unrolled sector.

pub mod balls;
pub mod core_energy;
pub mod degree_cost;
pub mod descent;
pub mod experiment;
pub mod field;
pub mod geometry;
pub mod minimizer;
pub mod plot;
pub mod renorm;
pub mod vortex;

pub use degree_cost::{m_bruteforce, m_closed, DegreeSplit};
pub use field::{EnergyBreakdown, RadialSpacing, SectorGrid, TangentField};
pub use geometry::{ConeParams, ConePoint};
