//! Coupled thermoelastic finite elements for longitudinally vibrating bars.
//!
//! The crate builds nonlinear static base configurations (pre-strain, end
//! loads, internal heating) of a 1-D bar with temperature- and
//! strain-dependent material properties, linearizes the coupled
//! momentum/energy system about them, and extracts thermoelastic-damping
//! quality factors from the complex spectrum of the resulting state-space
//! operator.

pub mod analytic;
pub mod assembly;
pub mod config;
pub mod eigen;
pub mod element;
pub mod material;
pub mod mesh;
pub mod runner;
pub mod static_solver;
