//! Goal-oriented adaptive time integration of linear index-1 port-Hamiltonian DAEs.
//!
//! The pipeline reduces the DAE to its differential part, integrates with dG(0),
//! solves the discrete adjoint of an energy-balance goal and refines the time grid
//! by dual-weighted residual indicators.

pub mod adjoint;
pub mod bench;
pub mod discretization;
pub mod error;
pub mod estimator;
pub mod export;
pub mod model;
pub mod numerics;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DenseMatrix64 = numerics::DenseMatrix<f64>;
pub type DenseMatrix32 = numerics::DenseMatrix<f32>;
pub type PhDaeSystem64 = model::PhDaeSystem<f64>;
pub type PhDaeSystem32 = model::PhDaeSystem<f32>;
pub type ReducedSystem64 = model::ReducedSystem<f64>;
pub type ReducedSystem32 = model::ReducedSystem<f32>;
pub type TimeGrid64 = discretization::TimeGrid<f64>;
pub type TimeGrid32 = discretization::TimeGrid<f32>;
pub type PiecewiseConstant64 = discretization::PiecewiseConstant<f64>;
pub type PiecewiseConstant32 = discretization::PiecewiseConstant<f32>;
pub type Problem64 = estimator::Problem<f64>;
pub type Problem32 = estimator::Problem<f32>;
pub type AdaptiveRun64 = estimator::AdaptiveRun<f64>;
pub type AdaptiveRun32 = estimator::AdaptiveRun<f32>;
