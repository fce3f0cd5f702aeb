//! Closed-loop simulation and analysis of sliding-mode lockdown control
//! for compartmental epidemic models (SEIR, SAIR, SEAIR).
//!
//! The contact rate is a two-level actuator (freedom vs lockdown) driven
//! by a hysteresis law on the sliding residual
//! `lambda (I - I0) + I' (+ mu I'')`: cross the dead-band upward under
//! freedom and a lockdown starts; cross it downward under lockdown and
//! restrictions lift. The crate provides
//!
//! * the model right-hand sides, thresholds, and equilibria ([`model`]),
//! * surface gains, residual forms, and the switching law ([`controller`]),
//! * a fixed-step RK4 closed-loop integrator ([`integrator`]),
//! * trajectory measurements and scenario sweeps ([`metrics`], [`sweep`]),
//! * ingestion/smoothing of daily counts and control replay ([`signal`]),
//! * the TOML scenario format and CSV exports ([`config`], [`export`]).
//!
//! Numeric kernels are generic over [`Scalar`] (`f32` or `f64`); all
//! shipped tooling and the aliases below work at `f64`.

pub mod config;
pub mod controller;
pub mod error;
pub mod export;
pub mod integrator;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod signal;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// f64 aliases used by the CLI and scenario tooling.
pub type ModelParams64 = model::ModelParams<f64>;
pub type State64 = model::State<f64>;
pub type ControllerConfig64 = controller::ControllerConfig<f64>;
pub type ControllerState64 = controller::ControllerState<f64>;
pub type IntegratorConfig64 = integrator::IntegratorConfig<f64>;
pub type Trajectory64 = integrator::Trajectory<f64>;
pub type MetricsReport64 = metrics::MetricsReport<f64>;
pub type Scenario64 = sweep::Scenario<f64>;
pub type VaccinationSchedule64 = model::VaccinationSchedule<f64>;
