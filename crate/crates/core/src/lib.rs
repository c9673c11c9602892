//! Fractional-order (Caputo) integration with the Adams-Bashforth-Moulton
//! predictor-corrector, and the analysis toolkit for a 3-neuron fractional
//! Hopfield network.

pub mod abm;
pub mod convergence;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod gamma;
pub mod hnn;
pub mod ivp;
pub mod stability;
pub mod weights;

pub use abm::abm_integrate;
pub use error::{Error, Result};
pub use gamma::gamma_real;
pub use ivp::{FractionalIvp, SolverConfig, Trajectory, TrajectoryStatus, VectorField};
