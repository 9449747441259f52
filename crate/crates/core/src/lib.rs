//! One-type and two-type annihilating random walks on the complete graph
//! `K_2n` and the star graph `S_2n`.
//!
//! The crate is split along the lines of the experiment pipeline:
//!
//! * [`state`]: topologies, particle configurations and the single-step
//!   sampling/annihilation mechanics.
//! * [`dynamics`]: full trajectories with the instrumented series `A_t`,
//!   `C_t`, `M_t` and the colour-sampling signs `Z_t`.
//! * [`laws`]: closed-form geometric-sum laws used as oracles.
//! * [`comparison`]: auxiliary processes (biased-walk displacement, the
//!   core-count coupling, lazy coupon collectors).
//! * [`stats`]: summaries, DKW equality/dominance tests, bound checks and
//!   second-order fits.
//! * [`experiment`], [`verify`] and [`cli`]: seeded sweeps, CSV output and
//!   the command-line front end.

pub mod cli;
pub mod comparison;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod laws;
pub mod state;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
