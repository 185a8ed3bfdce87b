//! Cavity QED of rare-earth ions in whispering-gallery-mode microcavities.
//!
//! The crate models a coupled ion-cavity system end to end:
//!
//! - [`hilbert`]: composite Hilbert spaces and dense operator algebra;
//! - [`lindblad`]: Liouvillian construction, time evolution, steady states;
//! - [`params`]: closed-form rate derivations (Q ↔ κ, dipole ↔ lifetime,
//!   coupling, cooperativity, strong-coupling feasibility);
//! - [`jc`]: Jaynes–Cummings spectroscopy with eigen and steady-state
//!   backends;
//! - [`squeeze`]: parametric-drive coupling enhancement via the Bogoliubov
//!   transformation;
//! - [`wgm`]: traveling-wave mode pairs with backscattering, analytic and
//!   numeric spin-conditional transmission, critical-coupling search;
//! - [`gate`]: spin-photon gate fidelity versus gate time;
//! - [`scenario`] / [`run`]: TOML scenario files, task dispatch, CSV and
//!   SVG artifacts.
//!
//! Unit convention: every public rate and detuning is an ordinary
//! frequency in Hz (the "value/2π" style of the parameter tables);
//! conversion to angular units happens once, inside the builders.
//!
//! See the `examples/` directory for one runnable program per capability,
//! and the `reicav` binary for the scenario-driven command line.

pub mod constants;
pub mod error;
pub mod hilbert;
pub mod jc;
pub mod lindblad;
pub mod params;
pub mod squeeze;

pub use error::{Error, ErrorClass, Result};
