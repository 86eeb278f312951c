//! Simulation and analysis of quantum error-correcting codes whose ancilla
//! qubits are imperfectly initialized.
//!
//! The crate constructs repetition codes, the 5-qubit perfect code, and a
//! two-level concatenated repetition code; augments their encoders with the
//! inverse recovery operation; computes the channel fidelity of the full
//! encode → error → decode → recover pipeline as an exact bivariate
//! polynomial in the main-error parameter `p` and the initialization
//! parameter `q`; and derives tolerable-initialization-noise curves plus an
//! optimizer-based check that the inverse recovery is the best controlled
//! encoder extension.

pub mod analysis;
pub mod bipoly;
pub mod channel;
pub mod circuit;
pub mod codes;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod verify;

pub use bipoly::BiPoly;
pub use channel::{
    bitflip_init_channel, channel_fidelity, depolarizing_channel, main_bitflip_channel,
    partial_trace, rho_q, DensityMatrix, KrausChannel,
};
pub use circuit::{Circuit, Gate};
pub use codes::{
    augment, concatenated3, perfect5_code, repetition_code, ChannelFamily, CodeSpec,
    ConcatVariant, RecoveryTable,
};
pub use engine::{fidelity_polynomial, oracle_fidelity, unencoded_baseline};
pub use error::{QecError, Result};
pub use linalg::{tensor, ComplexMatrix, StateVector};
