//! Simulation and capacity analysis of simultaneous secure direct
//! communication between a central party and `M` senders over shared
//! `(M+1)`-qubit GHZ states and entanglement swapping.
//!
//! The crate is organised bottom-up:
//!
//! * [`qsim`]: dense statevector simulation, Pauli encoding operators and
//!   Bell-basis projective measurement.
//! * [`protocol`]: encoding schemes, session execution and the exact
//!   decoder table used by the central party.
//! * [`scheme_file`]: the textual scheme-file format.
//! * [`capacity`]: exhaustive outcome enumeration, consistency classes,
//!   entropies and the eavesdropper models.
//! * [`swap`]: Bell-product expansion of encoded GHZ pairs and the
//!   term-by-term verification of the swapping identity.
//!
//! All numerical code is generic over [`Real`] (implemented for `f32` and
//! `f64`). The `*64` aliases below fix the scalar to `f64`, which is what the
//! CLI and the acceptance suite use.

pub mod capacity;
pub mod error;
pub mod protocol;
pub mod qsim;
pub mod scalar;
pub mod scheme_file;
pub mod swap;

pub use capacity::{
    analyze, consistency_classes, enumerate_distributions, eve_secret_scheme_guess,
    shannon_entropy, ConsistencyTable, EveModel, GuessMethod, SchemeFamily,
};
pub use error::{Error, Result};
pub use protocol::{
    build_decoder, decode, run_session, standard_scheme, DecoderTable, EncodingScheme, Message,
    OperatorTuple, OutcomeRecord, Protocol, TrialSeed,
};
pub use qsim::{BellOutcome, PauliOp};
pub use scalar::Real;

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 14;

/// Largest party count for exhaustive enumeration (`2(M+1) <= MAX_QUBITS`).
pub const MAX_PARTIES: usize = 6;

pub type StateVector64 = qsim::StateVector<f64>;
pub type StateVector32 = qsim::StateVector<f32>;
pub type Amplitude64 = qsim::Amplitude<f64>;
pub type Projection64 = qsim::Projection<f64>;
pub type Measurement64 = qsim::Measurement<f64>;
pub type SessionTranscript64 = protocol::SessionTranscript<f64>;
pub type JointDistribution64 = capacity::JointDistribution<f64>;
pub type CapacityReport64 = capacity::CapacityReport<f64>;
pub type GuessEstimate64 = capacity::GuessEstimate<f64>;
pub type BellProductTerm64 = swap::BellProductTerm<f64>;
pub type VerificationReport64 = swap::VerificationReport<f64>;
