//! Exact simulation and analysis of a two-way deterministic d-ary quantum key
//! distribution protocol.
//!
//! Bob sends Alice a qudit prepared in one of the `d` non-computational
//! mutually unbiased bases of an odd prime power dimension `d = p^m`. Alice
//! either encodes a symbol with a generalized Pauli `Z` shift (message mode) or
//! applies the Galois-field negation permutation `W` (control mode), and sends
//! the qudit back for Bob to measure in the basis he prepared it in.
//!
//! The crate is organized bottom-up:
//!
//! * [`field`]: arithmetic in `GF(p^m)` with the integer/digit element codec.
//! * [`mub`]: the `d + 1` mutually unbiased bases and their certification.
//! * [`qudit`]: dense state vectors, the protocol unitaries, the attack gates
//!   and Born-rule measurement.
//! * [`protocol`]: the round state machine with pluggable eavesdroppers.
//! * [`analysis`]: closed-form security quantities, figure tables and the
//!   theory-versus-simulation comparison.

pub mod analysis;
pub mod error;
pub mod field;
pub mod mub;
pub mod protocol;
pub mod qudit;

pub use analysis::{QdcCurvePoint, SecurityReport};
pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec};
pub use mub::MubTable;
pub use protocol::{EveStrategy, Mode, ProtocolConfig, RoundRecord, SessionStats};
pub use qudit::{Direction, PureState, Subsystem, UnitaryOp};
pub use num_complex::Complex64;
