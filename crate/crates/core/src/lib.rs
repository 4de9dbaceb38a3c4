//! Exact and numeric verification of operator identities for the
//! Kak–Hilbert transform family on sequence spaces, with sharp-constant
//! bound chains and numerical norm probes.

pub mod error;
pub mod estimate;
pub mod exact;
pub mod hp;
pub mod norms;
pub mod operators;
pub mod seq;
pub mod skeletal;

pub use error::{Error, Result};
pub use exact::{Monomial, PiGraded};
pub use seq::{FiniteSeq, FloatWindow};
