//! Entanglement tangles of few-qubit states and numerical verification of
//! the four-qubit strong-monogamy inequality.
//!
//! * [`qstate`]: state vectors, density matrices, partial traces.
//! * [`tangles`]: one-, two- and three-tangles and the RDL upper bound on
//!   mixed three-qubit three-tangles.
//! * [`monogamy`]: CKW and strong-monogamy residuals.
//! * [`states`]: named states, SLOCC normal forms and a seeded sampler.
//! * [`harness`]: campaigns, parameter sweeps and normal-form checks behind
//!   the `smono` CLI.

pub mod error;
pub mod harness;
pub mod monogamy;
pub mod qstate;
pub mod states;
pub mod tangles;

pub use error::{Error, Result};
pub use monogamy::{ExponentSchedule, GhzwParams, SmReport};
pub use qstate::{DensityMatrix, PureState, Rank2Decomposition, C64};
pub use states::{NormalFormParams, SloccClass};
pub use tangles::{BoundMethod, TangleBoundResult, WSimplex};
