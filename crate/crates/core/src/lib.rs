//! POVM-based coherence.
//!
//! Naimark extensions of POVMs, the relative entropy of POVM-based coherence,
//! superoperator calculus, a small dense SDP solver, the POVM-incoherent
//! channel test and maximal conversion fidelities, plus the qubit trine
//! example end to end.

pub mod coherence;
pub mod error;
pub mod linalg;
pub mod naimark;
pub mod io;
pub mod povm;
pub mod random;
pub mod sdp;
pub mod search;
pub mod superop;
pub mod trine;

pub use error::{Error, Result};
pub use linalg::{BlochVector, CMatrix, CVector, DensityMatrix, PureState};
pub use povm::{canonical_kraus, trine_povm, MeasurementOperators, Povm};
pub use coherence::{c_rel_povm, CoherenceReport};
pub use superop::{Channel, ChoiMatrix, ProcessMatrix};
pub use naimark::{canonical_extension, minimal_extension, ExtensionKind, NaimarkExtension};
