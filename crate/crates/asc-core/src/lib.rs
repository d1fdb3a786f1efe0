//! Toolkit for ambiguous stabilizer codes: exact Pauli algebra, syndrome
//! partitions of error sets, noisy-channel simulation, and reconstruction of
//! few-qubit process matrices from syndrome statistics.

pub mod error;
pub mod pauli;
pub mod ambiguity;
pub mod channel;
pub mod codes;
pub mod reconstruct;
pub mod simulate;
pub mod stabilizer;

pub use error::{Error, Result};
pub use ambiguity::{AmbiguousClass, ErrorSet};
pub use channel::{DensityMatrix, ProcessMatrix};
pub use codes::CatalogEntry;
pub use reconstruct::{LinearSystem, MeasurementPlan, ReconstructionReport, ResourceEstimate};
pub use simulate::{ChiParam, Configuration, LogicalAxis, ProbabilityFunctional};
pub use pauli::PauliOperator;
pub use stabilizer::{StabilizerCode, Syndrome};
