//! Classical and quantum memory of continuous-time renewal processes.
//!
//! The crate discretizes a renewal process onto a uniform time grid, builds
//! the classical predictive machine (transition matrix and steady state) and
//! the quantum one (pure-state encoding of every causal state), and compares
//! the two memories: the Shannon entropy `C_μ` of the classical steady state
//! and the von Neumann entropy `C_q` of the quantum steady state, together
//! with the excess entropy `E` that lower-bounds both.
//!
//! All entropies are in bits.

pub mod analytic;
pub mod classical;
pub mod config;
pub mod entropy;
pub mod error;
pub mod grid;
pub mod precise;
pub mod process;
pub mod quadrature;
pub mod quantum;
pub mod report;
pub mod roots;
pub mod sim;

pub use classical::ClassicalMachine;
pub use config::{ClassDeclaration, ProcessConfig};
pub use error::{Error, Result};
pub use grid::{Grid, GridOptions, Layout, Sampling, Tail};
pub use process::{CausalClass, DensityModel, RenewalProcess, Support};
pub use quantum::{QuantumEnsemble, Spectrum, StateVector};
pub use report::{analyze, ComplexityReport};

/// Version tag embedded in every machine-readable output.
pub const SCHEMA_VERSION: u32 = 1;
