//! Measurement-driven preparation of Fock states, Fock superpositions and
//! two-mode Bell states from coherent light.
//!
//! A resonator interacts with an ancilla (a qubit, or a V-type qutrit for two
//! modes) through a Jaynes-Cummings exchange. After each period of free
//! evolution the ancilla is measured; keeping only the runs where it is found
//! in its initial level applies a diagonal filter to the resonator's Fock
//! populations. Choosing the periods well leaves the target state.
//!
//! Units: ħ = 1, frequencies in units of the ancilla splitting (or of `ω_b`
//! for two modes), times in inverse units.

pub mod error;
pub mod hilbert;
pub mod kernel;
pub mod metrics;
pub mod oracle;
pub mod protocol;
pub mod schedule;

pub use error::{Error, Result};
pub use hilbert::{coherent_state, density_view, fidelity, product_state, DensityMatrixView, FockVector, PureState, TwoModeState};
pub use kernel::{Label, SystemParams, TwoModeParams};
pub use metrics::{CurvePoint, FidelityCurve};
pub use protocol::{CycleSpec, EvolutionRecord, TrajectoryStats};
pub use schedule::{Couplings, Sign, StrategyKind, StrategySpec, TargetSpec};
