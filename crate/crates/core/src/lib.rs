//! Strong λ-statistical convergence in finite probabilistic metric spaces.

pub mod analysis;
pub mod density;
pub mod distfn;
pub mod error;
pub mod harness;
pub mod num;
pub mod pmspace;
pub mod triangle;

pub use analysis::{
    Analyzer, ConvergenceReport, IndexedSequence, MetricSequence, Pattern, RawPattern, SymbolicSequence, Verdict,
};
pub use density::{LambdaSeq, NullClass, NullVerdict, SetDescription};
pub use distfn::{eps0, levy_distance, unit_step, LevyDistance, StepDistFn};
pub use error::{Error, Result};
pub use harness::{generate, run_suite, PlantSpec, SuiteConfig, SuiteReport};
pub use num::{ExtReal, Rational};
pub use pmspace::{PMSpace, PointSet};
pub use triangle::{TNorm, TriangleFn};
