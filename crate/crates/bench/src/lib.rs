//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use pmseq_core::analysis::{IndexedSequence, Pattern};
use pmseq_core::density::SetDescription;
use pmseq_core::num::rat;
use pmseq_core::{PMSpace, StepDistFn, SymbolicSequence, TNorm, TriangleFn};

/// Step function with `k` jumps spread over `[0, 3]`.
pub fn staircase(k: usize, offset: i128) -> StepDistFn {
    let jumps: Vec<_> =
        (1..=k as i128).map(|i| (rat(3 * i + offset, k as i128 + 1), rat(i, k as i128))).collect();
    StepDistFn::from_finite(&jumps, true).expect("increasing jumps")
}

pub fn equilateral(n: usize) -> PMSpace {
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    PMSpace::build_equilateral(&refs, &staircase(3, 0), TriangleFn::new(TNorm::Product)).expect("valid space")
}

/// Constant `p0` except on `exceptions`, where it cycles through the other
/// points.
pub fn planted(n: usize, exceptions: SetDescription) -> SymbolicSequence {
    let others: Vec<usize> = (1..n).collect();
    let idx = IndexedSequence::new(Pattern::constant(0), exceptions, Pattern::periodic(others));
    SymbolicSequence::new(Arc::new(equilateral(n)), idx).expect("labels in range")
}
