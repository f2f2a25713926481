//! End-to-end recovery algorithms and the experiment harness.

use std::sync::atomic::{AtomicUsize, Ordering};

mod experiment;
mod mixed;
mod two;
mod wigner;

pub use experiment::{
    best_community_overlap, matrix_knobs, mean_by_point, mixed_knobs, run_experiment, sign_overlap,
    two_knobs, wigner_knobs, write_rows, Algorithm, Row, COLUMNS,
};
pub use mixed::{
    estimate_second_moment, recover_matrix_mm, recover_mixed_membership, reference_s4, Branch,
    MatrixKnobs, MatrixResult, MixedKnobs, MixedResult,
};
pub use two::{recover_two_communities, TwoKnobs, TwoResult};
pub use wigner::{wigner_demo, WignerKnobs, WignerReport};

static THREADS: AtomicUsize = AtomicUsize::new(1);

/// Sets the worker count used for independent colorings and trials.
pub fn set_threads(t: usize) {
    let t = t.max(1);
    THREADS.store(t, Ordering::Relaxed);
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
}

pub fn threads() -> usize {
    THREADS.load(Ordering::Relaxed)
}

/// Maps `f` over `range`, in parallel when enabled; output order follows the range.
pub(crate) fn par_map_range<T: Send>(
    range: std::ops::Range<usize>,
    f: impl Fn(usize) -> T + Sync,
) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        if threads() > 1 {
            use rayon::prelude::*;
            return range.into_par_iter().map(&f).collect();
        }
    }
    range.map(f).collect()
}
