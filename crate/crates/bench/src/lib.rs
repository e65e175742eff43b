//! Fixed inputs shared by the benchmarks.

use gauss_petz::{sample_instance, Instance};

/// A reproducible instance with `modes` modes drawn from the search distribution.
pub fn instance(modes: usize) -> Instance {
    sample_instance(2024, 0, modes).expect("one or two modes")
}
