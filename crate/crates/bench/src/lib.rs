//! Shared setup for the pipeline benches.

use e8ks::raygen::DEFAULT_THRESHOLD;
use e8ks::E8;

/// The full system at the default threshold.
pub fn system() -> E8 {
    E8::build(DEFAULT_THRESHOLD).expect("E8 system builds")
}
