//! Shared fixtures for the criterion benchmarks.

use cbwring_core::{CavityConfig, Grid};

/// High-finesse ring: r = 0.999, 5000 orders.
pub fn ring_config() -> CavityConfig {
    CavityConfig::default()
}

/// A coarser grid over the default span, for sweeps that must finish
/// quickly inside a criterion sample.
pub fn bench_grid(steps: usize) -> Grid {
    Grid {
        steps,
        ..Grid::default()
    }
}
