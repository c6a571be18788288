//! Benchmark-only crate; see `benches/core_ops.rs`. Shared instance
//! builders live here so the bench targets stay small.

use umedian_core::generators::{gen_instance_1d, gen_instance_2d, C0Family1D, DiskFamily2D};
use umedian_core::UncertainPointSet;

pub fn uniform_1d(n: usize, k: usize, seed: u64) -> UncertainPointSet {
    let family = C0Family1D::uniform(1.0).expect("valid family");
    gen_instance_1d(n, k, &family, seed).expect("valid instance")
}

pub fn uniform_disk_2d(n: usize, k: usize, seed: u64) -> UncertainPointSet {
    let family = DiskFamily2D::uniform(1.0).expect("valid family");
    gen_instance_2d(n, k, &family, seed).expect("valid instance")
}
