//! Shared inputs for the criterion benchmarks.

use xpcc_core::synth::{self, ShellSpec};
use xpcc_core::PointCloud;

/// A short rigidly translating elliptic shell, about 3k points per frame.
pub fn shell_sequence(frames: usize) -> Vec<PointCloud> {
    let spec = ShellSpec { center: [400, 0, 400], a: 25, b: 15, y0: 100, height: 40 };
    synth::translating_sequence(&spec, frames, [2, 0, 1])
}
