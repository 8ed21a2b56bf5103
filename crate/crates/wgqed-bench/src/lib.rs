//! Benchmark harness crate; the timings live in `benches/`.

use wgqed::{ChannelPair, CurvatureForm};

/// The parameter point the benchmarks exercise: δ-form couplings with
/// ω0 = 1, δ = 0.8, v_a1 = 1, γ_a = 0.01, and a lossy b channel.
pub fn reference_pair(gamma_b: f64) -> ChannelPair {
    ChannelPair::from_delta(1.0, 0.8, 1.0, 0.01, gamma_b, CurvatureForm::Exact)
        .expect("the reference couplings are valid")
}
