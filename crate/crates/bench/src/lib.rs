//! Shared fixtures for the decoder benchmarks.

use polar_rewind::sim::{frame_rng, transmit_with, ChannelParams};
use polar_rewind::CodeSpec;
use rand::Rng;

/// `count` noisy channel-LLR vectors for `spec` at `ebn0_db`, reproducible from `seed`.
pub fn noisy_frames(spec: &CodeSpec, ebn0_db: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let sigma = ChannelParams::new(ebn0_db, spec.rate(), seed)
        .expect("valid operating point")
        .sigma;
    (0..count as u64)
        .map(|f| {
            let mut rng = frame_rng(seed, 0, f);
            let payload: Vec<u8> = (0..spec.k()).map(|_| rng.gen_range(0..2u8)).collect();
            let frame = spec.frame(&payload).expect("payload length matches K");
            transmit_with(&frame.x, sigma, &mut rng)
        })
        .collect()
}
