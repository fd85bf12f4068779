use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};

/// AWGN operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    /// Payload rate `K / N`; the CRC counts as overhead.
    pub rate: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, rate: f64, seed: u64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return invalid(format!("code rate must lie in (0, 1], got {rate}"));
        }
        if !ebn0_db.is_finite() {
            return invalid(format!("Eb/N0 must be finite, got {ebn0_db}"));
        }
        let sigma = (1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt();
        Ok(Self {
            ebn0_db,
            rate,
            sigma,
            seed,
        })
    }
}

/// Channel LLRs for codeword `x`, noise drawn from `rng`.
pub fn transmit_with<R: Rng + ?Sized>(x: &[u8], sigma: f64, rng: &mut R) -> Vec<f64> {
    let scale = 2.0 / (sigma * sigma);
    x.iter()
        .map(|&b| {
            let noise: f64 = rng.sample(StandardNormal);
            let y = 1.0 - 2.0 * f64::from(b & 1) + sigma * noise;
            scale * y
        })
        .collect()
}

/// Channel LLRs for codeword `x` with noise from the parameters' seed.
pub fn transmit(x: &[u8], params: &ChannelParams) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    transmit_with(x, params.sigma, &mut rng)
}
