//! BPSK/AWGN Monte-Carlo simulation and complexity accounting.

mod campaign;
mod channel;
mod compare;

pub use campaign::{
    frame_rng, run_campaign, AnyDecoder, Campaign, CampaignConfig, CampaignRecord, DecoderChoice, Manifest,
    CSV_HEADER,
};
pub use channel::{transmit, transmit_with, ChannelParams};
pub use compare::{compare_pr, SavingsRow};
