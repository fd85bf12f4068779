//! Polar codes with successive-cancellation decoding and partial rewind.
//!
//! The crate covers code construction ([`code`]), the bit-index algebra that
//! locates safe restart points ([`index`]), a compact SC kernel ([`kernel`]),
//! SC / SC-flip / list decoders ([`decoders`]) and a Monte-Carlo AWGN
//! simulator ([`sim`]).

pub mod code;
pub mod decoders;
pub mod error;
pub mod index;
pub mod kernel;
pub mod sim;

pub use code::{construct, encode, load_info_set, CodeSpec, Crc, Frame};
pub use decoders::{
    oracle_full_sc, sc_decode, sc_decode_genie, sc_flip_decode, scl_decode, sp_scl_decode, DecodeOutcome,
    Rewind,
};
pub use error::{Error, Result};
pub use index::{eta, phi, psi, resolve_multi, resume_cost, rewind_target, BitIndex, GroupOrder, RewindPlan};
pub use kernel::{Counters, PathPool, ScMemory, Snapshot};
