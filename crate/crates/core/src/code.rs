//! Polar code description, construction, CRC and encoding.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::index::MAX_ORDER;

/// A CRC with an implicit leading `x^bits` term.
///
/// The register starts at zero, bits are shifted in most-significant first and
/// nothing is reflected, so `attach` appends the remainder of `m(x) x^bits / g(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crc {
    pub poly: u64,
    pub bits: u32,
}

impl Crc {
    /// 12-bit CRC with generator `x^12 + x^11 + x^10 + x^2 + x`.
    pub const CRC12_C06: Crc = Crc {
        poly: 0xC06,
        bits: 12,
    };

    pub fn new(poly: u64, bits: u32) -> Result<Self> {
        if bits == 0 || bits > 32 {
            return invalid(format!("CRC width {bits} outside [1, 32]"));
        }
        if poly >> bits != 0 {
            return invalid(format!(
                "CRC polynomial {poly:#x} wider than {bits} bits (the x^{bits} term is implicit)"
            ));
        }
        Ok(Self { poly, bits })
    }

    /// Parse `<hexpoly>:<bits>`, e.g. `0xC06:12`.
    pub fn parse(text: &str) -> Result<Self> {
        let (poly, bits) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("CRC `{text}` is not <hexpoly>:<bits>")))?;
        let poly = poly.trim();
        let digits = poly
            .strip_prefix("0x")
            .or_else(|| poly.strip_prefix("0X"))
            .unwrap_or(poly);
        let poly = u64::from_str_radix(digits, 16)
            .map_err(|e| Error::InvalidArgument(format!("CRC polynomial `{poly}`: {e}")))?;
        let bits = bits
            .trim()
            .parse()
            .map_err(|e| Error::InvalidArgument(format!("CRC width `{bits}`: {e}")))?;
        Self::new(poly, bits)
    }

    /// Remainder of the message, returned as `bits` bits, most significant first.
    pub fn remainder(&self, message: &[u8]) -> Vec<u8> {
        let top = self.bits - 1;
        let mask = (1u64 << self.bits) - 1;
        let mut reg = 0u64;
        for &b in message {
            let feedback = ((reg >> top) & 1) ^ u64::from(b & 1);
            reg = (reg << 1) & mask;
            if feedback == 1 {
                reg ^= self.poly;
            }
        }
        (0..self.bits).rev().map(|t| ((reg >> t) & 1) as u8).collect()
    }

    pub fn attach(&self, payload: &[u8]) -> Vec<u8> {
        let mut word = payload.to_vec();
        word.extend(self.remainder(payload));
        word
    }

    pub fn check(&self, word: &[u8]) -> bool {
        let bits = self.bits as usize;
        if word.len() < bits {
            return false;
        }
        let (payload, tail) = word.split_at(word.len() - bits);
        self.remainder(payload) == tail
    }
}

impl std::fmt::Display for Crc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#X}:{}", self.poly, self.bits)
    }
}

/// A polar code: block length, information set and optional outer CRC.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    n: u32,
    k: usize,
    crc: Option<Crc>,
    info_set: Vec<usize>,
    info_mask: Vec<bool>,
    design_snr_db: Option<f64>,
}

impl CodeSpec {
    /// Build a spec from an explicit information set (sorted and checked here).
    pub fn from_info_set(
        block_len: usize,
        k: usize,
        crc: Option<Crc>,
        mut info_set: Vec<usize>,
        design_snr_db: Option<f64>,
    ) -> Result<Self> {
        let n = block_order(block_len)?;
        let crc_bits = crc.map_or(0, |c| c.bits as usize);
        if info_set.len() != k + crc_bits {
            return invalid(format!(
                "information set has {} entries, expected K + CRC = {}",
                info_set.len(),
                k + crc_bits
            ));
        }
        info_set.sort_unstable();
        let mut info_mask = vec![false; block_len];
        for &i in &info_set {
            if i >= block_len {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: block_len,
                });
            }
            if info_mask[i] {
                return invalid(format!("duplicate information index {i}"));
            }
            info_mask[i] = true;
        }
        Ok(Self {
            n,
            k,
            crc,
            info_set,
            info_mask,
            design_snr_db,
        })
    }

    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    /// Code-length exponent `n = log2 N`.
    pub fn order(&self) -> u32 {
        self.n
    }

    /// Payload bits, excluding the CRC.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn crc(&self) -> Option<Crc> {
        self.crc
    }

    pub fn crc_bits(&self) -> usize {
        self.crc.map_or(0, |c| c.bits as usize)
    }

    pub fn design_snr_db(&self) -> Option<f64> {
        self.design_snr_db
    }

    /// Sorted information set (payload positions followed by CRC positions).
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn is_info(&self, i: usize) -> bool {
        self.info_mask[i]
    }

    pub fn info_mask(&self) -> &[bool] {
        &self.info_mask
    }

    /// Payload rate `K / N`.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.block_len() as f64
    }

    /// Place payload and CRC on the information set; frozen bits are zero.
    pub fn frame(&self, payload: &[u8]) -> Result<Frame> {
        if payload.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: payload.len(),
            });
        }
        let word = match self.crc {
            Some(crc) => crc.attach(payload),
            None => payload.to_vec(),
        };
        let mut u = vec![0u8; self.block_len()];
        for (&pos, &bit) in self.info_set.iter().zip(&word) {
            u[pos] = bit & 1;
        }
        let x = encode(&u)?;
        Ok(Frame { u, x })
    }

    /// Information word (payload then CRC) read off a decision vector.
    pub fn info_word(&self, decisions: &[u8]) -> Vec<u8> {
        self.info_set.iter().map(|&i| decisions[i]).collect()
    }

    pub fn payload(&self, decisions: &[u8]) -> Vec<u8> {
        self.info_set[..self.k].iter().map(|&i| decisions[i]).collect()
    }

    /// CRC verdict on a decision vector; `true` when the code carries no CRC.
    pub fn crc_ok(&self, decisions: &[u8]) -> bool {
        match self.crc {
            Some(crc) => crc.check(&self.info_word(decisions)),
            None => true,
        }
    }

    /// Write the information-set file: `N=`, optional metadata, then one index per line.
    pub fn to_info_set_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "N={}", self.block_len());
        let _ = writeln!(out, "K={}", self.k);
        if let Some(crc) = self.crc {
            let _ = writeln!(out, "CRC={crc}");
        }
        if let Some(snr) = self.design_snr_db {
            let _ = writeln!(out, "DESIGN_SNR_DB={snr}");
        }
        for i in &self.info_set {
            let _ = writeln!(out, "{i}");
        }
        out
    }

    /// Parse an information-set file.
    ///
    /// The first non-comment line is `N=<len>` (or a bare length). `K=`, `CRC=`
    /// and `DESIGN_SNR_DB=` lines are optional; the rest are information
    /// indices, whitespace or `;` separated. Without `K=`, every index is payload.
    pub fn parse_info_set(text: &str) -> Result<Self> {
        let mut block_len = None;
        let mut k = None;
        let mut crc = None;
        let mut snr = None;
        let mut indices = Vec::new();
        let mut seen = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            for token in line.split(|c: char| c == ';' || c.is_whitespace()) {
                if token.is_empty() {
                    continue;
                }
                if let Some((key, value)) = token.split_once('=') {
                    let value = value.trim();
                    match key.trim().to_ascii_uppercase().as_str() {
                        "N" => {
                            let len: usize = value
                                .parse()
                                .map_err(|e| perr(format!("block length `{value}`: {e}")))?;
                            block_order(len).map_err(|e| perr(e.to_string()))?;
                            seen = vec![false; len];
                            block_len = Some(len);
                        }
                        "K" => {
                            k = Some(
                                value
                                    .parse::<usize>()
                                    .map_err(|e| perr(format!("K `{value}`: {e}")))?,
                            )
                        }
                        "CRC" => crc = Some(Crc::parse(value).map_err(|e| perr(e.to_string()))?),
                        "DESIGN_SNR_DB" => {
                            snr = Some(
                                value
                                    .parse::<f64>()
                                    .map_err(|e| perr(format!("design SNR `{value}`: {e}")))?,
                            )
                        }
                        other => return Err(perr(format!("unknown key `{other}`"))),
                    }
                    continue;
                }
                let value: usize = token.parse().map_err(|e| perr(format!("index `{token}`: {e}")))?;
                let Some(len) = block_len else {
                    // A bare first number is the block length.
                    block_order(value).map_err(|e| perr(e.to_string()))?;
                    seen = vec![false; value];
                    block_len = Some(value);
                    continue;
                };
                if value >= len {
                    return Err(perr(format!("index {value} out of range for block length {len}")));
                }
                if seen[value] {
                    return Err(perr(format!("duplicate index {value}")));
                }
                seen[value] = true;
                indices.push(value);
            }
        }

        let block_len = block_len.ok_or(Error::Parse {
            line: 1,
            msg: "missing block length".into(),
        })?;
        let crc_bits = crc.map_or(0, |c: Crc| c.bits as usize);
        let k = match k {
            Some(k) => k,
            None => indices.len().checked_sub(crc_bits).ok_or(Error::Parse {
                line: text.lines().count().max(1),
                msg: "fewer indices than CRC bits".into(),
            })?,
        };
        Self::from_info_set(block_len, k, crc, indices, snr)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_info_set_string()).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::parse_info_set(&text)
    }
}

/// Load an information-set file (see [`CodeSpec::parse_info_set`]).
pub fn load_info_set(path: &Path) -> Result<CodeSpec> {
    CodeSpec::load(path)
}

/// A transmitted frame: the input vector `u` and the codeword `x = u G_N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub u: Vec<u8>,
    pub x: Vec<u8>,
}

pub(crate) fn block_order(block_len: usize) -> Result<u32> {
    if block_len < 2 || !block_len.is_power_of_two() {
        return invalid(format!("block length {block_len} is not a power of two >= 2"));
    }
    let n = block_len.trailing_zeros();
    if n > MAX_ORDER {
        return invalid(format!("block length {block_len} too large"));
    }
    Ok(n)
}

/// Reverse the low `n` bits of `i`.
#[inline]
pub fn bit_reverse(i: usize, n: u32) -> usize {
    i.reverse_bits() >> (usize::BITS - n)
}

/// In-place `v <- v F^{⊗n}` over GF(2), with `F = [[1,0],[1,1]]`.
pub fn polar_transform(v: &mut [u8]) {
    let len = v.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// `x = u B_N F^{⊗n}`: the butterfly transform followed by the bit-reversal permutation.
pub fn encode(u: &[u8]) -> Result<Vec<u8>> {
    let n = block_order(u.len())?;
    let mut v = u.to_vec();
    polar_transform(&mut v);
    Ok((0..u.len()).map(|k| v[bit_reverse(k, n)]).collect())
}

/// Gaussian-approximation `φ(x)` of the LLR mean, in the natural log.
fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        (-0.4527 * x.powf(0.86) + 0.0218).min(0.0)
    } else {
        0.5 * (std::f64::consts::PI / x).ln() + (1.0 - 10.0 / (7.0 * x)).ln() - x / 4.0
    }
}

/// Inverse of [`ln_phi`] on its decreasing range.
fn ln_phi_inv(t: f64) -> f64 {
    let knee = -0.4527 * 10f64.powf(0.86) + 0.0218;
    if t >= 0.0218 {
        return 0.0;
    }
    if t >= knee {
        return ((0.0218 - t) / 0.4527).powf(1.0 / 0.86);
    }
    let (mut lo, mut hi) = (10.0f64, 20.0f64);
    while ln_phi(hi) > t {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Check-node (degraded) GA update of an LLR mean: `φ^{-1}(1 - (1 - φ(m))^2)`.
fn ga_check(m: f64) -> f64 {
    let lp = ln_phi(m);
    let phi = lp.exp();
    // 1 - (1 - φ)^2 = φ (2 - φ)
    ln_phi_inv(lp + (2.0 - phi).ln())
}

/// Mean LLR of every bit-channel under Gaussian-approximation density evolution.
///
/// `channel_mean` is the mean of the channel LLR (`2 / σ²` for BPSK on AWGN).
/// Bit `i` sees the check update for every zero and the variable update
/// (doubling) for every one in its binary expansion, most significant bit first.
pub fn ga_bit_channel_means(n: u32, channel_mean: f64) -> Vec<f64> {
    (0..1usize << n)
        .map(|i| {
            (0..n).rev().fold(channel_mean, |m, bit| {
                if (i >> bit) & 1 == 1 {
                    2.0 * m
                } else {
                    ga_check(m)
                }
            })
        })
        .collect()
}

/// Construct a code by Gaussian-approximation density evolution at `design_snr_db`.
///
/// The design SNR is the symbol SNR `Es/N0` of unit-energy BPSK
/// (`σ² = 1 / (2 Es/N0)`), independent of the rate, so codes of one length
/// and design SNR are nested in `K`. The `K + crc_bits` bit-channels with the
/// largest mean LLR form the information set; ties prefer the higher index.
pub fn construct(block_len: usize, k: usize, crc: Option<Crc>, design_snr_db: f64) -> Result<CodeSpec> {
    let n = block_order(block_len)?;
    let crc_bits = crc.map_or(0, |c| c.bits as usize);
    if k == 0 {
        return invalid("K must be positive");
    }
    if k + crc_bits > block_len {
        return invalid(format!(
            "K + CRC = {} exceeds block length {block_len}",
            k + crc_bits
        ));
    }
    if !design_snr_db.is_finite() {
        return invalid("design SNR must be finite");
    }
    let sigma2 = 1.0 / (2.0 * 10f64.powf(design_snr_db / 10.0));
    let means = ga_bit_channel_means(n, 2.0 / sigma2);
    let mut order: Vec<usize> = (0..block_len).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(b.cmp(&a)));
    let info = order[..k + crc_bits].to_vec();
    CodeSpec::from_info_set(block_len, k, crc, info, Some(design_snr_db))
}
