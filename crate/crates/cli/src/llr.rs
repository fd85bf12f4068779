//! Channel LLR files for `decode-one`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LlrFormat {
    /// Decimal numbers separated by whitespace or commas.
    Text,
    /// One IEEE-754 double per token as 16 hex digits (big-endian bit pattern).
    Hex,
    /// Raw little-endian f64 values.
    Bin,
}

pub fn parse(bytes: &[u8], format: LlrFormat) -> Result<Vec<f64>> {
    match format {
        LlrFormat::Bin => {
            if !bytes.len().is_multiple_of(8) {
                bail!("binary LLR file length {} is not a multiple of 8", bytes.len());
            }
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        }
        LlrFormat::Text | LlrFormat::Hex => {
            let text = std::str::from_utf8(bytes).context("LLR file is not UTF-8 text")?;
            let mut out = Vec::new();
            for (line_no, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("");
                for tok in line
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                {
                    let v = if format == LlrFormat::Text {
                        tok.parse::<f64>().ok()
                    } else {
                        let t = tok.trim_start_matches("0x");
                        u64::from_str_radix(t, 16)
                            .ok()
                            .filter(|_| t.len() == 16)
                            .map(f64::from_bits)
                    };
                    match v {
                        Some(v) if v.is_finite() => out.push(v),
                        _ => bail!("line {}: bad LLR value '{tok}'", line_no + 1),
                    }
                }
            }
            Ok(out)
        }
    }
}

pub fn read(path: &Path, format: LlrFormat) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read LLR file {}", path.display()))?;
    parse(&bytes, format).with_context(|| format!("in LLR file {}", path.display()))
}
