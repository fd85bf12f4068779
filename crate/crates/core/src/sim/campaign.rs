use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::channel::{transmit_with, ChannelParams};
use crate::code::{CodeSpec, Crc};
use crate::decoders::{DecodeOutcome, Rewind, ScDecoder, ScFlipDecoder, SclDecoder, SpSclDecoder};
use crate::error::{invalid, Error, Result};

pub const CSV_HEADER: &str =
    "ebn0_db,frames,frame_errors,fer,avg_attempts,avg_ts_all,avg_ts_add,avg_nv_all,avg_nv_add";

/// Decoder run by a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderChoice {
    Sc,
    /// SC fed the true input after every bit; a lower bound for SC.
    ScGenie,
    ScFlip {
        t_max: usize,
    },
    Scl {
        list: usize,
    },
    SclSp {
        list: usize,
        t_max: usize,
    },
}

impl DecoderChoice {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderChoice::Sc => "sc",
            DecoderChoice::ScGenie => "sc-genie",
            DecoderChoice::ScFlip { .. } => "sc-flip",
            DecoderChoice::Scl { .. } => "scl",
            DecoderChoice::SclSp { .. } => "scl-sp",
        }
    }

    pub fn list(&self) -> Option<usize> {
        match *self {
            DecoderChoice::Scl { list } | DecoderChoice::SclSp { list, .. } => Some(list),
            _ => None,
        }
    }

    pub fn t_max(&self) -> Option<usize> {
        match *self {
            DecoderChoice::ScFlip { t_max } | DecoderChoice::SclSp { t_max, .. } => Some(t_max),
            _ => None,
        }
    }

    /// Build from a name plus optional list size and retry budget (defaults L = 8, T = 8).
    pub fn from_parts(name: &str, list: Option<usize>, t_max: Option<usize>) -> Result<Self> {
        let choice = match name {
            "sc" => DecoderChoice::Sc,
            "sc-genie" => DecoderChoice::ScGenie,
            "sc-flip" => DecoderChoice::ScFlip {
                t_max: t_max.unwrap_or(8),
            },
            "scl" => DecoderChoice::Scl {
                list: list.unwrap_or(8),
            },
            "scl-sp" => DecoderChoice::SclSp {
                list: list.unwrap_or(8),
                t_max: t_max.unwrap_or(8),
            },
            other => return invalid(format!("unknown decoder '{other}'")),
        };
        if list.is_some() && choice.list().is_none() {
            return invalid(format!("--list only applies to scl and scl-sp, not {name}"));
        }
        if t_max.is_some() && choice.t_max().is_none() {
            return invalid(format!("--t-max only applies to sc-flip and scl-sp, not {name}"));
        }
        Ok(choice)
    }

    pub fn validate(&self, spec: &CodeSpec) -> Result<()> {
        if let Some(l) = self.list() {
            if l == 0 || !l.is_power_of_two() {
                return invalid(format!("list size must be a power of two, got {l}"));
            }
        }
        if self.t_max().is_some() && spec.crc().is_none() {
            return invalid(format!("{} needs a CRC to detect failures", self.name()));
        }
        Ok(())
    }
}

/// A decoder instance of any kind, reusable across frames.
#[derive(Debug, Clone)]
pub enum AnyDecoder<'a> {
    Sc(ScDecoder<'a>),
    ScGenie(ScDecoder<'a>),
    ScFlip(ScFlipDecoder<'a>),
    Scl(SclDecoder<'a>),
    SclSp(SpSclDecoder<'a>),
}

impl<'a> AnyDecoder<'a> {
    pub fn new(spec: &'a CodeSpec, choice: DecoderChoice, rewind: Rewind) -> Result<Self> {
        choice.validate(spec)?;
        Ok(match choice {
            DecoderChoice::Sc => AnyDecoder::Sc(ScDecoder::new(spec)),
            DecoderChoice::ScGenie => AnyDecoder::ScGenie(ScDecoder::new(spec)),
            DecoderChoice::ScFlip { t_max } => AnyDecoder::ScFlip(ScFlipDecoder::new(spec, t_max, rewind)),
            DecoderChoice::Scl { list } => AnyDecoder::Scl(SclDecoder::new(spec, list)?),
            DecoderChoice::SclSp { list, t_max } => {
                AnyDecoder::SclSp(SpSclDecoder::new(spec, list, t_max, rewind)?)
            }
        })
    }

    /// Decode one frame; `u` is the transmitted input, needed only by the genie decoder.
    pub fn decode(&mut self, channel_llrs: &[f64], u: Option<&[u8]>) -> Result<DecodeOutcome> {
        match self {
            AnyDecoder::Sc(d) => d.decode(channel_llrs),
            AnyDecoder::ScGenie(d) => match u {
                Some(u) => d.decode_genie(channel_llrs, u),
                None => invalid("the genie decoder needs the transmitted input"),
            },
            AnyDecoder::ScFlip(d) => d.decode(channel_llrs),
            AnyDecoder::Scl(d) => d.decode(channel_llrs),
            AnyDecoder::SclSp(d) => d.decode(channel_llrs),
        }
    }
}

/// Campaign settings shared by every SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub decoder: DecoderChoice,
    pub rewind: Rewind,
    pub ebn0_db: Vec<f64>,
    pub min_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    pub workers: usize,
    /// Frames decoded between two checks of the stop rule.
    pub batch: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            decoder: DecoderChoice::Sc,
            rewind: Rewind::Partial,
            ebn0_db: Vec::new(),
            min_errors: 100,
            max_frames: 1_000_000,
            seed: 1,
            workers: 1,
            batch: 1000,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self, spec: &CodeSpec) -> Result<()> {
        if spec.k() == 0 {
            return invalid("rate-0 code: K must be positive");
        }
        if self.ebn0_db.is_empty() {
            return invalid("the SNR grid is empty");
        }
        if let Some(x) = self.ebn0_db.iter().find(|x| !x.is_finite()) {
            return invalid(format!("non-finite SNR point {x}"));
        }
        if self.max_frames == 0 {
            return invalid("max frames must be positive");
        }
        if self.workers == 0 {
            return invalid("at least one worker is needed");
        }
        if self.batch == 0 {
            return invalid("batch size must be positive");
        }
        self.decoder.validate(spec)
    }
}

/// RNG for frame `frame` of SNR point `point`: one substream per frame.
pub fn frame_rng(seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 40) ^ frame);
    rng
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    frames: u64,
    errors: u64,
    attempts: u64,
    additional: u64,
    ts_all: u64,
    ts_add: u64,
    nv_all: u64,
    nv_add: u64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.frames += o.frames;
        self.errors += o.errors;
        self.attempts += o.attempts;
        self.additional += o.additional;
        self.ts_all += o.ts_all;
        self.ts_add += o.ts_add;
        self.nv_all += o.nv_all;
        self.nv_add += o.nv_add;
        self
    }
}

/// Aggregated result of one SNR point.
///
/// `*_all` averages are per frame; `*_add` averages are per additional
/// attempt, over frames that needed at least one retry (NaN when none did).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignRecord {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub avg_attempts: f64,
    pub avg_time_steps_all: f64,
    pub avg_time_steps_add: f64,
    pub avg_node_visits_all: f64,
    pub avg_node_visits_add: f64,
}

impl CampaignRecord {
    fn from_tally(ebn0_db: f64, t: &Tally) -> Self {
        let frames = t.frames as f64;
        let per_add = |v: u64| {
            if t.additional == 0 {
                f64::NAN
            } else {
                v as f64 / t.additional as f64
            }
        };
        Self {
            ebn0_db,
            frames: t.frames,
            frame_errors: t.errors,
            fer: t.errors as f64 / frames,
            avg_attempts: t.attempts as f64 / frames,
            avg_time_steps_all: t.ts_all as f64 / frames,
            avg_time_steps_add: per_add(t.ts_add),
            avg_node_visits_all: t.nv_all as f64 / frames,
            avg_node_visits_add: per_add(t.nv_add),
        }
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.ebn0_db,
            self.frames,
            self.frame_errors,
            fmt_f64(self.fer),
            fmt_f64(self.avg_attempts),
            fmt_f64(self.avg_time_steps_all),
            fmt_f64(self.avg_time_steps_add),
            fmt_f64(self.avg_node_visits_all),
            fmt_f64(self.avg_node_visits_add),
        )
    }

    pub fn parse_csv_row(line: &str, line_no: usize) -> Result<Self> {
        let cols: Vec<&str> = line.trim().split(',').collect();
        if cols.len() != 9 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 9 columns, found {}", cols.len()),
            });
        }
        let f = |k: usize| -> Result<f64> {
            cols[k].trim().parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("column {}: {e}", k + 1),
            })
        };
        let u = |k: usize| -> Result<u64> {
            cols[k].trim().parse::<u64>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("column {}: {e}", k + 1),
            })
        };
        Ok(Self {
            ebn0_db: f(0)?,
            frames: u(1)?,
            frame_errors: u(2)?,
            fer: f(3)?,
            avg_attempts: f(4)?,
            avg_time_steps_all: f(5)?,
            avg_time_steps_add: f(6)?,
            avg_node_visits_all: f(7)?,
            avg_node_visits_add: f(8)?,
        })
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

/// Ordered `key = value` record of everything needed to rerun a campaign.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest(pub BTreeMap<String, String>);

impl Manifest {
    pub fn new(spec: &CodeSpec, cfg: &CampaignConfig) -> Self {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("n", spec.block_len().to_string());
        put("k", spec.k().to_string());
        put("crc", spec.crc().map_or("none".into(), |c: Crc| c.to_string()));
        put(
            "design_snr_db",
            spec.design_snr_db().map_or("none".into(), |d| d.to_string()),
        );
        put(
            "info_set",
            spec.info_set()
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        put("decoder", cfg.decoder.name().into());
        put(
            "list",
            cfg.decoder.list().map_or("none".into(), |l| l.to_string()),
        );
        put(
            "t_max",
            cfg.decoder.t_max().map_or("none".into(), |t| t.to_string()),
        );
        put("pr", if cfg.rewind.is_partial() { "on" } else { "off" }.into());
        put(
            "ebn0_db",
            cfg.ebn0_db
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        put("seed", cfg.seed.to_string());
        put("min_errors", cfg.min_errors.to_string());
        put("max_frames", cfg.max_frames.to_string());
        put("batch", cfg.batch.to_string());
        put("rng", "chacha8, stream = (point << 40) ^ frame".into());
        put("channel", "bpsk-awgn, sigma^2 = 1 / (2 (K/N) Eb/N0)".into());
        Manifest(m)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected key = value, got '{line}'"),
                });
            };
            m.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Manifest(m))
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.0 {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Records of a campaign with the manifest describing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub manifest: Manifest,
    pub records: Vec<CampaignRecord>,
}

impl Campaign {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(out, "{}", r.to_csv_row());
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Vec<CampaignRecord>> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            Some((i, _)) => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "unexpected CSV header".into(),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "empty CSV".into(),
                })
            }
        }
        lines
            .map(|(i, l)| CampaignRecord::parse_csv_row(l, i + 1))
            .collect()
    }

    pub fn save(&self, csv: &Path, manifest: &Path) -> Result<()> {
        write_file(csv, &self.to_csv())?;
        write_file(manifest, &self.manifest.to_string())
    }

    pub fn load(csv: &Path, manifest: &Path) -> Result<Self> {
        Ok(Self {
            records: Self::parse_csv(&read_file(csv)?)?,
            manifest: Manifest::parse(&read_file(manifest)?)?,
        })
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn simulate_frame(
    spec: &CodeSpec,
    dec: &mut AnyDecoder<'_>,
    sigma: f64,
    mut rng: ChaCha8Rng,
) -> Result<Tally> {
    let payload: Vec<u8> = (0..spec.k()).map(|_| rng.gen_range(0..2u8)).collect();
    let frame = spec.frame(&payload)?;
    let llrs = transmit_with(&frame.x, sigma, &mut rng);
    let out = dec.decode(&llrs, Some(&frame.u))?;
    let additional = u64::from(out.additional_attempts());
    Ok(Tally {
        frames: 1,
        errors: u64::from(out.payload != payload),
        attempts: u64::from(out.attempts),
        additional,
        ts_all: out.time_steps_total,
        ts_add: out.time_steps_additional,
        nv_all: out.node_visits_total,
        nv_add: out.node_visits_additional,
    })
}

/// Run every SNR point of the campaign.
///
/// Frames are decoded in batches of `cfg.batch`; a point stops after the
/// first batch that reaches `min_errors` errors or `max_frames` frames. The
/// result does not depend on the number of workers.
pub fn run_campaign(spec: &CodeSpec, cfg: &CampaignConfig) -> Result<Campaign> {
    cfg.validate(spec)?;
    AnyDecoder::new(spec, cfg.decoder, cfg.rewind)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let mut records = Vec::with_capacity(cfg.ebn0_db.len());
    for (point, &ebn0) in cfg.ebn0_db.iter().enumerate() {
        let params = ChannelParams::new(ebn0, spec.rate(), cfg.seed)?;
        let mut total = Tally::default();
        while total.errors < cfg.min_errors && total.frames < cfg.max_frames {
            let start = total.frames;
            let end = (start + cfg.batch).min(cfg.max_frames);
            let batch = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map_init(
                        || AnyDecoder::new(spec, cfg.decoder, cfg.rewind),
                        |dec, f| {
                            let dec = dec.as_mut().map_err(|e| e.clone())?;
                            simulate_frame(spec, dec, params.sigma, frame_rng(cfg.seed, point, f))
                        },
                    )
                    .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
            })?;
            total = total.merge(batch);
        }
        records.push(CampaignRecord::from_tally(ebn0, &total));
    }
    Ok(Campaign {
        manifest: Manifest::new(spec, cfg),
        records,
    })
}
