mod config;
mod llr;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use polar_rewind::code::{construct, CodeSpec, Crc};
use polar_rewind::decoders::Rewind;
use polar_rewind::index::{eta, phi, psi, GroupOrder, MAX_ORDER};
use polar_rewind::sim::{compare_pr, run_campaign, AnyDecoder, Campaign, CampaignConfig, DecoderChoice};

use llr::LlrFormat;

#[derive(Debug, Parser)]
#[command(
    name = "polar-rewind",
    version,
    about = "Polar codes with partial rewinding of SC decoding"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Build an information set and print it as an info-set file
    Construct {
        #[command(flatten)]
        code: CodeArgs,
        /// Write the info-set file here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the index groups Z_p and the per-index stage operators as CSV
    Tables {
        /// Code order n (block length 2^n)
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=20))]
        n: u32,
    },
    /// Decode one frame of channel LLRs and report every attempt
    DecodeOne {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        dec: DecoderArgs,
        /// LLR file, one value per block position in natural order
        #[arg(long)]
        llr: PathBuf,
        #[arg(long, value_enum, default_value_t = LlrFormat::Text)]
        format: LlrFormat,
    },
    /// Monte-Carlo FER and complexity campaign over an Eb/N0 grid
    Simulate(SimulateArgs),
    /// Savings of partial rewind between two saved campaigns
    Compare {
        /// Campaign CSV run with partial rewind
        #[arg(long = "with")]
        with: PathBuf,
        /// Campaign CSV run with full restarts
        #[arg(long)]
        without: PathBuf,
    },
}

#[derive(Debug, Args)]
struct CodeArgs {
    /// Block length N
    #[arg(long)]
    n: Option<usize>,
    /// Payload bits K
    #[arg(long)]
    k: Option<usize>,
    /// CRC as <hexpoly>:<bits> (x^bits implicit), or "none"
    #[arg(long, value_parser = parse_crc, default_value = "none")]
    crc: CrcFlag,
    /// Design SNR in dB (Es/N0) for the Gaussian-approximation construction [default: 2]
    #[arg(long, allow_negative_numbers = true)]
    design_snr: Option<f64>,
    /// Load the information set from a file instead of constructing it
    #[arg(long, conflicts_with = "info_positions")]
    info_set: Option<PathBuf>,
    /// Information positions inline (space separated), as stored in manifests
    #[arg(long, hide = true)]
    info_positions: Option<String>,
}

#[derive(Debug, Clone, Copy)]
struct CrcFlag(Option<Crc>);

fn parse_crc(s: &str) -> std::result::Result<CrcFlag, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(CrcFlag(None));
    }
    Crc::parse(s).map(|c| CrcFlag(Some(c))).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DecoderName {
    Sc,
    ScGenie,
    ScFlip,
    Scl,
    SclSp,
}

impl DecoderName {
    fn as_str(self) -> &'static str {
        match self {
            Self::Sc => "sc",
            Self::ScGenie => "sc-genie",
            Self::ScFlip => "sc-flip",
            Self::Scl => "scl",
            Self::SclSp => "scl-sp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Debug, Args)]
struct DecoderArgs {
    #[arg(long, value_enum, default_value_t = DecoderName::Sc)]
    decoder: DecoderName,
    /// List size L (scl, scl-sp)
    #[arg(long)]
    list: Option<usize>,
    /// Maximum retries (sc-flip, scl-sp)
    #[arg(long)]
    t_max: Option<usize>,
    /// Partial rewind on retries
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pr: OnOff,
}

impl DecoderArgs {
    fn choice(&self) -> Result<DecoderChoice> {
        Ok(DecoderChoice::from_parts(
            self.decoder.as_str(),
            self.list,
            self.t_max,
        )?)
    }

    fn rewind(&self) -> Rewind {
        Rewind::from_flag(self.pr == OnOff::On)
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |p| p.get())
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    dec: DecoderArgs,
    /// Eb/N0 grid in dB: "1,1.5,2" or start:step:stop
    #[arg(long, allow_hyphen_values = true)]
    ebn0: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; results do not depend on this
    #[arg(long, env = "POLAR_REWIND_WORKERS", default_value_t = default_workers())]
    workers: usize,
    /// Stop a point after this many frame errors
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    /// Stop a point after this many frames
    #[arg(long, default_value_t = 1_000_000)]
    max_frames: u64,
    /// Frames decoded between two checks of the stop rule
    #[arg(long, default_value_t = 1000)]
    batch: u64,
    /// CSV output; the manifest goes next to it with a .manifest extension
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file supplying defaults for any flag above
    #[arg(long)]
    config: Option<PathBuf>,
}

/// An error in the arguments themselves: reported like clap's own (exit 2).
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return usage("the --ebn0 grid is empty");
    }
    let num = |t: &str| -> Result<f64> {
        match t.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => usage(format!("bad SNR value '{}' in --ebn0", t.trim())),
        }
    };
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step <= 0.0 || stop < start {
            return usage(format!("--ebn0 {s}: need step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // round off accumulated step error so printed points stay tidy
        return Ok((0..count)
            .map(|i| ((start + step * i as f64) * 1e9).round() / 1e9)
            .collect());
    }
    if parts.len() != 1 {
        return usage(format!("--ebn0 {s}: expected a list or start:step:stop"));
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(num)
        .collect::<Result<Vec<_>>>()
        .and_then(|g| {
            if g.is_empty() {
                usage("the --ebn0 grid is empty")
            } else {
                Ok(g)
            }
        })
}

/// Block length, information positions, CRC and design SNR of a given information set.
type Explicit = (usize, Vec<usize>, Option<Crc>, Option<f64>);

fn build_spec(code: &CodeArgs) -> Result<CodeSpec> {
    let crc = code.crc.0;
    let crc_bits = crc.map_or(0, |c| c.bits as usize);
    let explicit: Option<Explicit> = if let Some(path) = &code.info_set {
        let file = CodeSpec::load(path).with_context(|| format!("loading info set {}", path.display()))?;
        let crc = crc.or(file.crc());
        let snr = code.design_snr.or(file.design_snr_db());
        Some((file.block_len(), file.info_set().to_vec(), crc, snr))
    } else if let Some(list) = &code.info_positions {
        let Some(n) = code.n else {
            return usage("inline information positions need --n");
        };
        let pos = list
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Usage(format!("bad information position '{t}'")).into())
            })
            .collect::<Result<Vec<_>>>()?;
        Some((n, pos, crc, code.design_snr))
    } else {
        None
    };
    if let Some((len, positions, crc, snr)) = explicit {
        if let Some(n) = code.n {
            if n != len {
                return usage(format!("--n {n} disagrees with the information set (N = {len})"));
            }
        }
        let crc_bits = crc.map_or(0, |c| c.bits as usize);
        let k = match code.k {
            Some(k) => k,
            None => positions
                .len()
                .checked_sub(crc_bits)
                .context("information set smaller than the CRC")?,
        };
        return Ok(CodeSpec::from_info_set(len, k, crc, positions, snr)?);
    }
    let (Some(n), Some(k)) = (code.n, code.k) else {
        return usage("--n and --k are required unless --info-set is given");
    };
    if k + crc_bits > n {
        return usage(format!("K + CRC = {} exceeds N = {n}", k + crc_bits));
    }
    Ok(construct(n, k, crc, code.design_snr.unwrap_or(2.0))?)
}

fn cmd_construct(code: &CodeArgs, out: Option<&Path>) -> Result<()> {
    let spec = build_spec(code)?;
    match out {
        Some(path) => spec.save(path)?,
        None => print!("{}", spec.to_info_set_string()),
    }
    Ok(())
}

fn cmd_tables(n: u32) -> Result<()> {
    if n > MAX_ORDER {
        return usage(format!("--n {n} above {MAX_ORDER}"));
    }
    println!("p,z_p,lo,hi,size,eta_z_p,members");
    for g in GroupOrder::all(n) {
        let members: Vec<String> = (g.lo..=g.hi).map(|i| i.to_string()).collect();
        println!(
            "{},{},{},{},{},{},{}",
            g.p,
            g.z(),
            g.lo,
            g.hi,
            g.len(),
            eta(g.z(), n),
            members.join(" ")
        );
    }
    println!();
    println!("i,binary,eta,psi,phi");
    for i in 0..1usize << n {
        let ps = psi(i, n).map_or("-".to_string(), |v| v.to_string());
        println!("{i},{:0w$b},{},{ps},{}", i, eta(i, n), phi(i, n), w = n as usize);
    }
    Ok(())
}

fn bits(v: &[u8]) -> String {
    v.iter().map(|b| char::from(b'0' + b)).collect()
}

fn cmd_decode_one(code: &CodeArgs, dec: &DecoderArgs, llr: &Path, format: LlrFormat) -> Result<()> {
    let spec = build_spec(code)?;
    let choice = dec.choice()?;
    if choice == DecoderChoice::ScGenie {
        return usage("sc-genie needs the transmitted input; use it with simulate");
    }
    choice.validate(&spec)?;
    let llrs = llr::read(llr, format)?;
    if llrs.len() != spec.block_len() {
        bail!(
            "{} LLRs in {}, block length is {}",
            llrs.len(),
            llr.display(),
            spec.block_len()
        );
    }
    let mut d = AnyDecoder::new(&spec, choice, dec.rewind())?;
    let out = d.decode(&llrs, None)?;
    println!(
        "decoder: {} (pr {})",
        choice.name(),
        if dec.rewind().is_partial() { "on" } else { "off" }
    );
    println!("decisions: {}", bits(&out.decisions));
    println!("payload: {}", bits(&out.payload));
    println!("success: {}", out.success);
    for (t, a) in out.log.iter().enumerate() {
        println!(
            "attempt {t}: target {}, resume {}, time-steps {}, node-visits {}, crc {}",
            a.target.map_or("-".to_string(), |j| j.to_string()),
            a.resume,
            a.time_steps,
            a.node_visits,
            if a.crc_ok { "ok" } else { "fail" }
        );
    }
    println!(
        "time-steps: total {}, additional {}",
        out.time_steps_total, out.time_steps_additional
    );
    println!(
        "node-visits: total {}, additional {}",
        out.node_visits_total, out.node_visits_additional
    );
    Ok(())
}

fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest")
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let spec = build_spec(&a.code)?;
    let cfg = CampaignConfig {
        decoder: a.dec.choice()?,
        rewind: a.dec.rewind(),
        ebn0_db: parse_grid(&a.ebn0)?,
        min_errors: a.min_errors,
        max_frames: a.max_frames,
        seed: a.seed,
        workers: a.workers,
        batch: a.batch,
    };
    if let Err(e) = cfg.validate(&spec) {
        return usage(e.to_string());
    }
    let campaign = run_campaign(&spec, &cfg)?;
    match &a.out {
        Some(csv) => {
            let man = manifest_path(csv);
            campaign.save(csv, &man)?;
            eprintln!("wrote {} and {}", csv.display(), man.display());
        }
        None => print!("{}", campaign.to_csv()),
    }
    Ok(())
}

fn cmd_compare(with: &Path, without: &Path) -> Result<()> {
    let load = |p: &Path| {
        Campaign::load(p, &manifest_path(p)).with_context(|| format!("loading campaign {}", p.display()))
    };
    let rows = compare_pr(&load(with)?, &load(without)?)?;
    println!("ebn0_db,fer,ts_add_with,ts_add_without,ts_saving_pct,nv_add_with,nv_add_without,nv_saving_pct");
    for r in rows {
        println!(
            "{},{},{},{},{:.2},{},{},{:.2}",
            r.ebn0_db,
            r.fer,
            r.ts_add_with,
            r.ts_add_without,
            r.ts_saving_pct,
            r.nv_add_with,
            r.nv_add_without,
            r.nv_saving_pct
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Construct { code, out } => cmd_construct(code, out.as_deref()),
        Cmd::Tables { n } => cmd_tables(*n),
        Cmd::DecodeOne {
            code,
            dec,
            llr,
            format,
        } => cmd_decode_one(code, dec, llr, *format),
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Compare { with, without } => cmd_compare(with, without),
    }
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(v) => v,
        Err(e) => Cli::command().error(ErrorKind::Io, format!("{e:#}")).exit(),
    };
    let cli = Cli::parse_from(argv);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(u) = e.downcast_ref::<Usage>() {
                Cli::command().error(ErrorKind::ArgumentConflict, &u.0).exit();
            }
            if let Some(polar_rewind::Error::InvalidArgument(msg)) = e.downcast_ref::<polar_rewind::Error>() {
                if e.chain().count() == 1 {
                    Cli::command().error(ErrorKind::InvalidValue, msg).exit();
                }
            }
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
