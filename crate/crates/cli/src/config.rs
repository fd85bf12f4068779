//! `key = value` config files, merged under explicit flags.
//!
//! The pairs become `--key=value` arguments inserted right after the
//! subcommand, ahead of the user's own flags. Every option overrides itself,
//! so anything given on the command line wins. A saved campaign manifest is
//! a valid config file.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use polar_rewind::sim::Manifest;

/// Keys written to manifests that describe the run but are not options.
const DESCRIPTIVE: &[&str] = &["rng", "channel"];

fn flag_name(key: &str) -> String {
    match key {
        "design_snr_db" => "design-snr".into(),
        "ebn0_db" => "ebn0".into(),
        _ => key.replace('_', "-"),
    }
}

/// Translate one config file into command-line arguments.
pub fn config_args(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let pairs = Manifest::parse(&text).with_context(|| format!("in config file {}", path.display()))?;
    let mut out = Vec::new();
    for (key, value) in &pairs.0 {
        if DESCRIPTIVE.contains(&key.as_str()) {
            continue;
        }
        let flag = flag_name(key);
        if flag == "config" {
            bail!(
                "{}: config files cannot include other config files",
                path.display()
            );
        }
        let value = match flag.as_str() {
            // "none" in a manifest means the option does not apply
            "list" | "t-max" | "design-snr" if value == "none" => continue,
            "ebn0" => value.split_whitespace().collect::<Vec<_>>().join(","),
            // a manifest stores the information set inline
            "info-set" if value.split_whitespace().all(|t| t.parse::<usize>().is_ok()) => {
                out.push(OsString::from(format!("--info-positions={value}")));
                continue;
            }
            _ => value.clone(),
        };
        out.push(OsString::from(format!("--{flag}={value}")));
    }
    Ok(out)
}

/// Find `--config <path>` or `--config=<path>` in `argv`.
fn find_config(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(OsString::from(p));
        }
    }
    None
}

/// Expand a `--config` file into arguments placed before the explicit ones.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = find_config(&argv) else {
        return Ok(argv);
    };
    let injected = config_args(Path::new(&path))?;
    // argv[0] is the program, argv[1] the subcommand
    let at = argv.len().min(2);
    let mut out = argv[..at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}
