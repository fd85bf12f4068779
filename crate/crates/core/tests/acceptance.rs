//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Campaign sizes default to desk scale on a single core. Set
//! `POLAR_REWIND_ACCEPT_FRAMES` to raise the frames per SNR point of the
//! seed-equality campaign (e.g. `100000`).

use std::time::{Duration, Instant};

use polar_rewind::code::{construct, CodeSpec, Crc};
use polar_rewind::decoders::{
    oracle_full_sc, sc_decode, sc_decode_genie, scl_decode, FixedFlips, FixedShifts, Rewind, ScFlipDecoder,
    SpSclDecoder,
};
use polar_rewind::index::{eta, node_visit_cost, phi, psi, resume_cost, rewind_target, z_min, GroupOrder};
use polar_rewind::kernel::{hard_decision, ScMemory};
use polar_rewind::sim::{
    frame_rng, run_campaign, transmit_with, Campaign, CampaignConfig, ChannelParams, DecoderChoice,
};
use polar_rewind::{sc_flip_decode, sp_scl_decode};
use rand::Rng;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn env_frames(default: u64) -> u64 {
    std::env::var("POLAR_REWIND_ACCEPT_FRAMES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(default)
}

// ---------------------------------------------------------------- reference bit-string operators

fn bit(i: usize, t: u32) -> bool {
    (i >> t) & 1 == 1
}

fn ffo(i: usize, n: u32) -> u32 {
    if i == 0 {
        n - 1
    } else {
        (0..n).find(|&t| bit(i, t)).unwrap()
    }
}

fn ffz(i: usize, n: u32) -> Option<u32> {
    (0..n).find(|&t| !bit(i, t))
}

fn flz(j: usize, n: u32) -> u32 {
    match (0..n).rev().find(|&t| !bit(j, t)) {
        Some(t) => n - 1 - t,
        None => n - 1,
    }
}

// ---------------------------------------------------------------- 1

fn index_algebra() -> Verdict {
    let mut checked = 0u64;
    for n in 1..=12u32 {
        let len = 1usize << n;
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n as usize];
        for i in 0..len {
            ensure(eta(i, n) == ffo(i, n), || format!("eta({i}) n={n}"))?;
            ensure(psi(i, n) == ffz(i, n), || format!("psi({i}) n={n}"))?;
            ensure(phi(i, n) == flz(i, n), || format!("phi({i}) n={n}"))?;
            if i + 1 < len {
                ensure(psi(i, n) == Some(eta(i + 1, n)), || {
                    format!("psi({i}) != eta({}) n={n}", i + 1)
                })?;
            }
            groups[flz(i, n) as usize].push(i);
            checked += 1;
        }
        for p in 0..n {
            let members = &groups[p as usize];
            let (lo, hi) = if p < n - 1 {
                (len - (len >> p), len - (len >> (p + 1)) - 1)
            } else {
                (len - 2, len - 1)
            };
            let size = if p < n - 1 { 1usize << (n - p - 1) } else { 2 };
            ensure(
                members.first() == Some(&lo) && members.last() == Some(&hi),
                || format!("Z_{p} bounds n={n}"),
            )?;
            ensure(members.windows(2).all(|w| w[1] == w[0] + 1), || {
                format!("Z_{p} not contiguous n={n}")
            })?;
            ensure(members.len() == size, || format!("|Z_{p}| n={n}"))?;
            let z: usize = (n - p..n).map(|x| 1usize << x).sum();
            ensure(z == lo && z_min(p, n) == z, || format!("z_{p} n={n}"))?;
            let g = GroupOrder::new(p, n);
            ensure((g.lo, g.hi, g.len()) == (lo, hi, size), || {
                format!("GroupOrder {p} n={n}")
            })?;
            let max_eta = members.iter().map(|&i| eta(i, n)).max().unwrap();
            ensure(max_eta == eta(z, n), || format!("max eta over Z_{p} n={n}"))?;
        }
        for p in 0..n {
            for q in p + 1..n {
                let (zp, zq) = (z_min(p, n), z_min(q, n));
                if p == 0 {
                    // z_0 = 0 and eta(0) = n - 1 = eta(z_1); psi(z_0 - 1) is undefined
                    ensure(eta(zp, n) >= eta(zq, n), || format!("eta(z_0) n={n}"))?;
                    continue;
                }
                ensure(eta(zp, n) > eta(zq, n), || {
                    format!("eta(z_{p}) <= eta(z_{q}) n={n}")
                })?;
                ensure(psi(zp - 1, n) > psi(zq - 1, n), || format!("psi(z_{p}-1) n={n}"))?;
            }
        }
        if n >= 2 {
            ensure(
                eta(z_min(0, n), n) == n - 1 && eta(z_min(1, n), n) == n - 1,
                || format!("eta(z_0) = eta(z_1) = n - 1 fails for n={n}"),
            )?;
        }
    }
    Ok(format!("{checked} indices, n = 1..12"))
}

// ---------------------------------------------------------------- 2

fn worked_examples() -> Verdict {
    let groups: Vec<Vec<usize>> = GroupOrder::all(3).map(|g| (g.lo..=g.hi).collect()).collect();
    ensure(groups == vec![vec![0, 1, 2, 3], vec![4, 5], vec![6, 7]], || {
        format!("n=3 partition {groups:?}")
    })?;
    let z: Vec<usize> = (0..4).map(|p| z_min(p, 4)).collect();
    ensure(z == vec![0, 8, 12, 14], || format!("n=4 z_p {z:?}"))?;
    ensure(phi(31, 5) == 4 && phi(19, 5) == 1, || {
        "groups of 31 and 19".into()
    })?;
    for (i, j, want) in [(31usize, 19usize, 16usize), (22, 19, 16), (22, 20, 20)] {
        let got = rewind_target(i, j, 5).map_err(|e| e.to_string())?.resume;
        ensure(got == want, || format!("({i},{j}) -> {got}, expected {want}"))?;
    }
    Ok("5 examples".into())
}

// ---------------------------------------------------------------- 3

fn all_info(len: usize) -> CodeSpec {
    CodeSpec::from_info_set(len, len, None, (0..len).collect(), None).unwrap()
}

fn channel(spec: &CodeSpec, ebn0_db: f64, seed: u64, f: u64) -> Vec<f64> {
    let sigma = ChannelParams::new(ebn0_db, spec.rate(), seed).unwrap().sigma;
    let mut rng = frame_rng(seed, 0, f);
    let payload: Vec<u8> = (0..spec.k()).map(|_| rng.gen_range(0..2)).collect();
    let frame = spec.frame(&payload).unwrap();
    transmit_with(&frame.x, sigma, &mut rng)
}

/// Decode with hard decisions up to bit `i` (committing it or not), rewind to
/// the planned point, replay with bit `j` flipped and compare against a
/// full-memory restart.
fn kernel_case(full: &CodeSpec, ch: &[f64], i: usize, j: usize, commit_i: bool) -> Result<(), String> {
    let n = full.order();
    let len = full.block_len();
    let mut mem = ScMemory::init(ch).unwrap();
    for b in 0..=i {
        let l = mem.bit_llr(b).unwrap();
        if b < i || (commit_i && i + 1 < len) {
            mem.commit(b, hard_decision(l)).unwrap();
        }
    }
    let resume = rewind_target(i, j, n).map_err(|e| e.to_string())?.resume;
    mem.rewind(resume)
        .map_err(|e| format!("N={len} i={i} j={j}: {e}"))?;
    for b in resume..len {
        let l = mem.bit_llr(b).unwrap();
        mem.commit(b, hard_decision(l) ^ u8::from(b == j)).unwrap();
    }
    let expect = oracle_full_sc(full, ch, &[j]).unwrap();
    ensure(mem.decisions() == expect.as_slice(), || {
        format!("kernel N={len} i={i} j={j}")
    })
}

fn same_outcome(
    what: &str,
    a: &polar_rewind::DecodeOutcome,
    b: &polar_rewind::DecodeOutcome,
) -> Result<(), String> {
    ensure(
        a.decisions == b.decisions && a.success == b.success && a.attempts == b.attempts,
        || format!("{what}: partial {:?} vs restart {:?}", a.log, b.log),
    )?;
    for (x, y) in a.log.iter().zip(&b.log) {
        ensure(x.crc_ok == y.crc_ok && x.target == y.target, || {
            format!("{what}: attempt logs differ")
        })?;
        ensure(x.time_steps <= y.time_steps, || {
            format!("{what}: partial costs more")
        })?;
    }
    Ok(())
}

fn flip_pair(spec: &CodeSpec, ch: &[f64], script: &[usize]) -> Result<bool, String> {
    let t = script.len();
    let a = ScFlipDecoder::with_strategy(spec, t, Rewind::Partial, FixedFlips(script.to_vec()))
        .decode(ch)
        .unwrap();
    let b = ScFlipDecoder::with_strategy(spec, t, Rewind::Restart, FixedFlips(script.to_vec()))
        .decode(ch)
        .unwrap();
    same_outcome(&format!("sc-flip N={} {script:?}", spec.block_len()), &a, &b)?;
    if a.attempts > 1 && a.success {
        let last = a.log.last().unwrap().target.unwrap();
        let expect = oracle_full_sc(spec, ch, &[last]).unwrap();
        ensure(a.decisions == expect, || {
            format!("sc-flip vs oracle N={} {script:?}", spec.block_len())
        })?;
    }
    Ok(a.attempts > 1)
}

fn shift_pair(spec: &CodeSpec, ch: &[f64], list: usize, script: &[usize]) -> Result<bool, String> {
    let t = script.len();
    let a = SpSclDecoder::with_strategy(spec, list, t, Rewind::Partial, FixedShifts(script.to_vec()))
        .unwrap()
        .decode(ch)
        .unwrap();
    let b = SpSclDecoder::with_strategy(spec, list, t, Rewind::Restart, FixedShifts(script.to_vec()))
        .unwrap()
        .decode(ch)
        .unwrap();
    same_outcome(&format!("sp-scl N={} {script:?}", spec.block_len()), &a, &b)?;
    Ok(a.attempts > 1)
}

fn transparency() -> Verdict {
    let mut kernel_cases = 0u64;
    let mut decoder_cases = 0u64;
    let mut retried = 0u64;

    // exhaustive over (i, j) and over flip and shift targets, 100 noise seeds each
    let small = [
        construct(8, 2, Some(Crc::new(0x3, 3).unwrap()), 0.0).unwrap(),
        construct(16, 2, Some(Crc::CRC12_C06), 0.0).unwrap(),
    ];
    for spec in &small {
        let len = spec.block_len();
        let full = all_info(len);
        let info = spec.info_set().to_vec();
        for seed in 0..100u64 {
            let ch = channel(&full, 0.0, 300 + seed, len as u64);
            for i in 1..len {
                for j in 0..i {
                    for commit_i in [false, true] {
                        kernel_case(&full, &ch, i, j, commit_i)?;
                        kernel_cases += 1;
                    }
                }
            }
            let ch = channel(spec, -1.0, 400 + seed, len as u64);
            for &j in &info {
                retried += u64::from(flip_pair(spec, &ch, &[j])?);
                retried += u64::from(shift_pair(spec, &ch, 2, &[j])?);
                decoder_cases += 2;
                for &j2 in &info {
                    if j2 != j {
                        retried += u64::from(flip_pair(spec, &ch, &[j, j2])?);
                        retried += u64::from(shift_pair(spec, &ch, 2, &[j, j2])?);
                        decoder_cases += 2;
                    }
                }
            }
        }
    }

    // randomized, 10^4 cases per length
    for (len, k) in [(32usize, 8usize), (64, 20), (128, 40)] {
        let spec = construct(len, k, Some(Crc::CRC12_C06), 1.0).unwrap();
        let full = all_info(len);
        for case in 0..10_000u64 {
            let mut rng = frame_rng(500 + len as u64, 1, case);
            let i = rng.gen_range(1..len);
            let j = rng.gen_range(0..i);
            let ch = channel(&full, 0.0, 600 + len as u64, case);
            kernel_case(&full, &ch, i, j, rng.gen())?;
            kernel_cases += 1;

            let ch = channel(&spec, 0.5, 700 + len as u64, case);
            let a = sc_flip_decode(&spec, &ch, 8, Rewind::Partial).unwrap();
            let b = sc_flip_decode(&spec, &ch, 8, Rewind::Restart).unwrap();
            same_outcome(&format!("sc-flip N={len} case {case}"), &a, &b)?;
            let c = sp_scl_decode(&spec, &ch, 4, 4, Rewind::Partial).unwrap();
            let d = sp_scl_decode(&spec, &ch, 4, 4, Rewind::Restart).unwrap();
            same_outcome(&format!("sp-scl N={len} case {case}"), &c, &d)?;
            retried += u64::from(a.attempts > 1) + u64::from(c.attempts > 1);
            decoder_cases += 2;
        }
    }
    Ok(format!(
        "{kernel_cases} kernel rewinds, {decoder_cases} decoder pairs ({retried} with retries)"
    ))
}

// ---------------------------------------------------------------- 4

fn counter_identities() -> Verdict {
    for n in 1..=10u32 {
        let len = 1usize << n;
        let full = all_info(len);
        let ch = channel(&full, 1.0, 800, u64::from(n));
        let mut mem = ScMemory::init(&ch).unwrap();
        for b in 0..len {
            let l = mem.bit_llr(b).unwrap();
            mem.commit(b, hard_decision(l)).unwrap();
        }
        let c = mem.counters();
        ensure(c.time_steps == 2 * len as u64 - 2, || {
            format!("time-steps N={len}: {}", c.time_steps)
        })?;
        ensure(c.node_visits == len as u64 * u64::from(n), || {
            format!("node visits N={len}")
        })?;
        if n == 9 {
            ensure(c.time_steps == 1022 && c.node_visits == 4608, || {
                "N=512 totals".into()
            })?;
        }
        let sc = sc_decode(&full, &ch).unwrap();
        ensure(sc.time_steps_total == 2 * len as u64 - 2, || {
            format!("sc_decode N={len}")
        })?;
        let scl = scl_decode(&full, &ch, 4).unwrap();
        ensure(scl.time_steps_total == 2 * len as u64 - 2, || {
            format!("scl lockstep N={len}")
        })?;
        // resumed passes from every planned point after a full pass
        for j in 0..len {
            let resume = if j == len - 1 {
                j
            } else {
                rewind_target(len - 1, j, n).unwrap().resume
            };
            let mut m = mem.clone();
            m.rewind(resume).map_err(|e| e.to_string())?;
            m.reset_counters();
            for b in resume..len {
                let l = m.bit_llr(b).unwrap();
                m.commit(b, hard_decision(l)).unwrap();
            }
            let ts: u64 = (resume..len).map(|i| u64::from(ffo(i, n)) + 1).sum();
            let nv: u64 = (resume..len).map(|i| (2u64 << ffo(i, n)) - 1).sum();
            let got = m.counters();
            ensure(got.time_steps == ts && resume_cost(resume, n) == ts, || {
                format!("resume {resume} N={len}: {} vs {ts}", got.time_steps)
            })?;
            ensure(got.node_visits == nv && node_visit_cost(resume, n) == nv, || {
                format!("resume {resume} N={len} node visits")
            })?;
        }
    }
    Ok("n = 1..10, every resume point".into())
}

// ---------------------------------------------------------------- 5-7

fn sp_config(rewind: Rewind, grid: &[f64], min_errors: u64, max_frames: u64) -> CampaignConfig {
    CampaignConfig {
        decoder: DecoderChoice::SclSp { list: 8, t_max: 8 },
        rewind,
        ebn0_db: grid.to_vec(),
        min_errors,
        max_frames,
        seed: 20_240_601,
        workers: std::thread::available_parallelism().map_or(1, |p| p.get()),
        batch: 500,
    }
}

fn fer_seed_equality() -> Verdict {
    let spec = construct(512, 256, Some(Crc::CRC12_C06), 2.0).unwrap();
    let frames = env_frames(10_000);
    let grid = [1.5, 2.0, 2.5];
    let on = run_campaign(&spec, &sp_config(Rewind::Partial, &grid, u64::MAX, frames)).unwrap();
    let off = run_campaign(&spec, &sp_config(Rewind::Restart, &grid, u64::MAX, frames)).unwrap();
    let mut detail = Vec::new();
    for (a, b) in on.records.iter().zip(&off.records) {
        ensure(
            a.frames == b.frames && a.frame_errors == b.frame_errors && a.avg_attempts == b.avg_attempts,
            || format!("{} dB: with {a:?} without {b:?}", a.ebn0_db),
        )?;
        detail.push(format!("{} dB {}/{}", a.ebn0_db, a.frame_errors, a.frames));
    }
    ensure(on.records.iter().any(|r| r.frame_errors > 0), || {
        "no frame errors observed".into()
    })?;
    Ok(detail.join(", "))
}

struct Curve {
    label: &'static str,
    campaign: Campaign,
}

fn savings_curves() -> Vec<Curve> {
    let mut out = Vec::new();
    for (label, k, lo) in [
        ("R=1/4", 128usize, 1.0f64),
        ("R=1/2", 256, 1.25),
        ("R=3/4", 388, 2.0),
    ] {
        let spec = construct(512, k, Some(Crc::CRC12_C06), 2.0).unwrap();
        let grid: Vec<f64> = (0..9).map(|s| lo + 0.25 * f64::from(s)).collect();
        let campaign = run_campaign(&spec, &sp_config(Rewind::Partial, &grid, 100, 20_000)).unwrap();
        out.push(Curve { label, campaign });
    }
    out
}

/// `avg_ts_add` at FER = 1e-2, interpolated linearly against log10(FER).
fn add_at_target(c: &Campaign) -> Option<(f64, f64)> {
    let r = &c.records;
    let target = -2.0f64;
    for w in r.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.fer >= 1e-2 && b.fer <= 1e-2 && b.fer > 0.0 {
            let (la, lb) = (a.fer.log10(), b.fer.log10());
            let t = if la == lb { 0.0 } else { (la - target) / (la - lb) };
            let snr = a.ebn0_db + t * (b.ebn0_db - a.ebn0_db);
            let add = a.avg_time_steps_add + t * (b.avg_time_steps_add - a.avg_time_steps_add);
            return Some((snr, add));
        }
    }
    None
}

fn complexity_savings(curves: &[Curve]) -> Verdict {
    let full = 1022.0;
    let mut pts = Vec::new();
    for c in curves {
        let (snr, add) =
            add_at_target(&c.campaign).ok_or_else(|| format!("{}: FER 1e-2 not bracketed", c.label))?;
        pts.push((c.label, snr, add));
    }
    let detail = pts
        .iter()
        .map(|(l, s, a)| format!("{l}: {a:.0} @ {s:.2} dB ({:.0}% cut)", 100.0 * (1.0 - a / full)))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(pts[0].2 <= 700.0, || format!("R=1/4 above 700: {detail}"))?;
    ensure(pts[1].2 <= 850.0, || format!("R=1/2 above 850: {detail}"))?;
    // savings grow as the rate drops: 3/4 < 1/2 < 1/4
    ensure(pts[0].2 < pts[1].2 && pts[1].2 < pts[2].2, || {
        format!("savings not monotone: {detail}")
    })?;
    Ok(detail)
}

fn high_snr_convergence(curves: &[Curve]) -> Verdict {
    let full = 1022.0;
    let mut detail = Vec::new();
    for c in curves {
        let last = c.campaign.records.last().unwrap();
        let dev = (last.avg_time_steps_all - full).abs() / full;
        ensure(dev <= 0.01, || {
            format!(
                "{}: {:.1} at {} dB",
                c.label, last.avg_time_steps_all, last.ebn0_db
            )
        })?;
        detail.push(format!(
            "{}: {:.1} at {} dB",
            c.label, last.avg_time_steps_all, last.ebn0_db
        ));
    }
    Ok(detail.join(", "))
}

// ---------------------------------------------------------------- 8

fn noiseless_round_trip() -> Verdict {
    let spec = construct(512, 256, Some(Crc::CRC12_C06), 2.0).unwrap();
    let choices = [
        DecoderChoice::Sc,
        DecoderChoice::ScGenie,
        DecoderChoice::ScFlip { t_max: 8 },
        DecoderChoice::Scl { list: 8 },
        DecoderChoice::SclSp { list: 8, t_max: 8 },
    ];
    let mut decoders: Vec<_> = choices
        .iter()
        .flat_map(|&c| [Rewind::Partial, Rewind::Restart].map(move |r| (c, r)))
        .map(|(c, r)| polar_rewind::sim::AnyDecoder::new(&spec, c, r).unwrap())
        .collect();
    for trial in 0..1000u64 {
        let mut rng = frame_rng(900, 0, trial);
        let payload: Vec<u8> = (0..spec.k()).map(|_| rng.gen_range(0..2)).collect();
        let frame = spec.frame(&payload).unwrap();
        let ch = transmit_with(&frame.x, 1e-3, &mut rng);
        for (d, name) in decoders
            .iter_mut()
            .zip(choices.iter().flat_map(|c| [c.name(); 2]))
        {
            let out = d.decode(&ch, Some(&frame.u)).unwrap();
            ensure(out.payload == payload && out.success && out.attempts == 1, || {
                format!("{name} trial {trial}")
            })?;
        }
        let genie = sc_decode_genie(&spec, &ch, &frame.u).unwrap();
        ensure(genie.decisions == frame.u, || format!("genie trial {trial}"))?;
    }
    Ok(format!("{} decoders x 1000 trials", decoders.len()))
}

// ---------------------------------------------------------------- driver

fn report(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = f();
    let took = start.elapsed();
    let verdict = match (verdict, limit) {
        (Ok(d), Some(l)) if took > l => Err(format!("{d}; took {took:.1?}, limit {l:?}")),
        (v, _) => v,
    };
    match &verdict {
        Ok(d) => println!("PASS {id} {name}: {d} [{took:.1?}]"),
        Err(e) => println!("FAIL {id} {name}: {e} [{took:.1?}]"),
    }
    verdict.is_ok()
}

fn main() {
    let mut ok = true;
    ok &= report(1, "index algebra", Some(Duration::from_secs(10)), index_algebra);
    ok &= report(2, "worked examples", None, worked_examples);
    ok &= report(
        3,
        "rewind transparency",
        Some(Duration::from_secs(300)),
        transparency,
    );
    ok &= report(4, "counter identities", None, counter_identities);
    ok &= report(5, "FER seed equality", None, fer_seed_equality);
    let curves = savings_curves();
    ok &= report(6, "complexity savings", None, || complexity_savings(&curves));
    ok &= report(7, "high-SNR convergence", None, || high_snr_convergence(&curves));
    ok &= report(8, "noiseless round trip", None, noiseless_round_trip);
    if !ok {
        std::process::exit(1);
    }
}
