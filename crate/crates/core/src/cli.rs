//! Command-line front end.
//!
//! Exit codes: 0 holds or clean, 1 usage or input error, 2 violation or
//! mismatch, 3 hypothesis not met. Stdout carries only JSON or JSONL and
//! diagnostics go to stderr.

use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constructions::{self, Construction, Family};
use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, Subgroup};
use crate::literal::{parse_element, parse_set};
use crate::restricted::{check_restricted, TauMap};
use crate::search::{self, Finding, FindingKind, Goal, Mode, ScanJob, ScanOptions};
use crate::set::GroupSet;
use crate::theorems::{self, Pair, TheoremId, Verdict};
use crate::witness::{self, Witness, WitnessSearch};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;
pub const EXIT_NOT_MET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "popsum", version, about = "Exact t-popular sumset engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one checker on one instance and print its report.
    Check(CheckArgs),
    /// Scan a job and stream findings as JSONL.
    Scan(ScanArgs),
    /// Generate an extremal family instance.
    Construct(ConstructArgs),
    /// Restricted sumset bounds for one pair.
    Restricted(RestrictedArgs),
    /// Exhaustive tightness hunt.
    Hunt(HuntArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    group: String,
    #[arg(long = "A", allow_hyphen_values = true)]
    a: String,
    #[arg(long = "B", allow_hyphen_values = true)]
    b: String,
    #[arg(long)]
    t: Option<u32>,
    /// pollard | kneser | cd | hs | new | mainprop | conjecture | pigeonhole | multiplicity
    #[arg(long)]
    theorem: String,
    /// Rational `p/q` for mainprop.
    #[arg(long, default_value = "0")]
    alpha: String,
    #[arg(long = "a-prime")]
    a_prime: Option<String>,
    #[arg(long = "b-prime")]
    b_prime: Option<String>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Comma list; `Z2..Z10` expands to cyclic groups.
    #[arg(long, default_value = "")]
    groups: String,
    /// `2`, `2,3` or `2..3`.
    #[arg(long, default_value = "2")]
    t: String,
    /// exhaustive | random | list
    #[arg(long, default_value = "exhaustive")]
    mode: String,
    /// verify_all | hunt_tightness | hunt_conjecture_violation
    #[arg(long, default_value = "verify_all")]
    goal: String,
    #[arg(long, default_value_t = 0)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// List mode: JSON `[[[a..],[b..]], ...]`.
    #[arg(long)]
    pairs: Option<String>,
    #[arg(long, env = "POPSUM_WORKERS", default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from an existing checkpoint.
    #[arg(long)]
    resume: bool,
    /// Stop after this many work units.
    #[arg(long = "stop-after")]
    stop_after: Option<u64>,
    #[arg(long, default_value_t = 256)]
    batch: u64,
    /// Findings go here instead of stdout; the summary still goes to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = search::DEFAULT_EXHAUSTIVE_CAP)]
    cap: usize,
    #[arg(long = "no-normalize")]
    no_normalize: bool,
    #[arg(long = "min-size", default_value_t = 1)]
    min_size: usize,
    #[arg(long = "max-size")]
    max_size: Option<usize>,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    /// minus_self | kneser_pair | ap_cosets | recursive_1 | recursive_2
    #[arg(long)]
    family: String,
    #[arg(long)]
    group: String,
    #[arg(long = "H")]
    h: String,
    #[arg(long)]
    t: Option<u32>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    u: Option<u32>,
    #[arg(long = "nA")]
    n_a: Option<usize>,
    #[arg(long = "nB")]
    n_b: Option<usize>,
    /// Recursive families: the inner pair. Defaults to the first
    /// non-degenerate one found by exhaustive search.
    #[arg(long = "A0")]
    a0: Option<String>,
    #[arg(long = "B0")]
    b0: Option<String>,
}

#[derive(Args, Debug)]
struct RestrictedArgs {
    #[arg(long)]
    group: String,
    #[arg(long = "A")]
    a: String,
    #[arg(long = "B")]
    b: String,
    /// `identity` or JSON pairs `[[a, tau(a)], ...]` using element literals.
    #[arg(long, conflicts_with = "tau_random")]
    tau: Option<String>,
    #[arg(long = "tau-random")]
    tau_random: bool,
    #[arg(long, default_value_t = 1)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct HuntArgs {
    #[arg(long, default_value = "")]
    groups: String,
    #[arg(long)]
    t: u32,
    #[arg(long, env = "POPSUM_WORKERS", default_value_t = 1)]
    workers: usize,
}

/// Parses `args` (without the program name) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("popsum")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_ERROR
                }
            };
        }
    };
    let result = match cli.command {
        Command::Check(a) => cmd_check(&a, out),
        Command::Scan(a) => cmd_scan(&a, out, err),
        Command::Construct(a) => cmd_construct(&a, out),
        Command::Restricted(a) => cmd_restricted(&a, out),
        Command::Hunt(a) => cmd_hunt(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn exit_for(v: Verdict) -> i32 {
    match v {
        Verdict::Holds => EXIT_OK,
        Verdict::Violated => EXIT_VIOLATED,
        Verdict::HypothesisNotMet => EXIT_NOT_MET,
    }
}

fn emit<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string(value)?)?;
    Ok(())
}

/// `Z2..Z10,Z2xZ2` → `["Z2", ..., "Z10", "Z2xZ2"]`.
pub fn parse_group_list(s: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, hi)) = tok.split_once("..") {
            let num = |x: &str| {
                x.trim()
                    .trim_start_matches(['Z', 'z'])
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad group range {tok:?}")))
            };
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo < 1 || lo > hi {
                return Err(Error::Parse(format!("empty group range {tok:?}")));
            }
            out.extend((lo..=hi).map(|n| format!("Z{n}")));
        } else {
            FiniteAbelianGroup::parse(tok)?;
            out.push(tok.to_string());
        }
    }
    Ok(out)
}

/// `2`, `2,3` or `2..4`.
pub fn parse_t_list(s: &str) -> Result<Vec<u32>> {
    let bad = || Error::Parse(format!("bad t list {s:?}"));
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, hi)) = tok.split_once("..") {
            let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
            out.extend(lo..=hi);
        } else {
            out.push(tok.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

fn need_t(t: Option<u32>) -> Result<u32> {
    t.ok_or_else(|| Error::InvalidParameter("--t is required for this theorem".into()))
}

fn given_witness(group: &Arc<FiniteAbelianGroup>, args: &CheckArgs) -> Result<Option<Witness>> {
    match (&args.a_prime, &args.b_prime) {
        (Some(a), Some(b)) => Ok(Some(Witness { a_prime: parse_set(group, a)?, b_prime: parse_set(group, b)? })),
        (None, None) => Ok(None),
        _ => Err(Error::InvalidParameter("--a-prime and --b-prime go together".into())),
    }
}

fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let group = FiniteAbelianGroup::parse(&args.group)?;
    let a = parse_set(&group, &args.a)?;
    let b = parse_set(&group, &args.b)?;
    let theorem: TheoremId = serde_json::from_value(serde_json::Value::String(args.theorem.clone()))
        .map_err(|_| Error::Parse(format!("unknown theorem {:?}", args.theorem)))?;
    let alpha: Ratio<i64> = args.alpha.parse().map_err(|_| Error::Parse(format!("bad --alpha {:?}", args.alpha)))?;
    let given = given_witness(&group, args)?;
    let pair = Pair::new(&a, &b)?;
    let mut no_witness = None;
    let mut used = given.clone();
    let report = match theorem {
        TheoremId::Pollard => theorems::check_pollard_on(&pair, need_t(args.t)?)?,
        TheoremId::Kneser => theorems::check_kneser_on(&pair)?,
        TheoremId::CauchyDavenport => theorems::check_cauchy_davenport_on(&pair)?,
        TheoremId::Pigeonhole => theorems::check_pigeonhole_on(&pair)?,
        TheoremId::Multiplicity => theorems::check_multiplicity_on(&pair)?,
        TheoremId::HamidouneSerra => theorems::check_hamidoune_serra_on(&pair, need_t(args.t)?)?,
        TheoremId::New => {
            let t = need_t(args.t)?;
            if used.is_none() && t >= 2 && pair.new_hypothesis(t) && !pair.profile().popular_sumset(t).is_empty() {
                match witness::find_witness_on(&pair, t)? {
                    WitnessSearch::Found { witness, .. } => used = Some(witness),
                    WitnessSearch::NotFound(nw) => no_witness = Some(nw),
                }
            }
            theorems::check_theorem_new_on(&pair, t, used.as_ref())?
        }
        TheoremId::MainProp => {
            let t = need_t(args.t)?;
            if used.is_none() {
                if let WitnessSearch::Found { witness, .. } = witness::find_witness_on(&pair, t)? {
                    used = Some(witness);
                }
            }
            let w = used.as_ref().ok_or_else(|| Error::Precondition("no structural witness for mainprop".into()))?;
            theorems::check_mainprop_items_on(&pair, t, &w.a_prime, &w.b_prime, alpha)?
        }
        TheoremId::Conjecture => {
            let t = need_t(args.t)?;
            if used.is_none() && pair.popular_sum(t) < pair.pollard_target(t) {
                used = witness::find_conjecture_witness_on(&pair, t)?;
            }
            theorems::check_conjecture_on(&pair, t, used.as_ref())?
        }
        TheoremId::Lev | TheoremId::RestrictedNew => {
            return Err(Error::InvalidParameter("use the restricted subcommand".into()));
        }
    };
    let code = exit_for(report.verdict);
    if report.verdict == Verdict::Violated {
        let mut f = Finding::for_pair(FindingKind::Violation, &pair, report.t, None);
        f.witness = report.witness.clone();
        if let Some(w) = &used {
            f.a_prime = Some(w.a_prime.to_indices());
            f.b_prime = Some(w.b_prime.to_indices());
        }
        if theorem == TheoremId::MainProp {
            f.alpha = Some(args.alpha.clone());
        }
        f.no_witness = no_witness;
        f.reports.push(report);
        emit(out, &f)?;
    } else {
        emit(out, &report)?;
    }
    Ok(code)
}

fn parse_pairs(s: &str) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    serde_json::from_str(s).map_err(|e| Error::Parse(format!("--pairs: {e}")))
}

fn cmd_scan(args: &ScanArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let groups = parse_group_list(&args.groups)?;
    let ts = parse_t_list(&args.t)?;
    let mode = match args.mode.as_str() {
        "exhaustive" => Mode::Exhaustive,
        "random" => Mode::Random { seed: args.seed, samples: args.samples },
        "list" => Mode::List {
            pairs: parse_pairs(args.pairs.as_deref().ok_or_else(|| Error::InvalidParameter("list mode needs --pairs".into()))?)?,
        },
        m => return Err(Error::Parse(format!("unknown mode {m:?}"))),
    };
    let job = ScanJob {
        groups,
        ts,
        normalize: matches!(mode, Mode::Exhaustive) && !args.no_normalize,
        mode,
        goal: Goal::parse(&args.goal)?,
        min_size: args.min_size,
        max_size: args.max_size,
        cap: args.cap,
    };
    search::unit_count(&job)?;
    let resuming = match &args.checkpoint {
        Some(p) if p.exists() => {
            if !args.resume {
                return Err(Error::Checkpoint(format!("{} exists; pass --resume to continue it", p.display())));
            }
            true
        }
        _ => false,
    };
    let opts = ScanOptions {
        workers: args.workers.max(1),
        batch: args.batch.max(1),
        checkpoint: args.checkpoint.clone(),
        stop_after: args.stop_after,
    };
    let mut file = match &args.output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let f = OpenOptions::new().create(true).write(true).append(resuming).truncate(!resuming).open(path)?;
            Some(BufWriter::new(f))
        }
        None => None,
    };
    let summary = {
        let sink: &mut dyn Write = match file.as_mut() {
            Some(f) => f,
            None => &mut *out,
        };
        search::scan(&job, &opts, &mut |f| emit(sink, f))?
    };
    if let Some(mut f) = file {
        f.flush()?;
    }
    emit(out, &summary)?;
    if !summary.complete {
        let _ = writeln!(err, "stopped at unit {} of {}", summary.cursor, summary.units);
    }
    Ok(if summary.violations() > 0 { EXIT_VIOLATED } else { EXIT_OK })
}

fn need<T>(x: Option<T>, flag: &str, family: Family) -> Result<T> {
    x.ok_or_else(|| Error::InvalidParameter(format!("{} needs --{flag}", family.name())))
}

/// The first inner pair other than `(K, K)`, if one exists.
fn default_inner(k: &Subgroup, thr: u32) -> Result<(GroupSet, GroupSet)> {
    let pairs = constructions::inner_pairs(k, thr);
    let degenerate = (k.members().clone(), k.members().clone());
    pairs
        .iter()
        .find(|p| **p != degenerate)
        .or_else(|| pairs.first())
        .cloned()
        .ok_or_else(|| Error::Precondition("no inner pair inside K".into()))
}

fn cmd_construct(args: &ConstructArgs, out: &mut dyn Write) -> Result<i32> {
    let family = Family::parse(&args.family)?;
    let group = FiniteAbelianGroup::parse(&args.group)?;
    let h = Subgroup::from_set(parse_set(&group, &args.h)?)?;
    let inner = |base: &Construction, thr: u32| -> Result<(GroupSet, GroupSet)> {
        match (&args.a0, &args.b0) {
            (Some(a0), Some(b0)) => Ok((parse_set(&group, a0)?, parse_set(&group, b0)?)),
            (None, None) => default_inner(&base.h, thr),
            _ => Err(Error::InvalidParameter("--A0 and --B0 go together".into())),
        }
    };
    let c = match family {
        Family::MinusSelf => constructions::gen_minus_self(&group, &h, need(args.s, "s", family)?, need(args.u, "u", family)?)?,
        Family::KneserPair => constructions::gen_kneser_pair(
            &group,
            &h,
            need(args.t, "t", family)?,
            need(args.n_a, "nA", family)?,
            need(args.n_b, "nB", family)?,
        )?,
        Family::ApCosets => constructions::gen_ap_cosets(
            &group,
            &h,
            need(args.s, "s", family)?,
            need(args.u, "u", family)?,
            need(args.n_a, "nA", family)?,
            need(args.n_b, "nB", family)?,
        )?,
        Family::Recursive1 => {
            let u = need(args.u, "u", family)?;
            let base = constructions::gen_minus_self(&group, &h, need(args.s, "s", family)?, u)?;
            let (a0, b0) = inner(&base, u)?;
            constructions::gen_recursive_1(&base, &a0, &b0)?
        }
        Family::Recursive2 => {
            let t = need(args.t, "t", family)?;
            let base = constructions::gen_kneser_pair(
                &group,
                &h,
                t,
                need(args.n_a, "nA", family)?,
                need(args.n_b, "nB", family)?,
            )?;
            let (a0, b0) = inner(&base, t)?;
            constructions::gen_recursive_2(&base, &a0, &b0)?
        }
    };
    let report = c.report();
    emit(out, &report)?;
    Ok(if report.matches { EXIT_OK } else { EXIT_VIOLATED })
}

fn parse_tau(group: &Arc<FiniteAbelianGroup>, a: &GroupSet, text: &str) -> Result<TauMap> {
    if text.trim() == "identity" {
        return Ok(TauMap::identity(a));
    }
    let raw: Vec<(serde_json::Value, serde_json::Value)> =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("--tau: {e}")))?;
    let lit = |v: &serde_json::Value| match v {
        serde_json::Value::String(s) => parse_element(group, s),
        other => parse_element(group, &other.to_string()),
    };
    let pairs = raw.iter().map(|(x, y)| Ok((lit(x)?, lit(y)?))).collect::<Result<Vec<_>>>()?;
    TauMap::new(a, &pairs)
}

fn cmd_restricted(args: &RestrictedArgs, out: &mut dyn Write) -> Result<i32> {
    let group = FiniteAbelianGroup::parse(&args.group)?;
    let a = parse_set(&group, &args.a)?;
    let b = parse_set(&group, &args.b)?;
    let reports = if args.tau_random {
        (0..args.samples)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
                rng.set_stream(k);
                let tau = TauMap::random(&a, &mut rng);
                let mut r = check_restricted(&a, &b, &tau)?;
                r.seed = Some(args.seed);
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let tau = parse_tau(&group, &a, args.tau.as_deref().unwrap_or("identity"))?;
        vec![check_restricted(&a, &b, &tau)?]
    };
    for r in &reports {
        emit(out, r)?;
    }
    let verdicts: Vec<Verdict> = reports.iter().map(|r| r.verdict).collect();
    Ok(if verdicts.contains(&Verdict::Violated) {
        EXIT_VIOLATED
    } else if verdicts.contains(&Verdict::HypothesisNotMet) {
        EXIT_NOT_MET
    } else {
        EXIT_OK
    })
}

fn cmd_hunt(args: &HuntArgs, out: &mut dyn Write) -> Result<i32> {
    let groups = parse_group_list(&args.groups)?;
    for f in search::hunt_tightness(&groups, args.t, args.workers.max(1))? {
        emit(out, &f)?;
    }
    Ok(EXIT_OK)
}
