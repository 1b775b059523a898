//! Exhaustive and seeded random scans over `(group, A, B, t)`.
//!
//! A job is cut into work units: one unit per `A` bitmask in exhaustive
//! mode, one per sample in random mode, one per listed pair in list mode.
//! Units are evaluated in parallel and merged back in unit order, so output
//! does not depend on the worker count. The checkpoint cursor is a unit index.

use std::collections::BTreeMap;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::rep_profile;
use crate::constructions::{Construction, ConstructionReport};
use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::set::GroupSet;
use crate::theorems::{self, BoundReport, CosetIndex, Pair, TheoremId, Verdict};
use crate::witness::{self, NoWitnessFound, Witness, WitnessReport, WitnessSearch};
use crate::SCHEMA_VERSION;

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 12;
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Random { seed: u64, samples: u64 },
    /// Explicit pairs, evaluated in every listed group.
    List { pairs: Vec<(Vec<usize>, Vec<usize>)> },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    VerifyAll,
    HuntTightness,
    HuntConjectureViolation,
}

impl Goal {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| Error::Parse(format!("unknown goal {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanJob {
    pub groups: Vec<String>,
    pub ts: Vec<u32>,
    pub mode: Mode,
    pub goal: Goal,
    /// Bounds on both `|A|` and `|B|`.
    pub min_size: usize,
    pub max_size: Option<usize>,
    /// Exhaustive mode only: restrict to `0 ∈ A` and `0 ∈ B`.
    pub normalize: bool,
    pub cap: usize,
}

impl ScanJob {
    pub fn exhaustive(groups: &[&str], ts: &[u32], goal: Goal) -> Self {
        ScanJob {
            groups: groups.iter().map(|s| s.to_string()).collect(),
            ts: ts.to_vec(),
            mode: Mode::Exhaustive,
            goal,
            min_size: 1,
            max_size: None,
            normalize: true,
            cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }

    pub fn random(groups: &[&str], ts: &[u32], goal: Goal, seed: u64, samples: u64) -> Self {
        ScanJob { mode: Mode::Random { seed, samples }, normalize: false, ..Self::exhaustive(groups, ts, goal) }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("job serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    Violation,
    Tightness,
    ConjectureEquality,
    FormulaDiscrepancy,
}

impl FindingKind {
    pub fn name(self) -> &'static str {
        match self {
            FindingKind::Violation => "violation",
            FindingKind::Tightness => "tightness",
            FindingKind::ConjectureEquality => "conjecture_equality",
            FindingKind::FormulaDiscrepancy => "formula_discrepancy",
        }
    }
}

/// One reportable instance, self-contained enough to replay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub schema: u32,
    pub finding_kind: FindingKind,
    pub group: String,
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    pub mask_a: String,
    pub mask_b: String,
    pub t: Option<u32>,
    pub seed: Option<u64>,
    pub profile: Vec<u32>,
    pub reports: Vec<BoundReport>,
    pub witness: Option<WitnessReport>,
    /// The `(A', B')` the reports were evaluated with, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_prime: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_prime: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_witness: Option<NoWitnessFound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Finding {
    pub fn for_pair(kind: FindingKind, pair: &Pair, t: Option<u32>, seed: Option<u64>) -> Self {
        Finding {
            schema: SCHEMA_VERSION,
            finding_kind: kind,
            group: pair.a.group().spec(),
            a: pair.a.to_indices(),
            b: pair.b.to_indices(),
            mask_a: pair.a.to_hex(),
            mask_b: pair.b.to_hex(),
            t,
            seed,
            profile: pair.profile().counts().to_vec(),
            reports: Vec::new(),
            witness: None,
            a_prime: None,
            b_prime: None,
            alpha: None,
            no_witness: None,
            construction: None,
            note: None,
        }
    }

    fn with_witness(mut self, w: &Witness) -> Self {
        self.a_prime = Some(w.a_prime.to_indices());
        self.b_prime = Some(w.b_prime.to_indices());
        self
    }

    /// A construction whose printed closed form disagrees with direct computation.
    pub fn formula_discrepancy(c: &Construction) -> Option<Self> {
        let report = c.report();
        let d = report.discrepancy.as_ref()?;
        if d.difference == 0 {
            return None;
        }
        let pair = Pair::new(&c.a, &c.b).ok()?;
        let mut f = Finding::for_pair(FindingKind::FormulaDiscrepancy, &pair, Some(c.t()), None);
        f.note = Some(format!(
            "printed {} = {} but direct sum = {} (off by {})",
            d.printed_form, d.printed_value, d.direct_value, d.difference
        ));
        f.construction = Some(report);
        Some(f)
    }
}

/// Named additive counters; merging is addition, so any split order gives
/// the same totals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tally(pub BTreeMap<String, u64>);

impl Tally {
    pub fn get(&self, key: &str) -> u64 {
        self.0.get(key).copied().unwrap_or(0)
    }

    pub fn merge(&mut self, other: &Tally) {
        for (k, v) in &other.0 {
            *self.0.entry(k.clone()).or_insert(0) += v;
        }
    }
}

/// Fixed-slot counters used on the hot path, converted to a [`Tally`] per unit.
#[derive(Clone)]
struct Slots([u64; SLOT_NAMES.len()]);

const SLOT_NAMES: [&str; 36] = [
    "pairs",
    "instances",
    "kneser.holds",
    "kneser.violated",
    "kneser.hypothesis_not_met",
    "pigeonhole.holds",
    "pigeonhole.violated",
    "pigeonhole.hypothesis_not_met",
    "multiplicity.holds",
    "multiplicity.violated",
    "multiplicity.hypothesis_not_met",
    "cd.holds",
    "cd.violated",
    "cd.hypothesis_not_met",
    "pollard.holds",
    "pollard.violated",
    "pollard.hypothesis_not_met",
    "hs.holds",
    "hs.violated",
    "hs.hypothesis_not_met",
    "new.holds",
    "new.violated",
    "new.hypothesis_not_met",
    "mainprop.holds",
    "mainprop.violated",
    "mainprop.hypothesis_not_met",
    "conjecture.holds",
    "conjecture.violated",
    "conjecture.hypothesis_not_met",
    "witness.found",
    "witness.not_found",
    "conjecture.equality",
    "conjecture.no_u_witness",
    "conjecture.clause_failed",
    "tightness.candidates",
    "tightness.found",
];

#[derive(Copy, Clone)]
enum Slot {
    Pairs = 0,
    Instances = 1,
    Kneser = 2,
    Pigeonhole = 5,
    Multiplicity = 8,
    Cd = 11,
    Pollard = 14,
    Hs = 17,
    New = 20,
    MainProp = 23,
    Conjecture = 26,
    WitnessFound = 29,
    WitnessNotFound = 30,
    ConjectureEquality = 31,
    ConjectureNoUWitness = 32,
    ConjectureClauseFailed = 33,
    TightnessCandidates = 34,
    TightnessFound = 35,
}

impl Slots {
    fn new() -> Self {
        Slots([0; SLOT_NAMES.len()])
    }

    fn bump(&mut self, s: Slot) {
        self.0[s as usize] += 1;
    }

    fn verdict(&mut self, base: Slot, v: Verdict) {
        let off = match v {
            Verdict::Holds => 0,
            Verdict::Violated => 1,
            Verdict::HypothesisNotMet => 2,
        };
        self.0[base as usize + off] += 1;
    }

    fn into_tally(self) -> Tally {
        Tally(
            SLOT_NAMES
                .iter()
                .zip(self.0)
                .filter(|&(_, v)| v > 0)
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        )
    }
}

struct GroupCtx {
    group: Arc<FiniteAbelianGroup>,
    index: CosetIndex,
    prime: Option<usize>,
    /// Exhaustive mode: the admissible `B` masks.
    b_masks: Vec<u64>,
    units: u64,
}

struct Plan {
    ctxs: Vec<GroupCtx>,
    offsets: Vec<u64>,
    total: u64,
}

fn size_ok(job: &ScanJob, n: usize, len: usize) -> bool {
    len >= job.min_size.max(1) && len <= job.max_size.unwrap_or(n)
}

fn plan(job: &ScanJob) -> Result<Plan> {
    if job.ts.iter().any(|&t| t < 1) {
        return Err(Error::InvalidParameter("t must be >= 1".into()));
    }
    if job.goal == Goal::HuntTightness && job.ts.iter().any(|t| !(2..=4).contains(t)) {
        return Err(Error::InvalidParameter("tightness hunting is defined for t in [2, 4]".into()));
    }
    let mut ctxs = Vec::new();
    let mut offsets = Vec::new();
    let mut total = 0u64;
    for spec in &job.groups {
        let group = FiniteAbelianGroup::parse(spec)?;
        let n = group.order();
        let (units, b_masks) = match &job.mode {
            Mode::Exhaustive => {
                if n > job.cap || n > 63 {
                    return Err(Error::ResourceLimit(format!(
                        "exhaustive mode is capped at |G| <= {}, {} has order {n}",
                        job.cap.min(63),
                        spec
                    )));
                }
                let all = (1u64..(1u64 << n)).filter(|m| !job.normalize || m & 1 == 1);
                let b: Vec<u64> = all.filter(|m| size_ok(job, n, m.count_ones() as usize)).collect();
                let units = if job.normalize { 1u64 << (n - 1) } else { (1u64 << n) - 1 };
                (units, b)
            }
            Mode::Random { samples, .. } => (*samples, Vec::new()),
            Mode::List { pairs } => (pairs.len() as u64, Vec::new()),
        };
        offsets.push(total);
        total += units;
        ctxs.push(GroupCtx { index: CosetIndex::new(&group)?, prime: group.is_cyclic_prime(), group, b_masks, units });
    }
    Ok(Plan { ctxs, offsets, total })
}

#[derive(Default)]
struct UnitResult {
    findings: Vec<Finding>,
    tally: Tally,
}

fn random_set(group: &Arc<FiniteAbelianGroup>, rng: &mut ChaCha8Rng) -> GroupSet {
    let n = group.order();
    let words = n.div_ceil(64);
    let mut w: Vec<u64> = (0..words).map(|_| rng.gen::<u64>()).collect();
    if n % 64 != 0 {
        w[words - 1] &= (1u64 << (n % 64)) - 1;
    }
    GroupSet::from_words(group, w).expect("masked to the group order")
}

fn eval_unit(plan: &Plan, job: &ScanJob, unit: u64) -> Result<UnitResult> {
    let gi = plan.offsets.partition_point(|&o| o <= unit) - 1;
    let ctx = &plan.ctxs[gi];
    let local = unit - plan.offsets[gi];
    debug_assert!(local < ctx.units);
    let n = ctx.group.order();
    let mut slots = Slots::new();
    let mut findings = Vec::new();
    match &job.mode {
        Mode::Exhaustive => {
            let a_mask = if job.normalize { 2 * local + 1 } else { local + 1 };
            if size_ok(job, n, a_mask.count_ones() as usize) {
                let a = GroupSet::from_mask(&ctx.group, a_mask)?;
                for &bm in &ctx.b_masks {
                    let b = GroupSet::from_mask(&ctx.group, bm)?;
                    eval_pair(ctx, job, a.clone(), b, None, &mut slots, &mut findings)?;
                }
            }
        }
        Mode::Random { seed, .. } => {
            let t_min = job.ts.iter().copied().min().unwrap_or(1) as usize;
            let lo = job.min_size.max(t_min).max(1);
            let hi = job.max_size.unwrap_or(n).min(n);
            if lo <= hi {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (gi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                rng.set_stream(local);
                let mut draw = || loop {
                    let s = random_set(&ctx.group, &mut rng);
                    if (lo..=hi).contains(&s.len()) {
                        break s;
                    }
                };
                let a = draw();
                let b = draw();
                eval_pair(ctx, job, a, b, Some(*seed), &mut slots, &mut findings)?;
            }
        }
        Mode::List { pairs } => {
            let (xa, xb) = &pairs[local as usize];
            let a = GroupSet::from_indices(&ctx.group, xa.iter().copied())?;
            let b = GroupSet::from_indices(&ctx.group, xb.iter().copied())?;
            eval_pair(ctx, job, a, b, None, &mut slots, &mut findings)?;
        }
    }
    Ok(UnitResult { findings, tally: slots.into_tally() })
}

fn violation(pair: &Pair, t: Option<u32>, seed: Option<u64>, report: BoundReport) -> Finding {
    let mut f = Finding::for_pair(FindingKind::Violation, pair, t, seed);
    f.reports.push(report);
    f
}

fn eval_pair(
    ctx: &GroupCtx,
    job: &ScanJob,
    a: GroupSet,
    b: GroupSet,
    seed: Option<u64>,
    slots: &mut Slots,
    findings: &mut Vec<Finding>,
) -> Result<()> {
    let profile = rep_profile(&a, &b);
    let pair = Pair::from_parts(a, b, profile);
    slots.bump(Slot::Pairs);
    match job.goal {
        Goal::VerifyAll => verify_pair(ctx, job, &pair, seed, slots, findings),
        Goal::HuntTightness => tightness_pair(job, &pair, seed, slots, findings),
        Goal::HuntConjectureViolation => conjecture_pair(job, &pair, seed, slots, findings),
    }
}

/// Records a verdict computed from `(lhs, rhs)`; on violation rebuilds the full report.
fn tally_sides(
    slots: &mut Slots,
    findings: &mut Vec<Finding>,
    base: Slot,
    sides: Option<(i64, i64)>,
    pair: &Pair,
    t: Option<u32>,
    seed: Option<u64>,
    report: impl FnOnce() -> Result<BoundReport>,
) -> Result<()> {
    let verdict = match sides {
        None => Verdict::HypothesisNotMet,
        Some((l, r)) => Verdict::from_bool(l >= r),
    };
    slots.verdict(base, verdict);
    if verdict == Verdict::Violated {
        findings.push(violation(pair, t, seed, report()?));
    }
    Ok(())
}

fn verify_pair(
    ctx: &GroupCtx,
    job: &ScanJob,
    pair: &Pair,
    seed: Option<u64>,
    slots: &mut Slots,
    findings: &mut Vec<Finding>,
) -> Result<()> {
    tally_sides(slots, findings, Slot::Kneser, theorems::kneser_sides(pair), pair, None, seed, || {
        theorems::check_kneser_on(pair)
    })?;
    tally_sides(slots, findings, Slot::Pigeonhole, Some(theorems::pigeonhole_sides(pair)), pair, None, seed, || {
        theorems::check_pigeonhole_on(pair)
    })?;
    tally_sides(slots, findings, Slot::Multiplicity, theorems::multiplicity_sides(pair), pair, None, seed, || {
        theorems::check_multiplicity_on(pair)
    })?;
    if let Some(p) = ctx.prime {
        tally_sides(slots, findings, Slot::Cd, theorems::cauchy_davenport_sides(pair, p), pair, None, seed, || {
            theorems::check_cauchy_davenport_on(pair)
        })?;
    }
    for &t in &job.ts {
        if pair.a.len() < t as usize || pair.b.len() < t as usize {
            continue;
        }
        slots.bump(Slot::Instances);
        if let Some(p) = ctx.prime {
            let sides = Some(theorems::pollard_sides(pair, p, t));
            tally_sides(slots, findings, Slot::Pollard, sides, pair, Some(t), seed, || {
                theorems::check_pollard_on(pair, t)
            })?;
        }
        let hs = theorems::hamidoune_serra_sides(pair, t, &ctx.index).map(|(l, r, _)| (l, r));
        tally_sides(slots, findings, Slot::Hs, hs, pair, Some(t), seed, || {
            theorems::check_hamidoune_serra_with(pair, t, &ctx.index)
        })?;

        if t >= 2 && pair.new_hypothesis(t) {
            structure_checks(pair, t, seed, slots, findings)?;
        }
        if pair.popular_sum(t) < pair.pollard_target(t) {
            let rep = theorems::check_conjecture_on(pair, t, None)?;
            slots.verdict(Slot::Conjecture, rep.verdict);
            if rep.lhs == rep.rhs {
                slots.bump(Slot::ConjectureEquality);
            }
            if rep.violated() {
                findings.push(violation(pair, Some(t), seed, rep));
            }
        }
    }
    Ok(())
}

/// Witness search, clause validation and the canonical-witness items.
fn structure_checks(pair: &Pair, t: u32, seed: Option<u64>, slots: &mut Slots, findings: &mut Vec<Finding>) -> Result<()> {
    match witness::find_witness_on(pair, t)? {
        WitnessSearch::Found { witness: w, report } => {
            slots.bump(Slot::WitnessFound);
            slots.verdict(Slot::New, Verdict::from_bool(report.valid));
            if !report.valid {
                let mut f = violation(pair, Some(t), seed, theorems::check_theorem_new_on(pair, t, Some(&w))?);
                f.witness = Some(report.clone());
                findings.push(f.with_witness(&w));
            }
            let items = theorems::check_mainprop_items_on(pair, t, &w.a_prime, &w.b_prime, Ratio::from_integer(0))?;
            slots.verdict(Slot::MainProp, items.verdict);
            if items.verdict != Verdict::Holds {
                let mut f = violation(pair, Some(t), seed, items).with_witness(&w);
                f.alpha = Some("0".into());
                f.witness = Some(report);
                findings.push(f);
            }
        }
        WitnessSearch::NotFound(nw) => {
            slots.bump(Slot::WitnessNotFound);
            slots.verdict(Slot::New, Verdict::Violated);
            let mut f = violation(pair, Some(t), seed, theorems::check_theorem_new_on(pair, t, None)?);
            f.no_witness = Some(nw);
            f.note = Some("hypothesis holds but no structural witness exists".into());
            findings.push(f);
        }
    }
    Ok(())
}

fn tightness_pair(job: &ScanJob, pair: &Pair, seed: Option<u64>, slots: &mut Slots, findings: &mut Vec<Finding>) -> Result<()> {
    for &t in &job.ts {
        if pair.a.len() < t as usize || pair.b.len() < t as usize {
            continue;
        }
        slots.bump(Slot::Instances);
        let (na, nb) = pair.sizes();
        let threshold = t as i64 * (na + nb) + theorems::threshold_new(t as i64)?;
        if pair.popular_sum(t) != threshold {
            continue;
        }
        let target = pair.profile().popular_sumset(t);
        if target.is_empty() {
            continue;
        }
        slots.bump(Slot::TightnessCandidates);
        if witness::exhaustive_search(&pair.a, &pair.b, &target, t, (t - 1) as usize).is_none() {
            slots.bump(Slot::TightnessFound);
            let mut f = Finding::for_pair(FindingKind::Tightness, pair, Some(t), seed);
            f.reports.push(theorems::check_theorem_new_on(pair, t, None)?);
            f.note = Some("sum equals the hypothesis threshold and no (A', B') with at most t-1 removals satisfies the conclusion".into());
            findings.push(f);
        }
    }
    Ok(())
}

fn conjecture_pair(job: &ScanJob, pair: &Pair, seed: Option<u64>, slots: &mut Slots, findings: &mut Vec<Finding>) -> Result<()> {
    for &t in &job.ts {
        if pair.a.len() < t as usize || pair.b.len() < t as usize {
            continue;
        }
        slots.bump(Slot::Instances);
        if pair.popular_sum(t) >= pair.pollard_target(t) {
            continue;
        }
        let w = witness::find_conjecture_witness_on(pair, t)?;
        if w.is_none() {
            slots.bump(Slot::ConjectureNoUWitness);
        }
        let rep = theorems::check_conjecture_on(pair, t, w.as_ref())?;
        slots.verdict(Slot::Conjecture, rep.verdict);
        if rep.clauses.iter().skip(1).any(|c| !c.holds) {
            slots.bump(Slot::ConjectureClauseFailed);
        }
        let equal = rep.lhs == rep.rhs;
        let kind = if rep.violated() {
            Some(FindingKind::Violation)
        } else if equal {
            slots.bump(Slot::ConjectureEquality);
            Some(FindingKind::ConjectureEquality)
        } else {
            None
        };
        if let Some(kind) = kind {
            let mut f = Finding::for_pair(kind, pair, Some(t), seed);
            f.reports.push(rep);
            if let Some(w) = &w {
                f = f.with_witness(w);
            }
            findings.push(f);
        }
    }
    Ok(())
}

/// Evaluates units `range` of `job` with `workers` threads; results come back in unit order.
pub fn scan_range(job: &ScanJob, range: Range<u64>, workers: usize) -> Result<(Vec<Finding>, Tally)> {
    let plan = plan(job)?;
    scan_planned(&plan, job, range, workers)
}

fn scan_planned(plan: &Plan, job: &ScanJob, range: Range<u64>, workers: usize) -> Result<(Vec<Finding>, Tally)> {
    let end = range.end.min(plan.total);
    let start = range.start.min(end);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let results: Vec<Result<UnitResult>> =
        pool.install(|| (start..end).into_par_iter().map(|u| eval_unit(plan, job, u)).collect());
    let mut findings = Vec::new();
    let mut tally = Tally::default();
    for r in results {
        let r = r?;
        findings.extend(r.findings);
        tally.merge(&r.tally);
    }
    Ok((findings, tally))
}

/// Number of work units in `job`.
pub fn unit_count(job: &ScanJob) -> Result<u64> {
    Ok(plan(job)?.total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub schema: u32,
    pub kind: String,
    pub job_hash: String,
    pub units: u64,
    pub cursor: u64,
    pub complete: bool,
    pub counts: Tally,
    pub findings: BTreeMap<String, u64>,
}

impl ScanSummary {
    pub fn violations(&self) -> u64 {
        self.findings.get("violation").copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub job_hash: String,
    pub cursor: u64,
    pub counts: Tally,
    pub findings: BTreeMap<String, u64>,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint version {}", cp.version)));
        }
        Ok(cp)
    }

    /// Writes through a temporary file and a rename.
    pub fn store(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string(self)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub workers: usize,
    /// Units per parallel batch; the checkpoint is written after each one.
    pub batch: u64,
    /// Resume from this file if it exists, and keep it updated.
    pub checkpoint: Option<PathBuf>,
    /// Stop after this many units in this invocation.
    pub stop_after: Option<u64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { workers: 1, batch: 256, checkpoint: None, stop_after: None }
    }
}

/// Runs `job`, streaming findings to `sink` in canonical order.
pub fn scan(job: &ScanJob, opts: &ScanOptions, sink: &mut dyn FnMut(&Finding) -> Result<()>) -> Result<ScanSummary> {
    let plan = plan(job)?;
    let hash = job.hash();
    let mut cp = match &opts.checkpoint {
        Some(path) if path.exists() => {
            let cp = Checkpoint::load(path)?;
            if cp.job_hash != hash {
                return Err(Error::Checkpoint("checkpoint belongs to a different job".into()));
            }
            cp
        }
        _ => Checkpoint { version: CHECKPOINT_VERSION, job_hash: hash.clone(), cursor: 0, counts: Tally::default(), findings: BTreeMap::new() },
    };
    let stop = opts.stop_after.map_or(plan.total, |k| cp.cursor.saturating_add(k).min(plan.total));
    while cp.cursor < stop {
        let end = (cp.cursor + opts.batch.max(1)).min(stop);
        let (findings, tally) = scan_planned(&plan, job, cp.cursor..end, opts.workers)?;
        for f in &findings {
            sink(f)?;
            *cp.findings.entry(f.finding_kind.name().to_string()).or_insert(0) += 1;
        }
        cp.counts.merge(&tally);
        cp.cursor = end;
        if let Some(path) = &opts.checkpoint {
            cp.store(path)?;
        }
    }
    Ok(ScanSummary {
        schema: SCHEMA_VERSION,
        kind: "summary".into(),
        job_hash: hash,
        units: plan.total,
        cursor: cp.cursor,
        complete: cp.cursor >= plan.total,
        counts: cp.counts,
        findings: cp.findings,
    })
}

/// Runs a job to completion and returns JSONL: findings, then the summary.
pub fn scan_to_jsonl(job: &ScanJob, workers: usize) -> Result<String> {
    let mut out = String::new();
    let opts = ScanOptions { workers, ..ScanOptions::default() };
    let summary = scan(job, &opts, &mut |f| {
        out.push_str(&serde_json::to_string(f)?);
        out.push('\n');
        Ok(())
    })?;
    out.push_str(&serde_json::to_string(&summary)?);
    out.push('\n');
    Ok(out)
}

/// Exhaustive tightness hunt over translation-normalized pairs with
/// `|A|, |B| >= t+1`; smaller sets can never carry a witness.
pub fn hunt_tightness(groups: &[String], t: u32, workers: usize) -> Result<Vec<Finding>> {
    if !(2..=4).contains(&t) {
        return Err(Error::InvalidParameter(format!("tightness hunting is defined for t in [2, 4], got {t}")));
    }
    let refs: Vec<&str> = groups.iter().map(|s| s.as_str()).collect();
    let mut job = ScanJob::exhaustive(&refs, &[t], Goal::HuntTightness);
    job.min_size = t as usize + 1;
    let mut out = Vec::new();
    scan(&job, &ScanOptions { workers, ..ScanOptions::default() }, &mut |f| {
        out.push(f.clone());
        Ok(())
    })?;
    Ok(out)
}

fn witness_of(f: &Finding, group: &Arc<FiniteAbelianGroup>) -> Result<Option<Witness>> {
    match (&f.a_prime, &f.b_prime) {
        (Some(a), Some(b)) => Ok(Some(Witness {
            a_prime: GroupSet::from_indices(group, a.iter().copied())?,
            b_prime: GroupSet::from_indices(group, b.iter().copied())?,
        })),
        _ => Ok(None),
    }
}

fn parse_ratio(s: &str) -> Result<Ratio<i64>> {
    s.parse::<Ratio<i64>>().map_err(|_| Error::Parse(format!("bad rational {s:?}")))
}

/// Re-evaluates one report from scratch.
pub fn recheck(report: &BoundReport, witness: Option<&Witness>, alpha: Option<Ratio<i64>>) -> Result<BoundReport> {
    let group = FiniteAbelianGroup::parse(&report.group)?;
    let a = GroupSet::from_indices(&group, report.a.iter().copied())?;
    let b = GroupSet::from_indices(&group, report.b.iter().copied())?;
    let pair = Pair::new(&a, &b)?;
    let t = || report.t.ok_or_else(|| Error::Parse("report needs t".into()));
    match report.theorem {
        TheoremId::Kneser => theorems::check_kneser_on(&pair),
        TheoremId::Pigeonhole => theorems::check_pigeonhole_on(&pair),
        TheoremId::Multiplicity => theorems::check_multiplicity_on(&pair),
        TheoremId::CauchyDavenport => theorems::check_cauchy_davenport_on(&pair),
        TheoremId::Pollard => theorems::check_pollard_on(&pair, t()?),
        TheoremId::HamidouneSerra => theorems::check_hamidoune_serra_on(&pair, t()?),
        TheoremId::New => theorems::check_theorem_new_on(&pair, t()?, witness),
        TheoremId::MainProp => {
            let w = witness.ok_or_else(|| Error::Parse("mainprop report needs a witness".into()))?;
            theorems::check_mainprop_items_on(&pair, t()?, &w.a_prime, &w.b_prime, alpha.unwrap_or(Ratio::from_integer(0)))
        }
        TheoremId::Conjecture => theorems::check_conjecture_on(&pair, t()?, witness),
        TheoremId::Lev | TheoremId::RestrictedNew => {
            Err(Error::InvalidParameter("restricted reports are replayed from their tau".into()))
        }
    }
}

/// Re-derives a finding's verdicts; `true` when everything reproduces.
pub fn replay(f: &Finding) -> Result<bool> {
    let group = FiniteAbelianGroup::parse(&f.group)?;
    let a = GroupSet::from_indices(&group, f.a.iter().copied())?;
    let b = GroupSet::from_indices(&group, f.b.iter().copied())?;
    if a.to_hex() != f.mask_a || b.to_hex() != f.mask_b {
        return Ok(false);
    }
    let pair = Pair::new(&a, &b)?;
    if pair.profile().counts() != f.profile.as_slice() {
        return Ok(false);
    }
    let w = witness_of(f, &group)?;
    let alpha = f.alpha.as_deref().map(parse_ratio).transpose()?;
    for rep in &f.reports {
        if recheck(rep, w.as_ref(), alpha)? != *rep {
            return Ok(false);
        }
    }
    if let (Some(wr), Some(w)) = (&f.witness, &w) {
        let t = f.t.ok_or_else(|| Error::Parse("finding needs t".into()))?;
        if witness::validate_witness_on(&pair, t, &w.a_prime, &w.b_prime)? != *wr {
            return Ok(false);
        }
    }
    match f.finding_kind {
        FindingKind::Tightness => {
            let t = f.t.ok_or_else(|| Error::Parse("finding needs t".into()))?;
            let (na, nb) = pair.sizes();
            let threshold = t as i64 * (na + nb) + theorems::threshold_new(t as i64)?;
            let target = pair.profile().popular_sumset(t);
            Ok(pair.popular_sum(t) == threshold && witness::exhaustive_search(&a, &b, &target, t, (t - 1) as usize).is_none())
        }
        FindingKind::Violation if f.no_witness.is_some() => {
            let t = f.t.ok_or_else(|| Error::Parse("finding needs t".into()))?;
            Ok(matches!(witness::find_witness_on(&pair, t)?, WitnessSearch::NotFound(ref nw) if Some(nw) == f.no_witness.as_ref()))
        }
        FindingKind::FormulaDiscrepancy => {
            let c = f.construction.as_ref().ok_or_else(|| Error::Parse("discrepancy needs a construction".into()))?;
            Ok(Construction::from_spec(&c.spec)?.report() == *c)
        }
        _ => Ok(true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_verify_clean() {
        let job = ScanJob::exhaustive(&["Z2", "Z3", "Z5", "Z7"], &[2], Goal::VerifyAll);
        let (findings, tally) = scan_range(&job, 0..u64::MAX, 1).unwrap();
        assert!(findings.is_empty(), "{findings:?}");
        assert!(tally.get("pollard.holds") > 0);
        assert_eq!(tally.get("pollard.violated"), 0);
        let pairs: u64 = [2u64, 3, 5, 7].iter().map(|n| (1u64 << (n - 1)).pow(2)).sum();
        assert_eq!(tally.get("pairs"), pairs);
    }

    #[test]
    fn worked_instances_reproduce() {
        let mut job = ScanJob::exhaustive(&["Z12"], &[2], Goal::VerifyAll);
        job.mode = Mode::List {
            pairs: vec![(vec![0, 1, 4, 5, 8, 9], vec![0, 4, 8]), (vec![0, 1, 2, 4, 5, 8, 9], vec![0, 4, 8])],
        };
        let (findings, tally) = scan_range(&job, 0..2, 1).unwrap();
        assert!(findings.is_empty());
        assert_eq!(tally.get("witness.found"), 2);
        assert_eq!(tally.get("mainprop.holds"), 2);
    }

    #[test]
    fn empty_random_job() {
        let job = ScanJob::random(&["Z12"], &[2], Goal::VerifyAll, 1, 0);
        let out = scan_to_jsonl(&job, 1).unwrap();
        assert_eq!(out.lines().count(), 1);
        let s: ScanSummary = serde_json::from_str(out.trim()).unwrap();
        assert!(s.counts.0.is_empty() && s.complete);
    }

    #[test]
    fn cap_and_t_range() {
        let job = ScanJob::exhaustive(&["Z20"], &[2], Goal::VerifyAll);
        assert!(matches!(unit_count(&job), Err(Error::ResourceLimit(_))));
        assert!(hunt_tightness(&["Z5".into()], 5, 1).is_err());
        assert!(hunt_tightness(&[], 2, 1).unwrap().is_empty());
    }

    #[test]
    fn worker_count_and_split_do_not_matter() {
        let job = ScanJob::random(&["Z9", "Z2xZ4"], &[2, 3], Goal::HuntConjectureViolation, 11, 300);
        let a = scan_to_jsonl(&job, 1).unwrap();
        let b = scan_to_jsonl(&job, 4).unwrap();
        assert_eq!(a, b);
        let total = unit_count(&job).unwrap();
        let (f1, t1) = scan_range(&job, 0..137, 2).unwrap();
        let (f2, t2) = scan_range(&job, 137..total, 3).unwrap();
        let (f, t) = scan_range(&job, 0..total, 1).unwrap();
        let mut tt = t1;
        tt.merge(&t2);
        assert_eq!(tt, t);
        assert_eq!([f1, f2].concat(), f);
    }

    #[test]
    fn checkpoint_resume_matches_unsplit() {
        let dir = tempfile::tempdir().unwrap();
        let cp = dir.path().join("job.ckpt");
        let job = ScanJob::exhaustive(&["Z6", "Z2xZ2"], &[2], Goal::HuntConjectureViolation);
        let mut findings = Vec::new();
        let mut opts = ScanOptions { batch: 5, checkpoint: Some(cp.clone()), stop_after: Some(7), ..ScanOptions::default() };
        let first = scan(&job, &opts, &mut |f| {
            findings.push(f.clone());
            Ok(())
        })
        .unwrap();
        assert!(!first.complete);
        assert_eq!(first.cursor, 7);
        opts.stop_after = None;
        let second = scan(&job, &opts, &mut |f| {
            findings.push(f.clone());
            Ok(())
        })
        .unwrap();
        assert!(second.complete);
        let (all, tally) = scan_range(&job, 0..u64::MAX, 1).unwrap();
        assert_eq!(findings, all);
        assert_eq!(second.counts, tally);
        let other = ScanJob::exhaustive(&["Z6"], &[2], Goal::VerifyAll);
        assert!(matches!(scan(&other, &opts, &mut |_| Ok(())), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn findings_replay() {
        let job = ScanJob::exhaustive(&["Z8"], &[3], Goal::HuntConjectureViolation);
        let (findings, _) = scan_range(&job, 0..u64::MAX, 1).unwrap();
        assert!(!findings.is_empty());
        for f in findings.iter().take(50) {
            assert_eq!(f.finding_kind, FindingKind::ConjectureEquality);
            let json = serde_json::to_string(f).unwrap();
            let back: Finding = serde_json::from_str(&json).unwrap();
            assert_eq!(&back, f);
            assert!(replay(&back).unwrap());
        }
        let mut bad = findings[0].clone();
        bad.profile[0] += 1;
        assert!(!replay(&bad).unwrap());
    }
}
