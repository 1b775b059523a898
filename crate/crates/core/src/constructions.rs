//! Generators for the extremal families that sit just below the
//! `t|A|+t|B|-t^2` threshold.
//!
//! Coset progressions are placed along `j*g + H`, `j = 0, 1, ...`, where `g`
//! is chosen by decreasing order in `G/H` and then by index; the first `g`
//! meeting the family's constraints wins.

use std::cmp::Reverse;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{periodic_hull, rep_profile, stabilizer, sumset};
use crate::error::{Error, Result};
use crate::group::{Element, FiniteAbelianGroup, Subgroup};
use crate::set::GroupSet;
use crate::SCHEMA_VERSION;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "minus_self")]
    MinusSelf,
    #[serde(rename = "kneser_pair")]
    KneserPair,
    #[serde(rename = "ap_cosets")]
    ApCosets,
    #[serde(rename = "recursive_1")]
    Recursive1,
    #[serde(rename = "recursive_2")]
    Recursive2,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Parse(format!("unknown family {s:?}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::MinusSelf => "minus_self",
            Family::KneserPair => "kneser_pair",
            Family::ApCosets => "ap_cosets",
            Family::Recursive1 => "recursive_1",
            Family::Recursive2 => "recursive_2",
        }
    }
}

/// A generated instance with everything needed to rebuild it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionSpec {
    pub schema: u32,
    pub family: Family,
    pub group: String,
    /// The subgroup the family is built over (`K` for the recursive ones).
    pub h: Vec<usize>,
    pub t: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_b: Option<usize>,
    /// Step of the coset progression.
    pub generator: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<Vec<usize>>,
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    pub predicted_sum: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Construction {
    pub spec: ConstructionSpec,
    pub a: GroupSet,
    pub b: GroupSet,
    pub h: Subgroup,
}

/// A printed closed form that disagrees with direct computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaDiscrepancy {
    pub printed_form: String,
    pub printed_value: i64,
    pub direct_value: i64,
    pub difference: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub schema: u32,
    pub spec: ConstructionSpec,
    pub direct_sum: i64,
    pub matches: bool,
    /// Whether `sum < t|A|+t|B|-t^2`.
    pub below_threshold: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<FormulaDiscrepancy>,
}

impl Construction {
    pub fn t(&self) -> u32 {
        self.spec.t
    }

    pub fn predicted(&self) -> i64 {
        self.spec.predicted_sum
    }

    pub fn direct_sum(&self) -> i64 {
        rep_profile(&self.a, &self.b).popular_sum(self.t()) as i64
    }

    /// `t|A| + t|B| - t^2`.
    pub fn pollard_target(&self) -> i64 {
        let t = self.t() as i64;
        t * (self.a.len() + self.b.len()) as i64 - t * t
    }

    pub fn report(&self) -> ConstructionReport {
        let direct = self.direct_sum();
        let discrepancy = (self.spec.family == Family::MinusSelf).then(|| {
            let t = self.t() as i64;
            let h = self.h.order() as i64;
            let u = self.spec.u.unwrap() as i64;
            let printed = t * (self.a.len() + self.b.len()) as i64 - u * (h - u);
            FormulaDiscrepancy {
                printed_form: "t|A|+t|B|-u(|H|-u)".into(),
                printed_value: printed,
                direct_value: direct,
                difference: printed - direct,
            }
        });
        ConstructionReport {
            schema: SCHEMA_VERSION,
            spec: self.spec.clone(),
            direct_sum: direct,
            matches: direct == self.predicted(),
            below_threshold: direct < self.pollard_target(),
            discrepancy,
        }
    }

    /// Rebuilds from a serialized spec, checking the recorded sets.
    pub fn from_spec(spec: &ConstructionSpec) -> Result<Self> {
        let group = FiniteAbelianGroup::parse(&spec.group)?;
        let h = Subgroup::from_set(GroupSet::from_indices(&group, spec.h.iter().copied())?)?;
        let need = |x: Option<u32>, name: &str| {
            x.ok_or_else(|| Error::Parse(format!("{} spec needs {name}", spec.family.name())))
        };
        let need_n = |x: Option<usize>, name: &str| {
            x.ok_or_else(|| Error::Parse(format!("{} spec needs {name}", spec.family.name())))
        };
        let inner = |x: &Option<Vec<usize>>| -> Result<GroupSet> {
            let v = x.as_ref().ok_or_else(|| Error::Parse("recursive spec needs a0/b0".into()))?;
            GroupSet::from_indices(&group, v.iter().copied())
        };
        let built = match spec.family {
            Family::MinusSelf => gen_minus_self(&group, &h, need(spec.s, "s")?, need(spec.u, "u")?)?,
            Family::KneserPair => gen_kneser_pair(&group, &h, spec.t, need_n(spec.n_a, "n_a")?, need_n(spec.n_b, "n_b")?)?,
            Family::ApCosets => gen_ap_cosets(
                &group,
                &h,
                need(spec.s, "s")?,
                need(spec.u, "u")?,
                need_n(spec.n_a, "n_a")?,
                need_n(spec.n_b, "n_b")?,
            )?,
            Family::Recursive1 => {
                let base = gen_minus_self(&group, &h, need(spec.s, "s")?, need(spec.u, "u")?)?;
                gen_recursive_1(&base, &inner(&spec.a0)?, &inner(&spec.b0)?)?
            }
            Family::Recursive2 => {
                let base = gen_kneser_pair(&group, &h, spec.t, need_n(spec.n_a, "n_a")?, need_n(spec.n_b, "n_b")?)?;
                gen_recursive_2(&base, &inner(&spec.a0)?, &inner(&spec.b0)?)?
            }
        };
        if built.spec != *spec {
            return Err(Error::Parse("spec does not match what the generator produces".into()));
        }
        Ok(built)
    }
}

/// Smallest `k >= 1` with `k*g ∈ H`.
pub fn quotient_order(h: &Subgroup, g: Element) -> usize {
    let group = h.group();
    let mut x = g;
    let mut k = 1;
    while !h.contains(x) {
        x = group.add(x, g);
        k += 1;
    }
    k
}

/// Candidate steps ordered by decreasing order in `G/H`, then index.
fn steps(h: &Subgroup) -> Vec<(Element, usize)> {
    let mut out: Vec<(Element, usize)> = h
        .group()
        .elements()
        .map(|g| (g, quotient_order(h, g)))
        .filter(|&(_, k)| k > 1)
        .collect();
    out.sort_by_key(|&(g, k)| (Reverse(k), g.index()));
    out
}

/// `⋃_{j<n} (j*g + H)`.
pub fn coset_progression(h: &Subgroup, g: Element, n: usize) -> GroupSet {
    let group = h.group();
    let mut out = GroupSet::empty(group);
    let mut x = group.zero();
    for _ in 0..n {
        out = out.union(&h.coset(x));
        x = group.add(x, g);
    }
    out
}

fn check_h(group: &Arc<FiniteAbelianGroup>, h: &Subgroup) -> Result<()> {
    if **h.group() != **group {
        return Err(Error::GroupMismatch { left: group.spec(), right: h.group().spec() });
    }
    Ok(())
}

fn spec(family: Family, h: &Subgroup, t: u32, g: Element, a: &GroupSet, b: &GroupSet, predicted: i64) -> ConstructionSpec {
    ConstructionSpec {
        schema: SCHEMA_VERSION,
        family,
        group: h.group().spec(),
        h: h.members().to_indices(),
        t,
        s: None,
        u: None,
        n_a: None,
        n_b: None,
        generator: g.index(),
        a0: None,
        b0: None,
        a: a.to_indices(),
        b: b.to_indices(),
        predicted_sum: predicted,
    }
}

/// `A` is `s+1` consecutive `H`-cosets, `B = -A`, `t = s|H|+u`, predicted
/// `|A|^2 - (|H|-u)|H|`.
pub fn gen_minus_self(group: &Arc<FiniteAbelianGroup>, h: &Subgroup, s: u32, u: u32) -> Result<Construction> {
    check_h(group, h)?;
    let hh = h.order() as u32;
    if s < 1 {
        return Err(Error::InvalidParameter("minus_self needs s >= 1".into()));
    }
    if u < 1 || u >= hh {
        return Err(Error::InvalidParameter(format!("minus_self needs u in [1, |H|-1] = [1, {}]", hh as i64 - 1)));
    }
    let n = s as usize + 1;
    for (g, k) in steps(h) {
        if k < n {
            break;
        }
        let a = coset_progression(h, g, n);
        let b = a.negate();
        if stabilizer(&a) != *h || stabilizer(&sumset(&a, &b)) != *h {
            continue;
        }
        let t = s * hh + u;
        let size = a.len() as i64;
        let predicted = size * size - (hh as i64 - u as i64) * hh as i64;
        let mut sp = spec(Family::MinusSelf, h, t, g, &a, &b, predicted);
        sp.s = Some(s);
        sp.u = Some(u);
        return Ok(Construction { spec: sp, a, b, h: h.clone() });
    }
    Err(Error::InvalidParameter(format!(
        "no progression of {n} cosets of H in {} has H(A) = H(A-A) = H",
        group.spec()
    )))
}

/// Progressions of `n_a` and `n_b` cosets with `|H| > t`; predicted `t|A|+t|B|-t|H|`.
pub fn gen_kneser_pair(group: &Arc<FiniteAbelianGroup>, h: &Subgroup, t: u32, n_a: usize, n_b: usize) -> Result<Construction> {
    check_h(group, h)?;
    if t < 1 {
        return Err(Error::InvalidParameter("t must be >= 1".into()));
    }
    if h.order() as u32 <= t {
        return Err(Error::InvalidParameter(format!("kneser_pair needs |H| > t, got |H| = {}, t = {t}", h.order())));
    }
    if n_a < 1 || n_b < 1 {
        return Err(Error::InvalidParameter("coset counts must be >= 1".into()));
    }
    let span = n_a + n_b - 1;
    let candidates: Vec<(Element, usize)> = if span == 1 {
        vec![(group.zero(), 1)]
    } else {
        steps(h)
    };
    for (g, k) in candidates {
        if span > 1 && span >= k {
            break;
        }
        let a = coset_progression(h, g, n_a);
        let b = coset_progression(h, g, n_b);
        if stabilizer(&sumset(&a, &b)) != *h {
            continue;
        }
        let ti = t as i64;
        let predicted = ti * (a.len() + b.len()) as i64 - ti * h.order() as i64;
        let mut sp = spec(Family::KneserPair, h, t, g, &a, &b, predicted);
        sp.n_a = Some(n_a);
        sp.n_b = Some(n_b);
        return Ok(Construction { spec: sp, a, b, h: h.clone() });
    }
    Err(Error::InvalidParameter(format!(
        "no step in {} fits {span} cosets of H without wraparound",
        group.spec()
    )))
}

/// Progressions of `n_a`, `n_b` cosets with `t = s|H|+u`; predicted
/// `t|A|+t|B|-t^2-u(|H|-u)`, asserted equal to `t|A|+t|B|-(2s+1)t|H|+s(s+1)|H|^2`.
pub fn gen_ap_cosets(
    group: &Arc<FiniteAbelianGroup>,
    h: &Subgroup,
    s: u32,
    u: u32,
    n_a: usize,
    n_b: usize,
) -> Result<Construction> {
    check_h(group, h)?;
    let hh = h.order() as u32;
    if u < 1 || u >= hh {
        return Err(Error::InvalidParameter(format!("ap_cosets needs u in [1, |H|-1] = [1, {}]", hh as i64 - 1)));
    }
    if n_a < s as usize + 1 || n_b < s as usize + 1 {
        return Err(Error::InvalidParameter("ap_cosets needs n_a, n_b >= s+1".into()));
    }
    let span = n_a + n_b - 1;
    for (g, k) in steps(h) {
        if span > k {
            break;
        }
        let a = coset_progression(h, g, n_a);
        let b = coset_progression(h, g, n_b);
        let t = s * hh + u;
        let (ti, h64, s64, u64_) = (t as i64, hh as i64, s as i64, u as i64);
        let sizes = (a.len() + b.len()) as i64;
        let predicted = ti * sizes - ti * ti - u64_ * (h64 - u64_);
        let intermediate = ti * sizes - (2 * s64 + 1) * ti * h64 + s64 * (s64 + 1) * h64 * h64;
        assert_eq!(predicted, intermediate, "closed forms disagree");
        let mut sp = spec(Family::ApCosets, h, t, g, &a, &b, predicted);
        sp.s = Some(s);
        sp.u = Some(u);
        sp.n_a = Some(n_a);
        sp.n_b = Some(n_b);
        return Ok(Construction { spec: sp, a, b, h: h.clone() });
    }
    Err(Error::InvalidParameter(format!(
        "no step in {} fits {span} cosets of H injectively",
        group.spec()
    )))
}

/// Translates `x` so that it contains `0 + K`.
fn translate_onto(x: &GroupSet, k: &Subgroup) -> Result<GroupSet> {
    if k.members().is_subset(x) {
        return Ok(x.clone());
    }
    let group = x.group();
    x.iter()
        .find(|&a| k.coset(a).is_subset(x))
        .map(|a| x.translate(group.neg(a)))
        .ok_or_else(|| Error::Precondition("set contains no full K-coset".into()))
}

fn inner_checks(k: &Subgroup, a0: &GroupSet, b0: &GroupSet, thr: u32) -> Result<i64> {
    if !a0.is_subset(k.members()) || !b0.is_subset(k.members()) {
        return Err(Error::Precondition("A0, B0 must lie inside K".into()));
    }
    if a0.len() < thr as usize || b0.len() < thr as usize {
        return Err(Error::Precondition(format!("|A0|, |B0| >= {thr} required")));
    }
    let inner = rep_profile(a0, b0).popular_sum(thr) as i64;
    let th = thr as i64;
    if inner >= th * (a0.len() + b0.len()) as i64 - th * th {
        return Err(Error::Precondition(format!(
            "inner pair has sum_{{i<={thr}}} |A0+_i B0| = {inner}, not below {}",
            th * (a0.len() + b0.len()) as i64 - th * th
        )));
    }
    Ok(inner)
}

/// `A* = (A∖K)∪A0`, `B* = (B∖K)∪B0` on a minus_self base over `K`.
pub fn gen_recursive_1(base: &Construction, a0: &GroupSet, b0: &GroupSet) -> Result<Construction> {
    if base.spec.family != Family::MinusSelf {
        return Err(Error::InvalidParameter("recursive_1 needs a minus_self base".into()));
    }
    let k = &base.h;
    let u = base.spec.u.unwrap();
    let t = base.t();
    let inner = inner_checks(k, a0, b0, u)?;
    let a = translate_onto(&base.a, k)?;
    let b = translate_onto(&base.b, k)?;
    let a_star = a.difference(k.members()).union(a0);
    let b_star = b.difference(k.members()).union(b0);
    let (ti, ui) = (t as i64, u as i64);
    let sizes = (a_star.len() + b_star.len()) as i64;
    let predicted = ti * sizes - ti * ti - ui * a0.len() as i64 - ui * b0.len() as i64 + ui * ui + inner;
    assert!(predicted < ti * sizes - ti * ti);
    let mut sp = base.spec.clone();
    sp.family = Family::Recursive1;
    sp.a0 = Some(a0.to_indices());
    sp.b0 = Some(b0.to_indices());
    sp.a = a_star.to_indices();
    sp.b = b_star.to_indices();
    sp.predicted_sum = predicted;
    Ok(Construction { spec: sp, a: a_star, b: b_star, h: k.clone() })
}

/// `A* = (A∖K)∪A0`, `B* = (B∖K)∪B0` on a Kneser-pair base over `K` with a
/// unique-expression coset moved to `K`.
pub fn gen_recursive_2(base: &Construction, a0: &GroupSet, b0: &GroupSet) -> Result<Construction> {
    if base.spec.family != Family::KneserPair {
        return Err(Error::InvalidParameter("recursive_2 needs a kneser_pair base".into()));
    }
    let k = &base.h;
    let t = base.t();
    let (a, b) = (&base.a, &base.b);
    let sum = sumset(a, b);
    if stabilizer(a) != *k || stabilizer(b) != *k || stabilizer(&sum) != *k {
        return Err(Error::Precondition("base needs K = H(A) = H(B) = H(A+B)".into()));
    }
    if sum.len() + 1 >= a.len() + b.len() || k.order() as u32 <= t {
        return Err(Error::Precondition("base needs |A+B| < |A|+|B|-1 and |K| > t".into()));
    }
    let inner = inner_checks(k, a0, b0, t)?;
    // r = |K| on a K-periodic pair means one expression modulo K
    let profile = rep_profile(a, b);
    let g = sum
        .iter()
        .find(|&g| profile.get(g) as usize == k.order())
        .ok_or_else(|| Error::Precondition("A+B has no unique expression element modulo K".into()))?;
    let group = a.group();
    let x = a.iter().find(|&x| b.contains(group.sub(g, x))).unwrap();
    let a = a.translate(group.neg(x));
    let b = b.translate(group.neg(group.sub(g, x)));
    debug_assert!(periodic_hull(k.members(), k).is_subset(&a.intersection(&b)));
    let a_star = a.difference(k.members()).union(a0);
    let b_star = b.difference(k.members()).union(b0);
    let ti = t as i64;
    let predicted =
        ti * (a_star.len() - a0.len()) as i64 + ti * (b_star.len() - b0.len()) as i64 + inner;
    assert!(predicted < ti * (a_star.len() + b_star.len()) as i64 - ti * ti);
    let mut sp = base.spec.clone();
    sp.family = Family::Recursive2;
    sp.a0 = Some(a0.to_indices());
    sp.b0 = Some(b0.to_indices());
    sp.a = a_star.to_indices();
    sp.b = b_star.to_indices();
    sp.predicted_sum = predicted;
    Ok(Construction { spec: sp, a: a_star, b: b_star, h: k.clone() })
}

/// Every `(A0, B0) ⊆ K × K` passing the inner precondition at threshold
/// `thr`, ordered by `(|A0|+|B0|, masks)`.
pub fn inner_pairs(k: &Subgroup, thr: u32) -> Vec<(GroupSet, GroupSet)> {
    let members = k.members().to_indices();
    let group = k.group();
    let n = members.len();
    assert!(n <= 16, "inner search is exponential in |K|");
    let subset = |mask: u32| {
        GroupSet::from_indices(group, (0..n).filter(|i| mask >> i & 1 == 1).map(|i| members[i])).unwrap()
    };
    let mut out = Vec::new();
    for ma in 1u32..(1 << n) {
        for mb in 1u32..(1 << n) {
            let (a0, b0) = (subset(ma), subset(mb));
            if inner_checks(k, &a0, &b0, thr).is_ok() {
                out.push((a0, b0));
            }
        }
    }
    out.sort_by(|x, y| {
        (x.0.len() + x.1.len())
            .cmp(&(y.0.len() + y.1.len()))
            .then_with(|| x.0.cmp_mask(&y.0))
            .then_with(|| x.1.cmp_mask(&y.1))
    });
    out
}
