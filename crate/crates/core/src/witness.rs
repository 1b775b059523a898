//! Search and validation of structural witnesses `(A', B')`.
//!
//! The primary search removes whole `H`-coset slices, `H = H(A +_t B)`, in
//! the order (removed count, A-removal bitmask, B-removal bitmask). Any valid
//! witness canonicalizes to one of that shape, so the search is complete; a
//! plain element-removal search is kept as a fallback and test oracle.

use serde::{Deserialize, Serialize};

use crate::algebra::{coset_slices, periodic_hull, rep_profile, stabilizer};
use crate::error::{Error, Result};
use crate::group::Subgroup;
use crate::set::GroupSet;
use crate::theorems::{Clause, ConjectureParams, Pair};
use crate::SCHEMA_VERSION;

/// A candidate pair `A' ⊆ A`, `B' ⊆ B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub a_prime: GroupSet,
    pub b_prime: GroupSet,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessClauses {
    pub ell_at_most_t_minus_1: bool,
    pub popular_equals_sumset: bool,
    pub sumset_equals_target: bool,
    pub sizes_at_least_t_plus_1: bool,
    pub small_sumset: bool,
    pub middle_bound: bool,
    pub outer_bound: bool,
}

impl WitnessClauses {
    pub fn all(&self) -> bool {
        self.ell_at_most_t_minus_1
            && self.popular_equals_sumset
            && self.sumset_equals_target
            && self.sizes_at_least_t_plus_1
            && self.small_sumset
            && self.middle_bound
            && self.outer_bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub schema: u32,
    pub group: String,
    pub t: u32,
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    /// Canonical `A'' = (A'+H)∩A`.
    pub a_prime: Vec<usize>,
    pub b_prime: Vec<usize>,
    pub h: Vec<usize>,
    pub ell: usize,
    pub rho: usize,
    pub popular_sum: i64,
    pub middle_bound: i64,
    pub outer_bound: i64,
    /// The pair passed in was already canonical.
    pub canonical_input: bool,
    pub clauses: WitnessClauses,
    pub valid: bool,
}

impl WitnessReport {
    pub fn clause_list(&self) -> Vec<Clause> {
        let c = &self.clauses;
        vec![
            Clause::flag("ell_at_most_t_minus_1", c.ell_at_most_t_minus_1),
            Clause::flag("popular_equals_sumset", c.popular_equals_sumset),
            Clause::flag("sumset_equals_target", c.sumset_equals_target),
            Clause::flag("sizes_at_least_t_plus_1", c.sizes_at_least_t_plus_1),
            Clause::flag("small_sumset", c.small_sumset),
            Clause {
                name: "middle_bound".into(),
                holds: c.middle_bound,
                lhs: Some(self.popular_sum.into()),
                rhs: Some(self.middle_bound.into()),
            },
            Clause {
                name: "outer_bound".into(),
                holds: c.outer_bound,
                lhs: Some(self.middle_bound.into()),
                rhs: Some(self.outer_bound.into()),
            },
        ]
    }

    pub fn witness(&self) -> Result<Witness> {
        let group = crate::group::FiniteAbelianGroup::parse(&self.group)?;
        Ok(Witness {
            a_prime: GroupSet::from_indices(&group, self.a_prime.iter().copied())?,
            b_prime: GroupSet::from_indices(&group, self.b_prime.iter().copied())?,
        })
    }
}

/// Search exhausted without a witness although the hypothesis holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoWitnessFound {
    pub schema: u32,
    pub group: String,
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    pub mask_a: String,
    pub mask_b: String,
    pub t: u32,
    pub popular_sum: i64,
    pub profile: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WitnessSearch {
    Found { witness: Witness, report: WitnessReport },
    NotFound(NoWitnessFound),
}

impl WitnessSearch {
    pub fn found(&self) -> Option<(&Witness, &WitnessReport)> {
        match self {
            WitnessSearch::Found { witness, report } => Some((witness, report)),
            WitnessSearch::NotFound(_) => None,
        }
    }
}

/// `A' ⊆ A`, `B' ⊆ B`, at most `max_removed` elements removed, and
/// `A' + B' = A' +_thr B' = target`.
pub(crate) fn structure_holds(
    a1: &GroupSet,
    b1: &GroupSet,
    target: &GroupSet,
    thr: u32,
    max_removed: usize,
    a: &GroupSet,
    b: &GroupSet,
) -> bool {
    if !a1.is_subset(a) || !b1.is_subset(b) {
        return false;
    }
    if a.len() - a1.len() + b.len() - b1.len() > max_removed {
        return false;
    }
    let profile = rep_profile(a1, b1);
    profile.support() == *target && profile.popular_sumset(thr) == *target
}

/// All unions of whole slices with total size `<= budget`, with their sizes.
fn slice_removals(slices: &[GroupSet], budget: usize, empty: &GroupSet) -> Vec<(usize, GroupSet)> {
    let small: Vec<&GroupSet> = slices.iter().filter(|s| s.len() <= budget).collect();
    let mut out = vec![(0usize, empty.clone())];
    for s in small {
        let extra: Vec<(usize, GroupSet)> = out
            .iter()
            .filter(|(k, _)| k + s.len() <= budget)
            .map(|(k, set)| (k + s.len(), set.union(s)))
            .collect();
        out.extend(extra);
    }
    out
}

fn first_in_order(
    mut candidates: Vec<(usize, GroupSet, GroupSet)>,
    mut accept: impl FnMut(&GroupSet, &GroupSet) -> bool,
) -> Option<(GroupSet, GroupSet)> {
    candidates.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp_mask(&y.1)).then_with(|| x.2.cmp_mask(&y.2)));
    candidates
        .into_iter()
        .find(|(_, ra, rb)| accept(ra, rb))
        .map(|(_, ra, rb)| (ra, rb))
}

/// Whole-slice removal search. Returns the first `(A', B')` in canonical order.
pub fn slice_search(
    a: &GroupSet,
    b: &GroupSet,
    h: &Subgroup,
    target: &GroupSet,
    thr: u32,
    max_removed: usize,
) -> Option<Witness> {
    let empty = GroupSet::empty(a.group());
    let ra = slice_removals(&coset_slices(a, h), max_removed, &empty);
    let rb = slice_removals(&coset_slices(b, h), max_removed, &empty);
    let mut candidates = Vec::new();
    for (ka, xa) in &ra {
        for (kb, xb) in &rb {
            if ka + kb <= max_removed {
                candidates.push((ka + kb, xa.clone(), xb.clone()));
            }
        }
    }
    first_in_order(candidates, |ra, rb| {
        structure_holds(&a.difference(ra), &b.difference(rb), target, thr, max_removed, a, b)
    })
    .map(|(ra, rb)| Witness { a_prime: a.difference(&ra), b_prime: b.difference(&rb) })
}

fn for_each_combination(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Element-by-element removal search over all `<= max_removed` deletions,
/// without canonicalization.
pub fn exhaustive_search(
    a: &GroupSet,
    b: &GroupSet,
    target: &GroupSet,
    thr: u32,
    max_removed: usize,
) -> Option<Witness> {
    let items: Vec<(bool, usize)> = a
        .iter_indices()
        .map(|i| (false, i))
        .chain(b.iter_indices().map(|i| (true, i)))
        .collect();
    let empty = GroupSet::empty(a.group());
    for k in 0..=max_removed.min(items.len()) {
        let mut candidates = Vec::new();
        for_each_combination(items.len(), k, &mut |idx| {
            let mut ra = empty.clone();
            let mut rb = empty.clone();
            for &i in idx {
                let (side, g) = items[i];
                if side {
                    rb.insert_idx(g);
                } else {
                    ra.insert_idx(g);
                }
            }
            candidates.push((k, ra, rb));
        });
        let hit = first_in_order(candidates, |ra, rb| {
            structure_holds(&a.difference(ra), &b.difference(rb), target, thr, max_removed, a, b)
        });
        if let Some((ra, rb)) = hit {
            return Some(Witness { a_prime: a.difference(&ra), b_prime: b.difference(&rb) });
        }
    }
    None
}

/// Oracle form: any `(A', B')` with at most `t-1` removals realizing
/// `A'+_t B' = A'+B' = A+_t B`, found by plain enumeration.
pub fn find_witness_exhaustive(a: &GroupSet, b: &GroupSet, t: u32) -> Result<Option<Witness>> {
    a.check_same_group(b)?;
    if t < 2 {
        return Err(Error::InvalidParameter("witness search needs t >= 2".into()));
    }
    let target = rep_profile(a, b).popular_sumset(t);
    Ok(exhaustive_search(a, b, &target, t, (t - 1) as usize))
}

pub fn find_witness(a: &GroupSet, b: &GroupSet, t: u32) -> Result<WitnessSearch> {
    find_witness_on(&Pair::new(a, b)?, t)
}

pub fn find_witness_on(pair: &Pair, t: u32) -> Result<WitnessSearch> {
    if t < 2 {
        return Err(Error::InvalidParameter("witness search needs t >= 2".into()));
    }
    let (a, b) = (&pair.a, &pair.b);
    if a.len() < t as usize || b.len() < t as usize {
        return Err(Error::Precondition("|A|, |B| >= t required".into()));
    }
    if !pair.new_hypothesis(t) {
        return Err(Error::Precondition(
            "sum_{i<=t} |A+_i B| < t|A|+t|B|+ceil(-4t^2/3+2t/3) does not hold".into(),
        ));
    }
    let target = pair.profile().popular_sumset(t);
    if target.is_empty() {
        return Err(Error::Precondition("A +_t B is empty".into()));
    }
    let h = stabilizer(&target);
    let max = (t - 1) as usize;
    let found = slice_search(a, b, &h, &target, t, max).or_else(|| exhaustive_search(a, b, &target, t, max));
    match found {
        Some(w) => {
            let report = validate_witness_on(pair, t, &w.a_prime, &w.b_prime)?;
            let canonical = report.witness()?;
            Ok(WitnessSearch::Found { witness: canonical, report })
        }
        None => Ok(WitnessSearch::NotFound(NoWitnessFound {
            schema: SCHEMA_VERSION,
            group: a.group().spec(),
            a: a.to_indices(),
            b: b.to_indices(),
            mask_a: a.to_hex(),
            mask_b: b.to_hex(),
            t,
            popular_sum: pair.popular_sum(t),
            profile: pair.profile().counts().to_vec(),
        })),
    }
}

pub fn validate_witness(a: &GroupSet, b: &GroupSet, t: u32, a_prime: &GroupSet, b_prime: &GroupSet) -> Result<WitnessReport> {
    validate_witness_on(&Pair::new(a, b)?, t, a_prime, b_prime)
}

/// Canonicalizes and evaluates every clause; none short-circuits another.
pub fn validate_witness_on(pair: &Pair, t: u32, a_prime: &GroupSet, b_prime: &GroupSet) -> Result<WitnessReport> {
    let (a, b) = (&pair.a, &pair.b);
    a.check_same_group(a_prime)?;
    b.check_same_group(b_prime)?;
    if !a_prime.is_subset(a) || !b_prime.is_subset(b) {
        return Err(Error::Precondition("A' ⊆ A and B' ⊆ B required".into()));
    }
    if t < 1 {
        return Err(Error::InvalidParameter("t must be >= 1".into()));
    }
    let target = pair.profile().popular_sumset(t);
    let h = stabilizer(&target);
    let a2 = periodic_hull(a_prime, &h).intersection(a);
    let b2 = periodic_hull(b_prime, &h).intersection(b);
    let canonical_input = a2 == *a_prime && b2 == *b_prime;

    let ell = a.len() - a2.len() + b.len() - b2.len();
    let rho = periodic_hull(&a2, &h).len() - a2.len() + periodic_hull(&b2, &h).len() - b2.len();
    let inner = rep_profile(&a2, &b2);
    let s2 = inner.support();
    let s2t = inner.popular_sumset(t);

    let (na, nb) = pair.sizes();
    let (ti, hh) = (t as i64, h.order() as i64);
    let sum = pair.popular_sum(t);
    let middle = ti * (na + nb) - ti * ti - (ti - ell as i64) * (hh - rho as i64 - ti);
    let outer = ti * (na + nb) - ti * hh;

    let clauses = WitnessClauses {
        ell_at_most_t_minus_1: ell + 1 <= t as usize,
        popular_equals_sumset: s2t == s2,
        sumset_equals_target: s2 == target,
        sizes_at_least_t_plus_1: a2.len() > t as usize && b2.len() > t as usize,
        small_sumset: (s2.len() as i64) < (a2.len() + b2.len()) as i64 - ti,
        middle_bound: sum >= middle,
        outer_bound: middle >= outer,
    };
    Ok(WitnessReport {
        schema: SCHEMA_VERSION,
        group: a.group().spec(),
        t,
        a: a.to_indices(),
        b: b.to_indices(),
        a_prime: a2.to_indices(),
        b_prime: b2.to_indices(),
        h: h.members().to_indices(),
        ell,
        rho,
        popular_sum: sum,
        middle_bound: middle,
        outer_bound: outer,
        canonical_input,
        valid: clauses.all(),
        clauses,
    })
}

/// A `u`-relaxed witness for the conjecture: `H = H(A +_t B)`, target
/// `A +_u B`, fewer than `u` removals. Returns `None` when there is none
/// or when the hypothesis `sum < t|A|+t|B|-t^2` fails.
pub fn find_conjecture_witness(a: &GroupSet, b: &GroupSet, t: u32) -> Result<Option<Witness>> {
    find_conjecture_witness_on(&Pair::new(a, b)?, t)
}

pub fn find_conjecture_witness_on(pair: &Pair, t: u32) -> Result<Option<Witness>> {
    if t < 1 {
        return Err(Error::InvalidParameter("t must be >= 1".into()));
    }
    if pair.a.len() < t as usize || pair.b.len() < t as usize || pair.popular_sum(t) >= pair.pollard_target(t) {
        return Ok(None);
    }
    let h = stabilizer(&pair.profile().popular_sumset(t));
    let params = ConjectureParams::derive(t, h.order() as u32)?;
    let u = params.u;
    let target = pair.profile().popular_sumset(u);
    let max = (u - 1) as usize;
    let found = slice_search(&pair.a, &pair.b, &h, &target, u, max);
    Ok(found.or_else(|| {
        if max <= 4 {
            exhaustive_search(&pair.a, &pair.b, &target, u, max)
        } else {
            None
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteAbelianGroup;
    use crate::theorems::{check_mainprop_items, check_theorem_new, Verdict};
    use num_rational::Ratio;
    use std::sync::Arc;

    fn z(n: usize) -> Arc<FiniteAbelianGroup> {
        FiniteAbelianGroup::cyclic(n).unwrap()
    }

    fn set(g: &Arc<FiniteAbelianGroup>, xs: &[usize]) -> GroupSet {
        GroupSet::from_indices(g, xs.iter().copied()).unwrap()
    }

    #[test]
    fn worked_instance_ell_zero() {
        let g = z(12);
        let a = set(&g, &[0, 1, 4, 5, 8, 9]);
        let b = set(&g, &[0, 4, 8]);
        let search = find_witness(&a, &b, 2).unwrap();
        let (w, r) = search.found().unwrap();
        assert_eq!(w.a_prime, a);
        assert_eq!(w.b_prime, b);
        assert_eq!((r.ell, r.rho, r.valid), (0, 0, true));
        assert_eq!(r.h, vec![0, 4, 8]);
        assert_eq!((r.popular_sum, r.middle_bound, r.outer_bound), (12, 12, 12));
        let rep = check_theorem_new(&a, &b, 2, Some(w)).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
    }

    #[test]
    fn worked_instance_ell_one() {
        let g = z(12);
        let a = set(&g, &[0, 1, 2, 4, 5, 8, 9]);
        let b = set(&g, &[0, 4, 8]);
        let (w, r) = find_witness(&a, &b, 2).unwrap().found().map(|(w, r)| (w.clone(), r.clone())).unwrap();
        assert_eq!(w.a_prime, set(&g, &[0, 1, 4, 5, 8, 9]));
        assert_eq!((r.ell, r.rho, r.valid), (1, 0, true));
        assert_eq!((r.popular_sum, r.middle_bound), (15, 15));
        let items = check_mainprop_items(&a, &b, 2, &w.a_prime, &w.b_prime, Ratio::from_integer(0)).unwrap();
        assert_eq!(items.verdict, Verdict::Holds, "{items:?}");
        let five = items.clauses.iter().find(|c| c.name == "item5").unwrap();
        assert_eq!(five.rhs, Some(3.into()));
        assert!(items.clauses.iter().any(|c| c.name == "item6"));
    }

    #[test]
    fn degenerate_and_bad_inputs() {
        let g = z(12);
        let a = set(&g, &[0, 1, 4, 5, 8, 9]);
        let b = set(&g, &[0, 4, 8]);
        assert!(matches!(find_witness(&a, &b, 3), Err(Error::Precondition(_))));
        assert!(matches!(find_witness(&a, &b, 1), Err(Error::InvalidParameter(_))));
        let r = validate_witness(&a, &b, 2, &a, &b).unwrap();
        assert!(r.valid);
        // A+B strictly bigger than A+_t B
        let a = set(&g, &[0, 1, 2]);
        let b = set(&g, &[0, 1, 2]);
        let r = validate_witness(&a, &b, 2, &a, &b).unwrap();
        assert!(!r.clauses.sumset_equals_target);
        assert!(r.clauses.ell_at_most_t_minus_1);
        assert!(!r.valid);
        // ell = t
        let r = validate_witness(&a, &b, 2, &set(&g, &[0]), &b).unwrap();
        assert_eq!(r.ell, 2);
        assert!(!r.clauses.ell_at_most_t_minus_1);
        assert!(validate_witness(&a, &b, 2, &set(&g, &[5]), &b).is_err());
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let g = z(12);
        let a = set(&g, &[0, 1, 2, 4, 5, 8, 9]);
        let b = set(&g, &[0, 4, 8]);
        let r1 = validate_witness(&a, &b, 2, &set(&g, &[0, 1, 4, 5, 9]), &b).unwrap();
        let w = r1.witness().unwrap();
        let r2 = validate_witness(&a, &b, 2, &w.a_prime, &w.b_prime).unwrap();
        assert!(r2.canonical_input);
        assert_eq!(r1.a_prime, r2.a_prime);
        assert!(!r1.canonical_input);
    }

    #[test]
    fn slice_search_agrees_with_exhaustive_oracle() {
        for n in [6usize, 8, 9, 10] {
            let g = z(n);
            for ma in (1u64..(1 << n)).filter(|m| m & 1 == 1) {
                for mb in (1u64..(1 << n)).filter(|m| m & 1 == 1).step_by(5) {
                    let a = GroupSet::from_mask(&g, ma).unwrap();
                    let b = GroupSet::from_mask(&g, mb).unwrap();
                    for t in [2u32, 3] {
                        let pair = Pair::new(&a, &b).unwrap();
                        if a.len() < t as usize || b.len() < t as usize {
                            continue;
                        }
                        let target = pair.profile().popular_sumset(t);
                        let h = stabilizer(&target);
                        let fast = slice_search(&a, &b, &h, &target, t, (t - 1) as usize).is_some();
                        let slow = find_witness_exhaustive(&a, &b, t).unwrap().is_some();
                        if pair.new_hypothesis(t) {
                            assert!(fast && slow, "{a} {b} t={t}");
                        } else if pair.popular_sum(t) < pair.pollard_target(t) {
                            assert_eq!(fast, slow, "{a} {b} t={t}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn determinism() {
        let g = z(12);
        let a = set(&g, &[0, 1, 2, 4, 5, 8, 9]);
        let b = set(&g, &[0, 4, 8]);
        let x = serde_json::to_string(&find_witness(&a, &b, 2).unwrap().found().unwrap().1).unwrap();
        let y = serde_json::to_string(&find_witness(&a, &b, 2).unwrap().found().unwrap().1).unwrap();
        assert_eq!(x, y);
    }
}
