//! Set-level arithmetic: sumsets, representation profiles, popular sumsets,
//! stabilizers, the Dyson transform, dot-grid statistics and the
//! `T = {x in A : x + B ⊆ A}` construction.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Element, FiniteAbelianGroup, Subgroup};
use crate::set::GroupSet;

/// `A + B`. Empty if either operand is empty.
pub fn sumset(a: &GroupSet, b: &GroupSet) -> GroupSet {
    a.assert_same_group(b);
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut out = GroupSet::empty(a.group());
    let mut scratch = GroupSet::empty(a.group());
    for s in small.iter_indices() {
        large.translate_into(s, &mut scratch);
        out.union_with(&scratch);
        if out.len() == out.group().order() {
            break;
        }
    }
    out
}

pub fn try_sumset(a: &GroupSet, b: &GroupSet) -> Result<GroupSet> {
    a.check_same_group(b)?;
    Ok(sumset(a, b))
}

/// `r_{A,B}(g)` for every `g`, indexed by element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepProfile {
    group: Arc<FiniteAbelianGroup>,
    counts: Vec<u32>,
}

impl RepProfile {
    pub fn group(&self) -> &Arc<FiniteAbelianGroup> {
        &self.group
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, g: Element) -> u32 {
        self.counts[g.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// `A +_t B`.
    pub fn popular_sumset(&self, t: u32) -> GroupSet {
        let mut out = GroupSet::empty(&self.group);
        for (g, &c) in self.counts.iter().enumerate() {
            if c >= t {
                out.insert_idx(g);
            }
        }
        out
    }

    /// `sum_{i=1}^t |A +_i B| = sum_g min(r(g), t)`.
    pub fn popular_sum(&self, t: u32) -> u64 {
        self.counts.iter().map(|&c| c.min(t) as u64).sum()
    }

    pub fn support(&self) -> GroupSet {
        self.popular_sumset(1)
    }

    pub fn min_count(&self) -> u32 {
        self.counts.iter().copied().min().unwrap_or(0)
    }

    pub fn max_count(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// The representation profile of `(A, B)`.
///
/// Single-word cyclic groups use `r(g) = |B ∩ (g - A)|` with rotations and
/// popcounts; everything else enumerates pairs through the addition table.
pub fn rep_profile(a: &GroupSet, b: &GroupSet) -> RepProfile {
    a.assert_same_group(b);
    let group = a.group();
    if group.order() <= 64 && group.moduli().len() == 1 {
        rep_profile_bitparallel(a, b)
    } else {
        rep_profile_pairs(a, b)
    }
}

pub fn try_rep_profile(a: &GroupSet, b: &GroupSet) -> Result<RepProfile> {
    a.check_same_group(b)?;
    Ok(rep_profile(a, b))
}

pub(crate) fn rep_profile_pairs(a: &GroupSet, b: &GroupSet) -> RepProfile {
    let group = a.group();
    let mut counts = vec![0u32; group.order()];
    let b_idx: Vec<usize> = b.iter_indices().collect();
    for x in a.iter_indices() {
        match group.add_row(x) {
            Some(row) => {
                for &y in &b_idx {
                    counts[row[y] as usize] += 1;
                }
            }
            None => {
                for &y in &b_idx {
                    counts[group.add_idx(x, y)] += 1;
                }
            }
        }
    }
    RepProfile { group: group.clone(), counts }
}

pub(crate) fn rep_profile_bitparallel(a: &GroupSet, b: &GroupSet) -> RepProfile {
    let group = a.group();
    let n = group.order();
    let mut counts = vec![0u32; n];
    if !a.is_empty() && !b.is_empty() {
        let neg_a = a.negate();
        let mut shifted = GroupSet::empty(group);
        for (g, slot) in counts.iter_mut().enumerate() {
            neg_a.translate_into(g, &mut shifted);
            *slot = shifted.intersection_len(b) as u32;
        }
    }
    RepProfile { group: group.clone(), counts }
}

fn require_t(t: u32) -> Result<()> {
    if t < 1 {
        Err(Error::InvalidParameter("t must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// `A +_t B = {g : r_{A,B}(g) >= t}`.
pub fn popular_sumset(a: &GroupSet, b: &GroupSet, t: u32) -> Result<GroupSet> {
    require_t(t)?;
    Ok(try_rep_profile(a, b)?.popular_sumset(t))
}

/// `sum_{i=1}^t |A +_i B|`.
pub fn popular_sum(a: &GroupSet, b: &GroupSet, t: u32) -> Result<u64> {
    require_t(t)?;
    Ok(try_rep_profile(a, b)?.popular_sum(t))
}

/// `H(A) = {e : e + A = A}`, with `H(∅) = G`.
///
/// Only `e = a - a0` for a fixed `a0 ∈ A` can stabilize `A`, so those are the
/// only candidates tested.
pub fn stabilizer(a: &GroupSet) -> Subgroup {
    let group = a.group();
    if a.is_empty() || a.len() == group.order() {
        return Subgroup::whole(group);
    }
    let n = group.order();
    let mut members = GroupSet::from_indices_unchecked(group, [0]);
    // |H(A)| divides both |A| and |G|.
    if crate::group::gcd(a.len(), n) == 1 {
        return Subgroup::from_set_unchecked(members);
    }
    let a0 = a.iter_indices().next().unwrap();
    let mut scratch = GroupSet::empty(group);
    for x in a.iter_indices() {
        let e = group.sub_idx(x, a0);
        if e == 0 || members.contains_idx(e) {
            continue;
        }
        a.translate_into(e, &mut scratch);
        if scratch == *a {
            members.insert_idx(e);
        }
    }
    Subgroup::from_set_unchecked(members)
}

/// `A + H`, the smallest `H`-periodic superset of `A`.
pub fn periodic_hull(a: &GroupSet, h: &Subgroup) -> GroupSet {
    if h.order() == 1 {
        return a.clone();
    }
    sumset(a, h.members())
}

/// `(A' + H) ∩ A`.
pub fn canonicalize(sub: &GroupSet, ambient: &GroupSet, h: &Subgroup) -> GroupSet {
    periodic_hull(sub, h).intersection(ambient)
}

/// Nonempty `H`-coset slices `A ∩ (g + H)`, ordered by coset id.
pub fn coset_slices(a: &GroupSet, h: &Subgroup) -> Vec<GroupSet> {
    let mut by_coset: Vec<Option<GroupSet>> = vec![None; h.index()];
    for x in a.iter_indices() {
        let id = h.coset_id_idx(x);
        by_coset[id]
            .get_or_insert_with(|| GroupSet::empty(a.group()))
            .insert_idx(x);
    }
    by_coset.into_iter().flatten().collect()
}

/// The pair `(A(z), B(z)) = (A ∪ (z + B), A ∩ (z + B))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DysonPair {
    pub a_z: GroupSet,
    pub b_z: GroupSet,
    /// `false` when `z ∉ A - B`, i.e. `B(z)` is empty.
    pub in_difference_set: bool,
}

pub fn dyson(a: &GroupSet, b: &GroupSet, z: Element) -> DysonPair {
    a.assert_same_group(b);
    let shifted = b.translate(z);
    let a_z = a.union(&shifted);
    let b_z = a.intersection(&shifted);
    let in_difference_set = !b_z.is_empty();
    DysonPair { a_z, b_z, in_difference_set }
}

/// Dot-grid bookkeeping for threshold `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DotGridStats {
    /// `X = A +_{t+1} B`.
    pub x: Vec<usize>,
    /// Holes in the `|X| x (|B| - t)` rectangle: `|X||B| - sum_{x in X} r(x)`.
    pub y: u64,
    /// Pairs `(a, b)` with `a + b ∉ X`.
    pub edge_count: u64,
    pub popular_sum: u64,
}

impl DotGridStats {
    /// `sum = |A||B| - |X|(|B| - t) + y`.
    pub fn holes_identity(&self, size_a: usize, size_b: usize, t: u32) -> bool {
        let rhs = (size_a * size_b) as i64 - (self.x.len() as i64) * (size_b as i64 - t as i64) + self.y as i64;
        self.popular_sum as i64 == rhs
    }

    /// `sum = t|X| + |E|`.
    pub fn edge_identity(&self, t: u32) -> bool {
        self.popular_sum == t as u64 * self.x.len() as u64 + self.edge_count
    }
}

pub fn dot_grid_stats(a: &GroupSet, b: &GroupSet, t: u32) -> Result<DotGridStats> {
    require_t(t)?;
    a.check_same_group(b)?;
    if b.len() < t as usize {
        return Err(Error::Precondition(format!("|B| = {} < t = {t}", b.len())));
    }
    let profile = rep_profile(a, b);
    let x = profile.popular_sumset(t + 1);
    let r_sum: u64 = x.iter_indices().map(|g| profile.counts[g] as u64).sum();
    let y = x.len() as u64 * b.len() as u64 - r_sum;
    let group = a.group();
    let mut edge_count = 0u64;
    for p in a.iter_indices() {
        for q in b.iter_indices() {
            if !x.contains_idx(group.add_idx(p, q)) {
                edge_count += 1;
            }
        }
    }
    Ok(DotGridStats {
        x: x.to_indices(),
        y,
        edge_count,
        popular_sum: profile.popular_sum(t),
    })
}

/// `T = {x ∈ A : x + B ⊆ A}` together with `Ω = H(T + B)`.
#[derive(Clone, Debug)]
pub struct InvariantT {
    pub t: GroupSet,
    /// `H(T + B)`, or `{0}` when `T` is empty.
    pub omega: Subgroup,
    /// `H(T)`; agrees with `omega` whenever `T ≠ ∅` and `0 ∈ B`.
    pub stabilizer_t: Subgroup,
}

impl InvariantT {
    pub fn omega_matches(&self) -> bool {
        self.t.is_empty() || self.omega == self.stabilizer_t
    }
}

pub fn invariant_t(a: &GroupSet, b: &GroupSet) -> Result<InvariantT> {
    a.check_same_group(b)?;
    if b.is_empty() {
        return Err(Error::Precondition("B must be nonempty".into()));
    }
    let group = a.group();
    let mut t = GroupSet::empty(group);
    let mut scratch = GroupSet::empty(group);
    for x in a.iter_indices() {
        b.translate_into(x, &mut scratch);
        if scratch.is_subset(a) {
            t.insert_idx(x);
        }
    }
    let (omega, stabilizer_t) = if t.is_empty() {
        (Subgroup::trivial(group), Subgroup::trivial(group))
    } else {
        (stabilizer(&sumset(&t, b)), stabilizer(&t))
    };
    Ok(InvariantT { t, omega, stabilizer_t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grp(spec: &str) -> Arc<FiniteAbelianGroup> {
        FiniteAbelianGroup::parse(spec).unwrap()
    }

    fn set(g: &Arc<FiniteAbelianGroup>, xs: &[usize]) -> GroupSet {
        GroupSet::from_indices(g, xs.iter().copied()).unwrap()
    }

    /// `r(g) = |(g - A) ∩ B|` with ordinary sets and slow group arithmetic.
    fn r_oracle(a: &GroupSet, b: &GroupSet, g: usize) -> u32 {
        let group = a.group();
        let ge = Element::from_index(g);
        let g_minus_a: BTreeSet<usize> = a.iter().map(|x| group.sub(ge, x).index()).collect();
        let bs: BTreeSet<usize> = b.to_indices().into_iter().collect();
        g_minus_a.intersection(&bs).count() as u32
    }

    fn random_set(g: &Arc<FiniteAbelianGroup>, rng: &mut ChaCha8Rng) -> GroupSet {
        let mut s = GroupSet::empty(g);
        for i in 0..g.order() {
            if rng.gen_bool(0.5) {
                s.insert_idx(i);
            }
        }
        s
    }

    #[test]
    fn sumset_examples() {
        let z6 = grp("Z6");
        assert_eq!(sumset(&set(&z6, &[0, 1, 2]), &set(&z6, &[0, 3])).to_indices(), vec![0, 1, 2, 3, 4, 5]);
        let s = set(&z6, &[1, 4, 5]);
        assert_eq!(sumset(&set(&z6, &[0]), &s), s);
        let z4 = grp("Z4");
        assert_eq!(sumset(&set(&z4, &[0, 2]), &set(&z4, &[0, 2])).to_indices(), vec![0, 2]);
        assert!(sumset(&GroupSet::empty(&z4), &set(&z4, &[1])).is_empty());
        assert!(try_sumset(&set(&z4, &[1]), &set(&z6, &[1])).is_err());
    }

    #[test]
    fn profile_examples() {
        let z6 = grp("Z6");
        let a = set(&z6, &[0, 1, 2, 3]);
        let b = set(&z6, &[0, 1, 2]);
        assert_eq!(rep_profile(&a, &b).counts(), &[1, 2, 3, 3, 2, 1]);
        let z5 = grp("Z5");
        let c = set(&z5, &[0, 1]);
        assert_eq!(rep_profile(&c, &c).counts(), &[1, 2, 1, 0, 0]);
        let empty = GroupSet::empty(&z5);
        assert!(rep_profile(&empty, &c).counts().iter().all(|&x| x == 0));
    }

    #[test]
    fn popular_examples() {
        let z6 = grp("Z6");
        let a = set(&z6, &[0, 1, 2, 3]);
        let b = set(&z6, &[0, 1, 2]);
        assert_eq!(popular_sumset(&a, &b, 2).unwrap().to_indices(), vec![1, 2, 3, 4]);
        assert_eq!(popular_sumset(&a, &b, 3).unwrap().to_indices(), vec![2, 3]);
        assert_eq!(popular_sumset(&a, &b, 1).unwrap(), sumset(&a, &b));
        assert_eq!(popular_sum(&a, &b, 2).unwrap(), 10);
        assert_eq!(popular_sum(&a, &b, 3).unwrap(), 12);
        assert_eq!(popular_sum(&a, &b, 1).unwrap(), 6);
        assert!(popular_sumset(&a, &b, 0).is_err());
        assert!(popular_sum(&a, &b, 0).is_err());
    }

    #[test]
    fn stabilizer_examples() {
        let z6 = grp("Z6");
        assert_eq!(stabilizer(&set(&z6, &[0, 2, 4])).members().to_indices(), vec![0, 2, 4]);
        assert_eq!(stabilizer(&set(&z6, &[0, 1, 3, 4])).members().to_indices(), vec![0, 3]);
        let z4 = grp("Z4");
        assert_eq!(stabilizer(&set(&z4, &[0, 1])).order(), 1);
        assert_eq!(stabilizer(&GroupSet::empty(&z4)).order(), 4);
    }

    #[test]
    fn stabilizer_matches_all_translations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in ["Z12", "Z2xZ6", "Z2xZ2xZ2", "Z3xZ3", "Z16"] {
            let g = grp(spec);
            for _ in 0..300 {
                let a = random_set(&g, &mut rng);
                let expect: Vec<usize> = g.elements().filter(|&e| a.translate(e) == a).map(|e| e.index()).collect();
                assert_eq!(stabilizer(&a).members().to_indices(), expect);
            }
        }
    }

    #[test]
    fn dyson_examples() {
        let z6 = grp("Z6");
        let a = set(&z6, &[0, 1, 2, 3]);
        let b = set(&z6, &[0, 1, 2]);
        let d0 = dyson(&a, &b, Element::from_index(0));
        assert_eq!((d0.a_z.to_indices(), d0.b_z.to_indices()), (vec![0, 1, 2, 3], vec![0, 1, 2]));
        let d3 = dyson(&a, &b, Element::from_index(3));
        assert_eq!(d3.a_z.len(), 6);
        assert_eq!(d3.b_z.to_indices(), vec![3]);
        assert_eq!(d3.a_z.len() + d3.b_z.len(), a.len() + b.len());
        let same = dyson(&a, &a, Element::from_index(0));
        assert_eq!((same.a_z, same.b_z.clone()), (a.clone(), a.clone()));
        let z7 = grp("Z7");
        let d = dyson(&set(&z7, &[0]), &set(&z7, &[0]), Element::from_index(3));
        assert!(!d.in_difference_set);
    }

    #[test]
    fn dot_grid_examples() {
        let z6 = grp("Z6");
        let s = dot_grid_stats(&set(&z6, &[0, 1, 2, 3]), &set(&z6, &[0, 1, 2]), 2).unwrap();
        assert_eq!((s.x.clone(), s.y, s.edge_count, s.popular_sum), (vec![2, 3], 0, 6, 10));
        assert!(s.holes_identity(4, 3, 2) && s.edge_identity(2));
        let z5 = grp("Z5");
        let c = set(&z5, &[0, 1]);
        let s = dot_grid_stats(&c, &c, 1).unwrap();
        assert_eq!((s.x.clone(), s.y, s.edge_count, s.popular_sum), (vec![1], 0, 2, 3));
        // every r <= t: X empty
        let s = dot_grid_stats(&c, &c, 2).unwrap();
        assert!(s.x.is_empty());
        assert_eq!((s.y, s.edge_count, s.popular_sum), (0, 4, 4));
        assert!(dot_grid_stats(&c, &set(&z5, &[0]), 2).is_err());
    }

    #[test]
    fn invariant_t_examples() {
        let z6 = grp("Z6");
        let inv = invariant_t(&set(&z6, &[0, 1, 2, 3]), &set(&z6, &[0, 1, 2])).unwrap();
        assert_eq!(inv.t.to_indices(), vec![0, 1]);
        assert_eq!(inv.omega.order(), 1);
        let full = GroupSet::full(&z6);
        let inv = invariant_t(&full, &set(&z6, &[1, 4])).unwrap();
        assert_eq!(inv.t, full);
        assert_eq!(inv.omega.order(), 6);
        let inv = invariant_t(&set(&z6, &[0, 2]), &set(&z6, &[0, 1])).unwrap();
        assert!(inv.t.is_empty());
        assert!(invariant_t(&full, &GroupSet::empty(&z6)).is_err());
    }

    #[test]
    fn profile_routes_agree_with_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=16 {
            let g = FiniteAbelianGroup::cyclic(n).unwrap();
            for _ in 0..(10_000 / 16) {
                let a = random_set(&g, &mut rng);
                let b = random_set(&g, &mut rng);
                let fast = rep_profile_bitparallel(&a, &b);
                let pairs = rep_profile_pairs(&a, &b);
                assert_eq!(fast, pairs);
                for x in 0..n {
                    assert_eq!(fast.counts()[x], r_oracle(&a, &b, x));
                }
                assert_eq!(rep_profile(&b, &a), fast, "r-symmetry");
            }
        }
        for spec in ["Z2xZ2", "Z2xZ4", "Z2xZ2xZ2", "Z3xZ3", "Z2xZ6", "Z4xZ4"] {
            let g = grp(spec);
            for _ in 0..500 {
                let a = random_set(&g, &mut rng);
                let b = random_set(&g, &mut rng);
                let p = rep_profile(&a, &b);
                for x in 0..g.order() {
                    assert_eq!(p.counts()[x], r_oracle(&a, &b, x));
                }
                assert_eq!(rep_profile(&b, &a), p);
            }
        }
    }

    fn arb_instance() -> impl Strategy<Value = (String, u64, u64)> {
        prop_oneof![
            (1usize..=16).prop_map(|n| format!("Z{n}")),
            Just("Z2xZ2".to_string()),
            Just("Z2xZ4".to_string()),
            Just("Z2xZ2xZ2".to_string()),
            Just("Z3xZ3".to_string()),
            Just("Z4xZ4".to_string()),
        ]
        .prop_flat_map(|spec| {
            let n = grp(&spec).order();
            let hi = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            (Just(spec), 0..=hi, 0..=hi)
        })
    }

    proptest! {
        #[test]
        fn profile_invariants((spec, ma, mb) in arb_instance()) {
            let g = grp(&spec);
            let a = GroupSet::from_mask(&g, ma).unwrap();
            let b = GroupSet::from_mask(&g, mb).unwrap();
            let p = rep_profile(&a, &b);
            prop_assert_eq!(p.total(), (a.len() * b.len()) as u64);
            let lim = a.len().min(b.len()) as u32;
            prop_assert!(p.counts().iter().all(|&c| c <= lim));
            // pigeonhole
            let floor = a.len() as i64 + b.len() as i64 - g.order() as i64;
            prop_assert!(p.counts().iter().all(|&c| c as i64 >= floor));
            let support = sumset(&a, &b);
            prop_assert_eq!(&p.support(), &support);
            if !a.is_empty() && !b.is_empty() {
                let floor = a.len() as i64 + b.len() as i64 - support.len() as i64;
                prop_assert!(support.iter().all(|x| p.get(x) as i64 >= floor));
            }
            let top = a.len().max(b.len()) as u32 + 1;
            let mut running = 0u64;
            for i in 1..=top {
                let here = p.popular_sumset(i);
                let next = p.popular_sumset(i + 1);
                prop_assert!(next.is_subset(&here));
                running += here.len() as u64;
                prop_assert_eq!(p.popular_sum(i), running);
            }
        }

        #[test]
        fn stabilizer_coset_law((spec, ma, mb) in arb_instance(), t in 1u32..5) {
            let g = grp(&spec);
            let a = GroupSet::from_mask(&g, ma).unwrap();
            let b = GroupSet::from_mask(&g, mb).unwrap();
            let x = rep_profile(&a, &b).popular_sumset(t + 1);
            let h = stabilizer(&a);
            for rep in h.coset_representatives() {
                let c = h.coset(rep);
                let meet = c.intersection(&x);
                prop_assert!(meet.is_empty() || meet == c);
            }
        }

        #[test]
        fn dyson_invariants((spec, ma, mb) in arb_instance(), zi in 0usize..64) {
            let g = grp(&spec);
            let a = GroupSet::from_mask(&g, ma).unwrap();
            let b = GroupSet::from_mask(&g, mb).unwrap();
            let z = Element::from_index(zi % g.order());
            let d = dyson(&a, &b, z);
            prop_assert_eq!(d.a_z.len() + d.b_z.len(), a.len() + b.len());
            let before = rep_profile(&a, &b);
            let after = rep_profile(&d.a_z, &d.b_z);
            for i in 1..=(d.b_z.len() as u32) {
                let shifted = before.popular_sumset(i).translate(z);
                prop_assert!(after.popular_sumset(i).is_subset(&shifted));
            }
        }

        #[test]
        fn dot_grid_identities((spec, ma, mb) in arb_instance(), t in 1u32..6) {
            let g = grp(&spec);
            let a = GroupSet::from_mask(&g, ma).unwrap();
            let b = GroupSet::from_mask(&g, mb).unwrap();
            prop_assume!(b.len() >= t as usize);
            let s = dot_grid_stats(&a, &b, t).unwrap();
            prop_assert!(s.holes_identity(a.len(), b.len(), t));
            prop_assert!(s.edge_identity(t));
        }

        #[test]
        fn t_is_omega_periodic((spec, ma, mb) in arb_instance()) {
            let g = grp(&spec);
            let a = GroupSet::from_mask(&g, ma).unwrap();
            let mut b = GroupSet::from_mask(&g, mb).unwrap();
            b.insert_idx(0);
            let inv = invariant_t(&a, &b).unwrap();
            if !inv.t.is_empty() {
                prop_assert!(inv.omega_matches());
                prop_assert_eq!(periodic_hull(&inv.t, &inv.omega), inv.t.clone());
                prop_assert!(sumset(&inv.t, &b).is_subset(&a));
            }
        }

        #[test]
        fn canonical_form_idempotent((spec, ma, mb) in arb_instance()) {
            let g = grp(&spec);
            let a = GroupSet::from_mask(&g, ma).unwrap();
            let sub = a.intersection(&GroupSet::from_mask(&g, mb).unwrap());
            let h = stabilizer(&sumset(&a, &a));
            let once = canonicalize(&sub, &a, &h);
            prop_assert_eq!(canonicalize(&once, &a, &h), once.clone());
            prop_assert!(sub.is_subset(&once) && once.is_subset(&a));
        }
    }

    #[test]
    fn slices_partition_set() {
        let z12 = grp("Z12");
        let a = set(&z12, &[0, 1, 2, 4, 5, 8, 9]);
        let h = stabilizer(&set(&z12, &[0, 4, 8]));
        let slices = coset_slices(&a, &h);
        let sizes: Vec<usize> = slices.iter().map(GroupSet::len).collect();
        assert_eq!(sizes, vec![3, 3, 1]);
        let mut u = GroupSet::empty(&z12);
        slices.iter().for_each(|s| u.union_with(s));
        assert_eq!(u, a);
    }
}
