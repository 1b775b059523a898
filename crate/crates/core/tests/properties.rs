//! Cross-module properties checked against brute-force oracles.

use std::collections::HashMap;
use std::sync::Arc;

use num_rational::Ratio;
use popsum::constructions::gen_kneser_pair;
use popsum::group::{enumerate_subgroups, subgroup_generated};
use popsum::restricted::{check_restricted, restricted_sumset, TauMap};
use popsum::search::{replay, scan_range, Finding, FindingKind, Goal, ScanJob};
use popsum::theorems::{self, BoundReport, Verdict};
use popsum::witness::{find_witness, validate_witness, WitnessSearch};
use popsum::{algebra, FiniteAbelianGroup, GroupSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GROUPS: [&str; 12] = ["Z2", "Z3", "Z5", "Z6", "Z7", "Z8", "Z9", "Z10", "Z11", "Z12", "Z2xZ4", "Z3xZ3"];

fn instance() -> impl Strategy<Value = (Arc<FiniteAbelianGroup>, GroupSet, GroupSet)> {
    (0..GROUPS.len(), any::<u64>(), any::<u64>()).prop_map(|(i, ma, mb)| {
        let g = FiniteAbelianGroup::parse(GROUPS[i]).unwrap();
        let keep = (1u64 << g.order()) - 1;
        let a = GroupSet::from_mask(&g, (ma & keep) | 1).unwrap();
        let b = GroupSet::from_mask(&g, (mb & keep).max(1)).unwrap();
        (g, a, b)
    })
}

/// `r(g)` by explicit pair enumeration.
fn oracle_profile(g: &FiniteAbelianGroup, a: &GroupSet, b: &GroupSet) -> HashMap<usize, i64> {
    let mut r = HashMap::new();
    for x in a.iter() {
        for y in b.iter() {
            *r.entry(g.add(x, y).index()).or_insert(0) += 1;
        }
    }
    r
}

fn oracle_sum(r: &HashMap<usize, i64>, t: i64) -> i64 {
    r.values().map(|&c| c.min(t)).sum()
}

fn oracle_sumset(g: &Arc<FiniteAbelianGroup>, r: &HashMap<usize, i64>) -> GroupSet {
    GroupSet::from_indices(g, r.keys().copied()).unwrap()
}

/// Stabilizer by trying every translate.
fn oracle_stabilizer(g: &Arc<FiniteAbelianGroup>, s: &GroupSet) -> usize {
    g.elements().filter(|&x| s.translate(x) == *s).count()
}

fn sizes(a: &GroupSet, b: &GroupSet) -> (i64, i64) {
    (a.len() as i64, b.len() as i64)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 400, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn checker_verdicts_match_oracle((g, a, b) in instance(), t in 1u32..5) {
        let r = oracle_profile(&g, &a, &b);
        let (na, nb) = sizes(&a, &b);
        let n = g.order() as i64;
        let sum_ab = oracle_sumset(&g, &r);

        let pig = theorems::check_pigeonhole(&a, &b).unwrap();
        let min_r = g.elements().map(|x| *r.get(&x.index()).unwrap_or(&0)).min().unwrap();
        prop_assert_eq!(pig.holds(), min_r >= na + nb - n);
        prop_assert!(pig.holds());

        let mul = theorems::check_multiplicity(&a, &b).unwrap();
        prop_assert!(mul.holds());
        prop_assert!(r.values().all(|&c| c >= na + nb - sum_ab.len() as i64));

        let kn = theorems::check_kneser(&a, &b).unwrap();
        let h = oracle_stabilizer(&g, &sum_ab) as i64;
        let hull = |s: &GroupSet| {
            let stab = algebra::stabilizer(&sum_ab);
            algebra::periodic_hull(s, &stab).len() as i64
        };
        prop_assert_eq!(kn.lhs.as_f64(), sum_ab.len() as f64);
        prop_assert_eq!(kn.holds(), sum_ab.len() as i64 >= hull(&a) + hull(&b) - h);
        prop_assert!(kn.holds());

        if let Some(p) = g.is_cyclic_prime() {
            let cd = theorems::check_cauchy_davenport(&a, &b).unwrap();
            prop_assert!(cd.holds());
            prop_assert_eq!(sum_ab.len() as i64 >= (p as i64).min(na + nb - 1), true);
            let pol = theorems::check_pollard(&a, &b, t).unwrap();
            let ti = t as i64;
            if na >= ti && nb >= ti {
                prop_assert!(pol.holds());
                prop_assert!(oracle_sum(&r, ti) >= (ti * p as i64).min(ti * na + ti * nb - ti * ti));
            } else {
                prop_assert_eq!(pol.verdict, Verdict::HypothesisNotMet);
            }
        }

        let hs = theorems::check_hamidoune_serra(&a, &b, t).unwrap();
        if a.len() >= t as usize && b.len() >= t as usize {
            let hmax = enumerate_subgroups(&g).unwrap().iter()
                .filter(|h| h.coset_representatives().iter().any(|&x| h.coset(x).is_subset(&sum_ab)))
                .map(|h| h.order() as i64)
                .max()
                .unwrap();
            let ti = t as i64;
            let exact = 4 * oracle_sum(&r, ti) >= 4 * (ti * na + ti * nb - ti * ti) - hmax * hmax;
            prop_assert_eq!(hs.holds(), exact);
            prop_assert!(hs.holds());
        }
    }

    #[test]
    fn nesting_and_symmetry((g, a, b) in instance()) {
        let ab = algebra::rep_profile(&a, &b);
        let ba = algebra::rep_profile(&b, &a);
        prop_assert_eq!(ab.counts(), ba.counts());
        for i in 1..=b.len().min(a.len()) as u32 {
            prop_assert!(ab.popular_sumset(i + 1).is_subset(&ab.popular_sumset(i)));
        }
        let r = oracle_profile(&g, &a, &b);
        for x in g.elements() {
            prop_assert_eq!(ab.get(x) as i64, *r.get(&x.index()).unwrap_or(&0));
        }
    }

    #[test]
    fn witness_under_hypothesis_is_valid((_g, a, b) in instance(), t in 2u32..4) {
        let r = algebra::rep_profile(&a, &b);
        let (na, nb) = sizes(&a, &b);
        let ti = t as i64;
        let hyp = na >= ti && nb >= ti
            && (r.popular_sum(t) as i64) < ti * (na + nb) + theorems::threshold_new(ti).unwrap();
        if !hyp {
            return Ok(());
        }
        let WitnessSearch::Found { witness, report } = find_witness(&a, &b, t).unwrap() else {
            return Err(TestCaseError::fail("no witness under the hypothesis"));
        };
        prop_assert!(report.valid);
        let again = validate_witness(&a, &b, t, &witness.a_prime, &witness.b_prime).unwrap();
        prop_assert_eq!(&again, &report);
        let items = theorems::check_mainprop_items(&a, &b, t, &witness.a_prime, &witness.b_prime, Ratio::from_integer(0)).unwrap();
        prop_assert!(items.holds(), "{:?}", items);
        let hs = theorems::check_hamidoune_serra(&a, &b, t).unwrap();
        prop_assert!(hs.holds());
    }

    #[test]
    fn restricted_deletion_bound(gi in 0usize..6, ma in any::<u64>(), mb in any::<u64>(), seed in any::<u64>()) {
        let g = FiniteAbelianGroup::parse(["Z4", "Z5", "Z6", "Z7", "Z8", "Z2xZ4"][gi]).unwrap();
        let keep = (1u64 << g.order()) - 1;
        let a = GroupSet::from_mask(&g, (ma & keep).max(1)).unwrap();
        let b = GroupSet::from_mask(&g, (mb & keep).max(1)).unwrap();
        let tau = TauMap::random(&a, &mut ChaCha8Rng::seed_from_u64(seed));
        let full = algebra::sumset(&a, &b);
        let restricted = restricted_sumset(&a, &b, &tau).unwrap();
        let r = algebra::rep_profile(&a, &b);
        let pairs = tau.pairs();
        let fully_deleted = full.iter().filter(|&x| {
            let deleted = pairs.iter().filter(|&&(p, q)| b.contains(g.element(q).unwrap()) && g.add(g.element(p).unwrap(), g.element(q).unwrap()) == x).count();
            deleted as u32 == r.get(x)
        }).count();
        let tau_size = pairs.iter().filter(|&&(_, q)| b.contains(g.element(q).unwrap())).count();
        prop_assert_eq!(full.len() - restricted.len(), fully_deleted);
        prop_assert!(fully_deleted <= tau_size);
        let report = check_restricted(&a, &b, &tau).unwrap();
        if a.len() + b.len() > g.order() {
            prop_assert!(report.sumset_is_group);
            prop_assert!(report.all_hold(), "{:?}", report);
        } else {
            prop_assert_eq!(report.verdict, Verdict::HypothesisNotMet);
        }
    }

    #[test]
    fn kneser_pairs_meet_implied_bound(n in prop::sample::select(vec![12usize, 16, 18, 20, 24]), t in 1u32..4, na in 1usize..3, nb in 1usize..3) {
        let g = FiniteAbelianGroup::cyclic(n).unwrap();
        let h = (1..=n).filter(|d| n % d == 0 && n / d > t as usize).map(|d| subgroup_generated(&g, &[g.element(d % n).unwrap()])).find(|h| h.index() >= 3);
        prop_assume!(h.is_some());
        let h = h.unwrap();
        let Ok(c) = gen_kneser_pair(&g, &h, t, na, nb) else { return Ok(()) };
        let ti = t as i64;
        let implied = ti * (c.a.len() + c.b.len()) as i64 - ti * h.order() as i64;
        prop_assert_eq!(c.direct_sum(), implied);
        prop_assert_eq!(c.predicted(), implied);
    }

    #[test]
    fn split_at_any_cursor(cut in 0u64..176, workers in 1usize..4) {
        let job = ScanJob::exhaustive(&["Z5", "Z6", "Z2xZ4"], &[2, 3], Goal::HuntConjectureViolation);
        let (whole_f, whole_t) = scan_range(&job, 0..u64::MAX, 1).unwrap();
        let (f1, mut t1) = scan_range(&job, 0..cut, workers).unwrap();
        let (f2, t2) = scan_range(&job, cut..u64::MAX, workers).unwrap();
        t1.merge(&t2);
        prop_assert_eq!([f1, f2].concat(), whole_f);
        prop_assert_eq!(t1, whole_t);
    }

    #[test]
    fn reports_round_trip((_g, a, b) in instance(), t in 1u32..4) {
        let reports: Vec<BoundReport> = [
            theorems::check_kneser(&a, &b).ok(),
            theorems::check_pigeonhole(&a, &b).ok(),
            theorems::check_multiplicity(&a, &b).ok(),
            theorems::check_hamidoune_serra(&a, &b, t).ok(),
            theorems::check_theorem_new(&a, &b, t.max(2), None).ok(),
            theorems::check_conjecture(&a, &b, t, None).ok(),
        ].into_iter().flatten().collect();
        for r in &reports {
            let back: BoundReport = serde_json::from_str(&serde_json::to_string(r).unwrap()).unwrap();
            prop_assert_eq!(&back, r);
        }
        let pair = theorems::Pair::new(&a, &b).unwrap();
        let mut f = Finding::for_pair(FindingKind::Violation, &pair, Some(t), Some(9));
        f.reports = reports;
        let back: Finding = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert!(replay(&back).unwrap());
    }
}

#[test]
fn threshold_is_exact_ceiling_on_sampled_t() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20_000 {
        let t: i64 = rand::Rng::gen_range(&mut rng, 2..=1_000_000);
        let v = theorems::threshold_new(t).unwrap();
        assert!(3 * v >= -4 * t * t + 2 * t && -4 * t * t + 2 * t > 3 * (v - 1));
    }
    assert_eq!(theorems::threshold_new(2).unwrap(), -2 * 4 + 3 * 2 - 2);
}
