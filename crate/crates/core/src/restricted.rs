//! Restricted sumsets `A ⊕_τ B = {a+b : b ≠ τ(a)}` for injective `τ: A → G`,
//! with Lev's bound and the popular-sum bound.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::Element;
use crate::set::GroupSet;
use crate::theorems::Verdict;
use crate::SCHEMA_VERSION;

/// An injective map defined on every element of its domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauMap {
    domain: GroupSet,
    /// `images[i]` is the image of the i-th domain element in index order.
    images: Vec<usize>,
}

impl TauMap {
    pub fn new(domain: &GroupSet, pairs: &[(Element, Element)]) -> Result<Self> {
        let order = domain.group().order();
        let mut image_of = vec![usize::MAX; order];
        for &(a, img) in pairs {
            if a.index() >= order || img.index() >= order {
                return Err(Error::OutOfRange { index: a.index().max(img.index()), order });
            }
            if !domain.contains(a) {
                return Err(Error::InvalidParameter(format!("tau defined at {a}, which is not in A")));
            }
            if image_of[a.index()] != usize::MAX {
                return Err(Error::InvalidParameter(format!("tau defined twice at {a}")));
            }
            image_of[a.index()] = img.index();
        }
        let images: Vec<usize> = domain.iter_indices().map(|a| image_of[a]).collect();
        if images.iter().any(|&x| x == usize::MAX) {
            return Err(Error::InvalidParameter("tau must be defined on all of A".into()));
        }
        let mut seen = vec![false; order];
        for &x in &images {
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::NotInjective(format!("two elements map to {x}")));
            }
        }
        Ok(TauMap { domain: domain.clone(), images })
    }

    /// `τ(a) = a`.
    pub fn identity(domain: &GroupSet) -> Self {
        TauMap { domain: domain.clone(), images: domain.to_indices() }
    }

    /// A uniformly random injection `A → G`.
    pub fn random(domain: &GroupSet, rng: &mut impl Rng) -> Self {
        let mut all: Vec<usize> = (0..domain.group().order()).collect();
        let (picked, _) = all.partial_shuffle(rng, domain.len());
        TauMap { domain: domain.clone(), images: picked.to_vec() }
    }

    pub fn domain(&self) -> &GroupSet {
        &self.domain
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.domain.iter_indices().zip(self.images.iter().copied()).collect()
    }

    fn check_domain(&self, a: &GroupSet) -> Result<()> {
        if *a != self.domain {
            return Err(Error::InvalidParameter("tau must be defined on A".into()));
        }
        Ok(())
    }
}

pub fn restricted_sumset(a: &GroupSet, b: &GroupSet, tau: &TauMap) -> Result<GroupSet> {
    a.check_same_group(b)?;
    tau.check_domain(a)?;
    let group = a.group();
    let mut out = GroupSet::empty(group);
    for (x, &img) in a.iter_indices().zip(&tau.images) {
        for y in b.iter_indices() {
            if y != img {
                out.insert_idx(group.add_idx(x, y));
            }
        }
    }
    Ok(out)
}

/// Number of pairs `(a, τ(a))` with `τ(a) ∈ B`.
pub fn tau_size(a: &GroupSet, b: &GroupSet, tau: &TauMap) -> Result<usize> {
    tau.check_domain(a)?;
    Ok(tau.images.iter().filter(|&&x| b.contains_idx(x)).count())
}

/// `n - √n - 1/2`, a strict lower bound.
pub fn lev_bound(n: usize) -> f64 {
    let n = n as f64;
    n - n.sqrt() - 0.5
}

/// `n + (1 - 4√(3M))/3`, a non-strict lower bound.
pub fn new_bound(n: usize, m: usize) -> f64 {
    n as f64 + (1.0 - 4.0 * (3.0 * m as f64).sqrt()) / 3.0
}

/// `M` below this value makes [`new_bound`] the stronger one.
pub fn crossover_threshold(n: usize) -> f64 {
    let n = n as f64;
    3.0 * n / 16.0 + 5.0 * n.sqrt() / 16.0 + 25.0 / 192.0
}

/// `size > n - √n - 1/2` without floating point.
pub fn lev_holds(n: usize, size: usize) -> bool {
    let d = n as i64 - size as i64;
    d <= 0 || (2 * d - 1) * (2 * d - 1) < 4 * n as i64
}

/// `size >= n + (1 - 4√(3M))/3` without floating point.
pub fn new_holds(n: usize, m: usize, size: usize) -> bool {
    let d = n as i64 - size as i64;
    3 * d + 1 <= 0 || (3 * d + 1) * (3 * d + 1) <= 48 * m as i64
}

/// Smallest `t` with `4t^2 >= 3M`, i.e. `⌈√(3M)/2⌉`.
pub fn bothcases_t(m: usize) -> u64 {
    let target = 3 * m as u64;
    let mut t = ((target as f64).sqrt() / 2.0).floor() as u64;
    while 4 * t * t < target {
        t += 1;
    }
    while t > 0 && 4 * (t - 1) * (t - 1) >= target {
        t -= 1;
    }
    t
}

/// `size >= n - 4t/3 - M/t + 5/3`, cross-multiplied by `3t`.
pub fn bothcases_holds(n: usize, m: usize, size: usize, t: u64) -> bool {
    let (n, m, size, t) = (n as i64, m as i64, size as i64, t as i64);
    3 * t * size >= 3 * t * n - 4 * t * t - 3 * m + 5 * t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedReport {
    pub schema: u32,
    pub group: String,
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    pub tau: Vec<(usize, usize)>,
    pub restricted: Vec<usize>,
    pub size: usize,
    pub tau_size: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub lev_rhs: f64,
    pub new_rhs: f64,
    pub lev_holds: bool,
    pub new_holds: bool,
    /// `A + B = G`, forced by the size hypothesis.
    pub sumset_is_group: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bothcases_t: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bothcases_holds: Option<bool>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RestrictedReport {
    pub fn all_hold(&self) -> bool {
        self.lev_holds
            && self.new_holds
            && self.sumset_is_group
            && self.tau_size <= self.m
            && self.bothcases_holds.unwrap_or(true)
    }
}

/// Evaluates both bounds. Under `|A|+|B| <= |G|` the verdict is
/// hypothesis-not-met but the sizes are still reported.
pub fn check_restricted(a: &GroupSet, b: &GroupSet, tau: &TauMap) -> Result<RestrictedReport> {
    let restricted = restricted_sumset(a, b, tau)?;
    let n = a.group().order();
    let size = restricted.len();
    let m = a.len().min(b.len());
    let ts = tau_size(a, b, tau)?;
    let hypothesis = a.len() + b.len() > n;
    let sumset_is_group = crate::algebra::sumset(a, b).len() == n;
    let lev = lev_holds(n, size);
    let new = new_holds(n, m, size);
    let bt = bothcases_t(m);
    let (bothcases_t, bothcases_holds) = if (2..=m as u64).contains(&bt) {
        (Some(bt), Some(bothcases_holds(n, m, size, bt)))
    } else {
        (None, None)
    };
    let mut report = RestrictedReport {
        schema: SCHEMA_VERSION,
        group: a.group().spec(),
        a: a.to_indices(),
        b: b.to_indices(),
        tau: tau.pairs(),
        restricted: restricted.to_indices(),
        size,
        tau_size: ts,
        m,
        lev_rhs: lev_bound(n),
        new_rhs: new_bound(n, m),
        lev_holds: lev,
        new_holds: new,
        sumset_is_group,
        bothcases_t,
        bothcases_holds,
        verdict: Verdict::HypothesisNotMet,
        seed: None,
    };
    if hypothesis {
        report.verdict = Verdict::from_bool(report.all_hold());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteAbelianGroup;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn set(g: &Arc<FiniteAbelianGroup>, xs: &[usize]) -> GroupSet {
        GroupSet::from_indices(g, xs.iter().copied()).unwrap()
    }

    #[test]
    fn z5_identity_example() {
        let g = FiniteAbelianGroup::cyclic(5).unwrap();
        let a = set(&g, &[0, 1, 2, 3]);
        let b = set(&g, &[0, 1]);
        let tau = TauMap::identity(&a);
        assert_eq!(restricted_sumset(&a, &b, &tau).unwrap().to_indices(), vec![1, 2, 3, 4]);
        assert_eq!(tau_size(&a, &b, &tau).unwrap(), 2);
        let r = check_restricted(&a, &b, &tau).unwrap();
        assert_eq!((r.size, r.verdict), (4, Verdict::Holds));
        assert!((r.lev_rhs - 2.2639).abs() < 1e-4);
        assert!((r.new_rhs - 2.067347).abs() < 1e-6);
    }

    #[test]
    fn trivial_cases() {
        let g = FiniteAbelianGroup::cyclic(5).unwrap();
        let a = set(&g, &[0, 1]);
        let b = set(&g, &[0, 1]);
        let tau = TauMap::new(&a, &[(g.element(0).unwrap(), g.element(3).unwrap()), (g.element(1).unwrap(), g.element(4).unwrap())]).unwrap();
        assert_eq!(restricted_sumset(&a, &b, &tau).unwrap(), crate::algebra::sumset(&a, &b));
        assert_eq!(tau_size(&a, &b, &tau).unwrap(), 0);
        let e = GroupSet::empty(&g);
        assert!(restricted_sumset(&e, &b, &TauMap::identity(&e)).unwrap().is_empty());
        let full = GroupSet::full(&g);
        let r = check_restricted(&full, &full, &TauMap::identity(&full)).unwrap();
        assert_eq!((r.size, r.verdict), (5, Verdict::Holds));
        let r = check_restricted(&set(&g, &[0, 1, 2]), &set(&g, &[0, 1]), &TauMap::identity(&set(&g, &[0, 1, 2]))).unwrap();
        assert_eq!(r.verdict, Verdict::HypothesisNotMet);
        // B = τ(A)
        let tau = TauMap::identity(&a);
        assert_eq!(tau_size(&a, &a, &tau).unwrap(), 2);
    }

    #[test]
    fn tau_validation() {
        let g = FiniteAbelianGroup::cyclic(5).unwrap();
        let a = set(&g, &[0, 1]);
        let e = |i| g.element(i).unwrap();
        assert!(matches!(TauMap::new(&a, &[(e(0), e(2)), (e(1), e(2))]), Err(Error::NotInjective(_))));
        assert!(TauMap::new(&a, &[(e(0), e(2))]).is_err());
        assert!(TauMap::new(&a, &[(e(0), e(2)), (e(3), e(1))]).is_err());
    }

    #[test]
    fn closed_forms() {
        assert!((lev_bound(5) - 2.263932).abs() < 1e-6);
        assert_eq!(lev_bound(16), 11.5);
        assert_eq!(lev_bound(1), -0.5);
        assert!((new_bound(5, 2) - 2.067347).abs() < 1e-6);
        assert!((new_bound(10, 3) - (10.0 - 11.0 / 3.0)).abs() < 1e-12);
        assert!(9.0 > new_bound(10, 1));
        assert!((crossover_threshold(16) - 4.380208).abs() < 1e-6);
        assert!((crossover_threshold(1) - 0.630208).abs() < 1e-6);
        assert!((crossover_threshold(64) - 14.630208).abs() < 1e-6);
    }

    #[test]
    fn exact_comparisons_match_floats() {
        for n in 1..400usize {
            for size in 0..=n {
                let f = size as f64 > lev_bound(n);
                if (size as f64 - lev_bound(n)).abs() > 1e-9 {
                    assert_eq!(lev_holds(n, size), f, "n={n} size={size}");
                }
                for m in [1usize, 2, 3, 5, 12, 48, n] {
                    let f = size as f64 >= new_bound(n, m);
                    if (size as f64 - new_bound(n, m)).abs() > 1e-9 {
                        assert_eq!(new_holds(n, m, size), f, "n={n} m={m} size={size}");
                    }
                }
            }
        }
        // M = 3: bound is exactly n - 11/3, never an integer
        assert!(new_holds(10, 3, 7) && !new_holds(10, 3, 6));
    }

    #[test]
    fn bothcases_t_is_ceiling() {
        for m in 1..5000usize {
            let t = bothcases_t(m);
            assert_eq!(t, ((3.0 * m as f64).sqrt() / 2.0).ceil() as u64, "m={m}");
        }
    }

    #[test]
    fn crossover_separates_bounds() {
        for n in 1..500usize {
            let c = crossover_threshold(n);
            for m in 1..=n {
                if (m as f64 - c).abs() < 1e-9 {
                    continue;
                }
                assert_eq!(new_bound(n, m) > lev_bound(n), (m as f64) < c, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn deletion_loses_at_most_tau_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in ["Z8", "Z2xZ4", "Z7"] {
            let g = FiniteAbelianGroup::parse(spec).unwrap();
            let n = g.order();
            for ma in 1u64..(1 << n) {
                let a = GroupSet::from_mask(&g, ma).unwrap();
                let mb: u64 = rng.gen_range(1..(1u64 << n));
                let b = GroupSet::from_mask(&g, mb).unwrap();
                let tau = TauMap::random(&a, &mut rng);
                let full = crate::algebra::sumset(&a, &b);
                let res = restricted_sumset(&a, &b, &tau).unwrap();
                assert!(res.is_subset(&full));
                assert!(full.len() - res.len() <= tau_size(&a, &b, &tau).unwrap());
            }
        }
    }
}
