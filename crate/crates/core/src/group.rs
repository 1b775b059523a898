//! Finite abelian groups `Z_{d1} x ... x Z_{dk}` with dense mixed-radix
//! element indices, subgroup enumeration and quotient maps.
//!
//! Component `j` of index `g` is `(g / prod_{i>j} d_i) mod d_j`, so the first
//! factor is the most significant digit. `Z4xZ2` therefore maps the tuple
//! `(3,1)` to index `7`.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::GroupSet;

/// Default cap on `|G|` for [`FiniteAbelianGroup::subgroups`].
pub const DEFAULT_SUBGROUP_LIMIT: usize = 4096;

/// Groups up to this order get a precomputed addition table.
const ADD_TABLE_LIMIT: usize = 1024;

/// A group element, identified by its dense index in `[0, |G|)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(usize);

impl Element {
    /// Wraps a raw index. Range checks happen when the element meets a group.
    #[inline]
    pub const fn from_index(index: usize) -> Self {
        Element(index)
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub struct FiniteAbelianGroup {
    moduli: Vec<usize>,
    order: usize,
    strides: Vec<usize>,
    neg_table: Vec<u32>,
    add_table: OnceLock<Option<Vec<u16>>>,
    subgroup_masks: OnceLock<Result<Arc<Vec<GroupSet>>>>,
}

impl fmt::Debug for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("FiniteAbelianGroup").field(&self.spec()).finish()
    }
}

impl PartialEq for FiniteAbelianGroup {
    fn eq(&self, other: &Self) -> bool {
        self.moduli == other.moduli
    }
}

impl Eq for FiniteAbelianGroup {}

impl FiniteAbelianGroup {
    /// Builds `Z_{d1} x ... x Z_{dk}`. An empty modulus list means `Z1`.
    pub fn new(mut moduli: Vec<usize>) -> Result<Arc<Self>> {
        if moduli.is_empty() {
            moduli.push(1);
        }
        if moduli.iter().any(|&d| d == 0) {
            return Err(Error::InvalidGroup("every modulus must be >= 1".into()));
        }
        let order = moduli
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or_else(|| Error::InvalidGroup("group order overflows".into()))?;
        let mut strides = vec![1usize; moduli.len()];
        for j in (0..moduli.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * moduli[j + 1];
        }
        let mut group = FiniteAbelianGroup {
            moduli,
            order,
            strides,
            neg_table: Vec::new(),
            add_table: OnceLock::new(),
            subgroup_masks: OnceLock::new(),
        };
        group.neg_table = (0..order).map(|g| group.neg_slow(g) as u32).collect();
        Ok(Arc::new(group))
    }

    /// The cyclic group `Z_n`.
    pub fn cyclic(n: usize) -> Result<Arc<Self>> {
        Self::new(vec![n])
    }

    /// Parses `Z<n>("x"Z<n>)*`, e.g. `Z12` or `Z4xZ2`.
    pub fn parse(spec: &str) -> Result<Arc<Self>> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Err(Error::Parse("empty group spec".into()));
        }
        let moduli = spec
            .split(['x', 'X', '×'])
            .map(|factor| {
                let digits = factor
                    .trim()
                    .strip_prefix(['Z', 'z'])
                    .ok_or_else(|| Error::Parse(format!("group factor `{factor}` must look like Z<n>")))?;
                digits
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad modulus in group factor `{factor}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(moduli)
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    /// Canonical spec string, the inverse of [`parse`](Self::parse).
    pub fn spec(&self) -> String {
        self.moduli
            .iter()
            .map(|d| format!("Z{d}"))
            .collect::<Vec<_>>()
            .join("x")
    }

    pub fn is_cyclic_prime(&self) -> Option<usize> {
        match self.moduli.as_slice() {
            [p] if is_prime(*p) => Some(*p),
            _ => None,
        }
    }

    #[inline]
    pub fn zero(&self) -> Element {
        Element(0)
    }

    /// Range-checked element constructor.
    pub fn element(&self, index: usize) -> Result<Element> {
        if index < self.order {
            Ok(Element(index))
        } else {
            Err(Error::OutOfRange { index, order: self.order })
        }
    }

    /// Element from its component tuple.
    pub fn element_from_components(&self, components: &[usize]) -> Result<Element> {
        if components.len() != self.moduli.len() {
            return Err(Error::Parse(format!(
                "tuple has {} components, group {} has {}",
                components.len(),
                self.spec(),
                self.moduli.len()
            )));
        }
        let mut index = 0;
        for (j, (&c, &d)) in components.iter().zip(&self.moduli).enumerate() {
            if c >= d {
                return Err(Error::Parse(format!("component {c} out of range for Z{d} (position {j})")));
            }
            index += c * self.strides[j];
        }
        Ok(Element(index))
    }

    pub fn components(&self, g: Element) -> Vec<usize> {
        self.check(g);
        self.moduli
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| (g.0 / s) % d)
            .collect()
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        (0..self.order).map(Element)
    }

    #[inline]
    fn check(&self, g: Element) {
        assert!(g.0 < self.order, "element {} out of range for {}", g.0, self.spec());
    }

    fn add_slow(&self, g: usize, h: usize) -> usize {
        let mut out = 0;
        for (&d, &s) in self.moduli.iter().zip(&self.strides) {
            let c = ((g / s) % d + (h / s) % d) % d;
            out += c * s;
        }
        out
    }

    fn neg_slow(&self, g: usize) -> usize {
        let mut out = 0;
        for (&d, &s) in self.moduli.iter().zip(&self.strides) {
            let c = (g / s) % d;
            out += ((d - c) % d) * s;
        }
        out
    }

    fn table(&self) -> Option<&[u16]> {
        self.add_table
            .get_or_init(|| {
                (self.order <= ADD_TABLE_LIMIT).then(|| {
                    let n = self.order;
                    let mut t = vec![0u16; n * n];
                    for g in 0..n {
                        for h in 0..n {
                            t[g * n + h] = self.add_slow(g, h) as u16;
                        }
                    }
                    t
                })
            })
            .as_deref()
    }

    /// Raw-index addition used by the set kernels.
    #[inline]
    pub(crate) fn add_idx(&self, g: usize, h: usize) -> usize {
        match self.table() {
            Some(t) => t[g * self.order + h] as usize,
            None => self.add_slow(g, h),
        }
    }

    /// Row of the addition table for `g`, when the table exists.
    #[inline]
    pub(crate) fn add_row(&self, g: usize) -> Option<&[u16]> {
        self.table().map(|t| &t[g * self.order..(g + 1) * self.order])
    }

    #[inline]
    pub(crate) fn neg_idx(&self, g: usize) -> usize {
        self.neg_table[g] as usize
    }

    #[inline]
    pub(crate) fn sub_idx(&self, g: usize, h: usize) -> usize {
        self.add_idx(g, self.neg_idx(h))
    }

    pub fn add(&self, g: Element, h: Element) -> Element {
        self.check(g);
        self.check(h);
        Element(self.add_idx(g.0, h.0))
    }

    pub fn neg(&self, g: Element) -> Element {
        self.check(g);
        Element(self.neg_idx(g.0))
    }

    pub fn sub(&self, g: Element, h: Element) -> Element {
        self.add(g, self.neg(h))
    }

    /// `k * g`.
    pub fn mul(&self, k: usize, g: Element) -> Element {
        self.check(g);
        let mut out = 0;
        for (&d, &s) in self.moduli.iter().zip(&self.strides) {
            out += (((g.0 / s) % d) * (k % d) % d) * s;
        }
        Element(out)
    }

    /// Order of `g` in the group.
    pub fn element_order(&self, g: Element) -> usize {
        self.check(g);
        self.moduli
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| {
                let c = (g.0 / s) % d;
                d / gcd(c, d)
            })
            .fold(1, lcm)
    }
}

/// Smallest subgroup containing `gens`; empty `gens` gives `{0}`.
pub fn subgroup_generated(group: &Arc<FiniteAbelianGroup>, gens: &[Element]) -> Subgroup {
    let mut members = GroupSet::from_indices_unchecked(group, [0]);
    for &g in gens {
        group.check(g);
        if !members.contains(g) {
            members = join_cyclic(&members, g.index());
        }
    }
    Subgroup { members, cosets: OnceLock::new() }
}

/// `<S, g>` for a subgroup `S`: the union of `k*g + S` over all `k`.
fn join_cyclic(subgroup: &GroupSet, g: usize) -> GroupSet {
    let group = subgroup.group();
    let mut out = subgroup.clone();
    let mut shift = g;
    while !subgroup.contains_idx(shift) {
        for s in subgroup.iter_indices() {
            out.insert_idx(group.add_idx(s, shift));
        }
        shift = group.add_idx(shift, g);
    }
    out
}

impl FiniteAbelianGroup {
    /// Every subgroup exactly once, sorted by `(order, member bitmask)`.
    pub fn subgroups(self: &Arc<Self>) -> Result<Arc<Vec<GroupSet>>> {
        self.subgroups_with_limit(DEFAULT_SUBGROUP_LIMIT)
    }

    pub fn subgroups_with_limit(self: &Arc<Self>, limit: usize) -> Result<Arc<Vec<GroupSet>>> {
        if self.order > limit {
            return Err(Error::ResourceLimit(format!(
                "subgroup enumeration of {} (order {}) exceeds limit {limit}",
                self.spec(),
                self.order
            )));
        }
        self.subgroup_masks
            .get_or_init(|| Ok(Arc::new(enumerate_masks(self))))
            .clone()
    }
}

fn enumerate_masks(group: &Arc<FiniteAbelianGroup>) -> Vec<GroupSet> {
    let trivial = GroupSet::from_indices_unchecked(group, [0]);
    let mut seen: HashSet<GroupSet> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(trivial.clone());
    queue.push_back(trivial);
    while let Some(sub) = queue.pop_front() {
        let mut covered = sub.clone();
        for g in 0..group.order() {
            if covered.contains_idx(g) {
                continue;
            }
            covered.union_with(&sub.translate(Element(g)));
            let next = join_cyclic(&sub, g);
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    let mut all: Vec<GroupSet> = seen.into_iter().collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp_mask(b)));
    all
}

/// All subgroups as [`Subgroup`] values, in canonical order.
pub fn enumerate_subgroups(group: &Arc<FiniteAbelianGroup>) -> Result<Vec<Subgroup>> {
    Ok(group
        .subgroups()?
        .iter()
        .map(|m| Subgroup { members: m.clone(), cosets: OnceLock::new() })
        .collect())
}

/// A subgroup `K <= G`, stored by its member set.
#[derive(Clone, Debug)]
pub struct Subgroup {
    members: GroupSet,
    cosets: OnceLock<Arc<Vec<u32>>>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

impl Eq for Subgroup {}

impl Subgroup {
    /// Validates closure and Lagrange before wrapping `members`.
    pub fn from_set(members: GroupSet) -> Result<Self> {
        let group = members.group().clone();
        if !members.contains_idx(0) {
            return Err(Error::InvalidParameter("subgroup must contain 0".into()));
        }
        for a in members.iter_indices() {
            if !members.contains_idx(group.neg_idx(a)) {
                return Err(Error::InvalidParameter(format!("not closed under negation at {a}")));
            }
            for b in members.iter_indices() {
                if !members.contains_idx(group.add_idx(a, b)) {
                    return Err(Error::InvalidParameter(format!("not closed under addition at {a}+{b}")));
                }
            }
        }
        assert_eq!(group.order() % members.len(), 0, "Lagrange violated");
        Ok(Subgroup { members, cosets: OnceLock::new() })
    }

    /// Wraps a set already known to be a subgroup (stabilizers, enumerated masks).
    pub(crate) fn from_set_unchecked(members: GroupSet) -> Self {
        debug_assert!(members.contains_idx(0));
        Subgroup { members, cosets: OnceLock::new() }
    }

    pub fn trivial(group: &Arc<FiniteAbelianGroup>) -> Self {
        Self::from_set_unchecked(GroupSet::from_indices_unchecked(group, [0]))
    }

    pub fn whole(group: &Arc<FiniteAbelianGroup>) -> Self {
        Self::from_set_unchecked(GroupSet::full(group))
    }

    pub fn members(&self) -> &GroupSet {
        &self.members
    }

    pub fn into_members(self) -> GroupSet {
        self.members
    }

    pub fn group(&self) -> &Arc<FiniteAbelianGroup> {
        self.members.group()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn index(&self) -> usize {
        self.group().order() / self.order()
    }

    pub fn contains(&self, g: Element) -> bool {
        self.members.contains(g)
    }

    fn coset_table(&self) -> &Arc<Vec<u32>> {
        self.cosets.get_or_init(|| {
            let group = self.group();
            let mut ids = vec![u32::MAX; group.order()];
            let mut next = 0u32;
            for g in 0..group.order() {
                if ids[g] != u32::MAX {
                    continue;
                }
                for k in self.members.iter_indices() {
                    ids[group.add_idx(g, k)] = next;
                }
                next += 1;
            }
            Arc::new(ids)
        })
    }

    /// Coset id of `g` in `G/K`. Ids are dense and numbered by smallest representative.
    pub fn quotient_map(&self, g: Element) -> usize {
        self.group().check(g);
        self.coset_table()[g.index()] as usize
    }

    pub(crate) fn coset_id_idx(&self, g: usize) -> usize {
        self.coset_table()[g] as usize
    }

    /// Smallest representative of every coset, ordered by coset id.
    pub fn coset_representatives(&self) -> Vec<Element> {
        let table = self.coset_table();
        let mut reps = Vec::with_capacity(self.index());
        for (g, &id) in table.iter().enumerate() {
            if id as usize == reps.len() {
                reps.push(Element(g));
            }
        }
        reps
    }

    /// The coset `g + K`.
    pub fn coset(&self, g: Element) -> GroupSet {
        self.members.translate(g)
    }
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
