//! `GroupSet`: a subset of a finite abelian group stored as a fixed-length
//! bit vector over the dense element indices.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{Element, FiniteAbelianGroup};

#[derive(Clone)]
pub struct GroupSet {
    group: Arc<FiniteAbelianGroup>,
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

impl GroupSet {
    pub fn empty(group: &Arc<FiniteAbelianGroup>) -> Self {
        GroupSet {
            group: group.clone(),
            words: vec![0; word_count(group.order())],
            len: 0,
        }
    }

    pub fn full(group: &Arc<FiniteAbelianGroup>) -> Self {
        let n = group.order();
        let mut words = vec![u64::MAX; word_count(n)];
        if n % 64 != 0 {
            *words.last_mut().unwrap() = (1u64 << (n % 64)) - 1;
        }
        GroupSet { group: group.clone(), words, len: n }
    }

    pub fn from_indices(group: &Arc<FiniteAbelianGroup>, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(group);
        for i in indices {
            group.element(i)?;
            set.insert_idx(i);
        }
        Ok(set)
    }

    pub(crate) fn from_indices_unchecked(
        group: &Arc<FiniteAbelianGroup>,
        indices: impl IntoIterator<Item = usize>,
    ) -> Self {
        let mut set = Self::empty(group);
        for i in indices {
            set.insert_idx(i);
        }
        set
    }

    pub fn from_elements(group: &Arc<FiniteAbelianGroup>, elements: impl IntoIterator<Item = Element>) -> Result<Self> {
        Self::from_indices(group, elements.into_iter().map(Element::index))
    }

    /// Set whose bit `g` is bit `g` of `mask`. Requires `|G| <= 64`.
    pub fn from_mask(group: &Arc<FiniteAbelianGroup>, mask: u64) -> Result<Self> {
        let n = group.order();
        if n > 64 {
            return Err(Error::InvalidParameter(format!("u64 mask cannot address group of order {n}")));
        }
        if n < 64 && mask >> n != 0 {
            return Err(Error::OutOfRange { index: 63 - mask.leading_zeros() as usize, order: n });
        }
        Ok(GroupSet {
            group: group.clone(),
            words: vec![mask],
            len: mask.count_ones() as usize,
        })
    }

    /// Little-endian word representation, `|G|.div_ceil(64)` words.
    pub fn from_words(group: &Arc<FiniteAbelianGroup>, words: Vec<u64>) -> Result<Self> {
        if words.len() != word_count(group.order()) {
            return Err(Error::InvalidParameter("word count does not match group order".into()));
        }
        let n = group.order();
        if n % 64 != 0 && words.last().unwrap() >> (n % 64) != 0 {
            return Err(Error::OutOfRange { index: n, order: n });
        }
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        Ok(GroupSet { group: group.clone(), words, len })
    }

    #[inline]
    pub fn group(&self) -> &Arc<FiniteAbelianGroup> {
        &self.group
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The low 64 bits, i.e. the whole set when `|G| <= 64`.
    pub fn low_mask(&self) -> u64 {
        self.words[0]
    }

    #[inline]
    pub(crate) fn contains_idx(&self, g: usize) -> bool {
        self.words[g >> 6] >> (g & 63) & 1 == 1
    }

    pub fn contains(&self, g: Element) -> bool {
        g.index() < self.group.order() && self.contains_idx(g.index())
    }

    #[inline]
    pub(crate) fn insert_idx(&mut self, g: usize) -> bool {
        let w = &mut self.words[g >> 6];
        let bit = 1u64 << (g & 63);
        let fresh = *w & bit == 0;
        *w |= bit;
        self.len += fresh as usize;
        fresh
    }

    pub fn insert(&mut self, g: Element) -> Result<bool> {
        self.group.element(g.index())?;
        Ok(self.insert_idx(g.index()))
    }

    #[inline]
    pub(crate) fn remove_idx(&mut self, g: usize) -> bool {
        let w = &mut self.words[g >> 6];
        let bit = 1u64 << (g & 63);
        let present = *w & bit != 0;
        *w &= !bit;
        self.len -= present as usize;
        present
    }

    pub fn remove(&mut self, g: Element) -> bool {
        g.index() < self.group.order() && self.remove_idx(g.index())
    }

    pub(crate) fn iter_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = Element> + '_ {
        self.iter_indices().map(Element::from_index)
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.iter_indices().collect()
    }

    pub fn min_element(&self) -> Option<Element> {
        self.iter().next()
    }

    fn recount(&mut self) {
        self.len = self.words.iter().map(|w| w.count_ones() as usize).sum();
    }

    fn same_group(&self, other: &GroupSet) -> Result<()> {
        if Arc::ptr_eq(&self.group, &other.group) || self.group == other.group {
            Ok(())
        } else {
            Err(Error::GroupMismatch { left: self.group.spec(), right: other.group.spec() })
        }
    }

    pub(crate) fn assert_same_group(&self, other: &GroupSet) {
        if let Err(e) = self.same_group(other) {
            panic!("{e}");
        }
    }

    pub(crate) fn check_same_group(&self, other: &GroupSet) -> Result<()> {
        self.same_group(other)
    }

    pub(crate) fn union_with(&mut self, other: &GroupSet) {
        self.assert_same_group(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        self.recount();
    }

    fn zip_words(&self, other: &GroupSet, op: impl Fn(u64, u64) -> u64) -> GroupSet {
        self.assert_same_group(other);
        let words: Vec<u64> = self.words.iter().zip(&other.words).map(|(&a, &b)| op(a, b)).collect();
        let mut out = GroupSet { group: self.group.clone(), words, len: 0 };
        out.recount();
        out
    }

    /// Panics if the sets live in different groups; see the `try_` variants
    /// in [`crate::algebra`] for fallible forms.
    pub fn union(&self, other: &GroupSet) -> GroupSet {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &GroupSet) -> GroupSet {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &GroupSet) -> GroupSet {
        self.zip_words(other, |a, b| a & !b)
    }

    pub fn intersection_len(&self, other: &GroupSet) -> usize {
        self.assert_same_group(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn complement(&self) -> GroupSet {
        GroupSet::full(&self.group).difference(self)
    }

    pub fn is_subset(&self, other: &GroupSet) -> bool {
        self.assert_same_group(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &GroupSet) -> bool {
        self.assert_same_group(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Fills `out` with `g + self`, reusing its buffer.
    pub(crate) fn translate_into(&self, g: usize, out: &mut GroupSet) {
        out.words.iter_mut().for_each(|w| *w = 0);
        let n = self.group.order();
        if let (true, [_]) = (n <= 64, self.group.moduli()) {
            // Z_n with one word: translation is a rotation.
            let x = self.words[0];
            let k = g % n;
            let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let rotated = if k == 0 { x } else { ((x << k) | (x >> (n - k))) & full };
            out.words[0] = rotated;
        } else if let Some(row) = self.group.add_row(g) {
            for a in self.iter_indices() {
                let s = row[a] as usize;
                out.words[s >> 6] |= 1u64 << (s & 63);
            }
        } else {
            for a in self.iter_indices() {
                let s = self.group.add_idx(a, g);
                out.words[s >> 6] |= 1u64 << (s & 63);
            }
        }
        out.len = self.len;
    }

    /// `g + self`.
    pub fn translate(&self, g: Element) -> GroupSet {
        assert!(g.index() < self.group.order());
        let mut out = GroupSet::empty(&self.group);
        self.translate_into(g.index(), &mut out);
        out
    }

    /// `-self`.
    pub fn negate(&self) -> GroupSet {
        let mut out = GroupSet::empty(&self.group);
        for a in self.iter_indices() {
            out.insert_idx(self.group.neg_idx(a));
        }
        out
    }

    /// Compares the sets as integers `sum 2^g`.
    pub fn cmp_mask(&self, other: &GroupSet) -> Ordering {
        self.words.iter().rev().cmp(other.words.iter().rev())
    }

    /// Bitmask as a hex literal (`0x...`), most significant nibble first.
    pub fn to_hex(&self) -> String {
        let mut s = String::from("0x");
        let mut started = false;
        for &w in self.words.iter().rev() {
            if started {
                s.push_str(&format!("{w:016x}"));
            } else if w != 0 {
                s.push_str(&format!("{w:x}"));
                started = true;
            }
        }
        if !started {
            s.push('0');
        }
        s
    }
}

impl PartialEq for GroupSet {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words && (Arc::ptr_eq(&self.group, &other.group) || self.group == other.group)
    }
}

impl Eq for GroupSet {}

impl Hash for GroupSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.words.hash(state);
    }
}

impl fmt::Debug for GroupSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.group.spec(), self)
    }
}

impl fmt::Display for GroupSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, g) in self.iter_indices().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str("}")
    }
}
