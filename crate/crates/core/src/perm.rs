//! Permutations of `{0, …, n-1}` and their cycle machinery.
//!
//! Indices are 0-based throughout the Rust API. The text formats (one-line
//! rows and cycle notation) are 1-based: `"4 1 3 2"` and `"(142)(3)"` denote
//! the same permutation, `1 -> 4 -> 2 -> 1` with `3` fixed.
//!
//! Composition follows the left-to-right convention `(σ·π)(i) = π(σ(i))`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A bijection of `{0, …, n-1}` stored in one-line form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<usize>,
}

fn check_bijection(map: &[usize]) -> Result<()> {
    let n = map.len();
    let mut seen = vec![false; n];
    for &x in map {
        if x >= n || seen[x] {
            return Err(Error::NotAPermutation(format!("{map:?}")));
        }
        seen[x] = true;
    }
    Ok(())
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// Builds from a 0-based image vector, `map[i] = π(i)`.
    pub fn from_vec(map: Vec<usize>) -> Result<Self> {
        check_bijection(&map)?;
        Ok(Self { map })
    }

    /// Builds from a 1-based one-line vector, `one_line[i-1] = π(i)`.
    pub fn from_one_line(one_line: &[usize]) -> Result<Self> {
        if one_line.contains(&0) {
            return Err(Error::NotAPermutation(format!(
                "{one_line:?} (one-line form is 1-based)"
            )));
        }
        Self::from_vec(one_line.iter().map(|&x| x - 1).collect())
    }

    /// Builds from disjoint 0-based cycles; elements not mentioned are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for (pos, &x) in cycle.iter().enumerate() {
                if x >= n || used[x] {
                    return Err(Error::NotAPermutation(format!("cycles {cycles:?}")));
                }
                used[x] = true;
                map[x] = cycle[(pos + 1) % cycle.len()];
            }
        }
        Ok(Self { map })
    }

    /// Parses 1-based cycle notation such as `"(143)(2)"` or `"(1 4 3)(2)"`.
    ///
    /// For `n < 10` an unseparated cycle such as `(143)` is read digit by
    /// digit; otherwise elements must be separated by spaces or commas.
    pub fn parse_cycles(s: &str, n: usize) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in {s:?}")))?;
            let close = open
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced parenthesis in {s:?}")))?;
            let body = &open[..close];
            let tokens: Vec<&str> = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            let elements: Vec<usize> = if n < 10 && tokens.len() == 1 && body.trim().len() > 1 {
                body.trim()
                    .chars()
                    .map(|c| {
                        c.to_digit(10)
                            .map(|d| d as usize)
                            .ok_or_else(|| Error::Parse(format!("bad element {c:?} in {s:?}")))
                    })
                    .collect::<Result<_>>()?
            } else {
                tokens
                    .iter()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| Error::Parse(format!("bad element {t:?} in {s:?}")))
                    })
                    .collect::<Result<_>>()?
            };
            if elements.is_empty() || elements.contains(&0) {
                return Err(Error::Parse(format!("bad cycle ({body}) in {s:?}")));
            }
            cycles.push(elements.into_iter().map(|x| x - 1).collect());
            rest = open[close + 1..].trim_start();
        }
        Self::from_cycles(n, &cycles)
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    /// `π(i)`, 0-based.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.map
    }

    /// 1-based one-line form.
    pub fn one_line(&self) -> Vec<usize> {
        self.map.iter().map(|&x| x + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Self { map: inv }
    }

    pub fn cycles(&self) -> CycleDecomposition {
        canonical_cycles(self)
    }

    /// Number of cycles `k(π)`.
    pub fn cycle_count(&self) -> usize {
        count_cycles(self.n(), |i| self.map[i], &mut vec![false; self.n()])
    }

    /// Cycle structure `z(π)` with 0-based labels in order of appearance.
    pub fn allocation(&self) -> Vec<usize> {
        canonical_cycles(self).z
    }

    /// One-line text form: whitespace separated 1-based images.
    pub fn to_one_line_string(&self) -> String {
        let mut out = String::with_capacity(self.n() * 3);
        for (pos, x) in self.map.iter().enumerate() {
            if pos > 0 {
                out.push(' ');
            }
            out.push_str(&(x + 1).to_string());
        }
        out
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Parses the one-line format `"π(1) π(2) … π(n)"`.
    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad one-line entry {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_line(&values)
    }
}

impl serde::Serialize for Permutation {
    /// Serialized as its 1-based one-line string.
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_one_line_string())
    }
}

impl<'de> serde::Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Permutation {
    /// Canonical cycle notation, e.g. `(143)(2)`; elements are space separated
    /// once `n ≥ 10`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spaced = self.n() >= 10;
        for cycle in &canonical_cycles(self).cycles {
            f.write_str("(")?;
            for (pos, x) in cycle.iter().enumerate() {
                if spaced && pos > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", x + 1)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Canonical cycle representation and its derived summaries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleDecomposition {
    /// Cycles, each starting at its least element, ordered by first element.
    pub cycles: Vec<Vec<usize>>,
    /// Cycle ordinal of every element (0-based, order of appearance).
    pub z: Vec<usize>,
    /// `t[i-1]` = number of cycles of length `i`.
    pub t: Vec<usize>,
    /// Cycle lengths in canonical order.
    pub c: Vec<usize>,
}

impl CycleDecomposition {
    pub fn k(&self) -> usize {
        self.cycles.len()
    }
}

pub(crate) fn count_cycles(n: usize, f: impl Fn(usize) -> usize, seen: &mut [bool]) -> usize {
    seen[..n].iter_mut().for_each(|s| *s = false);
    let mut k = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        k += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = f(i);
        }
    }
    k
}

pub fn canonical_cycles(pi: &Permutation) -> CycleDecomposition {
    let n = pi.n();
    let mut z = vec![usize::MAX; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if z[start] != usize::MAX {
            continue;
        }
        let label = cycles.len();
        let mut cycle = Vec::new();
        let mut i = start;
        while z[i] == usize::MAX {
            z[i] = label;
            cycle.push(i);
            i = pi.apply(i);
        }
        cycles.push(cycle);
    }
    let c: Vec<usize> = cycles.iter().map(Vec::len).collect();
    let mut t = vec![0; n];
    for &len in &c {
        t[len - 1] += 1;
    }
    CycleDecomposition { cycles, z, t, c }
}

fn same_size(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::SizeMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// `σ·π`, i.e. `i ↦ π(σ(i))`.
pub fn compose(sigma: &Permutation, pi: &Permutation) -> Result<Permutation> {
    same_size(sigma.n(), pi.n())?;
    Ok(Permutation {
        map: sigma.map.iter().map(|&s| pi.map[s]).collect(),
    })
}

pub fn inverse(pi: &Permutation) -> Permutation {
    pi.inverse()
}

/// `σ⁻¹·π·σ`: relabels the elements of π's cycles through σ.
pub fn conjugate(pi: &Permutation, sigma: &Permutation) -> Result<Permutation> {
    same_size(pi.n(), sigma.n())?;
    let sigma_inv = sigma.inverse();
    Ok(Permutation {
        map: (0..pi.n())
            .map(|i| sigma.map[pi.map[sigma_inv.map[i]]])
            .collect(),
    })
}

/// Removes the largest element from the cycle representation of
/// `σ ∈ S_{n+1}`, giving an element of `S_n`.
pub fn delete_last(sigma: &Permutation) -> Result<Permutation> {
    let m = sigma.n();
    if m < 2 {
        return Err(Error::InvalidInput(
            "cannot delete the last element of a permutation of size < 2".into(),
        ));
    }
    let last = m - 1;
    let mut map = sigma.map[..last].to_vec();
    if let Some(pre) = map.iter().position(|&x| x == last) {
        map[pre] = sigma.map[last];
    }
    Ok(Permutation { map })
}

/// Removes node `v` from the cycle representation of `π`.
pub fn delete_node(pi: &Permutation, v: usize) -> Result<NodeSubsetPermutation> {
    if v >= pi.n() {
        return Err(Error::OutOfRange { index: v, n: pi.n() });
    }
    let mut sub = NodeSubsetPermutation::from_permutation(pi);
    sub.remove(v);
    Ok(sub)
}

/// Undo record for [`NodeSubsetPermutation::remove`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Removal {
    pub node: usize,
    /// Image of the removed node before removal (itself if it was fixed).
    pub image: usize,
}

/// A bijection of a subset of `{0, …, n-1}` onto itself.
///
/// Stored as full-length forward and inverse maps plus a support mask, so
/// nodes keep their original labels through deletions and insertions.
/// Entries outside the support point to themselves.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NodeSubsetPermutation {
    map: Vec<usize>,
    inv: Vec<usize>,
    present: Vec<bool>,
    len: usize,
}

impl NodeSubsetPermutation {
    pub fn empty(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
            inv: (0..n).collect(),
            present: vec![false; n],
            len: 0,
        }
    }

    pub fn from_permutation(pi: &Permutation) -> Self {
        let n = pi.n();
        let mut inv = vec![0; n];
        for (i, &x) in pi.map.iter().enumerate() {
            inv[x] = i;
        }
        Self {
            map: pi.map.clone(),
            inv,
            present: vec![true; n],
            len: n,
        }
    }

    /// Builds from a 0-based partial map given as `(node, image)` pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut out = Self::empty(n);
        for &(u, _) in pairs {
            if u >= n || out.present[u] {
                return Err(Error::NotAPermutation(format!("pairs {pairs:?}")));
            }
            out.present[u] = true;
        }
        let mut hit = vec![false; n];
        for &(u, x) in pairs {
            if x >= n || !out.present[x] || hit[x] {
                return Err(Error::NotAPermutation(format!("pairs {pairs:?}")));
            }
            hit[x] = true;
            out.map[u] = x;
            out.inv[x] = u;
        }
        out.len = pairs.len();
        Ok(out)
    }

    /// Size of the ground set `{0, …, n-1}`.
    pub fn n(&self) -> usize {
        self.map.len()
    }

    /// Number of nodes in the support.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.present[v]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&u| self.present[u])
    }

    #[inline]
    pub fn apply(&self, u: usize) -> usize {
        self.map[u]
    }

    #[inline]
    pub fn apply_inverse(&self, u: usize) -> usize {
        self.inv[u]
    }

    /// Removes `v` from its cycle: its predecessor now maps to its image.
    /// Removing a node outside the support is a no-op.
    pub fn remove(&mut self, v: usize) -> Removal {
        let image = self.map[v];
        if self.present[v] {
            let pre = self.inv[v];
            if pre != v {
                self.map[pre] = image;
                self.inv[image] = pre;
            }
            self.map[v] = v;
            self.inv[v] = v;
            self.present[v] = false;
            self.len -= 1;
        }
        Removal { node: v, image }
    }

    /// Inserts `v` so that it maps to `target` (which must be in the
    /// support), or as a fixed point when `target == v`.
    ///
    /// Panics if `v` is already present or `target` is absent.
    pub fn insert(&mut self, v: usize, target: usize) {
        assert!(!self.present[v], "node {v} already in support");
        if target != v {
            assert!(self.present[target], "target {target} not in support");
            let w = self.inv[target];
            self.map[w] = v;
            self.inv[v] = w;
            self.map[v] = target;
            self.inv[target] = v;
        } else {
            self.map[v] = v;
            self.inv[v] = v;
        }
        self.present[v] = true;
        self.len += 1;
    }

    /// Reverts a [`remove`](Self::remove).
    pub fn restore(&mut self, removal: Removal) {
        if !self.present[removal.node] {
            self.insert(removal.node, removal.image);
        }
    }

    /// Cycle ordinals over the support, in order of appearance; entries
    /// outside the support are `usize::MAX`.
    pub fn cycle_labels(&self) -> (Vec<usize>, usize) {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut k = 0;
        for start in 0..n {
            if !self.present[start] || label[start] != usize::MAX {
                continue;
            }
            let mut i = start;
            while label[i] == usize::MAX {
                label[i] = k;
                i = self.map[i];
            }
            k += 1;
        }
        (label, k)
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_labels().1
    }

    /// Converts to a [`Permutation`] when the support is the whole ground set.
    pub fn to_permutation(&self) -> Result<Permutation> {
        if self.len != self.n() {
            return Err(Error::InvalidInput(format!(
                "support has {} of {} nodes",
                self.len,
                self.n()
            )));
        }
        Ok(Permutation {
            map: self.map.clone(),
        })
    }

    /// Cayley distance to another permutation of the same support.
    pub fn cayley_to(&self, other: &NodeSubsetPermutation, seen: &mut Vec<bool>) -> Result<usize> {
        if self.present != other.present {
            return Err(Error::InvalidInput("supports differ".into()));
        }
        Ok(subset_cayley(self, other, seen))
    }
}

/// Cayley distance between two permutations of the same support (unchecked).
pub(crate) fn subset_cayley(
    pi: &NodeSubsetPermutation,
    sigma: &NodeSubsetPermutation,
    seen: &mut Vec<bool>,
) -> usize {
    let n = pi.n();
    seen.clear();
    seen.resize(n, false);
    let mut k = 0;
    for start in 0..n {
        if !pi.present[start] || seen[start] {
            continue;
        }
        k += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = pi.map[sigma.inv[i]];
        }
    }
    pi.len - k
}

/// One element of an insertion set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Insertion {
    /// `u* = π*(v)`; equal to `v` for the new fixed point.
    pub target: usize,
    /// Ordinal (order of appearance in σ) of the cycle `v` joins; equals the
    /// cycle count of σ when `v` opens a new cycle.
    pub cycle: usize,
    /// The resulting permutation, inverse included.
    pub perm: NodeSubsetPermutation,
}

/// All permutations obtained by adding `v` to σ: one per seat in an
/// existing cycle, plus `v` as a new fixed point.
///
/// Ordered by target ascending, the new fixed point last.
pub fn insertion_set(sigma: &NodeSubsetPermutation, v: usize) -> Result<Vec<Insertion>> {
    if v >= sigma.n() {
        return Err(Error::OutOfRange {
            index: v,
            n: sigma.n(),
        });
    }
    if sigma.contains(v) {
        return Err(Error::InvalidInput(format!("node {v} already in support")));
    }
    let (label, k) = sigma.cycle_labels();
    let mut out = Vec::with_capacity(sigma.len() + 1);
    for target in sigma.support().chain(std::iter::once(v)) {
        let mut perm = sigma.clone();
        perm.insert(v, target);
        let cycle = if target == v { k } else { label[target] };
        out.push(Insertion { target, cycle, perm });
    }
    Ok(out)
}

/// Minimum number of transpositions taking σ to π: `n − k(σ⁻¹·π)`.
pub fn cayley_distance(pi: &Permutation, sigma: &Permutation) -> Result<usize> {
    same_size(pi.n(), sigma.n())?;
    let sigma_inv = sigma.inverse();
    let n = pi.n();
    Ok(n - count_cycles(n, |i| pi.map[sigma_inv.map[i]], &mut vec![false; n]))
}

/// Number of positions where the two maps disagree.
pub fn hamming_distance(pi: &Permutation, sigma: &Permutation) -> Result<usize> {
    same_size(pi.n(), sigma.n())?;
    Ok(pi
        .map
        .iter()
        .zip(&sigma.map)
        .filter(|(a, b)| a != b)
        .count())
}
