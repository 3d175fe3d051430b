//! Incremental bookkeeping of block memberships and between-block edge
//! counts, shared by the permutation sampler and the partition initializer.

use crate::csbm::{BlockCounts, ParentMatrix};
use crate::special::ln_gamma;

pub(crate) const DETACHED: usize = usize::MAX;

/// Blocks live in reusable slots; a node's slot is its block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockState {
    n: usize,
    label: Vec<usize>,
    size: Vec<usize>,
    edges: Vec<u64>,
    active: Vec<usize>,
    pos: Vec<usize>,
    free: Vec<usize>,
}

impl BlockState {
    /// All nodes detached.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            label: vec![DETACHED; n],
            size: vec![0; n],
            edges: vec![0; n * n],
            active: Vec::with_capacity(n),
            pos: vec![DETACHED; n],
            free: (0..n).rev().collect(),
        }
    }

    /// Blocks given by the allocation `z` (any labels below `n`).
    pub fn from_allocation(y: &ParentMatrix, z: &[usize]) -> Self {
        let mut out = Self::new(z.len());
        let mut slot_of_label = vec![DETACHED; z.len()];
        for (v, &label) in z.iter().enumerate() {
            if slot_of_label[label] == DETACHED {
                slot_of_label[label] = out.open_slot();
            }
            out.attach(v, slot_of_label[label], y);
        }
        out
    }

    #[inline]
    pub fn slot_of(&self, v: usize) -> usize {
        self.label[v]
    }

    #[inline]
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Number of non-empty blocks.
    #[inline]
    pub fn k(&self) -> usize {
        self.active.len()
    }

    #[inline]
    pub fn size(&self, slot: usize) -> usize {
        self.size[slot]
    }

    /// Number of attached nodes.
    pub fn attached(&self) -> usize {
        self.active.iter().map(|&s| self.size[s]).sum()
    }

    #[inline]
    pub fn edges(&self, j: usize, h: usize) -> u64 {
        self.edges[j * self.n + h]
    }

    /// Node pairs between slots (within a slot: unordered, no self-pairs).
    #[inline]
    pub fn pairs(&self, j: usize, h: usize) -> u64 {
        let (a, b) = (self.size[j] as u64, self.size[h] as u64);
        if j == h {
            a * a.saturating_sub(1) / 2
        } else {
            a * b
        }
    }

    #[inline]
    pub fn non_edges(&self, j: usize, h: usize) -> u64 {
        self.pairs(j, h) - self.edges(j, h)
    }

    /// Reserves an empty slot and marks it active.
    pub fn open_slot(&mut self) -> usize {
        let s = self.free.pop().expect("more blocks than nodes");
        self.pos[s] = self.active.len();
        self.active.push(s);
        s
    }

    fn close_slot(&mut self, s: usize) {
        let p = self.pos[s];
        self.active.swap_remove(p);
        if p < self.active.len() {
            self.pos[self.active[p]] = p;
        }
        self.pos[s] = DETACHED;
        self.free.push(s);
    }

    #[inline]
    fn bump(&mut self, j: usize, h: usize, up: bool) {
        let n = self.n;
        if up {
            self.edges[j * n + h] += 1;
            if j != h {
                self.edges[h * n + j] += 1;
            }
        } else {
            self.edges[j * n + h] -= 1;
            if j != h {
                self.edges[h * n + j] -= 1;
            }
        }
    }

    /// Adds `v` to an active slot.
    pub fn attach(&mut self, v: usize, slot: usize, y: &ParentMatrix) {
        debug_assert_eq!(self.label[v], DETACHED);
        debug_assert_ne!(self.pos[slot], DETACHED);
        for (u, &b) in y.row(v).iter().enumerate() {
            if b != 0 && self.label[u] != DETACHED {
                self.bump(slot, self.label[u], true);
            }
        }
        self.label[v] = slot;
        self.size[slot] += 1;
    }

    /// Removes `v`, closing its slot if it empties. Returns the old slot.
    pub fn detach(&mut self, v: usize, y: &ParentMatrix) -> usize {
        let slot = self.label[v];
        debug_assert_ne!(slot, DETACHED);
        self.label[v] = DETACHED;
        self.size[slot] -= 1;
        for (u, &b) in y.row(v).iter().enumerate() {
            if b != 0 && self.label[u] != DETACHED {
                self.bump(slot, self.label[u], false);
            }
        }
        if self.size[slot] == 0 {
            self.close_slot(slot);
        }
        slot
    }

    /// Records that the parent pair `{u, v}` (both attached) flipped.
    #[inline]
    pub fn flip_edge(&mut self, u: usize, v: usize, now_edge: bool) {
        self.bump(self.label[u], self.label[v], now_edge);
    }

    /// Edges from `v` to attached nodes, per slot (`out` has length `n`).
    pub fn edge_profile(&self, v: usize, y: &ParentMatrix, out: &mut [u64]) {
        for &s in &self.active {
            out[s] = 0;
        }
        for (u, &b) in y.row(v).iter().enumerate() {
            if b != 0 && u != v && self.label[u] != DETACHED {
                out[self.label[u]] += 1;
            }
        }
    }

    /// Allocation vector with labels in order of appearance (detached nodes
    /// are skipped and get `usize::MAX`).
    pub fn allocation(&self) -> Vec<usize> {
        let mut map = vec![DETACHED; self.n];
        let mut next = 0;
        self.label
            .iter()
            .map(|&s| {
                if s == DETACHED {
                    return DETACHED;
                }
                if map[s] == DETACHED {
                    map[s] = next;
                    next += 1;
                }
                map[s]
            })
            .collect()
    }

    /// Block sizes in order of appearance.
    pub fn lengths(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::with_capacity(self.k());
        for &s in &self.label {
            if s != DETACHED && !seen[s] {
                seen[s] = true;
                out.push(self.size[s]);
            }
        }
        out
    }

    /// Counts in order-of-appearance labelling, for comparison with
    /// [`crate::csbm::block_counts`].
    pub fn to_block_counts(&self) -> BlockCounts {
        let mut order = Vec::with_capacity(self.k());
        let mut seen = vec![false; self.n];
        for &s in &self.label {
            if s != DETACHED && !seen[s] {
                seen[s] = true;
                order.push(s);
            }
        }
        let mut out = BlockCounts::zeros(order.len());
        for (a, &j) in order.iter().enumerate() {
            for (b, &h) in order.iter().enumerate().skip(a) {
                for _ in 0..self.edges(j, h) {
                    out.add_pair(a, b, true);
                }
                for _ in 0..self.non_edges(j, h) {
                    out.add_pair(a, b, false);
                }
            }
        }
        out
    }
}

/// `ln B(a + m, b + m̄)` for integer counts, tabulated.
#[derive(Clone, Debug)]
pub struct BetaTable {
    a: f64,
    b: f64,
    la: Vec<f64>,
    lb: Vec<f64>,
    lab: Vec<f64>,
}

const TABLE_CAP: usize = 1 << 21;

impl BetaTable {
    pub fn new(a: f64, b: f64, max_count: usize) -> Self {
        let len = max_count.min(TABLE_CAP) + 1;
        let tab = |c: f64| (0..len).map(|i| ln_gamma(c + i as f64)).collect::<Vec<f64>>();
        Self {
            a,
            b,
            la: tab(a),
            lb: tab(b),
            lab: tab(a + b),
        }
    }

    #[inline]
    fn lg(table: &[f64], base: f64, i: u64) -> f64 {
        match table.get(i as usize) {
            Some(&x) => x,
            None => ln_gamma(base + i as f64),
        }
    }

    #[inline]
    pub fn ln_beta(&self, m: u64, m_bar: u64) -> f64 {
        Self::lg(&self.la, self.a, m) + Self::lg(&self.lb, self.b, m_bar)
            - Self::lg(&self.lab, self.a + self.b, m + m_bar)
    }

    /// `ln p(Y | blocks)` summed over active block pairs.
    pub fn log_marginal(&self, blocks: &BlockState) -> f64 {
        let base = self.ln_beta(0, 0);
        let act = blocks.active();
        let mut acc = 0.0;
        for (i, &j) in act.iter().enumerate() {
            for &h in &act[i..] {
                acc += self.ln_beta(blocks.edges(j, h), blocks.non_edges(j, h)) - base;
            }
        }
        acc
    }

    /// Change in `ln p(Y | blocks)` when a node with edge profile `r` joins
    /// `slot`, or a fresh block when `slot` is `None`.
    pub fn join_delta(&self, blocks: &BlockState, r: &[u64], slot: Option<usize>) -> f64 {
        let mut acc = 0.0;
        for &h in blocks.active() {
            let rh = r[h];
            let rbar = blocks.size(h) as u64 - rh;
            let (m, mb) = match slot {
                Some(j) => (blocks.edges(j, h), blocks.non_edges(j, h)),
                None => (0, 0),
            };
            acc += self.ln_beta(m + rh, mb + rbar) - self.ln_beta(m, mb);
        }
        acc
    }
}
