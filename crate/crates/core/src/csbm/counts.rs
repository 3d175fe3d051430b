//! Block edge counts and concordance tallies.

use crate::error::{Error, Result};
use crate::perm::Permutation;

use super::graph::{AdjacencyMatrix, Graphs, ParentMatrix};

/// Edge and non-edge counts of the parent network between blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCounts {
    k: usize,
    m: Vec<u64>,
    m_bar: Vec<u64>,
}

impl BlockCounts {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            m: vec![0; k * k],
            m_bar: vec![0; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    fn idx(&self, j: usize, h: usize) -> usize {
        let (a, b) = if j <= h { (j, h) } else { (h, j) };
        a * self.k + b
    }

    /// Edges between blocks `j` and `h` (order irrelevant).
    pub fn m(&self, j: usize, h: usize) -> u64 {
        self.m[self.idx(j, h)]
    }

    /// Non-edges between blocks `j` and `h` (order irrelevant).
    pub fn m_bar(&self, j: usize, h: usize) -> u64 {
        self.m_bar[self.idx(j, h)]
    }

    pub fn add_pair(&mut self, j: usize, h: usize, edge: bool) {
        let i = self.idx(j, h);
        if edge {
            self.m[i] += 1;
        } else {
            self.m_bar[i] += 1;
        }
    }

    /// Iterates `(j, h, m, m̄)` over `j ≤ h`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, u64, u64)> + '_ {
        (0..self.k).flat_map(move |j| {
            (j..self.k).map(move |h| (j, h, self.m[j * self.k + h], self.m_bar[j * self.k + h]))
        })
    }
}

/// `m`, `m̄` of the parent `y` under allocation `z` (labels `0..k`).
pub fn block_counts(y: &ParentMatrix, z: &[usize]) -> Result<BlockCounts> {
    if z.len() != y.n() {
        return Err(Error::SizeMismatch {
            expected: y.n(),
            found: z.len(),
        });
    }
    let k = z.iter().max().map_or(0, |&m| m + 1);
    let mut counts = BlockCounts::zeros(k);
    for u in 0..y.n() {
        for v in u + 1..y.n() {
            counts.add_pair(z[u], z[v], y.get(u, v));
        }
    }
    Ok(counts)
}

/// Tally code of a (parent bit, observed bit) pair.
#[inline]
pub fn tally_code(parent: u8, observed: u8) -> usize {
    (2 * parent + observed) as usize
}

/// Concordance tallies of the parent against both observed layers.
///
/// `counts[layer][code]` with `code = 2·y + y_obs`: 0 concordant non-edge
/// (`e₀`), 1 spurious edge (`ē₀`), 2 missing edge (`ē₁`), 3 concordant
/// edge (`e₁`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExponentTally {
    pub counts: [[u64; 4]; 2],
}

impl ExponentTally {
    /// Concordant count `e_q` for layer 1 or 2.
    pub fn e(&self, q: u8, layer: usize) -> u64 {
        self.counts[layer - 1][tally_code(q, q)]
    }

    /// Discordant count `ē_q` for layer 1 or 2.
    pub fn e_bar(&self, q: u8, layer: usize) -> u64 {
        self.counts[layer - 1][tally_code(q, 1 - q)]
    }

    /// `e_q` summed over both layers.
    pub fn e_total(&self, q: u8) -> u64 {
        self.e(q, 1) + self.e(q, 2)
    }

    pub fn e_bar_total(&self, q: u8) -> u64 {
        self.e_bar(q, 1) + self.e_bar(q, 2)
    }
}

/// Four tallies of `y` against `graph` read through `sigma`:
/// pairs `(y_{uu'}, graph_{σ(u)σ(u')})`, `u < u'`.
pub fn layer_exponents(y: &ParentMatrix, graph: &AdjacencyMatrix, sigma: &Permutation) -> Result<[u64; 4]> {
    let n = y.n();
    for found in [graph.n(), sigma.n()] {
        if found != n {
            return Err(Error::SizeMismatch { expected: n, found });
        }
    }
    let mut out = [0u64; 4];
    for u in 0..n {
        for v in u + 1..n {
            out[tally_code(y.bit(u, v), graph.bit(sigma.apply(u), sigma.apply(v)))] += 1;
        }
    }
    Ok(out)
}

/// Tallies for layer 1 through the identity and layer 2 through `pi`.
pub fn edge_exponents(y: &ParentMatrix, graphs: &Graphs, pi: &Permutation) -> Result<ExponentTally> {
    let id = Permutation::identity(y.n());
    Ok(ExponentTally {
        counts: [
            layer_exponents(y, &graphs.y1, &id)?,
            layer_exponents(y, &graphs.y2, pi)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> AdjacencyMatrix {
        let mut g = AdjacencyMatrix::zeros(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    g.set(u, v, true);
                }
            }
        }
        g
    }

    #[test]
    fn block_counts_trivial_cases() {
        let empty = AdjacencyMatrix::zeros(4);
        let c = block_counts(&empty, &[0, 0, 1, 1]).unwrap();
        assert_eq!((c.m(0, 0), c.m_bar(0, 0)), (0, 1));
        assert_eq!((c.m(0, 1), c.m_bar(0, 1)), (0, 4));
        assert_eq!(c.m_bar(1, 0), 4);

        let mut full = AdjacencyMatrix::zeros(3);
        for (u, v) in [(0, 1), (0, 2), (1, 2)] {
            full.set(u, v, true);
        }
        let c = block_counts(&full, &[0, 1, 2]).unwrap();
        for j in 0..3 {
            assert_eq!(c.m(j, j), 0);
            for h in j + 1..3 {
                assert_eq!(c.m(j, h), 1);
            }
        }
        assert!(block_counts(&full, &[0, 1]).is_err());
    }

    #[test]
    fn block_counts_match_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = random_graph(6, 0.5, &mut rng);
        let z = [0, 1, 0, 2, 1, 0];
        let c = block_counts(&y, &z).unwrap();
        for j in 0..3 {
            for h in 0..3 {
                let (mut m, mut mb) = (0, 0);
                for u in 0..6 {
                    for v in 0..6 {
                        let in_pair = if j == h { u < v } else { u != v };
                        if in_pair && z[u] == j && z[v] == h {
                            if y.get(u, v) {
                                m += 1;
                            } else {
                                mb += 1;
                            }
                        }
                    }
                }
                assert_eq!((c.m(j, h), c.m_bar(j, h)), (m, mb), "j={j} h={h}");
            }
        }
    }

    #[test]
    fn exponents_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y = random_graph(7, 0.4, &mut rng);
        let pi = Permutation::parse_cycles("(152)(3764)", 7).unwrap();
        let graphs = Graphs::new(y.clone(), y.relabel(&pi).unwrap()).unwrap();
        let t = edge_exponents(&y, &graphs, &pi).unwrap();
        let edges = y.edge_count() as u64;
        for layer in 1..=2 {
            assert_eq!(t.e_bar(0, layer), 0);
            assert_eq!(t.e_bar(1, layer), 0);
            assert_eq!(t.e(1, layer), edges);
            assert_eq!(t.e(0, layer), 21 - edges);
        }

        let mut comp = AdjacencyMatrix::zeros(7);
        for u in 0..7 {
            for v in u + 1..7 {
                comp.set(u, v, !y.get(u, v));
            }
        }
        let g = Graphs::new(comp, AdjacencyMatrix::zeros(7)).unwrap();
        let t = edge_exponents(&y, &g, &Permutation::identity(7)).unwrap();
        assert_eq!(t.e(0, 1) + t.e(1, 1), 0);
    }

    #[test]
    fn exponents_match_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let y = random_graph(5, 0.5, &mut rng);
        let g1 = random_graph(5, 0.5, &mut rng);
        let g2 = random_graph(5, 0.5, &mut rng);
        let pi = Permutation::parse_cycles("(13)(254)", 5).unwrap();
        let t = edge_exponents(&y, &Graphs::new(g1.clone(), g2.clone()).unwrap(), &pi).unwrap();
        for q in 0..=1u8 {
            for (layer, g, s) in [(1, &g1, Permutation::identity(5)), (2, &g2, pi.clone())] {
                let (mut e, mut eb) = (0, 0);
                for u in 0..5 {
                    for v in u + 1..5 {
                        let yq = y.get(u, v) as u8 == q;
                        let oq = g.get(s.apply(u), s.apply(v)) as u8 == q;
                        if yq && oq {
                            e += 1;
                        }
                        if yq && !oq {
                            eb += 1;
                        }
                    }
                }
                assert_eq!(t.e(q, layer), e);
                assert_eq!(t.e_bar(q, layer), eb);
            }
        }
    }
}
