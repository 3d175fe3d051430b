//! Symmetric binary adjacency matrices and their text formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Symmetric 0/1 matrix with zero diagonal, stored densely.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdjacencyMatrix {
    n: usize,
    bits: Vec<u8>,
}

/// Latent parent network.
pub type ParentMatrix = AdjacencyMatrix;

impl AdjacencyMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; n * n],
        }
    }

    /// Builds from a row-major `n × n` 0/1 buffer, validating symmetry,
    /// binarity and the zero diagonal.
    pub fn from_dense(n: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != n * n {
            return Err(Error::SizeMismatch {
                expected: n * n,
                found: bits.len(),
            });
        }
        for u in 0..n {
            if bits[u * n + u] != 0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at node {}", u + 1)));
            }
            for v in 0..n {
                let b = bits[u * n + v];
                if b > 1 {
                    return Err(Error::InvalidInput(format!(
                        "entry ({}, {}) = {b} is not binary",
                        u + 1,
                        v + 1
                    )));
                }
                if b != bits[v * n + u] {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({}, {})",
                        u + 1,
                        v + 1
                    )));
                }
            }
        }
        Ok(Self { n, bits })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut bits = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            bits.extend_from_slice(row);
        }
        Self::from_dense(n, bits)
    }

    /// Builds from 0-based undirected edges; duplicates are merged.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut out = Self::zeros(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::OutOfRange { index: u.max(v), n });
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at node {}", u + 1)));
            }
            out.set(u, v, true);
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.n + v] != 0
    }

    #[inline]
    pub(crate) fn bit(&self, u: usize, v: usize) -> u8 {
        self.bits[u * self.n + v]
    }

    /// Row `u` as a 0/1 slice.
    #[inline]
    pub fn row(&self, u: usize) -> &[u8] {
        &self.bits[u * self.n..(u + 1) * self.n]
    }

    /// Sets the unordered pair `{u, v}`. Panics on the diagonal.
    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: bool) {
        assert_ne!(u, v, "diagonal entries are fixed at zero");
        let b = value as u8;
        self.bits[u * self.n + v] = b;
        self.bits[v * self.n + u] = b;
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n)
            .map(|u| self.row(u)[u + 1..].iter().filter(|&&b| b != 0).count())
            .sum()
    }

    /// 0-based edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.get(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// The matrix `M` with `M[π(u)][π(v)] = self[u][v]`.
    pub fn relabel(&self, pi: &Permutation) -> Result<Self> {
        if pi.n() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: pi.n(),
            });
        }
        let mut out = Self::zeros(self.n);
        for u in 0..self.n {
            for v in 0..self.n {
                out.bits[pi.apply(u) * self.n + pi.apply(v)] = self.bits[u * self.n + v];
            }
        }
        Ok(out)
    }

    /// The aligned matrix `A[u][v] = self[π(u)][π(v)]`.
    pub fn aligned(&self, pi: &Permutation) -> Result<Self> {
        self.relabel(&pi.inverse())
    }

    /// Upper-triangle entries in row-major order, as a `0`/`1` string.
    pub fn upper_triangle_string(&self) -> String {
        let mut s = String::with_capacity(self.n * (self.n.saturating_sub(1)) / 2);
        for u in 0..self.n {
            for v in u + 1..self.n {
                s.push(if self.get(u, v) { '1' } else { '0' });
            }
        }
        s
    }

    pub fn from_upper_triangle_string(n: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        let expected = n * n.saturating_sub(1) / 2;
        if s.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                found: s.len(),
            });
        }
        let mut out = Self::zeros(n);
        let mut chars = s.bytes();
        for u in 0..n {
            for v in u + 1..n {
                match chars.next() {
                    Some(b'1') => out.set(u, v, true),
                    Some(b'0') => {}
                    other => {
                        return Err(Error::Parse(format!(
                            "bad upper-triangle character {:?}",
                            other.map(char::from)
                        )))
                    }
                }
            }
        }
        Ok(out)
    }

    /// Dense CSV, one row per line, no header.
    pub fn to_dense_csv(&self) -> String {
        let mut s = String::with_capacity(self.n * self.n * 2);
        for u in 0..self.n {
            for (v, b) in self.row(u).iter().enumerate() {
                if v > 0 {
                    s.push(',');
                }
                s.push(if *b != 0 { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// Parses a dense 0/1 CSV. A first line that is not entirely numeric is
    /// taken as a header and skipped.
    pub fn parse_dense_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows: Vec<Vec<u8>> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let parsed: std::result::Result<Vec<u8>, _> =
                record.iter().map(|f| f.parse::<u8>()).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if i == 0 => continue,
                Err(_) => {
                    return Err(Error::Parse(format!("non-numeric entry on CSV line {}", i + 1)))
                }
            }
        }
        Self::from_rows(&rows)
    }

    /// 1-based edge list, one `u v` pair per line, `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (u, v) in self.edges() {
            s.push_str(&format!("{} {}\n", u + 1, v + 1));
        }
        s
    }

    /// Parses an undirected 1-based edge list (whitespace or comma separated).
    /// `n` defaults to the largest node index mentioned.
    pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            let parsed: Option<Vec<usize>> = fields.iter().map(|t| t.parse().ok()).collect();
            match parsed.as_deref() {
                Some([u, v]) if *u >= 1 && *v >= 1 => {
                    max = max.max(*u).max(*v);
                    edges.push((u - 1, v - 1));
                }
                _ if i == 0 => continue,
                _ => return Err(Error::Parse(format!("bad edge on line {}: {line:?}", i + 1))),
            }
        }
        let n = n.unwrap_or(max);
        if max > n {
            return Err(Error::OutOfRange { index: max, n });
        }
        Self::from_edges(n, &edges)
    }
}

/// On-disk graph encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Dense,
    EdgeList,
}

impl GraphFormat {
    /// Guesses the format from the file contents: numeric rows of width two
    /// are an edge list, except for the two 2×2 adjacency matrices.
    pub fn detect(text: &str) -> Self {
        let rows: Vec<Vec<usize>> = text
            .lines()
            .filter_map(|l| {
                l.split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse().ok())
                    .collect::<Option<Vec<usize>>>()
            })
            .filter(|r| !r.is_empty())
            .collect();
        if rows.is_empty() || rows.iter().any(|r| r.len() != 2) {
            return GraphFormat::Dense;
        }
        let square_matrix = rows.len() == 2
            && rows[0][0] == 0
            && rows[1][1] == 0
            && rows[0][1] == rows[1][0]
            && rows[0][1] <= 1;
        if square_matrix {
            GraphFormat::Dense
        } else {
            GraphFormat::EdgeList
        }
    }
}

pub fn read_graph(path: &Path, format: Option<GraphFormat>, n: Option<usize>) -> Result<AdjacencyMatrix> {
    let text = fs::read_to_string(path)?;
    match format.unwrap_or_else(|| GraphFormat::detect(&text)) {
        GraphFormat::Dense => AdjacencyMatrix::parse_dense_csv(&text),
        GraphFormat::EdgeList => AdjacencyMatrix::parse_edge_list(&text, n),
    }
}

pub fn write_graph(path: &Path, graph: &AdjacencyMatrix, format: GraphFormat) -> Result<()> {
    let mut file = fs::File::create(path)?;
    let text = match format {
        GraphFormat::Dense => graph.to_dense_csv(),
        GraphFormat::EdgeList => graph.to_edge_list(),
    };
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// The observed pair of networks on a common node set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graphs {
    pub y1: AdjacencyMatrix,
    pub y2: AdjacencyMatrix,
}

impl Graphs {
    pub fn new(y1: AdjacencyMatrix, y2: AdjacencyMatrix) -> Result<Self> {
        if y1.n() != y2.n() {
            return Err(Error::SizeMismatch {
                expected: y1.n(),
                found: y2.n(),
            });
        }
        Ok(Self { y1, y2 })
    }

    pub fn n(&self) -> usize {
        self.y1.n()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(AdjacencyMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).is_ok());
        assert!(AdjacencyMatrix::from_rows(&[vec![0, 1], vec![0, 0]]).is_err());
        assert!(AdjacencyMatrix::from_rows(&[vec![1, 0], vec![0, 0]]).is_err());
        assert!(AdjacencyMatrix::from_rows(&[vec![0, 2], vec![2, 0]]).is_err());
        assert!(AdjacencyMatrix::from_edges(3, &[(1, 1)]).is_err());
    }

    #[test]
    fn dense_and_edge_round_trips() {
        let g = AdjacencyMatrix::from_edges(5, &[(0, 3), (1, 2), (3, 4), (3, 0)]).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(AdjacencyMatrix::parse_dense_csv(&g.to_dense_csv()).unwrap(), g);
        let with_header = format!("a,b,c,d,e\n{}", g.to_dense_csv());
        assert_eq!(AdjacencyMatrix::parse_dense_csv(&with_header).unwrap(), g);
        assert_eq!(AdjacencyMatrix::parse_edge_list(&g.to_edge_list(), Some(5)).unwrap(), g);
        assert_eq!(AdjacencyMatrix::parse_edge_list("1 4\n4 1\n2,3\n4 5\n", None).unwrap(), g);
        assert_eq!(
            AdjacencyMatrix::from_upper_triangle_string(5, &g.upper_triangle_string()).unwrap(),
            g
        );
        assert_eq!(GraphFormat::detect(&g.to_dense_csv()), GraphFormat::Dense);
        assert_eq!(GraphFormat::detect(&g.to_edge_list()), GraphFormat::EdgeList);
        assert!(AdjacencyMatrix::parse_edge_list("1 9\n", Some(5)).is_err());
    }

    #[test]
    fn relabel_and_align_are_inverse() {
        let g = AdjacencyMatrix::from_edges(4, &[(0, 1), (1, 2)]).unwrap();
        let pi = Permutation::parse_cycles("(1342)", 4).unwrap();
        let r = g.relabel(&pi).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(r.get(pi.apply(u), pi.apply(v)), g.get(u, v));
            }
        }
        assert_eq!(r.aligned(&pi).unwrap(), g);
    }
}
