use crate::error::{Error, Result};

/// Observed directed binary network over `T` time steps.
///
/// Self-pairs `(i, i)` carry no observation; their slots are kept at zero and
/// never read by the samplers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationTensor {
    n: usize,
    t: usize,
    edges: Vec<u8>,
}

impl RelationTensor {
    /// All-zero tensor.
    pub fn zeros(n: usize, t: usize) -> Self {
        Self {
            n,
            t,
            edges: vec![0; n * n * t],
        }
    }

    /// Builds a tensor from `blocks[t][i][j]`; diagonal entries are ignored.
    pub fn from_blocks(blocks: &[Vec<Vec<u8>>]) -> Result<Self> {
        let t = blocks.len();
        let n = blocks.first().map_or(0, Vec::len);
        let mut out = Self::zeros(n, t);
        for (ti, block) in blocks.iter().enumerate() {
            if block.len() != n {
                return Err(Error::Dimension(format!(
                    "time {ti} has {} rows, expected {n}",
                    block.len()
                )));
            }
            for (i, row) in block.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::Dimension(format!(
                        "time {ti} row {i} has {} columns, expected {n}",
                        row.len()
                    )));
                }
                for (j, &v) in row.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    if v > 1 {
                        return Err(Error::InvalidArgument(format!(
                            "edge ({i},{j}) at time {ti} has value {v}"
                        )));
                    }
                    out.set(i, j, ti, v == 1);
                }
            }
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn times(&self) -> usize {
        self.t
    }

    /// Number of observed ordered pairs per time step, `n(n-1)`.
    pub fn pairs_per_time(&self) -> usize {
        self.n * self.n.saturating_sub(1)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, t: usize) -> usize {
        (t * self.n + i) * self.n + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, t: usize) -> bool {
        debug_assert!(i != j);
        self.edges[self.index(i, j, t)] == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, t: usize, value: bool) {
        assert!(i != j, "self-pairs carry no observation");
        let idx = self.index(i, j, t);
        self.edges[idx] = u8::from(value);
    }

    /// Count of ones over all observed pairs.
    pub fn ones(&self) -> usize {
        self.pairs().filter(|&(i, j, t)| self.get(i, j, t)).count()
    }

    /// Iterates ordered pairs `(i, j, t)` with `i != j`, lexicographic in `(t, i, j)`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let n = self.n;
        (0..self.t).flat_map(move |t| (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j, t))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_skip_diagonal() {
        let d = RelationTensor::zeros(3, 2);
        let pairs: Vec<_> = d.pairs().collect();
        assert_eq!(pairs.len(), 12);
        assert!(pairs.iter().all(|&(i, j, _)| i != j));
        assert_eq!(pairs[0], (0, 1, 0));
        assert_eq!(pairs[11], (2, 1, 1));
    }

    #[test]
    fn from_blocks_rejects_non_binary() {
        let blocks = vec![vec![vec![0, 2], vec![1, 0]]];
        assert!(RelationTensor::from_blocks(&blocks).is_err());
        let blocks = vec![vec![vec![9, 1], vec![1, 0]]];
        let d = RelationTensor::from_blocks(&blocks).unwrap();
        assert!(d.get(0, 1, 0));
        assert_eq!(d.ones(), 2);
    }
}
