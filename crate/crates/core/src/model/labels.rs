use rand::Rng;

use crate::error::{Error, Result};

/// Sender and receiver community indicators for every ordered pair and time.
///
/// Communities are numbered `0..k`. Slots for self-pairs are unused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelState {
    n: usize,
    t: usize,
    k: usize,
    sender: Vec<u32>,
    receiver: Vec<u32>,
}

impl LabelState {
    /// Every pair assigned to community 0; `k` is 1 unless `n < 2`.
    pub fn single(n: usize, t: usize) -> Self {
        Self {
            n,
            t,
            k: usize::from(n >= 2 && t >= 1),
            sender: vec![0; n * n * t],
            receiver: vec![0; n * n * t],
        }
    }

    /// Uniformly random labels over `0..k`.
    pub fn random<R: Rng + ?Sized>(n: usize, t: usize, k: usize, rng: &mut R) -> Self {
        assert!(k >= 1);
        let mut out = Self::single(n, t);
        out.k = k;
        for tt in 0..t {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let idx = out.index(i, j, tt);
                        out.sender[idx] = rng.random_range(0..k as u32);
                        out.receiver[idx] = rng.random_range(0..k as u32);
                    }
                }
            }
        }
        out
    }

    /// Builds a state from explicit `(sender, receiver)` vectors laid out like
    /// [`crate::model::RelationTensor`]. Diagonal entries are ignored.
    pub fn from_parts(n: usize, t: usize, k: usize, sender: Vec<u32>, receiver: Vec<u32>) -> Result<Self> {
        if sender.len() != n * n * t || receiver.len() != n * n * t {
            return Err(Error::Dimension(format!(
                "label vectors of length {}/{} do not match n={n}, T={t}",
                sender.len(),
                receiver.len()
            )));
        }
        let mut out = Self {
            n,
            t,
            k,
            sender,
            receiver,
        };
        for tt in 0..t {
            for i in 0..n {
                let idx = out.index(i, i, tt);
                out.sender[idx] = 0;
                out.receiver[idx] = 0;
            }
        }
        for (i, j, tt) in out.pairs().collect::<Vec<_>>() {
            let (s, r) = out.get(i, j, tt);
            if s as usize >= k || r as usize >= k {
                return Err(Error::InvalidArgument(format!(
                    "label ({s},{r}) at ({i},{j},{tt}) outside 0..{k}"
                )));
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

    /// Number of instantiated communities.
    pub fn k(&self) -> usize {
        self.k
    }

    pub(crate) fn set_k(&mut self, k: usize) {
        self.k = k;
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, t: usize) -> usize {
        (t * self.n + i) * self.n + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, t: usize) -> (u32, u32) {
        let idx = self.index(i, j, t);
        (self.sender[idx], self.receiver[idx])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, t: usize, s: u32, r: u32) {
        let idx = self.index(i, j, t);
        self.sender[idx] = s;
        self.receiver[idx] = r;
    }

    pub fn sender(&self) -> &[u32] {
        &self.sender
    }

    pub fn receiver(&self) -> &[u32] {
        &self.receiver
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let n = self.n;
        (0..self.t).flat_map(move |t| (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j, t))))
    }

    /// Number of labels per community.
    pub fn usage(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for (i, j, t) in self.pairs() {
            let (s, r) = self.get(i, j, t);
            out[s as usize] += 1;
            out[r as usize] += 1;
        }
        out
    }

    /// Applies `map[old] = new` to every label and sets `k = new_k`.
    pub fn relabel(&mut self, map: &[u32], new_k: usize) {
        for (i, j, t) in self.pairs().collect::<Vec<_>>() {
            let idx = self.index(i, j, t);
            self.sender[idx] = map[self.sender[idx] as usize];
            self.receiver[idx] = map[self.receiver[idx] as usize];
        }
        self.k = new_k;
    }

    /// Drops unused communities, renumbering the rest in increasing order.
    /// Returns the old index of each surviving community.
    pub fn compact(&mut self) -> Vec<usize> {
        let usage = self.usage();
        let mut map = vec![u32::MAX; self.k];
        let mut kept = Vec::new();
        for (old, &u) in usage.iter().enumerate() {
            if u > 0 {
                map[old] = kept.len() as u32;
                kept.push(old);
            }
        }
        if kept.len() != self.k {
            let new_k = kept.len();
            self.relabel(&map, new_k);
        }
        kept
    }
}
