use crate::error::{Error, Result};
use crate::model::{LabelState, RelationTensor};

/// Edge counts per (sender community, receiver community) cell.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinkCounts {
    k: usize,
    ones: Vec<u32>,
    zeros: Vec<u32>,
}

impl LinkCounts {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            ones: vec![0; k * k],
            zeros: vec![0; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `(n_kl^1, n_kl^0)`.
    #[inline]
    pub fn get(&self, k: usize, l: usize) -> (u32, u32) {
        let idx = k * self.k + l;
        (self.ones[idx], self.zeros[idx])
    }

    /// Like [`get`](Self::get) but returns zeros for cells outside `0..k`
    /// (communities not yet instantiated).
    #[inline]
    pub fn get_or_empty(&self, k: usize, l: usize) -> (u32, u32) {
        if k < self.k && l < self.k {
            self.get(k, l)
        } else {
            (0, 0)
        }
    }

    #[inline]
    fn bump(&mut self, k: usize, l: usize, edge: bool, add: bool) {
        let idx = k * self.k + l;
        let cell = if edge {
            &mut self.ones[idx]
        } else {
            &mut self.zeros[idx]
        };
        if add {
            *cell += 1;
        } else {
            *cell -= 1;
        }
    }

    fn grow(&mut self) {
        let k = self.k + 1;
        let mut ones = vec![0; k * k];
        let mut zeros = vec![0; k * k];
        for a in 0..self.k {
            for b in 0..self.k {
                ones[a * k + b] = self.ones[a * self.k + b];
                zeros[a * k + b] = self.zeros[a * self.k + b];
            }
        }
        *self = Self { k, ones, zeros };
    }

    fn keep(&mut self, kept: &[usize]) {
        let k = kept.len();
        let mut out = Self::new(k);
        for (a, &oa) in kept.iter().enumerate() {
            for (b, &ob) in kept.iter().enumerate() {
                out.ones[a * k + b] = self.ones[oa * self.k + ob];
                out.zeros[a * k + b] = self.zeros[oa * self.k + ob];
            }
        }
        *self = out;
    }

    fn total(&self) -> u64 {
        self.ones.iter().chain(&self.zeros).map(|&x| x as u64).sum()
    }
}

/// Sufficient statistics derived from a [`LabelState`] and the data.
///
/// * `participation(t, i)[k]` is `N_ik^t`, how often node `i` acts (as sender
///   or receiver) in community `k` at time `t`.
/// * `links(t)` holds `n_kl^{t,1}` / `n_kl^{t,0}`; `totals()` aggregates them
///   over time, which is what the collapsed edge likelihood consumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountCache {
    n: usize,
    t: usize,
    k: usize,
    participation: Vec<Vec<u32>>,
    links: Vec<LinkCounts>,
    totals: LinkCounts,
}

impl CountCache {
    pub fn empty(n: usize, t: usize, k: usize) -> Self {
        Self {
            n,
            t,
            k,
            participation: vec![vec![0; k]; n * t],
            links: vec![LinkCounts::new(k); t],
            totals: LinkCounts::new(k),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn times(&self) -> usize {
        self.t
    }

    #[inline]
    pub fn participation(&self, t: usize, i: usize) -> &[u32] {
        &self.participation[t * self.n + i]
    }

    pub fn links(&self, t: usize) -> &LinkCounts {
        &self.links[t]
    }

    pub fn totals(&self) -> &LinkCounts {
        &self.totals
    }

    /// Adds (`add = true`) or removes one pair observation.
    #[inline]
    pub fn update(&mut self, i: usize, j: usize, t: usize, s: u32, r: u32, edge: bool, add: bool) {
        let n = self.n;
        let (s, r) = (s as usize, r as usize);
        if add {
            self.participation[t * n + i][s] += 1;
            self.participation[t * n + j][r] += 1;
        } else {
            self.participation[t * n + i][s] -= 1;
            self.participation[t * n + j][r] -= 1;
        }
        self.links[t].bump(s, r, edge, add);
        self.totals.bump(s, r, edge, add);
    }

    /// Appends an empty community.
    pub fn push_community(&mut self) {
        self.k += 1;
        for row in &mut self.participation {
            row.push(0);
        }
        for l in &mut self.links {
            l.grow();
        }
        self.totals.grow();
    }

    /// Keeps only the listed communities, in the given order.
    pub fn keep_communities(&mut self, kept: &[usize]) {
        for row in &mut self.participation {
            let new_row: Vec<u32> = kept.iter().map(|&k| row[k]).collect();
            *row = new_row;
        }
        for l in &mut self.links {
            l.keep(kept);
        }
        self.totals.keep(kept);
        self.k = kept.len();
    }

    /// Checks the structural invariants (row sums and per-time totals).
    pub fn check_invariants(&self) -> Result<()> {
        let expect = 2 * (self.n.saturating_sub(1)) as u64;
        for t in 0..self.t {
            for i in 0..self.n {
                let sum: u64 = self.participation(t, i).iter().map(|&x| x as u64).sum();
                if sum != expect {
                    return Err(Error::Numeric(format!(
                        "participation row ({i},{t}) sums to {sum}, expected {expect}"
                    )));
                }
            }
            let total = self.links[t].total();
            if total != (self.n * self.n.saturating_sub(1)) as u64 {
                return Err(Error::Numeric(format!("link counts at time {t} sum to {total}")));
            }
        }
        Ok(())
    }
}

/// Recomputes every count from scratch.
pub fn rebuild_counts(labels: &LabelState, data: &RelationTensor) -> Result<CountCache> {
    if labels.n() != data.n() || labels.times() != data.times() {
        return Err(Error::Dimension(format!(
            "labels are {}x{}x{} but data is {}x{}x{}",
            labels.n(),
            labels.n(),
            labels.times(),
            data.n(),
            data.n(),
            data.times()
        )));
    }
    let mut counts = CountCache::empty(data.n(), data.times(), labels.k());
    for (i, j, t) in data.pairs() {
        let (s, r) = labels.get(i, j, t);
        if s as usize >= labels.k() || r as usize >= labels.k() {
            return Err(Error::InvalidArgument(format!(
                "label ({s},{r}) at ({i},{j},{t}) exceeds K={}",
                labels.k()
            )));
        }
        counts.update(i, j, t, s, r, data.get(i, j, t), true);
    }
    Ok(counts)
}
