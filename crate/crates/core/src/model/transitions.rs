use crate::model::LabelState;

/// Per-node transition counts for the time-invariant model.
///
/// Node `i` owns a family of restaurants: row 0 serves labels at the first time
/// step, row `c + 1` serves labels whose predecessor on the same chain was
/// community `c`. `count(i, row, k)` is the number of such labels equal to `k`.
///
/// A node owns the sender chains `s_ij` and the receiver chains `r_ji`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transitions {
    n: usize,
    k: usize,
    counts: Vec<Vec<u32>>,
    row_totals: Vec<Vec<u32>>,
}

impl Transitions {
    pub fn empty(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            counts: vec![vec![0; (k + 1) * k]; n],
            row_totals: vec![vec![0; k + 1]; n],
        }
    }

    pub fn from_labels(labels: &LabelState) -> Self {
        let mut out = Self::empty(labels.n(), labels.k());
        for (i, j, t) in labels.pairs() {
            let (s, r) = labels.get(i, j, t);
            let (ps, pr) = if t == 0 {
                (0, 0)
            } else {
                let (a, b) = labels.get(i, j, t - 1);
                (a as usize + 1, b as usize + 1)
            };
            out.update(i, ps, s as usize, true);
            out.update(j, pr, r as usize, true);
        }
        out
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn count(&self, node: usize, row: usize, dish: usize) -> u32 {
        if row > self.k || dish >= self.k {
            return 0;
        }
        self.counts[node][row * self.k + dish]
    }

    #[inline]
    pub fn row_total(&self, node: usize, row: usize) -> u32 {
        if row > self.k {
            return 0;
        }
        self.row_totals[node][row]
    }

    #[inline]
    pub fn update(&mut self, node: usize, row: usize, dish: usize, add: bool) {
        let idx = row * self.k + dish;
        if add {
            self.counts[node][idx] += 1;
            self.row_totals[node][row] += 1;
        } else {
            self.counts[node][idx] -= 1;
            self.row_totals[node][row] -= 1;
        }
    }

    pub fn push_community(&mut self) {
        let old_k = self.k;
        let k = old_k + 1;
        for node in 0..self.n {
            let mut grown = vec![0; (k + 1) * k];
            for row in 0..=old_k {
                for dish in 0..old_k {
                    grown[row * k + dish] = self.counts[node][row * old_k + dish];
                }
            }
            self.counts[node] = grown;
            self.row_totals[node].push(0);
        }
        self.k = k;
    }

    pub fn keep_communities(&mut self, kept: &[usize]) {
        let old_k = self.k;
        let k = kept.len();
        for node in 0..self.n {
            let mut counts = vec![0; (k + 1) * k];
            let mut totals = vec![0; k + 1];
            // row 0 stays row 0; row c+1 follows community c
            let rows: Vec<usize> = std::iter::once(0).chain(kept.iter().map(|&c| c + 1)).collect();
            for (new_row, &old_row) in rows.iter().enumerate() {
                for (new_dish, &old_dish) in kept.iter().enumerate() {
                    counts[new_row * k + new_dish] = self.counts[node][old_row * old_k + old_dish];
                }
                totals[new_row] = self.row_totals[node][old_row];
            }
            self.counts[node] = counts;
            self.row_totals[node] = totals;
        }
        self.k = k;
    }

    /// Iterates `(node, row, dish, count)` over nonzero cells.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize, u32)> + '_ {
        let k = self.k;
        (0..self.n).flat_map(move |node| {
            (0..=k).flat_map(move |row| {
                (0..k).filter_map(move |dish| {
                    let c = self.counts[node][row * k + dish];
                    (c > 0).then_some((node, row, dish, c))
                })
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rows_account_for_every_label() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = LabelState::random(4, 3, 3, &mut rng);
        let tr = Transitions::from_labels(&l);
        for node in 0..4 {
            let total: u32 = (0..=3).map(|row| tr.row_total(node, row)).sum();
            assert_eq!(total, 2 * 3 * 3);
            assert_eq!(tr.row_total(node, 0), 2 * 3);
        }
    }

    #[test]
    fn keep_matches_rebuild() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut l = LabelState::random(4, 3, 2, &mut rng);
        let mut grown = Transitions::from_labels(&l);
        grown.push_community();
        l.set_k(3);
        assert_eq!(grown, Transitions::from_labels(&l));
        // community 1 unused after remapping everything to {0, 2}
        let map: Vec<u32> = vec![0, 2, 2];
        l.relabel(&map, 3);
        let mut tr = Transitions::from_labels(&l);
        let kept = l.compact();
        tr.keep_communities(&kept);
        assert_eq!(tr, Transitions::from_labels(&l));
    }
}
