//! Chinese-restaurant-franchise table counts and the global weight update.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::math::{dirichlet_variate, log_add_exp, sample_log_weights};
use crate::model::Dynamics;
use crate::state::ChainState;

/// Log unsigned Stirling numbers of the first kind, grown on demand.
#[derive(Debug, Clone, Default)]
pub struct StirlingTable {
    rows: Vec<Vec<f64>>,
}

impl StirlingTable {
    pub fn new() -> Self {
        Self { rows: vec![vec![0.0]] }
    }

    /// Makes rows `0..=n` available.
    pub fn ensure(&mut self, n: usize) {
        if self.rows.is_empty() {
            self.rows.push(vec![0.0]);
        }
        while self.rows.len() <= n {
            let prev_n = self.rows.len() - 1;
            let prev = &self.rows[prev_n];
            let ln_n = (prev_n as f64).ln();
            let mut row = vec![f64::NEG_INFINITY; prev_n + 2];
            // S(n+1, m) = S(n, m-1) + n S(n, m)
            for (m, slot) in row.iter_mut().enumerate().skip(1) {
                let a = prev[m - 1];
                let b = prev.get(m).map_or(f64::NEG_INFINITY, |&s| ln_n + s);
                *slot = log_add_exp(a, b);
            }
            self.rows.push(row);
        }
    }

    /// `ln S(n, m)`; negative infinity where `S(n, m) = 0`.
    pub fn ln(&mut self, n: usize, m: usize) -> f64 {
        self.ensure(n);
        self.rows[n].get(m).copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn row(&mut self, n: usize) -> &[f64] {
        self.ensure(n);
        &self.rows[n]
    }
}

/// Draws the number of occupied tables among `customers` customers of a
/// CRP with concentration `conc`: `P(m) ∝ S(N, m) conc^m`.
pub fn sample_table_count<R: Rng + ?Sized>(
    customers: u32,
    conc: f64,
    stirling: &mut StirlingTable,
    rng: &mut R,
) -> u32 {
    if customers <= 1 {
        return customers;
    }
    let ln_c = conc.max(f64::MIN_POSITIVE).ln();
    let row = stirling.row(customers as usize);
    let logw: Vec<f64> = (1..row.len()).map(|m| row[m] + m as f64 * ln_c).collect();
    sample_log_weights(&logw, rng) as u32 + 1
}

/// One (restaurant, dish) cell with at least one customer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableCell {
    pub restaurant: u32,
    pub dish: u32,
    pub customers: u32,
    /// Prior mass of the dish in this restaurant, global plus sticky.
    pub concentration: f64,
    /// Share of `concentration` contributed by `alpha * beta_k`.
    pub unsticky_prob: f64,
    pub tables: u32,
    pub unsticky: u32,
}

/// Per-restaurant totals used by the concentration updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Restaurant {
    pub customers: u32,
    /// Restaurant mass is `(alpha + kappa) * (1 - ratio * (1 - sticky_share))`.
    pub sticky_share: f64,
    /// No sticky mass at all (first time step / initial row).
    pub initial: bool,
    pub tables: u32,
    pub unsticky: u32,
}

impl Restaurant {
    /// Mass multiplier `a_j(rho)` applied to `alpha + kappa`.
    pub fn mass_factor(&self, ratio: f64) -> f64 {
        1.0 - ratio * (1.0 - self.sticky_share)
    }
}

/// Table counts `m` and their global-mass portion `m̂` over every restaurant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TableCounts {
    pub k: usize,
    pub cells: Vec<TableCell>,
    pub restaurants: Vec<Restaurant>,
}

impl TableCounts {
    pub fn total_tables(&self) -> u64 {
        self.cells.iter().map(|c| c.tables as u64).sum()
    }

    pub fn total_unsticky(&self) -> u64 {
        self.cells.iter().map(|c| c.unsticky as u64).sum()
    }

    /// `m̂_{.k}` for every community.
    pub fn unsticky_by_dish(&self) -> Vec<u64> {
        let mut out = vec![0; self.k];
        for c in &self.cells {
            out[c.dish as usize] += c.unsticky as u64;
        }
        out
    }

    /// `(sum (m - m̂), sum m̂)` over restaurants that carry sticky mass.
    pub fn sticky_split(&self) -> (u64, u64) {
        let mut sticky = 0;
        let mut plain = 0;
        for c in &self.cells {
            if !self.restaurants[c.restaurant as usize].initial {
                sticky += (c.tables - c.unsticky) as u64;
                plain += c.unsticky as u64;
            }
        }
        (sticky, plain)
    }

    /// `sum m̂` over restaurants without sticky mass.
    pub fn initial_unsticky(&self) -> u64 {
        self.cells
            .iter()
            .filter(|c| self.restaurants[c.restaurant as usize].initial)
            .map(|c| c.unsticky as u64)
            .sum()
    }

    /// Checks `0 <= m̂ <= m <= N` and `m >= 1` on occupied cells.
    pub fn check(&self) -> bool {
        self.cells
            .iter()
            .all(|c| c.unsticky <= c.tables && c.tables <= c.customers && (c.customers == 0 || c.tables >= 1))
    }
}

/// Restaurant layout of a state: `(cells without table counts, restaurants)`.
fn restaurants_of(state: &ChainState) -> TableCounts {
    let k = state.k();
    let n = state.n();
    let w = &state.weights;
    let alpha = w.alpha();
    let mut cells = Vec::new();
    let mut restaurants = Vec::new();
    match state.dynamics {
        Dynamics::Mtv => {
            let unit = w.sticky_unit(n);
            let share = if n > 0 { (n as f64 - 1.0) / n as f64 } else { 0.0 };
            for t in 0..state.times() {
                for i in 0..n {
                    let r = restaurants.len() as u32;
                    let row = state.counts.participation(t, i);
                    let prev = (t > 0).then(|| state.counts.participation(t - 1, i));
                    for dish in 0..k {
                        if row[dish] == 0 {
                            continue;
                        }
                        let plain = alpha * w.beta[dish];
                        let sticky = prev.map_or(0.0, |p| unit * p[dish] as f64);
                        cells.push(cell(r, dish, row[dish], plain, sticky));
                    }
                    restaurants.push(Restaurant {
                        customers: row.iter().sum(),
                        sticky_share: if t > 0 { share } else { 0.0 },
                        initial: t == 0,
                        tables: 0,
                        unsticky: 0,
                    });
                }
            }
        }
        Dynamics::Mti => {
            let tr = state
                .transitions
                .as_ref()
                .expect("transition counts for time-invariant dynamics");
            let kappa = w.kappa();
            for node in 0..n {
                for row in 0..=k {
                    let r = restaurants.len() as u32;
                    for dish in 0..k {
                        let c = tr.count(node, row, dish);
                        if c == 0 {
                            continue;
                        }
                        let sticky = if row == dish + 1 { kappa } else { 0.0 };
                        cells.push(cell(r, dish, c, alpha * w.beta[dish], sticky));
                    }
                    restaurants.push(Restaurant {
                        customers: tr.row_total(node, row),
                        sticky_share: if row == 0 { 0.0 } else { 1.0 },
                        initial: row == 0,
                        tables: 0,
                        unsticky: 0,
                    });
                }
            }
        }
    }
    TableCounts { k, cells, restaurants }
}

fn cell(restaurant: u32, dish: usize, customers: u32, plain: f64, sticky: f64) -> TableCell {
    let concentration = plain + sticky;
    TableCell {
        restaurant,
        dish: dish as u32,
        customers,
        concentration,
        unsticky_prob: if concentration > 0.0 {
            plain / concentration
        } else {
            1.0
        },
        tables: 0,
        unsticky: 0,
    }
}

/// Samples `m` for every occupied (restaurant, dish) cell. `m̂` is left at 0
/// until [`split_tables`].
pub fn sample_tables<R: Rng + ?Sized>(state: &ChainState, stirling: &mut StirlingTable, rng: &mut R) -> TableCounts {
    let mut out = restaurants_of(state);
    for c in &mut out.cells {
        c.tables = sample_table_count(c.customers, c.concentration, stirling, rng);
        out.restaurants[c.restaurant as usize].tables += c.tables;
    }
    out
}

/// Splits each cell's tables into those served from the global mass:
/// `m̂ ~ Binomial(m, alpha beta_k / (alpha beta_k + sticky))`.
pub fn split_tables<R: Rng + ?Sized>(tables: &mut TableCounts, rng: &mut R) {
    for r in &mut tables.restaurants {
        r.unsticky = 0;
    }
    for c in &mut tables.cells {
        c.unsticky = if c.unsticky_prob >= 1.0 {
            c.tables
        } else if c.unsticky_prob <= 0.0 {
            0
        } else {
            Binomial::new(c.tables as u64, c.unsticky_prob)
                .expect("valid binomial")
                .sample(rng) as u32
        };
        tables.restaurants[c.restaurant as usize].unsticky += c.unsticky;
    }
}

/// `(beta_1..beta_K, beta_u) ~ Dir(m̂_{.1}, .., m̂_{.K}, gamma)`.
///
/// Every community must own at least one global-mass table; that holds for
/// any compacted state because a community's earliest label cannot be sticky.
pub fn resample_beta<R: Rng + ?Sized>(tables: &TableCounts, gamma: f64, rng: &mut R) -> (Vec<f64>, f64) {
    let mut params: Vec<f64> = tables.unsticky_by_dish().iter().map(|&m| m as f64).collect();
    debug_assert!(params.iter().all(|&m| m > 0.0), "community without global tables");
    params.push(gamma);
    let mut out = Vec::new();
    dirichlet_variate(&params, rng, &mut out);
    let remainder = out.pop().expect("remainder component").max(f64::MIN_POSITIVE);
    for b in &mut out {
        *b = b.max(f64::MIN_POSITIVE);
    }
    let total: f64 = out.iter().sum::<f64>() + remainder;
    for b in &mut out {
        *b /= total;
    }
    (out, remainder / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stirling_small_values() {
        let mut s = StirlingTable::new();
        let exact = [
            (4, 1, 6.0),
            (4, 2, 11.0),
            (4, 3, 6.0),
            (4, 4, 1.0),
            (5, 2, 50.0),
            (6, 3, 225.0),
        ];
        for (n, m, v) in exact {
            assert!((s.ln(n, m) - f64::ln(v)).abs() < 1e-12, "S({n},{m})");
        }
        assert_eq!(s.ln(3, 0), f64::NEG_INFINITY);
        assert_eq!(s.ln(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn stirling_large_rows_finite() {
        let mut s = StirlingTable::new();
        for m in 1..=2000 {
            assert!(s.ln(2000, m).is_finite());
        }
        // S(n, 1) = (n-1)!
        assert!((s.ln(2000, 1) - crate::math::ln_gamma(2000.0)).abs() < 1e-6);
    }

    #[test]
    fn one_customer_one_table() {
        let mut s = StirlingTable::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample_table_count(1, 0.3, &mut s, &mut rng), 1);
        }
    }

    #[test]
    fn beta_mean_matches_dirichlet() {
        let tables = TableCounts {
            k: 2,
            cells: vec![
                TableCell {
                    restaurant: 0,
                    dish: 0,
                    customers: 5,
                    concentration: 1.0,
                    unsticky_prob: 1.0,
                    tables: 5,
                    unsticky: 5,
                },
                TableCell {
                    restaurant: 0,
                    dish: 1,
                    customers: 5,
                    concentration: 1.0,
                    unsticky_prob: 1.0,
                    tables: 5,
                    unsticky: 5,
                },
            ],
            restaurants: vec![],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 40_000;
        let mut mean = [0.0; 3];
        for _ in 0..draws {
            let (b, u) = resample_beta(&tables, 1.0, &mut rng);
            assert!((b.iter().sum::<f64>() + u - 1.0).abs() < 1e-12);
            mean[0] += b[0];
            mean[1] += b[1];
            mean[2] += u;
        }
        for m in &mut mean[..2] {
            *m /= draws as f64;
            // Dir(5, 5, 1): mean 5/11, sd ~ 0.143
            assert!((*m - 5.0 / 11.0).abs() < 4.0 * 0.143 / (draws as f64).sqrt());
        }
    }
}
