//! Bit-coded basis of a fixed-magnetization sector. Bit `i` set means site `i`
//! is up; a sector is the set of `N`-bit words of fixed popcount, stored in
//! increasing order so that the combinatorial rank is the array index.

use crate::error::{invalid, Result};

pub const MAX_SITES: usize = 24;

#[derive(Debug, Clone)]
pub struct Binomials {
    table: Vec<Vec<u64>>,
}

impl Binomials {
    pub fn new(n: usize) -> Self {
        let mut table = vec![vec![0u64; n + 2]; n + 1];
        for (a, row) in table.iter_mut().enumerate() {
            row[0] = 1;
            row[a] = 1;
        }
        for a in 1..=n {
            for b in 1..a {
                table[a][b] = table[a - 1][b - 1] + table[a - 1][b];
            }
        }
        Binomials { table }
    }

    pub fn get(&self, a: usize, b: usize) -> u64 {
        if b > a {
            0
        } else {
            self.table[a][b]
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sector {
    n_sites: usize,
    n_up: usize,
    states: Vec<u32>,
    binom: Binomials,
}

impl Sector {
    pub fn new(n_sites: usize, n_up: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(invalid("n_sites", format!("must lie in 1..={MAX_SITES} (got {n_sites})")));
        }
        if n_up > n_sites {
            return Err(invalid("n_up", format!("{n_up} exceeds {n_sites} sites")));
        }
        let binom = Binomials::new(n_sites);
        let dim = binom.get(n_sites, n_up) as usize;
        let mut states = Vec::with_capacity(dim);
        if n_up == 0 {
            states.push(0);
        } else {
            // Gosper's hack enumerates fixed-popcount words in increasing order
            let mut v: u64 = (1u64 << n_up) - 1;
            let limit = 1u64 << n_sites;
            while v < limit {
                states.push(v as u32);
                let t = v | (v - 1);
                v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
            }
        }
        debug_assert_eq!(states.len(), dim);
        Ok(Sector { n_sites, n_up, states, binom })
    }

    /// Sector with collective `Z = m`, i.e. `N/2 + m` up spins.
    pub fn with_magnetization(n_sites: usize, m: f64) -> Result<Self> {
        let up = n_sites as f64 / 2.0 + m;
        if (up - up.round()).abs() > 1e-9 || up < -1e-9 || up > n_sites as f64 + 1e-9 {
            return Err(invalid("m", format!("no sector with Z = {m} for N = {n_sites}")));
        }
        Sector::new(n_sites, up.round() as usize)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn magnetization(&self) -> f64 {
        self.n_up as f64 - self.n_sites as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> u32 {
        self.states[idx]
    }

    /// Index of `state` in this sector; `state` must have the sector popcount.
    pub fn rank(&self, state: u32) -> usize {
        debug_assert_eq!(state.count_ones() as usize, self.n_up);
        let mut r = 0u64;
        let mut s = state;
        let mut k = 1;
        while s != 0 {
            let p = s.trailing_zeros() as usize;
            r += self.binom.get(p, k);
            k += 1;
            s &= s - 1;
        }
        r as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_is_index() {
        for (n, k) in [(6, 3), (10, 4), (12, 0), (12, 12), (9, 1)] {
            let s = Sector::new(n, k).unwrap();
            assert_eq!(s.dim() as u64, Binomials::new(n).get(n, k));
            for (i, &st) in s.states().iter().enumerate() {
                assert_eq!(st.count_ones() as usize, k);
                assert_eq!(s.rank(st), i);
                if i > 0 {
                    assert!(st > s.state(i - 1));
                }
            }
        }
    }

    #[test]
    fn magnetization_labels() {
        assert_eq!(Sector::with_magnetization(4, 1.0).unwrap().n_up(), 3);
        assert_eq!(Sector::with_magnetization(5, -0.5).unwrap().n_up(), 2);
        assert!(Sector::with_magnetization(4, 0.5).is_err());
        assert!(Sector::with_magnetization(4, 3.0).is_err());
    }
}
