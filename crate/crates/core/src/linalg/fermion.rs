//! Spin-1/2 fermions on a finite lattice at fixed particle number.
//!
//! Mode `2x` is `(x, up)` and mode `2x + 1` is `(x, down)`. Basis states are
//! occupation bitstrings (bit `m` set iff mode `m` is occupied) in ascending
//! integer order. Annihilating mode `m` picks up the Jordan–Wigner sign
//! `(-1)^{number of occupied modes below m}`.

use serde::{Deserialize, Serialize};

use super::{c, HermitianOperator, Matrix};
use crate::error::{Error, Result};

/// Sites are limited so that bitstrings fit comfortably in a `u64` and the
/// dense operators stay desk-sized.
pub const MAX_SITES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    fn offset(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

pub fn mode_index(site: usize, spin: Spin) -> usize {
    2 * site + spin.offset()
}

fn jw_sign(state: u64, mode: usize) -> f64 {
    let below = state & ((1u64 << mode) - 1);
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermionSector {
    num_sites: usize,
    num_electrons: usize,
    basis: Vec<u64>,
}

impl FermionSector {
    pub fn new(num_sites: usize, num_electrons: usize) -> Result<Self> {
        if num_sites == 0 || num_sites > MAX_SITES {
            return Err(Error::domain(format!("number of sites must be in 1..={MAX_SITES}, got {num_sites}")));
        }
        if num_electrons > 2 * num_sites {
            return Err(Error::domain(format!(
                "{num_electrons} electrons do not fit on {num_sites} sites"
            )));
        }
        let modes = 2 * num_sites;
        let basis = combinations(modes, num_electrons);
        Ok(Self { num_sites, num_electrons, basis })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn num_electrons(&self) -> usize {
        self.num_electrons
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    pub fn index_of(&self, state: u64) -> Option<usize> {
        self.basis.binary_search(&state).ok()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.num_sites {
            return Err(Error::domain(format!("site {site} outside lattice of {} sites", self.num_sites)));
        }
        Ok(())
    }

    /// Occupation (0 or 1) of `(site, spin)` in basis state `idx`.
    pub fn occupation(&self, idx: usize, site: usize, spin: Spin) -> u32 {
        ((self.basis[idx] >> mode_index(site, spin)) & 1) as u32
    }

    /// `n_x = n_{x,up} + n_{x,down}` in basis state `idx`.
    pub fn site_occupation(&self, idx: usize, site: usize) -> u32 {
        self.occupation(idx, site, Spin::Up) + self.occupation(idx, site, Spin::Down)
    }

    /// `n_{x,sigma}`.
    pub fn number(&self, site: usize, spin: Spin) -> Result<HermitianOperator> {
        self.check_site(site)?;
        let diag: Vec<f64> = (0..self.dim()).map(|i| self.occupation(i, site, spin) as f64).collect();
        Ok(HermitianOperator::from_real_diagonal(&diag))
    }

    /// `n_x = n_{x,up} + n_{x,down}`.
    pub fn site_number(&self, site: usize) -> Result<HermitianOperator> {
        self.check_site(site)?;
        let diag: Vec<f64> = (0..self.dim()).map(|i| self.site_occupation(i, site) as f64).collect();
        Ok(HermitianOperator::from_real_diagonal(&diag))
    }

    /// `c^dagger_{x,sigma} c_{y,sigma}` (not Hermitian unless `x = y`).
    pub fn hop(&self, x: usize, y: usize, spin: Spin) -> Result<Matrix> {
        self.check_site(x)?;
        self.check_site(y)?;
        let (mx, my) = (mode_index(x, spin), mode_index(y, spin));
        let mut m = Matrix::zeros(self.dim(), self.dim());
        for (col, &s) in self.basis.iter().enumerate() {
            if s >> my & 1 == 0 {
                continue;
            }
            let s1 = s & !(1u64 << my);
            let sign1 = jw_sign(s, my);
            if s1 >> mx & 1 == 1 {
                continue;
            }
            let s2 = s1 | (1u64 << mx);
            let sign2 = jw_sign(s1, mx);
            let row = self.index_of(s2).expect("hopping preserves particle number");
            m[(row, col)] += c(sign1 * sign2, 0.0);
        }
        Ok(m)
    }

    /// `c^dagger_{x,sigma} c_{y,sigma} + c^dagger_{y,sigma} c_{x,sigma}`.
    pub fn hop_hermitian(&self, x: usize, y: usize, spin: Spin) -> Result<HermitianOperator> {
        let h = self.hop(x, y, spin)?;
        let sum = &h + h.adjoint();
        HermitianOperator::new(sum)
    }
}

/// All `k`-subsets of `n` bits, ascending.
fn combinations(n: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << k) - 1;
    let limit = 1u64 << n;
    while v < limit {
        out.push(v);
        // Gosper's hack: next integer with the same popcount.
        let t = v | (v - 1);
        let next = (t + 1) | (((!t & (!t).wrapping_neg()) - 1) >> (v.trailing_zeros() + 1));
        if next <= v {
            break;
        }
        v = next;
    }
    out
}

/// Annihilator `c_{x,sigma}` on the full fermionic Fock space over
/// `num_sites` sites (dimension `4^num_sites`), basis index = bitstring.
/// Used to check the canonical anticommutation relations.
pub fn fock_annihilator(num_sites: usize, site: usize, spin: Spin) -> Result<Matrix> {
    if num_sites == 0 || num_sites > 6 {
        return Err(Error::domain("full Fock builds are limited to 1..=6 sites"));
    }
    if site >= num_sites {
        return Err(Error::domain(format!("site {site} outside lattice of {num_sites} sites")));
    }
    let dim = 1usize << (2 * num_sites);
    let m_idx = mode_index(site, spin);
    let mut m = Matrix::zeros(dim, dim);
    for s in 0..dim as u64 {
        if s >> m_idx & 1 == 1 {
            let t = s & !(1u64 << m_idx);
            m[(t as usize, s as usize)] = c(jw_sign(s, m_idx), 0.0);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{anticommutator, max_abs, trace};

    #[test]
    fn sector_dimensions() {
        assert_eq!(FermionSector::new(1, 2).unwrap().dim(), 1);
        assert_eq!(FermionSector::new(2, 2).unwrap().dim(), 6);
        assert_eq!(FermionSector::new(3, 3).unwrap().dim(), 20);
        assert_eq!(FermionSector::new(2, 0).unwrap().dim(), 1);
        assert_eq!(FermionSector::new(2, 4).unwrap().dim(), 1);
        assert!(FermionSector::new(2, 5).is_err());
    }

    #[test]
    fn basis_matches_brute_force() {
        let sector = FermionSector::new(3, 3).unwrap();
        let brute: Vec<u64> = (0u64..64).filter(|s| s.count_ones() == 3).collect();
        assert_eq!(sector.basis(), brute.as_slice());
    }

    #[test]
    fn full_doubly_occupied_site() {
        let sector = FermionSector::new(1, 2).unwrap();
        assert_eq!(sector.number(0, Spin::Up).unwrap().matrix()[(0, 0)], c(1.0, 0.0));
        assert_eq!(sector.site_number(0).unwrap().matrix()[(0, 0)], c(2.0, 0.0));
    }

    #[test]
    fn site_number_traces() {
        // Each of the 4 modes is occupied in C(3,1) = 3 of the 6 states.
        let sector = FermionSector::new(2, 2).unwrap();
        for x in 0..2 {
            assert_eq!(trace(sector.site_number(x).unwrap().matrix()), c(6.0, 0.0));
        }
    }

    #[test]
    fn car_exhaustive_up_to_three_sites() {
        for sites in 1..=3 {
            let modes: Vec<(usize, Spin)> = (0..sites).flat_map(|x| Spin::BOTH.map(|s| (x, s))).collect();
            let ops: Vec<Matrix> = modes.iter().map(|&(x, s)| fock_annihilator(sites, x, s).unwrap()).collect();
            let dim = ops[0].nrows();
            let id = Matrix::identity(dim, dim);
            for (i, a) in ops.iter().enumerate() {
                for (j, b) in ops.iter().enumerate() {
                    let mixed = anticommutator(a, &b.adjoint());
                    let want = if i == j { id.clone() } else { Matrix::zeros(dim, dim) };
                    assert!(max_abs(&(mixed - want)) == 0.0, "sites {sites}, modes {i},{j}");
                    assert!(max_abs(&anticommutator(a, b)) == 0.0);
                }
            }
        }
    }

    #[test]
    fn sector_hop_matches_full_fock_projection() {
        let sites = 3;
        let sector = FermionSector::new(sites, 3).unwrap();
        for spin in Spin::BOTH {
            for x in 0..sites {
                for y in 0..sites {
                    let cx = fock_annihilator(sites, x, spin).unwrap();
                    let cy = fock_annihilator(sites, y, spin).unwrap();
                    let full = cx.adjoint() * cy;
                    let hop = sector.hop(x, y, spin).unwrap();
                    for (i, &si) in sector.basis().iter().enumerate() {
                        for (j, &sj) in sector.basis().iter().enumerate() {
                            assert_eq!(hop[(i, j)], full[(si as usize, sj as usize)]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_site_is_domain_error() {
        let sector = FermionSector::new(2, 2).unwrap();
        assert!(matches!(sector.number(2, Spin::Up), Err(Error::Domain(_))));
    }
}
