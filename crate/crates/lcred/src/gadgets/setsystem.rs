use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::binomial;
use crate::rng;
use rand::Rng;

pub const DEFAULT_VERIFY_BUDGET: u128 = 1 << 24;
const BUILD_RETRIES: u64 = 64;

/// Universe B = 0..universe with sets C_1..C_m stored as bitsets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SetSystem {
    universe: usize,
    sets: Vec<Vec<u64>>,
    verified_l: usize,
}

impl SetSystem {
    pub fn from_sets(universe: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let words = universe.div_ceil(64);
        let mut out = Vec::with_capacity(sets.len());
        for s in sets {
            let mut bits = vec![0u64; words];
            for &b in s {
                if b >= universe {
                    return Err(Error::Invalid(format!("element {b} outside universe")));
                }
                bits[b / 64] |= 1 << (b % 64);
            }
            out.push(bits);
        }
        Ok(Self { universe, sets: out, verified_l: 0 })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }
    pub fn m(&self) -> usize {
        self.sets.len()
    }
    pub fn verified_l(&self) -> usize {
        self.verified_l
    }

    pub fn contains(&self, i: usize, b: usize) -> bool {
        self.sets[i][b / 64] >> (b % 64) & 1 == 1
    }

    /// Elements of C_i (or of its complement when `complement`).
    pub fn members(&self, i: usize, complement: bool) -> Vec<usize> {
        (0..self.universe).filter(|&b| self.contains(i, b) != complement).collect()
    }

    fn literal(&self, i: usize, complement: bool) -> Vec<u64> {
        let mut bits = self.sets[i].clone();
        if complement {
            for w in bits.iter_mut() {
                *w = !*w;
            }
            mask_tail(&mut bits, self.universe);
        }
        bits
    }
}

fn mask_tail(bits: &mut [u64], universe: usize) {
    let rem = universe % 64;
    if rem != 0 {
        if let Some(last) = bits.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

/// Checks that no ≤ l literals from {C_i, C̄_i} without a complementary pair
/// cover B. Records `l` as verified on success.
pub fn verify_set_system(s: &mut SetSystem, l: usize, budget: u128) -> Result<bool> {
    let work: u128 = (0..=l as u64).map(|j| binomial(2 * s.m() as u64, j)).sum();
    if work > budget {
        return Err(Error::BudgetExceeded(format!("{work} selections")));
    }
    let literals: Vec<[Vec<u64>; 2]> = (0..s.m()).map(|i| [s.literal(i, false), s.literal(i, true)]).collect();
    let mut full = vec![u64::MAX; s.universe.div_ceil(64)];
    mask_tail(&mut full, s.universe);
    let acc = vec![0u64; full.len()];
    let ok = !covers_within(&literals, &full, &acc, 0, l);
    if ok {
        s.verified_l = s.verified_l.max(l);
    }
    Ok(ok)
}

/// Whether some selection of ≤ `left` literals from sets ≥ `start`, each set
/// used at most once and with one sign, completes `acc` to the full universe.
fn covers_within(literals: &[[Vec<u64>; 2]], full: &[u64], acc: &[u64], start: usize, left: usize) -> bool {
    if acc == full {
        return true;
    }
    if left == 0 {
        return false;
    }
    for i in start..literals.len() {
        for lit in &literals[i] {
            let next: Vec<u64> = acc.iter().zip(lit).map(|(a, b)| a | b).collect();
            if covers_within(literals, full, &next, i + 1, left - 1) {
                return true;
            }
        }
    }
    false
}

/// Random construction with |B| = ⌈8·4^l·ln(2m·(2m)^l)⌉ and independent fair
/// membership bits, verified exhaustively; a failed verification retries
/// with the next seed stream.
pub fn build_set_system(m: usize, l: usize, seed: u64, budget: u128) -> Result<SetSystem> {
    if m == 0 || l == 0 {
        return Err(Error::Precondition("need m ≥ 1 and l ≥ 1".into()));
    }
    let two_m = 2.0 * m as f64;
    let universe = (8.0 * 4f64.powi(l as i32) * (two_m * two_m.powi(l as i32)).ln()).ceil() as usize;
    for attempt in 0..BUILD_RETRIES {
        let mut r = rng::stream(seed, rng::task::SET_SYSTEM.wrapping_add(attempt << 8));
        let sets: Vec<Vec<usize>> =
            (0..m).map(|_| (0..universe).filter(|_| r.gen_bool(0.5)).collect()).collect();
        let mut s = SetSystem::from_sets(universe, &sets)?;
        if verify_set_system(&mut s, l, budget)? {
            return Ok(s);
        }
    }
    Err(Error::BudgetExceeded("set system retries exhausted".into()))
}

/// Deterministic system on B = {0,1}^m with C_i = {b : bit i of b is 1}.
/// A literal selection without complementary pairs misses the point that
/// violates every chosen literal, so the property holds for every l; it is
/// verified here up to `l`.
pub fn hypercube_set_system(m: usize, l: usize, budget: u128) -> Result<SetSystem> {
    if m == 0 || m > 20 {
        return Err(Error::Precondition("hypercube system needs 1 ≤ m ≤ 20".into()));
    }
    let universe = 1usize << m;
    let sets: Vec<Vec<usize>> = (0..m).map(|i| (0..universe).filter(|b| b >> i & 1 == 1).collect()).collect();
    let mut s = SetSystem::from_sets(universe, &sets)?;
    if !verify_set_system(&mut s, l, budget)? {
        return Err(Error::Invalid("hypercube system failed verification".into()));
    }
    Ok(s)
}
