use serde::{Deserialize, Serialize};

use super::field::{prime_power, GaloisField};
use crate::error::{Error, Result};
use crate::lc::Label;
use crate::rational::{self, Rational};

pub const MAX_FIELD: u32 = 1 << 16;

/// Code Σ → Σ̂^k given by an explicit codeword table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Code {
    pub source_alphabet: usize,
    pub block_length: usize,
    pub target_alphabet: usize,
    pub table: Vec<Vec<Label>>,
    #[serde(with = "rational::serde_str")]
    pub declared_delta: Rational,
    #[serde(with = "rational::serde_str")]
    pub min_distance: Rational,
}

impl Code {
    pub fn codeword(&self, symbol: usize) -> &[Label] {
        &self.table[symbol]
    }

    /// The δ actually achieved: 1 − certified minimum distance.
    pub fn certified_delta(&self) -> Rational {
        rational::one() - self.min_distance
    }
}

/// Reed–Solomon instantiation: the smallest prime power q (linear search up
/// to 2^16) with q·δ ≥ t − 1 where t = ⌈log_q σ⌉; symbol i is the polynomial
/// whose t coefficients are the base-q digits of i, evaluated at every field
/// element. Block length q, distance 1 − (t−1)/q.
pub fn build_code(sigma: usize, delta: Rational) -> Result<Code> {
    if sigma < 2 {
        return Err(Error::Precondition("sigma_size < 2".into()));
    }
    if delta <= rational::zero() || delta >= rational::one() {
        return Err(Error::Precondition("need 0 < δ < 1".into()));
    }
    let (q, t) = (2..=MAX_FIELD)
        .filter(|&q| prime_power(q).is_some())
        .map(|q| (q, digits_needed(sigma, q as usize)))
        .find(|&(q, t)| Rational::from_integer(q as i128) * delta >= Rational::from_integer(t as i128 - 1))
        .ok_or_else(|| Error::BudgetExceeded("no prime power ≤ 2^16 fits".into()))?;
    let field = GaloisField::new(q)?;
    let table: Vec<Vec<Label>> = (0..sigma)
        .map(|i| {
            let coeffs: Vec<u32> = (0..t).map(|j| ((i / (q as usize).pow(j as u32)) % q as usize) as u32).collect();
            (0..q).map(|x| field.eval(&coeffs, x)).collect()
        })
        .collect();
    let mut code = Code {
        source_alphabet: sigma,
        block_length: q as usize,
        target_alphabet: q as usize,
        table,
        declared_delta: delta,
        min_distance: rational::zero(),
    };
    code.min_distance = verify_code(&code);
    Ok(code)
}

fn digits_needed(sigma: usize, q: usize) -> usize {
    let mut t = 1;
    let mut cap = q;
    while cap < sigma {
        cap = cap.saturating_mul(q);
        t += 1;
    }
    t
}

/// True minimum pairwise relative distance, by all-pairs comparison.
pub fn verify_code(c: &Code) -> Rational {
    let k = c.block_length as i128;
    let mut best = k;
    for a in 0..c.table.len() {
        for b in a + 1..c.table.len() {
            let d = c.table[a].iter().zip(&c.table[b]).filter(|(x, y)| x != y).count() as i128;
            best = best.min(d);
        }
    }
    Rational::new(best, k)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListCount {
    pub count: usize,
    /// η > 2√δ for the certified δ; only then is the ⌊2/η⌋ bound asserted.
    pub precondition_holds: bool,
    pub bound: Option<u64>,
}

/// Number of source symbols whose codeword agrees with `w` on at least an η
/// fraction of coordinates.
pub fn list_count(c: &Code, w: &[Label], eta: Rational) -> Result<ListCount> {
    if w.len() != c.block_length {
        return Err(Error::DomainMismatch("word length".into()));
    }
    let k = Rational::from_integer(c.block_length as i128);
    let count = c
        .table
        .iter()
        .filter(|cw| {
            let agree = cw.iter().zip(w).filter(|(x, y)| x == y).count() as i128;
            Rational::from_integer(agree) >= eta * k
        })
        .count();
    let delta = c.certified_delta();
    let four = Rational::from_integer(4);
    let precondition_holds = eta > rational::zero() && eta * eta > four * delta;
    let bound = (eta > rational::zero()).then(|| (Rational::from_integer(2) / eta).floor().to_integer() as u64);
    Ok(ListCount { count, precondition_holds, bound })
}
