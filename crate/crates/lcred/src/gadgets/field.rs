//! Arithmetic in GF(p^k), elements encoded as integers whose base-p digits
//! are polynomial coefficients (lowest degree first).

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GaloisField {
    p: u32,
    k: u32,
    q: u32,
    /// Monic irreducible modulus, coefficients lowest degree first (length k+1).
    modulus: Vec<u32>,
}

/// `Some((p, k))` when `q = p^k` for a prime p.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut rest = q;
    let mut k = 0;
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

impl GaloisField {
    pub fn new(q: u32) -> Result<Self> {
        let (p, k) = prime_power(q).ok_or_else(|| Error::Precondition(format!("{q} is not a prime power")))?;
        let modulus = if k == 1 { vec![0, 1] } else { find_irreducible(p, k) };
        Ok(Self { p, k, q, modulus })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    fn digits(&self, mut x: u32) -> Vec<u32> {
        let mut d = Vec::with_capacity(self.k as usize);
        for _ in 0..self.k {
            d.push(x % self.p);
            x /= self.p;
        }
        d
    }

    fn from_digits(&self, d: &[u32]) -> u32 {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return (a + b) % self.p;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.from_digits(&s)
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u32; 2 * self.k as usize - 1];
        for (i, x) in da.iter().enumerate() {
            for (j, y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        poly_rem(&mut prod, &self.modulus, self.p);
        prod.truncate(self.k as usize);
        self.from_digits(&prod)
    }

    /// Evaluates the polynomial with the given coefficients (lowest first) at x.
    pub fn eval(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

/// In-place remainder modulo a monic polynomial.
fn poly_rem(a: &mut Vec<u32>, m: &[u32], p: u32) {
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = *a.last().expect("non-empty");
        let shift = a.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                let sub = (lead * c) % p;
                a[shift + i] = (a[shift + i] + p - sub) % p;
            }
        }
        a.pop();
    }
}

fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    for dd in 1..=deg / 2 {
        // Every monic polynomial of degree dd.
        let count = p.pow(dd as u32);
        for low in 0..count {
            let mut div: Vec<u32> = (0..dd).map(|i| (low / p.pow(i as u32)) % p).collect();
            div.push(1);
            let mut r = poly.to_vec();
            poly_rem(&mut r, &div, p);
            if r.iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// First monic irreducible polynomial of degree k in the order of its
/// lower coefficients read as a base-p number.
fn find_irreducible(p: u32, k: u32) -> Vec<u32> {
    let count = p.pow(k);
    for low in 0..count {
        let mut poly: Vec<u32> = (0..k).map(|i| (low / p.pow(i)) % p).collect();
        poly.push(1);
        if is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}
