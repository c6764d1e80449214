//! Exact rational helpers. All values, probabilities and EMDs are `Ratio<i128>`.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

pub type Rational = Ratio<i128>;

pub fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Formats as `p/q` (or `p` for integers).
pub fn fmt(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().ok()?;
            let d: i128 = d.trim().parse().ok()?;
            (d != 0).then(|| Rational::new(n, d))
        }
        None => s.parse::<i128>().ok().map(Rational::from_integer),
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Smallest rational p/den with p/den >= x; used to turn float parameters
/// into exact thresholds without rounding in the favourable direction.
pub fn from_f64_ceil(x: f64, den: i128) -> Rational {
    Rational::new((x * den as f64).ceil() as i128, den)
}

pub fn lcm_all<I: IntoIterator<Item = i128>>(it: I) -> i128 {
    it.into_iter().fold(1i128, |acc, d| acc.lcm(&d))
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub mod serde_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::fmt(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_and_parse_roundtrip() {
        for r in [q(2, 3), q(-1, 4), q(6, 3), zero()] {
            assert_eq!(parse(&fmt(&r)), Some(r));
        }
        assert_eq!(fmt(&q(4, 6)), "2/3");
        assert_eq!(parse("1/0"), None);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(12, 0), 1);
    }
}
