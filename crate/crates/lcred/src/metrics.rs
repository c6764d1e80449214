//! Hamming/EMD metrics, finite distributions, and the swap-sensitivity harness.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::content_hash;
use crate::lc::{Assignment, Label, LabelCoverInstance, Swap, Swappable};
use crate::rational::{self, Rational};
use crate::rng::{self, Stream};

pub const DEFAULT_EMD_BUDGET: usize = 1 << 22;

/// Outcome spaces carrying a Hamming-type distance.
pub trait Metric {
    fn same_domain(&self, other: &Self) -> bool;
    fn distance(&self, other: &Self) -> u64;
}

impl Metric for Assignment {
    fn same_domain(&self, other: &Self) -> bool {
        self.left.len() == other.left.len() && self.right.len() == other.right.len()
    }
    fn distance(&self, other: &Self) -> u64 {
        let d = distance_vector_unchecked(self, other);
        d.left + d.right
    }
}

impl<T: PartialEq> Metric for Vec<T> {
    fn same_domain(&self, other: &Self) -> bool {
        self.len() == other.len()
    }
    fn distance(&self, other: &Self) -> u64 {
        self.iter().zip(other).filter(|(a, b)| a != b).count() as u64
    }
}

/// Index subsets under symmetric difference.
impl Metric for BTreeSet<usize> {
    fn same_domain(&self, _: &Self) -> bool {
        true
    }
    fn distance(&self, other: &Self) -> u64 {
        self.symmetric_difference(other).count() as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceVector {
    pub left: u64,
    pub right: u64,
}

impl DistanceVector {
    pub fn total(&self) -> u64 {
        self.left + self.right
    }
}

pub fn hamming<T: Metric>(a: &T, b: &T) -> Result<u64> {
    if !a.same_domain(b) {
        return Err(Error::DomainMismatch("hamming on different domains".into()));
    }
    Ok(a.distance(b))
}

pub fn distance_vector(a: &Assignment, b: &Assignment) -> Result<DistanceVector> {
    if !a.same_domain(b) {
        return Err(Error::DomainMismatch("distance vector on different domains".into()));
    }
    Ok(distance_vector_unchecked(a, b))
}

fn distance_vector_unchecked(a: &Assignment, b: &Assignment) -> DistanceVector {
    DistanceVector {
        left: a.left.iter().zip(&b.left).filter(|(x, y)| x != y).count() as u64,
        right: a.right.iter().zip(&b.right).filter(|(x, y)| x != y).count() as u64,
    }
}

/// Finite-support distribution with exact positive weights summing to 1.
/// Support points are merged and kept sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalDistribution<T> {
    support: Vec<(T, Rational)>,
}

impl<T: Ord + Clone> EmpiricalDistribution<T> {
    pub fn new(entries: Vec<(T, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<T, Rational> = BTreeMap::new();
        for (x, w) in entries {
            if w <= Rational::zero() {
                return Err(Error::Invalid("non-positive weight".into()));
            }
            *merged.entry(x).or_insert_with(Rational::zero) += w;
        }
        let total: Rational = merged.values().cloned().sum();
        if total != Rational::one() {
            return Err(Error::Invalid(format!("weights sum to {}", rational::fmt(&total))));
        }
        Ok(Self { support: merged.into_iter().collect() })
    }

    pub fn point(x: T) -> Self {
        Self { support: vec![(x, Rational::one())] }
    }

    /// Uniform over a non-empty multiset of outcomes.
    pub fn uniform(items: Vec<T>) -> Self {
        assert!(!items.is_empty(), "uniform over empty list");
        let w = Rational::new(1, items.len() as i128);
        Self::new(items.into_iter().map(|x| (x, w)).collect()).expect("uniform weights")
    }

    pub fn support(&self) -> &[(T, Rational)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn prob(&self, x: &T) -> Rational {
        self.support
            .binary_search_by(|(y, _)| y.cmp(x))
            .map(|i| self.support[i].1)
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn map<U: Ord + Clone>(&self, f: impl Fn(&T) -> U) -> EmpiricalDistribution<U> {
        EmpiricalDistribution::new(self.support.iter().map(|(x, w)| (f(x), *w)).collect())
            .expect("pushforward of a distribution")
    }

    pub fn expectation(&self, f: impl Fn(&T) -> Rational) -> Rational {
        self.support.iter().map(|(x, w)| f(x) * w).sum()
    }
}

/// Exact earth mover's distance under the outcome metric.
///
/// Weights are scaled to integers by the lcm of their denominators and the
/// resulting transportation problem is solved by successive shortest paths
/// with potentials; the optimum is integral, so the result is exact.
pub fn emd_exact<T: Metric + Ord + Clone>(
    p: &EmpiricalDistribution<T>,
    q: &EmpiricalDistribution<T>,
    budget: usize,
) -> Result<Rational> {
    let (n, m) = (p.len(), q.len());
    if n.saturating_mul(m) > budget {
        return Err(Error::BudgetExceeded(format!("{n}x{m} transportation problem")));
    }
    let reference = &p.support[0].0;
    if p.support.iter().chain(&q.support).any(|(x, _)| !reference.same_domain(x)) {
        return Err(Error::DomainMismatch("distributions over different domains".into()));
    }
    let scale = rational::lcm_all(p.support.iter().chain(&q.support).map(|(_, w)| *w.denom()));
    let supply: Vec<i128> = p.support.iter().map(|(_, w)| (w * scale).to_integer()).collect();
    let demand: Vec<i128> = q.support.iter().map(|(_, w)| (w * scale).to_integer()).collect();
    let cost: Vec<Vec<i128>> =
        p.support.iter().map(|(x, _)| q.support.iter().map(|(y, _)| x.distance(y) as i128).collect()).collect();
    Ok(Rational::new(transport(&supply, &demand, &cost), scale))
}

/// Minimum-cost transportation with integer supplies/demands of equal total.
fn transport(supply: &[i128], demand: &[i128], cost: &[Vec<i128>]) -> i128 {
    let (n, m) = (supply.len(), demand.len());
    // Nodes: 0..n sources, n..n+m sinks, s = n+m, t = n+m+1.
    let (s, t) = (n + m, n + m + 1);
    let nodes = n + m + 2;
    let mut rs = supply.to_vec();
    let mut rd = demand.to_vec();
    let mut flow = vec![vec![0i128; m]; n];
    let mut pot = vec![0i128; nodes];
    let mut total = 0i128;
    const INF: i128 = i128::MAX / 4;
    loop {
        let mut dist = vec![INF; nodes];
        let mut prev = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        dist[s] = 0;
        loop {
            let mut x = usize::MAX;
            for v in 0..nodes {
                if !done[v] && dist[v] < INF && (x == usize::MAX || dist[v] < dist[x]) {
                    x = v;
                }
            }
            if x == usize::MAX {
                break;
            }
            done[x] = true;
            let relax = |y: usize, c: i128, dist: &mut Vec<i128>, prev: &mut Vec<usize>| {
                let nd = dist[x] + c + pot[x] - pot[y];
                if nd < dist[y] {
                    dist[y] = nd;
                    prev[y] = x;
                }
            };
            if x == s {
                for i in 0..n {
                    if rs[i] > 0 {
                        relax(i, 0, &mut dist, &mut prev);
                    }
                }
            } else if x < n {
                for j in 0..m {
                    relax(n + j, cost[x][j], &mut dist, &mut prev);
                }
                if rs[x] < supply[x] {
                    relax(s, 0, &mut dist, &mut prev);
                }
            } else if x < n + m {
                let j = x - n;
                for i in 0..n {
                    if flow[i][j] > 0 {
                        relax(i, -cost[i][j], &mut dist, &mut prev);
                    }
                }
                if rd[j] > 0 {
                    relax(t, 0, &mut dist, &mut prev);
                }
            } else if x == t {
                for j in 0..m {
                    if rd[j] < demand[j] {
                        relax(n + j, 0, &mut dist, &mut prev);
                    }
                }
            }
        }
        if dist[t] >= INF {
            break;
        }
        for v in 0..nodes {
            pot[v] += dist[v].min(dist[t]);
        }
        // Walk back to find the bottleneck, then augment.
        let mut path = vec![t];
        let mut v = t;
        while v != s {
            v = prev[v];
            path.push(v);
        }
        path.reverse();
        let mut bottleneck = INF;
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            let cap = if a == s {
                rs[b]
            } else if b == t {
                rd[a - n]
            } else if a < n {
                INF
            } else {
                flow[b][a - n]
            };
            bottleneck = bottleneck.min(cap);
        }
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a == s {
                rs[b] -= bottleneck;
            } else if b == t {
                rd[a - n] -= bottleneck;
            } else if a < n {
                flow[a][b - n] += bottleneck;
                total += bottleneck * cost[a][b - n];
            } else {
                flow[b][a - n] -= bottleneck;
                total -= bottleneck * cost[b][a - n];
            }
        }
    }
    debug_assert!(rs.iter().all(|&x| x == 0) && rd.iter().all(|&x| x == 0));
    total
}

/// A product law over assignments: every coordinate is drawn independently
/// and uniformly from its list of outcomes (one coin per coordinate, radix =
/// list length). Recovery maps with independent per-vertex randomness are
/// described this way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoinLaw {
    pub left: Vec<Vec<Label>>,
    pub right: Vec<Vec<Label>>,
}

impl CoinLaw {
    pub fn deterministic(pi: &Assignment) -> Self {
        Self {
            left: pi.left.iter().map(|&a| vec![a]).collect(),
            right: pi.right.iter().map(|&b| vec![b]).collect(),
        }
    }

    fn coords(&self) -> impl Iterator<Item = &Vec<Label>> {
        self.left.iter().chain(&self.right)
    }

    pub fn radices(&self) -> Vec<usize> {
        self.coords().map(Vec::len).collect()
    }

    /// Number of coordinates with more than one outcome.
    pub fn coin_sites(&self) -> usize {
        self.coords().filter(|o| o.len() > 1).count()
    }

    pub fn with_coins(&self, coins: &[usize]) -> Assignment {
        let nl = self.left.len();
        Assignment::new(
            self.left.iter().zip(coins).map(|(o, &c)| o[c]).collect(),
            self.right.iter().zip(&coins[nl..]).map(|(o, &c)| o[c]).collect(),
        )
    }

    pub fn sample(&self, rng: &mut Stream) -> Assignment {
        let coins: Vec<usize> = self.radices().into_iter().map(|r| rng::below(rng, r)).collect();
        self.with_coins(&coins)
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        self.left.len() == other.left.len() && self.right.len() == other.right.len()
    }

    /// Exact EMD between two product laws. Hamming distance is a sum over
    /// coordinates, so the optimal coupling is the product of per-coordinate
    /// optimal couplings and the EMD is the sum of marginal total variations.
    pub fn emd(&self, other: &Self) -> Result<Rational> {
        let (l, r) = self.distance_vector_emd(other)?;
        Ok(l + r)
    }

    /// Per-side expected disagreements under the optimal product coupling.
    pub fn distance_vector_emd(&self, other: &Self) -> Result<(Rational, Rational)> {
        if !self.same_domain(other) {
            return Err(Error::DomainMismatch("coin laws over different domains".into()));
        }
        let l = self.left.iter().zip(&other.left).map(|(a, b)| total_variation(a, b)).sum();
        let r = self.right.iter().zip(&other.right).map(|(a, b)| total_variation(a, b)).sum();
        Ok((l, r))
    }

    /// Expected Hamming distance when both laws read the same coins.
    pub fn coupled_distance(&self, other: &Self) -> Result<(Rational, Rational)> {
        if !self.same_domain(other) || self.radices() != other.radices() {
            return Err(Error::DomainMismatch("shared coins need equal radices".into()));
        }
        let side = |a: &[Vec<Label>], b: &[Vec<Label>]| -> Rational {
            a.iter()
                .zip(b)
                .map(|(x, y)| {
                    let diff = x.iter().zip(y).filter(|(p, q)| p != q).count();
                    Rational::new(diff as i128, x.len() as i128)
                })
                .sum()
        };
        Ok((side(&self.left, &other.left), side(&self.right, &other.right)))
    }

    /// Joint distribution by enumerating every coin vector.
    pub fn enumerate(&self, budget: usize) -> Result<EmpiricalDistribution<Assignment>> {
        let radices = self.radices();
        let size = radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r));
        let size = match size {
            Some(s) if s <= budget => s,
            _ => return Err(Error::BudgetExceeded("coin space enumeration".into())),
        };
        let w = Rational::new(1, size as i128);
        let mut coins = vec![0usize; radices.len()];
        let mut out = Vec::with_capacity(size);
        loop {
            out.push((self.with_coins(&coins), w));
            if !advance(&mut coins, &radices) {
                break;
            }
        }
        EmpiricalDistribution::new(out)
    }

    /// Exact expected value of the drawn assignment on `inst`, using that
    /// the two endpoint coordinates of an edge are independent.
    pub fn expected_value(&self, inst: &LabelCoverInstance) -> Result<Rational> {
        if inst.n_edges() == 0 {
            return Err(Error::NoEdges);
        }
        if self.left.len() != inst.n_left() || self.right.len() != inst.n_right() {
            return Err(Error::DomainMismatch("law vs instance".into()));
        }
        let mut total = Rational::zero();
        for (e, &(u, v)) in inst.edges().iter().enumerate() {
            let lu = &self.left[u];
            let rv = &self.right[v];
            let mut hits = 0i128;
            for &a in lu {
                if inst.predicate(u)[a as usize] {
                    let b = inst.projection(e)[a as usize];
                    hits += rv.iter().filter(|&&x| x == b).count() as i128;
                }
            }
            total += Rational::new(hits, (lu.len() * rv.len()) as i128);
        }
        Ok(total / Rational::from_integer(inst.n_edges() as i128))
    }
}

fn advance(coins: &mut [usize], radices: &[usize]) -> bool {
    for i in (0..coins.len()).rev() {
        if coins[i] + 1 < radices[i] {
            coins[i] += 1;
            return true;
        }
        coins[i] = 0;
    }
    false
}

/// Total variation between uniform laws over two outcome multisets.
pub fn total_variation(a: &[Label], b: &[Label]) -> Rational {
    let mut pa: BTreeMap<Label, Rational> = BTreeMap::new();
    for &x in a {
        *pa.entry(x).or_insert_with(Rational::zero) += Rational::new(1, a.len() as i128);
    }
    for &x in b {
        *pa.entry(x).or_insert_with(Rational::zero) -= Rational::new(1, b.len() as i128);
    }
    pa.values().filter(|w| **w > Rational::zero()).cloned().sum()
}

/// A randomized algorithm with a finite, uniformly weighted seed space
/// `0..seed_space()`; deterministic given `(instance, seed)`.
pub trait RandomizedAlgorithm<I> {
    type Output: Metric + Ord + Clone;
    fn seed_space(&self) -> u64;
    fn run(&self, instance: &I, seed: u64) -> Self::Output;
}

pub fn output_distribution<I, A: RandomizedAlgorithm<I>>(
    alg: &A,
    inst: &I,
    budget: usize,
) -> Result<EmpiricalDistribution<A::Output>> {
    let r = alg.seed_space();
    if r == 0 || r as u128 > budget as u128 {
        return Err(Error::BudgetExceeded(format!("seed space {r}")));
    }
    let w = Rational::new(1, r as i128);
    EmpiricalDistribution::new((0..r).map(|s| (alg.run(inst, s), w)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoupledEstimate {
    #[serde(with = "rational::serde_str")]
    pub estimate: Rational,
    pub coupling: String,
    pub samples: u64,
}

/// Mean Hamming distance between runs on `i` and `j` with shared seeds.
/// When `n_samples` covers the seed space every seed is used once and the
/// result is the exact expectation under the shared-seed coupling.
pub fn emd_coupled_upper<I, A: RandomizedAlgorithm<I>>(
    alg: &A,
    i: &I,
    j: &I,
    n_samples: u64,
    seed: u64,
) -> Result<CoupledEstimate> {
    let r = alg.seed_space();
    if n_samples == 0 || r == 0 {
        return Err(Error::Precondition("need at least one sample and seed".into()));
    }
    let (seeds, coupling): (Vec<u64>, &str) = if n_samples >= r {
        ((0..r).collect(), "shared-seed-exhaustive")
    } else {
        use rand::Rng;
        let mut s = rng::stream(seed, rng::task::COUPLED_SEEDS);
        ((0..n_samples).map(|_| s.gen_range(0..r)).collect(), "shared-seed-sampled")
    };
    let mut sum = 0i128;
    for &s in &seeds {
        sum += hamming(&alg.run(i, s), &alg.run(j, s))? as i128;
    }
    Ok(CoupledEstimate {
        estimate: Rational::new(sum, seeds.len() as i128),
        coupling: coupling.into(),
        samples: seeds.len() as u64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SensitivityMode {
    Exact { budget: usize },
    Sampled { n_samples: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapMeasurement {
    pub swap: Swap,
    #[serde(with = "rational::serde_str")]
    pub emd: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub op: String,
    pub instance: String,
    pub mode: SensitivityMode,
    pub per_swap: Vec<SwapMeasurement>,
    #[serde(with = "rational::serde_str")]
    pub max: Rational,
    pub argmax: Option<Swap>,
}

/// Maximum EMD between output distributions over the supplied swaps.
pub fn swap_sensitivity<I, A>(alg: &A, inst: &I, swaps: &[Swap], mode: SensitivityMode) -> Result<SensitivityReport>
where
    I: Swappable + Serialize,
    A: RandomizedAlgorithm<I>,
{
    let base = match mode {
        SensitivityMode::Exact { budget } => Some(output_distribution(alg, inst, budget)?),
        SensitivityMode::Sampled { .. } => None,
    };
    let mut per_swap = Vec::with_capacity(swaps.len());
    let mut max = Rational::zero();
    let mut argmax = None;
    for s in swaps {
        let other = inst.apply_swap(s)?;
        let emd = match mode {
            SensitivityMode::Exact { budget } => {
                emd_exact(base.as_ref().expect("exact base"), &output_distribution(alg, &other, budget)?, budget)?
            }
            SensitivityMode::Sampled { n_samples, seed } => {
                emd_coupled_upper(alg, inst, &other, n_samples, seed)?.estimate
            }
        };
        if argmax.is_none() || emd > max {
            max = emd;
            argmax = Some(s.clone());
        }
        per_swap.push(SwapMeasurement { swap: s.clone(), emd });
    }
    Ok(SensitivityReport {
        op: "swap_sensitivity".into(),
        instance: content_hash(inst),
        mode,
        per_swap,
        max,
        argmax,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighboringWitness {
    pub step: usize,
    pub emd_at_step: Rational,
    pub step_emds: Vec<Rational>,
    pub total_emd: Rational,
    pub swap_distance: usize,
}

impl NeighboringWitness {
    /// `emd_at_step ≥ total / swap_distance`, checked exactly.
    pub fn averaging_bound_holds(&self) -> bool {
        self.emd_at_step * Rational::from_integer(self.swap_distance as i128) >= self.total_emd
    }
}

/// Walks the canonical swap path from `i` to `j` and returns the first step
/// whose exact EMD is maximal.
pub fn neighboring_witness<I, A>(alg: &A, i: &I, j: &I, budget: usize) -> Result<NeighboringWitness>
where
    I: Swappable,
    A: RandomizedAlgorithm<I>,
{
    let path = i.swap_path(j)?;
    if path.is_empty() {
        return Err(Error::ZeroDistance);
    }
    let mut dists = vec![output_distribution(alg, i, budget)?];
    let mut cur = i.clone();
    for s in &path {
        cur = cur.apply_swap(s)?;
        dists.push(output_distribution(alg, &cur, budget)?);
    }
    let step_emds: Vec<Rational> =
        dists.windows(2).map(|w| emd_exact(&w[0], &w[1], budget)).collect::<Result<_>>()?;
    let total_emd = emd_exact(&dists[0], &dists[path.len()], budget)?;
    let mut step = 0;
    for (k, e) in step_emds.iter().enumerate() {
        if *e > step_emds[step] {
            step = k;
        }
    }
    Ok(NeighboringWitness {
        step,
        emd_at_step: step_emds[step],
        step_emds,
        total_emd,
        swap_distance: path.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn a(l: &[Label], r: &[Label]) -> Assignment {
        Assignment::new(l.to_vec(), r.to_vec())
    }

    #[test]
    fn hamming_and_distance_vector() {
        let x = a(&[0, 1, 2], &[0, 1]);
        let y = a(&[1, 1, 0], &[0, 0]);
        assert_eq!(hamming(&x, &x).unwrap(), 0);
        assert_eq!(hamming(&x, &y).unwrap(), 3);
        assert_eq!(distance_vector(&x, &y).unwrap(), DistanceVector { left: 2, right: 1 });
        assert!(hamming(&x, &a(&[0], &[0])).is_err());
    }

    #[test]
    fn emd_point_masses() {
        let x = a(&[0, 1, 2], &[0, 1]);
        let y = a(&[1, 1, 0], &[0, 0]);
        let p = EmpiricalDistribution::point(x.clone());
        assert_eq!(emd_exact(&p, &p, 16).unwrap(), q(0, 1));
        assert_eq!(emd_exact(&p, &EmpiricalDistribution::point(y), 16).unwrap(), q(3, 1));
    }

    #[test]
    fn emd_two_by_two_matching() {
        // a-c:1, a-d:4, b-c:4, b-d:1 on 4-coordinate label vectors.
        let pa: Vec<Label> = vec![0, 0, 0, 0];
        let pc: Vec<Label> = vec![1, 0, 0, 0];
        let pb: Vec<Label> = vec![1, 1, 1, 1];
        let pd: Vec<Label> = vec![1, 1, 1, 2];
        assert_eq!(pa.distance(&pc), 1);
        assert_eq!(pa.distance(&pd), 4);
        assert_eq!(pb.distance(&pc), 3);
        let p = EmpiricalDistribution::uniform(vec![pa, pb]);
        let qd = EmpiricalDistribution::uniform(vec![pc, pd]);
        // Matchings cost (1+1)/2 and (4+3)/2; the optimum is 1.
        assert_eq!(emd_exact(&p, &qd, 16).unwrap(), q(1, 1));
    }

    #[test]
    fn emd_budget_and_domain() {
        let p = EmpiricalDistribution::uniform(vec![vec![0u32], vec![1]]);
        assert!(matches!(emd_exact(&p, &p, 3), Err(Error::BudgetExceeded(_))));
        let r = EmpiricalDistribution::point(vec![0u32, 0]);
        assert!(matches!(emd_exact(&p, &r, 16), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn distribution_rejects_bad_weights() {
        assert!(EmpiricalDistribution::new(vec![(1u32, q(1, 2))]).is_err());
        assert!(EmpiricalDistribution::new(vec![(1u32, q(3, 2)), (2, q(-1, 2))]).is_err());
        let d = EmpiricalDistribution::new(vec![(1u32, q(1, 2)), (1, q(1, 2))]).unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn coin_law_product_emd_matches_joint() {
        let p = CoinLaw { left: vec![vec![0, 1], vec![2]], right: vec![vec![0, 0, 1]] };
        let r = CoinLaw { left: vec![vec![1, 1], vec![0]], right: vec![vec![1, 0, 1]] };
        let joint = emd_exact(&p.enumerate(64).unwrap(), &r.enumerate(64).unwrap(), 1 << 12).unwrap();
        assert_eq!(p.emd(&r).unwrap(), joint);
        // 1/2 + 1 + 1/3
        assert_eq!(joint, q(11, 6));
        let (cl, cr) = p.coupled_distance(&r).unwrap();
        assert!(cl + cr >= joint);
    }

    struct Coin;
    impl RandomizedAlgorithm<LabelCoverInstance> for Coin {
        type Output = Vec<Label>;
        fn seed_space(&self) -> u64 {
            2
        }
        fn run(&self, inst: &LabelCoverInstance, seed: u64) -> Vec<Label> {
            vec![inst.projection(0)[seed as usize]]
        }
    }

    #[test]
    fn sampled_equals_exact_when_seeds_exhausted() {
        let i = LabelCoverInstance::without_predicates(1, 1, 2, 2, vec![(0, 0)], vec![vec![0, 1]]).unwrap();
        let swaps = vec![
            Swap::Projection { edge: 0, table: vec![1, 0] },
            Swap::Projection { edge: 0, table: vec![0, 0] },
        ];
        let exact = swap_sensitivity(&Coin, &i, &swaps, SensitivityMode::Exact { budget: 64 }).unwrap();
        let sampled =
            swap_sensitivity(&Coin, &i, &swaps, SensitivityMode::Sampled { n_samples: 2, seed: 0 }).unwrap();
        // Swapping to the reversed table keeps the output law uniform (EMD 0)
        // but the shared-seed coupling moves both outcomes.
        assert_eq!(exact.per_swap[0].emd, q(0, 1));
        assert_eq!(sampled.per_swap[0].emd, q(1, 1));
        assert_eq!(exact.per_swap[1].emd, q(1, 2));
        assert_eq!(sampled.per_swap[1].emd, q(1, 2));
        assert_eq!(exact.max, q(1, 2));
        let json = serde_json::to_value(&exact).unwrap();
        assert_eq!(json["op"], "swap_sensitivity");
        assert_eq!(json["max"], "1/2");
    }

    #[test]
    fn witness_requires_distance() {
        let i = LabelCoverInstance::without_predicates(1, 1, 2, 2, vec![(0, 0)], vec![vec![0, 1]]).unwrap();
        assert!(matches!(neighboring_witness(&Coin, &i, &i, 64), Err(Error::ZeroDistance)));
        let j = i.apply_swap(&Swap::Projection { edge: 0, table: vec![1, 1] }).unwrap();
        let w = neighboring_witness(&Coin, &i, &j, 64).unwrap();
        assert_eq!(w.step, 0);
        assert_eq!(w.emd_at_step, w.total_emd);
        assert!(w.averaging_bound_holds());
    }
}
