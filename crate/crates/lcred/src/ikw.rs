//! IKW parallel repetition of a regular base 2-CSP as a left-predicate label
//! cover, its recovery procedure, and the random-threshold selector.
//!
//! A left vertex is a pair (A-part, B-part) of disjoint base-edge sets with
//! |A-part| = k' and |B-part| = k − k'. Its label lists one symbol per edge
//! endpoint ("slot"): A-part edges first, then B-part edges, each edge
//! contributing (first endpoint, second endpoint). Labels are encoded in base
//! |Σ| with slot 0 least significant. A right vertex is a k'-subset of base
//! vertices, labelled by its symbols in increasing vertex order.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lc::{Assignment, Label, LabelCoverInstance, TwoCspInstance};
use crate::rational::{self, binomial, Rational};
use crate::rng::{self, Stream};

pub const DEFAULT_IKW_BUDGET: u128 = 1 << 20;
pub const DEFAULT_SAMPLES_MULTIPLIER: f64 = 4.0;
pub const DEFAULT_THRESHOLD_GRID: u64 = 1 << 20;
const MAX_LEFT_ALPHABET: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IkwParams {
    pub k: usize,
    pub k_prime: usize,
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    pub samples_per_vertex: usize,
}

impl IkwParams {
    /// samples_per_vertex = ⌈multiplier · ln N / ε⌉ with N the number of base
    /// vertices (at least 2) and the default multiplier 4.
    pub fn new(k: usize, k_prime: usize, epsilon: Rational, n_base: usize) -> Self {
        Self::with_multiplier(k, k_prime, epsilon, n_base, DEFAULT_SAMPLES_MULTIPLIER)
    }

    pub fn with_multiplier(k: usize, k_prime: usize, epsilon: Rational, n_base: usize, multiplier: f64) -> Self {
        let ln_n = (n_base.max(2) as f64).ln();
        let s = (multiplier * ln_n / rational::to_f64(&epsilon)).ceil().max(1.0) as usize;
        Self { k, k_prime, epsilon, samples_per_vertex: s }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum IkwMode {
    Exhaustive { budget: u128 },
    Sampled { draws: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LeftTuple {
    pub a_edges: Vec<usize>,
    pub b_edges: Vec<usize>,
}

impl LeftTuple {
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.a_edges.iter().chain(&self.b_edges).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IkwInstance {
    base: TwoCspInstance,
    params: IkwParams,
    mode: IkwMode,
    left: Vec<LeftTuple>,
    right: Vec<Vec<usize>>,
    lc: LabelCoverInstance,
    /// Left vertices whose edge set contains each base edge.
    containing: Vec<Vec<usize>>,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Ordered tuples (e_x)_{x∈A} of pairwise distinct edges with e_x ∋ x.
fn edge_choices(inc: &[Vec<usize>], a: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &x in a {
        let mut next = Vec::new();
        for t in &out {
            for &e in &inc[x] {
                if !t.contains(&e) {
                    let mut t2 = t.clone();
                    t2.push(e);
                    next.push(t2);
                }
            }
        }
        out = next;
    }
    out
}

impl IkwInstance {
    pub fn build(base: &TwoCspInstance, params: IkwParams, mode: IkwMode) -> Result<Self> {
        let n = base.n_vertices();
        let m = base.n_constraints();
        let (k, kp) = (params.k, params.k_prime);
        if kp < 1 || kp > k || k > m {
            return Err(Error::Precondition(format!("need 1 ≤ k' ≤ k ≤ |E| (k={k}, k'={kp}, |E|={m})")));
        }
        if params.samples_per_vertex == 0 {
            return Err(Error::Precondition("samples_per_vertex must be positive".into()));
        }
        if base.regular_degree().is_none() {
            return Err(Error::Precondition("non-regular base".into()));
        }
        let sigma = base.sigma();
        let sigma_left = sigma.checked_pow(2 * k as u32).filter(|&s| s <= MAX_LEFT_ALPHABET);
        let sigma_left = sigma_left.ok_or_else(|| Error::BudgetExceeded("left alphabet Σ^{2k} too large".into()))?;
        let sigma_right = sigma.pow(kp as u32);
        let right = subsets(n, kp);
        let inc = base.incidence();

        // (left tuple, right index) -> multiplicity
        let mut weights: BTreeMap<(LeftTuple, usize), i128> = BTreeMap::new();
        match mode {
            IkwMode::Exhaustive { budget } => {
                let work = binomial(m as u64, k as u64).saturating_mul(binomial(n as u64, kp as u64));
                if work > budget {
                    return Err(Error::BudgetExceeded(format!("C(|E|,k)·C(|V|,k') = {work}")));
                }
                // Per A: probability 1/(C(n,k')·valid(A)·C(|E|−k',k−k')) for each outcome.
                let b_count = binomial((m - kp) as u64, (k - kp) as u64) as i128;
                let per_a: Vec<Vec<Vec<usize>>> = right.iter().map(|a| edge_choices(&inc, a)).collect();
                let denom = per_a
                    .iter()
                    .filter(|c| !c.is_empty())
                    .fold(1i128, |acc, c| acc.lcm(&(c.len() as i128 * b_count)));
                for (ai, choices) in per_a.iter().enumerate() {
                    if choices.is_empty() {
                        continue;
                    }
                    let w = denom / (choices.len() as i128 * b_count);
                    for t in choices {
                        let mut a_edges = t.clone();
                        a_edges.sort_unstable();
                        let rest: Vec<usize> = (0..m).filter(|e| !a_edges.contains(e)).collect();
                        for b in subsets(rest.len(), k - kp) {
                            let b_edges: Vec<usize> = b.iter().map(|&i| rest[i]).collect();
                            *weights.entry((LeftTuple { a_edges: a_edges.clone(), b_edges }, ai)).or_insert(0) += w;
                        }
                    }
                }
                let g = weights.values().fold(0i128, |acc, &w| acc.gcd(&w));
                if g > 1 {
                    weights.values_mut().for_each(|w| *w /= g);
                }
            }
            IkwMode::Sampled { draws, seed } => {
                let mut s = rng::stream(seed, rng::task::IKW_SAMPLE);
                let mut done = 0;
                let mut guard = 0usize;
                let mut sampled: Vec<(LeftTuple, usize)> = Vec::with_capacity(draws);
                while done < draws {
                    guard += 1;
                    if guard > draws.saturating_mul(1000).max(1000) {
                        return Err(Error::Precondition("edge process keeps failing distinctness".into()));
                    }
                    let ai = rng::below(&mut s, right.len());
                    let a = &right[ai];
                    let mut t: Vec<usize> = a.iter().map(|&x| inc[x][rng::below(&mut s, inc[x].len())]).collect();
                    let distinct: BTreeSet<usize> = t.iter().copied().collect();
                    if distinct.len() != t.len() {
                        continue;
                    }
                    t.sort_unstable();
                    let mut rest: Vec<usize> = (0..m).filter(|e| !t.contains(e)).collect();
                    let mut b_edges = Vec::with_capacity(k - kp);
                    for _ in 0..k - kp {
                        b_edges.push(rest.swap_remove(rng::below(&mut s, rest.len())));
                    }
                    b_edges.sort_unstable();
                    sampled.push((LeftTuple { a_edges: t, b_edges }, ai));
                    done += 1;
                }
                // Keep draw order for edges; parallel draws stay parallel.
                let mut order: Vec<LeftTuple> = sampled.iter().map(|(l, _)| l.clone()).collect();
                order.sort();
                order.dedup();
                let left_index: BTreeMap<LeftTuple, usize> =
                    order.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
                let edges: Vec<(usize, usize)> = sampled.iter().map(|(l, a)| (left_index[l], *a)).collect();
                return Self::assemble(base, params, mode, order, right, edges, sigma_left, sigma_right);
            }
        }
        let mut order: Vec<LeftTuple> = weights.keys().map(|(l, _)| l.clone()).collect();
        order.dedup();
        let left_index: BTreeMap<LeftTuple, usize> = order.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        let mut edges = Vec::new();
        for ((l, a), w) in &weights {
            for _ in 0..*w {
                edges.push((left_index[l], *a));
            }
        }
        Self::assemble(base, params, mode, order, right, edges, sigma_left, sigma_right)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        base: &TwoCspInstance,
        params: IkwParams,
        mode: IkwMode,
        left: Vec<LeftTuple>,
        right: Vec<Vec<usize>>,
        edges: Vec<(usize, usize)>,
        sigma_left: usize,
        sigma_right: usize,
    ) -> Result<Self> {
        let sigma = base.sigma();
        let slots = 2 * params.k;
        let decode = |label: usize| -> Vec<Label> {
            (0..slots).map(|s| ((label / sigma.pow(s as u32)) % sigma) as Label).collect()
        };
        let slot_vertices: Vec<Vec<usize>> = left
            .iter()
            .map(|l| {
                l.edges()
                    .flat_map(|e| {
                        let c = &base.constraints()[e];
                        [c.a, c.b]
                    })
                    .collect()
            })
            .collect();
        let predicates: Vec<Vec<bool>> = left
            .iter()
            .map(|l| {
                (0..sigma_left)
                    .map(|x| {
                        let vals = decode(x);
                        l.b_edges.iter().enumerate().all(|(j, &e)| {
                            let s = 2 * (params.k_prime + j);
                            base.accepts(e, vals[s], vals[s + 1])
                        })
                    })
                    .collect()
            })
            .collect();
        let mut projections = Vec::with_capacity(edges.len());
        for &(li, ai) in &edges {
            let slots_for_a = restriction_slots(&slot_vertices[li], &right[ai], 2 * params.k_prime)
                .ok_or(Error::NotContained)?;
            projections.push(
                (0..sigma_left)
                    .map(|x| {
                        let vals = decode(x);
                        encode(slots_for_a.iter().map(|&s| vals[s]), sigma)
                    })
                    .collect(),
            );
        }
        let lc = LabelCoverInstance::new(left.len(), right.len(), sigma_left, sigma_right, edges, projections, predicates)?;
        let mut containing = vec![Vec::new(); base.n_constraints()];
        for (i, l) in left.iter().enumerate() {
            for e in l.edges() {
                containing[e].push(i);
            }
        }
        Ok(Self { base: base.clone(), params, mode, left, right, lc, containing })
    }

    pub fn lc(&self) -> &LabelCoverInstance {
        &self.lc
    }
    pub fn base(&self) -> &TwoCspInstance {
        &self.base
    }
    pub fn params(&self) -> &IkwParams {
        &self.params
    }
    pub fn mode(&self) -> IkwMode {
        self.mode
    }
    pub fn left_tuples(&self) -> &[LeftTuple] {
        &self.left
    }
    pub fn right_sets(&self) -> &[Vec<usize>] {
        &self.right
    }

    fn slot_vertices(&self, li: usize) -> Vec<usize> {
        self.left[li]
            .edges()
            .flat_map(|e| {
                let c = &self.base.constraints()[e];
                [c.a, c.b]
            })
            .collect()
    }

    fn slot_values(&self, label: Label) -> Vec<Label> {
        let sigma = self.base.sigma();
        (0..2 * self.params.k).map(|s| ((label as usize / sigma.pow(s as u32)) % sigma) as Label).collect()
    }

    /// Honest lift of a base labeling.
    pub fn lift(&self, labels: &[Label]) -> Assignment {
        let sigma = self.base.sigma();
        let left = (0..self.left.len())
            .map(|li| encode(self.slot_vertices(li).iter().map(|&x| labels[x]), sigma))
            .collect();
        let right = self.right.iter().map(|a| encode(a.iter().map(|&x| labels[x]), sigma)).collect();
        Assignment::new(left, right)
    }

    /// Whether π_U(S) restricted to A equals `a`; errors when S's A-part does
    /// not contain A.
    pub fn cons_member(&self, left_labels: &[Label], a_index: usize, a: Label, s_index: usize) -> Result<bool> {
        let slots = restriction_slots(&self.slot_vertices(s_index), &self.right[a_index], 2 * self.params.k_prime)
            .ok_or(Error::NotContained)?;
        let vals = self.slot_values(left_labels[s_index]);
        Ok(encode(slots.iter().map(|&s| vals[s]), self.base.sigma()) == a)
    }

    /// The recovery procedure: draw A and read a = π_V(A); for each base
    /// vertex x draw an edge e ∋ x and `samples_per_vertex` left vertices
    /// containing e, keep those in Cons_{A,a}, and output the symbol at x of
    /// a uniformly chosen survivor (0 if none survive).
    pub fn recover(&self, pi: &Assignment, seed: u64) -> Result<Vec<Label>> {
        self.lc.check_assignment(pi)?;
        let mut s = rng::stream(seed, rng::task::RECOVER_IKW);
        Ok(self.recover_with(pi, &mut s))
    }

    fn recover_with(&self, pi: &Assignment, s: &mut Stream) -> Vec<Label> {
        let ai = rng::below(s, self.right.len());
        let a = pi.right[ai];
        let inc = self.base.incidence();
        let mut out = vec![0 as Label; self.base.n_vertices()];
        for (x, slot) in out.iter_mut().enumerate() {
            if inc[x].is_empty() {
                continue;
            }
            let e = inc[x][rng::below(s, inc[x].len())];
            let pool = &self.containing[e];
            if pool.is_empty() {
                continue;
            }
            let draws: Vec<usize> = (0..self.params.samples_per_vertex).map(|_| pool[rng::below(s, pool.len())]).collect();
            let good: Vec<usize> = draws
                .into_iter()
                .filter(|&si| self.cons_member(&pi.left, ai, a, si).unwrap_or(false))
                .collect();
            if good.is_empty() {
                continue;
            }
            let si = good[rng::below(s, good.len())];
            let pos = self.left[si].edges().position(|f| f == e).expect("pool member contains e");
            let c = &self.base.constraints()[e];
            let which = if c.a == x { 0 } else { 1 };
            *slot = self.slot_values(pi.left[si])[2 * pos + which];
        }
        out
    }

    /// The drawn A and the drawn S_E per vertex of one recovery run, for
    /// checking marginal uniformity.
    pub fn recovery_draws(&self, seed: u64) -> (usize, Vec<Vec<usize>>) {
        let mut s = rng::stream(seed, rng::task::RECOVER_IKW);
        let ai = rng::below(&mut s, self.right.len());
        let inc = self.base.incidence();
        let mut per_vertex = Vec::new();
        for x in 0..self.base.n_vertices() {
            if inc[x].is_empty() {
                per_vertex.push(Vec::new());
                continue;
            }
            let e = inc[x][rng::below(&mut s, inc[x].len())];
            let pool = &self.containing[e];
            per_vertex.push((0..self.params.samples_per_vertex).map(|_| pool[rng::below(&mut s, pool.len())]).collect());
        }
        (ai, per_vertex)
    }

    /// Left vertices containing base edge e.
    pub fn containing(&self, e: usize) -> &[usize] {
        &self.containing[e]
    }
}

/// Slot positions holding the vertices of A: for each x ∈ A (in order) the
/// first A-part slot whose vertex is x.
fn restriction_slots(slot_vertices: &[usize], a: &[usize], a_slots: usize) -> Option<Vec<usize>> {
    a.iter().map(|&x| slot_vertices[..a_slots].iter().position(|&y| y == x)).collect()
}

fn encode(vals: impl Iterator<Item = Label>, sigma: usize) -> Label {
    let mut acc = 0usize;
    let mut pow = 1usize;
    for v in vals {
        acc += v as usize * pow;
        pow *= sigma;
    }
    acc as Label
}

/// Fraction of left vertices whose predicate changed between two exhaustive
/// builds over the same base graph.
pub fn predicate_change_fraction(a: &IkwInstance, b: &IkwInstance) -> Result<Rational> {
    if a.left != b.left {
        return Err(Error::Incomparable);
    }
    let changed = a.lc.predicates().iter().zip(b.lc.predicates()).filter(|(x, y)| x != y).count();
    Ok(Rational::new(changed as i128, a.left.len() as i128))
}

/// 1 − C(|E|−1, k−k') / C(|E|, k−k').
pub fn blowup_fraction(n_edges: usize, k: usize, k_prime: usize) -> Rational {
    let r = (k - k_prime) as u64;
    let m = n_edges as u64;
    rational::one() - Rational::new(binomial(m - 1, r) as i128, binomial(m, r) as i128)
}

/// θ_g = lo + (hi − lo)(g + 1)/G for g ∈ [0, G).
pub fn threshold_grid_point(lo: Rational, hi: Rational, grid: u64, g: u64) -> Rational {
    lo + (hi - lo) * Rational::new(g as i128 + 1, grid as i128)
}

/// Draws θ uniformly from the grid on (lo, hi] and returns the first
/// candidate whose value reaches θ, or the default. Also returns the grid
/// index used.
pub fn threshold_select<T: Clone>(
    candidates: &[T],
    values: &[Rational],
    lo: Rational,
    hi: Rational,
    default: &T,
    seed: u64,
    grid: u64,
) -> Result<(T, u64)> {
    if lo >= hi || candidates.is_empty() || candidates.len() != values.len() || grid == 0 {
        return Err(Error::Precondition("threshold_select needs lo < hi and aligned candidates".into()));
    }
    let g = rng::stream(seed, rng::task::THRESHOLD).gen_range(0..grid);
    let theta = threshold_grid_point(lo, hi, grid, g);
    let pick = candidates.iter().zip(values).find(|(_, v)| **v >= theta).map(|(c, _)| c.clone());
    Ok((pick.unwrap_or_else(|| default.clone()), g))
}
