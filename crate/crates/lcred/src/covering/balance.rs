//! Degree balancing: every vertex v is copied deg(v) times and every edge
//! becomes a complete bipartite block between the copy fibers, each pair
//! repeated K/(d(u)d(v)) times, so that every copy has degree exactly K.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lc::{Assignment, Label, LabelCoverInstance};
use crate::metrics::CoinLaw;
use crate::rng::{self, Stream};

pub const DEFAULT_BALANCE_EDGE_BUDGET: u128 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceMode {
    /// K = lcm(1..Δ)².
    Lcm,
    /// K = lcm over edges of d(u)·d(v), the least K that works.
    Minimal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceHandle {
    pub mode: BalanceMode,
    pub k: usize,
    pub left_degrees: Vec<usize>,
    pub right_degrees: Vec<usize>,
    pub left_offsets: Vec<usize>,
    pub right_offsets: Vec<usize>,
}

fn offsets(deg: &[usize]) -> Vec<usize> {
    deg.iter()
        .scan(0, |acc, &d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect()
}

pub fn balance_k(inst: &LabelCoverInstance, mode: BalanceMode) -> Result<u128> {
    let dl = inst.left_degrees();
    let dr = inst.right_degrees();
    match mode {
        BalanceMode::Lcm => {
            let delta = dl.iter().chain(&dr).copied().max().unwrap_or(0) as u128;
            let m = (1..=delta).try_fold(1u128, |acc, x| {
                let g = acc.gcd(&x);
                (acc / g).checked_mul(x)
            });
            m.and_then(|m| m.checked_mul(m)).ok_or_else(|| Error::BudgetExceeded("lcm(1..Δ)² overflows".into()))
        }
        BalanceMode::Minimal => Ok(inst
            .edges()
            .iter()
            .map(|&(u, v)| (dl[u] * dr[v]) as u128)
            .fold(1u128, |acc, x| acc.lcm(&x))),
    }
}

pub fn balance(inst: &LabelCoverInstance, mode: BalanceMode, edge_budget: u128) -> Result<(LabelCoverInstance, BalanceHandle)> {
    let dl = inst.left_degrees();
    let dr = inst.right_degrees();
    if let Some(u) = dl.iter().position(|&d| d == 0) {
        return Err(Error::Precondition(format!("isolated left vertex {u}")));
    }
    if let Some(v) = dr.iter().position(|&d| d == 0) {
        return Err(Error::Precondition(format!("isolated right vertex {v}")));
    }
    let k = balance_k(inst, mode)?;
    let total = k.checked_mul(inst.n_edges() as u128).filter(|&t| t <= edge_budget);
    if total.is_none() {
        return Err(Error::BudgetExceeded(format!("balanced instance with K = {k} has too many edges")));
    }
    let k = k as usize;
    let lo = offsets(&dl);
    let ro = offsets(&dr);
    let mut edges = Vec::with_capacity(k * inst.n_edges());
    let mut projections = Vec::with_capacity(edges.capacity());
    for (e, &(u, v)) in inst.edges().iter().enumerate() {
        let reps = k / (dl[u] * dr[v]);
        for i in 0..dl[u] {
            for j in 0..dr[v] {
                for _ in 0..reps {
                    edges.push((lo[u] + i, ro[v] + j));
                    projections.push(inst.projection(e).to_vec());
                }
            }
        }
    }
    let predicates = (0..inst.n_left()).flat_map(|u| std::iter::repeat(inst.predicate(u).to_vec()).take(dl[u])).collect();
    let n = inst.n_edges();
    let out = LabelCoverInstance::new(n, n, inst.sigma_left(), inst.sigma_right(), edges, projections, predicates)?;
    let handle = BalanceHandle { mode, k, left_degrees: dl, right_degrees: dr, left_offsets: lo, right_offsets: ro };
    Ok((out, handle))
}

impl BalanceHandle {
    /// Every copy carries the label of its original vertex.
    pub fn lift(&self, pi: &Assignment) -> Assignment {
        let rep = |labels: &[Label], deg: &[usize]| -> Vec<Label> {
            labels.iter().zip(deg).flat_map(|(&a, &d)| std::iter::repeat(a).take(d)).collect()
        };
        Assignment::new(rep(&pi.left, &self.left_degrees), rep(&pi.right, &self.right_degrees))
    }

    /// Projection law: each original vertex reads a uniform copy, independently.
    pub fn law(&self, pi_hat: &Assignment) -> CoinLaw {
        let fibers = |labels: &[Label], off: &[usize], deg: &[usize]| -> Vec<Vec<Label>> {
            off.iter().zip(deg).map(|(&o, &d)| labels[o..o + d].to_vec()).collect()
        };
        CoinLaw {
            left: fibers(&pi_hat.left, &self.left_offsets, &self.left_degrees),
            right: fibers(&pi_hat.right, &self.right_offsets, &self.right_degrees),
        }
    }

    pub fn recover(&self, pi_hat: &Assignment, seed: u64) -> Assignment {
        let mut s: Stream = rng::stream(seed, rng::task::RECOVER_BALANCE);
        self.law(pi_hat).sample(&mut s)
    }
}
