//! Exact minimum set cover by branch and bound.
//!
//! Branches on the uncovered element with the fewest available sets; a set
//! whose branch has been exhausted is excluded from its later siblings. The
//! lower bound is a greedy packing of uncovered elements whose available
//! sets are pairwise disjoint.

use crate::error::{Error, Result};

pub const DEFAULT_NODE_BUDGET: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinCover {
    pub size: usize,
    /// Sorted set indices of one optimal cover.
    pub witness: Vec<usize>,
    pub nodes: u64,
    /// Packing lower bound at the root.
    pub root_bound: usize,
}

struct Search<'a> {
    sets: &'a [Vec<usize>],
    elem_sets: Vec<Vec<usize>>,
    order: Vec<usize>,
    covered: Vec<u32>,
    excluded: Vec<bool>,
    stamp: Vec<u64>,
    clock: u64,
    chosen: Vec<usize>,
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn available(&self, x: usize) -> impl Iterator<Item = &usize> {
        self.elem_sets[x].iter().filter(|&&s| !self.excluded[s])
    }

    fn packing_bound(&mut self) -> usize {
        self.clock += 1;
        let mut count = 0;
        for k in 0..self.order.len() {
            let x = self.order[k];
            if self.covered[x] > 0 {
                continue;
            }
            if self.available(x).all(|&s| self.stamp[s] != self.clock) {
                count += 1;
                let clock = self.clock;
                for &s in &self.elem_sets[x] {
                    if !self.excluded[s] {
                        self.stamp[s] = clock;
                    }
                }
            }
        }
        count
    }

    fn toggle(&mut self, s: usize, add: bool) {
        for &x in &self.sets[s] {
            if add {
                self.covered[x] += 1;
            } else {
                self.covered[x] -= 1;
            }
        }
        if add {
            self.chosen.push(s);
        } else {
            self.chosen.pop();
        }
    }

    fn run(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded(format!("branch and bound exceeded {} nodes", self.budget)));
        }
        let mut pivot: Option<(usize, usize)> = None;
        for x in 0..self.covered.len() {
            if self.covered[x] == 0 {
                let f = self.available(x).count();
                if pivot.map_or(true, |(_, g)| f < g) {
                    pivot = Some((x, f));
                }
            }
        }
        let Some((x, f)) = pivot else {
            if self.chosen.len() < self.best.len() {
                self.best = self.chosen.clone();
            }
            return Ok(());
        };
        if f == 0 || self.chosen.len() + self.packing_bound() >= self.best.len() {
            return Ok(());
        }
        let mut cands: Vec<(usize, usize)> = self
            .available(x)
            .map(|&s| (s, self.sets[s].iter().filter(|&&y| self.covered[y] == 0).count()))
            .collect();
        cands.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut tried = Vec::with_capacity(cands.len());
        let mut out = Ok(());
        for (s, _) in cands {
            self.toggle(s, true);
            out = self.run();
            self.toggle(s, false);
            if out.is_err() {
                break;
            }
            self.excluded[s] = true;
            tried.push(s);
        }
        for s in tried {
            self.excluded[s] = false;
        }
        out
    }
}

/// Minimum cover of `0..n` by `sets`. `upper` seeds the incumbent when it is
/// a valid cover; otherwise the greedy cover is used.
pub fn min_cover(n: usize, sets: &[Vec<usize>], upper: Option<&[usize]>, node_budget: u64) -> Result<MinCover> {
    let mut elem_sets = vec![Vec::new(); n];
    for (i, s) in sets.iter().enumerate() {
        for &x in s {
            elem_sets[x].push(i);
        }
    }
    if let Some(x) = elem_sets.iter().position(Vec::is_empty) {
        return Err(Error::UncoverableElement(x));
    }
    let mut incumbent = greedy_min_cover(n, sets)?;
    if let Some(u) = upper {
        if u.len() < incumbent.len() && is_cover(n, sets, u) {
            incumbent = u.to_vec();
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| (elem_sets[x].len(), x));
    let mut s = Search {
        sets,
        elem_sets,
        order,
        covered: vec![0; n],
        excluded: vec![false; sets.len()],
        stamp: vec![0; sets.len()],
        clock: 0,
        chosen: Vec::new(),
        best: incumbent,
        nodes: 0,
        budget: node_budget,
    };
    let root_bound = s.packing_bound();
    if root_bound < s.best.len() {
        // The incumbent is not yet certified; search for a smaller cover.
        s.run()?;
    }
    let mut witness = s.best;
    witness.sort_unstable();
    Ok(MinCover { size: witness.len(), witness, nodes: s.nodes, root_bound })
}

pub fn is_cover(n: usize, sets: &[Vec<usize>], chosen: &[usize]) -> bool {
    let mut seen = vec![false; n];
    for &i in chosen {
        match sets.get(i) {
            Some(s) => s.iter().for_each(|&x| seen[x] = true),
            None => return false,
        }
    }
    seen.into_iter().all(|b| b)
}

/// Max-marginal-coverage greedy; ties go to the smallest index.
pub fn greedy_min_cover(n: usize, sets: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut covered = vec![false; n];
    let mut left = n;
    let mut out = Vec::new();
    while left > 0 {
        let (best, gain) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.iter().filter(|&&x| !covered[x]).count()))
            .fold((0, 0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if gain == 0 {
            let x = covered.iter().position(|c| !c).expect("uncovered element");
            return Err(Error::UncoverableElement(x));
        }
        for &x in &sets[best] {
            if !covered[x] {
                covered[x] = true;
                left -= 1;
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Lexicographically first minimum cover, by enumerating subsets in order of
/// size and then lexicographic order. Requires 2^|sets| ≤ budget.
pub fn min_cover_bruteforce(n: usize, sets: &[Vec<usize>], budget: u128) -> Result<Vec<usize>> {
    let m = sets.len();
    if m >= 127 || (1u128 << m) > budget {
        return Err(Error::BudgetExceeded(format!("2^{m} subsets")));
    }
    let mut any = vec![false; n];
    sets.iter().flatten().for_each(|&x| any[x] = true);
    if let Some(x) = any.iter().position(|c| !c) {
        return Err(Error::UncoverableElement(x));
    }
    for k in 0..=m {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            if is_cover(n, sets, &idx) {
                return Ok(idx);
            }
            // Next k-combination in lexicographic order.
            let Some(p) = (0..k).rev().find(|&p| idx[p] < m - k + p) else { break };
            idx[p] += 1;
            for r in p + 1..k {
                idx[r] = idx[r - 1] + 1;
            }
        }
    }
    unreachable!("the full family covers")
}
