//! Set cover to dominating set: the incidence graph plus helper vertices,
//! star-forest padding to an exact vertex count, and the recovery back to
//! set indices.
//!
//! Vertex numbering: elements `0..N`, sets `N..N+m`, helpers next, padding
//! last.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::exact::{self, MinCover};
use super::setcover::SetCoverInstance;
use crate::error::{Error, Result};
use crate::metrics::{emd_exact, output_distribution, RandomizedAlgorithm};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Element,
    Set,
    Helper,
    Padding,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DomSetGraph {
    kind: String,
    gamma: usize,
    n_elements: usize,
    n_sets: usize,
    n_helpers: usize,
    roles: Vec<Role>,
    adj: Vec<Vec<usize>>,
    /// Designated set per element: the smallest index of a set containing it.
    sigma: Vec<Option<usize>>,
}

impl DomSetGraph {
    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_sets(&self) -> usize {
        self.n_sets
    }

    pub fn n_helpers(&self) -> usize {
        self.n_helpers
    }

    pub fn core_size(&self) -> usize {
        self.n_elements + self.n_sets + self.n_helpers
    }

    pub fn role(&self, x: usize) -> Role {
        self.roles[x]
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adj[x]
    }

    pub fn sigma(&self) -> &[Option<usize>] {
        &self.sigma
    }

    pub fn set_vertex(&self, i: usize) -> usize {
        self.n_elements + i
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for (a, ns) in self.adj.iter().enumerate() {
            out.extend(ns.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        out
    }

    /// Closed neighborhoods N[x].
    pub fn closed_neighborhoods(&self) -> Vec<Vec<usize>> {
        self.adj
            .iter()
            .enumerate()
            .map(|(x, ns)| {
                let mut c = ns.clone();
                c.push(x);
                c.sort_unstable();
                c
            })
            .collect()
    }

    pub fn is_dominating(&self, d: &BTreeSet<usize>) -> bool {
        let v: Vec<usize> = d.iter().copied().collect();
        exact::is_cover(self.n_vertices(), &self.closed_neighborhoods(), &v)
    }

    /// Edge symmetric difference between graphs on a common vertex set.
    pub fn edge_difference(&self, other: &Self) -> Result<usize> {
        if self.roles != other.roles {
            return Err(Error::Incomparable);
        }
        Ok(self.edges().symmetric_difference(&other.edges()).count())
    }

    fn connect(&mut self, a: usize, b: usize) {
        self.adj[a].push(b);
        self.adj[b].push(a);
    }
}

pub fn ds_transform(j: &SetCoverInstance, gamma: usize) -> Result<DomSetGraph> {
    if gamma == 0 {
        return Err(Error::Precondition("Γ must be positive".into()));
    }
    if j.max_set_size() > gamma || j.max_frequency() > gamma {
        return Err(Error::Precondition(format!(
            "max set size {} / frequency {} exceed Γ = {gamma}",
            j.max_set_size(),
            j.max_frequency()
        )));
    }
    let (n, m) = (j.n_elements(), j.n_sets());
    let h = m.div_ceil(gamma);
    let mut roles = vec![Role::Element; n];
    roles.extend(std::iter::repeat(Role::Set).take(m));
    roles.extend(std::iter::repeat(Role::Helper).take(h));
    let sigma = j.element_sets().into_iter().map(|s| s.first().copied()).collect();
    let mut g = DomSetGraph {
        kind: "dom_set_graph".into(),
        gamma,
        n_elements: n,
        n_sets: m,
        n_helpers: h,
        adj: vec![Vec::new(); roles.len()],
        roles,
        sigma,
    };
    for i in 0..m {
        for &x in j.set(i) {
            g.connect(x, n + i);
        }
        g.connect(n + i, n + m + i / gamma);
    }
    g.adj.iter_mut().for_each(|a| a.sort_unstable());
    Ok(g)
}

/// Appends the canonical star forest on `n_target − |V(G)|` vertices:
/// ⌊t/Δ⌋ stars K_{1,Δ−1} and one K_{1,b−1} for the remainder b.
pub fn ds_pad(g: &DomSetGraph, n_target: usize, delta: usize) -> Result<DomSetGraph> {
    if n_target < g.n_vertices() {
        return Err(Error::Precondition(format!("target {n_target} below |V(G)| = {}", g.n_vertices())));
    }
    if delta == 0 {
        return Err(Error::Precondition("star size must be positive".into()));
    }
    let t = n_target - g.n_vertices();
    let mut h = g.clone();
    let mut sizes = vec![delta; t / delta];
    if t % delta > 0 {
        sizes.push(t % delta);
    }
    for s in sizes {
        let center = h.adj.len();
        h.adj.push(Vec::new());
        h.roles.push(Role::Padding);
        for _ in 1..s {
            let leaf = h.adj.len();
            h.adj.push(Vec::new());
            h.roles.push(Role::Padding);
            h.connect(center, leaf);
        }
    }
    Ok(h)
}

/// Selected set vertices plus the designated set of each selected element;
/// helpers and padding are ignored.
pub fn ds_recover(g: &DomSetGraph, d: &BTreeSet<usize>) -> BTreeSet<usize> {
    d.iter()
        .filter_map(|&x| match g.roles.get(x) {
            Some(Role::Set) => Some(x - g.n_elements),
            Some(Role::Element) => g.sigma[x],
            _ => None,
        })
        .collect()
}

/// Lexicographically first minimum dominating set by enumeration.
pub fn ds_opt_bruteforce(g: &DomSetGraph, budget: u128) -> Result<(usize, BTreeSet<usize>)> {
    let w = exact::min_cover_bruteforce(g.n_vertices(), &g.closed_neighborhoods(), budget)?;
    Ok((w.len(), w.into_iter().collect()))
}

/// Exact minimum dominating set as a cover by closed neighborhoods.
pub fn ds_opt(g: &DomSetGraph, hint: Option<&BTreeSet<usize>>, node_budget: u64) -> Result<MinCover> {
    let h: Option<Vec<usize>> = hint.map(|h| h.iter().copied().collect());
    exact::min_cover(g.n_vertices(), &g.closed_neighborhoods(), h.as_deref(), node_budget)
}

/// A dominating set from a set cover: its set vertices, every helper, and
/// the centers of the padding stars.
pub fn cover_to_domset(g: &DomSetGraph, cover: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut d: BTreeSet<usize> = cover.iter().map(|&i| g.set_vertex(i)).collect();
    let core = g.core_size();
    d.extend(g.n_elements + g.n_sets..core);
    for x in core..g.n_vertices() {
        // Star centers are the padding vertices without a smaller neighbor.
        if g.adj[x].iter().all(|&y| y > x) {
            d.insert(x);
        }
    }
    d
}

pub fn greedy_domset(g: &DomSetGraph) -> BTreeSet<usize> {
    let n = g.n_vertices();
    exact::greedy_min_cover(n, &g.closed_neighborhoods())
        .expect("closed neighborhoods cover every vertex")
        .into_iter()
        .collect()
}

/// Greedy domination as a deterministic algorithm (seed space of size one).
pub struct GreedyDomSet;

impl RandomizedAlgorithm<DomSetGraph> for GreedyDomSet {
    type Output = BTreeSet<usize>;
    fn seed_space(&self) -> u64 {
        1
    }
    fn run(&self, g: &DomSetGraph, _seed: u64) -> BTreeSet<usize> {
        greedy_domset(g)
    }
}

/// Both sides of the pullback inequality for one toggle pair: the EMD of
/// the recovered covers against `sensitivity + 2`, where `sensitivity` is
/// the exact EMD of the algorithm's outputs on the two padded graphs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullbackCheck {
    pub edge_difference: usize,
    #[serde(with = "rational::serde_str")]
    pub pulled_emd: Rational,
    #[serde(with = "rational::serde_str")]
    pub sensitivity: Rational,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
}

impl PullbackCheck {
    pub fn holds(&self) -> bool {
        self.pulled_emd <= self.bound
    }
}

pub fn pullback_check<A>(
    alg: &A,
    j0: &SetCoverInstance,
    j1: &SetCoverInstance,
    gamma: usize,
    n_target: usize,
    budget: usize,
) -> Result<PullbackCheck>
where
    A: RandomizedAlgorithm<DomSetGraph, Output = BTreeSet<usize>>,
{
    let h0 = ds_pad(&ds_transform(j0, gamma)?, n_target, gamma + 1)?;
    let h1 = ds_pad(&ds_transform(j1, gamma)?, n_target, gamma + 1)?;
    let edge_difference = h0.edge_difference(&h1)?;
    let mu0 = output_distribution(alg, &h0, budget)?;
    let mu1 = output_distribution(alg, &h1, budget)?;
    let sensitivity = emd_exact(&mu0, &mu1, budget)?;
    let pulled_emd = emd_exact(&mu0.map(|d| ds_recover(&h0, d)), &mu1.map(|d| ds_recover(&h1, d)), budget)?;
    Ok(PullbackCheck {
        edge_difference,
        pulled_emd,
        sensitivity,
        bound: sensitivity + Rational::from_integer(2),
    })
}
