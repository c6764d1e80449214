use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const SPECTRAL_BUDGET: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCertificate {
    pub lambda: f64,
    pub solver_residual: f64,
}

/// d-regular multigraph given by ordered neighbor slots; `neighbor(i, k)` is
/// the k-th neighbor of vertex i.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularGraph {
    n: usize,
    d: usize,
    neighbors: Vec<Vec<usize>>,
    certificate: SpectralCertificate,
}

impl RegularGraph {
    pub fn from_neighbors(neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let certificate = second_eigenvalue(&neighbors)?;
        let n = neighbors.len();
        let d = neighbors.first().map_or(0, Vec::len);
        Ok(Self { n, d, neighbors, certificate })
    }

    /// K_n: every vertex adjacent to all others, neighbors in index order.
    pub fn complete(n: usize) -> Result<Self> {
        Self::from_neighbors((0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect())
    }

    /// Complete graph with a loop at every vertex (degree n, λ = 0).
    pub fn complete_with_loops(n: usize) -> Result<Self> {
        Self::from_neighbors((0..n).map(|_| (0..n).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn neighbor(&self, i: usize, k: usize) -> usize {
        self.neighbors[i][k]
    }
    pub fn neighbors(&self) -> &[Vec<usize>] {
        &self.neighbors
    }
    pub fn lambda(&self) -> f64 {
        self.certificate.lambda
    }
    pub fn certificate(&self) -> SpectralCertificate {
        self.certificate
    }
}

/// Second-largest absolute eigenvalue of the normalized adjacency matrix:
/// the spectrum minus one copy of the top eigenvalue 1, by dense symmetric
/// eigendecomposition. Also checks regularity and multiset symmetry.
pub fn second_eigenvalue(neighbors: &[Vec<usize>]) -> Result<SpectralCertificate> {
    let n = neighbors.len();
    if n < 2 {
        return Err(Error::Precondition("graph needs at least two vertices".into()));
    }
    if n > SPECTRAL_BUDGET {
        return Err(Error::BudgetExceeded(format!("dense eigensolve on {n} vertices")));
    }
    let d = neighbors[0].len();
    if d == 0 || neighbors.iter().any(|l| l.len() != d) {
        return Err(Error::Precondition("non-regular input".into()));
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, list) in neighbors.iter().enumerate() {
        for &j in list {
            if j >= n {
                return Err(Error::Invalid(format!("neighbor {j} out of range")));
            }
            a[(i, j)] += 1.0;
        }
    }
    if a != a.transpose() {
        return Err(Error::Precondition("adjacency is not symmetric".into()));
    }
    a /= d as f64;
    let eig = SymmetricEigen::new(a.clone());
    let mut residual: f64 = 0.0;
    for k in 0..n {
        let v = eig.eigenvectors.column(k);
        let r = &a * v - v * eig.eigenvalues[k];
        residual = residual.max(r.amax());
    }
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| y.partial_cmp(x).expect("finite eigenvalues"));
    let lambda = vals[1..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(SpectralCertificate { lambda, solver_residual: residual })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderBuild {
    pub graph: RegularGraph,
    pub target_met: bool,
    pub attempts: usize,
}

/// Sample-and-certify construction in the permutation-union model: d/2
/// random permutations contribute edges {i, σ(i)}, plus one random perfect
/// matching when d is odd. n = d + 1 returns K_{d+1}.
pub fn build_expander(n: usize, d: usize, lambda_target: f64, seed: u64, retries: usize) -> Result<ExpanderBuild> {
    if (n * d) % 2 != 0 {
        return Err(Error::Precondition(format!("n*d must be even (n={n}, d={d})")));
    }
    if d == 0 || d >= n {
        return Err(Error::Precondition(format!("need 0 < d < n (n={n}, d={d})")));
    }
    if n == d + 1 {
        let graph = RegularGraph::complete(n)?;
        let target_met = graph.lambda() <= lambda_target;
        return Ok(ExpanderBuild { graph, target_met, attempts: 0 });
    }
    let mut best: Option<RegularGraph> = None;
    let attempts = retries.max(1);
    for attempt in 0..attempts {
        let mut s = rng::stream(seed, rng::task::EXPANDER.wrapping_add((attempt as u64) << 8));
        let mut neighbors = vec![Vec::with_capacity(d); n];
        for _ in 0..d / 2 {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut s);
            for i in 0..n {
                neighbors[i].push(perm[i]);
                neighbors[perm[i]].push(i);
            }
        }
        if d % 2 == 1 {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut s);
            for pair in order.chunks(2) {
                neighbors[pair[0]].push(pair[1]);
                neighbors[pair[1]].push(pair[0]);
            }
        }
        let g = RegularGraph::from_neighbors(neighbors)?;
        if g.lambda() <= lambda_target {
            return Ok(ExpanderBuild { graph: g, target_met: true, attempts: attempt + 1 });
        }
        if best.as_ref().map_or(true, |b| g.lambda() < b.lambda()) {
            best = Some(g);
        }
    }
    Ok(ExpanderBuild { graph: best.expect("at least one attempt"), target_met: false, attempts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k4_has_lambda_one_third() {
        let g = RegularGraph::complete(4).unwrap();
        assert!((g.lambda() - 1.0 / 3.0).abs() < 1e-12);
        assert!(g.certificate().solver_residual < 1e-10);
    }

    #[test]
    fn disconnected_and_bipartite_have_lambda_one() {
        let mut two_k4: Vec<Vec<usize>> = (0..4).map(|i| (0..4).filter(|&j| j != i).collect()).collect();
        two_k4.extend((0..4).map(|i| (0..4).filter(|&j| j != i).map(|j| j + 4).collect::<Vec<_>>()));
        assert!((second_eigenvalue(&two_k4).unwrap().lambda - 1.0).abs() < 1e-10);
        let c4 = vec![vec![1, 3], vec![0, 2], vec![1, 3], vec![0, 2]];
        assert!((second_eigenvalue(&c4).unwrap().lambda - 1.0).abs() < 1e-10);
    }

    #[test]
    fn looped_complete_graph_has_lambda_zero() {
        let g = RegularGraph::complete_with_loops(4).unwrap();
        assert_eq!(g.d(), 4);
        assert!(g.lambda() < 1e-10);
    }

    #[test]
    fn rejects_irregular_and_bad_parameters() {
        assert!(second_eigenvalue(&[vec![1], vec![0, 0]]).is_err());
        assert!(second_eigenvalue(&[vec![1], vec![1]]).is_err());
        assert!(build_expander(5, 3, 0.5, 0, 1).is_err());
        assert!(build_expander(4, 4, 0.5, 0, 1).is_err());
    }

    #[test]
    fn complete_fallback_and_impossible_target() {
        let b = build_expander(6, 5, 0.25, 1, 1).unwrap();
        assert!(b.target_met);
        assert!((b.graph.lambda() - 0.2).abs() < 1e-10);
        let b = build_expander(10, 4, 0.0, 1, 3).unwrap();
        assert!(!b.target_met);
        assert!(b.graph.lambda() > 0.0);
        assert_eq!(b.attempts, 3);
    }

    #[test]
    fn sixteen_vertex_four_regular() {
        let b = build_expander(16, 4, 0.9, 7, 32).unwrap();
        assert!(b.target_met, "measured {}", b.graph.lambda());
        let g = &b.graph;
        let handshake: usize = g.neighbors().iter().map(Vec::len).sum();
        assert_eq!(handshake, 16 * 4);
        let odd = build_expander(8, 3, 1.0, 2, 4).unwrap();
        assert_eq!(odd.graph.d(), 3);
    }
}
