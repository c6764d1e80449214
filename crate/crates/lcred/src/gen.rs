//! Random and planted instance generators plus a few named base graphs.

use rand::Rng;

use crate::lc::{Assignment, Constraint, Label, LabelCoverInstance, Swap, TwoCspInstance};
use crate::rng::{below, Stream};

pub fn triangle() -> Vec<(usize, usize)> {
    vec![(0, 1), (1, 2), (0, 2)]
}

pub fn cycle(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n))).collect()
}

pub fn complete(n: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            e.push((a, b));
        }
    }
    e
}

pub fn complete_bipartite(p: usize, q: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for a in 0..p {
        for b in 0..q {
            e.push((a, p + b));
        }
    }
    e
}

/// Triangular prism: two triangles joined by a perfect matching (3-regular, 6 vertices).
pub fn prism() -> Vec<(usize, usize)> {
    vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)]
}

/// Regular base graphs on at most six vertices, as (vertex count, edges).
pub fn small_regular_graphs() -> Vec<(usize, Vec<(usize, usize)>)> {
    vec![
        (3, triangle()),
        (4, cycle(4)),
        (5, cycle(5)),
        (6, cycle(6)),
        (4, complete(4)),
        (6, complete_bipartite(3, 3)),
        (6, prism()),
    ]
}

/// A 2-CSP on the given graph whose relations all accept the planted labels.
/// Every other pair is accepted with probability `density`.
pub fn planted_csp(
    n: usize,
    edges: &[(usize, usize)],
    sigma: usize,
    density: f64,
    rng: &mut Stream,
) -> (TwoCspInstance, Vec<Label>) {
    let planted: Vec<Label> = (0..n).map(|_| below(rng, sigma) as Label).collect();
    let constraints = edges
        .iter()
        .map(|&(a, b)| {
            let mut relation: Vec<bool> = (0..sigma * sigma).map(|_| rng.gen_bool(density)).collect();
            relation[planted[a] as usize * sigma + planted[b] as usize] = true;
            Constraint { a, b, relation }
        })
        .collect();
    (TwoCspInstance::new(n, sigma, constraints).expect("valid csp"), planted)
}

pub fn random_label_cover(
    n_left: usize,
    n_right: usize,
    sigma_left: usize,
    sigma_right: usize,
    n_edges: usize,
    predicate_density: f64,
    rng: &mut Stream,
) -> LabelCoverInstance {
    let edges = random_edges(n_left, n_right, n_edges, rng);
    let projections = edges
        .iter()
        .map(|_| (0..sigma_left).map(|_| below(rng, sigma_right) as Label).collect())
        .collect();
    let predicates = (0..n_left)
        .map(|_| (0..sigma_left).map(|_| rng.gen_bool(predicate_density)).collect())
        .collect();
    LabelCoverInstance::new(n_left, n_right, sigma_left, sigma_right, edges, projections, predicates)
        .expect("valid instance")
}

/// Random instance satisfied by a planted assignment.
pub fn planted_label_cover(
    n_left: usize,
    n_right: usize,
    sigma_left: usize,
    sigma_right: usize,
    n_edges: usize,
    predicate_density: f64,
    rng: &mut Stream,
) -> (LabelCoverInstance, Assignment) {
    let pi = random_assignment(n_left, n_right, sigma_left, sigma_right, rng);
    let edges = random_edges(n_left, n_right, n_edges, rng);
    let projections = edges
        .iter()
        .map(|&(u, v)| {
            let mut t: Vec<Label> = (0..sigma_left).map(|_| below(rng, sigma_right) as Label).collect();
            t[pi.left[u] as usize] = pi.right[v];
            t
        })
        .collect();
    let predicates = (0..n_left)
        .map(|u| {
            let mut p: Vec<bool> = (0..sigma_left).map(|_| rng.gen_bool(predicate_density)).collect();
            p[pi.left[u] as usize] = true;
            p
        })
        .collect();
    let inst =
        LabelCoverInstance::new(n_left, n_right, sigma_left, sigma_right, edges, projections, predicates)
            .expect("valid instance");
    (inst, pi)
}

/// Edges covering every vertex at least once (when `n_edges` allows), then random.
fn random_edges(n_left: usize, n_right: usize, n_edges: usize, rng: &mut Stream) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(n_edges);
    for i in 0..n_edges {
        let u = if i < n_left { i } else { below(rng, n_left) };
        let v = if i < n_right { i } else { below(rng, n_right) };
        edges.push((u, v));
    }
    edges
}

pub fn random_assignment(
    n_left: usize,
    n_right: usize,
    sigma_left: usize,
    sigma_right: usize,
    rng: &mut Stream,
) -> Assignment {
    Assignment::new(
        (0..n_left).map(|_| below(rng, sigma_left) as Label).collect(),
        (0..n_right).map(|_| below(rng, sigma_right) as Label).collect(),
    )
}

/// A uniformly chosen projection or predicate swap that changes the table.
pub fn random_swap(inst: &LabelCoverInstance, allow_predicates: bool, rng: &mut Stream) -> Swap {
    loop {
        if allow_predicates && rng.gen_bool(0.5) {
            let vertex = below(rng, inst.n_left());
            let table: Vec<bool> = (0..inst.sigma_left()).map(|_| rng.gen_bool(0.5)).collect();
            if table != inst.predicate(vertex) {
                return Swap::Predicate { vertex, table };
            }
        } else {
            let edge = below(rng, inst.n_edges());
            let table: Vec<Label> =
                (0..inst.sigma_left()).map(|_| below(rng, inst.sigma_right()) as Label).collect();
            if table != inst.projection(edge) {
                return Swap::Projection { edge, table };
            }
        }
    }
}

/// A swap of one base constraint to a different relation.
pub fn random_csp_swap(csp: &TwoCspInstance, rng: &mut Stream) -> Swap {
    let s2 = csp.sigma() * csp.sigma();
    loop {
        let constraint = below(rng, csp.n_constraints());
        let relation: Vec<bool> = (0..s2).map(|_| rng.gen_bool(0.5)).collect();
        if relation != csp.constraints()[constraint].relation {
            return Swap::CspConstraint { constraint, relation };
        }
    }
}
