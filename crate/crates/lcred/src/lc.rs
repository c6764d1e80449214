//! Label cover with left predicates, base 2-CSPs, assignments and swaps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type Label = u32;

pub const DEFAULT_OPT_BUDGET: u128 = 1 << 22;

/// Bipartite projection game with a unary predicate on every left vertex.
///
/// An edge `(u, v)` is satisfied by `π` when `P_u(π_U(u))` holds and
/// `f_e(π_U(u)) = π_V(v)`. Edges form an ordered multilist.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "LabelCoverJson", into = "LabelCoverJson")]
pub struct LabelCoverInstance {
    n_left: usize,
    n_right: usize,
    sigma_left: usize,
    sigma_right: usize,
    edges: Vec<(usize, usize)>,
    projections: Vec<Vec<Label>>,
    predicates: Vec<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    pub left: Vec<Label>,
    pub right: Vec<Label>,
}

impl Assignment {
    pub fn new(left: Vec<Label>, right: Vec<Label>) -> Self {
        Self { left, right }
    }

    pub fn zeros(n_left: usize, n_right: usize) -> Self {
        Self { left: vec![0; n_left], right: vec![0; n_right] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Swap {
    Projection { edge: usize, table: Vec<Label> },
    Predicate { vertex: usize, table: Vec<bool> },
    CspConstraint { constraint: usize, relation: Vec<bool> },
    MembershipToggle { element: usize, set: usize },
}

/// Instances that admit single-table substitutions.
pub trait Swappable: Sized + Clone {
    fn apply_swap(&self, swap: &Swap) -> Result<Self>;
    fn swap_distance(&self, other: &Self) -> Result<usize>;
    /// Swaps turning `self` into `other`, one per differing table, in
    /// canonical index order.
    fn swap_path(&self, other: &Self) -> Result<Vec<Swap>>;
}

impl LabelCoverInstance {
    pub fn new(
        n_left: usize,
        n_right: usize,
        sigma_left: usize,
        sigma_right: usize,
        edges: Vec<(usize, usize)>,
        projections: Vec<Vec<Label>>,
        predicates: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if sigma_left == 0 || sigma_right == 0 {
            return Err(Error::Invalid("empty alphabet".into()));
        }
        if projections.len() != edges.len() {
            return Err(Error::Invalid("one projection table per edge required".into()));
        }
        if predicates.len() != n_left {
            return Err(Error::Invalid("one predicate table per left vertex required".into()));
        }
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n_left || v >= n_right {
                return Err(Error::Invalid(format!("edge {i} = ({u},{v}) out of range")));
            }
        }
        for (i, p) in projections.iter().enumerate() {
            if p.len() != sigma_left || p.iter().any(|&b| b as usize >= sigma_right) {
                return Err(Error::Invalid(format!("projection table {i} malformed")));
            }
        }
        if predicates.iter().any(|p| p.len() != sigma_left) {
            return Err(Error::Invalid("predicate table length != |Σ_U|".into()));
        }
        Ok(Self { n_left, n_right, sigma_left, sigma_right, edges, projections, predicates })
    }

    /// Ordinary label cover: every predicate is identically true.
    pub fn without_predicates(
        n_left: usize,
        n_right: usize,
        sigma_left: usize,
        sigma_right: usize,
        edges: Vec<(usize, usize)>,
        projections: Vec<Vec<Label>>,
    ) -> Result<Self> {
        let predicates = vec![vec![true; sigma_left]; n_left];
        Self::new(n_left, n_right, sigma_left, sigma_right, edges, projections, predicates)
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }
    pub fn n_right(&self) -> usize {
        self.n_right
    }
    pub fn sigma_left(&self) -> usize {
        self.sigma_left
    }
    pub fn sigma_right(&self) -> usize {
        self.sigma_right
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn projection(&self, e: usize) -> &[Label] {
        &self.projections[e]
    }
    pub fn projections(&self) -> &[Vec<Label>] {
        &self.projections
    }
    pub fn predicate(&self, u: usize) -> &[bool] {
        &self.predicates[u]
    }
    pub fn predicates(&self) -> &[Vec<bool>] {
        &self.predicates
    }

    pub fn is_ordinary(&self) -> bool {
        self.predicates.iter().all(|p| p.iter().all(|&b| b))
    }

    pub fn left_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_left];
        for &(u, _) in &self.edges {
            d[u] += 1;
        }
        d
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_right];
        for &(_, v) in &self.edges {
            d[v] += 1;
        }
        d
    }

    /// Edge indices incident to each left vertex, in edge order.
    pub fn left_incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n_left];
        for (e, &(u, _)) in self.edges.iter().enumerate() {
            inc[u].push(e);
        }
        inc
    }

    /// Edge indices incident to each right vertex, in edge order.
    pub fn right_incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n_right];
        for (e, &(_, v)) in self.edges.iter().enumerate() {
            inc[v].push(e);
        }
        inc
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n_left == other.n_left
            && self.n_right == other.n_right
            && self.sigma_left == other.sigma_left
            && self.sigma_right == other.sigma_right
            && self.edges == other.edges
    }

    pub fn check_assignment(&self, pi: &Assignment) -> Result<()> {
        if pi.left.len() != self.n_left || pi.right.len() != self.n_right {
            return Err(Error::DomainMismatch("assignment size".into()));
        }
        if pi.left.iter().any(|&a| a as usize >= self.sigma_left)
            || pi.right.iter().any(|&b| b as usize >= self.sigma_right)
        {
            return Err(Error::DomainMismatch("label out of alphabet".into()));
        }
        Ok(())
    }

    pub fn edge_satisfied(&self, e: usize, pi: &Assignment) -> bool {
        let (u, v) = self.edges[e];
        let a = pi.left[u] as usize;
        self.predicates[u][a] && self.projections[e][a] == pi.right[v]
    }

    pub fn satisfied_count(&self, pi: &Assignment) -> usize {
        (0..self.edges.len()).filter(|&e| self.edge_satisfied(e, pi)).count()
    }

    pub fn value(&self, pi: &Assignment) -> Result<Rational> {
        if self.edges.is_empty() {
            return Err(Error::NoEdges);
        }
        self.check_assignment(pi)?;
        Ok(Rational::new(self.satisfied_count(pi) as i128, self.edges.len() as i128))
    }

    /// Exact optimum with the lexicographically smallest maximizer on the
    /// flattened `(π_U, π_V)` vector.
    ///
    /// The budget counts full assignments `|Σ_U|^|U| · |Σ_V|^|V|`. The search
    /// itself enumerates `π_U` only: for fixed `π_U` the best `π_V` is chosen
    /// per right vertex (smallest label among the most-satisfying ones), which
    /// yields the same optimum and the same lexicographic witness.
    pub fn opt_bruteforce(&self, budget: u128) -> Result<(Rational, Assignment)> {
        if self.edges.is_empty() {
            return Err(Error::NoEdges);
        }
        let total = pow_checked(self.sigma_left, self.n_left)
            .and_then(|a| pow_checked(self.sigma_right, self.n_right).and_then(|b| a.checked_mul(b)));
        match total {
            Some(t) if t <= budget => {}
            _ => {
                return Err(Error::TooLarge(format!(
                    "{}^{} * {}^{} assignments exceed budget {budget}",
                    self.sigma_left, self.n_left, self.sigma_right, self.n_right
                )))
            }
        }
        let right_inc = self.right_incidence();
        let mut left = vec![0 as Label; self.n_left];
        let mut best: Option<(usize, Assignment)> = None;
        let mut counts = vec![0usize; self.sigma_right];
        loop {
            let mut right = vec![0 as Label; self.n_right];
            let mut sat = 0;
            for v in 0..self.n_right {
                counts.iter_mut().for_each(|c| *c = 0);
                for &e in &right_inc[v] {
                    let u = self.edges[e].0;
                    let a = left[u] as usize;
                    if self.predicates[u][a] {
                        counts[self.projections[e][a] as usize] += 1;
                    }
                }
                let (b, c) = counts
                    .iter()
                    .enumerate()
                    .fold((0, 0), |acc, (b, &c)| if c > acc.1 { (b, c) } else { acc });
                right[v] = b as Label;
                sat += c;
            }
            if best.as_ref().map_or(true, |(s, _)| sat > *s) {
                best = Some((sat, Assignment::new(left.clone(), right)));
            }
            if !odometer(&mut left, self.sigma_left) {
                break;
            }
        }
        let (sat, witness) = best.expect("at least one assignment");
        Ok((Rational::new(sat as i128, self.edges.len() as i128), witness))
    }

    fn check_swap(&self, swap: &Swap) -> Result<()> {
        match swap {
            Swap::Projection { edge, table } => {
                if *edge >= self.edges.len()
                    || table.len() != self.sigma_left
                    || table.iter().any(|&b| b as usize >= self.sigma_right)
                {
                    return Err(Error::InvalidSwap(format!("projection swap on edge {edge}")));
                }
            }
            Swap::Predicate { vertex, table } => {
                if *vertex >= self.n_left || table.len() != self.sigma_left {
                    return Err(Error::InvalidSwap(format!("predicate swap on vertex {vertex}")));
                }
            }
            _ => return Err(Error::InvalidSwap("not a label cover swap".into())),
        }
        Ok(())
    }
}

impl Swappable for LabelCoverInstance {
    fn apply_swap(&self, swap: &Swap) -> Result<Self> {
        self.check_swap(swap)?;
        let mut out = self.clone();
        match swap {
            Swap::Projection { edge, table } => out.projections[*edge] = table.clone(),
            Swap::Predicate { vertex, table } => out.predicates[*vertex] = table.clone(),
            _ => unreachable!(),
        }
        Ok(out)
    }

    fn swap_distance(&self, other: &Self) -> Result<usize> {
        if !self.same_shape(other) {
            return Err(Error::Incomparable);
        }
        let p = self.projections.iter().zip(&other.projections).filter(|(a, b)| a != b).count();
        let q = self.predicates.iter().zip(&other.predicates).filter(|(a, b)| a != b).count();
        Ok(p + q)
    }

    fn swap_path(&self, other: &Self) -> Result<Vec<Swap>> {
        if !self.same_shape(other) {
            return Err(Error::Incomparable);
        }
        let mut path = Vec::new();
        for (e, (a, b)) in self.projections.iter().zip(&other.projections).enumerate() {
            if a != b {
                path.push(Swap::Projection { edge: e, table: b.clone() });
            }
        }
        for (u, (a, b)) in self.predicates.iter().zip(&other.predicates).enumerate() {
            if a != b {
                path.push(Swap::Predicate { vertex: u, table: b.clone() });
            }
        }
        Ok(path)
    }
}

/// Advances a little-endian-last odometer (last coordinate fastest). Returns
/// false after the final tuple.
pub fn odometer(digits: &mut [Label], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        if (*d as usize) + 1 < radix {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

pub fn pow_checked(base: usize, exp: usize) -> Option<u128> {
    (base as u128).checked_pow(u32::try_from(exp).ok()?)
}

#[derive(Serialize, Deserialize)]
struct LabelCoverJson {
    kind: String,
    #[serde(rename = "nU")]
    n_left: usize,
    #[serde(rename = "nV")]
    n_right: usize,
    #[serde(rename = "sigmaU")]
    sigma_left: usize,
    #[serde(rename = "sigmaV")]
    sigma_right: usize,
    edges: Vec<[usize; 2]>,
    projections: Vec<Vec<Label>>,
    predicates: Vec<Vec<u8>>,
}

impl TryFrom<LabelCoverJson> for LabelCoverInstance {
    type Error = Error;
    fn try_from(j: LabelCoverJson) -> Result<Self> {
        if j.kind != "label_cover" {
            return Err(Error::Invalid(format!("expected kind label_cover, got {}", j.kind)));
        }
        let predicates = j
            .predicates
            .into_iter()
            .map(|row| row.into_iter().map(|b| b != 0).collect())
            .collect();
        Self::new(
            j.n_left,
            j.n_right,
            j.sigma_left,
            j.sigma_right,
            j.edges.into_iter().map(|[u, v]| (u, v)).collect(),
            j.projections,
            predicates,
        )
    }
}

impl From<LabelCoverInstance> for LabelCoverJson {
    fn from(i: LabelCoverInstance) -> Self {
        Self {
            kind: "label_cover".into(),
            n_left: i.n_left,
            n_right: i.n_right,
            sigma_left: i.sigma_left,
            sigma_right: i.sigma_right,
            edges: i.edges.into_iter().map(|(u, v)| [u, v]).collect(),
            projections: i.projections,
            predicates: i
                .predicates
                .into_iter()
                .map(|row| row.into_iter().map(u8::from).collect())
                .collect(),
        }
    }
}

/// One binary constraint: `relation[x * sigma + y]` accepts `(x, y)` on
/// endpoints `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub a: usize,
    pub b: usize,
    pub relation: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TwoCspJson", into = "TwoCspJson")]
pub struct TwoCspInstance {
    n: usize,
    sigma: usize,
    constraints: Vec<Constraint>,
}

impl TwoCspInstance {
    pub fn new(n: usize, sigma: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if sigma == 0 {
            return Err(Error::Invalid("empty alphabet".into()));
        }
        for (i, c) in constraints.iter().enumerate() {
            if c.a >= n || c.b >= n || c.relation.len() != sigma * sigma {
                return Err(Error::Invalid(format!("constraint {i} malformed")));
            }
        }
        Ok(Self { n, sigma, constraints })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }
    pub fn sigma(&self) -> usize {
        self.sigma
    }
    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }
    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn accepts(&self, c: usize, x: Label, y: Label) -> bool {
        self.constraints[c].relation[x as usize * self.sigma + y as usize]
    }

    pub fn satisfied(&self, c: usize, labels: &[Label]) -> bool {
        let k = &self.constraints[c];
        self.accepts(c, labels[k.a], labels[k.b])
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for c in &self.constraints {
            d[c.a] += 1;
            d[c.b] += 1;
        }
        d
    }

    /// Uniform vertex degree, if any.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degrees();
        let first = *d.first()?;
        d.iter().all(|&x| x == first).then_some(first)
    }

    /// Constraint indices incident to each vertex, in constraint order.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n];
        for (i, c) in self.constraints.iter().enumerate() {
            inc[c.a].push(i);
            if c.b != c.a {
                inc[c.b].push(i);
            }
        }
        inc
    }

    pub fn value(&self, labels: &[Label]) -> Result<Rational> {
        if self.constraints.is_empty() {
            return Err(Error::NoEdges);
        }
        if labels.len() != self.n || labels.iter().any(|&x| x as usize >= self.sigma) {
            return Err(Error::DomainMismatch("csp labeling".into()));
        }
        let sat = (0..self.constraints.len()).filter(|&c| self.satisfied(c, labels)).count();
        Ok(Rational::new(sat as i128, self.constraints.len() as i128))
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.n == other.n
            && self.sigma == other.sigma
            && self.constraints.len() == other.constraints.len()
            && self.constraints.iter().zip(&other.constraints).all(|(x, y)| x.a == y.a && x.b == y.b)
    }
}

impl Swappable for TwoCspInstance {
    fn apply_swap(&self, swap: &Swap) -> Result<Self> {
        match swap {
            Swap::CspConstraint { constraint, relation }
                if *constraint < self.constraints.len() && relation.len() == self.sigma * self.sigma =>
            {
                let mut out = self.clone();
                out.constraints[*constraint].relation = relation.clone();
                Ok(out)
            }
            _ => Err(Error::InvalidSwap("not a well-formed csp constraint swap".into())),
        }
    }

    fn swap_distance(&self, other: &Self) -> Result<usize> {
        if !self.same_shape(other) {
            return Err(Error::Incomparable);
        }
        Ok(self.constraints.iter().zip(&other.constraints).filter(|(x, y)| x.relation != y.relation).count())
    }

    fn swap_path(&self, other: &Self) -> Result<Vec<Swap>> {
        if !self.same_shape(other) {
            return Err(Error::Incomparable);
        }
        Ok(self
            .constraints
            .iter()
            .zip(&other.constraints)
            .enumerate()
            .filter(|(_, (x, y))| x.relation != y.relation)
            .map(|(i, (_, y))| Swap::CspConstraint { constraint: i, relation: y.relation.clone() })
            .collect())
    }
}

#[derive(Serialize, Deserialize)]
struct ConstraintJson {
    edge: [usize; 2],
    relation: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct TwoCspJson {
    kind: String,
    n: usize,
    sigma: usize,
    constraints: Vec<ConstraintJson>,
}

impl TryFrom<TwoCspJson> for TwoCspInstance {
    type Error = Error;
    fn try_from(j: TwoCspJson) -> Result<Self> {
        if j.kind != "two_csp" {
            return Err(Error::Invalid(format!("expected kind two_csp, got {}", j.kind)));
        }
        let mut constraints = Vec::with_capacity(j.constraints.len());
        for c in j.constraints {
            if c.relation.len() != j.sigma || c.relation.iter().any(|r| r.len() != j.sigma) {
                return Err(Error::Invalid("relation must be sigma x sigma".into()));
            }
            constraints.push(Constraint {
                a: c.edge[0],
                b: c.edge[1],
                relation: c.relation.into_iter().flatten().map(|b| b != 0).collect(),
            });
        }
        Self::new(j.n, j.sigma, constraints)
    }
}

impl From<TwoCspInstance> for TwoCspJson {
    fn from(i: TwoCspInstance) -> Self {
        let sigma = i.sigma;
        Self {
            kind: "two_csp".into(),
            n: i.n,
            sigma,
            constraints: i
                .constraints
                .into_iter()
                .map(|c| ConstraintJson {
                    edge: [c.a, c.b],
                    relation: c.relation.chunks(sigma).map(|r| r.iter().map(|&b| u8::from(b)).collect()).collect(),
                })
                .collect(),
        }
    }
}
