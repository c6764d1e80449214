//! Admissible neighborhoods, the decoder interface with a toy decoder, and
//! composition on the padded graph together with its recovery map.
//!
//! Composed left vertex (v, r) has index `v * 2^𝗋 + r`; composed right vertex
//! (u, t) has index `u * m + t`. Left labels are d_V × m matrices over the
//! proof alphabet, stored row-major; row i of (v, r) belongs to v's i-th
//! incident edge and rows beyond deg(v) are padding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lc::{Assignment, Label, LabelCoverInstance};
use crate::metrics::{EmpiricalDistribution, Metric};
use crate::rational::Rational;
use crate::rng;

pub const DEFAULT_EXPLICIT_BUDGET: u128 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdmissibleNeighborhood {
    pub u: usize,
    /// Incident edges of u in edge order; position j is the j-th neighbor.
    pub edges: Vec<usize>,
    pub neighbors: Vec<usize>,
    /// Sorted, deduplicated admissible tuples in Σ_V^{deg(u)}.
    pub tuples: Vec<Vec<Label>>,
}

impl AdmissibleNeighborhood {
    pub fn arity(&self) -> usize {
        self.edges.len()
    }
}

pub fn admissible_tuples(inst: &LabelCoverInstance, u: usize) -> AdmissibleNeighborhood {
    let edges: Vec<usize> = (0..inst.n_edges()).filter(|&e| inst.edges()[e].0 == u).collect();
    let neighbors = edges.iter().map(|&e| inst.edges()[e].1).collect();
    let mut tuples: Vec<Vec<Label>> = (0..inst.sigma_left())
        .filter(|&a| inst.predicate(u)[a])
        .map(|a| edges.iter().map(|&e| inst.projection(e)[a]).collect())
        .collect();
    tuples.sort();
    tuples.dedup();
    AdmissibleNeighborhood { u, edges, neighbors, tuples }
}

/// Query positions and the local decision table. `decode` is indexed by the
/// read symbols in base σ, first position least significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalView {
    pub positions: Vec<usize>,
    pub decode: Vec<Option<Label>>,
}

impl LocalView {
    pub fn apply(&self, proof: impl Fn(usize) -> Label, sigma: usize) -> Option<Label> {
        let mut idx = 0usize;
        let mut pow = 1usize;
        for &p in &self.positions {
            idx += proof(p) as usize * pow;
            pow *= sigma;
        }
        self.decode[idx]
    }
}

pub trait Decoder {
    fn proof_length(&self) -> usize;
    fn query_count(&self) -> usize;
    fn randomness_bits(&self) -> u32;
    fn proof_alphabet(&self) -> usize;
    fn list_size(&self, circuit: &AdmissibleNeighborhood) -> usize;
    fn query(&self, circuit: &AdmissibleNeighborhood, j: usize, r: u64) -> LocalView;
    fn encode_proof(&self, circuit: &AdmissibleNeighborhood, tuple: &[Label]) -> Vec<Label>;

    fn randomness_size(&self) -> u64 {
        1u64 << self.randomness_bits()
    }
}

/// Proof = the admissible tuple itself (zero padded to m). Query (j, r) reads
/// position j and position r mod arity, and decodes y_j when the two symbols
/// extend to an admissible tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyDecoder {
    m: usize,
    sigma: usize,
}

pub fn toy_decoder(max_degree: usize, sigma: usize) -> ToyDecoder {
    ToyDecoder { m: max_degree.max(1), sigma }
}

impl Decoder for ToyDecoder {
    fn proof_length(&self) -> usize {
        self.m
    }
    fn query_count(&self) -> usize {
        2
    }
    fn randomness_bits(&self) -> u32 {
        usize::BITS - (self.m - 1).leading_zeros()
    }
    fn proof_alphabet(&self) -> usize {
        self.sigma
    }
    fn list_size(&self, circuit: &AdmissibleNeighborhood) -> usize {
        circuit.tuples.len()
    }
    fn query(&self, circuit: &AdmissibleNeighborhood, j: usize, r: u64) -> LocalView {
        let extra = (r as usize) % circuit.arity().max(1);
        let positions = vec![j, extra];
        let s = self.sigma;
        let decode = (0..s * s)
            .map(|idx| {
                let (x, y) = ((idx % s) as Label, (idx / s) as Label);
                circuit.tuples.iter().any(|t| t[j] == x && t[extra] == y).then_some(x)
            })
            .collect();
        LocalView { positions, decode }
    }
    fn encode_proof(&self, _circuit: &AdmissibleNeighborhood, tuple: &[Label]) -> Vec<Label> {
        let mut p = tuple.to_vec();
        p.resize(self.m, 0);
        p
    }
}

/// Pr over uniform (j, r) that the decoder outputs neither ⊥ nor y_j for
/// some y in `list`.
pub fn list_decoding_error<D: Decoder>(
    dec: &D,
    circuit: &AdmissibleNeighborhood,
    proof: &[Label],
    list: &[Vec<Label>],
) -> Rational {
    let arity = circuit.arity();
    let rs = dec.randomness_size();
    let mut bad = 0i128;
    for j in 0..arity {
        for r in 0..rs {
            let view = dec.query(circuit, j, r);
            if let Some(z) = view.apply(|p| proof[p], dec.proof_alphabet()) {
                if !list.iter().any(|y| y[j] == z) {
                    bad += 1;
                }
            }
        }
    }
    Rational::new(bad, (arity as i128 * rs as i128).max(1))
}

/// Completeness of a decoder on one circuit: every honest proof decodes y_j
/// for every (j, r).
pub fn decoder_complete_on<D: Decoder>(dec: &D, circuit: &AdmissibleNeighborhood) -> bool {
    circuit.tuples.iter().all(|y| {
        let proof = dec.encode_proof(circuit, y);
        (0..circuit.arity()).all(|j| {
            (0..dec.randomness_size())
                .all(|r| dec.query(circuit, j, r).apply(|p| proof[p], dec.proof_alphabet()) == Some(y[j]))
        })
    })
}

/// Max over circuits and proof positions t of the number of (j, r, slot)
/// triples whose query reads t.
pub fn decoder_query_degree<D: Decoder>(inst: &LabelCoverInstance, dec: &D) -> usize {
    let mut best = 0;
    for u in 0..inst.n_left() {
        let c = admissible_tuples(inst, u);
        let mut counts = vec![0usize; dec.proof_length()];
        for j in 0..c.arity() {
            for r in 0..dec.randomness_size() {
                for p in dec.query(&c, j, r).positions {
                    counts[p] += 1;
                }
            }
        }
        best = best.max(counts.into_iter().max().unwrap_or(0));
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowCheck {
    pub row: usize,
    pub view: LocalView,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComposedEdge {
    pub left: usize,
    pub right: usize,
    pub row: usize,
    pub col: usize,
}

/// Composed instance with lazily evaluated predicates over matrix labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComposedInstance {
    pub n_left: usize,
    pub n_right: usize,
    pub sigma: usize,
    pub rows: usize,
    pub m: usize,
    pub r_size: usize,
    pub edges: Vec<ComposedEdge>,
    pub predicates: Vec<Vec<RowCheck>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComposedAssignment {
    pub left: Vec<Vec<Label>>,
    pub right: Vec<Label>,
}

impl Metric for ComposedAssignment {
    fn same_domain(&self, other: &Self) -> bool {
        self.left.len() == other.left.len() && self.right.len() == other.right.len()
    }
    fn distance(&self, other: &Self) -> u64 {
        self.left.distance(&other.left) + self.right.distance(&other.right)
    }
}

/// Per-source-vertex layout used by composition and recovery.
struct Layout {
    circuits: Vec<AdmissibleNeighborhood>,
    /// For each right vertex v: (u_i, j_i) per incident edge in edge order.
    rows: Vec<Vec<(usize, usize)>>,
}

fn layout(inst: &LabelCoverInstance) -> Layout {
    let circuits: Vec<AdmissibleNeighborhood> = (0..inst.n_left()).map(|u| admissible_tuples(inst, u)).collect();
    let mut pos_in_left = vec![0usize; inst.n_edges()];
    for c in &circuits {
        for (j, &e) in c.edges.iter().enumerate() {
            pos_in_left[e] = j;
        }
    }
    let rows = inst
        .right_incidence()
        .into_iter()
        .map(|inc| inc.into_iter().map(|e| (inst.edges()[e].0, pos_in_left[e])).collect())
        .collect();
    Layout { circuits, rows }
}

pub fn compose<D: Decoder>(inst: &LabelCoverInstance, dec: &D) -> Result<ComposedInstance> {
    let d_u = inst.left_degrees().into_iter().max().unwrap_or(0);
    let m = dec.proof_length();
    if d_u > m {
        return Err(Error::Precondition(format!("decoder proof length {m} below max left degree {d_u}")));
    }
    if dec.proof_alphabet() < inst.sigma_right() {
        return Err(Error::Precondition("proof alphabet smaller than Σ_V".into()));
    }
    let lay = layout(inst);
    let rows = inst.right_degrees().into_iter().max().unwrap_or(0);
    let r_size = dec.randomness_size() as usize;
    let mut edges = Vec::new();
    let mut predicates = Vec::with_capacity(inst.n_right() * r_size);
    for v in 0..inst.n_right() {
        for r in 0..r_size {
            let li = v * r_size + r;
            let mut checks = Vec::with_capacity(lay.rows[v].len());
            for (i, &(u, j)) in lay.rows[v].iter().enumerate() {
                for t in 0..m {
                    edges.push(ComposedEdge { left: li, right: u * m + t, row: i, col: t });
                }
                checks.push(RowCheck { row: i, view: dec.query(&lay.circuits[u], j, r as u64) });
            }
            predicates.push(checks);
        }
    }
    Ok(ComposedInstance {
        n_left: inst.n_right() * r_size,
        n_right: inst.n_left() * m,
        sigma: dec.proof_alphabet(),
        rows,
        m,
        r_size,
        edges,
        predicates,
    })
}

impl ComposedInstance {
    pub fn label_len(&self) -> usize {
        self.rows * self.m
    }

    /// Unanimous, non-⊥ decoding across active rows (vacuous without rows).
    pub fn predicate_holds(&self, li: usize, label: &[Label]) -> bool {
        let mut agreed: Option<Label> = None;
        for c in &self.predicates[li] {
            let row = &label[c.row * self.m..(c.row + 1) * self.m];
            match c.view.apply(|p| row[p], self.sigma) {
                None => return false,
                Some(z) => {
                    if agreed.is_some_and(|a| a != z) {
                        return false;
                    }
                    agreed = Some(z);
                }
            }
        }
        true
    }

    pub fn value(&self, pi: &ComposedAssignment) -> Result<Rational> {
        if self.edges.is_empty() {
            return Err(Error::NoEdges);
        }
        if pi.left.len() != self.n_left
            || pi.right.len() != self.n_right
            || pi.left.iter().any(|l| l.len() != self.label_len())
        {
            return Err(Error::DomainMismatch("composed assignment shape".into()));
        }
        let ok: Vec<bool> = (0..self.n_left).map(|li| self.predicate_holds(li, &pi.left[li])).collect();
        let sat = self
            .edges
            .iter()
            .filter(|e| ok[e.left] && pi.left[e.left][e.row * self.m + e.col] == pi.right[e.right])
            .count();
        Ok(Rational::new(sat as i128, self.edges.len() as i128))
    }

    pub fn left_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_left];
        for e in &self.edges {
            d[e.left] += 1;
        }
        d
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_right];
        for e in &self.edges {
            d[e.right] += 1;
        }
        d
    }

    pub fn same_padded_graph(&self, other: &Self) -> bool {
        self.n_left == other.n_left
            && self.n_right == other.n_right
            && self.sigma == other.sigma
            && self.rows == other.rows
            && self.m == other.m
            && self.edges == other.edges
    }

    /// Counts (differing projections, differing predicate descriptors).
    /// Predicates are compared by their decoder tables, which upper-bounds
    /// the number of semantically different predicates.
    pub fn swap_distance(&self, other: &Self) -> Result<(usize, usize)> {
        if !self.same_padded_graph(other) {
            return Err(Error::Incomparable);
        }
        let proj = self.edges.iter().zip(&other.edges).filter(|(a, b)| (a.row, a.col) != (b.row, b.col)).count();
        let pred = self.predicates.iter().zip(&other.predicates).filter(|(a, b)| a != b).count();
        Ok((proj, pred))
    }

    /// Explicit label cover over enumerated matrix labels.
    pub fn to_explicit(&self, budget: u128) -> Result<LabelCoverInstance> {
        let n_labels = crate::lc::pow_checked(self.sigma, self.label_len()).filter(|&n| n <= budget);
        let n_labels = n_labels
            .ok_or_else(|| Error::BudgetExceeded(format!("|σ|^(d_V·m) = {}^{}", self.sigma, self.label_len())))?
            as usize;
        let decode = |x: usize| -> Vec<Label> {
            let mut v = Vec::with_capacity(self.label_len());
            let mut y = x;
            for _ in 0..self.label_len() {
                v.push((y % self.sigma) as Label);
                y /= self.sigma;
            }
            v
        };
        let labels: Vec<Vec<Label>> = (0..n_labels).map(decode).collect();
        let predicates = (0..self.n_left).map(|li| labels.iter().map(|l| self.predicate_holds(li, l)).collect()).collect();
        let projections = self
            .edges
            .iter()
            .map(|e| labels.iter().map(|l| l[e.row * self.m + e.col]).collect())
            .collect();
        LabelCoverInstance::new(
            self.n_left,
            self.n_right,
            n_labels,
            self.sigma,
            self.edges.iter().map(|e| (e.left, e.right)).collect(),
            projections,
            predicates,
        )
    }
}

/// Honest composed assignment from a satisfying source assignment: every
/// row and every right block carries the encoded admissible tuple of u.
pub fn honest_assignment<D: Decoder>(
    inst: &LabelCoverInstance,
    dec: &D,
    composed: &ComposedInstance,
    pi: &Assignment,
) -> ComposedAssignment {
    let lay = layout(inst);
    let proofs: Vec<Vec<Label>> = lay
        .circuits
        .iter()
        .map(|c| {
            let tuple: Vec<Label> = c.edges.iter().map(|&e| inst.projection(e)[pi.left[c.u] as usize]).collect();
            dec.encode_proof(c, &tuple)
        })
        .collect();
    let mut left = Vec::with_capacity(composed.n_left);
    for v in 0..inst.n_right() {
        for _ in 0..composed.r_size {
            let mut label = vec![0 as Label; composed.label_len()];
            for (i, &(u, _)) in lay.rows[v].iter().enumerate() {
                label[i * composed.m..(i + 1) * composed.m].copy_from_slice(&proofs[u]);
            }
            left.push(label);
        }
    }
    let right = proofs.into_iter().flatten().collect();
    ComposedAssignment { left, right }
}

/// Recovery for a fixed r: right labels from unanimous decoding of the
/// composed right labels (else 0), left labels the least label consistent
/// with the predicate and all incident projections (else 0). Composed left
/// labels are never read.
pub fn comp_recover_with<D: Decoder>(inst: &LabelCoverInstance, dec: &D, right: &[Label], r: u64) -> Result<Assignment> {
    let m = dec.proof_length();
    if right.len() != inst.n_left() * m {
        return Err(Error::ShapeMismatch("composed right side".into()));
    }
    let lay = layout(inst);
    let mut pv = vec![0 as Label; inst.n_right()];
    for (v, rows) in lay.rows.iter().enumerate() {
        let mut agreed: Option<Label> = None;
        let mut ok = !rows.is_empty();
        for &(u, j) in rows {
            let view = dec.query(&lay.circuits[u], j, r);
            match view.apply(|p| right[u * m + p], dec.proof_alphabet()) {
                Some(z) if agreed.map_or(true, |a| a == z) => agreed = Some(z),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            // Decoded symbols outside Σ_V fall back to the default.
            pv[v] = agreed.filter(|&z| (z as usize) < inst.sigma_right()).unwrap_or(0);
        }
    }
    let pu = lay
        .circuits
        .iter()
        .map(|c| {
            (0..inst.sigma_left())
                .find(|&a| inst.predicate(c.u)[a] && c.edges.iter().all(|&e| inst.projection(e)[a] == pv[inst.edges()[e].1]))
                .unwrap_or(0) as Label
        })
        .collect();
    Ok(Assignment::new(pu, pv))
}

/// Law of the recovery: uniform over r.
pub fn comp_law<D: Decoder>(inst: &LabelCoverInstance, dec: &D, pi: &ComposedAssignment) -> Result<EmpiricalDistribution<Assignment>> {
    let outs = (0..dec.randomness_size())
        .map(|r| comp_recover_with(inst, dec, &pi.right, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalDistribution::uniform(outs))
}

pub fn comp_recover<D: Decoder>(inst: &LabelCoverInstance, dec: &D, pi: &ComposedAssignment, seed: u64) -> Result<Assignment> {
    use rand::Rng;
    let r = rng::stream(seed, rng::task::RECOVER_COMP).gen_range(0..dec.randomness_size());
    comp_recover_with(inst, dec, &pi.right, r)
}

/// Structural constants: C_T = d_U·2^𝗋, C_R = d(1+d_V)·2^{−𝗋},
/// D_Comp = d_U(1+d_V)+1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionConstants {
    pub d_u: usize,
    pub d_v: usize,
    pub query_degree: usize,
    pub c_t: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub c_r: Rational,
    pub d_comp: usize,
}

pub fn composition_constants<D: Decoder>(inst: &LabelCoverInstance, dec: &D) -> CompositionConstants {
    let d_u = inst.left_degrees().into_iter().max().unwrap_or(0);
    let d_v = inst.right_degrees().into_iter().max().unwrap_or(0);
    let d = decoder_query_degree(inst, dec);
    let rs = dec.randomness_size() as i128;
    CompositionConstants {
        d_u,
        d_v,
        query_degree: d,
        c_t: d_u * rs as usize,
        c_r: Rational::new((d * (1 + d_v)) as i128, rs),
        d_comp: d_u * (1 + d_v) + 1,
    }
}
