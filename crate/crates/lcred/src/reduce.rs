//! Right-degree reduction, alphabet reduction and the combined branch, each
//! with its recovery map.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::gadgets::{build_code, build_expander, Code, RegularGraph};
use crate::hash::content_hash;
use crate::lc::{Assignment, LabelCoverInstance};
use crate::metrics::CoinLaw;
use crate::rational::{self, Rational};
use crate::rng;

/// One regular graph on D vertices with degree d per right degree D.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderPackage {
    d: usize,
    graphs: BTreeMap<usize, RegularGraph>,
}

impl ExpanderPackage {
    /// D = d uses the complete graph with loops, D = d + 1 uses K_{d+1},
    /// larger D are sampled and certified.
    pub fn build(
        degrees: impl IntoIterator<Item = usize>,
        d: usize,
        lambda_target: f64,
        seed: u64,
        retries: usize,
    ) -> Result<Self> {
        let mut graphs = BTreeMap::new();
        for big_d in degrees {
            if graphs.contains_key(&big_d) {
                continue;
            }
            let g = if big_d < d {
                return Err(Error::Precondition(format!("right degree {big_d} below target degree {d}")));
            } else if big_d == d {
                RegularGraph::complete_with_loops(big_d)?
            } else {
                build_expander(big_d, d, lambda_target, rng::mix(seed ^ big_d as u64), retries)?.graph
            };
            graphs.insert(big_d, g);
        }
        Ok(Self { d, graphs })
    }

    pub fn for_instance(inst: &LabelCoverInstance, d: usize, lambda_target: f64, seed: u64, retries: usize) -> Result<Self> {
        Self::build(inst.right_degrees(), d, lambda_target, seed, retries)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn graph(&self, big_d: usize) -> Option<&RegularGraph> {
        self.graphs.get(&big_d)
    }

    pub fn max_lambda(&self) -> f64 {
        self.graphs.values().map(RegularGraph::lambda).fold(0.0, f64::max)
    }

    pub fn refs(&self) -> Vec<String> {
        self.graphs.values().map(content_hash).collect()
    }
}

/// Cloud layout of a degree-reduced instance: right vertex v of the source
/// became target vertices `offsets[v]..offsets[v+1]`; `origin[e']` is the
/// source edge copied into target edge e'.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrShape {
    pub offsets: Vec<usize>,
    pub origin: Vec<usize>,
    pub n_left: usize,
}

/// Algorithm 1: the k-th neighbor of cloud vertex (v, i) is the left endpoint
/// of v's edge number `H_v.neighbor(i, k)`, and the copy inherits that edge's
/// projection.
pub fn degree_reduce(inst: &LabelCoverInstance, d: usize, pkg: &ExpanderPackage) -> Result<(LabelCoverInstance, DrShape)> {
    if d % 2 != 0 || d < 4 {
        return Err(Error::Precondition(format!("d = {d} must be even and at least 4")));
    }
    if pkg.d() != d {
        return Err(Error::Precondition("package degree differs from d".into()));
    }
    let degrees = inst.right_degrees();
    if let Some(&min) = degrees.iter().min() {
        if d > min {
            return Err(Error::Precondition(format!("d = {d} exceeds min right degree {min}")));
        }
    }
    let right_inc = inst.right_incidence();
    let mut offsets = Vec::with_capacity(inst.n_right() + 1);
    offsets.push(0);
    for &deg in &degrees {
        offsets.push(offsets.last().unwrap() + deg);
    }
    let mut edges = Vec::with_capacity(inst.n_edges() * d);
    let mut projections = Vec::with_capacity(inst.n_edges() * d);
    let mut origin = Vec::with_capacity(inst.n_edges() * d);
    for v in 0..inst.n_right() {
        let big_d = degrees[v];
        let h = pkg
            .graph(big_d)
            .ok_or_else(|| Error::Precondition(format!("package lacks degree {big_d}")))?;
        for i in 0..big_d {
            for k in 0..d {
                let e = right_inc[v][h.neighbor(i, k)];
                edges.push((inst.edges()[e].0, offsets[v] + i));
                projections.push(inst.projection(e).to_vec());
                origin.push(e);
            }
        }
    }
    let out = LabelCoverInstance::new(
        inst.n_left(),
        inst.n_edges(),
        inst.sigma_left(),
        inst.sigma_right(),
        edges,
        projections,
        inst.predicates().to_vec(),
    )?;
    Ok((out, DrShape { offsets, origin, n_left: inst.n_left() }))
}

/// Honest lift: left labels copied, every cloud vertex gets its source label.
pub fn dr_lift(pi: &Assignment, shape: &DrShape) -> Assignment {
    let mut right = Vec::with_capacity(*shape.offsets.last().unwrap_or(&0));
    for v in 0..pi.right.len() {
        right.extend(std::iter::repeat(pi.right[v]).take(shape.offsets[v + 1] - shape.offsets[v]));
    }
    Assignment::new(pi.left.clone(), right)
}

/// Recovery law: left labels copied, π(v) = π'(v, i_v) with i_v uniform.
pub fn dr_law(pi: &Assignment, shape: &DrShape) -> Result<CoinLaw> {
    if pi.left.len() != shape.n_left || pi.right.len() != *shape.offsets.last().unwrap_or(&0) {
        return Err(Error::ShapeMismatch("assignment does not match cloud layout".into()));
    }
    Ok(CoinLaw {
        left: pi.left.iter().map(|&a| vec![a]).collect(),
        right: shape.offsets.windows(2).map(|w| pi.right[w[0]..w[1]].to_vec()).collect(),
    })
}

pub fn dr_recover(pi: &Assignment, shape: &DrShape, seed: u64) -> Result<Assignment> {
    Ok(dr_law(pi, shape)?.sample(&mut rng::stream(seed, rng::task::RECOVER_DR)))
}

/// T_AR: right vertex (v, i) has index `v * k + i`; each source edge becomes
/// k consecutive edges whose projections read codeword coordinate i.
pub fn alphabet_reduce(inst: &LabelCoverInstance, code: &Code) -> Result<LabelCoverInstance> {
    if code.source_alphabet != inst.sigma_right() {
        return Err(Error::Precondition(format!(
            "code source alphabet {} != |Σ_V| = {}",
            code.source_alphabet,
            inst.sigma_right()
        )));
    }
    let k = code.block_length;
    let mut edges = Vec::with_capacity(inst.n_edges() * k);
    let mut projections = Vec::with_capacity(inst.n_edges() * k);
    for (e, &(u, v)) in inst.edges().iter().enumerate() {
        for i in 0..k {
            edges.push((u, v * k + i));
            projections.push(inst.projection(e).iter().map(|&b| code.codeword(b as usize)[i]).collect());
        }
    }
    LabelCoverInstance::new(
        inst.n_left(),
        inst.n_right() * k,
        inst.sigma_left(),
        code.target_alphabet,
        edges,
        projections,
        inst.predicates().to_vec(),
    )
}

pub fn ar_lift(pi: &Assignment, code: &Code) -> Assignment {
    Assignment::new(
        pi.left.clone(),
        pi.right.iter().flat_map(|&b| code.codeword(b as usize).iter().copied()).collect(),
    )
}

/// Recovery law on the source: left labels copied; π(v) is drawn from the
/// projections f_e(π'(u)) over v's incident edges (with multiplicity).
/// Isolated right vertices get label 0.
pub fn ar_law(source: &LabelCoverInstance, pi: &Assignment) -> Result<CoinLaw> {
    if pi.left.len() != source.n_left() {
        return Err(Error::ShapeMismatch("left side differs from source".into()));
    }
    let right = source
        .right_incidence()
        .iter()
        .map(|inc| {
            if inc.is_empty() {
                vec![0]
            } else {
                inc.iter()
                    .map(|&e| source.projection(e)[pi.left[source.edges()[e].0] as usize])
                    .collect()
            }
        })
        .collect();
    Ok(CoinLaw { left: pi.left.iter().map(|&a| vec![a]).collect(), right })
}

pub fn ar_recover(source: &LabelCoverInstance, pi: &Assignment, seed: u64) -> Result<Assignment> {
    Ok(ar_law(source, pi)?.sample(&mut rng::stream(seed, rng::task::RECOVER_AR)))
}

/// ε/√η + 2√η, exact when η is a rational square and otherwise rounded up.
pub fn ar_soundness_threshold(eps: Rational, eta: Rational) -> Rational {
    let root = sqrt_exact(eta).unwrap_or_else(|| rational::from_f64_ceil(rational::to_f64(&eta).sqrt(), 1 << 40));
    eps / root + Rational::from_integer(2) * root
}

pub fn sqrt_exact(r: Rational) -> Option<Rational> {
    let isqrt = |x: i128| -> Option<i128> {
        if x < 0 {
            return None;
        }
        let s = (x as f64).sqrt().round() as i128;
        (s - 1..=s + 1).find(|c| *c >= 0 && c * c == x)
    };
    Some(Rational::new(isqrt(*r.numer())?, isqrt(*r.denom())?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetContext {
    /// Branch constant c: degree reduction runs iff min right degree > c/ε.
    #[serde(with = "rational::serde_str")]
    pub branch_constant: Rational,
    pub lambda_target: f64,
    pub expander_seed: u64,
    pub expander_retries: usize,
}

impl Default for GadgetContext {
    fn default() -> Self {
        Self {
            branch_constant: Rational::from_integer(16),
            lambda_target: 0.9,
            expander_seed: 0,
            expander_retries: 32,
        }
    }
}

/// Frozen gadget choices of the combined reduction, enough to replay the
/// transform and run its recovery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedHandle {
    #[serde(with = "rational::serde_str")]
    pub eps: Rational,
    #[serde(with = "rational::serde_str")]
    pub eta: Rational,
    pub code: Code,
    pub source: LabelCoverInstance,
    pub intermediate: LabelCoverInstance,
    pub dr: Option<DrStage>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrStage {
    pub d: usize,
    pub package: ExpanderPackage,
    pub shape: DrShape,
}

/// Alphabet reduction with η = ε/4 and code distance 1 − η³, followed by
/// degree reduction with d = least even integer ≥ c/ε exactly when the
/// minimum right degree exceeds c/ε.
pub fn reduce_combined(
    inst: &LabelCoverInstance,
    eps: Rational,
    ctx: &GadgetContext,
) -> Result<(LabelCoverInstance, RedHandle)> {
    if eps <= rational::zero() || eps >= Rational::new(1, 16) {
        return Err(Error::Precondition("need 0 < ε < 1/16".into()));
    }
    let eta = eps / Rational::from_integer(4);
    let code = build_code(inst.sigma_right(), eta * eta * eta)?;
    let intermediate = alphabet_reduce(inst, &code)?;
    let threshold = ctx.branch_constant / eps;
    let min_deg = intermediate.right_degrees().into_iter().min().unwrap_or(0);
    let (out, dr) = if Rational::from_integer(min_deg as i128) > threshold {
        let mut d = threshold.ceil().to_integer().max(4) as usize;
        d += d % 2;
        if d > min_deg {
            return Err(Error::Precondition(format!("even degree {d} exceeds min right degree {min_deg}")));
        }
        let package = ExpanderPackage::for_instance(
            &intermediate,
            d,
            ctx.lambda_target,
            ctx.expander_seed,
            ctx.expander_retries,
        )?;
        let (out, shape) = degree_reduce(&intermediate, d, &package)?;
        (out, Some(DrStage { d, package, shape }))
    } else {
        (intermediate.clone(), None)
    };
    Ok((out.clone(), RedHandle { eps, eta, code, source: inst.clone(), intermediate, dr }))
}

impl RedHandle {
    pub fn lift(&self, pi: &Assignment) -> Assignment {
        let ar = ar_lift(pi, &self.code);
        match &self.dr {
            Some(st) => dr_lift(&ar, &st.shape),
            None => ar,
        }
    }

    pub fn recover(&self, pi: &Assignment, seed: u64) -> Result<Assignment> {
        let mid = match &self.dr {
            Some(st) => dr_recover(pi, &st.shape, seed)?,
            None => pi.clone(),
        };
        ar_recover(&self.source, &mid, seed)
    }

    /// The alphabet-reduction recovery reads left labels only and the degree
    /// recovery copies them, so the composed law is the AR law of `pi`'s
    /// left side.
    pub fn law(&self, pi: &Assignment) -> Result<CoinLaw> {
        ar_law(&self.source, pi)
    }

    pub fn handle_json(&self) -> serde_json::Value {
        let mut refs = vec![content_hash(&self.code)];
        if let Some(st) = &self.dr {
            refs.extend(st.package.refs());
        }
        json!({
            "transform": "red",
            "params": {
                "eps": rational::fmt(&self.eps),
                "eta": rational::fmt(&self.eta),
                "code_delta": rational::fmt(&self.code.declared_delta),
                "d": self.dr.as_ref().map(|s| s.d),
            },
            "gadget_refs": refs,
        })
    }
}

pub fn dr_handle_json(d: usize, pkg: &ExpanderPackage) -> serde_json::Value {
    json!({"transform": "dr", "params": {"d": d, "max_lambda": pkg.max_lambda()}, "gadget_refs": pkg.refs()})
}

pub fn ar_handle_json(code: &Code) -> serde_json::Value {
    json!({
        "transform": "ar",
        "params": {"block_length": code.block_length, "delta": rational::fmt(&code.declared_delta)},
        "gadget_refs": [content_hash(code)],
    })
}

/// Exact expected value of a recovery law, with labels checked in range.
pub fn expected_value(inst: &LabelCoverInstance, law: &CoinLaw) -> Result<Rational> {
    let bad = law.left.iter().flatten().any(|&a| a as usize >= inst.sigma_left())
        || law.right.iter().flatten().any(|&b| b as usize >= inst.sigma_right());
    if bad {
        return Err(Error::DomainMismatch("law label outside alphabet".into()));
    }
    law.expected_value(inst)
}
