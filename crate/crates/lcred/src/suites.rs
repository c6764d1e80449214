//! Shipped verification suites: each runs the finite-scale checks of one
//! structural or recovery property on deterministic fixtures.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compose;
use crate::covering::balance::{balance, BalanceMode, DEFAULT_BALANCE_EDGE_BUDGET};
use crate::covering::domset::{ds_opt_bruteforce, ds_pad, ds_recover, ds_transform, pullback_check, GreedyDomSet};
use crate::covering::setcover::{sc_law, sc_opt_bruteforce, sc_selection, sc_transform, slice_stats, SetCoverInstance};
use crate::error::{Error, Result};
use crate::gadgets::code::{build_code, verify_code};
use crate::gadgets::expander::{build_expander, RegularGraph};
use crate::gadgets::setsystem::{build_set_system, hypercube_set_system, verify_set_system, SetSystem, DEFAULT_VERIFY_BUDGET};
use crate::gen;
use crate::ikw::{blowup_fraction, predicate_change_fraction, IkwInstance, IkwMode, IkwParams, DEFAULT_IKW_BUDGET};
use crate::lc::{Label, LabelCoverInstance, Swap, Swappable};
use crate::metrics::{emd_exact, hamming, neighboring_witness, EmpiricalDistribution, RandomizedAlgorithm, DEFAULT_EMD_BUDGET};
use crate::pipeline::Check;
use crate::rational::{self, one, q, Rational};
use crate::reduce::{self, ExpanderPackage};
use crate::rng::{self, Stream};

pub const SUITES: &[&str] = &[
    "lc-balance",
    "sc-recovery",
    "sc-slice-soundness",
    "ds-recovery",
    "ds-padded-recovery",
    "ikw-blowup",
    "dr-structure",
    "ar-structure",
    "comp-recovery",
    "set-systems",
    "codes",
    "expanders",
    "emd-metric",
    "neighboring-witness",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn verify_suite(name: &str) -> Result<SuiteReport> {
    let mut r = rng::stream(rng::mix(name.len() as u64), 0);
    let checks = match name {
        "lc-balance" => lc_balance(&mut r)?,
        "sc-recovery" => sc_recovery(&mut r)?,
        "sc-slice-soundness" => sc_slice(&mut r)?,
        "ds-recovery" => ds_recovery(&mut r)?,
        "ds-padded-recovery" => ds_padded(&mut r)?,
        "ikw-blowup" => ikw_blowup(&mut r)?,
        "dr-structure" => dr_structure(&mut r)?,
        "ar-structure" => ar_structure(&mut r)?,
        "comp-recovery" => comp_recovery(&mut r)?,
        "set-systems" => set_systems()?,
        "codes" => codes()?,
        "expanders" => expanders()?,
        "emd-metric" => emd_metric(&mut r)?,
        "neighboring-witness" => neighboring(&mut r)?,
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    let passed = checks.iter().all(|c| c.holds);
    Ok(SuiteReport { suite: name.to_string(), checks, passed })
}

fn lc_balance(r: &mut Stream) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for f in 0..10 {
        let i = gen::random_label_cover(3, 3, 3, 2, 5 + f % 3, 0.7, r);
        let mode = if f % 2 == 0 { BalanceMode::Lcm } else { BalanceMode::Minimal };
        let (b, h) = balance(&i, mode, DEFAULT_BALANCE_EDGE_BUDGET)?;
        let pi = gen::random_assignment(b.n_left(), b.n_right(), 3, 2, r);
        let law = h.law(&pi).enumerate(1 << 16)?;
        let e = law.expectation(|a| i.value(a).unwrap_or_default());
        out.push(Check::rat(&format!("fixture {f}: E[val] = balanced value"), e, "=", b.value(&pi)?));
    }
    Ok(out)
}

fn sc_recovery(r: &mut Stream) -> Result<Vec<Check>> {
    let sys = hypercube_set_system(2, 2, DEFAULT_VERIFY_BUDGET)?;
    let mut out = Vec::new();
    for f in 0..10 {
        let (i, pi) = gen::planted_label_cover(3, 3, 3, 2, 6, 0.5, r);
        let (j, lay) = sc_transform(&i, &sys)?;
        let sel = sc_selection(&lay, &pi);
        out.push(Check::flag(&format!("fixture {f}: planted selection covers"), j.is_cover(&sel)));
        let mut other = sel.clone();
        let t = r.gen_range(0..j.n_sets());
        if !other.remove(&t) {
            other.insert(t);
        }
        let emd = sc_law(&i, &lay, &sel).emd(&sc_law(&i, &lay, &other))?;
        out.push(Check::rat(&format!("fixture {f}: one-index drift"), emd, "<=", one()));
        let u = r.gen_range(0..i.n_left());
        let table: Vec<bool> = (0..i.sigma_left()).map(|_| r.gen_bool(0.5)).collect();
        let k = i.apply_swap(&Swap::Predicate { vertex: u, table })?;
        let emd = sc_law(&i, &lay, &other).emd(&sc_law(&k, &lay, &other))?;
        out.push(Check::rat(&format!("fixture {f}: predicate-swap drift"), emd, "<=", one()));
    }
    Ok(out)
}

/// Covers built from a planted selection plus extra labels, keeping
/// |L_u| + |L_v| ≤ l on every edge.
pub fn slice_fixture(
    r: &mut Stream,
    sys: &SetSystem,
    l: usize,
) -> Result<(LabelCoverInstance, crate::covering::ScLayout, BTreeSet<usize>)> {
    let m = sys.m();
    loop {
        let (i, pi) = gen::planted_label_cover(3, 3, 4, m, 6, 0.6, r);
        let (j, lay) = sc_transform(&i, sys)?;
        let mut sel = sc_selection(&lay, &pi);
        for _ in 0..4 {
            let cand = r.gen_range(0..j.n_sets());
            let mut trial = sel.clone();
            trial.insert(cand);
            if slice_stats(&i, &lay, &trial).iter().all(|s| s.t <= l) {
                sel = trial;
            }
        }
        if j.is_cover(&sel) {
            return Ok((i, lay, sel));
        }
    }
}

fn sc_slice(r: &mut Stream) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for f in 0..20 {
        let m = 2 + f % 3;
        let l = 2 + f % 2;
        let sys = build_set_system(m, l, f as u64, DEFAULT_VERIFY_BUDGET)?;
        let (i, lay, sel) = slice_fixture(r, &sys, l)?;
        for s in slice_stats(&i, &lay, &sel) {
            if s.t <= l {
                out.push(Check::rat(
                    &format!("fixture {f} edge {}: slice probability", s.edge),
                    s.probability,
                    ">=",
                    q(4, (l * l) as i128),
                ));
            }
        }
    }
    Ok(out)
}

fn feasible_instance(r: &mut Stream, n: usize, m: usize) -> SetCoverInstance {
    loop {
        let sets = (0..m).map(|_| (0..n).filter(|_| r.gen_bool(0.4)).collect()).collect();
        let j = SetCoverInstance::new(n, sets).expect("in range");
        if j.is_feasible() {
            return j;
        }
    }
}

fn ds_recovery(r: &mut Stream) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for f in 0..10 {
        let j = feasible_instance(r, 5, 4);
        let gamma = j.max_set_size().max(j.max_frequency());
        let g = ds_transform(&j, gamma)?;
        let (sc, _) = sc_opt_bruteforce(&j, 1 << 10)?;
        let (ds, d) = ds_opt_bruteforce(&g, 1 << 16)?;
        let helpers = j.n_sets().div_ceil(gamma);
        out.push(Check::int(&format!("fixture {f}: sc <= ds"), sc as u128, "<=", ds as u128));
        out.push(Check::int(&format!("fixture {f}: ds <= sc + helpers"), ds as u128, "<=", (sc + helpers) as u128));
        let rec = ds_recover(&g, &d);
        out.push(Check::flag(&format!("fixture {f}: recovered cover"), j.is_cover(&rec)));
        out.push(Check::int(&format!("fixture {f}: |R(D)| <= |D|"), rec.len() as u128, "<=", d.len() as u128));
        let e: BTreeSet<usize> = (0..g.n_vertices()).filter(|_| r.gen_bool(0.5)).collect();
        let lhs = hamming(&ds_recover(&g, &d), &ds_recover(&g, &e))?;
        out.push(Check::int(&format!("fixture {f}: Lipschitz"), lhs as u128, "<=", hamming(&d, &e)? as u128));
    }
    Ok(out)
}

fn ds_padded(r: &mut Stream) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for f in 0..10 {
        let j = feasible_instance(r, 5, 4);
        let toggle = Swap::MembershipToggle { element: r.gen_range(0..5), set: r.gen_range(0..4) };
        let k = j.apply_swap(&toggle)?;
        let (gamma, target) = (5, 14);
        let h0 = ds_pad(&ds_transform(&j, gamma)?, target, gamma + 1)?;
        let h1 = ds_pad(&ds_transform(&k, gamma)?, target, gamma + 1)?;
        out.push(Check::int(&format!("fixture {f}: edge difference"), h0.edge_difference(&h1)? as u128, "=", 1));
        let d: BTreeSet<usize> = (0..target).filter(|_| r.gen_bool(0.4)).collect();
        let drift = hamming(&ds_recover(&h0, &d), &ds_recover(&h1, &d))?;
        out.push(Check::int(&format!("fixture {f}: toggle drift"), drift as u128, "<=", 2));
        let pb = pullback_check(&GreedyDomSet, &j, &k, gamma, target, 1 << 10)?;
        out.push(Check::rat(&format!("fixture {f}: pullback"), pb.pulled_emd, "<=", pb.bound));
    }
    Ok(out)
}

fn ikw_blowup(r: &mut Stream) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let bases = gen::small_regular_graphs();
    for f in 0..10 {
        let (n, edges) = &bases[f % bases.len()];
        let (csp, _) = gen::planted_csp(*n, edges, 2, 0.5, r);
        let p = IkwParams::new(2, 1, q(1, 4), *n);
        let mode = IkwMode::Exhaustive { budget: DEFAULT_IKW_BUDGET };
        let a = IkwInstance::build(&csp, p.clone(), mode)?;
        let swapped = csp.apply_swap(&gen::random_csp_swap(&csp, r))?;
        let b = IkwInstance::build(&swapped, p, mode)?;
        out.push(Check::rat(
            &format!("fixture {f}: predicate change fraction"),
            predicate_change_fraction(&a, &b)?,
            "=",
            blowup_fraction(csp.n_constraints(), 2, 1),
        ));
    }
    Ok(out)
}

fn dr_structure(r: &mut Stream) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for f in 0..10 {
        let i = gen::random_label_cover(6, 2, 3, 2, 12, 0.7, r);
        let d = 4;
        if i.right_degrees().into_iter().min().unwrap_or(0) < d {
            continue;
        }
        let pkg = ExpanderPackage::for_instance(&i, d, 0.9, f, 32)?;
        let (a, _) = reduce::degree_reduce(&i, d, &pkg)?;
        let s = gen::random_swap(&i, false, r);
        let (b, _) = reduce::degree_reduce(&i.apply_swap(&s)?, d, &pkg)?;
        out.push(Check::int(&format!("fixture {f}: swap factor"), a.swap_distance(&b)? as u128, "=", d as u128));
    }
    Ok(out)
}

fn ar_structure(r: &mut Stream) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for f in 0..12 {
        let sigma = 2 + f % 3;
        let code = build_code(sigma, q(1, 2))?;
        let k = code.block_length;
        let i = gen::random_label_cover(3, 3, 3, sigma, 6, 0.7, r);
        let a = reduce::alphabet_reduce(&i, &code)?;
        let s = gen::random_swap(&i, true, r);
        let b = reduce::alphabet_reduce(&i.apply_swap(&s)?, &code)?;
        let dist = a.swap_distance(&b)? as u128;
        match s {
            Swap::Predicate { .. } => out.push(Check::int(&format!("fixture {f}: predicate swap factor"), dist, "=", 1)),
            _ if sigma <= k => {
                // One-digit messages: distinct codewords differ everywhere.
                out.push(Check::int(&format!("fixture {f}: projection swap factor"), dist, "=", k as u128))
            }
            _ => {
                let floor = (code.min_distance * Rational::from_integer(k as i128)).ceil().to_integer() as u128;
                out.push(Check::int(&format!("fixture {f}: projection swap factor"), dist, "<=", k as u128));
                out.push(Check::int(&format!("fixture {f}: projection swap floor"), dist, ">=", floor));
            }
        }
    }
    Ok(out)
}

fn comp_recovery(r: &mut Stream) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for f in 0..10 {
        let (i, pi) = gen::planted_label_cover(3, 2, 3, 2, 6, 0.6, r);
        let dec = compose::toy_decoder(i.left_degrees().into_iter().max().unwrap_or(1), 2);
        let c = compose::compose(&i, &dec)?;
        let honest = compose::honest_assignment(&i, &dec, &c, &pi);
        out.push(Check::rat(&format!("fixture {f}: honest value"), c.value(&honest)?, "=", one()));
        let mut other = honest.clone();
        for row in other.left.iter_mut() {
            for x in row.iter_mut() {
                *x = r.gen_range(0..2);
            }
        }
        let same = compose::comp_law(&i, &dec, &honest)? == compose::comp_law(&i, &dec, &other)?;
        out.push(Check::flag(&format!("fixture {f}: left-label independence"), same));
    }
    Ok(out)
}

fn set_systems() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for m in 1..=4 {
        for l in 1..=3 {
            let mut s = build_set_system(m, l, (m * 10 + l) as u64, DEFAULT_VERIFY_BUDGET)?;
            let ok = verify_set_system(&mut s, l, DEFAULT_VERIFY_BUDGET)?;
            out.push(Check::flag(&format!("random ({m},{l}) system"), ok));
            let mut h = hypercube_set_system(m, l.min(m + 1), DEFAULT_VERIFY_BUDGET)?;
            let ok = verify_set_system(&mut h, l.min(m + 1), DEFAULT_VERIFY_BUDGET)?;
            out.push(Check::flag(&format!("hypercube ({m},{}) system", l.min(m + 1)), ok));
        }
    }
    Ok(out)
}

fn codes() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (sigma, delta) in [(2, q(1, 2)), (3, q(1, 2)), (4, q(1, 3)), (5, q(1, 10)), (8, q(1, 4)), (16, q(1, 8))] {
        let c = build_code(sigma, delta)?;
        out.push(Check::rat(
            &format!("code σ={sigma} δ={}", rational::fmt(&delta)),
            verify_code(&c),
            ">=",
            one() - c.declared_delta,
        ));
    }
    Ok(out)
}

fn expanders() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for d in 2..=8 {
        let g = RegularGraph::complete(d + 1)?;
        let err = (g.lambda() - 1.0 / d as f64).abs();
        out.push(Check::flag(&format!("K_{} λ within 1e-10 of 1/{d}", d + 1), err < 1e-10));
    }
    for (n, d) in [(8, 4), (12, 4), (16, 6)] {
        let b = build_expander(n, d, 0.95, n as u64, 32)?;
        out.push(Check::flag(&format!("random ({n},{d}) expander reports λ < 1"), b.graph.lambda() < 1.0));
    }
    Ok(out)
}

fn random_dist(r: &mut Stream) -> Result<EmpiricalDistribution<Vec<Label>>> {
    let k = r.gen_range(1..4);
    let mut w: Vec<i128> = (0..k).map(|_| r.gen_range(1..5)).collect();
    let total: i128 = w.iter().sum();
    let entries = w
        .drain(..)
        .map(|x| ((0..3).map(|_| r.gen_range(0..2)).collect::<Vec<Label>>(), Rational::new(x, total)))
        .collect();
    EmpiricalDistribution::new(entries)
}

fn emd_metric(r: &mut Stream) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for t in 0..50 {
        let (a, b, c) = (random_dist(r)?, random_dist(r)?, random_dist(r)?);
        let ab = emd_exact(&a, &b, DEFAULT_EMD_BUDGET)?;
        let ba = emd_exact(&b, &a, DEFAULT_EMD_BUDGET)?;
        let bc = emd_exact(&b, &c, DEFAULT_EMD_BUDGET)?;
        let ac = emd_exact(&a, &c, DEFAULT_EMD_BUDGET)?;
        out.push(Check::rat(&format!("triple {t}: symmetry"), ab, "=", ba));
        out.push(Check::rat(&format!("triple {t}: triangle"), ac, "<=", ab + bc));
        out.push(Check::rat(&format!("triple {t}: identity"), emd_exact(&a, &a, DEFAULT_EMD_BUDGET)?, "=", rational::zero()));
    }
    Ok(out)
}

/// Uniform random assignment over a small seed space, mixing in the
/// instance content so that swaps move the output law.
struct HashedRandom;

impl RandomizedAlgorithm<LabelCoverInstance> for HashedRandom {
    type Output = crate::lc::Assignment;
    fn seed_space(&self) -> u64 {
        4
    }
    fn run(&self, inst: &LabelCoverInstance, seed: u64) -> crate::lc::Assignment {
        let h = crate::hash::content_hash(inst);
        let salt = u64::from_str_radix(&h[..16], 16).unwrap_or(0);
        let mut s = rng::stream(salt ^ seed, 0);
        gen::random_assignment(inst.n_left(), inst.n_right(), inst.sigma_left(), inst.sigma_right(), &mut s)
    }
}

fn neighboring(r: &mut Stream) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for t in 0..10 {
        let i = gen::random_label_cover(2, 2, 2, 2, 3, 0.7, r);
        let mut j = i.clone();
        while i.swap_distance(&j)? < 3 {
            j = j.apply_swap(&gen::random_swap(&j, true, r))?;
        }
        let w = neighboring_witness(&HashedRandom, &i, &j, DEFAULT_EMD_BUDGET)?;
        out.push(Check::rat(
            &format!("pair {t}: step EMD × swap distance"),
            w.emd_at_step * Rational::from_integer(w.swap_distance as i128),
            ">=",
            w.total_emd,
        ));
    }
    Ok(out)
}
