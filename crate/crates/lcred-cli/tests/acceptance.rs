//! Acceptance run: one PASS/FAIL line per criterion. Quantities are
//! recomputed here with small independent oracles (direct enumeration,
//! hand-rolled binomials and eigenvalue iteration) rather than read back
//! from the library's own report fields wherever that is feasible.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use lcred::compose::{self, ComposedAssignment};
use lcred::covering::balance::{balance, BalanceMode, DEFAULT_BALANCE_EDGE_BUDGET};
use lcred::covering::domset::{self, cover_to_domset, ds_opt, ds_pad, ds_recover, ds_transform};
use lcred::covering::exact::DEFAULT_NODE_BUDGET;
use lcred::covering::setcover::{sc_law, sc_opt, sc_selection, sc_transform, ScLayout, SetCoverInstance};
use lcred::gadgets::code::build_code;
use lcred::gadgets::expander::{build_expander, RegularGraph};
use lcred::gadgets::setsystem::{build_set_system, hypercube_set_system, SetSystem, DEFAULT_VERIFY_BUDGET};
use lcred::gen;
use lcred::ikw::{IkwInstance, IkwMode, IkwParams, DEFAULT_IKW_BUDGET};
use lcred::lc::{Assignment, Label, LabelCoverInstance, Swap, Swappable};
use lcred::metrics::{
    emd_exact, hamming, neighboring_witness, output_distribution, CoinLaw, EmpiricalDistribution, RandomizedAlgorithm,
    DEFAULT_EMD_BUDGET,
};
use lcred::pipeline::{load_artifact, Artifact, Report};
use lcred::rational::{one, q, zero};
use lcred::reduce::{self, ExpanderPackage, GadgetContext};
use lcred::rng::{self, Stream};
use lcred::Rational;
use rand::Rng;

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn le(&mut self, lhs: Rational, rhs: Rational, what: &str) {
        self.check(lhs <= rhs, || format!("{what}: {lhs} > {rhs}"));
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, lhs: T, rhs: T, what: &str) {
        let ok = lhs == rhs;
        self.check(ok, || format!("{what}: {lhs:?} != {rhs:?}"));
    }

    fn ok<T>(&mut self, r: lcred::Result<T>, what: &str) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(false, || format!("{what}: {e}"));
                None
            }
        }
    }
}

fn main() {
    let criteria: [(&str, fn() -> Tally); 8] = [
        ("completeness chain", criterion_1),
        ("swap-factor exactness", criterion_2),
        ("recovery Lipschitz and drift constants", criterion_3),
        ("slice soundness", criterion_4),
        ("IKW blowup", criterion_5),
        ("gadget certificates", criterion_6),
        ("sensitivity harness correctness", criterion_7),
        ("end-to-end demo", criterion_8),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let t = run();
        let pass = t.failures.is_empty();
        all &= pass;
        println!(
            "criterion {}: {} {name}: {} checks, {} failed ({:.2}s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            t.checks,
            t.failures.len(),
            t0.elapsed().as_secs_f64()
        );
        for n in &t.notes {
            println!("    note: {n}");
        }
        for f in t.failures.iter().take(5) {
            println!("    failed: {f}");
        }
    }
    if !all {
        std::process::exit(1);
    }
}

fn planted_base(f: u64, seed: u64) -> (usize, lcred::TwoCspInstance, Vec<Label>) {
    let bases = gen::small_regular_graphs();
    let (n, edges) = &bases[f as usize % bases.len()];
    let (csp, planted) = gen::planted_csp(*n, edges, 2, 0.5, &mut rng::stream(seed, rng::task::GENERATOR));
    (*n, csp, planted)
}

fn ikw_of(csp: &lcred::TwoCspInstance, n: usize, k: usize, kp: usize) -> lcred::Result<IkwInstance> {
    IkwInstance::build(csp, IkwParams::new(k, kp, q(1, 4), n), IkwMode::Exhaustive { budget: DEFAULT_IKW_BUDGET })
}

fn max_left_degree(i: &LabelCoverInstance) -> usize {
    i.left_degrees().into_iter().max().unwrap_or(1)
}

// ---------------------------------------------------------------- 1

fn criterion_1() -> Tally {
    let mut t = Tally::default();
    let t0 = Instant::now();
    let sys = hypercube_set_system(2, 2, DEFAULT_VERIFY_BUDGET).expect("hypercube system");
    let code = build_code(2, q(1, 2)).expect("binary code");
    let mut exact_ds = 0;
    let steep = GadgetContext { branch_constant: q(1, 10), ..GadgetContext::default() };
    for f in 0..100u64 {
        let (n, csp, planted) = planted_base(f, 1000 + f);
        t.eq(csp.value(&planted).ok(), Some(one()), &format!("fixture {f}: planted base"));
        let Some(ikw) = t.ok(ikw_of(&csp, n, 2, 1), &format!("fixture {f}: ikw")) else { continue };
        let lc = ikw.lc();
        let pi = ikw.lift(&planted);
        t.eq(lc.value(&pi).ok(), Some(one()), &format!("fixture {f}: ikw lift"));

        let pkg = ExpanderPackage::for_instance(lc, 4, 0.9, f, 32);
        if let Some(pkg) = t.ok(pkg, &format!("fixture {f}: expander package")) {
            if let Some((dr, shape)) = t.ok(reduce::degree_reduce(lc, 4, &pkg), &format!("fixture {f}: dr")) {
                t.eq(dr.value(&reduce::dr_lift(&pi, &shape)).ok(), Some(one()), &format!("fixture {f}: dr lift"));
            }
        }
        if let Some(ar) = t.ok(reduce::alphabet_reduce(lc, &code), &format!("fixture {f}: ar")) {
            t.eq(ar.value(&reduce::ar_lift(&pi, &code)).ok(), Some(one()), &format!("fixture {f}: ar lift"));
        }
        for ctx in [GadgetContext::default(), steep.clone()] {
            if let Some((out, h)) = t.ok(reduce::reduce_combined(lc, q(1, 25), &ctx), &format!("fixture {f}: red")) {
                t.eq(out.value(&h.lift(&pi)).ok(), Some(one()), &format!("fixture {f}: red lift"));
            }
        }

        let dec = compose::toy_decoder(max_left_degree(lc), lc.sigma_right());
        if let Some(c) = t.ok(compose::compose(lc, &dec), &format!("fixture {f}: compose")) {
            let honest = compose::honest_assignment(lc, &dec, &c, &pi);
            t.eq(c.value(&honest).ok(), Some(one()), &format!("fixture {f}: composed honest"));
        }

        let Some((j, lay)) = t.ok(sc_transform(lc, &sys), &format!("fixture {f}: sc")) else { continue };
        let sel = sc_selection(&lay, &pi);
        t.check(j.is_cover(&sel), || format!("fixture {f}: planted selection does not cover"));
        t.eq(sel.len(), lc.n_left() + lc.n_right(), &format!("fixture {f}: planted cover size"));

        let gamma = j.max_set_size().max(j.max_frequency());
        let Some(g) = t.ok(ds_transform(&j, gamma), &format!("fixture {f}: ds")) else { continue };
        let helpers = j.n_sets().div_ceil(gamma);
        t.eq(g.n_vertices(), j.n_elements() + j.n_sets() + helpers, &format!("fixture {f}: |V(G)|"));
        let extra = 1 + f as usize % 7;
        let Some(h) = t.ok(ds_pad(&g, g.n_vertices() + extra, gamma + 1), &format!("fixture {f}: pad")) else {
            continue;
        };
        let Some(sc) = t.ok(sc_opt(&j, Some(&sel), DEFAULT_NODE_BUDGET), &format!("fixture {f}: sc oracle")) else {
            continue;
        };
        // An explicit dominating set built from an optimal cover certifies
        // ds(H) ≤ sc + ⌈m/Γ⌉ + pad without solving domset exactly.
        let opt_cover: BTreeSet<usize> = sc.witness.iter().copied().collect();
        let mut witness = cover_to_domset(&h, &opt_cover);
        witness.extend(cover_to_domset(&h, &BTreeSet::new()));
        let pad = extra.div_ceil(gamma + 1);
        t.check(h.is_dominating(&witness), || format!("fixture {f}: padded witness does not dominate"));
        t.check(witness.len() <= sc.size + helpers + pad, || {
            format!("fixture {f}: witness {} > sc {} + {helpers} + pad {pad}", witness.len(), sc.size)
        });
        // The lower side is confirmed wherever the exact search fits a small budget.
        if let Ok(ds) = ds_opt(&h, Some(&witness), 1 << 14) {
            exact_ds += 1;
            t.check(sc.size + pad <= ds.size && ds.size <= sc.size + helpers + pad, || {
                format!("fixture {f}: sc {} + pad {pad} vs ds(H) {} with {helpers} helpers", sc.size, ds.size)
            });
        }
    }
    t.notes.push(format!("ds(H) solved exactly on {exact_ds}/100 fixtures; the rest certified by explicit witnesses"));
    let el = t0.elapsed();
    t.notes.push(format!("runtime {:.2}s against the 60s target", el.as_secs_f64()));
    t.check(el < Duration::from_secs(60), || format!("runtime {el:?} exceeds 60s"));
    t
}

// ---------------------------------------------------------------- 2

fn random_predicate_swap(i: &LabelCoverInstance, r: &mut Stream) -> Swap {
    loop {
        if let s @ Swap::Predicate { .. } = gen::random_swap(i, true, r) {
            return s;
        }
    }
}

fn criterion_2() -> Tally {
    let mut t = Tally::default();
    let code = build_code(2, q(1, 2)).expect("binary code");
    let sys = hypercube_set_system(2, 2, DEFAULT_VERIFY_BUDGET).expect("hypercube system");
    for p in 0..50u64 {
        let (n, csp, _) = planted_base(p, 2000 + p);
        let Some(ikw) = t.ok(ikw_of(&csp, n, 2, 1), &format!("pair {p}: ikw")) else { continue };
        let lc = ikw.lc();
        let r = &mut rng::stream(3000 + p, 0);
        let proj = gen::random_swap(lc, false, r);
        let pred = random_predicate_swap(lc, r);
        let lc_proj = lc.apply_swap(&proj).expect("valid swap");
        let lc_pred = lc.apply_swap(&pred).expect("valid swap");

        let d = 4;
        if let Some(pkg) = t.ok(ExpanderPackage::for_instance(lc, d, 0.9, p, 32), &format!("pair {p}: package")) {
            let base = reduce::degree_reduce(lc, d, &pkg).map(|x| x.0);
            let a = reduce::degree_reduce(&lc_proj, d, &pkg).map(|x| x.0);
            let b = reduce::degree_reduce(&lc_pred, d, &pkg).map(|x| x.0);
            if let (Ok(base), Ok(a), Ok(b)) = (base, a, b) {
                t.eq(base.swap_distance(&a).ok(), Some(d), &format!("pair {p}: dr projection swap"));
                t.eq(base.swap_distance(&b).ok(), Some(1), &format!("pair {p}: dr predicate swap"));
            } else {
                t.check(false, || format!("pair {p}: dr failed"));
            }
        }

        let k = code.block_length;
        let base = reduce::alphabet_reduce(lc, &code).expect("ar");
        let a = reduce::alphabet_reduce(&lc_proj, &code).expect("ar");
        let b = reduce::alphabet_reduce(&lc_pred, &code).expect("ar");
        t.eq(base.swap_distance(&a).ok(), Some(k), &format!("pair {p}: ar projection swap"));
        t.eq(base.swap_distance(&b).ok(), Some(1), &format!("pair {p}: ar predicate swap"));

        let dec = compose::toy_decoder(max_left_degree(lc), lc.sigma_right());
        let c_t = compose::composition_constants(lc, &dec).c_t;
        let s = if p % 2 == 0 { &lc_proj } else { &lc_pred };
        if let (Ok(x), Ok(y)) = (compose::compose(lc, &dec), compose::compose(s, &dec)) {
            match x.swap_distance(&y) {
                Ok((dp, dq)) => {
                    t.eq(dp, 0, &format!("pair {p}: composed projection changes"));
                    t.check(dq <= c_t, || format!("pair {p}: {dq} composed predicate changes > C_T = {c_t}"));
                }
                Err(e) => t.check(false, || format!("pair {p}: composed swap distance: {e}")),
            }
        } else {
            t.check(false, || format!("pair {p}: compose failed"));
        }

        let (j, _) = sc_transform(lc, &sys).expect("sc");
        let toggle = Swap::MembershipToggle { element: r.gen_range(0..j.n_elements()), set: r.gen_range(0..j.n_sets()) };
        let j2 = j.apply_swap(&toggle).expect("toggle");
        let gamma = [j.max_set_size(), j.max_frequency(), j2.max_set_size(), j2.max_frequency()].into_iter().max().unwrap();
        let (g1, g2) = (ds_transform(&j, gamma).expect("ds"), ds_transform(&j2, gamma).expect("ds"));
        match g1.edge_difference(&g2) {
            Ok(e) => t.check(e <= 1, || format!("pair {p}: toggle moved {e} edges")),
            Err(e) => t.check(false, || format!("pair {p}: edge difference: {e}")),
        }
    }
    t
}

// ---------------------------------------------------------------- 3

/// Expected per-side Hamming distance when both laws read the same coins,
/// by enumerating every coin vector.
fn shared_coin_distance(a: &CoinLaw, b: &CoinLaw) -> (Rational, Rational, usize) {
    let radices = a.radices();
    assert_eq!(radices, b.radices(), "shared coins need equal radices");
    let sites = radices.iter().filter(|&&r| r > 1).count();
    let total: usize = radices.iter().product();
    let mut coins = vec![0usize; radices.len()];
    let (mut l, mut r) = (0i128, 0i128);
    for _ in 0..total {
        let (x, y) = (a.with_coins(&coins), b.with_coins(&coins));
        l += x.left.iter().zip(&y.left).filter(|(p, q)| p != q).count() as i128;
        r += x.right.iter().zip(&y.right).filter(|(p, q)| p != q).count() as i128;
        for (c, &rad) in coins.iter_mut().zip(&radices).rev() {
            *c += 1;
            if *c < rad {
                break;
            }
            *c = 0;
        }
    }
    (Rational::new(l, total as i128), Rational::new(r, total as i128), sites)
}

fn enumerated_emd(a: &CoinLaw, b: &CoinLaw) -> lcred::Result<Rational> {
    emd_exact(&a.enumerate(1 << 16)?, &b.enumerate(1 << 16)?, DEFAULT_EMD_BUDGET)
}

fn perturb(pi: &Assignment, sl: usize, sr: usize, h: usize, right_only: bool, r: &mut Stream) -> Assignment {
    let mut out = pi.clone();
    let mut touched = BTreeSet::new();
    let slots = if right_only { pi.right.len() } else { pi.left.len() + pi.right.len() };
    while touched.len() < h.min(slots) {
        touched.insert(r.gen_range(0..slots));
    }
    for &s in &touched {
        let (v, sigma) = match (right_only, s < pi.left.len()) {
            (false, true) => (&mut out.left[s], sl),
            (false, false) => (&mut out.right[s - pi.left.len()], sr),
            (true, _) => (&mut out.right[s], sr),
        };
        *v = (*v + 1 + r.gen_range(0..sigma - 1) as Label) % sigma as Label;
    }
    out
}

/// Label cover where right vertex v has exactly `degs[v]` edges.
fn right_degree_lc(n_left: usize, degs: &[usize], sl: usize, sr: usize, r: &mut Stream) -> LabelCoverInstance {
    let mut edges = Vec::new();
    for (v, &d) in degs.iter().enumerate() {
        for _ in 0..d {
            edges.push((r.gen_range(0..n_left), v));
        }
    }
    let projections = edges.iter().map(|_| (0..sl).map(|_| r.gen_range(0..sr) as Label).collect()).collect();
    let predicates = (0..n_left).map(|_| (0..sl).map(|_| r.gen_bool(0.8)).collect()).collect();
    LabelCoverInstance::new(n_left, degs.len(), sl, sr, edges, projections, predicates).expect("valid")
}

fn criterion_3() -> Tally {
    let mut t = Tally::default();
    let r = &mut rng::stream(77, 0);
    let mut max_sites = 0;

    // Degree reduction.
    for f in 0..20u64 {
        let degs: Vec<usize> = (0..3).map(|_| r.gen_range(4..=6)).collect();
        let src = right_degree_lc(3, &degs, 2, 2, r);
        let pkg = ExpanderPackage::for_instance(&src, 4, 0.9, f, 32).expect("package");
        let (out, shape) = reduce::degree_reduce(&src, 4, &pkg).expect("dr");
        let pi = gen::random_assignment(out.n_left(), out.n_right(), 2, 2, r);
        let min_deg = *degs.iter().min().unwrap() as i128;
        for right_only in [false, true] {
            let h = r.gen_range(1..=4);
            let pt = perturb(&pi, 2, 2, h, right_only, r);
            let (a, b) = (reduce::dr_law(&pi, &shape).expect("law"), reduce::dr_law(&pt, &shape).expect("law"));
            let (l, rr, sites) = shared_coin_distance(&a, &b);
            max_sites = max_sites.max(sites);
            let h = hamming(&pi, &pt).expect("same shape") as i128;
            t.le(l + rr, Rational::from_integer(h), &format!("dr fixture {f}: coupled distance vs h"));
            if right_only {
                t.le(rr, Rational::new(h, min_deg), &format!("dr fixture {f}: right factor vs 1/δ_V"));
            }
        }
    }

    // Alphabet reduction.
    let code = build_code(2, q(1, 2)).expect("code");
    for f in 0..20u64 {
        let src = gen::random_label_cover(3, 3, 3, 2, 7, 0.8, r);
        let out = reduce::alphabet_reduce(&src, &code).expect("ar");
        let pi = gen::random_assignment(out.n_left(), out.n_right(), 3, 2, r);
        let pt = perturb(&pi, 3, 2, r.gen_range(1..=3), false, r);
        let (a, b) = (reduce::ar_law(&src, &pi).expect("law"), reduce::ar_law(&src, &pt).expect("law"));
        let (l, rr, sites) = shared_coin_distance(&a, &b);
        max_sites = max_sites.max(sites);
        let big_delta = max_left_degree(&src) as i128;
        let small_delta = src.right_degrees().into_iter().min().unwrap() as i128;
        let h = hamming(&pi, &pt).expect("same shape") as i128;
        let bound = (one() + Rational::new(big_delta, small_delta)) * Rational::from_integer(h);
        t.le(l + rr, bound, &format!("ar fixture {f}: coupled distance vs (1+Δ_U/δ_V)h"));
        let swapped = src.apply_swap(&gen::random_swap(&src, true, r)).expect("swap");
        match enumerated_emd(&a, &reduce::ar_law(&swapped, &pi).expect("law")) {
            Ok(e) => t.le(e, Rational::new(1, small_delta), &format!("ar fixture {f}: source-swap drift")),
            Err(e) => t.check(false, || format!("ar fixture {f}: {e}")),
        }
    }

    // Set cover.
    let sys = hypercube_set_system(2, 2, DEFAULT_VERIFY_BUDGET).expect("system");
    for f in 0..20u64 {
        let src = gen::random_label_cover(2, 2, 2, 2, 3, 0.8, r);
        let (j, lay) = sc_transform(&src, &sys).expect("sc");
        let c: BTreeSet<usize> = (0..j.n_sets()).filter(|_| r.gen_bool(0.5)).collect();
        let mut c2 = c.clone();
        let h = r.gen_range(1..=3);
        while c.symmetric_difference(&c2).count() < h {
            let x = r.gen_range(0..j.n_sets());
            if !c2.remove(&x) {
                c2.insert(x);
            }
        }
        let (a, b) = (sc_law(&src, &lay, &c), sc_law(&src, &lay, &c2));
        max_sites = max_sites.max(a.coin_sites()).max(b.coin_sites());
        match enumerated_emd(&a, &b) {
            Ok(e) => t.le(e, Rational::from_integer(h as i128), &format!("sc fixture {f}: Lipschitz")),
            Err(e) => t.check(false, || format!("sc fixture {f}: {e}")),
        }
        let swapped = src.apply_swap(&random_predicate_swap(&src, r)).expect("swap");
        match enumerated_emd(&a, &sc_law(&swapped, &lay, &c)) {
            Ok(e) => t.le(e, one(), &format!("sc fixture {f}: predicate-swap drift")),
            Err(e) => t.check(false, || format!("sc fixture {f}: {e}")),
        }
    }

    // Dominating set: every subset and every single flip of a 10-vertex graph.
    for f in 0..4u64 {
        let j = loop {
            let sets = (0..4).map(|_| (0..5).filter(|_| r.gen_bool(0.4)).collect()).collect();
            let j = SetCoverInstance::new(5, sets).expect("in range");
            if j.is_feasible() {
                break j;
            }
        };
        let toggled = j.apply_swap(&Swap::MembershipToggle { element: r.gen_range(0..5), set: r.gen_range(0..4) }).unwrap();
        let (g, g2) = (ds_transform(&j, 5).expect("ds"), ds_transform(&toggled, 5).expect("ds"));
        let nv = g.n_vertices();
        for mask in 0u32..(1 << nv) {
            let d: BTreeSet<usize> = (0..nv).filter(|&x| mask >> x & 1 == 1).collect();
            let rd = ds_recover(&g, &d);
            for x in 0..nv {
                let mut e = d.clone();
                if !e.remove(&x) {
                    e.insert(x);
                }
                let moved = rd.symmetric_difference(&ds_recover(&g, &e)).count();
                t.check(moved <= 1, || format!("ds fixture {f}: one flip moved {moved}"));
            }
            let drift = rd.symmetric_difference(&ds_recover(&g2, &d)).count();
            t.check(drift <= 2, || format!("ds fixture {f}: toggle drift {drift}"));
        }
    }

    // Composition: recovery never reads composed left labels.
    for f in 0..20u64 {
        let (src, pi) = gen::planted_label_cover(2, 2, 3, 2, 4, 0.7, r);
        let dec = compose::toy_decoder(max_left_degree(&src), 2);
        let c = compose::compose(&src, &dec).expect("compose");
        let honest = compose::honest_assignment(&src, &dec, &c, &pi);
        let scrambled = ComposedAssignment {
            left: honest.left.iter().map(|row| row.iter().map(|_| r.gen_range(0..2)).collect()).collect(),
            right: honest.right.clone(),
        };
        let a = compose::comp_law(&src, &dec, &honest);
        let b = compose::comp_law(&src, &dec, &scrambled);
        t.check(matches!((&a, &b), (Ok(x), Ok(y)) if x == y), || format!("comp fixture {f}: law depends on left labels"));
    }
    t.notes.push(format!("largest recovery coin-site count enumerated: {max_sites}"));
    t.check(max_sites <= 12, || format!("{max_sites} coin sites exceed 12"));
    t
}

// ---------------------------------------------------------------- 4

/// Label sets read straight off the selection: L_u keeps predicate-true
/// labels only; empty sets fall back to label 0.
fn label_sets(i: &LabelCoverInstance, lay: &ScLayout, sel: &BTreeSet<usize>) -> (Vec<Vec<Label>>, Vec<Vec<Label>>) {
    let mut lu = vec![Vec::new(); i.n_left()];
    let mut lv = vec![Vec::new(); i.n_right()];
    for &s in sel {
        let (is_left, vertex, label) = lay.decode_set(s);
        if is_left {
            if i.predicate(vertex)[label as usize] {
                lu[vertex].push(label);
            }
        } else {
            lv[vertex].push(label);
        }
    }
    (lu, lv)
}

/// Per-edge (t_e, exact satisfaction probability) by enumerating L_u × L_v.
fn edge_slices(i: &LabelCoverInstance, lay: &ScLayout, sel: &BTreeSet<usize>) -> Vec<(usize, Rational)> {
    let (lu, lv) = label_sets(i, lay, sel);
    i.edges()
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            let t = lu[u].len() + lv[v].len();
            let a = if lu[u].is_empty() { vec![0] } else { lu[u].clone() };
            let b = if lv[v].is_empty() { vec![0] } else { lv[v].clone() };
            let hits = a
                .iter()
                .flat_map(|&y| b.iter().map(move |&x| (y, x)))
                .filter(|&(y, x)| i.predicate(u)[y as usize] && i.projection(e)[y as usize] == x)
                .count();
            (t, Rational::new(hits as i128, (a.len() * b.len()) as i128))
        })
        .collect()
}

/// A cover from a planted selection plus extra indices that keep t_e ≤ l.
fn slice_cover(
    i: &LabelCoverInstance,
    pi: &Assignment,
    sys: &SetSystem,
    l: usize,
    r: &mut Stream,
) -> (SetCoverInstance, ScLayout, BTreeSet<usize>) {
    let (j, lay) = sc_transform(i, sys).expect("sc");
    let mut sel = sc_selection(&lay, pi);
    for _ in 0..6 {
        let mut trial = sel.clone();
        trial.insert(r.gen_range(0..j.n_sets()));
        if edge_slices(i, &lay, &trial).iter().all(|&(t, _)| t <= l) {
            sel = trial;
        }
    }
    (j, lay, sel)
}

fn criterion_4() -> Tally {
    let mut t = Tally::default();
    let r = &mut rng::stream(44, 0);
    let mut edges_checked = 0;
    for f in 0..20u64 {
        let m = 2 + f as usize % 3;
        let l = 2 + f as usize % 2;
        let sys = build_set_system(m, l, f, DEFAULT_VERIFY_BUDGET).expect("set system");
        let (i, pi) = gen::planted_label_cover(3, 3, 4, m, 6, 0.6, r);
        let (j, lay, sel) = slice_cover(&i, &pi, &sys, l, r);
        t.check(j.is_cover(&sel), || format!("fixture {f}: not a cover"));
        let floor = Rational::new(4, (l * l) as i128);
        let slices = edge_slices(&i, &lay, &sel);
        for (e, &(te, p)) in slices.iter().enumerate() {
            t.check(te <= l, || format!("fixture {f} edge {e}: t_e = {te} > l = {l}"));
            t.le(floor, p, &format!("fixture {f} edge {e}: slice probability"));
            edges_checked += 1;
        }
        let mean = slices.iter().map(|&(_, p)| p).sum::<Rational>() / Rational::from_integer(slices.len() as i128);
        let law = sc_law(&i, &lay, &sel);
        t.eq(law.expected_value(&i).ok(), Some(mean), &format!("fixture {f}: expected value vs edge mean"));
        t.le(Rational::new(2, (l * l) as i128), mean, &format!("fixture {f}: aggregate"));
    }

    // Balanced fixtures for the aggregate under the size hypothesis
    // |cover| ≤ (l/8)(|U|+|V|).
    let (mut hyp_met, mut min_ratio) = (0, None::<Rational>);
    for f in 0..20u64 {
        let m = 2 + f as usize % 3;
        let l = 2 + f as usize % 2;
        let sys = build_set_system(m, l, 100 + f, DEFAULT_VERIFY_BUDGET).expect("set system");
        let (i, pi) = gen::planted_label_cover(2, 2, 3, m, 3, 0.6, r);
        let Some((b, h)) = t.ok(balance(&i, BalanceMode::Minimal, DEFAULT_BALANCE_EDGE_BUDGET), "balance") else { continue };
        let lifted = h.lift(&pi);
        let (j, lay, sel) = slice_cover(&b, &lifted, &sys, l, r);
        let size_cap = Rational::new((l * (b.n_left() + b.n_right())) as i128, 8);
        let law = sc_law(&b, &lay, &sel);
        let ev = law.expected_value(&b).expect("edges");
        if let Ok(dist) = law.enumerate(1 << 16) {
            let by_enum = dist.expectation(|a| b.value(a).unwrap_or_default());
            t.eq(by_enum, ev, &format!("balanced fixture {f}: enumeration vs product formula"));
        }
        if Rational::from_integer(sel.len() as i128) <= size_cap {
            hyp_met += 1;
            t.le(Rational::new(2, (l * l) as i128), ev, &format!("balanced fixture {f}: aggregate"));
        }
        if let Ok(best) = sc_opt(&j, Some(&sel), DEFAULT_NODE_BUDGET) {
            let ratio = Rational::from_integer(best.size as i128) / size_cap;
            min_ratio = Some(min_ratio.map_or(ratio, |x| x.min(ratio)));
        }
    }
    t.notes.push(format!("{edges_checked} edges met the exact 4/l² floor"));
    t.notes.push(format!(
        "size hypothesis met by {hyp_met}/20 balanced covers; smallest sc / ((l/8)(|U|+|V|)) = {}",
        min_ratio.map_or("n/a".into(), |x| x.to_string())
    ));
    t
}

// ---------------------------------------------------------------- 5

fn binom(n: i128, k: i128) -> i128 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn criterion_5() -> Tally {
    let mut t = Tally::default();
    let r = &mut rng::stream(55, 0);
    for f in 0..10u64 {
        let (k, kp) = if f % 3 == 2 { (3, 1) } else { (2, 1) };
        let (n, csp, _) = planted_base(f, 5000 + f);
        let swap = gen::random_csp_swap(&csp, r);
        let Swap::CspConstraint { constraint, .. } = &swap else { unreachable!() };
        let swapped = csp.apply_swap(&swap).expect("swap");
        let (Some(a), Some(b)) = (
            t.ok(ikw_of(&csp, n, k, kp), &format!("fixture {f}: ikw")),
            t.ok(ikw_of(&swapped, n, k, kp), &format!("fixture {f}: ikw")),
        ) else {
            continue;
        };
        let changed: BTreeSet<usize> = (0..a.lc().n_left()).filter(|&x| a.lc().predicate(x) != b.lc().predicate(x)).collect();
        let expected: BTreeSet<usize> =
            a.left_tuples().iter().enumerate().filter(|(_, tu)| tu.b_edges.contains(constraint)).map(|(x, _)| x).collect();
        t.eq(&changed, &expected, &format!("fixture {f}: changed predicates are the tuples hitting the swap"));
        let m = csp.n_constraints() as i128;
        let want = one() - Rational::new(binom(m - 1, (k - kp) as i128), binom(m, (k - kp) as i128));
        let got = Rational::new(changed.len() as i128, a.lc().n_left() as i128);
        t.eq(got, want, &format!("fixture {f}: change fraction (|E| = {m}, k = {k}, k' = {kp})"));
    }
    t
}

// ---------------------------------------------------------------- 6

/// No ≤ l literals without a complementary pair cover the universe.
fn set_system_ok(s: &SetSystem, l: usize) -> bool {
    let lits: Vec<(usize, bool, BTreeSet<usize>)> = (0..s.m())
        .flat_map(|i| [false, true].map(|c| (i, c, s.members(i, c).into_iter().collect())))
        .collect();
    fn search(lits: &[(usize, bool, BTreeSet<usize>)], from: usize, used: &mut Vec<usize>, acc: &BTreeSet<usize>, left: usize, n: usize) -> bool {
        if acc.len() == n {
            return false;
        }
        if left == 0 {
            return true;
        }
        for x in from..lits.len() {
            let (i, _, set) = &lits[x];
            if used.contains(i) {
                continue;
            }
            used.push(*i);
            let next: BTreeSet<usize> = acc.union(set).copied().collect();
            let ok = search(lits, x + 1, used, &next, left - 1, n);
            used.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    search(&lits, 0, &mut Vec::new(), &BTreeSet::new(), l, s.universe())
}

/// Second largest |eigenvalue| of A/d by power iteration on (A/d)² over 1⊥.
fn power_lambda(g: &RegularGraph) -> f64 {
    let n = g.n();
    let d = g.d() as f64;
    let step = |x: &[f64]| -> Vec<f64> {
        (0..n).map(|i| g.neighbors()[i].iter().map(|&j| x[j]).sum::<f64>() / d).collect()
    };
    let mut x: Vec<f64> = (0..n).map(|i| ((i * 7919 + 13) % 101) as f64 - 50.0).collect();
    let mut est = 0.0;
    for _ in 0..20000 {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= norm);
        let y = step(&step(&x));
        est = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        x = y;
    }
    est.max(0.0).sqrt()
}

fn criterion_6() -> Tally {
    let mut t = Tally::default();
    let mut systems = 0;
    for m in 1..=4 {
        for l in 1..=3 {
            let h = hypercube_set_system(m, l, DEFAULT_VERIFY_BUDGET).expect("hypercube");
            t.check(set_system_ok(&h, l), || format!("hypercube ({m},{l}) fails brute force"));
            systems += 1;
        }
    }
    for seed in 0..20u64 {
        let (m, l) = (2 + seed as usize % 3, 2 + seed as usize % 2);
        for s in [seed, 100 + seed] {
            let sys = build_set_system(m, l, s, DEFAULT_VERIFY_BUDGET).expect("random system");
            t.check(set_system_ok(&sys, l), || format!("random ({m},{l}) seed {s} fails brute force"));
            systems += 1;
        }
    }
    let mut codes = 0;
    for sigma in 2..=16 {
        for delta in [q(1, 2), q(1, 3), q(1, 4), q(1, 10), q(1, 100), q(1, 1_000_000)] {
            let Some(c) = t.ok(build_code(sigma, delta), &format!("code σ={sigma}")) else { continue };
            let k = c.block_length;
            let mut min = k;
            for a in 0..sigma {
                for b in a + 1..sigma {
                    min = min.min(c.codeword(a).iter().zip(c.codeword(b)).filter(|(x, y)| x != y).count());
                }
            }
            t.le(one() - delta, Rational::new(min as i128, k as i128), &format!("code σ={sigma} δ={delta}"));
            codes += 1;
        }
    }
    let mut worst_complete = 0f64;
    for d in 2..=12 {
        let g = RegularGraph::complete(d + 1).expect("complete graph");
        let err = (g.lambda() - 1.0 / d as f64).abs();
        worst_complete = worst_complete.max(err);
        t.check(err < 1e-10, || format!("K_{} λ off by {err:e}", d + 1));
    }
    let mut expanders = 0;
    for n in [5, 6, 8, 10, 12, 16] {
        for d in [4] {
            let b = build_expander(n, d, 0.95, n as u64, 32).expect("expander");
            let lam = b.graph.lambda();
            let regular = b.graph.n() == n && b.graph.neighbors().iter().all(|x| x.len() == d);
            t.check(regular, || format!("expander ({n},{d}) not {d}-regular on {n} vertices"));
            t.check(lam.is_finite() && (0.0..=1.0 + 1e-9).contains(&lam), || format!("expander ({n},{d}) λ = {lam}"));
            let other = power_lambda(&b.graph);
            t.check((other - lam).abs() < 1e-6, || format!("expander ({n},{d}): λ {lam} vs power iteration {other}"));
            expanders += 1;
        }
    }
    t.notes.push(format!(
        "{systems} set systems, {codes} codes, {expanders} random expanders; worst K_(d+1) deviation {worst_complete:e}"
    ));
    t
}

// ---------------------------------------------------------------- 7

fn random_distribution(r: &mut Stream) -> EmpiricalDistribution<Assignment> {
    let k = r.gen_range(1..=3);
    let w: Vec<i128> = (0..k).map(|_| r.gen_range(1..=6)).collect();
    let total: i128 = w.iter().sum();
    let entries = w
        .into_iter()
        .map(|x| (gen::random_assignment(1, 2, 2, 2, r), Rational::new(x, total)))
        .collect();
    EmpiricalDistribution::new(entries).expect("valid distribution")
}

/// Reads edge projections at seed-chosen left labels; right vertices copy
/// the projection of their first incident edge.
struct ProjectionReader;

impl RandomizedAlgorithm<LabelCoverInstance> for ProjectionReader {
    type Output = Assignment;
    fn seed_space(&self) -> u64 {
        4
    }
    fn run(&self, i: &LabelCoverInstance, seed: u64) -> Assignment {
        let left: Vec<Label> = (0..i.n_left()).map(|u| ((seed >> (u % 2)) & 1) as Label % i.sigma_left() as Label).collect();
        let mut right = vec![0; i.n_right()];
        for (e, &(u, v)) in i.edges().iter().enumerate().rev() {
            let a = left[u];
            right[v] = if i.predicate(u)[a as usize] { i.projection(e)[a as usize] } else { 0 };
        }
        Assignment::new(left, right)
    }
}

fn criterion_7() -> Tally {
    let mut t = Tally::default();
    let r = &mut rng::stream(7, 0);
    let emd = |a: &EmpiricalDistribution<Assignment>, b: &EmpiricalDistribution<Assignment>| {
        emd_exact(a, b, DEFAULT_EMD_BUDGET).expect("emd")
    };
    for x in 0..1000 {
        let (a, b, c) = (random_distribution(r), random_distribution(r), random_distribution(r));
        let (ab, ba, bc, ac) = (emd(&a, &b), emd(&b, &a), emd(&b, &c), emd(&a, &c));
        t.eq(emd(&a, &a), zero(), &format!("triple {x}: identity"));
        t.eq(ab, ba, &format!("triple {x}: symmetry"));
        t.le(ac, ab + bc, &format!("triple {x}: triangle"));
        t.check(ab >= zero(), || format!("triple {x}: negative"));
        let same = a.support() == b.support();
        t.check((ab == zero()) == same, || format!("triple {x}: zero distance iff equal"));
    }
    // Two unrelated computations of the same quantity: transportation on
    // the enumerated joint laws, and the per-coordinate closed form.
    for x in 0..100 {
        let mk = |r: &mut Stream| CoinLaw {
            left: (0..2).map(|_| (0..r.gen_range(1..=2)).map(|_| r.gen_range(0..2)).collect()).collect(),
            right: (0..2).map(|_| (0..r.gen_range(1..=2)).map(|_| r.gen_range(0..2)).collect()).collect(),
        };
        let (a, b) = (mk(r), mk(r));
        match enumerated_emd(&a, &b) {
            Ok(e) => t.eq(Some(e), a.emd(&b).ok(), &format!("product pair {x}: transportation vs closed form")),
            Err(e) => t.check(false, || format!("product pair {x}: {e}")),
        }
    }
    let mut nontrivial = 0;
    for p in 0..50 {
        let i = gen::random_label_cover(2, 2, 2, 2, 3, 0.7, r);
        let mut j = i.clone();
        while i.swap_distance(&j).expect("same shape") < 3 {
            j = j.apply_swap(&gen::random_swap(&j, true, r)).expect("swap");
        }
        t.eq(i.swap_distance(&j).ok(), Some(3), &format!("pair {p}: swap distance"));
        let Some(w) = t.ok(neighboring_witness(&ProjectionReader, &i, &j, DEFAULT_EMD_BUDGET), &format!("pair {p}")) else {
            continue;
        };
        let total = emd(
            &output_distribution(&ProjectionReader, &i, DEFAULT_EMD_BUDGET).expect("dist"),
            &output_distribution(&ProjectionReader, &j, DEFAULT_EMD_BUDGET).expect("dist"),
        );
        t.eq(w.total_emd, total, &format!("pair {p}: total EMD"));
        t.eq(w.step_emds.len(), 3, &format!("pair {p}: steps"));
        t.eq(Some(&w.emd_at_step), w.step_emds.iter().max(), &format!("pair {p}: witness is the largest step"));
        t.le(total, w.emd_at_step * Rational::from_integer(3), &format!("pair {p}: averaging bound"));
        if total > zero() {
            nontrivial += 1;
        }
    }
    t.notes.push(format!("{nontrivial}/50 witness pairs have positive total EMD"));
    t
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Tally {
    let mut t = Tally::default();
    let dir = std::env::temp_dir().join(format!("lcred-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let t0 = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_lcred"))
        .args(["pipeline", "--demo", "--format", "json", "--out-dir"])
        .arg(&dir)
        .output()
        .expect("run lcred");
    let el = t0.elapsed();
    t.eq(out.status.code(), Some(0), "exit code");
    t.check(el < Duration::from_secs(120), || format!("runtime {el:?}"));
    t.notes.push(format!("demo runtime {:.2}s", el.as_secs_f64()));
    let report: Report = match serde_json::from_slice(&out.stdout) {
        Ok(r) => r,
        Err(e) => {
            t.check(false, || format!("report does not parse: {e}"));
            return t;
        }
    };
    let stage = |name: &str| report.stages.iter().find(|s| s.stage == name);
    let (Some(sc_stage), Some(ds_stage)) = (stage("setcover"), stage("domset")) else {
        t.check(false, || "setcover or domset stage missing".into());
        return t;
    };
    let (j, g) = match (load_artifact(&dir, &sc_stage.output_hash), load_artifact(&dir, &ds_stage.output_hash)) {
        (Ok(Artifact::SetCover(j)), Ok(Artifact::DomSet(g))) => (j, g),
        _ => {
            t.check(false, || "cached artifacts missing".into());
            return t;
        }
    };
    let gamma = g.gamma();
    let helpers = j.n_sets().div_ceil(gamma);
    t.eq(g.n_vertices(), j.n_elements() + j.n_sets() + helpers, "|V(G)| = N_SC + m_SC + ⌈m_SC/Γ⌉");
    t.eq(
        ds_transform(&j, gamma).map(|x| lcred::hash::content_hash(&Artifact::DomSet(x))).ok(),
        Some(ds_stage.output_hash.clone()),
        "domset replays from the cached set cover",
    );
    let num = |s: &lcred::pipeline::StageReport, k: &str| s.measurements.get(k).and_then(|v| v.as_u64()).map(|x| x as usize);
    match (num(sc_stage, "sc"), num(ds_stage, "ds")) {
        (Some(sc), Some(ds)) => {
            t.check(sc <= ds && ds <= sc + helpers, || format!("sc {sc}, ds {ds}, ⌈m/Γ⌉ {helpers}"));
            // Re-check both optima here: a cover of size sc exists and none smaller
            // is found, likewise for ds on the graph.
            match (sc_opt(&j, None, DEFAULT_NODE_BUDGET), domset::ds_opt(&g, None, DEFAULT_NODE_BUDGET)) {
                (Ok(a), Ok(b)) => {
                    t.eq(a.size, sc, "sc recomputed without hints");
                    t.eq(b.size, ds, "ds recomputed without hints");
                    t.check(j.is_cover(&a.witness.iter().copied().collect()), || "sc witness is not a cover".into());
                    t.check(g.is_dominating(&b.witness.iter().copied().collect()), || "ds witness does not dominate".into());
                }
                _ => t.check(false, || "oracles failed".into()),
            }
            t.notes.push(format!(
                "N_SC = {}, m_SC = {}, Γ = {gamma}, sc = {sc}, ds = {ds}",
                j.n_elements(),
                j.n_sets()
            ));
        }
        _ => t.check(false, || "sc or ds measurement missing".into()),
    }
    t.check(report.passed, || "demo report has failing checks".into());
    let _ = std::fs::remove_dir_all(&dir);
    t
}
