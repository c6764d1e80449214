//! Set cover instances, the label-cover-to-set-cover transform with its
//! label-set recovery, and exact/greedy oracles.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::exact::{self, MinCover};
use crate::error::{Error, Result};
use crate::gadgets::setsystem::SetSystem;
use crate::lc::{Assignment, Label, LabelCoverInstance, Swap, Swappable};
use crate::metrics::CoinLaw;
use crate::rational::Rational;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SetCoverJson", into = "SetCoverJson")]
pub struct SetCoverInstance {
    n: usize,
    sets: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct SetCoverJson {
    kind: String,
    #[serde(rename = "N")]
    n: usize,
    sets: Vec<Vec<usize>>,
}

impl TryFrom<SetCoverJson> for SetCoverInstance {
    type Error = Error;
    fn try_from(j: SetCoverJson) -> Result<Self> {
        if j.kind != "set_cover" {
            return Err(Error::Invalid(format!("expected kind set_cover, got {}", j.kind)));
        }
        SetCoverInstance::new(j.n, j.sets)
    }
}

impl From<SetCoverInstance> for SetCoverJson {
    fn from(s: SetCoverInstance) -> Self {
        SetCoverJson { kind: "set_cover".into(), n: s.n, sets: s.sets }
    }
}

impl SetCoverInstance {
    pub fn new(n: usize, mut sets: Vec<Vec<usize>>) -> Result<Self> {
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
            if s.last().is_some_and(|&x| x >= n) {
                return Err(Error::Invalid("set element outside the ground set".into()));
            }
        }
        Ok(Self { n, sets })
    }

    pub fn n_elements(&self) -> usize {
        self.n
    }

    pub fn n_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn contains(&self, i: usize, x: usize) -> bool {
        self.sets[i].binary_search(&x).is_ok()
    }

    /// For each element, the sorted indices of the sets containing it.
    pub fn element_sets(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for (i, s) in self.sets.iter().enumerate() {
            for &x in s {
                out[x].push(i);
            }
        }
        out
    }

    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_frequency(&self) -> usize {
        self.element_sets().iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_feasible(&self) -> bool {
        self.element_sets().iter().all(|s| !s.is_empty())
    }

    pub fn is_cover(&self, chosen: &BTreeSet<usize>) -> bool {
        let v: Vec<usize> = chosen.iter().copied().collect();
        exact::is_cover(self.n, &self.sets, &v)
    }
}

impl Swappable for SetCoverInstance {
    fn apply_swap(&self, swap: &Swap) -> Result<Self> {
        let Swap::MembershipToggle { element, set } = *swap else {
            return Err(Error::InvalidSwap("set cover admits membership toggles only".into()));
        };
        if element >= self.n || set >= self.sets.len() {
            return Err(Error::InvalidSwap("toggle out of range".into()));
        }
        let mut out = self.clone();
        let s = &mut out.sets[set];
        match s.binary_search(&element) {
            Ok(p) => {
                s.remove(p);
            }
            Err(p) => s.insert(p, element),
        }
        Ok(out)
    }

    fn swap_distance(&self, other: &Self) -> Result<usize> {
        Ok(self.swap_path(other)?.len())
    }

    fn swap_path(&self, other: &Self) -> Result<Vec<Swap>> {
        if self.n != other.n || self.sets.len() != other.sets.len() {
            return Err(Error::Incomparable);
        }
        let mut path = Vec::new();
        for (i, (a, b)) in self.sets.iter().zip(&other.sets).enumerate() {
            let a: BTreeSet<_> = a.iter().collect();
            let b: BTreeSet<_> = b.iter().collect();
            for &&x in a.symmetric_difference(&b) {
                path.push(Swap::MembershipToggle { element: x, set: i });
            }
        }
        Ok(path)
    }
}

/// Index layout of the transformed instance: element (e, b) is
/// `e·|B| + b`; right-label sets (v, x) come first, then left-label sets (u, y).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScLayout {
    pub n_left: usize,
    pub n_right: usize,
    pub sigma_left: usize,
    pub sigma_right: usize,
    pub universe: usize,
}

impl ScLayout {
    pub fn of(inst: &LabelCoverInstance, universe: usize) -> Self {
        Self {
            n_left: inst.n_left(),
            n_right: inst.n_right(),
            sigma_left: inst.sigma_left(),
            sigma_right: inst.sigma_right(),
            universe,
        }
    }

    pub fn element(&self, e: usize, b: usize) -> usize {
        e * self.universe + b
    }

    pub fn right_set(&self, v: usize, x: Label) -> usize {
        v * self.sigma_right + x as usize
    }

    pub fn left_set(&self, u: usize, y: Label) -> usize {
        self.n_right * self.sigma_right + u * self.sigma_left + y as usize
    }

    pub fn n_sets(&self) -> usize {
        self.n_right * self.sigma_right + self.n_left * self.sigma_left
    }

    /// Inverse of the set numbering: `(is_left, vertex, label)`.
    pub fn decode_set(&self, i: usize) -> (bool, usize, Label) {
        let split = self.n_right * self.sigma_right;
        if i < split {
            (false, i / self.sigma_right, (i % self.sigma_right) as Label)
        } else {
            let j = i - split;
            (true, j / self.sigma_left, (j % self.sigma_left) as Label)
        }
    }
}

pub fn sc_transform(inst: &LabelCoverInstance, sys: &SetSystem) -> Result<(SetCoverInstance, ScLayout)> {
    if sys.m() != inst.sigma_right() {
        return Err(Error::ShapeMismatch(format!(
            "set system has {} sets but |Σ_V| = {}",
            sys.m(),
            inst.sigma_right()
        )));
    }
    let lay = ScLayout::of(inst, sys.universe());
    let members: Vec<Vec<usize>> = (0..sys.m()).map(|i| sys.members(i, false)).collect();
    let complements: Vec<Vec<usize>> = (0..sys.m()).map(|i| sys.members(i, true)).collect();
    let mut sets = vec![Vec::new(); lay.n_sets()];
    for (e, &(u, v)) in inst.edges().iter().enumerate() {
        for x in 0..inst.sigma_right() {
            sets[lay.right_set(v, x as Label)].extend(members[x].iter().map(|&b| lay.element(e, b)));
        }
        for y in 0..inst.sigma_left() {
            if inst.predicate(u)[y] {
                let fx = inst.projection(e)[y] as usize;
                sets[lay.left_set(u, y as Label)].extend(complements[fx].iter().map(|&b| lay.element(e, b)));
            }
        }
    }
    Ok((SetCoverInstance::new(inst.n_edges() * lay.universe, sets)?, lay))
}

/// The size-(|U|+|V|) selection read off an assignment.
pub fn sc_selection(lay: &ScLayout, pi: &Assignment) -> BTreeSet<usize> {
    let mut out: BTreeSet<usize> = pi.right.iter().enumerate().map(|(v, &x)| lay.right_set(v, x)).collect();
    out.extend(pi.left.iter().enumerate().map(|(u, &y)| lay.left_set(u, y)));
    out
}

/// Label sets L_u (admissible selected labels) and L_v (selected labels).
pub fn sc_label_sets(inst: &LabelCoverInstance, lay: &ScLayout, sel: &BTreeSet<usize>) -> (Vec<Vec<Label>>, Vec<Vec<Label>>) {
    let mut lu = vec![Vec::new(); inst.n_left()];
    let mut lv = vec![Vec::new(); inst.n_right()];
    for &i in sel {
        if i >= lay.n_sets() {
            continue;
        }
        match lay.decode_set(i) {
            (true, u, y) if inst.predicate(u)[y as usize] => lu[u].push(y),
            (true, ..) => {}
            (false, v, x) => lv[v].push(x),
        }
    }
    (lu, lv)
}

/// Recovery law: independent uniform picks from the label sets, label 0
/// when a set is empty.
pub fn sc_law(inst: &LabelCoverInstance, lay: &ScLayout, sel: &BTreeSet<usize>) -> CoinLaw {
    let (lu, lv) = sc_label_sets(inst, lay, sel);
    let fill = |l: Vec<Vec<Label>>| l.into_iter().map(|x| if x.is_empty() { vec![0] } else { x }).collect();
    CoinLaw { left: fill(lu), right: fill(lv) }
}

pub fn sc_recover(inst: &LabelCoverInstance, lay: &ScLayout, sel: &BTreeSet<usize>, seed: u64) -> Assignment {
    sc_law(inst, lay, sel).sample(&mut rng::stream(seed, rng::task::RECOVER_SC))
}

/// Per-edge slice statistics of a selection: t_e = |L_u| + |L_v| and the
/// exact probability that the recovered assignment satisfies e, computed by
/// enumerating L_u × L_v.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceStat {
    pub edge: usize,
    pub t: usize,
    pub probability: Rational,
}

pub fn slice_stats(inst: &LabelCoverInstance, lay: &ScLayout, sel: &BTreeSet<usize>) -> Vec<SliceStat> {
    let (lu, lv) = sc_label_sets(inst, lay, sel);
    inst.edges()
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            let t = lu[u].len() + lv[v].len();
            let a: &[Label] = if lu[u].is_empty() { &[0] } else { &lu[u] };
            let b: &[Label] = if lv[v].is_empty() { &[0] } else { &lv[v] };
            let mut hits = 0;
            for &y in a {
                for &x in b {
                    if inst.predicate(u)[y as usize] && inst.projection(e)[y as usize] == x {
                        hits += 1;
                    }
                }
            }
            SliceStat { edge: e, t, probability: Rational::new(hits, (a.len() * b.len()) as i128) }
        })
        .collect()
}

/// Lexicographically first minimum cover by exhaustive enumeration.
pub fn sc_opt_bruteforce(j: &SetCoverInstance, budget: u128) -> Result<(usize, BTreeSet<usize>)> {
    let w = exact::min_cover_bruteforce(j.n, &j.sets, budget)?;
    Ok((w.len(), w.into_iter().collect()))
}

/// Exact minimum cover by branch and bound, optionally seeded with a cover.
pub fn sc_opt(j: &SetCoverInstance, hint: Option<&BTreeSet<usize>>, node_budget: u64) -> Result<MinCover> {
    let h: Option<Vec<usize>> = hint.map(|h| h.iter().copied().collect());
    exact::min_cover(j.n, &j.sets, h.as_deref(), node_budget)
}

pub fn greedy_cover(j: &SetCoverInstance) -> Result<BTreeSet<usize>> {
    Ok(exact::greedy_min_cover(j.n, &j.sets)?.into_iter().collect())
}
