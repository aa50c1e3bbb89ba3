//! Model checking and frame validity.

use std::collections::{BTreeMap, HashMap};

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Axis, Formula};
use crate::frame::Frame;

/// A frame with a valuation. Variables absent from the map are false everywhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub frame: Frame,
    pub valuation: BTreeMap<String, FixedBitSet>,
}

impl Model {
    pub fn new(frame: Frame) -> Self {
        Model {
            frame,
            valuation: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, p: impl Into<String>, worlds: impl IntoIterator<Item = usize>) {
        let mut s = FixedBitSet::with_capacity(self.frame.size());
        s.extend(worlds);
        self.valuation.insert(p.into(), s);
    }

    pub fn holds(&self, p: &str, w: usize) -> bool {
        self.valuation.get(p).is_some_and(|s| s.contains(w))
    }

    pub fn truth_set(&self, f: &Formula) -> FixedBitSet {
        let c = Compiled::new(f);
        let vals: Vec<FixedBitSet> = c.vars.iter().map(|p| self.value_of(p)).collect();
        let mut buf = Vec::new();
        c.eval(&self.frame, &vals, &mut buf).clone()
    }

    fn value_of(&self, p: &str) -> FixedBitSet {
        self.valuation
            .get(p)
            .cloned()
            .unwrap_or_else(|| FixedBitSet::with_capacity(self.frame.size()))
    }
}

/// `M, w ⊨ φ`
pub fn satisfies(m: &Model, w: usize, f: &Formula) -> Result<bool> {
    if w >= m.frame.size() {
        return Err(Error::InvalidWorld(w));
    }
    Ok(m.truth_set(f).contains(w))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Var(usize),
    Top,
    Bot,
    Not(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
    Box(Axis, usize),
    Dia(Axis, usize),
    Imp(usize, usize),
}

/// A formula compiled to a hash-consed DAG for repeated evaluation.
pub struct Compiled {
    nodes: Vec<Node>,
    vars: Vec<String>,
    root: usize,
    /// Root of the antecedent when the formula is an implication.
    antecedent: Option<usize>,
}

impl Compiled {
    pub fn new(f: &Formula) -> Self {
        let mut c = Compiled {
            nodes: Vec::new(),
            vars: Vec::new(),
            root: 0,
            antecedent: None,
        };
        let mut memo = HashMap::new();
        let mut var_ix = HashMap::new();
        c.root = c.add(f, &mut memo, &mut var_ix);
        if let Formula::Implies(a, _) = f {
            c.antecedent = Some(c.add(a, &mut memo, &mut var_ix));
        }
        c
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    fn add(
        &mut self,
        f: &Formula,
        memo: &mut HashMap<Node, usize>,
        var_ix: &mut HashMap<String, usize>,
    ) -> usize {
        let node = match f {
            Formula::Var(p) => {
                let n = var_ix.len();
                let i = *var_ix.entry(p.clone()).or_insert_with(|| {
                    self.vars.push(p.clone());
                    n
                });
                Node::Var(i)
            }
            Formula::Top => Node::Top,
            Formula::Bot => Node::Bot,
            Formula::Not(a) => Node::Not(self.add(a, memo, var_ix)),
            Formula::And(xs) => Node::And(xs.iter().map(|x| self.add(x, memo, var_ix)).collect()),
            Formula::Or(xs) => Node::Or(xs.iter().map(|x| self.add(x, memo, var_ix)).collect()),
            Formula::Box(x, a) => Node::Box(*x, self.add(a, memo, var_ix)),
            Formula::Diamond(x, a) => Node::Dia(*x, self.add(a, memo, var_ix)),
            Formula::Implies(a, b) => {
                let a = self.add(a, memo, var_ix);
                let b = self.add(b, memo, var_ix);
                Node::Imp(a, b)
            }
        };
        if let Some(&i) = memo.get(&node) {
            return i;
        }
        self.nodes.push(node.clone());
        memo.insert(node, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    /// Evaluate all nodes; returns the root's truth set.
    pub fn eval<'b>(
        &self,
        frame: &Frame,
        vals: &[FixedBitSet],
        buf: &'b mut Vec<FixedBitSet>,
    ) -> &'b FixedBitSet {
        let n = frame.size();
        buf.resize_with(self.nodes.len(), || FixedBitSet::with_capacity(n));
        for (i, node) in self.nodes.iter().enumerate() {
            let (done, rest) = buf.split_at_mut(i);
            let out = &mut rest[0];
            out.grow(n);
            match node {
                Node::Var(v) => out.clone_from(&vals[*v]),
                Node::Top => out.insert_range(..),
                Node::Bot => out.clear(),
                Node::Not(a) => {
                    out.clone_from(&done[*a]);
                    out.toggle_range(..);
                }
                Node::And(xs) => {
                    out.clone_from(&done[xs[0]]);
                    for x in &xs[1..] {
                        out.intersect_with(&done[*x]);
                    }
                }
                Node::Or(xs) => {
                    out.clone_from(&done[xs[0]]);
                    for x in &xs[1..] {
                        out.union_with(&done[*x]);
                    }
                }
                Node::Imp(a, b) => {
                    out.clone_from(&done[*a]);
                    out.toggle_range(..);
                    out.union_with(&done[*b]);
                }
                Node::Dia(x, a) => {
                    out.clear();
                    let r = frame.rel(*x);
                    for w in 0..n {
                        if !r.succ(w).is_disjoint(&done[*a]) {
                            out.insert(w);
                        }
                    }
                }
                Node::Box(x, a) => {
                    out.clear();
                    let r = frame.rel(*x);
                    for w in 0..n {
                        if r.succ(w).is_subset(&done[*a]) {
                            out.insert(w);
                        }
                    }
                }
            }
        }
        &buf[self.root]
    }

    fn antecedent_set<'b>(&self, buf: &'b [FixedBitSet]) -> Option<&'b FixedBitSet> {
        self.antecedent.map(|a| &buf[a])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CheckMode {
    /// All valuations of the formula's variables; fails if
    /// `vars × worlds > budget`.
    Exhaustive { budget: usize },
    /// Uniform random valuations from a seeded ChaCha8 generator.
    Sampled { trials: u64, seed: u64 },
}

impl CheckMode {
    pub fn exhaustive() -> Self {
        CheckMode::Exhaustive { budget: 24 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Refuted {
        model: Model,
        world: usize,
    },
    /// Sampling found nothing. `antecedent_hits` counts trials in which the
    /// antecedent of a top-level implication held somewhere.
    NoCounterexampleFound {
        trials: u64,
        seed: u64,
        antecedent_hits: u64,
    },
}

impl Validity {
    pub fn is_refuted(&self) -> bool {
        matches!(self, Validity::Refuted { .. })
    }
}

fn model_from(frame: &Frame, vars: &[String], vals: &[FixedBitSet]) -> Model {
    Model {
        frame: frame.clone(),
        valuation: vars.iter().cloned().zip(vals.iter().cloned()).collect(),
    }
}

pub fn valid_in_frame(frame: &Frame, f: &Formula, mode: CheckMode) -> Result<Validity> {
    let c = Compiled::new(f);
    let n = frame.size();
    let nv = c.vars.len();
    let mut vals = vec![FixedBitSet::with_capacity(n); nv];
    let mut buf = Vec::new();
    let first_false = |s: &FixedBitSet| (0..n).find(|&w| !s.contains(w));
    match mode {
        CheckMode::Exhaustive { budget } => {
            let bits = nv * n;
            if bits > budget {
                return Err(Error::BudgetExceeded {
                    needed: bits,
                    budget,
                });
            }
            // Gray code: step i flips the bit at trailing_zeros(i).
            let total: u64 = 1 << bits;
            for i in 0..total {
                if i > 0 {
                    let b = i.trailing_zeros() as usize;
                    vals[b / n].toggle(b % n);
                }
                if let Some(world) = first_false(c.eval(frame, &vals, &mut buf)) {
                    return Ok(Validity::Refuted {
                        model: model_from(frame, &c.vars, &vals),
                        world,
                    });
                }
            }
            Ok(Validity::Valid)
        }
        CheckMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits = 0;
            for _ in 0..trials {
                for v in vals.iter_mut() {
                    v.clear();
                    for w in 0..n {
                        v.set(w, rng.gen::<bool>());
                    }
                }
                let res = c.eval(frame, &vals, &mut buf);
                if let Some(world) = first_false(res) {
                    return Ok(Validity::Refuted {
                        model: model_from(frame, &c.vars, &vals),
                        world,
                    });
                }
                if c.antecedent_set(&buf).is_some_and(|a| a.count_ones(..) > 0) {
                    hits += 1;
                }
            }
            Ok(Validity::NoCounterexampleFound {
                trials,
                seed,
                antecedent_hits: hits,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValuationMismatch {
    pub var: String,
    pub world: usize,
}

/// `x ∈ M(p) ⇔ f(x) ∈ N(p)` for every variable of either model.
pub fn verify_model_pmorphism(
    m: &Model,
    n: &Model,
    f: &[usize],
) -> std::result::Result<(), ValuationMismatch> {
    let names: std::collections::BTreeSet<&String> =
        m.valuation.keys().chain(n.valuation.keys()).collect();
    for p in names {
        for (x, &y) in f.iter().enumerate() {
            if m.holds(p, x) != n.holds(p, y) {
                return Err(ValuationMismatch {
                    var: p.clone(),
                    world: x,
                });
            }
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    #[serde(flatten)]
    frame: Frame,
    valuation: BTreeMap<String, Vec<usize>>,
}

impl Serialize for Model {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelJson {
            frame: self.frame.clone(),
            valuation: self
                .valuation
                .iter()
                .map(|(k, v)| (k.clone(), v.ones().collect()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Model {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ModelJson::deserialize(d)?;
        let n = j.frame.size();
        let mut m = Model::new(j.frame);
        for (p, ws) in j.valuation {
            if let Some(&w) = ws.iter().find(|&&w| w >= n) {
                return Err(serde::de::Error::custom(format!("world {w} out of range")));
            }
            m.set(p, ws);
        }
        Ok(m)
    }
}
