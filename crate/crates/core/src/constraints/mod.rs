//! Size constraints of a grid of bi-clusters and their analysis.

mod badpath;
mod graph;
mod square;
mod status;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::extnat::{Aleph0, ExtNat, Fin};
use crate::grid::{BiClusterType, GridSpec, Side};

pub use badpath::{bad_path_exists_bruteforce, find_bad_path, BadPath};
pub use graph::{build_graph, compute_solution, condense, Condensation, ConstraintGraph, NuMin};
pub use square::{square_diagnose, SquareVerdict};
pub use status::{node_status, NodeStatus};

/// Node values indexed like the constraint set's nodes.
pub type Solution = Vec<ExtNat>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// `z = n`
    Eq { z: usize, n: ExtNat },
    /// `z ≥ k`
    Ge { z: usize, k: u64 },
    /// `z ≥ λ·w`, λ ∈ {1, 2}
    GeScaled { z: usize, lambda: u8, w: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSet {
    pub names: Vec<String>,
    pub sides: Vec<Side>,
    pub constraints: Vec<Constraint>,
}

/// A cell whose bi-cluster admits no product preimage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ImpossibleCell {
    pub x: usize,
    pub y: usize,
    pub kind: BiClusterType,
}

impl ConstraintSet {
    pub fn new(names: Vec<String>, sides: Vec<Side>) -> Self {
        ConstraintSet {
            names,
            sides,
            constraints: Vec::new(),
        }
    }

    /// Empty set over the nodes of a grid (X first, then Y).
    pub fn for_grid(g: &GridSpec) -> Self {
        let names = g.xs.iter().chain(&g.ys).cloned().collect();
        let sides = (0..g.node_count()).map(|z| g.side(z)).collect();
        ConstraintSet::new(names, sides)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Add unless already present.
    pub fn push(&mut self, c: Constraint) {
        if !self.constraints.contains(&c) {
            self.constraints.push(c);
        }
    }

    pub fn named(&self, xi: &[ExtNat]) -> BTreeMap<String, ExtNat> {
        self.names.iter().cloned().zip(xi.iter().copied()).collect()
    }

    pub fn from_named(&self, m: &BTreeMap<String, ExtNat>) -> Result<Solution> {
        self.names
            .iter()
            .map(|n| {
                m.get(n)
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument(format!("solution misses node {n}")))
            })
            .collect()
    }

    pub fn side_sum(&self, xi: &[ExtNat], side: Side) -> ExtNat {
        (0..self.len())
            .filter(|&z| self.sides[z] == side)
            .map(|z| xi[z])
            .sum()
    }

    pub fn render(&self, c: &Constraint) -> String {
        match *c {
            Constraint::Eq { z, n } => format!("({} = {n})", self.names[z]),
            Constraint::Ge { z, k } => format!("({} >= {k})", self.names[z]),
            Constraint::GeScaled { z, lambda: 1, w } => {
                format!("({} >= {})", self.names[z], self.names[w])
            }
            Constraint::GeScaled { z, lambda, w } => {
                format!("({} >= {lambda}{})", self.names[z], self.names[w])
            }
        }
    }

    /// `[{"eq":["x2",6]},{"ge":["x1",3]},{"ges":["y1",2,"x1"]}]`
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.constraints
                .iter()
                .map(|c| match *c {
                    Constraint::Eq { z, n } => json!({"eq": [self.names[z], n]}),
                    Constraint::Ge { z, k } => json!({"ge": [self.names[z], k]}),
                    Constraint::GeScaled { z, lambda, w } => {
                        json!({"ges": [self.names[z], lambda, self.names[w]]})
                    }
                })
                .collect(),
        )
    }

    /// Parse the JSON list form. Node sides are taken from the first letter
    /// of each name (`x…` or `y…`); nodes are numbered in order of appearance.
    pub fn from_json(v: &Value) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(rename_all = "lowercase")]
        enum Raw {
            Eq((String, ExtNat)),
            Ge((String, u64)),
            Ges((String, u8, String)),
        }
        let raws: Vec<Raw> = serde_json::from_value(v.clone())?;
        let mut set = ConstraintSet::new(vec![], vec![]);
        let id = |set: &mut ConstraintSet, name: &str| -> Result<usize> {
            if let Some(i) = set.node(name) {
                return Ok(i);
            }
            let side = match name.chars().next() {
                Some('x') => Side::X,
                Some('y') => Side::Y,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "node {name:?} must start with x or y"
                    )))
                }
            };
            set.names.push(name.to_string());
            set.sides.push(side);
            Ok(set.len() - 1)
        };
        for r in raws {
            let c = match r {
                Raw::Eq((z, n)) => Constraint::Eq {
                    z: id(&mut set, &z)?,
                    n,
                },
                Raw::Ge((z, k)) => Constraint::Ge {
                    z: id(&mut set, &z)?,
                    k,
                },
                Raw::Ges((z, lambda, w)) => {
                    if lambda != 1 && lambda != 2 {
                        return Err(Error::InvalidArgument(format!(
                            "scale {lambda} not in {{1,2}}"
                        )));
                    }
                    Constraint::GeScaled {
                        z: id(&mut set, &z)?,
                        lambda,
                        w: id(&mut set, &w)?,
                    }
                }
            };
            set.push(c);
        }
        for z in 0..set.len() {
            set.push(Constraint::Ge { z, k: 1 });
        }
        Ok(set)
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.constraints.iter().map(|c| self.render(c)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Constraints of every cell, per the table of finite bi-clusters, plus
/// `z ≥ 1` for every node. An open side is represented by one copy.
pub fn extract_constraints(g: &GridSpec) -> std::result::Result<ConstraintSet, ImpossibleCell> {
    let g = &g.materialize_open(1);
    let mut set = ConstraintSet::for_grid(g);
    for (xi, yi) in g.cell_keys() {
        let (x, y) = (g.x_node(xi), g.y_node(yi));
        let c = g.cell(xi, yi);
        let kind = c.classify().expect("validated grids have no empty cells");
        let (h, v, card) = c.sizes();
        let fin = |e: ExtNat| e.finite().expect("finite bi-cluster");
        use BiClusterType::*;
        let cs: Vec<Constraint> = match kind {
            Impossible1 | Impossible2 | Impossible3 | Impossible4 => {
                return Err(ImpossibleCell { x: xi, y: yi, kind })
            }
            Infinity1 | Infinity2 | Infinity3 | Infinity4 | CountablyInfinite => vec![
                Constraint::Eq { z: x, n: Aleph0 },
                Constraint::Eq { z: y, n: Aleph0 },
            ],
            H2VSw => vec![
                Constraint::GeScaled {
                    z: x,
                    lambda: 2,
                    w: y,
                },
                Constraint::Ge { z: y, k: fin(v) },
            ],
            V2HSw => vec![
                Constraint::Ge { z: x, k: fin(h) },
                Constraint::GeScaled {
                    z: y,
                    lambda: 2,
                    w: x,
                },
            ],
            EqSw => vec![
                Constraint::GeScaled {
                    z: x,
                    lambda: 1,
                    w: y,
                },
                Constraint::GeScaled {
                    z: y,
                    lambda: 1,
                    w: x,
                },
                Constraint::Ge { z: x, k: fin(h) },
                Constraint::Ge { z: y, k: fin(v) },
            ],
            HStrict => vec![
                Constraint::Eq { z: x, n: card },
                Constraint::Ge { z: y, k: fin(v) },
            ],
            VStrict => vec![
                Constraint::Ge { z: x, k: fin(h) },
                Constraint::Eq { z: y, n: card },
            ],
            HVStrict => vec![
                Constraint::Eq { z: x, n: card },
                Constraint::Eq { z: y, n: card },
            ],
            Free => vec![
                Constraint::Ge { z: x, k: fin(h) },
                Constraint::Ge { z: y, k: fin(v) },
            ],
        };
        for c in cs {
            set.push(c);
        }
    }
    for z in 0..set.len() {
        set.push(Constraint::Ge { z, k: 1 });
    }
    Ok(set)
}

/// `(max_F(z), min_F(z))`: the least equality bound (`ℵ₀` if none) and the
/// greatest lower bound from equalities and inequalities.
pub fn node_bounds(con: &ConstraintSet, z: usize) -> (ExtNat, ExtNat) {
    let mut max = Aleph0;
    let mut min = Fin(1);
    for c in &con.constraints {
        match *c {
            Constraint::Eq { z: w, n } if w == z => {
                max = max.min(n);
                min = min.max(n);
            }
            Constraint::Ge { z: w, k } if w == z => min = min.max(Fin(k)),
            _ => {}
        }
    }
    (max, min)
}

pub fn holds(c: &Constraint, xi: &[ExtNat]) -> bool {
    match *c {
        Constraint::Eq { z, n } => xi[z] == n,
        Constraint::Ge { z, k } => xi[z] >= Fin(k),
        Constraint::GeScaled { z, lambda, w } => xi[z] >= xi[w].mul_small(lambda as u64),
    }
}

pub fn violated(con: &ConstraintSet, xi: &[ExtNat]) -> Vec<Constraint> {
    con.constraints
        .iter()
        .filter(|c| !holds(c, xi))
        .copied()
        .collect()
}

/// First violated constraint, if any.
pub fn check_solution(con: &ConstraintSet, xi: &[ExtNat]) -> std::result::Result<(), Constraint> {
    if xi.len() != con.len() {
        panic!("solution has {} values for {} nodes", xi.len(), con.len());
    }
    match con.constraints.iter().find(|c| !holds(c, xi)) {
        Some(c) => Err(*c),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnosis {
    Impossible(ImpossibleCell),
    BadPath(BadPath),
    Good { xi_min: Solution },
}

/// Impossible cell, else bad path, else the canonical solution.
pub fn diagnose(g: &GridSpec) -> Diagnosis {
    let con = match extract_constraints(g) {
        Ok(c) => c,
        Err(cell) => return Diagnosis::Impossible(cell),
    };
    match find_bad_path(&con) {
        Some(p) => Diagnosis::BadPath(p),
        None => {
            let xi = compute_solution(&con).xi;
            debug_assert!(check_solution(&con, &xi).is_ok());
            Diagnosis::Good { xi_min: xi }
        }
    }
}
