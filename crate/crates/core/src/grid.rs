//! Grids of bi-clusters: classification, decomposition of frames, realization.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extnat::{Aleph0, ExtNat, Fin};
use crate::formula::Axis;
use crate::frame::{check_commuting_pseudo_equivalences, Frame, Relation};

/// Reflexivity of a point: first letter `R_h`, second `R_v`
/// (`R` reflexive, `I` irreflexive).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    RR,
    RI,
    IR,
    II,
}

impl PointKind {
    pub const ALL: [PointKind; 4] = [PointKind::RR, PointKind::RI, PointKind::IR, PointKind::II];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_loops(h: bool, v: bool) -> Self {
        match (h, v) {
            (true, true) => PointKind::RR,
            (true, false) => PointKind::RI,
            (false, true) => PointKind::IR,
            (false, false) => PointKind::II,
        }
    }

    pub fn reflexive(self, axis: Axis) -> bool {
        match axis {
            Axis::H => matches!(self, PointKind::RR | PointKind::RI),
            Axis::V => matches!(self, PointKind::RR | PointKind::IR),
        }
    }

    pub fn transpose(self) -> Self {
        match self {
            PointKind::RI => PointKind::IR,
            PointKind::IR => PointKind::RI,
            k => k,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PointKind::RR => "rr",
            PointKind::RI => "ri",
            PointKind::IR => "ir",
            PointKind::II => "ii",
        }
    }
}

/// A bi-cluster up to isomorphism: how many points of each kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct BiCluster {
    counts: [u64; 4],
    infinite: [bool; 4],
}

impl BiCluster {
    pub fn new(rr: u64, ri: u64, ir: u64, ii: u64) -> Self {
        BiCluster {
            counts: [rr, ri, ir, ii],
            infinite: [false; 4],
        }
    }

    pub fn from_counts(counts: [ExtNat; 4]) -> Self {
        let mut c = BiCluster::default();
        for (i, n) in counts.into_iter().enumerate() {
            match n {
                Fin(k) => c.counts[i] = k,
                Aleph0 => c.infinite[i] = true,
            }
        }
        c
    }

    pub fn get(&self, k: PointKind) -> ExtNat {
        if self.infinite[k.index()] {
            Aleph0
        } else {
            Fin(self.counts[k.index()])
        }
    }

    /// Finite count of a kind; zero for `ℵ₀` (callers check finiteness first).
    pub fn n(&self, k: PointKind) -> u64 {
        self.counts[k.index()]
    }

    pub fn with(mut self, k: PointKind, n: ExtNat) -> Self {
        match n {
            Fin(v) => {
                self.counts[k.index()] = v;
                self.infinite[k.index()] = false;
            }
            Aleph0 => self.infinite[k.index()] = true,
        }
        self
    }

    pub fn counts(&self) -> [ExtNat; 4] {
        PointKind::ALL.map(|k| self.get(k))
    }

    pub fn total(&self) -> ExtNat {
        self.counts().into_iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        !self.infinite.iter().any(|&b| b)
    }

    pub fn has(&self, k: PointKind) -> bool {
        self.get(k).is_positive()
    }

    /// `(h_size, v_size, |C|)`
    pub fn sizes(&self) -> (ExtNat, ExtNat, ExtNat) {
        use PointKind::*;
        let h = self.get(RR).mul_small(2) + self.get(RI).mul_small(2) + self.get(IR) + self.get(II);
        let v = self.get(RR).mul_small(2) + self.get(IR).mul_small(2) + self.get(RI) + self.get(II);
        (h, v, self.total())
    }

    pub fn classify(&self) -> Result<BiClusterType> {
        classify_bicluster(self)
    }

    pub fn transpose(&self) -> Self {
        let mut t = *self;
        t.counts.swap(1, 2);
        t.infinite.swap(1, 2);
        t
    }

    /// Points of this bi-cluster in realization order: kinds in
    /// `PointKind::ALL` order, then ordinal.
    pub fn points(&self) -> Vec<(PointKind, u64)> {
        PointKind::ALL
            .iter()
            .flat_map(|&k| (0..self.n(k)).map(move |i| (k, i)))
            .collect()
    }
}

impl fmt::Display for BiCluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = PointKind::ALL
            .iter()
            .filter(|&&k| self.has(k))
            .map(|&k| format!("{}:{}", k.name(), self.get(k)))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for BiCluster {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<&str, ExtNat> = PointKind::ALL
            .iter()
            .filter(|&&k| self.has(k))
            .map(|&k| (k.name(), self.get(k)))
            .collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BiCluster {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m: BTreeMap<PointKind, ExtNat> = BTreeMap::deserialize(d)?;
        let mut c = BiCluster::default();
        for (k, n) in m {
            c = c.with(k, n);
        }
        Ok(c)
    }
}

/// The rows of the table of finite bi-clusters, plus the infinite case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BiClusterType {
    Impossible1,
    Impossible2,
    Impossible3,
    Impossible4,
    Infinity1,
    Infinity2,
    Infinity3,
    Infinity4,
    H2VSw,
    V2HSw,
    EqSw,
    HStrict,
    VStrict,
    HVStrict,
    Free,
    CountablyInfinite,
}

impl BiClusterType {
    pub fn is_impossible(self) -> bool {
        use BiClusterType::*;
        matches!(self, Impossible1 | Impossible2 | Impossible3 | Impossible4)
    }

    pub fn is_infinity(self) -> bool {
        use BiClusterType::*;
        matches!(self, Infinity1 | Infinity2 | Infinity3 | Infinity4)
    }

    pub fn is_switch(self) -> bool {
        use BiClusterType::*;
        matches!(self, H2VSw | V2HSw | EqSw)
    }

    pub fn is_strict(self) -> bool {
        use BiClusterType::*;
        matches!(self, HStrict | VStrict | HVStrict)
    }

    /// Presence pattern `(ii, ri, ir, rr)` of the table row; `None` for the
    /// infinite case.
    pub fn pattern(self) -> Option<[bool; 4]> {
        use BiClusterType::*;
        let (t, f) = (true, false);
        Some(match self {
            Impossible1 => [f, t, t, f],
            Impossible2 => [t, f, t, f],
            Impossible3 => [t, t, f, f],
            Impossible4 => [t, t, t, f],
            Infinity1 => [f, t, t, t],
            Infinity2 => [t, f, t, t],
            Infinity3 => [t, t, f, t],
            Infinity4 => [t, t, t, t],
            H2VSw => [f, t, f, t],
            V2HSw => [f, f, t, t],
            EqSw => [t, f, f, t],
            HStrict => [f, f, t, f],
            VStrict => [f, t, f, f],
            HVStrict => [t, f, f, f],
            Free => [f, f, f, t],
            CountablyInfinite => return None,
        })
    }

    pub const FINITE: [BiClusterType; 15] = {
        use BiClusterType::*;
        [
            Impossible1,
            Impossible2,
            Impossible3,
            Impossible4,
            Infinity1,
            Infinity2,
            Infinity3,
            Infinity4,
            H2VSw,
            V2HSw,
            EqSw,
            HStrict,
            VStrict,
            HVStrict,
            Free,
        ]
    };

    pub fn transpose(self) -> Self {
        use BiClusterType::*;
        match self {
            Impossible2 => Impossible3,
            Impossible3 => Impossible2,
            Infinity2 => Infinity3,
            Infinity3 => Infinity2,
            H2VSw => V2HSw,
            V2HSw => H2VSw,
            HStrict => VStrict,
            VStrict => HStrict,
            t => t,
        }
    }
}

pub fn classify_bicluster(c: &BiCluster) -> Result<BiClusterType> {
    if c.total() == Fin(0) {
        return Err(Error::InvalidArgument("bi-cluster with no points".into()));
    }
    if !c.is_finite() {
        return Ok(BiClusterType::CountablyInfinite);
    }
    use PointKind::*;
    let pat = [c.has(II), c.has(RI), c.has(IR), c.has(RR)];
    Ok(*BiClusterType::FINITE
        .iter()
        .find(|t| t.pattern() == Some(pat))
        .expect("all fifteen nonzero patterns are listed"))
}

pub fn sizes(c: &BiCluster) -> (ExtNat, ExtNat, ExtNat) {
    c.sizes()
}

/// Which side of the grid a node belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    X,
    Y,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::X => Side::Y,
            Side::Y => Side::X,
        }
    }

    /// The axis along which the nodes of this side index sizes: an X node
    /// is a column whose size is the horizontal factor.
    pub fn axis(self) -> Axis {
        match self {
            Side::X => Axis::H,
            Side::Y => Axis::V,
        }
    }
}

/// Infinitely many extra nodes on `side`, each with the given cells (one
/// per node of the other side).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenSide {
    pub side: Side,
    pub template: Vec<BiCluster>,
}

/// Grid of bi-clusters. Nodes are numbered `0..nx` for X, `nx..nx+ny` for Y.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub xs: Vec<String>,
    pub ys: Vec<String>,
    /// `cells[xi][yi]`
    pub cells: Vec<Vec<BiCluster>>,
    pub open: Option<OpenSide>,
}

impl GridSpec {
    pub fn new(xs: Vec<String>, ys: Vec<String>, cells: Vec<Vec<BiCluster>>) -> Result<Self> {
        let g = GridSpec {
            xs,
            ys,
            cells,
            open: None,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid with every cell set to `fill`, then the listed cells overridden.
    pub fn with_default(
        xs: &[&str],
        ys: &[&str],
        fill: BiCluster,
        cells: &[(&str, &str, BiCluster)],
    ) -> Result<Self> {
        let mut g = GridSpec {
            xs: xs.iter().map(|s| s.to_string()).collect(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            cells: vec![vec![fill; ys.len()]; xs.len()],
            open: None,
        };
        for (x, y, c) in cells {
            let xi = g
                .x_index(x)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown x {x}")))?;
            let yi = g
                .y_index(y)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown y {y}")))?;
            g.cells[xi][yi] = *c;
        }
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.xs.is_empty() || self.ys.is_empty() {
            return Err(Error::InvalidArgument(
                "grid needs at least one x and one y".into(),
            ));
        }
        let mut names: Vec<&String> = self.xs.iter().chain(&self.ys).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("node ids must be distinct".into()));
        }
        if self.cells.len() != self.xs.len() || self.cells.iter().any(|c| c.len() != self.ys.len())
        {
            return Err(Error::InvalidArgument("cells must cover xs × ys".into()));
        }
        if let Some((x, y)) = self
            .cell_keys()
            .find(|&(x, y)| self.cells[x][y].total() == Fin(0))
        {
            return Err(Error::InvalidArgument(format!(
                "cell ({},{}) is empty",
                self.xs[x], self.ys[y]
            )));
        }
        if let Some(o) = &self.open {
            let want = match o.side {
                Side::X => self.ys.len(),
                Side::Y => self.xs.len(),
            };
            if o.template.len() != want || o.template.iter().any(|c| c.total() == Fin(0)) {
                return Err(Error::InvalidArgument(
                    "open-side template size mismatch".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn node_count(&self) -> usize {
        self.nx() + self.ny()
    }

    pub fn side(&self, z: usize) -> Side {
        if z < self.nx() {
            Side::X
        } else {
            Side::Y
        }
    }

    pub fn node_name(&self, z: usize) -> &str {
        if z < self.nx() {
            &self.xs[z]
        } else {
            &self.ys[z - self.nx()]
        }
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.x_index(name)
            .or_else(|| self.y_index(name).map(|i| i + self.nx()))
    }

    pub fn x_index(&self, name: &str) -> Option<usize> {
        self.xs.iter().position(|s| s == name)
    }

    pub fn y_index(&self, name: &str) -> Option<usize> {
        self.ys.iter().position(|s| s == name)
    }

    pub fn x_node(&self, xi: usize) -> usize {
        xi
    }

    pub fn y_node(&self, yi: usize) -> usize {
        self.nx() + yi
    }

    pub fn cell(&self, xi: usize, yi: usize) -> &BiCluster {
        &self.cells[xi][yi]
    }

    /// The cell shared by an X node and a Y node, given as node ids in either order.
    pub fn cell_of_nodes(&self, a: usize, b: usize) -> (usize, usize) {
        let (x, y) = if a < self.nx() { (a, b) } else { (b, a) };
        (x, y - self.nx())
    }

    pub fn cell_keys(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let ny = self.ny();
        (0..self.nx()).flat_map(move |x| (0..ny).map(move |y| (x, y)))
    }

    pub fn transpose(&self) -> GridSpec {
        GridSpec {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
            cells: (0..self.ny())
                .map(|y| {
                    (0..self.nx())
                        .map(|x| self.cells[x][y].transpose())
                        .collect()
                })
                .collect(),
            open: self.open.as_ref().map(|o| OpenSide {
                side: o.side.other(),
                template: o.template.iter().map(|c| c.transpose()).collect(),
            }),
        }
    }

    /// Replace the open side by `copies` explicit nodes named `<side>+1..`.
    pub fn materialize_open(&self, copies: usize) -> GridSpec {
        let mut g = self.clone();
        let Some(o) = g.open.take() else { return g };
        for i in 1..=copies {
            match o.side {
                Side::Y => {
                    g.ys.push(format!("y+{i}"));
                    for (x, c) in o.template.iter().enumerate() {
                        g.cells[x].push(*c);
                    }
                }
                Side::X => {
                    g.xs.push(format!("x+{i}"));
                    g.cells.push(o.template.clone());
                }
            }
        }
        g
    }

    pub fn is_finite(&self) -> bool {
        self.open.is_none() && self.cells.iter().flatten().all(|c| c.is_finite())
    }

    pub fn world_count(&self) -> ExtNat {
        self.cells.iter().flatten().map(|c| c.total()).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    xs: Vec<String>,
    ys: Vec<String>,
    cells: BTreeMap<String, BiCluster>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    open: Option<OpenJson>,
}

#[derive(Serialize, Deserialize)]
struct OpenJson {
    side: Side,
    template: BTreeMap<String, BiCluster>,
}

impl Serialize for GridSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cells = self
            .cell_keys()
            .map(|(x, y)| (format!("{},{}", self.xs[x], self.ys[y]), self.cells[x][y]))
            .collect();
        let open = self.open.as_ref().map(|o| {
            let names = match o.side {
                Side::X => &self.ys,
                Side::Y => &self.xs,
            };
            OpenJson {
                side: o.side,
                template: names
                    .iter()
                    .cloned()
                    .zip(o.template.iter().copied())
                    .collect(),
            }
        });
        GridJson {
            xs: self.xs.clone(),
            ys: self.ys.clone(),
            cells,
            open,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = GridJson::deserialize(d)?;
        let mut cells = vec![vec![BiCluster::default(); j.ys.len()]; j.xs.len()];
        for (key, c) in &j.cells {
            let (x, y) = key
                .split_once(',')
                .ok_or_else(|| D::Error::custom(format!("bad cell key {key:?}")))?;
            let xi = j.xs.iter().position(|s| s == x.trim());
            let yi = j.ys.iter().position(|s| s == y.trim());
            match (xi, yi) {
                (Some(xi), Some(yi)) => cells[xi][yi] = *c,
                _ => return Err(D::Error::custom(format!("unknown cell {key:?}"))),
            }
        }
        let open = match j.open {
            None => None,
            Some(o) => {
                let names = match o.side {
                    Side::X => &j.ys,
                    Side::Y => &j.xs,
                };
                let template = names
                    .iter()
                    .map(|n| {
                        o.template
                            .get(n)
                            .copied()
                            .ok_or_else(|| D::Error::custom(format!("open template misses {n}")))
                    })
                    .collect::<std::result::Result<_, _>>()?;
                Some(OpenSide {
                    side: o.side,
                    template,
                })
            }
        };
        let g = GridSpec {
            xs: j.xs,
            ys: j.ys,
            cells,
            open,
        };
        g.validate().map_err(D::Error::custom)?;
        Ok(g)
    }
}

/// A concrete point of a realized grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PointInfo {
    pub x: usize,
    pub y: usize,
    pub kind: PointKind,
    pub ordinal: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Realization {
    pub frame: Frame,
    pub points: Vec<PointInfo>,
}

impl Realization {
    pub fn world(&self, x: usize, y: usize, kind: PointKind, ordinal: u64) -> Option<usize> {
        self.points
            .iter()
            .position(|p| p.x == x && p.y == y && p.kind == kind && p.ordinal == ordinal)
    }

    pub fn cell_worlds(&self, x: usize, y: usize) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&w| self.points[w].x == x && self.points[w].y == y)
            .collect()
    }

    /// Worlds in column `x` (all cells with that X node).
    pub fn column(&self, x: usize) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&w| self.points[w].x == x)
            .collect()
    }

    /// Worlds in row `y` (all cells with that Y node).
    pub fn row(&self, y: usize) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&w| self.points[w].y == y)
            .collect()
    }
}

/// One world per point. Distinct points are `R_h`-related iff they share a
/// row and `R_v`-related iff they share a column; loops follow the kinds.
pub fn realize_grid(g: &GridSpec) -> Result<Realization> {
    if g.open.is_some() {
        return Err(Error::Infinite("open side".into()));
    }
    if let Some((x, y)) = g.cell_keys().find(|&(x, y)| !g.cells[x][y].is_finite()) {
        return Err(Error::Infinite(format!("cell ({},{})", g.xs[x], g.ys[y])));
    }
    let mut points = Vec::new();
    for (x, y) in g.cell_keys() {
        for (kind, ordinal) in g.cells[x][y].points() {
            points.push(PointInfo {
                x,
                y,
                kind,
                ordinal,
            });
        }
    }
    let n = points.len();
    let mut rh = Relation::empty(n);
    let mut rv = Relation::empty(n);
    for (u, p) in points.iter().enumerate() {
        for (w, q) in points.iter().enumerate() {
            if u == w {
                if p.kind.reflexive(Axis::H) {
                    rh.insert(u, u);
                }
                if p.kind.reflexive(Axis::V) {
                    rv.insert(u, u);
                }
                continue;
            }
            if p.y == q.y {
                rh.insert(u, w);
            }
            if p.x == q.x {
                rv.insert(u, w);
            }
        }
    }
    Ok(Realization {
        frame: Frame { rh, rv },
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub grid: GridSpec,
    pub root: usize,
    /// `(xi, yi)` of each world.
    pub world_cell: Vec<(usize, usize)>,
}

// Classes of an equivalence relation given as rows, numbered by least member.
fn classes(r: &Relation) -> Vec<usize> {
    let n = r.len();
    let mut class = vec![usize::MAX; n];
    let mut next = 0;
    for w in 0..n {
        if class[w] == usize::MAX {
            for u in r.succ(w).ones() {
                class[u] = next;
            }
            class[w] = next;
            next += 1;
        }
    }
    class
}

/// Split a rooted frame with commuting pseudo-equivalences into its grid of
/// bi-clusters. Columns (X) are the `R_v⁺`-classes, rows (Y) the
/// `R_h⁺`-classes, both numbered by least world.
pub fn decompose_frame(f: &Frame) -> Result<Decomposition> {
    let root = f.root().ok_or(Error::NotRooted)?;
    check_commuting_pseudo_equivalences(f)
        .map_err(|w| Error::NotAGrid(serde_json::to_string(&w).unwrap_or_default()))?;
    let col = classes(&f.rv.reflexive_closure());
    let row = classes(&f.rh.reflexive_closure());
    let nx = col.iter().max().map_or(0, |m| m + 1);
    let ny = row.iter().max().map_or(0, |m| m + 1);
    let mut cells = vec![vec![BiCluster::default(); ny]; nx];
    for w in 0..f.size() {
        let k = PointKind::from_loops(f.rh.contains(w, w), f.rv.contains(w, w));
        let c = &mut cells[col[w]][row[w]];
        *c = c.with(k, Fin(c.n(k) + 1));
    }
    for x in 0..nx {
        for y in 0..ny {
            if cells[x][y].total() == Fin(0) {
                return Err(Error::NotAGrid(format!(
                    "column {x} and row {y} do not meet"
                )));
            }
        }
    }
    // (gc1)/(gc2) and the bi-cluster property: for distinct u, w the relations
    // are exactly "same row" and "same column".
    for u in 0..f.size() {
        for w in 0..f.size() {
            if u != w
                && (f.rh.contains(u, w) != (row[u] == row[w])
                    || f.rv.contains(u, w) != (col[u] == col[w]))
            {
                return Err(Error::NotAGrid(format!(
                    "worlds {u},{w} break the grid shape"
                )));
            }
        }
    }
    let grid = GridSpec::new(
        (1..=nx).map(|i| format!("x{i}")).collect(),
        (1..=ny).map(|i| format!("y{i}")).collect(),
        cells,
    )?;
    Ok(Decomposition {
        grid,
        root,
        world_cell: (0..f.size()).map(|w| (col[w], row[w])).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    F,
    G,
    H,
}

/// The two-column, one-row families: `F_k` has cells `{ri:k}` and
/// `{ri:k+1}`, `G_k` two cells `{ri:k-2, rr:1}`, `H_k` two cells `{ri:k}`.
pub fn build_family(kind: Family, k: u64) -> Result<GridSpec> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "family index k={k} must be at least 2"
        )));
    }
    let (a, b) = match kind {
        Family::F => (BiCluster::new(0, k, 0, 0), BiCluster::new(0, k + 1, 0, 0)),
        Family::G => {
            let c = BiCluster::new(1, k - 2, 0, 0);
            (c, c)
        }
        Family::H => {
            let c = BiCluster::new(0, k, 0, 0);
            (c, c)
        }
    };
    GridSpec::new(
        vec!["x1".into(), "x2".into()],
        vec!["y".into()],
        vec![vec![a], vec![b]],
    )
}

/// Random finite grid with `1..=max_x` columns, `1..=max_y` rows and
/// `1..=max_pts` points per cell.
pub fn random_grid(rng: &mut impl Rng, max_x: usize, max_y: usize, max_pts: u64) -> GridSpec {
    let nx = rng.gen_range(1..=max_x);
    let ny = rng.gen_range(1..=max_y);
    let cells = (0..nx)
        .map(|_| {
            (0..ny)
                .map(|_| {
                    let total = rng.gen_range(1..=max_pts);
                    let mut c = [0u64; 4];
                    for _ in 0..total {
                        c[rng.gen_range(0..4)] += 1;
                    }
                    BiCluster::new(c[0], c[1], c[2], c[3])
                })
                .collect()
        })
        .collect();
    GridSpec::new(
        (1..=nx).map(|i| format!("x{i}")).collect(),
        (1..=ny).map(|i| format!("y{i}")).collect(),
        cells,
    )
    .expect("random grid is well formed")
}

/// Bitset of the worlds of a realization satisfying `pred`.
pub fn worlds_where(r: &Realization, pred: impl Fn(&PointInfo) -> bool) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(r.points.len());
    for (w, p) in r.points.iter().enumerate() {
        if pred(p) {
            s.insert(w);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::diff_product;

    #[test]
    fn classify_examples() {
        assert_eq!(
            BiCluster::new(0, 1, 1, 0).classify().unwrap(),
            BiClusterType::Impossible1
        );
        assert_eq!(
            BiCluster::new(0, 0, 0, 6).classify().unwrap(),
            BiClusterType::HVStrict
        );
        assert_eq!(
            BiCluster::new(1, 0, 1, 0).classify().unwrap(),
            BiClusterType::V2HSw
        );
        assert!(BiCluster::default().classify().is_err());
        assert_eq!(
            BiCluster::new(1, 0, 0, 0)
                .with(PointKind::RR, Aleph0)
                .classify()
                .unwrap(),
            BiClusterType::CountablyInfinite
        );
    }

    #[test]
    fn sizes_examples() {
        assert_eq!(BiCluster::new(0, 0, 0, 6).sizes(), (Fin(6), Fin(6), Fin(6)));
        assert_eq!(BiCluster::new(1, 1, 0, 0).sizes(), (Fin(4), Fin(3), Fin(2)));
        let inf = BiCluster::default().with(PointKind::RR, Aleph0);
        assert_eq!(inf.sizes(), (Aleph0, Aleph0, Aleph0));
    }

    #[test]
    fn transpose_matches_type() {
        for t in BiClusterType::FINITE {
            let p = t.pattern().unwrap();
            let c = BiCluster::new(p[3] as u64, p[1] as u64, p[2] as u64, p[0] as u64);
            assert_eq!(c.transpose().classify().unwrap(), t.transpose());
        }
    }

    #[test]
    fn decompose_product() {
        let d = decompose_frame(&diff_product(2, 3).unwrap()).unwrap();
        assert_eq!((d.grid.nx(), d.grid.ny()), (2, 3));
        assert!(d
            .grid
            .cells
            .iter()
            .flatten()
            .all(|c| *c == BiCluster::new(0, 0, 0, 1)));
    }

    #[test]
    fn decompose_rejects() {
        let f = Frame::new(3, [(0, 1), (1, 0)], [(1, 2), (2, 1)]).unwrap();
        assert!(matches!(decompose_frame(&f), Err(Error::NotAGrid(_))));
        let f = Frame::new(2, [], []).unwrap();
        assert_eq!(decompose_frame(&f), Err(Error::NotRooted));
    }

    #[test]
    fn families() {
        let f3 = build_family(Family::F, 3).unwrap();
        assert_eq!(f3.cells[0][0].classify().unwrap(), BiClusterType::VStrict);
        assert_eq!(f3.cells[1][0].classify().unwrap(), BiClusterType::VStrict);
        let g4 = build_family(Family::G, 4).unwrap();
        assert_eq!(g4.cells[0][0].classify().unwrap(), BiClusterType::H2VSw);
        assert_eq!(
            realize_grid(&build_family(Family::H, 3).unwrap())
                .unwrap()
                .frame
                .size(),
            6
        );
        assert!(build_family(Family::F, 1).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let s = r#"{"xs":["x1"],"ys":["y1","y2"],"cells":{"x1,y1":{"rr":1,"ir":"inf"},"x1,y2":{"ii":2}}}"#;
        let g: GridSpec = serde_json::from_str(s).unwrap();
        assert_eq!(g.cells[0][0].get(PointKind::IR), Aleph0);
        let back: GridSpec = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        let missing = r#"{"xs":["x1"],"ys":["y1","y2"],"cells":{"x1,y1":{"rr":1}}}"#;
        assert!(serde_json::from_str::<GridSpec>(missing).is_err());
    }
}
