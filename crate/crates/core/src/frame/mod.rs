//! Finite bimodal Kripke frames with bitset relations.

mod search;

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::Axis;

pub use search::{search_pmorphism, SearchOptions, SearchResult};

/// Binary relation on `0..n`, one successor bitset per world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    rows: Vec<FixedBitSet>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        Relation {
            rows: (0..n).map(|_| FixedBitSet::with_capacity(n)).collect(),
        }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut r = Relation::empty(n);
        for (i, j) in pairs {
            if i >= n {
                return Err(Error::InvalidWorld(i));
            }
            if j >= n {
                return Err(Error::InvalidWorld(j));
            }
            r.insert(i, j);
        }
        Ok(r)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        self.rows[i].insert(j);
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    pub fn succ(&self, i: usize) -> &FixedBitSet {
        &self.rows[i]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.ones().map(move |j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    pub fn transpose(&self) -> Relation {
        let mut t = Relation::empty(self.len());
        for (i, j) in self.pairs() {
            t.insert(j, i);
        }
        t
    }

    pub fn reflexive_closure(&self) -> Relation {
        let mut r = self.clone();
        for i in 0..self.len() {
            r.insert(i, i);
        }
        r
    }

    /// `self ; other`: pairs (i,k) with i self j and j other k.
    pub fn compose(&self, other: &Relation) -> Relation {
        let mut out = Relation::empty(self.len());
        for i in 0..self.len() {
            for j in self.rows[i].ones() {
                out.rows[i].union_with(&other.rows[j]);
            }
        }
        out
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.rows
            .iter()
            .zip(&other.rows)
            .all(|(a, b)| a.is_subset(b))
    }

    /// Restrict to the worlds in `keep` (given as old indices), renumbering
    /// them in order.
    pub fn restrict(&self, keep: &[usize]) -> Relation {
        let mut idx = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            idx[old] = new;
        }
        let mut r = Relation::empty(keep.len());
        for (new, &old) in keep.iter().enumerate() {
            for j in self.rows[old].ones() {
                if idx[j] != usize::MAX {
                    r.insert(new, idx[j]);
                }
            }
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnimodalFrame {
    pub r: Relation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub rh: Relation,
    pub rv: Relation,
}

/// Total map from source worlds to target worlds.
pub type PMorphismMap = Vec<usize>;

impl UnimodalFrame {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "frame needs at least one world".into(),
            ));
        }
        Ok(UnimodalFrame {
            r: Relation::from_pairs(n, pairs)?,
        })
    }

    pub fn size(&self) -> usize {
        self.r.len()
    }

    /// View as a bimodal frame with the other relation empty.
    pub fn as_bimodal(&self, axis: Axis) -> Frame {
        let empty = Relation::empty(self.size());
        match axis {
            Axis::H => Frame {
                rh: self.r.clone(),
                rv: empty,
            },
            Axis::V => Frame {
                rh: empty,
                rv: self.r.clone(),
            },
        }
    }
}

/// `(W, ≠)` on `n` worlds.
pub fn make_difference_frame(n: usize) -> Result<UnimodalFrame> {
    UnimodalFrame::new(
        n,
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))),
    )
}

/// `(W, W×W)` on `n` worlds.
pub fn make_universal_frame(n: usize) -> Result<UnimodalFrame> {
    UnimodalFrame::new(n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j))))
}

/// Index of the pair `(x, y)` in a product whose vertical factor has `ny` worlds.
pub fn product_index(x: usize, y: usize, ny: usize) -> usize {
    x * ny + y
}

/// `fh × fv`: `rh` moves the first coordinate, `rv` the second.
pub fn product_frame(fh: &UnimodalFrame, fv: &UnimodalFrame) -> Frame {
    let (nx, ny) = (fh.size(), fv.size());
    let n = nx * ny;
    let mut rh = Relation::empty(n);
    let mut rv = Relation::empty(n);
    for (x, x2) in fh.r.pairs() {
        for y in 0..ny {
            rh.insert(product_index(x, y, ny), product_index(x2, y, ny));
        }
    }
    for (y, y2) in fv.r.pairs() {
        for x in 0..nx {
            rv.insert(product_index(x, y, ny), product_index(x, y2, ny));
        }
    }
    Frame { rh, rv }
}

/// `diff(nx) × diff(ny)`.
pub fn diff_product(nx: usize, ny: usize) -> Result<Frame> {
    Ok(product_frame(
        &make_difference_frame(nx)?,
        &make_difference_frame(ny)?,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PseudoEqWitness {
    NotSymmetric { x: usize, y: usize },
    NotPseudoTransitive { x: usize, y: usize, z: usize },
}

/// Symmetric and `R(x,y) ∧ R(y,z) → x = z ∨ R(x,z)`.
pub fn check_pseudo_equivalence(r: &Relation) -> std::result::Result<(), PseudoEqWitness> {
    for (x, y) in r.pairs() {
        if !r.contains(y, x) {
            return Err(PseudoEqWitness::NotSymmetric { x, y });
        }
    }
    for x in 0..r.len() {
        for y in r.succ(x).ones() {
            for z in r.succ(y).ones() {
                if x != z && !r.contains(x, z) {
                    return Err(PseudoEqWitness::NotPseudoTransitive { x, y, z });
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CommuteWitness {
    NotPseudoEquivalence {
        axis: Axis,
        witness: PseudoEqWitness,
    },
    /// `(x, z)` is in one composite of the reflexive closures but not the other.
    NotCommuting { x: usize, z: usize },
}

/// Both relations are pseudo-equivalences and their reflexive closures commute.
pub fn check_commuting_pseudo_equivalences(f: &Frame) -> std::result::Result<(), CommuteWitness> {
    for axis in [Axis::H, Axis::V] {
        check_pseudo_equivalence(f.rel(axis))
            .map_err(|witness| CommuteWitness::NotPseudoEquivalence { axis, witness })?;
    }
    let h = f.rh.reflexive_closure();
    let v = f.rv.reflexive_closure();
    let hv = h.compose(&v);
    let vh = v.compose(&h);
    for x in 0..f.size() {
        let mut diff = hv.succ(x).clone();
        diff.symmetric_difference_with(vh.succ(x));
        if let Some(z) = diff.ones().next() {
            return Err(CommuteWitness::NotCommuting { x, z });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PMorphismWitness {
    WrongLength {
        expected: usize,
        got: usize,
    },
    OutOfRange {
        world: usize,
        image: usize,
    },
    /// `x R y` but not `f(x) R f(y)`.
    Forth {
        axis: Axis,
        x: usize,
        y: usize,
    },
    /// `f(x) R t` but no `R`-successor of `x` maps to `t`.
    Back {
        axis: Axis,
        x: usize,
        target: usize,
    },
    NotOnto {
        target: usize,
    },
}

impl Frame {
    pub fn new(
        n: usize,
        rh: impl IntoIterator<Item = (usize, usize)>,
        rv: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "frame needs at least one world".into(),
            ));
        }
        Ok(Frame {
            rh: Relation::from_pairs(n, rh)?,
            rv: Relation::from_pairs(n, rv)?,
        })
    }

    pub fn size(&self) -> usize {
        self.rh.len()
    }

    pub fn rel(&self, axis: Axis) -> &Relation {
        match axis {
            Axis::H => &self.rh,
            Axis::V => &self.rv,
        }
    }

    /// Worlds reachable from `x` along `R_h ∪ R_v` (including `x`).
    pub fn reachable(&self, x: usize) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.size());
        let mut queue = VecDeque::from([x]);
        seen.insert(x);
        while let Some(w) = queue.pop_front() {
            for r in [&self.rh, &self.rv] {
                for u in r.succ(w).ones() {
                    if !seen.put(u) {
                        queue.push_back(u);
                    }
                }
            }
        }
        seen
    }

    /// Least world generating the whole frame, if any.
    pub fn root(&self) -> Option<usize> {
        (0..self.size()).find(|&x| self.reachable(x).count_ones(..) == self.size())
    }

    pub fn is_rooted(&self) -> bool {
        self.root().is_some()
    }

    /// Subframe generated by `x`, with the map from new to old indices.
    pub fn generated_subframe(&self, x: usize) -> Result<(Frame, Vec<usize>)> {
        if x >= self.size() {
            return Err(Error::InvalidWorld(x));
        }
        let keep: Vec<usize> = self.reachable(x).ones().collect();
        Ok((
            Frame {
                rh: self.rh.restrict(&keep),
                rv: self.rv.restrict(&keep),
            },
            keep,
        ))
    }

    pub fn swap_axes(&self) -> Frame {
        Frame {
            rh: self.rv.clone(),
            rv: self.rh.clone(),
        }
    }

    pub fn is_irreflexive(&self, axis: Axis) -> bool {
        (0..self.size()).all(|i| !self.rel(axis).contains(i, i))
    }
}

/// Check that `f` is a homomorphism with the backward condition on both
/// axes, and onto if `surjective`.
pub fn verify_pmorphism(
    src: &Frame,
    dst: &Frame,
    f: &[usize],
    surjective: bool,
) -> std::result::Result<(), PMorphismWitness> {
    if f.len() != src.size() {
        return Err(PMorphismWitness::WrongLength {
            expected: src.size(),
            got: f.len(),
        });
    }
    if let Some((world, &image)) = f.iter().enumerate().find(|(_, &t)| t >= dst.size()) {
        return Err(PMorphismWitness::OutOfRange { world, image });
    }
    for axis in [Axis::H, Axis::V] {
        let (rs, rd) = (src.rel(axis), dst.rel(axis));
        for (x, y) in rs.pairs() {
            if !rd.contains(f[x], f[y]) {
                return Err(PMorphismWitness::Forth { axis, x, y });
            }
        }
        for x in 0..src.size() {
            let mut img = FixedBitSet::with_capacity(dst.size());
            for y in rs.succ(x).ones() {
                img.insert(f[y]);
            }
            if let Some(target) = rd.succ(f[x]).difference(&img).next() {
                return Err(PMorphismWitness::Back { axis, x, target });
            }
        }
    }
    if surjective {
        let mut hit = FixedBitSet::with_capacity(dst.size());
        for &t in f {
            hit.insert(t);
        }
        if let Some(target) = (0..dst.size()).find(|&t| !hit.contains(t)) {
            return Err(PMorphismWitness::NotOnto { target });
        }
    }
    Ok(())
}

/// Unimodal variant of [`verify_pmorphism`], via the `h` axis.
pub fn verify_unimodal_pmorphism(
    src: &UnimodalFrame,
    dst: &UnimodalFrame,
    f: &[usize],
    surjective: bool,
) -> std::result::Result<(), PMorphismWitness> {
    verify_pmorphism(
        &src.as_bimodal(Axis::H),
        &dst.as_bimodal(Axis::H),
        f,
        surjective,
    )
}

/// `g ∘ f`
pub fn compose_maps(f: &[usize], g: &[usize]) -> PMorphismMap {
    f.iter().map(|&t| g[t]).collect()
}

/// Product of componentwise maps `fh: U → U'`, `fv: V → V'`.
pub fn product_map(fh: &[usize], fv: &[usize], ny_dst: usize) -> PMorphismMap {
    let mut out = Vec::with_capacity(fh.len() * fv.len());
    for &a in fh {
        for &b in fv {
            out.push(product_index(a, b, ny_dst));
        }
    }
    out
}

/// Rooted frames: commuting irreflexive pseudo-equivalences whose grid
/// decomposition has only singleton bi-clusters. Non-rooted frames are
/// checked per generated subframe.
pub fn is_product_of_difference_frames(f: &Frame) -> bool {
    if !f.is_rooted() {
        return (0..f.size()).all(|x| {
            let (g, _) = f.generated_subframe(x).expect("valid world");
            g.is_rooted() && is_product_of_difference_frames(&g)
        });
    }
    if !f.is_irreflexive(Axis::H) || !f.is_irreflexive(Axis::V) {
        return false;
    }
    if check_commuting_pseudo_equivalences(f).is_err() {
        return false;
    }
    match crate::grid::decompose_frame(f) {
        Ok(d) => d
            .grid
            .cells
            .iter()
            .flatten()
            .all(|c| c.total() == crate::extnat::Fin(1)),
        Err(_) => false,
    }
}

// JSON shapes: {"worlds": n, "rh": [[i,j],..], "rv": [..]} and {"worlds": n, "r": [..]}.
#[derive(Serialize, Deserialize)]
struct FrameJson {
    worlds: usize,
    rh: Vec<(usize, usize)>,
    rv: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct UnimodalJson {
    worlds: usize,
    r: Vec<(usize, usize)>,
}

impl Serialize for Frame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FrameJson {
            worlds: self.size(),
            rh: self.rh.pairs().collect(),
            rv: self.rv.pairs().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Frame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FrameJson::deserialize(d)?;
        Frame::new(j.worlds, j.rh, j.rv).map_err(serde::de::Error::custom)
    }
}

impl Serialize for UnimodalFrame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        UnimodalJson {
            worlds: self.size(),
            r: self.r.pairs().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnimodalFrame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = UnimodalJson::deserialize(d)?;
        UnimodalFrame::new(j.worlds, j.r).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_and_universal() {
        assert!(make_difference_frame(0).is_err());
        assert_eq!(make_difference_frame(1).unwrap().r.edge_count(), 0);
        assert_eq!(make_difference_frame(3).unwrap().r.edge_count(), 6);
        let u1 = make_universal_frame(1).unwrap();
        assert!(u1.r.contains(0, 0));
        assert_eq!(make_universal_frame(2).unwrap().r.edge_count(), 4);
        for n in 1..=6 {
            let d = make_difference_frame(n).unwrap();
            let u = make_universal_frame(n).unwrap();
            assert!(d.r.is_subset(&u.r));
        }
    }

    #[test]
    fn product_2x2() {
        let p = diff_product(2, 2).unwrap();
        assert_eq!(p.size(), 4);
        let mut rh: Vec<_> = p.rh.pairs().collect();
        rh.sort();
        let i = |x, y| product_index(x, y, 2);
        let mut want = vec![
            (i(0, 0), i(1, 0)),
            (i(1, 0), i(0, 0)),
            (i(0, 1), i(1, 1)),
            (i(1, 1), i(0, 1)),
        ];
        want.sort();
        assert_eq!(rh, want);
    }

    #[test]
    fn pseudo_equivalence_examples() {
        assert!(check_pseudo_equivalence(&make_difference_frame(4).unwrap().r).is_ok());
        let eq = Relation::from_pairs(3, [(0, 0), (1, 1), (0, 1), (1, 0), (2, 2)]).unwrap();
        assert!(check_pseudo_equivalence(&eq).is_ok());
        let bad = Relation::from_pairs(3, [(0, 1), (1, 0), (0, 2)]).unwrap();
        assert_eq!(
            check_pseudo_equivalence(&bad),
            Err(PseudoEqWitness::NotSymmetric { x: 0, y: 2 })
        );
    }

    #[test]
    fn commuting_examples() {
        assert!(check_commuting_pseudo_equivalences(&diff_product(3, 2).unwrap()).is_ok());
        let f = Frame::new(3, [(0, 1), (1, 0)], [(1, 2), (2, 1)]).unwrap();
        assert!(matches!(
            check_commuting_pseudo_equivalences(&f),
            Err(CommuteWitness::NotCommuting { .. })
        ));
    }

    #[test]
    fn pmorphism_examples() {
        let p = diff_product(2, 3).unwrap();
        let id: Vec<usize> = (0..p.size()).collect();
        assert!(verify_pmorphism(&p, &p, &id, true).is_ok());
        // i ↦ i mod k from diff(2k) onto universal(k)
        for k in 1..=4 {
            let d = make_difference_frame(2 * k).unwrap();
            let u = make_universal_frame(k).unwrap();
            let f: Vec<usize> = (0..2 * k).map(|i| i % k).collect();
            assert!(verify_unimodal_pmorphism(&d, &u, &f, true).is_ok());
        }
        let d2 = make_difference_frame(2).unwrap();
        let one = make_difference_frame(1).unwrap();
        assert!(matches!(
            verify_unimodal_pmorphism(&d2, &one, &[0, 0], false),
            Err(PMorphismWitness::Forth { .. })
        ));
    }

    #[test]
    fn subframes() {
        let p = diff_product(2, 2).unwrap();
        let (g, map) = p.generated_subframe(3).unwrap();
        assert_eq!(g, p);
        assert_eq!(map, vec![0, 1, 2, 3]);
        // disjoint union of a 2-world h-pair and an isolated world
        let f = Frame::new(3, [(0, 1), (1, 0)], []).unwrap();
        let (g, map) = f.generated_subframe(0).unwrap();
        assert_eq!(g.size(), 2);
        assert_eq!(map, vec![0, 1]);
        assert!(f.generated_subframe(7).is_err());
        assert!(!f.is_rooted());
    }

    #[test]
    fn json_roundtrip() {
        let p = diff_product(2, 2).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let q: Frame = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<Frame>(r#"{"worlds":1,"rh":[[0,3]],"rv":[]}"#).is_err());
    }
}
