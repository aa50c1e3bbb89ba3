//! Explicit onto p-morphisms from products of difference frames onto
//! bi-clusters and grids, and the network-extension game.

mod game;

use serde::{Deserialize, Serialize};

use crate::constraints::{check_solution, extract_constraints, Solution};
use crate::error::{Error, Result};
use crate::extnat::{ExtNat, Fin};
use crate::frame::{
    diff_product, make_difference_frame, make_universal_frame, product_frame, product_index,
    verify_pmorphism, Frame, PMorphismMap,
};
use crate::grid::{realize_grid, BiCluster, BiClusterType, GridSpec, PointInfo, PointKind};

pub use game::{
    game_play, Adversary, Coord, GameOutcome, GameReport, GameState, Move, Response, Round,
    Strategy,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatinSquare {
    pub n: usize,
    pub symbols: Vec<usize>,
    pub rows: Vec<Vec<usize>>,
}

impl LatinSquare {
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.rows[i][j]
    }

    /// Each row and each column is a permutation of the symbol positions.
    /// Repeated symbols count as distinct entries.
    pub fn is_latin(&self) -> bool {
        let pos = |row: &mut dyn Iterator<Item = usize>| {
            let mut seen: Vec<usize> = row.collect();
            seen.sort_unstable();
            let mut want = self.symbols.clone();
            want.sort_unstable();
            seen == want
        };
        (0..self.n).all(|i| pos(&mut self.rows[i].iter().copied()))
            && (0..self.n).all(|j| pos(&mut (0..self.n).map(|i| self.rows[i][j])))
    }
}

/// Entry `(i, j)` is `symbols[(i + j) mod n]`.
pub fn cyclic_latin_square(symbols: &[usize], n: usize) -> Result<LatinSquare> {
    if n == 0 || symbols.len() != n {
        return Err(Error::InvalidArgument(format!(
            "latin square of order {n} needs {n} symbols, got {}",
            symbols.len()
        )));
    }
    let rows = (0..n)
        .map(|i| (0..n).map(|j| symbols[(i + j) % n]).collect())
        .collect();
    Ok(LatinSquare {
        n,
        symbols: symbols.to_vec(),
        rows,
    })
}

/// A map from `diff(nx) × diff(ny)`, laid out by [`product_index`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductMap {
    pub nx: usize,
    pub ny: usize,
    pub map: PMorphismMap,
}

impl ProductMap {
    pub fn source(&self) -> Result<Frame> {
        diff_product(self.nx, self.ny)
    }

    pub fn at(&self, u: usize, v: usize) -> usize {
        self.map[product_index(u, v, self.ny)]
    }

    pub fn verify_onto(&self, dst: &Frame) -> Result<()> {
        verify_pmorphism(&self.source()?, dst, &self.map, true)
            .map_err(|w| Error::Precondition(format!("not an onto p-morphism: {w:?}")))
    }
}

fn single_cell(c: &BiCluster) -> Result<GridSpec> {
    GridSpec::new(vec!["x".into()], vec!["y".into()], vec![vec![*c]])
}

/// The realized one-cell frame; worlds follow [`BiCluster::points`].
pub fn cluster_frame(c: &BiCluster) -> Result<Frame> {
    Ok(realize_grid(&single_cell(c)?)?.frame)
}

fn need(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ConstraintViolated(what()))
    }
}

/// Each point once, each `rr` point twice, padded with further copies of
/// the first `rr` point up to `n` entries.
fn multiset(c: &BiCluster, n: usize) -> Vec<usize> {
    let pts = c.points();
    let mut s = Vec::with_capacity(n);
    let mut first_rr = None;
    for (w, &(kind, _)) in pts.iter().enumerate() {
        s.push(w);
        if kind == PointKind::RR {
            s.push(w);
            first_rr.get_or_insert(w);
        }
    }
    while s.len() < n {
        s.push(first_rr.expect("switch types contain an rr point"));
    }
    s
}

/// Onto p-morphism from `diff(x) × diff(y)` onto the realized bi-cluster,
/// checked before it is returned.
pub fn bicluster_preimage(c: &BiCluster, x: usize, y: usize) -> Result<ProductMap> {
    let ty = c.classify()?;
    if !c.is_finite() || ty.is_infinity() {
        return Err(Error::Infinite(format!("{c} ({ty:?}) needs x = y = ℵ₀")));
    }
    if ty.is_impossible() {
        return Err(Error::Precondition(format!("{c} is {ty:?}: no sizes work")));
    }
    if x == 0 || y == 0 {
        return Err(Error::InvalidArgument("sides must be positive".into()));
    }
    let (h, v, card) = c.sizes();
    let fin = |e: ExtNat| e.finite().expect("finite bi-cluster") as usize;
    let (h, v, n) = (fin(h), fin(v), fin(card));
    let all: Vec<usize> = (0..n).collect();
    use BiClusterType::*;
    // (square, order, collapse the first coordinate, collapse the second)
    let (sq, collapse_u, collapse_v) = match ty {
        HVStrict => {
            need(x == n, || {
                format!("hvstrict needs x = |C| = {n}, got x = {x}")
            })?;
            need(y == n, || {
                format!("hvstrict needs y = |C| = {n}, got y = {y}")
            })?;
            (cyclic_latin_square(&all, n)?, false, false)
        }
        HStrict => {
            need(x == n, || {
                format!("hstrict needs x = |C| = {n}, got x = {x}")
            })?;
            need(y >= v, || {
                format!("hstrict needs y ≥ v_size = {v}, got y = {y}")
            })?;
            (cyclic_latin_square(&all, n)?, false, true)
        }
        VStrict => {
            need(x >= h, || {
                format!("vstrict needs x ≥ h_size = {h}, got x = {x}")
            })?;
            need(y == n, || {
                format!("vstrict needs y = |C| = {n}, got y = {y}")
            })?;
            (cyclic_latin_square(&all, n)?, true, false)
        }
        Free => {
            need(x >= h, || {
                format!("free needs x ≥ h_size = {h}, got x = {x}")
            })?;
            need(y >= v, || {
                format!("free needs y ≥ v_size = {v}, got y = {y}")
            })?;
            (cyclic_latin_square(&all, n)?, true, true)
        }
        H2VSw => {
            need(x >= 2 * y, || {
                format!("h2vsw needs x ≥ 2y, got x = {x}, y = {y}")
            })?;
            need(y >= v, || {
                format!("h2vsw needs y ≥ v_size = {v}, got y = {y}")
            })?;
            (cyclic_latin_square(&multiset(c, y), y)?, true, false)
        }
        V2HSw => {
            need(x >= h, || {
                format!("v2hsw needs x ≥ h_size = {h}, got x = {x}")
            })?;
            need(y >= 2 * x, || {
                format!("v2hsw needs y ≥ 2x, got x = {x}, y = {y}")
            })?;
            (cyclic_latin_square(&multiset(c, x), x)?, false, true)
        }
        EqSw => {
            need(x == y, || format!("=sw needs x = y, got x = {x}, y = {y}"))?;
            need(x >= h, || {
                format!("=sw needs x ≥ h_size = {h}, got x = {x}")
            })?;
            need(y >= v, || {
                format!("=sw needs y ≥ v_size = {v}, got y = {y}")
            })?;
            (cyclic_latin_square(&multiset(c, x), x)?, false, false)
        }
        _ => unreachable!("infinite and impossible types handled above"),
    };
    // `diff(m) → (W, W×W)` by `i ↦ i mod |W|` when `m ≥ 2|W|`.
    let k = sq.n;
    let mut map = Vec::with_capacity(x * y);
    for u in 0..x {
        for w in 0..y {
            let i = if collapse_u { u % k } else { u };
            let j = if collapse_v { w % k } else { w };
            map.push(sq.get(i, j));
        }
    }
    let pm = ProductMap { nx: x, ny: y, map };
    pm.verify_onto(&cluster_frame(c)?)?;
    Ok(pm)
}

/// Onto p-morphism from `(U, U×U) × diff(n)` onto an h2vsw bi-cluster,
/// `|U| = n ≥ v_size`: a cyclic Latin square over the points with every
/// `rr` point repeated.
pub fn h2vsw_universal_preimage(c: &BiCluster, n: usize) -> Result<PMorphismMap> {
    let ty = c.classify()?;
    if ty != BiClusterType::H2VSw || !c.is_finite() {
        return Err(Error::Precondition(format!("{c} is {ty:?}, not h2vsw")));
    }
    let v = c.sizes().1.finite().expect("finite") as usize;
    need(n >= v, || {
        format!("needs |U| = |V| ≥ v_size = {v}, got {n}")
    })?;
    let sq = cyclic_latin_square(&multiset(c, n), n)?;
    let map: PMorphismMap = (0..n)
        .flat_map(|u| (0..n).map(move |w| (u, w)))
        .map(|(u, w)| sq.get(u, w))
        .collect();
    let src = product_frame(&make_universal_frame(n)?, &make_difference_frame(n)?);
    verify_pmorphism(&src, &cluster_frame(c)?, &map, true)
        .map_err(|w| Error::Precondition(format!("not an onto p-morphism: {w:?}")))?;
    Ok(map)
}

/// Block construction: disjoint `U_x` of size `ξ(x)` and `V_y` of size
/// `ξ(y)`, with each block `U_x × V_y` mapped onto cell `(x, y)`.
pub fn assemble_product_pmorphism(g: &GridSpec, xi: &[ExtNat]) -> Result<ProductMap> {
    let con = extract_constraints(g)
        .map_err(|c| Error::Precondition(format!("impossible cell {:?}", c.kind)))?;
    if xi.len() != con.len() {
        return Err(Error::InvalidArgument(format!(
            "solution has {} values for {} nodes",
            xi.len(),
            con.len()
        )));
    }
    check_solution(&con, xi).map_err(|c| Error::ConstraintViolated(con.render(&c)))?;
    let sizes: Vec<usize> = xi
        .iter()
        .enumerate()
        .map(|(z, e)| {
            e.finite()
                .map(|n| n as usize)
                .ok_or_else(|| Error::Infinite(format!("ξ({}) = ℵ₀", g.node_name(z))))
        })
        .collect::<Result<_>>()?;
    let (xs, ys) = sizes.split_at(g.nx());
    let offsets = |s: &[usize]| -> Vec<usize> {
        s.iter()
            .scan(0, |acc, &n| {
                let o = *acc;
                *acc += n;
                Some(o)
            })
            .collect()
    };
    let (ox, oy) = (offsets(xs), offsets(ys));
    let (nx, ny) = (xs.iter().sum::<usize>(), ys.iter().sum::<usize>());
    let r = realize_grid(g)?;
    let index: std::collections::BTreeMap<PointInfo, usize> =
        r.points.iter().enumerate().map(|(w, p)| (*p, w)).collect();
    let mut map = vec![0; nx * ny];
    for (xi_, yi) in g.cell_keys() {
        let c = g.cell(xi_, yi);
        let local = bicluster_preimage(c, xs[xi_], ys[yi])?;
        let pts = c.points();
        for u in 0..xs[xi_] {
            for v in 0..ys[yi] {
                let (kind, ordinal) = pts[local.at(u, v)];
                let w = index[&PointInfo {
                    x: xi_,
                    y: yi,
                    kind,
                    ordinal,
                }];
                map[product_index(ox[xi_] + u, oy[yi] + v, ny)] = w;
            }
        }
    }
    let pm = ProductMap { nx, ny, map };
    pm.verify_onto(&r.frame)?;
    Ok(pm)
}

/// `ξ_h(x) = |U_x|`, `ξ_h(y) = |V_y|`, where `U_x` are the first
/// coordinates whose image lies in column `x`; the result is checked
/// against the grid's constraints.
pub fn pmorphism_profile(g: &GridSpec, h: &ProductMap) -> Result<Solution> {
    let r = realize_grid(g)?;
    h.verify_onto(&r.frame)?;
    let mut xi = vec![Fin(0); g.node_count()];
    for u in 0..h.nx {
        let x = r.points[h.at(u, 0)].x;
        xi[g.x_node(x)] = xi[g.x_node(x)] + Fin(1);
    }
    for v in 0..h.ny {
        let y = r.points[h.at(0, v)].y;
        xi[g.y_node(y)] = xi[g.y_node(y)] + Fin(1);
    }
    let con = extract_constraints(g)
        .map_err(|c| Error::Precondition(format!("impossible cell {:?}", c.kind)))?;
    check_solution(&con, &xi)
        .map_err(|c| Error::ConstraintViolated(format!("profile breaks {}", con.render(&c))))?;
    Ok(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::fixtures::grid_sqbad;
    use crate::constraints::{compute_solution, diagnose, Diagnosis};
    use crate::frame::is_product_of_difference_frames;
    use crate::grid::random_grid;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn latin_squares() {
        assert_eq!(cyclic_latin_square(&[7], 1).unwrap().rows, vec![vec![7]]);
        let sq = cyclic_latin_square(&[0, 1, 2], 3).unwrap();
        assert_eq!(sq.rows, vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]);
        for n in 1..=12 {
            let s: Vec<usize> = (0..n).collect();
            assert!(cyclic_latin_square(&s, n).unwrap().is_latin());
        }
        assert!(cyclic_latin_square(&[0, 1], 3).is_err());
        assert!(cyclic_latin_square(&[], 0).is_err());
    }

    #[test]
    fn cluster_examples() {
        bicluster_preimage(&BiCluster::new(0, 0, 0, 3), 3, 3).unwrap();
        bicluster_preimage(&BiCluster::new(1, 1, 0, 0), 8, 4).unwrap();
        let e = bicluster_preimage(&BiCluster::new(0, 0, 0, 3), 3, 4).unwrap_err();
        assert!(e.to_string().contains("y = |C| = 3"), "{e}");
        let e = bicluster_preimage(&BiCluster::new(1, 1, 0, 0), 7, 4).unwrap_err();
        assert!(e.to_string().contains("x ≥ 2y"), "{e}");
        assert!(bicluster_preimage(&BiCluster::new(0, 1, 1, 0), 4, 4).is_err());
        assert!(bicluster_preimage(&BiCluster::new(1, 1, 1, 0), 40, 40).is_err());
    }

    #[test]
    fn every_possible_type_at_its_least_sizes() {
        for (c, x, y) in [
            (BiCluster::new(0, 0, 0, 2), 2, 2),
            (BiCluster::new(0, 0, 2, 0), 2, 4),
            (BiCluster::new(0, 2, 0, 0), 4, 2),
            (BiCluster::new(2, 0, 0, 0), 4, 4),
            (BiCluster::new(1, 2, 0, 0), 8, 4),
            (BiCluster::new(2, 0, 1, 0), 5, 10),
            (BiCluster::new(1, 0, 0, 2), 4, 4),
        ] {
            bicluster_preimage(&c, x, y).unwrap_or_else(|e| panic!("{c}: {e}"));
        }
    }

    #[test]
    fn grid_examples() {
        let g = grid_sqbad();
        let xi = [Fin(3), Fin(6), Fin(6), Fin(6)];
        let pm = assemble_product_pmorphism(&g, &xi).unwrap();
        assert_eq!((pm.nx, pm.ny), (9, 12));
        assert_eq!(pmorphism_profile(&g, &pm).unwrap(), xi.to_vec());

        let one = single_cell(&BiCluster::new(0, 0, 0, 2)).unwrap();
        assemble_product_pmorphism(&one, &[Fin(2), Fin(2)]).unwrap();

        let c = BiCluster::new(1, 2, 0, 0);
        let g4 = GridSpec::new(
            vec!["x1".into(), "x2".into()],
            vec!["y".into()],
            vec![vec![c], vec![c]],
        )
        .unwrap();
        assemble_product_pmorphism(&g4, &[Fin(8), Fin(8), Fin(4)]).unwrap();
        let e = assemble_product_pmorphism(&g4, &[Fin(8), Fin(7), Fin(4)]).unwrap_err();
        assert!(matches!(e, Error::ConstraintViolated(_)));
    }

    #[test]
    fn identity_profile_is_all_ones() {
        let g = GridSpec::with_default(
            &["a", "b", "c"],
            &["d", "e"],
            BiCluster::new(0, 0, 0, 1),
            &[],
        )
        .unwrap();
        let r = realize_grid(&g).unwrap();
        assert!(is_product_of_difference_frames(&r.frame));
        let pm = assemble_product_pmorphism(&g, &[Fin(1); 5]).unwrap();
        assert_eq!(pmorphism_profile(&g, &pm).unwrap(), vec![Fin(1); 5]);
    }

    #[test]
    fn collapsed_preimage_profile_is_a_solution() {
        // Relaxed sizes collapse onto the universal factor; the profile
        // still reports the uncollapsed sizes.
        let g = single_cell(&BiCluster::new(2, 0, 0, 0)).unwrap();
        let pm = assemble_product_pmorphism(&g, &[Fin(5), Fin(7)]).unwrap();
        assert_eq!(pmorphism_profile(&g, &pm).unwrap(), vec![Fin(5), Fin(7)]);
    }

    fn sizes_for(c: &BiCluster, slack: (usize, usize)) -> (usize, usize) {
        let (h, v, n) = c.sizes();
        let (h, v, n) = (
            h.finite().unwrap() as usize,
            v.finite().unwrap() as usize,
            n.finite().unwrap() as usize,
        );
        let (a, b) = slack;
        use BiClusterType::*;
        match c.classify().unwrap() {
            HVStrict => (n, n),
            HStrict => (n, v + b),
            VStrict => (h + a, n),
            Free => (h + a, v + b),
            H2VSw => (2 * (v + b) + a, v + b),
            V2HSw => (h + a, 2 * (h + a) + b),
            EqSw => (h.max(v) + a, h.max(v) + a),
            t => panic!("{t:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn preimages_are_onto(rr in 0u64..3, ri in 0u64..3, ir in 0u64..3, ii in 0u64..3,
                              a in 0usize..3, b in 0usize..3) {
            let c = BiCluster::new(rr, ri, ir, ii);
            prop_assume!(c.total() != Fin(0));
            let ty = c.classify().unwrap();
            prop_assume!(!ty.is_impossible() && !ty.is_infinity());
            let (x, y) = sizes_for(&c, (a, b));
            prop_assert!(bicluster_preimage(&c, x, y).is_ok());
        }

        #[test]
        fn profile_inverts_assembly(seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_grid(&mut rng, 3, 3, 3);
            if let Diagnosis::Good { xi_min } = diagnose(&g) {
                prop_assume!(xi_min.iter().all(|e| e.finite().is_some_and(|n| n <= 6)));
                let pm = assemble_product_pmorphism(&g, &xi_min).unwrap();
                prop_assert_eq!(pmorphism_profile(&g, &pm).unwrap(), xi_min);
            }
        }
    }

    #[test]
    fn nu_min_of_sqbad_is_assemblable() {
        let g = grid_sqbad();
        let con = extract_constraints(&g).unwrap();
        let sol = compute_solution(&con);
        assemble_product_pmorphism(&g, &sol.xi).unwrap();
    }
}
