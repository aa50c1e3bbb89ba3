//! The two-player network-extension game on a finite bi-cluster. A network
//! is a homomorphism from `(U, ≠) × (V, ≠)` into the bi-cluster; `∀` names
//! a point and a row or column, `∃` must show that point there, either
//! already (reuse) or on a fresh column or row.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{cluster_frame, ProductMap};
use crate::error::{Error, Result};
use crate::formula::Axis;
use crate::grid::{BiCluster, PointKind};

/// Which coordinate the named element `z` belongs to: a column `u ∈ U`
/// or a row `v ∈ V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coord {
    U,
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub point: usize,
    pub side: Coord,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "response", rename_all = "snake_case")]
pub enum Response {
    Reuse,
    /// Values of the fresh column (move on a row) or fresh row (move on a
    /// column), indexed by the other coordinate.
    Extend {
        values: Vec<usize>,
        #[serde(skip)]
        anchor: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameState {
    pub round: usize,
    /// `f[u][v]`
    pub f: Vec<Vec<usize>>,
    /// Embedding of `U` and `V` into the preimage, for the p-morphism
    /// strategy.
    #[serde(skip)]
    emb: Option<(Vec<usize>, Vec<usize>)>,
}

impl GameState {
    pub fn nu(&self) -> usize {
        self.f.len()
    }

    pub fn nv(&self) -> usize {
        self.f[0].len()
    }

    fn size(&self, side: Coord) -> usize {
        match side {
            Coord::U => self.nu(),
            Coord::V => self.nv(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Strategy {
    /// Follow an onto p-morphism `h` from a finite product: keep `U` and
    /// `V` embedded and answer with an unused preimage coordinate.
    FromPMorphism(ProductMap),
    /// Fill every new cell with the first `rr` point.
    GreedyRr,
    /// Try every legal response and keep one that survives the adversary's
    /// lookahead.
    Search,
}

#[derive(Clone, Debug)]
pub enum Adversary {
    Scripted(Vec<Move>),
    Random {
        seed: u64,
    },
    /// Each round, search all move sequences up to `depth` for one that
    /// leaves `∃` without a response.
    Exhaustive {
        depth: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Round {
    pub round: usize,
    #[serde(rename = "move")]
    pub mv: Move,
    #[serde(flatten)]
    pub response: Response,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum GameOutcome {
    SurvivedAllRounds {
        state: GameState,
        #[serde(skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
    Stuck {
        round: usize,
        #[serde(rename = "move")]
        mv: Move,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameReport {
    pub cluster: BiCluster,
    pub start: usize,
    pub transcript: Vec<Round>,
    #[serde(flatten)]
    pub outcome: GameOutcome,
}

impl GameReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }

    pub fn survived(&self) -> bool {
        matches!(self.outcome, GameOutcome::SurvivedAllRounds { .. })
    }

    /// The moves of the transcript, for replay with [`Adversary::Scripted`].
    pub fn moves(&self) -> Vec<Move> {
        let mut v: Vec<Move> = self.transcript.iter().map(|r| r.mv).collect();
        if let GameOutcome::Stuck { mv, .. } = self.outcome {
            v.push(mv);
        }
        v
    }
}

struct Game<'a> {
    kinds: Vec<PointKind>,
    strategy: &'a Strategy,
    rr: Option<usize>,
    memo: HashMap<(Vec<Vec<usize>>, Option<(Vec<usize>, Vec<usize>)>, usize), bool>,
}

impl Game<'_> {
    fn rel(&self, axis: Axis, p: usize, q: usize) -> bool {
        p != q || self.kinds[p].reflexive(axis)
    }

    fn is_network(&self, s: &GameState) -> bool {
        let (nu, nv) = (s.nu(), s.nv());
        (0..nv).all(|v| {
            (0..nu).all(|u| (u + 1..nu).all(|u2| self.rel(Axis::H, s.f[u][v], s.f[u2][v])))
        }) && (0..nu).all(|u| {
            (0..nv).all(|v| (v + 1..nv).all(|v2| self.rel(Axis::V, s.f[u][v], s.f[u][v2])))
        })
    }

    /// `c*` already shows up often enough on the named line.
    fn reusable(&self, s: &GameState, m: &Move) -> bool {
        let (line, axis): (Vec<usize>, Axis) = match m.side {
            Coord::V => ((0..s.nu()).map(|u| s.f[u][m.index]).collect(), Axis::H),
            Coord::U => (s.f[m.index].clone(), Axis::V),
        };
        let hits = line.iter().filter(|&&p| p == m.point).count();
        hits >= if self.kinds[m.point].reflexive(axis) {
            2
        } else {
            1
        }
    }

    /// Can `values` be the fresh line for move `m`?
    fn fits(&self, s: &GameState, m: &Move, values: &[usize]) -> bool {
        let (along, across) = match m.side {
            Coord::V => (Axis::H, Axis::V),
            Coord::U => (Axis::V, Axis::H),
        };
        let other = |w: usize, i: usize| match m.side {
            Coord::V => s.f[i][w],
            Coord::U => s.f[w][i],
        };
        values[m.index] == m.point
            && values.iter().enumerate().all(|(w, &p)| {
                (0..s.size(m.side.flip())).all(|i| self.rel(along, p, other(w, i)))
                    && values[w + 1..].iter().all(|&q| self.rel(across, p, q))
            })
    }

    fn responses(&self, s: &GameState, m: &Move) -> Vec<Response> {
        if self.reusable(s, m) {
            return vec![Response::Reuse];
        }
        let len = s.size(m.side);
        let extend = |values: Vec<usize>, anchor| {
            self.fits(s, m, &values)
                .then_some(Response::Extend { values, anchor })
        };
        match self.strategy {
            Strategy::GreedyRr => {
                let a = self.rr.expect("checked at start");
                let mut values = vec![a; len];
                values[m.index] = m.point;
                extend(values, None).into_iter().collect()
            }
            Strategy::FromPMorphism(h) => {
                let (eu, ev) = s.emb.as_ref().expect("embedding kept");
                let found = match m.side {
                    Coord::V => (0..h.nx)
                        .filter(|x| !eu.contains(x))
                        .find(|&x| h.at(x, ev[m.index]) == m.point)
                        .map(|x| (ev.iter().map(|&y| h.at(x, y)).collect(), x)),
                    Coord::U => (0..h.ny)
                        .filter(|y| !ev.contains(y))
                        .find(|&y| h.at(eu[m.index], y) == m.point)
                        .map(|y| (eu.iter().map(|&x| h.at(x, y)).collect(), y)),
                };
                found
                    .and_then(|(values, a)| extend(values, Some(a)))
                    .into_iter()
                    .collect()
            }
            Strategy::Search => {
                let mut out = vec![];
                let mut cur = vec![0; len];
                self.enumerate(s, m, 0, &mut cur, &mut out);
                out
            }
        }
    }

    fn enumerate(
        &self,
        s: &GameState,
        m: &Move,
        w: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Response>,
    ) {
        if w == cur.len() {
            if self.fits(s, m, cur) {
                out.push(Response::Extend {
                    values: cur.clone(),
                    anchor: None,
                });
            }
            return;
        }
        let (along, across) = match m.side {
            Coord::V => (Axis::H, Axis::V),
            Coord::U => (Axis::V, Axis::H),
        };
        let choices: Vec<usize> = if w == m.index {
            vec![m.point]
        } else {
            (0..self.kinds.len()).collect()
        };
        for p in choices {
            let ok_line = (0..s.size(m.side.flip())).all(|i| {
                let q = match m.side {
                    Coord::V => s.f[i][w],
                    Coord::U => s.f[w][i],
                };
                self.rel(along, p, q)
            });
            if ok_line && cur[..w].iter().all(|&q| self.rel(across, p, q)) {
                cur[w] = p;
                self.enumerate(s, m, w + 1, cur, out);
            }
        }
    }

    fn apply(&self, s: &GameState, m: &Move, r: &Response) -> GameState {
        let mut t = s.clone();
        t.round += 1;
        if let Response::Extend { values, anchor } = r {
            match m.side {
                Coord::V => t.f.push(values.clone()),
                Coord::U => {
                    for (u, &p) in values.iter().enumerate() {
                        t.f[u].push(p);
                    }
                }
            }
            if let (Some((eu, ev)), Some(a)) = (t.emb.as_mut(), anchor) {
                match m.side {
                    Coord::V => eu.push(*a),
                    Coord::U => ev.push(*a),
                }
            }
        }
        t
    }

    fn moves(&self, s: &GameState) -> Vec<Move> {
        let mut out = vec![];
        for side in [Coord::V, Coord::U] {
            let mut seen: Vec<Vec<usize>> = vec![];
            for index in 0..s.size(side) {
                // Identical lines are interchangeable unless an embedding
                // tells them apart.
                let line: Vec<usize> = match side {
                    Coord::V => (0..s.nu()).map(|u| s.f[u][index]).collect(),
                    Coord::U => s.f[index].clone(),
                };
                if s.emb.is_none() {
                    if seen.contains(&line) {
                        continue;
                    }
                    seen.push(line);
                }
                for point in 0..self.kinds.len() {
                    out.push(Move { point, side, index });
                }
            }
        }
        out
    }

    /// A move after which `∀` can leave `∃` without a response within
    /// `depth` rounds, whatever she answers.
    fn winning_move(&mut self, s: &GameState, depth: usize) -> Option<Move> {
        if depth == 0 {
            return None;
        }
        let moves: Vec<Move> = self
            .moves(s)
            .into_iter()
            .filter(|m| !self.reusable(s, m))
            .collect();
        moves.into_iter().find(|m| self.forces(s, m, depth))
    }

    fn forces(&mut self, s: &GameState, m: &Move, depth: usize) -> bool {
        self.responses(s, m).iter().all(|r| {
            let t = self.apply(s, m, r);
            self.loses(&t, depth - 1)
        })
    }

    fn loses(&mut self, s: &GameState, depth: usize) -> bool {
        if depth == 0 {
            return false;
        }
        let key = (s.f.clone(), s.emb.clone(), depth);
        if let Some(&b) = self.memo.get(&key) {
            return b;
        }
        let b = self.winning_move(s, depth).is_some();
        self.memo.insert(key, b);
        b
    }

    /// `∃`'s answer: the first response that survives `lookahead` further
    /// rounds, else the first response.
    fn choose(&mut self, s: &GameState, m: &Move, lookahead: usize) -> Option<Response> {
        let rs = self.responses(s, m);
        if rs.len() > 1 && lookahead > 0 {
            if let Some(r) = rs.iter().find(|r| {
                let t = self.apply(s, m, r);
                !self.loses(&t, lookahead)
            }) {
                return Some(r.clone());
            }
        }
        rs.into_iter().next()
    }
}

impl Coord {
    fn flip(self) -> Coord {
        match self {
            Coord::U => Coord::V,
            Coord::V => Coord::U,
        }
    }
}

/// Play `rounds` rounds from the network `f_0(u_0, v_0) = start` (for the
/// p-morphism strategy, the image of the first preimage pair). Every
/// intermediate network is re-checked.
pub fn game_play(
    c: &BiCluster,
    adversary: &Adversary,
    strategy: &Strategy,
    rounds: usize,
) -> Result<GameReport> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("rounds must be at least 1".into()));
    }
    if !c.is_finite() {
        return Err(Error::Infinite(c.to_string()));
    }
    let kinds: Vec<PointKind> = c.points().into_iter().map(|(k, _)| k).collect();
    if kinds.is_empty() {
        return Err(Error::InvalidArgument("bi-cluster with no points".into()));
    }
    let rr = kinds.iter().position(|&k| k == PointKind::RR);
    let (start, emb) = match strategy {
        Strategy::GreedyRr if rr.is_none() => {
            return Err(Error::Precondition(format!(
                "greedy_rr needs an rr point in {c}"
            )));
        }
        Strategy::FromPMorphism(h) => {
            h.verify_onto(&cluster_frame(c)?)?;
            (h.at(0, 0), Some((vec![0], vec![0])))
        }
        _ => (0, None),
    };
    let mut game = Game {
        kinds,
        strategy,
        rr,
        memo: HashMap::new(),
    };
    let mut state = GameState {
        round: 0,
        f: vec![vec![start]],
        emb,
    };
    let mut rng = match adversary {
        Adversary::Random { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut transcript = vec![];
    let mut note = None;
    for k in 1..=rounds {
        let left = rounds - k + 1;
        let m = match adversary {
            Adversary::Scripted(script) => {
                let Some(&m) = script.get(k - 1) else {
                    note = Some(format!("script ended after {} rounds", k - 1));
                    break;
                };
                if m.point >= game.kinds.len() || m.index >= state.size(m.side) {
                    return Err(Error::Script(format!("round {k}: move {m:?} out of range")));
                }
                m
            }
            Adversary::Random { .. } => {
                let rng = rng.as_mut().expect("seeded");
                let side = if rng.gen_bool(0.5) {
                    Coord::U
                } else {
                    Coord::V
                };
                Move {
                    point: rng.gen_range(0..game.kinds.len()),
                    side,
                    index: rng.gen_range(0..state.size(side)),
                }
            }
            Adversary::Exhaustive { depth } => {
                let d = (*depth).min(left);
                match game.winning_move(&state, d) {
                    Some(m) => m,
                    None => {
                        let all = game.moves(&state);
                        *all.iter()
                            .find(|m| !game.reusable(&state, m))
                            .unwrap_or(&all[0])
                    }
                }
            }
        };
        let lookahead = match adversary {
            Adversary::Exhaustive { depth } => (*depth).min(left) - 1,
            _ => 0,
        };
        let Some(r) = game.choose(&state, &m, lookahead) else {
            return Ok(GameReport {
                cluster: *c,
                start,
                transcript,
                outcome: GameOutcome::Stuck { round: k, mv: m },
            });
        };
        state = game.apply(&state, &m, &r);
        if !game.is_network(&state) {
            return Err(Error::Precondition(format!(
                "round {k}: response is not a network"
            )));
        }
        transcript.push(Round {
            round: k,
            mv: m,
            response: r,
        });
    }
    if let Adversary::Exhaustive { depth } = adversary {
        note.get_or_insert(format!(
            "no adversary line of length ≤ {depth} leaves ∃ without a response"
        ));
    }
    Ok(GameReport {
        cluster: *c,
        start,
        transcript,
        outcome: GameOutcome::SurvivedAllRounds { state, note },
    })
}

#[cfg(test)]
mod tests {
    use super::Strategy;
    use super::*;
    use crate::pmorph::bicluster_preimage;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    #[test]
    fn greedy_on_single_rr() {
        let r = game_play(
            &BiCluster::new(1, 0, 0, 0),
            &Adversary::Exhaustive { depth: 4 },
            &Strategy::GreedyRr,
            20,
        )
        .unwrap();
        assert!(r.survived(), "{:?}", r.outcome);
        assert_eq!(r.transcript.len(), 20);
    }

    #[test]
    fn impossible_cluster_gets_stuck() {
        let c = BiCluster::new(0, 1, 1, 0);
        let r = game_play(
            &c,
            &Adversary::Exhaustive { depth: 6 },
            &Strategy::Search,
            6,
        )
        .unwrap();
        assert!(
            matches!(r.outcome, GameOutcome::Stuck { .. }),
            "{:?}",
            r.outcome
        );
    }

    #[test]
    fn latin_strategy_survives_random_play() {
        let c = BiCluster::new(0, 0, 0, 3);
        let h = bicluster_preimage(&c, 3, 3).unwrap();
        let r = game_play(
            &c,
            &Adversary::Random { seed: 11 },
            &Strategy::FromPMorphism(h),
            30,
        )
        .unwrap();
        assert!(r.survived());
        let GameOutcome::SurvivedAllRounds { state, .. } = &r.outcome else {
            unreachable!()
        };
        assert!(state.nu() <= 3 && state.nv() <= 3);
    }

    #[test]
    fn greedy_requires_rr() {
        assert!(game_play(
            &BiCluster::new(0, 0, 0, 2),
            &Adversary::Random { seed: 0 },
            &Strategy::GreedyRr,
            3
        )
        .is_err());
    }

    #[test]
    fn malformed_script() {
        let bad = Adversary::Scripted(vec![Move {
            point: 0,
            side: Coord::U,
            index: 3,
        }]);
        let e = game_play(&BiCluster::new(1, 0, 0, 0), &bad, &Strategy::GreedyRr, 1).unwrap_err();
        assert!(matches!(e, Error::Script(_)));
    }

    #[test]
    fn transcript_replays() {
        let c = BiCluster::new(1, 1, 0, 0);
        let h = bicluster_preimage(&c, 6, 3).unwrap();
        let s = Strategy::FromPMorphism(h);
        let a = game_play(&c, &Adversary::Random { seed: 5 }, &s, 12).unwrap();
        let b = game_play(&c, &Adversary::Scripted(a.moves()), &s, 12).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.to_json()["transcript"].as_array().unwrap().len() == 12);
    }

    /// Every bi-cluster with at most three points.
    fn small_clusters() -> Vec<BiCluster> {
        let mut out = vec![];
        for rr in 0..=3u64 {
            for ri in 0..=3 - rr {
                for ir in 0..=3 - rr - ri {
                    for ii in 0..=3 - rr - ri - ir {
                        if rr + ri + ir + ii > 0 {
                            out.push(BiCluster::new(rr, ri, ir, ii));
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn stuck_only_for_impossible_clusters() {
        for c in small_clusters() {
            let ty = c.classify().unwrap();
            let r = game_play(
                &c,
                &Adversary::Exhaustive { depth: 4 },
                &Strategy::Search,
                4,
            )
            .unwrap();
            assert_eq!(
                !r.survived(),
                ty.is_impossible(),
                "{c} ({ty:?}): {:?}",
                r.outcome
            );
        }
    }

    fn least_preimage(c: &BiCluster) -> Option<ProductMap> {
        let (h, v, n) = c.sizes();
        let (h, v, n) = (
            h.finite()? as usize,
            v.finite()? as usize,
            n.finite()? as usize,
        );
        use crate::grid::BiClusterType::*;
        let (x, y) = match c.classify().ok()? {
            HVStrict => (n, n),
            HStrict => (n, v),
            VStrict => (h, n),
            Free => (h, v),
            H2VSw => (2 * v, v),
            V2HSw => (h, 2 * h),
            EqSw => (h, v),
            _ => return None,
        };
        bicluster_preimage(c, x, y).ok()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pmorphism_strategy_survives(idx in 0usize..19, seed: u64, n in 1usize..=15) {
            let all = small_clusters();
            let c = all[idx % all.len()];
            if let Some(h) = least_preimage(&c) {
                let r = game_play(&c, &Adversary::Random { seed }, &Strategy::FromPMorphism(h), n).unwrap();
                prop_assert!(r.survived());
            }
        }
    }
}
