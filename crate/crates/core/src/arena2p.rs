//! The two-player game as utility oracles over implicit action spaces, exact
//! structured best responses, equilibrium verifiers and a candidate
//! equilibrium built from an approximate fixed point.
//!
//! Alice plays `(x, I_v, I_w)`: a grid point and two guessed line-information
//! triples. Bob plays `(y, v, w, β_v, β_w)`: a grid point, two vertex guesses
//! and two index triples. Utilities split additively:
//!
//! * Alice: `−‖x − y‖² + 1{I_v = α-decomposition at (v, β_v)} + 1{I_w likewise}`
//! * Bob: `−‖f_{I_v,I_w}(x) − y‖² + 1{v = D_v(x) ∧ β_v = β(D_v(x))} + 1{w likewise}`
//!
//! Alice's utility reads only her α data; Bob's only his β data and the
//! public geometry.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::brouwer::{follow_path, geom, BrouwerField, FollowOptions};
use crate::codec::{decode_point_id, GridSpec, Tuple};
use crate::commsim::{AliceSide, BobSide, SimEoalInput};
use crate::lineworld::LineInfo;
use crate::report::Report;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AliceAction {
    /// Grid indices of `x`.
    pub x: Vec<u64>,
    pub iv: LineInfo,
    pub iw: LineInfo,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BobAction {
    pub y: Vec<u64>,
    pub vb: u64,
    pub wb: u64,
    pub beta_v: [u32; 3],
    pub beta_w: [u32; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Alice,
    Bob,
}

/// Sparse mixed strategy; probabilities are positive and sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixed<A> {
    pub support: Vec<(A, f64)>,
}

impl<A> Mixed<A> {
    pub fn new(support: Vec<(A, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        if support.iter().any(|(_, p)| !(*p > 0.0)) {
            return Err(Error::InvalidParameter("probabilities must be positive".into()));
        }
        let total: f64 = support.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(Mixed { support })
    }

    pub fn pure(a: A) -> Self {
        Mixed {
            support: vec![(a, 1.0)],
        }
    }

    pub fn as_pure(&self) -> Option<&A> {
        match self.support.as_slice() {
            [(a, _)] => Some(a),
            _ => None,
        }
    }
}

/// Alice's private view: the grid and her α vectors.
pub struct AliceView<'a> {
    pub grid: GridSpec,
    pub alice: &'a AliceSide,
}

/// Bob's private view: the public geometry and his β indices.
pub struct BobView<'a> {
    pub grid: GridSpec,
    pub public: &'a BrouwerField,
    pub bob: &'a BobSide,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let d = geom::dist(a, b);
    d * d
}

impl AliceView<'_> {
    pub fn point(&self, idx: &[u64]) -> Vec<f64> {
        idx.iter().map(|&k| self.grid.value(k)).collect()
    }

    fn guess_ok(&self, guess: LineInfo, v: u64, beta: [u32; 3]) -> bool {
        self.alice.decompose(v, beta) == Some(guess)
    }

    pub fn utility(&self, a: &AliceAction, b: &BobAction) -> f64 {
        let x = self.point(&a.x);
        let y = self.point(&b.y);
        -sq_dist(&x, &y)
            + self.guess_ok(a.iv, b.vb, b.beta_v) as u8 as f64
            + self.guess_ok(a.iw, b.wb, b.beta_w) as u8 as f64
    }

    pub fn expected(&self, a: &AliceAction, b: &Mixed<BobAction>) -> f64 {
        b.support.iter().map(|(bb, p)| p * self.utility(a, bb)).sum()
    }

    fn modal_guess<'b>(&self, b: &Mixed<BobAction>, pick: impl Fn(&BobAction) -> (u64, [u32; 3])) -> LineInfo {
        let mut weight = [0.0f64; 8];
        for (bb, p) in &b.support {
            let (v, beta) = pick(bb);
            if let Some(i) = self.alice.decompose(v, beta) {
                weight[i.code() as usize] += p;
            }
        }
        let mut best = 0;
        for c in 1..8 {
            if weight[c] > weight[best] {
                best = c;
            }
        }
        LineInfo::from_code(best as u8)
    }

    pub fn best_response(&self, b: &Mixed<BobAction>) -> (AliceAction, f64) {
        let dim = b.support[0].0.y.len();
        let mut mean = vec![0.0; dim];
        for (bb, p) in &b.support {
            for (m, &k) in mean.iter_mut().zip(&bb.y) {
                *m += p * self.grid.value(k);
            }
        }
        let a = AliceAction {
            x: mean.iter().map(|&v| self.grid.round_index(v)).collect(),
            iv: self.modal_guess(b, |bb| (bb.vb, bb.beta_v)),
            iw: self.modal_guess(b, |bb| (bb.wb, bb.beta_w)),
        };
        let v = self.expected(&a, b);
        (a, v)
    }
}

impl BobView<'_> {
    pub fn point(&self, idx: &[u64]) -> Vec<f64> {
        idx.iter().map(|&k| self.grid.value(k)).collect()
    }

    /// `f_{I_v,I_w}(x)` on the public geometry.
    pub fn target(&self, a: &AliceAction) -> Vec<f64> {
        let x = self.point(&a.x);
        self.public
            .eval_f_local(a.iv, a.iw, &x)
            .expect("grid points lie in the cube")
    }

    fn decoded(&self, x: &[f64]) -> (u64, u64) {
        let code = self.public.code();
        (
            decode_point_id(x, Tuple::First, code).0,
            decode_point_id(x, Tuple::Second, code).0,
        )
    }

    pub fn utility(&self, b: &BobAction, a: &AliceAction) -> f64 {
        let x = self.point(&a.x);
        let y = self.point(&b.y);
        let f = self.target(a);
        let (dv, dw) = self.decoded(&x);
        let gv = b.vb == dv && b.beta_v == self.bob.beta(dv);
        let gw = b.wb == dw && b.beta_w == self.bob.beta(dw);
        -sq_dist(&f, &y) + gv as u8 as f64 + gw as u8 as f64
    }

    pub fn expected(&self, b: &BobAction, a: &Mixed<AliceAction>) -> f64 {
        a.support.iter().map(|(aa, p)| p * self.utility(b, aa)).sum()
    }

    pub fn best_response(&self, a: &Mixed<AliceAction>) -> (BobAction, f64) {
        let dim = a.support[0].0.x.len();
        let mut mean = vec![0.0; dim];
        let mut votes: Vec<(u64, u64, f64)> = Vec::new();
        for (aa, p) in &a.support {
            let f = self.target(aa);
            for (m, v) in mean.iter_mut().zip(&f) {
                *m += p * v;
            }
            let (dv, dw) = self.decoded(&self.point(&aa.x));
            votes.push((dv, dw, *p));
        }
        let modal = |sel: fn(&(u64, u64, f64)) -> u64| -> u64 {
            let mut acc: std::collections::BTreeMap<u64, f64> = std::collections::BTreeMap::new();
            for t in &votes {
                *acc.entry(sel(t)).or_default() += t.2;
            }
            let mut best = (0u64, -1.0);
            for (k, w) in acc {
                if w > best.1 {
                    best = (k, w);
                }
            }
            best.0
        };
        let vb = modal(|t| t.0);
        let wb = modal(|t| t.1);
        let b = BobAction {
            y: mean.iter().map(|&v| self.grid.round_index(v)).collect(),
            vb,
            wb,
            beta_v: self.bob.beta(vb),
            beta_w: self.bob.beta(wb),
        };
        let v = self.expected(&b, a);
        (b, v)
    }
}

/// A game instance: geometry, grid, and the split line information.
pub struct GameHandle2P {
    field: BrouwerField,
    public: BrouwerField,
    grid: GridSpec,
    sim: SimEoalInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VerifyMode {
    Ane(f64),
    Wsne(f64),
    Exact,
}

impl GameHandle2P {
    pub fn new(field: BrouwerField, sim: SimEoalInput) -> Result<Self> {
        let grid = field
            .params()
            .grid
            .ok_or_else(|| Error::InvalidParameter("the field has no grid attached".into()))?;
        if !sim.inconsistencies(field.instance()).is_empty() {
            return Err(Error::Malformed("split input disagrees with the instance".into()));
        }
        let public = field.public_view();
        Ok(GameHandle2P {
            field,
            public,
            grid,
            sim,
        })
    }

    pub fn field(&self) -> &BrouwerField {
        &self.field
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn sim(&self) -> &SimEoalInput {
        &self.sim
    }

    pub fn alice(&self) -> AliceView<'_> {
        AliceView {
            grid: self.grid,
            alice: &self.sim.alice,
        }
    }

    pub fn bob(&self) -> BobView<'_> {
        BobView {
            grid: self.grid,
            public: &self.public,
            bob: &self.sim.bob,
        }
    }

    pub fn utility(&self, role: Role, a: &AliceAction, b: &BobAction) -> f64 {
        match role {
            Role::Alice => self.alice().utility(a, b),
            Role::Bob => self.bob().utility(b, a),
        }
    }

    pub fn to_grid(&self, x: &[f64]) -> Vec<u64> {
        x.iter().map(|&v| self.grid.round_index(v)).collect()
    }

    /// Regret of each role, `max_a' E u(a') − E u(played)`.
    pub fn regrets(&self, a: &Mixed<AliceAction>, b: &Mixed<BobAction>) -> (f64, f64) {
        let av = self.alice();
        let bv = self.bob();
        let (_, abest) = av.best_response(b);
        let (_, bbest) = bv.best_response(a);
        let aplay: f64 = a.support.iter().map(|(x, p)| p * av.expected(x, b)).sum();
        let bplay: f64 = b.support.iter().map(|(y, p)| p * bv.expected(y, a)).sum();
        (abest - aplay, bbest - bplay)
    }

    pub fn verify_equilibrium(&self, a: &Mixed<AliceAction>, b: &Mixed<BobAction>, mode: VerifyMode) -> Report {
        let mut rep = Report::new("game2p-verify").with_config(json!({ "mode": mode }));
        let av = self.alice();
        let bv = self.bob();
        let (abr, abest) = av.best_response(b);
        let (bbr, bbest) = bv.best_response(a);
        let (ra, rb) = self.regrets(a, b);
        match mode {
            VerifyMode::Ane(e) => {
                rep.check("alice_regret", ra, e, ra <= e);
                rep.check("bob_regret", rb, e, rb <= e);
            }
            VerifyMode::Wsne(e) => {
                let worst_a = a
                    .support
                    .iter()
                    .map(|(x, _)| abest - av.expected(x, b))
                    .fold(f64::NEG_INFINITY, f64::max);
                let worst_b = b
                    .support
                    .iter()
                    .map(|(y, _)| bbest - bv.expected(y, a))
                    .fold(f64::NEG_INFINITY, f64::max);
                rep.check("alice_support_regret", worst_a, e, worst_a <= e);
                rep.check("bob_support_regret", worst_b, e, worst_b <= e);
            }
            VerifyMode::Exact => {
                let pa = a.as_pure() == Some(&abr);
                let pb = b.as_pure() == Some(&bbr);
                rep.check("alice_argmax_equal", pa, true, pa).detail(format!("regret {ra:e}"));
                rep.check("bob_argmax_equal", pb, true, pb).detail(format!("regret {rb:e}"));
            }
        }
        rep.data = Some(json!({ "alice_regret": ra, "bob_regret": rb }));
        rep
    }

    /// Pure profile around a grid point: `y = x`, Bob announces the decoded
    /// vertices with their true indices, Alice the recombined information.
    pub fn profile_at(&self, x: Vec<u64>) -> (AliceAction, BobAction) {
        self.profile_on(self.grid, x)
    }

    /// [`Self::profile_at`] with `x` read on another grid.
    pub fn profile_on(&self, grid: GridSpec, x: Vec<u64>) -> (AliceAction, BobAction) {
        let point: Vec<f64> = x.iter().map(|&k| grid.value(k)).collect();
        let code = self.field.code();
        let dv = decode_point_id(&point, Tuple::First, code).0;
        let dw = decode_point_id(&point, Tuple::Second, code).0;
        let bob = BobAction {
            y: x.clone(),
            vb: dv,
            wb: dw,
            beta_v: self.sim.bob.beta(dv),
            beta_w: self.sim.bob.beta(dw),
        };
        let alice = AliceAction {
            x,
            iv: self.sim.alice.decompose(dv, bob.beta_v).unwrap_or(LineInfo::OFF),
            iw: self.sim.alice.decompose(dw, bob.beta_w).unwrap_or(LineInfo::OFF),
        };
        (alice, bob)
    }

    /// Follow the path, refine to `‖g‖_∞ < eps/8`, round to the grid, and
    /// iterate `x ← round(f_{I}(x))` to a grid fixed point.
    pub fn candidate_equilibrium(&self) -> Result<(AliceAction, BobAction)> {
        let opts = FollowOptions::for_field(&self.field);
        let path = follow_path(&self.field, &opts)?;
        let eps = self.grid.eps();
        let p = self.field.params();
        let gain = opts.gain * p.h / p.delta;
        let mut x = path.point;
        let mut residual = f64::INFINITY;
        for _ in 0..100_000 {
            let g = self.field.displacement(&x);
            residual = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if residual < eps / 8.0 {
                break;
            }
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi = (*xi + gain * gi).clamp(-1.0, 2.0);
            }
        }
        let mut idx = self.to_grid(&x);
        for _ in 0..1000 {
            let (a, _) = self.profile_at(idx.clone());
            let next = self.to_grid(&self.bob().target(&a));
            if next == idx {
                return Ok(self.profile_at(idx));
            }
            idx = next;
        }
        Err(Error::NotFound { residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brouwer::{build_field, GeometryParams, PieceKey};
    use crate::codec::build_code;
    use crate::commsim::split_instance;
    use crate::lineworld::{gen_instance, solutions, Kind};

    fn game(kind: Kind, n: usize, seed: u64) -> GameHandle2P {
        let inst = gen_instance(kind, n, seed).unwrap();
        let code = build_code(inst.layout.kappa(), 0.3, seed).unwrap();
        let field = build_field(&inst, &code, GeometryParams::demo()).unwrap();
        let sim = split_instance(&inst, 16, seed).unwrap();
        GameHandle2P::new(field, sim).unwrap()
    }

    #[test]
    fn alice_utility_examples() {
        let g = game(Kind::Eotl, 1, 0);
        let dim = g.field().dim();
        let zero = g.grid().round_index(0.0);
        let (a, b) = g.profile_at(vec![zero; dim]);
        assert_eq!(g.utility(Role::Alice, &a, &b), 2.0);
        let mut b2 = b.clone();
        b2.y[0] += 1;
        let eps = g.grid().eps();
        let got = g.utility(Role::Alice, &a, &b2);
        let want = 2.0 - eps * eps / dim as f64;
        // the penalty sits near the f64 resolution at 2, so check it directly too
        assert!((got - want).abs() <= 4.0 * f64::EPSILON, "{got} vs {want}");
        let pen = sq_dist(&g.alice().point(&a.x), &g.alice().point(&b2.y));
        assert!((pen / (eps * eps / dim as f64) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bob_wrong_vertex_loses_guess() {
        let g = game(Kind::Eotl, 1, 0);
        let (a, b) = g.candidate_equilibrium().unwrap();
        let base = g.utility(Role::Bob, &a, &b);
        let mut bad = b.clone();
        bad.vb ^= 1;
        assert!((base - g.utility(Role::Bob, &a, &bad) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn candidate_passes_exact_and_decodes_solution() {
        let g = game(Kind::Eotl, 1, 0);
        let (a, b) = g.candidate_equilibrium().unwrap();
        let rep = g.verify_equilibrium(&Mixed::pure(a.clone()), &Mixed::pure(b.clone()), VerifyMode::Exact);
        assert!(rep.passed(), "{}", rep.to_json());
        let (ra, rb) = g.regrets(&Mixed::pure(a.clone()), &Mixed::pure(b));
        assert_eq!((ra, rb), (0.0, 0.0));
        let x: Vec<f64> = a.x.iter().map(|&k| g.grid().value(k)).collect();
        let l = g.field().layout();
        let v = l.unpack(decode_point_id(&x, Tuple::First, g.field().code()).0).unwrap();
        assert_eq!(v, solutions(g.field().instance())[0].0);
        let fx = g.field().eval_f(&x).unwrap();
        assert_eq!(g.to_grid(&fx), a.x);
    }

    #[test]
    fn candidate_is_deterministic() {
        let a = game(Kind::Eotl, 1, 0).candidate_equilibrium().unwrap();
        let b = game(Kind::Eotl, 1, 0).candidate_equilibrium().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn interior_point_is_rejected() {
        let g = game(Kind::Eotl, 1, 0);
        let s = g.field().pieces().segments.iter().find(|(k, _)| **k != PieceKey::Descent).unwrap().1;
        let x = g.to_grid(&s.closest(s.len / 2.0));
        let (a, b) = g.profile_at(x);
        let rep = g.verify_equilibrium(&Mixed::pure(a), &Mixed::pure(b), VerifyMode::Exact);
        assert!(!rep.passed());
    }

    #[test]
    fn corrupted_bob_vertex_rejected() {
        let g = game(Kind::Eotl, 1, 0);
        let (a, mut b) = g.candidate_equilibrium().unwrap();
        b.vb ^= 1;
        let a = Mixed::pure(a);
        let b = Mixed::pure(b);
        let rep = g.verify_equilibrium(&a, &b, VerifyMode::Ane(0.5));
        assert!(!rep.passed());
        assert!(g.regrets(&a, &b).1 >= 0.9);
    }

    #[test]
    fn alice_best_response_examples() {
        let g = game(Kind::Eotl, 1, 0);
        let dim = g.field().dim();
        let k = g.grid().round_index(0.5);
        let (_, b) = g.profile_at(vec![k; dim]);
        let (br, _) = g.alice().best_response(&Mixed::pure(b.clone()));
        assert_eq!(br.x, b.y);
        assert_eq!(Some(br.iv), g.sim().alice.decompose(b.vb, b.beta_v));
        // midpoint of two grid neighbours rounds toward −1
        let mut b2 = b.clone();
        b2.y[0] += 1;
        let mix = Mixed::new(vec![(b.clone(), 0.5), (b2, 0.5)]).unwrap();
        let (br, _) = g.alice().best_response(&mix);
        assert_eq!(br.x[0], k);
    }

    #[test]
    fn bob_best_response_to_point_mass() {
        let g = game(Kind::X, 2, 3);
        let s = g.field().pieces().segments.values().nth(3).unwrap();
        let (a, _) = g.profile_at(g.to_grid(&s.closest(s.len / 3.0)));
        let (br, _) = g.bob().best_response(&Mixed::pure(a.clone()));
        let x: Vec<f64> = a.x.iter().map(|&k| g.grid().value(k)).collect();
        assert_eq!(br.y, g.to_grid(&g.field().eval_f(&x).unwrap()));
        assert_eq!(br.vb, decode_point_id(&x, Tuple::First, g.field().code()).0);
    }

    #[test]
    fn pure_wsne_equals_ane() {
        let g = game(Kind::Eotl, 1, 0);
        let (a, mut b) = g.candidate_equilibrium().unwrap();
        b.y[0] += 3;
        let (a, b) = (Mixed::pure(a), Mixed::pure(b));
        for e in [1e-20, 1e-12, 0.5] {
            let x = g.verify_equilibrium(&a, &b, VerifyMode::Ane(e)).passed();
            let y = g.verify_equilibrium(&a, &b, VerifyMode::Wsne(e)).passed();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn information_partition() {
        let g = game(Kind::Eotl, 1, 0);
        let (a, b) = g.candidate_equilibrium().unwrap();
        let (a0, b0) = (g.sim().alice.reads(), g.sim().bob.reads());
        g.alice().utility(&a, &b);
        assert_eq!(g.sim().bob.reads(), b0);
        assert!(g.sim().alice.reads() > a0);
        let a1 = g.sim().alice.reads();
        g.bob().utility(&b, &a);
        assert_eq!(g.sim().alice.reads(), a1);
        assert!(g.sim().bob.reads() > b0);
    }

    #[test]
    fn empty_support_rejected() {
        assert!(matches!(Mixed::<AliceAction>::new(vec![]), Err(Error::EmptySupport)));
    }
}
