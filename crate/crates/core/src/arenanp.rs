//! The n-player binary-action population game that simulates the two-player
//! game: unary-encoded point columns, error-corrected guessing populations,
//! per-player utilities, lifting of two-player profiles, and a Monte Carlo
//! weak-Nash verifier.
//!
//! Every player's target depends only on populations other than its own, so
//! deviation gains are evaluated against a single set of targets per profile.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::arena2p::{AliceAction, BobAction, GameHandle2P};
use crate::bits::BitWord;
use crate::codec::{build_code_with_length, decode_point_id, BinaryCode, GridSpec, Tuple, DEFAULT_REL_DIST};
use crate::commsim::index_bits;
use crate::lineworld::LineInfo;
use crate::par::{map_range, Exec};
use crate::report::Report;
use crate::{seed, Error, Result, FORMAT_VERSION};

/// Grid step of the population game; coarse so every column stays small.
pub const DEFAULT_EPS_NP: f64 = 0.25;
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayerKind {
    X,
    Y,
    V,
    W,
    BetaV,
    BetaW,
    Iv,
    Iw,
}

impl PlayerKind {
    pub const ALL: [PlayerKind; 8] = [
        PlayerKind::X,
        PlayerKind::Y,
        PlayerKind::V,
        PlayerKind::W,
        PlayerKind::BetaV,
        PlayerKind::BetaW,
        PlayerKind::Iv,
        PlayerKind::Iw,
    ];

    /// Kinds whose utility is held by Alice.
    pub fn alice_side(self) -> bool {
        matches!(self, PlayerKind::X | PlayerKind::Iv | PlayerKind::Iw)
    }

    fn pop(self) -> Option<usize> {
        match self {
            PlayerKind::X | PlayerKind::Y => None,
            k => Some(k as usize - 2),
        }
    }
}

/// `j` is the grid slot for `X`/`Y` players and unused (0) otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlayerId {
    pub kind: PlayerKind,
    pub i: usize,
    pub j: usize,
}

/// Pure profile. For a column player at slot `j`, `true` means `j + eps`;
/// the per-coordinate dummy at 2 is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileNP {
    pub x: Vec<BitWord>,
    pub y: Vec<BitWord>,
    /// `v, w, β_v, β_w, I_v, I_w` populations in that order.
    pub pops: [BitWord; 6],
}

/// Product mixture: the probability that each player takes its `true` action.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedNP {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub pops: [Vec<f64>; 6],
}

impl ProfileNP {
    pub fn get(&self, p: PlayerId) -> bool {
        match p.kind {
            PlayerKind::X => self.x[p.i].get(p.j),
            PlayerKind::Y => self.y[p.i].get(p.j),
            k => self.pops[k.pop().unwrap()].get(p.i),
        }
    }

    pub fn set(&mut self, p: PlayerId, b: bool) {
        match p.kind {
            PlayerKind::X => self.x[p.i].set(p.j, b),
            PlayerKind::Y => self.y[p.i].set(p.j, b),
            k => self.pops[k.pop().unwrap()].set(p.i, b),
        }
    }

    pub fn flip(&mut self, p: PlayerId) {
        let b = self.get(p);
        self.set(p, !b);
    }

    pub fn to_mixed(&self) -> MixedNP {
        let f = |w: &BitWord| w.iter().map(|b| b as u8 as f64).collect::<Vec<_>>();
        MixedNP {
            x: self.x.iter().map(f).collect(),
            y: self.y.iter().map(f).collect(),
            pops: std::array::from_fn(|k| f(&self.pops[k])),
        }
    }

    pub fn to_file(&self, grid: GridSpec) -> ProfileFile {
        let hex = |w: &Vec<BitWord>| w.iter().map(BitWord::to_hex).collect();
        ProfileFile {
            format_version: FORMAT_VERSION.to_string(),
            slots: grid.steps() as usize,
            m_prime: self.pops[0].len(),
            x: hex(&self.x),
            y: hex(&self.y),
            pops: self.pops.iter().map(BitWord::to_hex).collect(),
            x_realized: self.x.iter().map(realized_index).collect(),
            y_realized: self.y.iter().map(realized_index).collect(),
        }
    }

    pub fn from_file(f: &ProfileFile) -> Result<Self> {
        if f.format_version != FORMAT_VERSION {
            return Err(Error::Malformed(format!("format_version {}", f.format_version)));
        }
        let word = |s: &String, len: usize| {
            BitWord::from_hex(s, len).ok_or_else(|| Error::Malformed(format!("bad hex {s:?}")))
        };
        let cols = |v: &Vec<String>| v.iter().map(|s| word(s, f.slots)).collect::<Result<Vec<_>>>();
        if f.pops.len() != 6 {
            return Err(Error::LengthMismatch { expected: 6, got: f.pops.len() });
        }
        let p = ProfileNP {
            x: cols(&f.x)?,
            y: cols(&f.y)?,
            pops: [
                word(&f.pops[0], f.m_prime)?,
                word(&f.pops[1], f.m_prime)?,
                word(&f.pops[2], f.m_prime)?,
                word(&f.pops[3], f.m_prime)?,
                word(&f.pops[4], f.m_prime)?,
                word(&f.pops[5], f.m_prime)?,
            ],
        };
        let xr: Vec<u64> = p.x.iter().map(realized_index).collect();
        let yr: Vec<u64> = p.y.iter().map(realized_index).collect();
        if xr != f.x_realized || yr != f.y_realized {
            return Err(Error::Malformed("realized indices disagree with the columns".into()));
        }
        Ok(p)
    }
}

impl MixedNP {
    pub fn prob(&self, p: PlayerId) -> f64 {
        match p.kind {
            PlayerKind::X => self.x[p.i][p.j],
            PlayerKind::Y => self.y[p.i][p.j],
            k => self.pops[k.pop().unwrap()][p.i],
        }
    }

    pub fn set(&mut self, p: PlayerId, q: f64) {
        match p.kind {
            PlayerKind::X => self.x[p.i][p.j] = q,
            PlayerKind::Y => self.y[p.i][p.j] = q,
            k => self.pops[k.pop().unwrap()][p.i] = q,
        }
    }

    fn is_pure(&self) -> bool {
        let pure = |q: &f64| *q == 0.0 || *q == 1.0;
        self.x.iter().chain(&self.y).flatten().all(pure) && self.pops.iter().flatten().all(pure)
    }

    fn sample(&self, rng: &mut impl Rng) -> ProfileNP {
        let mut draw = |qs: &Vec<f64>| {
            let bits: Vec<bool> = qs.iter().map(|&q| rng.gen::<f64>() < q).collect();
            BitWord::from_bools(&bits)
        };
        let x = self.x.iter().map(&mut draw).collect();
        let y = self.y.iter().map(&mut draw).collect();
        let pops = std::array::from_fn(|k| draw(&self.pops[k]));
        ProfileNP { x, y, pops }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub format_version: String,
    pub slots: usize,
    pub m_prime: usize,
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub pops: Vec<String>,
    pub x_realized: Vec<u64>,
    pub y_realized: Vec<u64>,
}

/// Minimal slot whose player plays its own value; the dummy slot otherwise.
pub fn realized_index(col: &BitWord) -> u64 {
    (0..col.len()).find(|&j| !col.get(j)).unwrap_or(col.len()) as u64
}

pub fn realized_point(cols: &[BitWord], grid: GridSpec) -> Vec<f64> {
    cols.iter().map(|c| grid.value(realized_index(c))).collect()
}

/// Unary threshold column realizing grid index `k`.
pub fn threshold_column(k: u64, slots: usize) -> BitWord {
    let bits: Vec<bool> = (0..slots).map(|j| (j as u64) < k).collect();
    BitWord::from_bools(&bits)
}

/// What each player is rewarded for matching, split by the side that can
/// compute it.
#[derive(Debug, Clone, PartialEq)]
pub struct AliceTargets {
    /// `r(b)` per coordinate.
    pub x: Vec<f64>,
    pub iv: BitWord,
    pub iw: BitWord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BobTargets {
    /// `f_{Ī_v, Ī_w}(r(a))`.
    pub y: Vec<f64>,
    pub v: BitWord,
    pub w: BitWord,
    pub beta_v: BitWord,
    pub beta_w: BitWord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Targets {
    pub alice: AliceTargets,
    pub bob: BobTargets,
}

pub struct GameNP {
    two: GameHandle2P,
    grid: GridSpec,
    m_prime: usize,
    e_u: BinaryCode,
    e_beta: BinaryCode,
    e_i: BinaryCode,
    beta_bits: usize,
}

impl GameNP {
    pub fn new(two: GameHandle2P, eps_np: f64, seed: u64) -> Result<Self> {
        let grid = GridSpec::new(eps_np)?;
        let dim = two.field().dim();
        let m_prime = dim * grid.steps() as usize;
        let beta_bits = index_bits(two.sim().index_space());
        if m_prime <= 3 * beta_bits {
            return Err(Error::InvalidParameter(format!(
                "population size {m_prime} must exceed {}",
                3 * beta_bits
            )));
        }
        let kappa = two.field().layout().kappa();
        let e_u = build_code_with_length(kappa, m_prime, DEFAULT_REL_DIST, seed::derive(seed, "arenanp/e_u"))?;
        let e_beta = build_code_with_length(3 * beta_bits, m_prime, DEFAULT_REL_DIST, seed::derive(seed, "arenanp/e_beta"))?;
        let e_i = build_code_with_length(3, m_prime, DEFAULT_REL_DIST, seed::derive(seed, "arenanp/e_i"))?;
        Ok(GameNP {
            two,
            grid,
            m_prime,
            e_u,
            e_beta,
            e_i,
            beta_bits,
        })
    }

    pub fn two(&self) -> &GameHandle2P {
        &self.two
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn slots(&self) -> usize {
        self.grid.steps() as usize
    }

    pub fn dim(&self) -> usize {
        self.two.field().dim()
    }

    pub fn m_prime(&self) -> usize {
        self.m_prime
    }

    /// `(E_u, E_β, E_I)`.
    pub fn codes(&self) -> (&BinaryCode, &BinaryCode, &BinaryCode) {
        (&self.e_u, &self.e_beta, &self.e_i)
    }

    pub fn population(&self, kind: PlayerKind) -> usize {
        match kind {
            PlayerKind::X | PlayerKind::Y => self.dim() * self.slots(),
            _ => self.m_prime,
        }
    }

    pub fn player_count(&self) -> usize {
        PlayerKind::ALL.iter().map(|&k| self.population(k)).sum()
    }

    /// Players in canonical order: kinds in declaration order, then `i`, then `j`.
    pub fn players(&self) -> Vec<PlayerId> {
        let mut out = Vec::with_capacity(self.player_count());
        for kind in PlayerKind::ALL {
            match kind {
                PlayerKind::X | PlayerKind::Y => {
                    for i in 0..self.dim() {
                        for j in 0..self.slots() {
                            out.push(PlayerId { kind, i, j });
                        }
                    }
                }
                _ => out.extend((0..self.m_prime).map(|i| PlayerId { kind, i, j: 0 })),
            }
        }
        out
    }

    pub fn pack_beta(&self, beta: [u32; 3]) -> u64 {
        let b = self.beta_bits;
        beta[0] as u64 | (beta[1] as u64) << b | (beta[2] as u64) << (2 * b)
    }

    pub fn unpack_beta(&self, word: u64) -> [u32; 3] {
        let b = self.beta_bits;
        let mask = (1u64 << b) - 1;
        [(word & mask) as u32, (word >> b & mask) as u32, (word >> (2 * b) & mask) as u32]
    }

    fn decoded_info(&self, pop: &BitWord) -> LineInfo {
        LineInfo::from_code(self.e_i.decode_u64(pop).0 as u8)
    }

    /// Alice's targets: reads her α data and the public profile only.
    pub fn alice_targets(&self, p: &ProfileNP) -> AliceTargets {
        let alice = &self.two.sim().alice;
        let info = |v_pop: &BitWord, b_pop: &BitWord| {
            let v = self.e_u.decode_u64(v_pop).0;
            let beta = self.unpack_beta(self.e_beta.decode_u64(b_pop).0);
            let i = alice.decompose(v, beta).unwrap_or(LineInfo::OFF);
            self.e_i.codeword(i.code() as u64).clone()
        };
        AliceTargets {
            x: realized_point(&p.y, self.grid),
            iv: info(&p.pops[0], &p.pops[2]),
            iw: info(&p.pops[1], &p.pops[3]),
        }
    }

    /// Bob's targets: reads his β data, the public geometry and the public
    /// profile only.
    pub fn bob_targets(&self, p: &ProfileNP) -> BobTargets {
        let bob = self.two.bob();
        let x = realized_point(&p.x, self.grid);
        let code = bob.public.code();
        let dv = decode_point_id(&x, Tuple::First, code).0;
        let dw = decode_point_id(&x, Tuple::Second, code).0;
        let y = bob
            .public
            .eval_f_local(self.decoded_info(&p.pops[4]), self.decoded_info(&p.pops[5]), &x)
            .expect("realized points lie in the cube");
        BobTargets {
            y,
            v: self.e_u.codeword(dv).clone(),
            w: self.e_u.codeword(dw).clone(),
            beta_v: self.e_beta.codeword(self.pack_beta(bob.bob.beta(dv))).clone(),
            beta_w: self.e_beta.codeword(self.pack_beta(bob.bob.beta(dw))).clone(),
        }
    }

    pub fn targets(&self, p: &ProfileNP) -> Targets {
        Targets {
            alice: self.alice_targets(p),
            bob: self.bob_targets(p),
        }
    }

    /// Utility of `pid` taking action `bit` against fixed targets.
    pub fn utility_with(&self, pid: PlayerId, bit: bool, t: &Targets) -> f64 {
        let sq = |a: f64, r: f64| -(a - r) * (a - r);
        let slot = pid.j as u64 + bit as u64;
        let hit = |w: &BitWord| (w.get(pid.i) == bit) as u8 as f64;
        match pid.kind {
            PlayerKind::X => sq(self.grid.value(slot), t.alice.x[pid.i]),
            PlayerKind::Y => sq(self.grid.value(slot), t.bob.y[pid.i]),
            PlayerKind::V => hit(&t.bob.v),
            PlayerKind::W => hit(&t.bob.w),
            PlayerKind::BetaV => hit(&t.bob.beta_v),
            PlayerKind::BetaW => hit(&t.bob.beta_w),
            PlayerKind::Iv => hit(&t.alice.iv),
            PlayerKind::Iw => hit(&t.alice.iw),
        }
    }

    /// One player's utility, computing only its own side's targets.
    pub fn np_utility(&self, pid: PlayerId, p: &ProfileNP) -> f64 {
        let sq = |a: f64, r: f64| -(a - r) * (a - r);
        let bit = p.get(pid);
        let value = self.grid.value(pid.j as u64 + bit as u64);
        let hit = |w: &BitWord| (w.get(pid.i) == bit) as u8 as f64;
        if pid.kind.alice_side() {
            let t = self.alice_targets(p);
            match pid.kind {
                PlayerKind::X => sq(value, t.x[pid.i]),
                PlayerKind::Iv => hit(&t.iv),
                _ => hit(&t.iw),
            }
        } else {
            let t = self.bob_targets(p);
            match pid.kind {
                PlayerKind::Y => sq(value, t.y[pid.i]),
                PlayerKind::V => hit(&t.v),
                PlayerKind::W => hit(&t.w),
                PlayerKind::BetaV => hit(&t.beta_v),
                _ => hit(&t.beta_w),
            }
        }
    }

    /// Population encoding of a pair of actions whose points are indices on
    /// this game's grid.
    pub fn lift_profile(&self, alice: &AliceAction, bob: &BobAction) -> ProfileNP {
        let slots = self.slots();
        ProfileNP {
            x: alice.x.iter().map(|&k| threshold_column(k, slots)).collect(),
            y: bob.y.iter().map(|&k| threshold_column(k, slots)).collect(),
            pops: [
                self.e_u.codeword(bob.vb).clone(),
                self.e_u.codeword(bob.wb).clone(),
                self.e_beta.codeword(self.pack_beta(bob.beta_v)).clone(),
                self.e_beta.codeword(self.pack_beta(bob.beta_w)).clone(),
                self.e_i.codeword(alice.iv.code() as u64).clone(),
                self.e_i.codeword(alice.iw.code() as u64).clone(),
            ],
        }
    }

    /// The two-player candidate moved to this grid and iterated to a grid
    /// fixed point of `x ← round(f_I(x))`.
    pub fn candidate(&self) -> Result<(AliceAction, BobAction)> {
        let (a, _) = self.two.candidate_equilibrium()?;
        let fine = self.two.grid();
        let mut idx: Vec<u64> = a.x.iter().map(|&k| self.grid.round_index(fine.value(k))).collect();
        for _ in 0..1000 {
            let (a, b) = self.two.profile_on(self.grid, idx.clone());
            let x: Vec<f64> = idx.iter().map(|&k| self.grid.value(k)).collect();
            let f = self.two.bob().public.eval_f_local(a.iv, a.iw, &x)?;
            let next: Vec<u64> = f.iter().map(|&v| self.grid.round_index(v)).collect();
            if next == idx {
                return Ok((a, b));
            }
            idx = next;
        }
        Err(Error::NotFound { residual: f64::NAN })
    }

    pub fn verify_weaknash(&self, mixed: &MixedNP, eps_bar: f64, samples: usize, seed: u64) -> Result<Report> {
        self.verify_weaknash_with(Exec::default(), mixed, eps_bar, samples, seed)
    }

    /// Fraction of players whose regret, widened by a 3-sigma radius, exceeds
    /// `eps_bar`; passes iff that fraction is at most `eps_bar`.
    pub fn verify_weaknash_with(
        &self,
        exec: Exec,
        mixed: &MixedNP,
        eps_bar: f64,
        samples: usize,
        seed: u64,
    ) -> Result<Report> {
        if samples < MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!("samples = {samples} < {MIN_SAMPLES}")));
        }
        let players = self.players();
        let pure = mixed.is_pure();
        // per player: Σd and Σd², with d = u(true) − u(false)
        let (sum, sum2, s) = if pure {
            let t = self.targets(&mixed.sample(&mut seed::rng(seed, "arenanp/pure")));
            let d: Vec<f64> = players
                .iter()
                .map(|&p| self.utility_with(p, true, &t) - self.utility_with(p, false, &t))
                .collect();
            (d, vec![0.0; players.len()], 1usize)
        } else {
            const CHUNKS: usize = 32;
            let parts = map_range(exec, CHUNKS, |c| {
                let mut sum = vec![0.0; players.len()];
                let mut sum2 = vec![0.0; players.len()];
                for k in (c..samples).step_by(CHUNKS) {
                    let profile = mixed.sample(&mut seed::rng_indexed(seed, "arenanp/sample", k as u64));
                    let t = self.targets(&profile);
                    for (n, &p) in players.iter().enumerate() {
                        let d = self.utility_with(p, true, &t) - self.utility_with(p, false, &t);
                        sum[n] += d;
                        sum2[n] += d * d;
                    }
                }
                (sum, sum2)
            });
            let mut sum = vec![0.0; players.len()];
            let mut sum2 = vec![0.0; players.len()];
            for (a, b) in parts {
                for n in 0..players.len() {
                    sum[n] += a[n];
                    sum2[n] += b[n];
                }
            }
            (sum, sum2, samples)
        };
        let mut violators = Vec::new();
        let mut max_regret = 0.0f64;
        let mut max_radius = 0.0f64;
        for (n, &p) in players.iter().enumerate() {
            let q = mixed.prob(p);
            let mean = sum[n] / s as f64;
            let regret = ((1.0 - q) * mean).max(-q * mean).max(0.0);
            let radius = if pure {
                0.0
            } else {
                let var = (sum2[n] / s as f64 - mean * mean).max(0.0);
                3.0 * (var * s as f64 / (s - 1) as f64).sqrt() / (s as f64).sqrt()
            };
            max_regret = max_regret.max(regret);
            max_radius = max_radius.max(radius);
            if regret + radius > eps_bar {
                violators.push((p, regret, radius));
            }
        }
        let fraction = violators.len() as f64 / players.len() as f64;
        let mut rep = Report::new("gamenp-verify").with_config(json!({
            "eps_bar": eps_bar,
            "samples": samples,
            "seed": seed,
            "pure": pure,
        }));
        rep.check("violating_fraction", fraction, eps_bar, fraction <= eps_bar)
            .detail(format!("{} of {} players", violators.len(), players.len()));
        rep.data = Some(json!({
            "players": players.len(),
            "violators": violators.len(),
            "max_regret": max_regret,
            "max_radius": max_radius,
            "first_violators": violators.iter().take(10).map(|(p, r, c)| json!({
                "player": p, "regret": r, "radius": c,
            })).collect::<Vec<_>>(),
        }));
        Ok(rep)
    }

    /// Exact regret of one player in a pure profile.
    pub fn pure_regret(&self, pid: PlayerId, p: &ProfileNP) -> f64 {
        self.regret_with(pid, p.get(pid), &self.targets(p))
    }

    /// Exact regrets of all players, in [`Self::players`] order.
    pub fn pure_regrets(&self, p: &ProfileNP) -> Vec<f64> {
        let t = self.targets(p);
        self.players().into_iter().map(|pid| self.regret_with(pid, p.get(pid), &t)).collect()
    }

    fn regret_with(&self, pid: PlayerId, played: bool, t: &Targets) -> f64 {
        let u1 = self.utility_with(pid, true, t);
        let u0 = self.utility_with(pid, false, t);
        u1.max(u0) - if played { u1 } else { u0 }
    }
}
