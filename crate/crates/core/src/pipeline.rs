//! Stage functions behind each CLI subcommand. Each stage builds what it
//! needs from a [`RunConfig`] and returns a deterministic [`Report`].

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::arena2p::{AliceAction, BobAction, GameHandle2P, Mixed, VerifyMode};
use crate::arenanp::{GameNP, ProfileFile, ProfileNP, DEFAULT_EPS_NP};
use crate::brouwer::{build_field, follow_path, validate_geometry, BrouwerField, FollowOptions, GeometryParams, Profile};
use crate::codec::{build_code, BinaryCode, GridSpec, DEFAULT_REL_DIST};
use crate::commsim::{evalf_bit_bound, run_evalf, run_linewalk, split_instance, transcript_report, SimEoalInput, DEFAULT_M};
use crate::lineworld::{gen_instance, solutions, validate_instance, Kind, LineInstance};
use crate::report::Report;
use crate::{seed, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub kind: Kind,
    pub seed: u64,
    /// Index space `M` of the two-party split.
    pub m_index: usize,
    pub profile: Profile,
    /// Overrides of the profile's scales; `eps` must divide 3.
    pub h: Option<f64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub code_target: f64,
    pub eps_np: f64,
    pub eps_bar: f64,
    pub samples: usize,
    /// Number of sample points for the evalf protocol check.
    pub comm_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 1,
            kind: Kind::Eotl,
            seed: 0,
            m_index: DEFAULT_M,
            profile: Profile::Demo,
            h: None,
            delta: None,
            eps: None,
            code_target: DEFAULT_REL_DIST,
            eps_np: DEFAULT_EPS_NP,
            eps_bar: 1e-3,
            samples: 100,
            comm_points: 64,
        }
    }
}

impl RunConfig {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn instance(&self) -> Result<LineInstance> {
        gen_instance(self.kind, self.n, self.seed)
    }

    pub fn code(&self, inst: &LineInstance) -> Result<BinaryCode> {
        build_code(inst.layout.kappa(), self.code_target, self.seed)
    }

    pub fn params(&self, code: &BinaryCode) -> Result<GeometryParams> {
        let base = match self.profile {
            Profile::Demo => GeometryParams::demo(),
            Profile::Strict => GeometryParams::strict_for(code),
        };
        let mut p = if self.h.is_some() || self.delta.is_some() {
            GeometryParams::new(self.h.unwrap_or(base.h), self.delta.unwrap_or(base.delta), self.profile)?
                .with_default_grid()
        } else {
            base
        };
        if let Some(eps) = self.eps {
            p = p.with_grid(GridSpec::new(eps)?);
        }
        Ok(p)
    }

    pub fn field(&self) -> Result<BrouwerField> {
        let inst = self.instance()?;
        let code = self.code(&inst)?;
        build_field(&inst, &code, self.params(&code)?)
    }

    pub fn split(&self, inst: &LineInstance) -> Result<SimEoalInput> {
        split_instance(inst, self.m_index, seed::derive(self.seed, "pipeline/split"))
    }

    pub fn game2p(&self) -> Result<GameHandle2P> {
        let field = self.field()?;
        let sim = self.split(field.instance())?;
        GameHandle2P::new(field, sim)
    }

    pub fn gamenp(&self) -> Result<GameNP> {
        GameNP::new(self.game2p()?, self.eps_np, seed::derive(self.seed, "pipeline/gamenp"))
    }

    fn report(&self, command: &str) -> Report {
        Report::new(command).with_config(self.to_json())
    }
}

/// Serialized pure two-player profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFile {
    pub format_version: String,
    pub alice: AliceAction,
    pub bob: BobAction,
}

pub fn gen(cfg: &RunConfig) -> Result<(LineInstance, Report)> {
    let inst = cfg.instance()?;
    let mut rep = cfg.report("gen");
    rep.extend(validate_instance(&inst));
    rep.data = Some(json!({ "edges": inst.edge_count(), "lines": inst.lines.len() }));
    Ok((inst, rep))
}

pub fn validate(cfg: &RunConfig, inst: &LineInstance) -> Report {
    let mut rep = cfg.report("validate");
    rep.extend(validate_instance(inst));
    rep
}

pub fn embed(cfg: &RunConfig) -> Result<(BrouwerField, Report)> {
    let field = cfg.field()?;
    let code = field.code();
    let mut rep = cfg.report("embed");
    let rel = code.rel_dist();
    rep.check("code_rel_dist", rel, cfg.code_target, rel >= cfg.code_target);
    let back = BinaryCode::from_file(&code.to_file())?;
    rep.check("code_file_roundtrip", back.d_min(), code.d_min(), back.generator() == code.generator());
    rep.data = Some(serde_json::to_value(field.summary())?);
    Ok((field, rep))
}

pub fn geometry(cfg: &RunConfig) -> Result<Report> {
    let field = cfg.field()?;
    let mut rep = cfg.report("geometry");
    rep.extend(validate_geometry(&field));
    Ok(rep)
}

pub fn fp_follow(cfg: &RunConfig) -> Result<Report> {
    let field = cfg.field()?;
    let r = follow_path(&field, &FollowOptions::for_field(&field))?;
    let mut rep = cfg.report("fp-follow");
    let tol = field.params().delta / 10.0;
    rep.check("residual", r.residual, tol, r.residual <= tol);
    let decoded = field.decoded_pair(&r.point).0;
    let sols = solutions(field.instance());
    let hit = decoded.is_some_and(|v| sols.iter().any(|(s, _)| *s == v));
    let l = field.layout();
    rep.check(
        "decodes_to_solution",
        decoded.map(|v| l.fmt_vertex(v)).unwrap_or_else(|| "none".into()),
        sols.iter().map(|(v, _)| l.fmt_vertex(*v)).collect::<Vec<_>>().join(","),
        hit,
    );
    rep.data = Some(json!({ "steps": r.steps }));
    Ok(rep)
}

pub fn game2p_candidate(cfg: &RunConfig) -> Result<(CandidateFile, Report)> {
    let g = cfg.game2p()?;
    let (a, b) = g.candidate_equilibrium()?;
    let mut rep = cfg.report("game2p-candidate");
    rep.extend(g.verify_equilibrium(&Mixed::pure(a.clone()), &Mixed::pure(b.clone()), VerifyMode::Exact));
    let x: Vec<f64> = a.x.iter().map(|&k| g.grid().value(k)).collect();
    let fx = g.field().eval_f(&x)?;
    let fixed = g.to_grid(&fx) == a.x;
    rep.check("grid_fixed_point", fixed, true, fixed);
    let decoded = g.field().decoded_pair(&x).0;
    let sols = solutions(g.field().instance());
    let hit = decoded.is_some_and(|v| sols.iter().any(|(s, _)| *s == v));
    rep.check("decodes_to_solution", hit, true, hit);
    let file = CandidateFile {
        format_version: crate::FORMAT_VERSION.to_string(),
        alice: a,
        bob: b,
    };
    Ok((file, rep))
}

/// Verifies a supplied candidate, or the computed one, in every mode, plus
/// the corrupted-guess and interior-point negative controls.
pub fn game2p_verify(cfg: &RunConfig, candidate: Option<CandidateFile>) -> Result<Report> {
    let g = cfg.game2p()?;
    let (a, b) = match candidate {
        Some(c) => {
            if c.format_version != crate::FORMAT_VERSION {
                return Err(Error::Malformed(format!("format_version {}", c.format_version)));
            }
            (c.alice, c.bob)
        }
        None => g.candidate_equilibrium()?,
    };
    let (ma, mb) = (Mixed::pure(a.clone()), Mixed::pure(b.clone()));
    let mut rep = cfg.report("game2p-verify");
    let eps = g.grid().eps();
    rep.extend(g.verify_equilibrium(&ma, &mb, VerifyMode::Exact));
    rep.extend(g.verify_equilibrium(&ma, &mb, VerifyMode::Ane(eps * eps)));
    rep.extend(g.verify_equilibrium(&ma, &mb, VerifyMode::Wsne(eps * eps)));

    let mut bad = b.clone();
    bad.vb ^= 1;
    let bad = Mixed::pure(bad);
    let rejected = !g.verify_equilibrium(&ma, &bad, VerifyMode::Ane(0.5)).passed();
    let regret = g.regrets(&ma, &bad).1;
    rep.check("control_corrupted_guess_regret", regret, 0.9, rejected && regret >= 0.9);

    let interior = g
        .field()
        .pieces()
        .segments
        .iter()
        .find(|(k, _)| **k != crate::brouwer::PieceKey::Descent)
        .map(|(_, s)| s.closest(s.len / 2.0));
    if let Some(p) = interior {
        let (ia, ib) = g.profile_at(g.to_grid(&p));
        let rejected = !g.verify_equilibrium(&Mixed::pure(ia), &Mixed::pure(ib), VerifyMode::Exact).passed();
        rep.check("control_interior_rejected", rejected, true, rejected);
    }
    Ok(rep)
}

pub fn gamenp_lift(cfg: &RunConfig) -> Result<(ProfileFile, Report)> {
    let g = cfg.gamenp()?;
    let (a, b) = g.candidate()?;
    let p = g.lift_profile(&a, &b);
    let mut rep = cfg.report("gamenp-lift");
    let worst = g.pure_regrets(&p).into_iter().fold(0.0f64, f64::max);
    rep.check("max_pure_regret", worst, 0.0, worst == 0.0);
    rep.data = Some(json!({ "players": g.player_count(), "m_prime": g.m_prime() }));
    Ok((p.to_file(g.grid()), rep))
}

pub fn gamenp_verify(cfg: &RunConfig, profile: Option<ProfileFile>) -> Result<Report> {
    let g = cfg.gamenp()?;
    let p = match profile {
        Some(f) => {
            let p = ProfileNP::from_file(&f)?;
            if p.x.len() != g.dim() || p.pops[0].len() != g.m_prime() || f.slots != g.slots() {
                return Err(Error::Malformed("profile shape does not match the game".into()));
            }
            p
        }
        None => {
            let (a, b) = g.candidate()?;
            g.lift_profile(&a, &b)
        }
    };
    let mut rep = cfg.report("gamenp-verify");
    rep.extend(g.verify_weaknash(&p.to_mixed(), cfg.eps_bar, cfg.samples, seed::derive(cfg.seed, "pipeline/mc"))?);
    Ok(rep)
}

/// Split consistency, the line walk, and the evalf protocol on deterministic
/// sample points near the embedded path.
pub fn comm_run(cfg: &RunConfig) -> Result<Report> {
    let field = cfg.field()?;
    let sim = cfg.split(field.instance())?;
    let mut rep = cfg.report("comm-run");
    let bad = sim.inconsistencies(field.instance()).len();
    rep.check("split_consistency", bad, 0, bad == 0);

    let (walk, t) = run_linewalk(&sim)?;
    let sols = solutions(field.instance());
    let hit = sols.iter().any(|(v, _)| *v == walk.end);
    rep.check("linewalk_answer", walk.answer, walk.end.v1 & 1 == 1, hit);
    rep.extend(transcript_report("linewalk", &t, None));

    let public = field.public_view();
    let bound = evalf_bit_bound(cfg.m_index);
    let mut worst = 0usize;
    let mut mismatches = 0usize;
    let segs: Vec<_> = field.pieces().segments.values().cloned().collect();
    let mut rng = seed::rng(cfg.seed, "pipeline/comm-points");
    for k in 0..cfg.comm_points {
        use rand::Rng;
        let s = &segs[k % segs.len()];
        let mut x = s.closest(rng.gen_range(0.0..=s.len));
        for xi in x.iter_mut() {
            *xi = (*xi + rng.gen_range(-1.0..1.0) * field.params().h).clamp(-1.0, 2.0);
        }
        let (out, t) = run_evalf(&public, &sim, &x)?;
        worst = worst.max(t.total_bits());
        let want = field.eval_f(&x)?;
        if out.alice_output != want || out.bob_output != want {
            mismatches += 1;
        }
    }
    rep.check("evalf_max_bits", worst, bound, worst <= bound);
    rep.check("evalf_matches_f", mismatches, 0, mismatches == 0);
    Ok(rep)
}

/// Every stage in order, merged into one report.
pub fn all(cfg: &RunConfig) -> Result<Report> {
    let mut rep = cfg.report("all");
    rep.extend(gen(cfg)?.1);
    rep.extend(embed(cfg)?.1);
    rep.extend(geometry(cfg)?);
    rep.extend(fp_follow(cfg)?);
    rep.extend(game2p_candidate(cfg)?.1);
    rep.extend(game2p_verify(cfg, None)?);
    rep.extend(gamenp_lift(cfg)?.1);
    rep.extend(gamenp_verify(cfg, None)?);
    rep.extend(comm_run(cfg)?);
    Ok(rep)
}
