//! Property tests for the cross-module invariants.

use hardnash::arena2p::{AliceAction, BobAction, GameHandle2P, Mixed};
use hardnash::arenanp::{threshold_column, GameNP, PlayerId, PlayerKind, DEFAULT_EPS_NP};
use hardnash::brouwer::{build_field, geom, BrouwerField, GeometryParams};
use hardnash::codec::{build_code, decode_point_id, round_eps, GridSpec, Tuple};
use hardnash::commsim::{index_bits, run_linewalk, split_instance};
use hardnash::lineworld::{gen_instance, Kind, LineInfo, QueryOracle};
use proptest::prelude::*;
use std::sync::OnceLock;

fn field_n1() -> &'static BrouwerField {
    static F: OnceLock<BrouwerField> = OnceLock::new();
    F.get_or_init(|| {
        let inst = gen_instance(Kind::Eotl, 1, 0).unwrap();
        let code = build_code(inst.layout.kappa(), 0.3, 0).unwrap();
        build_field(&inst, &code, GeometryParams::demo()).unwrap()
    })
}

fn game_n1() -> &'static GameHandle2P {
    static G: OnceLock<GameHandle2P> = OnceLock::new();
    G.get_or_init(|| {
        let f = field_n1().clone();
        let sim = split_instance(f.instance(), 16, 0).unwrap();
        GameHandle2P::new(f, sim).unwrap()
    })
}

fn game_np() -> &'static GameNP {
    static G: OnceLock<GameNP> = OnceLock::new();
    G.get_or_init(|| {
        let f = field_n1().clone();
        let sim = split_instance(f.instance(), 16, 0).unwrap();
        GameNP::new(GameHandle2P::new(f, sim).unwrap(), DEFAULT_EPS_NP, 0).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_answers_match_instance(kind_ix in 0usize..4, n in 2usize..=3, seed in 0u64..500, picks in prop::collection::vec(any::<u64>(), 1..20)) {
        let inst = gen_instance(Kind::ALL[kind_ix], n, seed).unwrap();
        let mut oracle = QueryOracle::new(&inst);
        let l = inst.layout;
        let mut last = 0;
        for p in picks {
            let v = l.unpack(p % l.vertex_count() as u64).unwrap_or(l.zero());
            prop_assert_eq!(oracle.query(v), inst.info(v));
            prop_assert!(oracle.count() > last);
            last = oracle.count();
        }
    }

    #[test]
    fn round_eps_idempotent_and_close(steps in 1u64..10_000, xs in prop::collection::vec(-1.0f64..=2.0, 1..16)) {
        let grid = GridSpec::from_steps(steps).unwrap();
        let r = round_eps(&xs, &grid).unwrap();
        prop_assert_eq!(round_eps(&r, &grid).unwrap(), r.clone());
        for (a, b) in xs.iter().zip(&r) {
            prop_assert!((a - b).abs() <= grid.eps() / 2.0 + 1e-12);
        }
    }

    #[test]
    fn embedded_vertices_decode_to_their_ids(id in 0u64..64, part in 1u8..=5) {
        let f = field_n1();
        let l = f.layout();
        let Some(v) = l.unpack(id % (1 << l.kappa())) else { return Ok(()) };
        let w = l.succ(v, id & 1 == 1);
        let x = f.brouwer_vertex(part, v, w);
        // x1, x2 carry (v, v); x3, x4 carry (v, w); x5 carries (w, w)
        let first = if part <= 4 { v } else { w };
        let second = if part <= 2 { v } else { w };
        prop_assert_eq!(decode_point_id(&x, Tuple::First, f.code()).0, l.pack(first));
        prop_assert_eq!(decode_point_id(&x, Tuple::Second, f.code()).0, l.pack(second));
    }

    #[test]
    fn default_displacement_has_norm_half_delta(seed in 0u64..8) {
        let inst = gen_instance(Kind::Eotl, 1, seed).unwrap();
        let code = build_code(inst.layout.kappa(), 0.3, seed).unwrap();
        let f = build_field(&inst, &code, GeometryParams::demo()).unwrap();
        let sc = geom::Scales::new(f.params().h, f.params().delta, f.m());
        prop_assert_eq!(geom::norm(&sc.default_disp(f.dim())), f.params().delta / 2.0);
    }

    #[test]
    fn local_route_matches_global(seed in any::<u64>(), r in 0.0f64..0.03) {
        use rand::{Rng, SeedableRng};
        let f = field_n1();
        let segs: Vec<_> = f.pieces().segments.values().cloned().collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s = &segs[rng.gen_range(0..segs.len())];
        let mut x = s.closest(rng.gen_range(0.0..=s.len));
        for v in x.iter_mut() {
            *v = (*v + rng.gen_range(-r..=r)).clamp(-1.0, 2.0);
        }
        prop_assert_eq!(f.eval_f_local_true(&x).unwrap(), f.eval_f(&x).unwrap());
    }
}

fn random_bob(g: &GameHandle2P, rng: &mut impl rand::Rng, center: u64) -> BobAction {
    let dim = g.field().dim();
    let kappa = g.field().layout().kappa();
    let m = g.sim().index_space() as u32;
    let mut beta = || [rng.gen_range(0..m), rng.gen_range(0..m), rng.gen_range(0..m)];
    let (bv, bw) = (beta(), beta());
    BobAction {
        y: (0..dim).map(|_| center + rng.gen_range(0..6)).collect(),
        vb: rng.gen_range(0..1u64 << kappa),
        wb: rng.gen_range(0..1u64 << kappa),
        beta_v: bv,
        beta_w: bw,
    }
}

fn random_mix<A>(rng: &mut impl rand::Rng, mut make: impl FnMut(&mut dyn rand::RngCore) -> A) -> Mixed<A> {
    let k = rng.gen_range(1..=4);
    let mut w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|p| *p /= total);
    let last: f64 = 1.0 - w[..k - 1].iter().sum::<f64>();
    w[k - 1] = last;
    Mixed::new(w.into_iter().map(|p| (make(&mut *rng), p)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// No action in a slice around the structured argmax, plus random
    /// actions, beats the structured best response.
    #[test]
    fn alice_best_response_is_argmax(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let g = game_n1();
        let av = g.alice();
        let center = g.grid().round_index(0.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mix = random_mix(&mut rng, |r| {
            let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(r.next_u64());
            random_bob(g, &mut r, center)
        });
        let (br, value) = av.best_response(&mix);
        prop_assert!((av.expected(&br, &mix) - value).abs() == 0.0);
        for k in 0..1000 {
            let mut a = br.clone();
            if k < 200 {
                let i = k % a.x.len();
                a.x[i] = (a.x[i] + 1).saturating_sub(2 * (k as u64 / 100 % 2));
                a.iv = LineInfo::from_code((k % 8) as u8);
                a.iw = LineInfo::from_code((k / 8 % 8) as u8);
            } else {
                a = AliceAction {
                    x: (0..a.x.len()).map(|_| center + rng.gen_range(0..6)).collect(),
                    iv: LineInfo::from_code(rng.gen_range(0..8)),
                    iw: LineInfo::from_code(rng.gen_range(0..8)),
                };
            }
            prop_assert!(av.expected(&a, &mix) <= value + 1e-12);
        }
    }

    #[test]
    fn bob_best_response_is_argmax(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let g = game_n1();
        let bv = g.bob();
        let f = g.field();
        let segs: Vec<_> = f.pieces().segments.values().cloned().collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mix = random_mix(&mut rng, |r| {
            let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(r.next_u64());
            let s = &segs[r.gen_range(0..segs.len())];
            let p = s.closest(r.gen_range(0.0..=s.len));
            AliceAction {
                x: g.to_grid(&p),
                iv: LineInfo::from_code(r.gen_range(0..8)),
                iw: LineInfo::from_code(r.gen_range(0..8)),
            }
        });
        let (br, value) = bv.best_response(&mix);
        let center = br.y.iter().copied().min().unwrap().saturating_sub(2);
        for k in 0..1000 {
            let mut b = if k < 300 { br.clone() } else { random_bob(g, &mut rng, center) };
            if k < 300 {
                let i = k % b.y.len();
                b.y[i] = if k % 2 == 0 { b.y[i] + 1 } else { b.y[i].saturating_sub(1) };
                if k % 3 == 0 {
                    b.vb ^= 1 << (k % 3);
                }
            }
            prop_assert!(bv.expected(&b, &mix) <= value + 1e-12);
        }
    }

    #[test]
    fn mixed_rejects_bad_weights(ps in prop::collection::vec(0.0f64..1.0, 1..6)) {
        let total: f64 = ps.iter().sum();
        let r = Mixed::new(ps.iter().enumerate().map(|(i, &p)| (i, p)).collect());
        let valid = ps.iter().all(|&p| p > 0.0) && (total - 1.0).abs() <= 1e-12;
        prop_assert_eq!(r.is_ok(), valid);
    }

    /// Random flips up to the correction radius never move a decoded
    /// announcement.
    #[test]
    fn population_ecc_immunity(seed in any::<u64>(), pop in 2usize..8) {
        use rand::SeedableRng;
        let g = game_np();
        let (a, b) = g.candidate().unwrap();
        let p = g.lift_profile(&a, &b);
        let kind = PlayerKind::ALL[pop];
        let (eu, eb, ei) = g.codes();
        let code = match kind {
            PlayerKind::V | PlayerKind::W => eu,
            PlayerKind::BetaV | PlayerKind::BetaW => eb,
            _ => ei,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut q = p.clone();
        for i in rand::seq::index::sample(&mut rng, g.m_prime(), (code.d_min() - 1) / 2) {
            q.flip(PlayerId { kind, i, j: 0 });
        }
        prop_assert_eq!(g.targets(&q), g.targets(&p));
    }

    #[test]
    fn realized_point_of_threshold(k in 0u64..=12) {
        let g = game_np();
        let col = threshold_column(k, g.slots());
        prop_assert_eq!(hardnash::arenanp::realized_index(&col), k);
    }
}

#[test]
fn linewalk_bits_formula() {
    for n in 1..=3 {
        for m in [2usize, 5, 16, 33] {
            let inst = gen_instance(Kind::Eotl, n, 3).unwrap();
            let sim = split_instance(&inst, m, 3).unwrap();
            let (out, t) = run_linewalk(&sim).unwrap();
            assert_eq!(t.total_bits(), (3 * index_bits(m) + 3) * out.visited);
        }
    }
}
