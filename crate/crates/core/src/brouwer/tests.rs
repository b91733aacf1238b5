use super::geom::{dist, norm};
use super::*;
use crate::codec::build_code;
use crate::lineworld::{gen_instance, solutions, Kind};

fn field(kind: Kind, n: usize, seed: u64) -> BrouwerField {
    let inst = gen_instance(kind, n, seed).unwrap();
    let code = build_code(inst.layout.kappa(), 0.3, seed).unwrap();
    build_field(&inst, &code, GeometryParams::demo()).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn n1_segment_counts() {
    let f = field(Kind::Eotl, 1, 0);
    assert_eq!(f.edge_segment_count(), 9);
    // plus the dangling out-half of the line end
    assert_eq!(f.segment_count(), 11);
}

#[test]
fn zero_anchor_is_origin() {
    let f = field(Kind::Eotl, 2, 1);
    assert!(f.anchor(f.layout().zero()).iter().all(|v| *v == 0.0));
}

#[test]
fn cut_points_at_sqrt_h() {
    let f = field(Kind::Eotl, 2, 2);
    let sc = *f.scales();
    for s in f.pieces().segments.values() {
        let (z1, z2) = s.cut_points(&sc);
        assert!((dist(&z1, &s.s) - sc.sqrt_h).abs() < 1e-12);
        assert!((dist(&z2, &s.t) - sc.sqrt_h).abs() < 1e-12);
    }
}

#[test]
fn default_far_from_path() {
    let f = field(Kind::X, 2, 3);
    let m = f.m();
    let mut x = vec![0.5; 4 * m];
    for v in &mut x[3 * m..] {
        *v = 0.1;
    }
    let (region, _) = f.g_hat(&x);
    assert_eq!(region, Region::Default);
    let y = f.eval_f(&x).unwrap();
    let d = f.params().delta;
    for i in 0..4 * m {
        let want = if i >= 3 * m { x[i] + d } else { x[i] };
        assert_eq!(y[i], want);
    }
}

#[test]
fn default_magnitude_is_half_delta() {
    let f = field(Kind::Eotl, 1, 0);
    let g = f.scales().default_disp(f.dim());
    assert!((norm(&g) - f.params().delta / 2.0).abs() < 1e-18);
}

#[test]
fn segment_midpoint_moves_along_segment() {
    let f = field(Kind::Eotl, 2, 4);
    let d = f.params().delta;
    for (k, s) in &f.pieces().segments {
        if *k == PieceKey::Descent {
            continue;
        }
        let x = s.closest(s.len / 2.0);
        let (region, _) = f.g_hat(&x);
        assert_eq!(region, Region::Interior(*k));
        let y = f.eval_f(&x).unwrap();
        let want: Vec<f64> = x.iter().zip(&s.u).map(|(a, u)| a + d * u).collect();
        assert!(close(&y, &want, 1e-15), "{k:?}");
    }
}

#[test]
fn top_of_descent_points_down() {
    let f = field(Kind::Eotl, 1, 0);
    let x = f.start_point();
    let y = f.eval_f(&x).unwrap();
    let m = f.m();
    let d = f.params().delta;
    for i in 0..4 * m {
        let want = if i >= 3 * m { 2.0 - d } else { 0.0 };
        assert!((y[i] - want).abs() < 1e-18);
    }
}

#[test]
fn out_of_cube_rejected() {
    let f = field(Kind::Eotl, 1, 0);
    let mut x = vec![0.0; f.dim()];
    x[2] = 2.5;
    assert!(matches!(f.eval_f(&x), Err(crate::Error::OutOfRange { index: 2, .. })));
}

#[test]
fn local_matches_global_near_edges() {
    let f = field(Kind::Y, 2, 5);
    let l = f.layout();
    for (k, s) in &f.pieces().segments {
        if *k == PieceKey::Descent {
            continue;
        }
        for frac in [0.05, 0.3, 0.5, 0.7, 0.95, 1.0] {
            let mut x = s.closest(s.len * frac);
            // nudge along the default direction to leave the segment axis
            for v in &mut x[3 * f.m()..] {
                *v += 0.01;
            }
            let (a, b) = f.decoded_pair(&x);
            let i1 = a.map(|v| f.instance().info(v)).unwrap_or_default();
            let i2 = b.map(|v| f.instance().info(v)).unwrap_or_default();
            assert_eq!(f.eval_f(&x).unwrap(), f.eval_f_local(i1, i2, &x).unwrap(), "{k:?} {frac}");
            let _ = l;
        }
    }
}

#[test]
fn local_with_wrong_t_is_default() {
    let f = field(Kind::Eotl, 2, 6);
    let l = f.layout();
    let zero = l.zero();
    let w = l.succ(zero, f.instance().info(zero).s);
    let s = &f.pieces().segments[&PieceKey::Seg {
        from: 0,
        to: l.pack(w),
        part: 0,
    }];
    let x = s.closest(s.len / 2.0);
    let i1 = LineInfo::new(false, false, false);
    let i2 = f.instance().info(zero);
    let (region, _) = f.g_hat_local(i1, i1, &x);
    assert_eq!(region, Region::Default);
    let (region, _) = f.g_hat_local(i1, i2, &x);
    assert_eq!(region, Region::Inconsistent);
}

#[test]
fn local_far_from_path_ignores_info() {
    let f = field(Kind::X, 2, 7);
    let m = f.m();
    let mut x = vec![0.5; 4 * m];
    for v in &mut x[3 * m..] {
        *v = 0.2;
    }
    let want = f.eval_f(&x).unwrap();
    for c1 in 0..8 {
        for c2 in 0..8 {
            let got = f.eval_f_local(LineInfo::from_code(c1), LineInfo::from_code(c2), &x).unwrap();
            assert_eq!(got, want);
        }
    }
}

#[test]
fn follow_n1_reaches_solution() {
    let f = field(Kind::Eotl, 1, 0);
    let opts = FollowOptions::for_field(&f);
    let r = follow_path(&f, &opts).unwrap();
    assert!(r.residual <= f.params().delta / 10.0);
    let (a, _) = f.decoded_pair(&r.point);
    let sols = solutions(f.instance());
    assert_eq!(a, Some(sols[0].0));
}

#[test]
fn follow_with_loose_tolerance_stops_at_start() {
    let f = field(Kind::Eotl, 1, 0);
    let mut opts = FollowOptions::for_field(&f);
    opts.tol = 10.0;
    let r = follow_path(&f, &opts).unwrap();
    assert_eq!(r.steps, 0);
    assert_eq!(r.point, f.start_point());
}

#[test]
fn follow_rejects_large_step() {
    let f = field(Kind::Eotl, 1, 0);
    let mut opts = FollowOptions::for_field(&f);
    opts.step = f.params().h;
    assert!(follow_path(&f, &opts).is_err());
}

#[test]
fn demo_geometry_report() {
    let f = field(Kind::Eotl, 1, 0);
    let rep = validate_geometry(&f);
    let get = |n: &str| rep.checks.iter().find(|c| c.name == n).unwrap().clone();
    for n in ["i_vertex_separation", "ii_segment_separation", "iv_delta_le_h_cubed", "vi_grid_steps_integer"] {
        assert!(get(n).pass, "{n}");
    }
    let iii = get("iii_code_separation");
    assert!(!iii.pass && iii.informational);
    assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
}

#[test]
fn delta_h_squared_fails_check_iv() {
    let inst = gen_instance(Kind::Eotl, 1, 0).unwrap();
    let code = build_code(3, 0.3, 0).unwrap();
    let p = GeometryParams::new(0.01, 1e-4, Profile::Demo).unwrap();
    let f = build_field(&inst, &code, p).unwrap();
    let rep = validate_geometry(&f);
    assert!(!rep.checks.iter().find(|c| c.name == "iv_delta_le_h_cubed").unwrap().pass);
}

#[test]
fn strict_profile_passes_everything() {
    let inst = gen_instance(Kind::Eotl, 1, 0).unwrap();
    let code = build_code(3, 0.3, 0).unwrap();
    let f = build_field(&inst, &code, GeometryParams::strict_for(&code)).unwrap();
    let rep = validate_geometry(&f);
    assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
    assert!(rep.checks.iter().all(|c| c.pass));
}

#[test]
fn code_mismatch_rejected() {
    let inst = gen_instance(Kind::Eotl, 2, 0).unwrap();
    let code = build_code(3, 0.3, 0).unwrap();
    assert!(build_field(&inst, &code, GeometryParams::demo()).is_err());
}
