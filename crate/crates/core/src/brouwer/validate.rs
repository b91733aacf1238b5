//! Geometric validation of a field: vertex separation, segment separation,
//! code separation, and the scale inequalities between `h`, `δ` and `eps`.

use serde_json::json;

use super::geom::{dist, segment_distance};
use super::{BrouwerField, PieceKey, Profile};
use crate::codec::{decode_point_id, Tuple};
use crate::report::Report;

fn same(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

pub fn validate_geometry(field: &BrouwerField) -> Report {
    let p = field.params();
    let h = p.h;
    let strict = p.profile == Profile::Strict;
    let mut rep = Report::new("geometry").with_config(json!({
        "h": h,
        "delta": p.delta,
        "profile": p.profile,
        "m": field.m(),
        "d_min": field.code().d_min(),
    }));
    let segs: Vec<_> = field.pieces().segments.iter().collect();

    let mut verts: Vec<&[f64]> = Vec::new();
    for (_, s) in &segs {
        for v in [&s.s[..], &s.t[..]] {
            if !verts.iter().any(|w| same(w, v)) {
                verts.push(v);
            }
        }
    }
    let mut vmin = f64::INFINITY;
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            vmin = vmin.min(dist(verts[i], verts[j]));
        }
    }
    let bound = 2.0 * h.sqrt();
    rep.check("i_vertex_separation", vmin, bound, bound < vmin);

    let mut smin = f64::INFINITY;
    let mut worst = None;
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            let (a, b) = (segs[i].1, segs[j].1);
            let touch = same(&a.s, &b.s) || same(&a.s, &b.t) || same(&a.t, &b.s) || same(&a.t, &b.t);
            if touch {
                continue;
            }
            let d = segment_distance(&a.s, &a.t, &b.s, &b.t);
            if d < smin {
                smin = d;
                worst = Some((*segs[i].0, *segs[j].0));
            }
        }
    }
    let c = rep.check("ii_segment_separation", smin, 6.0 * h, 6.0 * h < smin);
    if let Some((a, b)) = worst {
        c.detail(format!("closest pair {a:?} / {b:?}"));
    }

    let code = field.code();
    let sep = (code.d_min() as f64 / code.m() as f64).sqrt();
    let bound = 24.0 * h.sqrt();
    let c = rep.check("iii_code_separation", sep, bound, bound < sep);
    if !strict {
        c.informational()
            .detail(format!("demo profile: margin {:.4}; replaced by the empirical decode check", sep - bound));
    }
    if !strict {
        let sq = h.sqrt();
        let mut bad = None;
        for (k, s) in &segs {
            let (which, owner) = match k {
                PieceKey::Seg { from, part, .. } if *part < 2 => (Tuple::First, *from),
                PieceKey::Seg { to, .. } => (Tuple::Second, *to),
                _ => (Tuple::First, 0),
            };
            let ts = [0.0, sq.min(s.len), s.len / 2.0, (s.len - sq).max(0.0), s.len];
            for t in ts {
                let x = s.closest(t);
                if decode_point_id(&x, which, code).0 != owner && bad.is_none() {
                    bad = Some(format!("{k:?} at arc {t}"));
                }
            }
        }
        let c = rep.check("iii_empirical_owner_decode", bad.is_none(), true, bad.is_none());
        if let Some(b) = bad {
            c.detail(b);
        }
    }

    let worst_cos = field
        .pieces()
        .junctions
        .values()
        .map(|j| j.cos_angle().abs())
        .fold(0.0, f64::max);
    rep.check("consecutive_orthogonal", worst_cos, 1e-12, worst_cos <= 1e-12);

    let h3 = h * h * h;
    rep.check("iv_delta_le_h_cubed", p.delta, h3, p.delta <= h3 * (1.0 + 1e-9));
    if let Some(g) = p.grid {
        let eps = g.eps();
        let q = p.delta / 4.0;
        rep.check("v_eps_le_delta_over_4", eps, q, eps <= q * (1.0 + 1e-9));
        rep.check("vi_grid_steps_integer", g.steps(), "3/eps ∈ ℕ", true);
    }
    rep
}
