//! Continuous embedding of a line instance as a displacement field
//! `f(x) = x + g(x)` on `[-1, 2]^{4m}`.
//!
//! Each graph edge `(v, w)` becomes four Brouwer segments through
//!
//! ```text
//! x1 = (E(v), E(v), 0, 0)   x2 = (E(v), E(v), 1, 0)   x3 = (E(v), E(w), 1, 0)
//! x4 = (E(v), E(w), 0, 0)   x5 = (E(w), E(w), 0, 0)
//! ```
//!
//! The first two segments are the *out-half* of `v` and depend only on
//! `(v, S(v))`; the last two are the *in-half* of `w` and depend only on
//! `(w, P(w))`. Near an out-half the first tuple decodes to `v`; near an
//! in-half the second tuple decodes to `w`. Halves meet at `x3` only when both
//! sides agree on the edge, so a line end owns a dangling out-half ending at
//! `x3(v*, succ(v*))` and a nontrivial start owns a dangling in-half. These
//! dangling stubs carry the terminal windows, which keeps `f` a function of the
//! two decoded vertices and their line information alone.

pub mod geom;

mod eval;
mod follow;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::{BinaryCode, GridSpec};
use crate::lineworld::{Layout, LineInfo, LineInstance, Vertex};
use crate::{Error, Result};

pub use eval::Region;
pub use follow::{follow_path, FollowOptions, PathResult};
pub use geom::{Junction, Scales, Segment, Window};
pub use validate::validate_geometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Every geometric inequality is enforced.
    Strict,
    /// Practical scales; code separation is checked empirically on the field.
    Demo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    pub h: f64,
    pub delta: f64,
    pub profile: Profile,
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

impl GeometryParams {
    pub const DEMO_H: f64 = 0.01;
    pub const DEMO_DELTA: f64 = 1e-6;

    pub fn new(h: f64, delta: f64, profile: Profile) -> Result<Self> {
        if !(h > 0.0 && h < 1.0 && delta > 0.0) {
            return Err(Error::InvalidParameter(format!("h = {h}, delta = {delta}")));
        }
        Ok(GeometryParams {
            h,
            delta,
            profile,
            grid: None,
        })
    }

    /// `h = 0.01`, `δ = 10⁻⁶`, grid `eps = 3/⌈12/δ⌉ ≤ δ/4`.
    pub fn demo() -> Self {
        GeometryParams::new(Self::DEMO_H, Self::DEMO_DELTA, Profile::Demo)
            .expect("demo constants are valid")
            .with_default_grid()
    }

    /// Halve `h` from `0.01` until `24√h` clears the per-tuple code distance;
    /// `δ = h³`.
    pub fn strict_for(code: &BinaryCode) -> Self {
        let sep = (code.d_min() as f64 / code.m() as f64).sqrt();
        let mut h = Self::DEMO_H;
        while 24.0 * h.sqrt() >= sep {
            h /= 2.0;
        }
        GeometryParams::new(h, h * h * h, Profile::Strict)
            .expect("positive scales")
            .with_default_grid()
    }

    /// Attach the coarsest grid with `3/eps` integer and `eps ≤ δ/4`.
    pub fn with_default_grid(mut self) -> Self {
        let steps = (12.0 / self.delta).ceil() as u64;
        self.grid = GridSpec::from_steps(steps).ok();
        self
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = Some(grid);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum JunctionAt {
    /// Bottom of the descent, joining the out-half of the zero vertex.
    Zero,
    /// Embedded vertex `x1(v) = x5(u, v)`, joining in-half and out-half of `v`.
    Anchor,
    X2,
    X3,
    X4,
}

/// Symbolic identity of a piece; ids are packed vertex ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PieceKey {
    Descent,
    /// Segment `x_{part+1} → x_{part+2}` of edge `(from, to)`.
    Seg { from: u64, to: u64, part: u8 },
    Junction { at: JunctionAt, from: u64, to: u64 },
}

/// Pieces in key order; evaluation takes the first match in this order.
#[derive(Debug, Clone, Default)]
pub struct PieceSet {
    pub segments: BTreeMap<PieceKey, Segment>,
    pub junctions: BTreeMap<PieceKey, Junction>,
}

impl PieceSet {
    pub fn len(&self) -> usize {
        self.segments.len() + self.junctions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty() && self.junctions.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct BrouwerField {
    instance: LineInstance,
    code: BinaryCode,
    params: GeometryParams,
    scales: Scales,
    m: usize,
    /// Codewords as `0.0/1.0` vectors, indexed by message.
    words: Vec<Vec<f64>>,
    descent: Segment,
    pieces: PieceSet,
}

/// Which halves to emit, and what is known about other vertices.
struct Plan<'a> {
    outs: &'a [(Vertex, LineInfo)],
    ins: &'a [(Vertex, LineInfo)],
    anchors: &'a [(Vertex, LineInfo)],
    known: &'a dyn Fn(Vertex) -> Option<LineInfo>,
}

pub fn build_field(instance: &LineInstance, code: &BinaryCode, params: GeometryParams) -> Result<BrouwerField> {
    let layout = instance.layout;
    if code.kappa() != layout.kappa() {
        return Err(Error::LengthMismatch {
            expected: layout.kappa(),
            got: code.kappa(),
        });
    }
    if !(params.h > 0.0 && params.delta > 0.0) {
        return Err(Error::InvalidParameter("h and delta must be positive".into()));
    }
    let m = code.m();
    let words: Vec<Vec<f64>> = code
        .codebook()
        .iter()
        .map(|w| w.iter().map(|b| b as u8 as f64).collect())
        .collect();
    let scales = Scales::new(params.h, params.delta, m);
    let mut top = vec![0.0; 4 * m];
    for v in &mut top[3 * m..] {
        *v = 2.0;
    }
    let descent = Segment::new(top, vec![0.0; 4 * m], Window::Open, Window::Open);
    let mut field = BrouwerField {
        instance: instance.clone(),
        code: code.clone(),
        params,
        scales,
        m,
        words,
        descent,
        pieces: PieceSet::default(),
    };
    let on: Vec<(Vertex, LineInfo)> = layout
        .vertices()
        .map(|v| (v, instance.info(v)))
        .filter(|(_, i)| i.t)
        .collect();
    let inst = &field.instance;
    let known = |v: Vertex| Some(inst.info(v));
    let pieces = field.build_pieces(&Plan {
        outs: &on,
        ins: &on,
        anchors: &on,
        known: &known,
    });
    field.pieces = pieces;
    Ok(field)
}

impl BrouwerField {
    /// The same geometry with no line information: every piece that depends
    /// on the instance is dropped. Parties that must not see the instance
    /// evaluate `f_{I1,I2}` through this view.
    pub fn public_view(&self) -> BrouwerField {
        let l = self.layout();
        let blank = LineInstance::from_lines(l, self.instance.kind, 0, Vec::new())
            .expect("an empty line set is well formed");
        build_field(&blank, &self.code, self.params).expect("geometry already validated")
    }

    pub fn instance(&self) -> &LineInstance {
        &self.instance
    }

    pub fn code(&self) -> &BinaryCode {
        &self.code
    }

    pub fn params(&self) -> &GeometryParams {
        &self.params
    }

    pub fn scales(&self) -> &Scales {
        &self.scales
    }

    pub fn layout(&self) -> Layout {
        self.instance.layout
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        4 * self.m
    }

    pub fn pieces(&self) -> &PieceSet {
        &self.pieces
    }

    pub fn descent(&self) -> &Segment {
        &self.descent
    }

    /// Start of the embedded path, `(0_{3m}, 2·1_m)`.
    pub fn start_point(&self) -> Vec<f64> {
        self.descent.s.clone()
    }

    /// `(E(v), E(v), 0_m, 0_m)`
    pub fn anchor(&self, v: Vertex) -> Vec<f64> {
        self.brouwer_vertex(1, v, v)
    }

    pub fn segment_count(&self) -> usize {
        self.pieces.segments.len()
    }

    /// Segments on joined edges plus the descent, excluding dangling stubs.
    pub fn edge_segment_count(&self) -> usize {
        let joined = self
            .pieces
            .junctions
            .keys()
            .filter(|k| matches!(k, PieceKey::Junction { at: JunctionAt::X3, .. }))
            .count();
        1 + 4 * joined
    }

    /// Brouwer vertex `x_i(v, w)`, `i ∈ 1..=5`.
    pub fn brouwer_vertex(&self, i: u8, v: Vertex, w: Vertex) -> Vec<f64> {
        let l = self.layout();
        let ev = &self.words[l.pack(v) as usize];
        let ew = &self.words[l.pack(w) as usize];
        let (a, b, c) = match i {
            1 => (ev, ev, 0.0),
            2 => (ev, ev, 1.0),
            3 => (ev, ew, 1.0),
            4 => (ev, ew, 0.0),
            5 => (ew, ew, 0.0),
            _ => panic!("Brouwer vertex index {i} outside 1..=5"),
        };
        let m = self.m;
        let mut x = Vec::with_capacity(4 * m);
        x.extend_from_slice(a);
        x.extend_from_slice(b);
        x.extend(std::iter::repeat(c).take(m));
        x.extend(std::iter::repeat(0.0).take(m));
        x
    }

    fn seg(&self, v: Vertex, w: Vertex, part: u8, start: Window, end: Window) -> Segment {
        Segment::new(
            self.brouwer_vertex(part + 1, v, w),
            self.brouwer_vertex(part + 2, v, w),
            start,
            end,
        )
    }

    fn seg_key(&self, v: Vertex, w: Vertex, part: u8) -> PieceKey {
        let l = self.layout();
        PieceKey::Seg {
            from: l.pack(v),
            to: l.pack(w),
            part,
        }
    }

    fn junction_key(&self, at: JunctionAt, v: Vertex, w: Vertex) -> PieceKey {
        let l = self.layout();
        PieceKey::Junction {
            at,
            from: l.pack(v),
            to: l.pack(w),
        }
    }

    fn build_pieces(&self, plan: &Plan<'_>) -> PieceSet {
        let l = self.layout();
        let sc = &self.scales;
        let zero = l.zero();
        let mut set = PieceSet::default();
        set.segments.insert(PieceKey::Descent, self.descent.clone());
        if let Some(i0) = (plan.known)(zero) {
            if i0.t {
                let w = l.succ(zero, i0.s);
                set.junctions.insert(
                    self.junction_key(JunctionAt::Zero, zero, zero),
                    Junction::new(self.descent.s.clone(), vec![0.0; self.dim()], self.brouwer_vertex(2, zero, w), sc),
                );
            }
        }
        // an out-half of `v` is joined to the in-half of `w` iff both agree on the edge
        let joined = |v: Vertex, iv: LineInfo, w: Vertex, iw: LineInfo| -> bool {
            iv.t && iw.t && w != zero && l.succ(v, iv.s) == w && l.pred(w, iw.p) == v
        };
        for &(v, iv) in plan.outs {
            if !iv.t {
                continue;
            }
            let w = l.succ(v, iv.s);
            let end = match (plan.known)(w) {
                Some(iw) if joined(v, iv, w, iw) => {
                    set.junctions.insert(
                        self.junction_key(JunctionAt::X3, v, w),
                        Junction::new(
                            self.brouwer_vertex(2, v, w),
                            self.brouwer_vertex(3, v, w),
                            self.brouwer_vertex(4, v, w),
                            sc,
                        ),
                    );
                    Window::Open
                }
                Some(_) => Window::Terminal,
                None => Window::Open,
            };
            set.segments
                .insert(self.seg_key(v, w, 0), self.seg(v, w, 0, Window::Open, Window::Open));
            set.segments.insert(self.seg_key(v, w, 1), self.seg(v, w, 1, Window::Open, end));
            set.junctions.insert(
                self.junction_key(JunctionAt::X2, v, w),
                Junction::new(
                    self.brouwer_vertex(1, v, w),
                    self.brouwer_vertex(2, v, w),
                    self.brouwer_vertex(3, v, w),
                    sc,
                ),
            );
        }
        for &(w, iw) in plan.ins {
            if !iw.t || w == zero {
                continue;
            }
            let v = l.pred(w, iw.p);
            let start = match (plan.known)(v) {
                Some(iv) if joined(v, iv, w, iw) => {
                    set.junctions.insert(
                        self.junction_key(JunctionAt::X3, v, w),
                        Junction::new(
                            self.brouwer_vertex(2, v, w),
                            self.brouwer_vertex(3, v, w),
                            self.brouwer_vertex(4, v, w),
                            sc,
                        ),
                    );
                    Window::Open
                }
                Some(_) => Window::Terminal,
                None => Window::Open,
            };
            set.segments
                .insert(self.seg_key(v, w, 2), self.seg(v, w, 2, start, Window::Open));
            set.segments
                .insert(self.seg_key(v, w, 3), self.seg(v, w, 3, Window::Open, Window::Open));
            set.junctions.insert(
                self.junction_key(JunctionAt::X4, v, w),
                Junction::new(
                    self.brouwer_vertex(3, v, w),
                    self.brouwer_vertex(4, v, w),
                    self.brouwer_vertex(5, v, w),
                    sc,
                ),
            );
        }
        for &(c, ic) in plan.anchors {
            if !ic.t || c == zero {
                continue;
            }
            let u = l.pred(c, ic.p);
            let w = l.succ(c, ic.s);
            set.junctions.insert(
                self.junction_key(JunctionAt::Anchor, c, c),
                Junction::new(
                    self.brouwer_vertex(4, u, c),
                    self.brouwer_vertex(1, c, w),
                    self.brouwer_vertex(2, c, w),
                    sc,
                ),
            );
        }
        set
    }

    /// Pieces visible to a party that knows only `I1` for the first-tuple
    /// vertex `a` and `I2` for the second-tuple vertex `b`.
    pub fn local_pieces(&self, a: Option<Vertex>, i1: LineInfo, b: Option<Vertex>, i2: LineInfo) -> PieceSet {
        let outs: Vec<(Vertex, LineInfo)> = a.map(|v| (v, i1)).into_iter().collect();
        let ins: Vec<(Vertex, LineInfo)> = b.map(|v| (v, i2)).into_iter().collect();
        let anchors: Vec<(Vertex, LineInfo)> = match (a, b) {
            (Some(x), Some(y)) if x == y && i1 == i2 => vec![(x, i1)],
            _ => Vec::new(),
        };
        let known = |v: Vertex| {
            if Some(v) == a {
                Some(i1)
            } else if Some(v) == b {
                Some(i2)
            } else {
                None
            }
        };
        self.build_pieces(&Plan {
            outs: &outs,
            ins: &ins,
            anchors: &anchors,
            known: &known,
        })
    }

    /// Serializable summary: parameters, sizes, and segment endpoints.
    pub fn summary(&self) -> FieldSummary {
        FieldSummary {
            format_version: crate::FORMAT_VERSION.to_string(),
            n: self.layout().n,
            kappa: self.code.kappa(),
            m: self.m,
            d_min: self.code.d_min(),
            params: self.params,
            segment_count: self.segment_count(),
            edge_segment_count: self.edge_segment_count(),
            junction_count: self.pieces.junctions.len(),
            segments: self
                .pieces
                .segments
                .iter()
                .map(|(k, s)| SegmentSummary {
                    key: *k,
                    s: s.s.clone(),
                    t: s.t.clone(),
                    len: s.len,
                    terminal_start: s.start == Window::Terminal,
                    terminal_end: s.end == Window::Terminal,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub key: PieceKey,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub len: f64,
    pub terminal_start: bool,
    pub terminal_end: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSummary {
    pub format_version: String,
    pub n: usize,
    pub kappa: usize,
    pub m: usize,
    pub d_min: usize,
    pub params: GeometryParams,
    pub segment_count: usize,
    pub edge_segment_count: usize,
    pub junction_count: usize,
    pub segments: Vec<SegmentSummary>,
}

#[cfg(test)]
mod tests;
