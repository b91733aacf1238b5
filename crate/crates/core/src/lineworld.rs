//! The layered graph `G`, permutation-induced line instances, a counting
//! query oracle, and end-of-line solution finding.
//!
//! Vertices are triples `(v1, v2, k)` with `v1, v2 ∈ {0,1}^n` and layer
//! `k ∈ {0, …, n}`. Coordinate `j` (1-based) of a bit vector is stored at
//! bit `j - 1`. Successor edges copy one bit into `v2`; the top layer swaps
//! back to layer 0:
//!
//! * `succ((v1, v2, k), b) = (v1, v2[k+1 := b], k+1)` for `k < n`
//! * `succ((v1, v2, n), _) = (v2, v1, 0)`
//! * `pred((v1, v2, k), b) = (v1, v2[k := b], k-1)` for `k ≥ 1`
//! * `pred((v1, v2, 0), _) = (v2, v1, n)`
//!
//! A step `v = π(i) → w = π(i+1)` of a permutation walks from the anchor
//! `(v, π(i-1), 0)` through layers `1..n` (copying `w` into `v2`) and swaps to
//! the next anchor `(w, v, 0)`, for `n + 1` edges per step.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitWord;
use crate::report::Report;
use crate::{Error, Result};

pub const REJECTION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub v1: u64,
    pub v2: u64,
    pub k: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Succ,
    Pred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct LineInfo {
    pub t: bool,
    pub s: bool,
    pub p: bool,
}

impl LineInfo {
    pub const OFF: LineInfo = LineInfo {
        t: false,
        s: false,
        p: false,
    };

    pub fn new(t: bool, s: bool, p: bool) -> Self {
        LineInfo { t, s, p }
    }

    /// `T·4 + S·2 + P`, the fixed total order used for tie-breaking.
    pub fn code(self) -> u8 {
        (self.t as u8) << 2 | (self.s as u8) << 1 | self.p as u8
    }

    pub fn from_code(c: u8) -> Self {
        LineInfo::new(c & 4 != 0, c & 2 != 0, c & 1 != 0)
    }

    pub fn all() -> impl Iterator<Item = LineInfo> {
        (0..8u8).map(LineInfo::from_code)
    }
}

/// Shape of the graph at size parameter `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
}

impl Layout {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(Error::InvalidParameter(format!("n = {n} must lie in 1..=20")));
        }
        Ok(Layout { n })
    }

    /// Bits used for the layer index, `⌈log₂(n+1)⌉`.
    pub fn layer_bits(&self) -> usize {
        let mut b = 0;
        while (1usize << b) < self.n + 1 {
            b += 1;
        }
        b
    }

    /// Packed id width `κ = 2n + ⌈log₂(n+1)⌉`.
    pub fn kappa(&self) -> usize {
        2 * self.n + self.layer_bits()
    }

    pub fn vertex_count(&self) -> usize {
        (1usize << (2 * self.n)) * (self.n + 1)
    }

    fn mask(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    pub fn zero(&self) -> Vertex {
        Vertex { v1: 0, v2: 0, k: 0 }
    }

    pub fn pack(&self, v: Vertex) -> u64 {
        v.v1 | v.v2 << self.n | (v.k as u64) << (2 * self.n)
    }

    /// `None` for ids whose layer field exceeds `n`.
    pub fn unpack(&self, id: u64) -> Option<Vertex> {
        if id >> self.kappa() != 0 {
            return None;
        }
        let k = (id >> (2 * self.n)) as u32;
        if k as usize > self.n {
            return None;
        }
        Some(Vertex {
            v1: id & self.mask(),
            v2: (id >> self.n) & self.mask(),
            k,
        })
    }

    pub fn packed_word(&self, v: Vertex) -> BitWord {
        BitWord::from_u64(self.pack(v), self.kappa())
    }

    pub fn is_valid(&self, v: Vertex) -> bool {
        v.k as usize <= self.n && v.v1 <= self.mask() && v.v2 <= self.mask()
    }

    pub fn neighbor(&self, v: Vertex, dir: Dir, bit: bool) -> Vertex {
        let n = self.n as u32;
        match dir {
            Dir::Succ if v.k < n => Vertex {
                v1: v.v1,
                v2: set_bit(v.v2, v.k as usize, bit),
                k: v.k + 1,
            },
            Dir::Succ => Vertex {
                v1: v.v2,
                v2: v.v1,
                k: 0,
            },
            Dir::Pred if v.k >= 1 => Vertex {
                v1: v.v1,
                v2: set_bit(v.v2, v.k as usize - 1, bit),
                k: v.k - 1,
            },
            Dir::Pred => Vertex {
                v1: v.v2,
                v2: v.v1,
                k: n,
            },
        }
    }

    pub fn succ(&self, v: Vertex, bit: bool) -> Vertex {
        self.neighbor(v, Dir::Succ, bit)
    }

    pub fn pred(&self, v: Vertex, bit: bool) -> Vertex {
        self.neighbor(v, Dir::Pred, bit)
    }

    /// Bit selecting `to` among the successors of `from`, if `to` is one.
    pub fn succ_bit(&self, from: Vertex, to: Vertex) -> Option<bool> {
        [false, true]
            .into_iter()
            .find(|&b| self.succ(from, b) == to)
    }

    pub fn pred_bit(&self, from: Vertex, to: Vertex) -> Option<bool> {
        [false, true]
            .into_iter()
            .find(|&b| self.pred(from, b) == to)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        let side = 1u64 << self.n;
        (0..=self.n as u32).flat_map(move |k| {
            (0..side).flat_map(move |v1| (0..side).map(move |v2| Vertex { v1, v2, k }))
        })
    }

    /// First bit of a vertex: coordinate 1 of its `v1` component.
    pub fn first_bit(&self, v: Vertex) -> bool {
        v.v1 & 1 == 1
    }

    pub fn fmt_vertex(&self, v: Vertex) -> String {
        let b = |x: u64| -> String {
            (0..self.n)
                .map(|j| if x >> j & 1 == 1 { '1' } else { '0' })
                .collect()
        };
        format!("({},{},{})", b(v.v1), b(v.v2), v.k)
    }
}

fn set_bit(x: u64, j: usize, b: bool) -> u64 {
    if b {
        x | 1 << j
    } else {
        x & !(1 << j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "EOTL")]
    Eotl,
    X,
    Y,
    Z,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Eotl, Kind::X, Kind::Y, Kind::Z];
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Eotl => "EOTL",
            Kind::X => "X",
            Kind::Y => "Y",
            Kind::Z => "Z",
        })
    }
}

impl FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EOTL" => Ok(Kind::Eotl),
            "X" => Ok(Kind::X),
            "Y" => Ok(Kind::Y),
            "Z" => Ok(Kind::Z),
            other => Err(Error::InvalidParameter(format!("unknown kind {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    End,
    Start,
}

#[derive(Debug, Clone)]
pub struct LineInstance {
    pub layout: Layout,
    pub kind: Kind,
    pub seed: u64,
    /// Vertex sequences of the (one or two) lines; the first starts at zero.
    pub lines: Vec<Vec<Vertex>>,
    info: HashMap<u64, LineInfo>,
}

impl LineInstance {
    pub fn n(&self) -> usize {
        self.layout.n
    }

    /// Line information of any vertex; off-line vertices answer `(0, 0, 0)`.
    pub fn info(&self, v: Vertex) -> LineInfo {
        self.info
            .get(&self.layout.pack(v))
            .copied()
            .unwrap_or(LineInfo::OFF)
    }

    /// Line information by packed id; ids outside the vertex set are off-line.
    pub fn info_by_id(&self, id: u64) -> LineInfo {
        self.info.get(&id).copied().unwrap_or(LineInfo::OFF)
    }

    /// Overwrite one vertex's information (used to build corrupted controls).
    pub fn set_info(&mut self, v: Vertex, i: LineInfo) {
        let id = self.layout.pack(v);
        if i == LineInfo::OFF {
            self.info.remove(&id);
        } else {
            self.info.insert(id, i);
        }
    }

    pub fn edge_count(&self) -> usize {
        self.lines.iter().map(|l| l.len().saturating_sub(1)).sum()
    }

    /// Build an instance from explicit lines, assigning `T/S/P`.
    pub fn from_lines(layout: Layout, kind: Kind, seed: u64, lines: Vec<Vec<Vertex>>) -> Result<Self> {
        let mut info: HashMap<u64, LineInfo> = HashMap::new();
        for line in &lines {
            for v in line {
                if !layout.is_valid(*v) {
                    return Err(Error::Malformed(format!("invalid vertex {v:?}")));
                }
                if info.insert(layout.pack(*v), LineInfo::new(true, false, false)).is_some() {
                    return Err(Error::Malformed(format!(
                        "vertex {} appears twice",
                        layout.fmt_vertex(*v)
                    )));
                }
            }
        }
        let on = |v: Vertex, info: &HashMap<u64, LineInfo>| info.contains_key(&layout.pack(v));
        for line in &lines {
            for (i, &v) in line.iter().enumerate() {
                let s = match line.get(i + 1) {
                    Some(&w) => layout.succ_bit(v, w).ok_or_else(|| {
                        Error::Malformed(format!(
                            "{} is not a successor of {}",
                            layout.fmt_vertex(w),
                            layout.fmt_vertex(v)
                        ))
                    })?,
                    // line end: point the successor bit off the lines
                    None => on(layout.succ(v, false), &info),
                };
                let p = match i.checked_sub(1).map(|j| line[j]) {
                    Some(u) => layout.pred_bit(v, u).ok_or_else(|| {
                        Error::Malformed(format!(
                            "{} is not a predecessor of {}",
                            layout.fmt_vertex(u),
                            layout.fmt_vertex(v)
                        ))
                    })?,
                    None => on(layout.pred(v, false), &info),
                };
                // bits of swap edges are stored as 0
                let s = s && (v.k as usize) < layout.n;
                let p = p && v.k >= 1;
                info.insert(layout.pack(v), LineInfo::new(true, s, p));
            }
        }
        Ok(LineInstance {
            layout,
            kind,
            seed,
            lines,
            info,
        })
    }
}

/// Expand a permutation (with `π(0) = 0`) into its line of anchors and layer walks.
pub fn walk_permutation(layout: Layout, perm: &[u64]) -> Vec<Vertex> {
    let n = layout.n;
    let mut line = vec![layout.zero()];
    for i in 0..perm.len().saturating_sub(1) {
        let v = perm[i];
        let w = perm[i + 1];
        let prev = if i == 0 { 0 } else { perm[i - 1] };
        let mut mix = prev;
        for k in 1..=n {
            mix = set_bit(mix, k - 1, w >> (k - 1) & 1 == 1);
            line.push(Vertex {
                v1: v,
                v2: mix,
                k: k as u32,
            });
        }
        line.push(Vertex { v1: w, v2: v, k: 0 });
    }
    line
}

fn sample_permutation<R: Rng>(layout: Layout, kind: Kind, rng: &mut R) -> Result<(Vec<u64>, Option<usize>)> {
    let side = 1u64 << layout.n;
    let mut rest: Vec<u64> = (1..side).collect();
    let first = |x: u64| x & 1 == 1;
    for _ in 0..REJECTION_CAP {
        rest.shuffle(rng);
        let last = *rest.last().unwrap();
        // EOTL shares X's conditioning: one line whose end has first bit 1
        let ok = match kind {
            Kind::Eotl | Kind::X | Kind::Y => first(last),
            Kind::Z => !first(last),
        };
        if !ok {
            continue;
        }
        let mut perm = Vec::with_capacity(side as usize);
        perm.push(0);
        perm.extend_from_slice(&rest);
        if kind == Kind::Y {
            let pairs: Vec<usize> = (1..perm.len() - 1)
                .filter(|&i| first(perm[i]) && first(perm[i + 1]))
                .collect();
            if pairs.is_empty() {
                continue;
            }
            let cut = pairs[rng.gen_range(0..pairs.len())];
            return Ok((perm, Some(cut)));
        }
        return Ok((perm, None));
    }
    Err(Error::NoAdmissiblePermutation {
        kind: kind.to_string(),
        n: layout.n,
    })
}

/// Build the instance induced by an explicit permutation; for `Y`, `cut`
/// is the index `i` of the pair `(π(i), π(i+1))` whose macro-step is cut at
/// the edge leaving `anchor(π(i))`.
pub fn instance_from_permutation(
    layout: Layout,
    kind: Kind,
    seed: u64,
    perm: &[u64],
    cut: Option<usize>,
) -> Result<LineInstance> {
    if perm.first() != Some(&0) {
        return Err(Error::Malformed("permutation must start at 0".into()));
    }
    let line = walk_permutation(layout, perm);
    let lines = match cut {
        None => vec![line],
        Some(i) => {
            // anchor(π(i)) sits at index i·(n+1)
            let at = i * (layout.n + 1);
            if i == 0 || at + 1 >= line.len() {
                return Err(Error::Malformed(format!("cut index {i} out of range")));
            }
            let (a, b) = line.split_at(at + 1);
            vec![a.to_vec(), b.to_vec()]
        }
    };
    LineInstance::from_lines(layout, kind, seed, lines)
}

pub fn gen_instance(kind: Kind, n: usize, seed: u64) -> Result<LineInstance> {
    let layout = Layout::new(n)?;
    let mut rng = crate::seed::rng(seed, "lineworld/permutation");
    let (perm, cut) = sample_permutation(layout, kind, &mut rng)?;
    instance_from_permutation(layout, kind, seed, &perm, cut)
}

/// All nontrivial ends and starts.
pub fn solutions(inst: &LineInstance) -> Vec<(Vertex, Role)> {
    let l = inst.layout;
    let zero = l.zero();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for line in &inst.lines {
        for &v in line {
            if v == zero || !seen.insert(v) {
                continue;
            }
            let i = inst.info(v);
            if !i.t {
                continue;
            }
            if !inst.info(l.succ(v, i.s)).t {
                out.push((v, Role::End));
            }
            if !inst.info(l.pred(v, i.p)).t {
                out.push((v, Role::Start));
            }
        }
    }
    // vertices carrying T = 1 outside the recorded lines
    let mut extra: Vec<u64> = inst
        .info
        .iter()
        .filter(|(id, i)| i.t && !seen.contains(&l.unpack(**id).unwrap_or(zero)))
        .map(|(id, _)| *id)
        .collect();
    extra.sort_unstable();
    for id in extra {
        let Some(v) = l.unpack(id) else { continue };
        if v == zero {
            continue;
        }
        let i = inst.info(v);
        if !inst.info(l.succ(v, i.s)).t {
            out.push((v, Role::End));
        }
        if !inst.info(l.pred(v, i.p)).t {
            out.push((v, Role::Start));
        }
    }
    out.sort();
    out
}

pub struct QueryOracle<'a> {
    instance: &'a LineInstance,
    count: u64,
}

impl<'a> QueryOracle<'a> {
    pub fn new(instance: &'a LineInstance) -> Self {
        QueryOracle { instance, count: 0 }
    }

    pub fn query(&mut self, v: Vertex) -> LineInfo {
        self.count += 1;
        self.instance.info(v)
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

pub fn validate_instance(inst: &LineInstance) -> Report {
    let l = inst.layout;
    let zero = l.zero();
    let mut rep = Report::new("validate");
    let fmt = |v: Vertex| l.fmt_vertex(v);

    // disjointness
    let mut seen: HashMap<Vertex, usize> = HashMap::new();
    let mut clash = None;
    for (li, line) in inst.lines.iter().enumerate() {
        for &v in line {
            if seen.insert(v, li).is_some() && clash.is_none() {
                clash = Some(v);
            }
        }
    }
    let c = rep.check("lines_vertex_disjoint", clash.is_none(), true, clash.is_none());
    if let Some(v) = clash {
        c.detail(fmt(v));
    }

    let starts_at_zero = inst.lines.first().and_then(|l| l.first()) == Some(&zero);
    rep.check("first_line_starts_at_zero", starts_at_zero, true, starts_at_zero);

    // T/S/P agree with the recorded lines everywhere
    let mut bad_on = None;
    let mut bad_off = None;
    for v in l.vertices() {
        let i = inst.info(v);
        let on = seen.contains_key(&v);
        if on && !i.t && bad_on.is_none() {
            bad_on = Some(v);
        }
        if !on && i != LineInfo::OFF && bad_off.is_none() {
            bad_off = Some(v);
        }
    }
    let c = rep.check("on_line_t_set", bad_on.is_none(), true, bad_on.is_none());
    if let Some(v) = bad_on {
        c.detail(fmt(v));
    }
    let c = rep.check("off_line_info_zero", bad_off.is_none(), true, bad_off.is_none());
    if let Some(v) = bad_off {
        c.detail(fmt(v));
    }

    // chain consistency, including the off-line pointers of line endpoints
    let mut bad_chain = None;
    for line in &inst.lines {
        for (i, &v) in line.iter().enumerate() {
            let iv = inst.info(v);
            let ok = match line.get(i + 1) {
                Some(&w) => l.succ(v, iv.s) == w && l.pred(w, inst.info(w).p) == v,
                None => !inst.info(l.succ(v, iv.s)).t,
            } && (i > 0 || v == zero || !inst.info(l.pred(v, iv.p)).t);
            if !ok && bad_chain.is_none() {
                bad_chain = Some(v);
            }
        }
    }
    let c = rep.check("chain_consistent", bad_chain.is_none(), true, bad_chain.is_none());
    if let Some(v) = bad_chain {
        c.detail(fmt(v));
    }

    let sols = solutions(inst);
    let firsts: Vec<bool> = sols.iter().map(|(v, _)| l.first_bit(*v)).collect();
    let (want_count, want_first) = match inst.kind {
        Kind::Eotl => (1, None),
        Kind::X => (1, Some(true)),
        Kind::Y => (3, Some(true)),
        Kind::Z => (1, Some(false)),
    };
    let count_ok = sols.len() == want_count;
    rep.check("solution_count", sols.len(), want_count, count_ok);
    let first_ok = match want_first {
        None => true,
        Some(b) => firsts.iter().all(|&f| f == b),
    };
    let want_first_v = match want_first {
        Some(b) => serde_json::Value::from(b as u8),
        None => serde_json::Value::Null,
    };
    rep.check(
        "solution_first_bits",
        firsts.iter().map(|&b| b as u8).collect::<Vec<_>>(),
        want_first_v,
        first_ok,
    );

    if inst.kind != Kind::Y {
        let want = (l.n + 1) * ((1usize << l.n) - 1);
        let got = inst.edge_count();
        rep.check("line_length_edges", got, want, got == want);
    }
    rep
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format_version: String,
    pub n: usize,
    pub kind: Kind,
    pub seed: u64,
    pub lines: Vec<Vec<String>>,
}

impl LineInstance {
    pub fn to_file(&self) -> InstanceFile {
        let l = self.layout;
        InstanceFile {
            format_version: crate::FORMAT_VERSION.to_string(),
            n: l.n,
            kind: self.kind,
            seed: self.seed,
            lines: self
                .lines
                .iter()
                .map(|line| line.iter().map(|v| l.packed_word(*v).to_hex()).collect())
                .collect(),
        }
    }

    /// Rebuild from a file; `T/S/P` are recomputed from the lines and the
    /// result must pass validation.
    pub fn from_file(f: &InstanceFile) -> Result<Self> {
        if f.format_version != crate::FORMAT_VERSION {
            return Err(Error::Malformed(format!("format_version {}", f.format_version)));
        }
        let layout = Layout::new(f.n)?;
        let mut lines = Vec::new();
        for line in &f.lines {
            let mut out = Vec::new();
            for h in line {
                let w = BitWord::from_hex(h, layout.kappa())
                    .ok_or_else(|| Error::Malformed(format!("bad vertex id {h}")))?;
                let v = layout
                    .unpack(w.to_u64())
                    .ok_or_else(|| Error::Malformed(format!("bad vertex id {h}")))?;
                out.push(v);
            }
            lines.push(out);
        }
        let inst = LineInstance::from_lines(layout, f.kind, f.seed, lines)?;
        let rep = validate_instance(&inst);
        if let Some(c) = rep.failures().next() {
            return Err(Error::Malformed(format!("loaded instance fails {}", c.name)));
        }
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vx(l: Layout, v1: &str, v2: &str, k: u32) -> Vertex {
        let p = |s: &str| {
            s.chars()
                .enumerate()
                .fold(0u64, |acc, (j, c)| acc | ((c == '1') as u64) << j)
        };
        assert_eq!(v1.len(), l.n);
        Vertex { v1: p(v1), v2: p(v2), k }
    }

    #[test]
    fn neighbor_examples() {
        let l = Layout::new(2).unwrap();
        assert_eq!(l.succ(vx(l, "00", "00", 0), true), vx(l, "00", "10", 1));
        assert_eq!(l.succ(vx(l, "01", "10", 2), false), vx(l, "10", "01", 0));
        assert_eq!(l.succ(vx(l, "01", "10", 2), true), vx(l, "10", "01", 0));
        assert_eq!(l.pred(vx(l, "00", "10", 1), false), vx(l, "00", "00", 0));
    }

    #[test]
    fn neighbor_inverse_exhaustive() {
        for n in 1..=3 {
            let l = Layout::new(n).unwrap();
            for v in l.vertices() {
                for b in [false, true] {
                    let w = l.succ(v, b);
                    let back = l.pred_bit(w, v).expect("predecessor bit exists");
                    assert_eq!(l.pred(w, back), v);
                    let u = l.pred(v, b);
                    let fwd = l.succ_bit(u, v).expect("successor bit exists");
                    assert_eq!(l.succ(u, fwd), v);
                }
            }
        }
    }

    #[test]
    fn in_degree_at_most_two() {
        let l = Layout::new(3).unwrap();
        let mut indeg: HashMap<Vertex, HashSet<Vertex>> = HashMap::new();
        for v in l.vertices() {
            for b in [false, true] {
                indeg.entry(l.succ(v, b)).or_default().insert(v);
            }
        }
        assert!(indeg.values().all(|s| s.len() <= 2));
    }

    #[test]
    fn pack_round_trip() {
        let l = Layout::new(3).unwrap();
        assert_eq!(l.kappa(), 8);
        for v in l.vertices() {
            assert_eq!(l.unpack(l.pack(v)), Some(v));
        }
        assert_eq!(l.unpack(7u64 << 6), None);
    }

    #[test]
    fn n1_eotl_hand_expanded() {
        let inst = gen_instance(Kind::Eotl, 1, 3).unwrap();
        let l = inst.layout;
        assert_eq!(
            inst.lines,
            vec![vec![vx(l, "0", "0", 0), vx(l, "0", "1", 1), vx(l, "1", "0", 0)]]
        );
        let sols = solutions(&inst);
        assert_eq!(sols, vec![(vx(l, "1", "0", 0), Role::End)]);
        let mut o = QueryOracle::new(&inst);
        let i = o.query(l.zero());
        assert!(i.t && i.s);
        assert_eq!(o.query(vx(l, "1", "1", 0)), LineInfo::OFF);
        assert_eq!(o.count(), 2);
    }

    #[test]
    fn z_and_y_unsatisfiable_at_n1() {
        assert!(matches!(
            gen_instance(Kind::Z, 1, 0),
            Err(Error::NoAdmissiblePermutation { .. })
        ));
        assert!(matches!(
            gen_instance(Kind::Y, 1, 0),
            Err(Error::NoAdmissiblePermutation { .. })
        ));
    }

    #[test]
    fn y_hand_expanded() {
        let l = Layout::new(2).unwrap();
        // π = (00, 01, 10, 11) as strings "coordinate 1 first"
        let p = |s: &str| vx(l, s, s, 0).v1;
        let perm = [p("00"), p("01"), p("10"), p("11")];
        let inst = instance_from_permutation(l, Kind::Y, 0, &perm, Some(2)).unwrap();
        assert_eq!(inst.lines.len(), 2);
        let sols = solutions(&inst);
        assert_eq!(sols.len(), 3);
        assert!(sols.iter().all(|(v, _)| l.first_bit(*v)));
        assert!(validate_instance(&inst).passed());
    }

    #[test]
    fn generated_instances_validate() {
        for n in 2..=3 {
            for kind in Kind::ALL {
                for seed in 0..25 {
                    let inst = gen_instance(kind, n, seed).unwrap();
                    let rep = validate_instance(&inst);
                    assert!(rep.passed(), "{kind} n={n} seed={seed}: {:?}", rep.failures().collect::<Vec<_>>());
                }
            }
        }
    }

    #[test]
    fn mutations_are_caught() {
        let inst = gen_instance(Kind::X, 2, 5).unwrap();
        let l = inst.layout;
        let off = l.vertices().find(|v| !inst.info(*v).t).unwrap();
        let mut a = inst.clone();
        a.set_info(off, LineInfo::new(true, false, false));
        assert!(!validate_instance(&a).passed());

        let mut b = inst.clone();
        let start = l.zero();
        let mut i = b.info(start);
        i.s = !i.s;
        b.set_info(start, i);
        let rep = validate_instance(&b);
        assert!(rep.checks.iter().any(|c| c.name == "chain_consistent" && !c.pass));
    }

    #[test]
    fn file_round_trip() {
        let inst = gen_instance(Kind::Y, 3, 11).unwrap();
        let f = inst.to_file();
        let text = serde_json::to_string(&f).unwrap();
        let back = LineInstance::from_file(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.lines, inst.lines);
        for v in l_vertices(&inst) {
            assert_eq!(back.info(v), inst.info(v));
        }
    }

    fn l_vertices(inst: &LineInstance) -> Vec<Vertex> {
        inst.layout.vertices().collect()
    }
}
