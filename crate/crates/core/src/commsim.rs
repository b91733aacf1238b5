//! Two-party split of a line instance and a protocol runner with exact bit
//! accounting.
//!
//! Alice holds, for every vertex, three `M`-bit vectors `α^T_v, α^S_v, α^P_v`;
//! Bob holds three indices `β^T_v, β^S_v, β^P_v ∈ [M]`. The line information
//! is recovered only jointly: `T(v) = α^T_v[β^T_v]` and likewise for `S`, `P`.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::bits::BitWord;
use crate::brouwer::{BrouwerField, Region};
use crate::lineworld::{Layout, LineInfo, LineInstance, Vertex};
use crate::report::Report;
use crate::{Error, Result};

pub const DEFAULT_M: usize = 16;

/// Bits needed to send one index in `[M]`.
pub fn index_bits(m: usize) -> usize {
    let mut b = 0;
    while (1usize << b) < m {
        b += 1;
    }
    b
}

/// Alice's half: the `α` vectors of every packed id.
#[derive(Debug)]
pub struct AliceSide {
    m: usize,
    alpha: Vec<[BitWord; 3]>,
    reads: AtomicU64,
}

/// Bob's half: the `β` triples of every packed id.
#[derive(Debug)]
pub struct BobSide {
    m: usize,
    beta: Vec<[u32; 3]>,
    reads: AtomicU64,
}

impl Clone for AliceSide {
    fn clone(&self) -> Self {
        AliceSide {
            m: self.m,
            alpha: self.alpha.clone(),
            reads: AtomicU64::new(0),
        }
    }
}

impl Clone for BobSide {
    fn clone(&self) -> Self {
        BobSide {
            m: self.m,
            beta: self.beta.clone(),
            reads: AtomicU64::new(0),
        }
    }
}

impl AliceSide {
    pub fn index_space(&self) -> usize {
        self.m
    }

    /// `(α^T_v[β^T], α^S_v[β^S], α^P_v[β^P])`; `None` for an unknown id or
    /// an index outside `[M]`.
    pub fn decompose(&self, v: u64, beta: [u32; 3]) -> Option<LineInfo> {
        self.reads.fetch_add(1, Ordering::Relaxed);
        let a = self.alpha.get(v as usize)?;
        if beta.iter().any(|&b| b as usize >= self.m) {
            return None;
        }
        Some(LineInfo::new(
            a[0].get(beta[0] as usize),
            a[1].get(beta[1] as usize),
            a[2].get(beta[2] as usize),
        ))
    }

    /// Overwrite one α bit; used for side-channel and adversarial tests.
    pub fn set_alpha(&mut self, v: u64, component: usize, pos: usize, bit: bool) {
        self.alpha[v as usize][component].set(pos, bit);
    }

    pub fn reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }
}

impl BobSide {
    pub fn index_space(&self) -> usize {
        self.m
    }

    pub fn beta(&self, v: u64) -> [u32; 3] {
        self.reads.fetch_add(1, Ordering::Relaxed);
        self.beta[v as usize]
    }

    pub fn reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone)]
pub struct SimEoalInput {
    pub layout: Layout,
    pub alice: AliceSide,
    pub bob: BobSide,
}

impl SimEoalInput {
    pub fn index_space(&self) -> usize {
        self.alice.m
    }

    /// Packed ids whose recombined information disagrees with `instance`.
    pub fn inconsistencies(&self, instance: &LineInstance) -> Vec<u64> {
        (0..self.alice.alpha.len() as u64)
            .filter(|&id| {
                let want = instance.info_by_id(id);
                self.alice.decompose(id, self.bob.beta(id)) != Some(want)
            })
            .collect()
    }
}

/// Split with uniformly random filler in the unused α positions.
pub fn split_instance(instance: &LineInstance, m: usize, seed: u64) -> Result<SimEoalInput> {
    let mut rng = crate::seed::rng(seed, "commsim/filler");
    split_instance_with(instance, m, seed, |_, _, _| rng.gen())
}

/// Split with a caller-chosen filler `(packed id, component, position) → bit`
/// for every α position other than the one Bob's index selects.
pub fn split_instance_with<F>(instance: &LineInstance, m: usize, seed: u64, mut filler: F) -> Result<SimEoalInput>
where
    F: FnMut(u64, usize, usize) -> bool,
{
    if m < 2 {
        return Err(Error::InvalidParameter(format!("M = {m} must be at least 2")));
    }
    let layout = instance.layout;
    let ids = 1u64 << layout.kappa();
    let mut rng = crate::seed::rng(seed, "commsim/beta");
    let mut alpha = Vec::with_capacity(ids as usize);
    let mut beta = Vec::with_capacity(ids as usize);
    for id in 0..ids {
        let info = instance.info_by_id(id);
        let truth = [info.t, info.s, info.p];
        let b: [u32; 3] = std::array::from_fn(|_| rng.gen_range(0..m as u32));
        let a: [BitWord; 3] = std::array::from_fn(|c| {
            let mut w = BitWord::zeros(m);
            for pos in 0..m {
                let bit = if pos == b[c] as usize { truth[c] } else { filler(id, c, pos) };
                w.set(pos, bit);
            }
            w
        });
        alpha.push(a);
        beta.push(b);
    }
    let sim = SimEoalInput {
        layout,
        alice: AliceSide {
            m,
            alpha,
            reads: AtomicU64::new(0),
        },
        bob: BobSide {
            m,
            beta,
            reads: AtomicU64::new(0),
        },
    };
    if let Some(id) = sim.inconsistencies(instance).first() {
        return Err(Error::Malformed(format!("split disagrees with the instance at id {id}")));
    }
    sim.alice.reads.store(0, Ordering::Relaxed);
    sim.bob.reads.store(0, Ordering::Relaxed);
    Ok(sim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Transcript {
    pub bits: Vec<(Party, bool)>,
}

impl Transcript {
    pub fn total_bits(&self) -> usize {
        self.bits.len()
    }

    fn send(&mut self, from: Party, value: u64, width: usize) {
        for i in 0..width {
            self.bits.push((from, value >> i & 1 == 1));
        }
    }

    /// Read `width` bits starting at `*at`, least significant first.
    fn read(&self, at: &mut usize, width: usize) -> u64 {
        let mut v = 0;
        for i in 0..width {
            if self.bits[*at + i].1 {
                v |= 1 << i;
            }
        }
        *at += width;
        v
    }

    /// Sender-tagged bit string, `A`/`B` followed by the bit.
    pub fn dump(&self) -> String {
        self.bits
            .iter()
            .map(|(p, b)| {
                let t = if *p == Party::Alice { 'a' } else { 'b' };
                if *b {
                    t.to_ascii_uppercase()
                } else {
                    t
                }
            })
            .collect()
    }
}

fn send_info(t: &mut Transcript, i: LineInfo) {
    t.send(Party::Alice, i.code() as u64, 3);
}

fn send_beta(t: &mut Transcript, beta: [u32; 3], width: usize) {
    for b in beta {
        t.send(Party::Bob, b as u64, width);
    }
}

/// Which of `I1`, `I2` the local evaluation at `x` actually depends on,
/// found by evaluating all 64 combinations.
pub fn dependence(public: &BrouwerField, a: Option<Vertex>, b: Option<Vertex>, x: &[f64]) -> (bool, bool) {
    let eval = |i1: u8, i2: u8| {
        public
            .g_hat_local_decoded(a, LineInfo::from_code(i1), b, LineInfo::from_code(i2), x)
            .1
    };
    let table: Vec<Vec<Vec<f64>>> = (0..8).map(|i1| (0..8).map(|i2| eval(i1, i2)).collect()).collect();
    let same = |p: &Vec<f64>, q: &Vec<f64>| p.iter().zip(q).all(|(u, v)| u.to_bits() == v.to_bits());
    let dep1 = (0..8).any(|i2| (1..8).any(|i1| !same(&table[i1][i2], &table[0][i2])));
    let dep2 = (0..8).any(|i1| (1..8).any(|i2| !same(&table[i1][i2], &table[i1][0])));
    (dep1, dep2)
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalfOutcome {
    pub alice_output: Vec<f64>,
    pub bob_output: Vec<f64>,
    pub header: (bool, bool),
    pub region: Region,
}

/// Local evaluation of `f` at a public point.
///
/// Bob sends a two-bit header naming which decoded vertices matter, then the
/// β triple of each; Alice answers with the three recombined bits of each.
/// Both parties then evaluate `f_{I1,I2}(x)` on the public geometry.
pub fn run_evalf(public: &BrouwerField, input: &SimEoalInput, x: &[f64]) -> Result<(EvalfOutcome, Transcript)> {
    if x.len() != public.dim() {
        return Err(Error::LengthMismatch {
            expected: public.dim(),
            got: x.len(),
        });
    }
    if let Some(index) = x.iter().position(|v| !(-1.0..=2.0).contains(v)) {
        return Err(Error::OutOfRange { index, value: x[index] });
    }
    let width = index_bits(input.index_space());
    let l = input.layout;
    let mut t = Transcript::default();

    // Bob: header and indices
    let (a, b) = public.decoded_pair(x);
    let header = if public.theta(x) >= 0.5 {
        (false, false)
    } else {
        dependence(public, a, b, x)
    };
    t.send(Party::Bob, header.0 as u64 | (header.1 as u64) << 1, 2);
    let needed: Vec<Vertex> = [(header.0, a), (header.1, b)]
        .into_iter()
        .filter_map(|(need, v)| if need { v } else { None })
        .collect();
    for v in &needed {
        send_beta(&mut t, input.bob.beta(l.pack(*v)), width);
    }

    // Alice: reads the header and indices from the transcript only
    let mut at = 0;
    let h = t.read(&mut at, 2);
    let (ha, hb) = public.decoded_pair(x);
    let alice_needed: Vec<Vertex> = [(h & 1 == 1, ha), (h & 2 == 2, hb)]
        .into_iter()
        .filter_map(|(need, v)| if need { v } else { None })
        .collect();
    let mut replies = Vec::new();
    for v in &alice_needed {
        let beta = [0; 3].map(|_| t.read(&mut at, width) as u32);
        let info = input.alice.decompose(l.pack(*v), beta).unwrap_or(LineInfo::OFF);
        replies.push(info);
    }
    for i in &replies {
        send_info(&mut t, *i);
    }

    // both: recover (I1, I2) from the transcript and evaluate
    let mut at2 = at;
    let mut infos = [LineInfo::OFF; 2];
    for (slot, need) in [(0, h & 1 == 1), (1, h & 2 == 2)] {
        if need && [ha, hb][slot].is_some() {
            infos[slot] = LineInfo::from_code(t.read(&mut at2, 3) as u8);
        }
    }
    let out = |x: &[f64]| -> (Region, Vec<f64>) {
        let (region, g) = public.g_hat_local_decoded(ha, infos[0], hb, infos[1], x);
        let f = x.iter().zip(&g).map(|(p, q)| (p + q).clamp(-1.0, 2.0)).collect();
        (region, f)
    };
    let (region, alice_output) = out(x);
    let (_, bob_output) = out(x);
    Ok((
        EvalfOutcome {
            alice_output,
            bob_output,
            header,
            region,
        },
        t,
    ))
}

pub fn evalf_bit_bound(m: usize) -> usize {
    2 + 6 * index_bits(m) + 6
}

#[derive(Debug, Clone, Serialize)]
pub struct LinewalkOutcome {
    /// First bit of the last on-line vertex reached.
    pub answer: bool,
    pub end: Vertex,
    pub visited: usize,
}

/// Walk the line from the zero vertex, one vertex per round: Bob sends the
/// vertex's β triple, Alice answers its three bits. Stops at the first
/// vertex with `T = 0`, which is counted as visited.
pub fn run_linewalk(input: &SimEoalInput) -> Result<(LinewalkOutcome, Transcript)> {
    let l = input.layout;
    let width = index_bits(input.index_space());
    let mut t = Transcript::default();
    let mut v = l.zero();
    let mut last_on = None;
    let limit = l.vertex_count() + 1;
    let mut visited = 0;
    let mut at = 0;
    while visited < limit {
        visited += 1;
        send_beta(&mut t, input.bob.beta(l.pack(v)), width);
        let beta = [0; 3].map(|_| t.read(&mut at, width) as u32);
        let info = input.alice.decompose(l.pack(v), beta).unwrap_or(LineInfo::OFF);
        send_info(&mut t, info);
        let info = LineInfo::from_code(t.read(&mut at, 3) as u8);
        if !info.t {
            break;
        }
        last_on = Some(v);
        v = l.succ(v, info.s);
    }
    let end = last_on.ok_or_else(|| Error::Malformed("zero vertex is off every line".into()))?;
    Ok((
        LinewalkOutcome {
            answer: l.first_bit(end),
            end,
            visited,
        },
        t,
    ))
}

pub fn transcript_report(name: &str, t: &Transcript, bound: Option<usize>) -> Report {
    let mut rep = Report::new(name.to_string());
    let n = t.total_bits();
    match bound {
        Some(b) => {
            rep.check("total_bits", n, b, n <= b);
        }
        None => {
            rep.check("total_bits", n, json!(null), true);
        }
    }
    rep.data = Some(json!({ "transcript": t.dump() }));
    rep
}
