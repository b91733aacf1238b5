//! Binary codes, grid quantization of `[-1, 2]`, and the point decoders that
//! recover vertex ids from the first or second `m`-tuple of a point.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitWord;
use crate::{Error, Result};

/// Largest message length accepted; decoding enumerates all `2^kappa` codewords.
pub const MAX_KAPPA: usize = 16;
pub const MAX_BLOCK: usize = 4096;
pub const DEFAULT_REL_DIST: f64 = 0.3;
const ATTEMPTS_PER_LENGTH: usize = 64;

/// A linear code given by `kappa` generator rows of length `m`.
///
/// Codeword of message `u` is the XOR of the rows selected by the bits of
/// `u`; the full codebook is materialised at construction.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryCode {
    kappa: usize,
    m: usize,
    generator: Vec<BitWord>,
    codebook: Vec<BitWord>,
    d_min: usize,
}

impl std::fmt::Debug for BinaryCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BinaryCode")
            .field("kappa", &self.kappa)
            .field("m", &self.m)
            .field("d_min", &self.d_min)
            .finish()
    }
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Minimum nonzero codeword weight; `0` if two messages collide.
fn min_weight(codebook: &[BitWord]) -> usize {
    codebook
        .iter()
        .skip(1)
        .map(BitWord::weight)
        .min()
        .unwrap_or(0)
}

fn expand(kappa: usize, m: usize, generator: &[BitWord]) -> Vec<BitWord> {
    let mut book = Vec::with_capacity(1 << kappa);
    book.push(BitWord::zeros(m));
    for i in 0..kappa {
        let half = book.len();
        for j in 0..half {
            let mut w = book[j].clone();
            w.xor_assign(&generator[i]);
            book.push(w);
        }
    }
    book
}

impl BinaryCode {
    /// Exhaustively verified code from explicit generator rows.
    pub fn from_generator(generator: Vec<BitWord>) -> Result<Self> {
        let kappa = generator.len();
        if kappa == 0 || kappa > MAX_KAPPA {
            return Err(Error::InvalidParameter(format!("kappa = {kappa} outside 1..={MAX_KAPPA}")));
        }
        let m = generator[0].len();
        if generator.iter().any(|r| r.len() != m) {
            return Err(Error::Malformed("generator rows differ in length".into()));
        }
        let codebook = expand(kappa, m, &generator);
        let d_min = min_weight(&codebook);
        Ok(BinaryCode {
            kappa,
            m,
            generator,
            codebook,
            d_min,
        })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d_min(&self) -> usize {
        self.d_min
    }

    pub fn rel_dist(&self) -> f64 {
        self.d_min as f64 / self.m as f64
    }

    pub fn generator(&self) -> &[BitWord] {
        &self.generator
    }

    pub fn codeword(&self, msg: u64) -> &BitWord {
        &self.codebook[msg as usize]
    }

    pub fn codebook(&self) -> &[BitWord] {
        &self.codebook
    }

    pub fn encode(&self, msg: &BitWord) -> Result<BitWord> {
        if msg.len() != self.kappa {
            return Err(Error::LengthMismatch {
                expected: self.kappa,
                got: msg.len(),
            });
        }
        Ok(self.codebook[msg.to_u64() as usize].clone())
    }

    /// Nearest codeword; ties go to the smallest message value.
    pub fn decode(&self, word: &BitWord) -> (BitWord, usize) {
        let (msg, dist) = self.decode_u64(word);
        (BitWord::from_u64(msg, self.kappa), dist)
    }

    pub fn decode_u64(&self, word: &BitWord) -> (u64, usize) {
        debug_assert_eq!(word.len(), self.m);
        let mut best = (0u64, usize::MAX);
        for (u, c) in self.codebook.iter().enumerate() {
            let d = c.hamming(word);
            if d < best.1 {
                best = (u as u64, d);
            }
        }
        best
    }

    pub fn to_file(&self) -> CodeFile {
        CodeFile {
            format_version: crate::FORMAT_VERSION.to_string(),
            kappa: self.kappa,
            m: self.m,
            d_min: self.d_min,
            generator: self.generator.iter().map(BitWord::to_hex).collect(),
        }
    }

    /// Load a serialized code; the recorded `d_min` is re-verified.
    pub fn from_file(f: &CodeFile) -> Result<Self> {
        let rows = f
            .generator
            .iter()
            .map(|h| BitWord::from_hex(h, f.m).ok_or_else(|| Error::Malformed(format!("bad row {h}"))))
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != f.kappa {
            return Err(Error::LengthMismatch {
                expected: f.kappa,
                got: rows.len(),
            });
        }
        let code = BinaryCode::from_generator(rows)?;
        if code.d_min != f.d_min {
            return Err(Error::Malformed(format!(
                "recorded d_min {} but verified {}",
                f.d_min, code.d_min
            )));
        }
        Ok(code)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFile {
    pub format_version: String,
    pub kappa: usize,
    pub m: usize,
    pub d_min: usize,
    pub generator: Vec<String>,
}

fn random_generator<R: Rng>(kappa: usize, m: usize, rng: &mut R) -> Vec<BitWord> {
    (0..kappa)
        .map(|_| {
            let mut w = BitWord::zeros(m);
            for j in 0..m {
                w.set(j, rng.gen());
            }
            w
        })
        .collect()
}

fn try_length<R: Rng>(kappa: usize, m: usize, target: f64, rng: &mut R) -> Option<BinaryCode> {
    let need = (target * m as f64 - 1e-9).ceil().max(1.0) as usize;
    for _ in 0..ATTEMPTS_PER_LENGTH {
        let g = random_generator(kappa, m, rng);
        let book = expand(kappa, m, &g);
        if min_weight(&book) >= need {
            return BinaryCode::from_generator(g).ok();
        }
    }
    None
}

/// Random linear code with `rel_dist ≥ target`; the block length starts
/// near the Gilbert–Varshamov length and grows by a quarter until success.
pub fn build_code(kappa: usize, target: f64, seed: u64) -> Result<BinaryCode> {
    if kappa == 0 || kappa > MAX_KAPPA || !(0.0..=1.0).contains(&target) {
        return Err(Error::InvalidParameter(format!(
            "build_code(kappa = {kappa}, target = {target})"
        )));
    }
    let mut rng = crate::seed::rng(seed, &format!("codec/{kappa}"));
    let rate = 1.0 - binary_entropy(target);
    let mut m = if rate < 0.05 {
        kappa
    } else {
        kappa.max((kappa as f64 / rate).ceil() as usize)
    };
    while m <= MAX_BLOCK {
        if let Some(c) = try_length(kappa, m, target, &mut rng) {
            return Ok(c);
        }
        m = (m + 1).max((m as f64 * 1.25).ceil() as usize);
    }
    Err(Error::ConstructionFailed { kappa, target })
}

/// Random linear code of exactly block length `m` with `rel_dist ≥ target`.
pub fn build_code_with_length(kappa: usize, m: usize, target: f64, seed: u64) -> Result<BinaryCode> {
    if kappa == 0 || kappa > MAX_KAPPA || m < kappa {
        return Err(Error::InvalidParameter(format!(
            "build_code_with_length(kappa = {kappa}, m = {m})"
        )));
    }
    let mut rng = crate::seed::rng(seed, &format!("codec/{kappa}/{m}"));
    try_length(kappa, m, target, &mut rng).ok_or(Error::ConstructionFailed { kappa, target })
}

/// Uniform grid on `[-1, 2]` with `steps = 3/eps` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    steps: u64,
}

impl GridSpec {
    pub fn from_steps(steps: u64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("grid needs at least one step".into()));
        }
        Ok(GridSpec { steps })
    }

    /// `eps` must divide 3 up to floating tolerance.
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 3.0) {
            return Err(Error::InvalidParameter(format!("eps = {eps}")));
        }
        let q = 3.0 / eps;
        let steps = q.round();
        if (q - steps).abs() > 1e-6 * q.max(1.0) {
            return Err(Error::InvalidParameter(format!("3/eps = {q} is not an integer")));
        }
        GridSpec::from_steps(steps as u64)
    }

    pub fn eps(&self) -> f64 {
        3.0 / self.steps as f64
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, index: u64) -> f64 {
        if index >= self.steps {
            return 2.0;
        }
        -1.0 + 3.0 * index as f64 / self.steps as f64
    }

    /// Nearest grid index; exact half-way ties go toward −1.
    pub fn round_index(&self, x: f64) -> u64 {
        let t = (x + 1.0) * self.steps as f64 / 3.0 - 0.5;
        (t.ceil().max(0.0) as u64).min(self.steps)
    }

    pub fn round_value(&self, x: f64) -> f64 {
        self.value(self.round_index(x))
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|k| self.value(k))
    }
}

pub fn round_eps(x: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    x.iter()
        .enumerate()
        .map(|(index, &value)| {
            if (-1.0..=2.0).contains(&value) {
                Ok(grid.round_value(value))
            } else {
                Err(Error::OutOfRange { index, value })
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tuple {
    First,
    Second,
}

/// Threshold one `m`-tuple of a point to bits (`> 1/2` is one).
pub fn round_tuple(x: &[f64], which: Tuple, m: usize) -> BitWord {
    let off = match which {
        Tuple::First => 0,
        Tuple::Second => m,
    };
    let mut w = BitWord::zeros(m);
    for j in 0..m {
        w.set(j, x[off + j] > 0.5);
    }
    w
}

/// `D_v` (first tuple) or `D_w` (second tuple): round then nearest-codeword decode.
pub fn decode_point_tuple(x: &[f64], which: Tuple, code: &BinaryCode) -> (BitWord, usize) {
    assert!(x.len() >= 2 * code.m(), "point shorter than two tuples");
    code.decode(&round_tuple(x, which, code.m()))
}

pub fn decode_point_id(x: &[f64], which: Tuple, code: &BinaryCode) -> (u64, usize) {
    code.decode_u64(&round_tuple(x, which, code.m()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairwise_min(code: &BinaryCode) -> usize {
        let b = code.codebook();
        let mut best = usize::MAX;
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                best = best.min(b[i].hamming(&b[j]));
            }
        }
        best
    }

    #[test]
    fn kappa3_half_distance() {
        let c = build_code(3, 0.5, 1).unwrap();
        assert!(c.rel_dist() >= 0.5);
        assert_eq!(pairwise_min(&c), c.d_min());
    }

    #[test]
    fn hadamard_type_code_exists() {
        // rows of the [8,3,4] first-order Reed–Muller code
        let rows = ["0f", "33", "55"]
            .iter()
            .map(|h| BitWord::from_hex(h, 8).unwrap())
            .collect();
        let c = BinaryCode::from_generator(rows).unwrap();
        assert_eq!(c.d_min(), 4);
        assert_eq!(pairwise_min(&c), 4);
    }

    #[test]
    fn kappa1_full_distance_is_repetition() {
        let c = build_code(1, 1.0, 9).unwrap();
        assert_eq!(c.d_min(), c.m());
        let a = c.codeword(0);
        let b = c.codeword(1);
        assert_eq!(a.hamming(b), c.m());
    }

    #[test]
    fn deterministic() {
        assert_eq!(build_code(6, 0.3, 4).unwrap(), build_code(6, 0.3, 4).unwrap());
    }

    #[test]
    fn distances_match_pairwise_oracle() {
        for kappa in 1..=6 {
            let c = build_code(kappa, DEFAULT_REL_DIST, kappa as u64).unwrap();
            assert_eq!(pairwise_min(&c), c.d_min(), "kappa {kappa}");
            assert!(c.rel_dist() >= DEFAULT_REL_DIST);
        }
    }

    #[test]
    fn decode_corrects_all_small_errors() {
        let c = build_code(4, 0.3, 2).unwrap();
        let t = (c.d_min() - 1) / 2;
        for u in 0..16u64 {
            let w = c.codeword(u).clone();
            assert_eq!(c.decode_u64(&w), (u, 0));
            for i in 0..c.m() {
                let mut a = w.clone();
                a.flip(i);
                if t >= 1 {
                    assert_eq!(c.decode_u64(&a), (u, 1));
                }
                for j in i + 1..c.m() {
                    if t >= 2 {
                        let mut b = a.clone();
                        b.flip(j);
                        assert_eq!(c.decode_u64(&b), (u, 2));
                    }
                }
            }
        }
    }

    #[test]
    fn decode_tie_prefers_smaller_message() {
        let rows = vec![BitWord::from_u64(0b11, 2)];
        let c = BinaryCode::from_generator(rows).unwrap();
        assert_eq!(c.decode_u64(&BitWord::from_u64(0b01, 2)), (0, 1));
        assert_eq!(c.decode_u64(&BitWord::from_u64(0b10, 2)), (0, 1));
    }

    #[test]
    fn encode_length_checked() {
        let c = build_code(3, 0.3, 0).unwrap();
        assert!(matches!(
            c.encode(&BitWord::zeros(4)),
            Err(Error::LengthMismatch { expected: 3, got: 4 })
        ));
    }

    #[test]
    fn rounding_examples() {
        let g = GridSpec::new(0.25).unwrap();
        assert_eq!(g.len(), 13);
        assert_eq!(g.round_value(0.13), 0.25);
        assert_eq!(g.round_value(0.125), 0.0);
        assert_eq!(g.round_value(2.0), 2.0);
        assert_eq!(g.round_value(-1.0), -1.0);
        assert!(round_eps(&[2.1], &g).is_err());
        assert!(GridSpec::new(0.7).is_err());
    }

    #[test]
    fn point_decoding() {
        let c = build_code(6, 0.3, 5).unwrap();
        let m = c.m();
        let mut x = vec![0.0; 4 * m];
        for (j, b) in c.codeword(37).iter().enumerate() {
            x[j] = b as u8 as f64;
        }
        assert_eq!(decode_point_id(&x, Tuple::First, &c), (37, 0));
        x[3] = if x[3] > 0.5 { 0.8 } else { 0.2 };
        assert_eq!(decode_point_id(&x, Tuple::First, &c), (37, 0));
        // all-half rounds to the zero word, which is codeword 0
        let half = vec![0.5; 4 * m];
        assert_eq!(decode_point_id(&half, Tuple::Second, &c), (0, 0));
    }

    #[test]
    fn code_file_round_trip() {
        let c = build_code(5, 0.3, 3).unwrap();
        let f = c.to_file();
        assert_eq!(BinaryCode::from_file(&f).unwrap(), c);
        let mut bad = f.clone();
        bad.d_min += 1;
        assert!(BinaryCode::from_file(&bad).is_err());
    }
}
