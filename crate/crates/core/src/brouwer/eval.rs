//! Evaluation of `ĝ`, truncation, and the two evaluation routes: the global
//! route over every piece of the field, and the local route that sees only
//! pieces derivable from the two decoded vertices and their line information.

use serde::Serialize;

use super::geom::dist;
use super::{BrouwerField, PieceKey, PieceSet};
use crate::codec::{decode_point_id, Tuple};
use crate::lineworld::{LineInfo, Vertex};
use crate::{Error, Result};

/// Rule that produced `ĝ(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Outside,
    Junction(PieceKey),
    Interior(PieceKey),
    Window(PieceKey),
    /// Decoded vertices agree but their line information does not.
    Inconsistent,
    Default,
}

fn check_cube(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    match x.iter().position(|v| !(-1.0..=2.0).contains(v)) {
        Some(index) => Err(Error::OutOfRange {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

/// `[g(x)]ᵢ = clamp(xᵢ + ĝᵢ, −1, 2) − xᵢ`, returned as `f(x)`.
fn truncate(x: &[f64], g: &[f64]) -> Vec<f64> {
    x.iter().zip(g).map(|(a, b)| (a + b).clamp(-1.0, 2.0)).collect()
}

impl BrouwerField {
    /// Mean of the last `m`-tuple; the picture is `θ < 1/2`.
    pub fn theta(&self, x: &[f64]) -> f64 {
        let m = self.m;
        x[3 * m..].iter().sum::<f64>() / m as f64
    }

    /// Above the picture: blend the descent rule at `θ = 1/2` with a field
    /// at the top face that points down on the axis and toward it elsewhere.
    pub fn outside_hat(&self, x: &[f64]) -> Vec<f64> {
        let sc = &self.scales;
        let (h, d) = (sc.h, sc.delta);
        let theta = self.theta(x);
        let lambda = ((theta - 0.5) / 1.5).clamp(0.0, 1.0);
        let sg = self.descent.sigma(x);
        let z = self.descent.closest(sg);
        let rho = dist(x, &z);
        let bottom = sc.radial(x, &z, rho, &self.descent.u);
        let dim = x.len();
        let mut g = vec![0.0; dim];
        for i in 0..dim {
            let e = if i >= sc.e_from { d } else { 0.0 };
            let top = if rho <= h {
                let t = rho / h;
                -(1.0 - t) * e + t * d * (z[i] - x[i]) / h
            } else {
                d * (z[i] - x[i]) / rho
            };
            g[i] = (1.0 - lambda) * bottom[i] + lambda * top;
        }
        g
    }

    /// `ĝ` inside the picture from a piece set, with the rule that fired.
    pub fn inside_hat(&self, pieces: &PieceSet, x: &[f64]) -> (Region, Vec<f64>) {
        let sc = &self.scales;
        for (k, j) in &pieces.junctions {
            if let Some(g) = j.eval(sc, x) {
                return (Region::Junction(*k), g);
            }
        }
        for (k, s) in &pieces.segments {
            if let Some(g) = s.interior(sc, x) {
                return (Region::Interior(*k), g);
            }
        }
        for (k, s) in &pieces.segments {
            if let Some(g) = s.window(sc, x) {
                return (Region::Window(*k), g);
            }
        }
        (Region::Default, sc.default_disp(x.len()))
    }

    /// Untruncated displacement by the global route.
    pub fn g_hat(&self, x: &[f64]) -> (Region, Vec<f64>) {
        if self.theta(x) >= 0.5 {
            return (Region::Outside, self.outside_hat(x));
        }
        self.inside_hat(&self.pieces, x)
    }

    pub fn eval_f(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_cube(x, self.dim())?;
        Ok(truncate(x, &self.g_hat(x).1))
    }

    /// `g(x) = f(x) − x`, unchecked; for internal search loops.
    pub fn displacement(&self, x: &[f64]) -> Vec<f64> {
        let f = truncate(x, &self.g_hat(x).1);
        f.iter().zip(x).map(|(a, b)| a - b).collect()
    }

    /// Vertices named by the two decoders; ids with an invalid layer are `None`.
    pub fn decoded_pair(&self, x: &[f64]) -> (Option<Vertex>, Option<Vertex>) {
        let l = self.layout();
        let a = l.unpack(decode_point_id(x, Tuple::First, &self.code).0);
        let b = l.unpack(decode_point_id(x, Tuple::Second, &self.code).0);
        (a, b)
    }

    /// Untruncated displacement of `f_{I1,I2}`.
    pub fn g_hat_local(&self, i1: LineInfo, i2: LineInfo, x: &[f64]) -> (Region, Vec<f64>) {
        if self.theta(x) >= 0.5 {
            return (Region::Outside, self.outside_hat(x));
        }
        let (a, b) = self.decoded_pair(x);
        self.g_hat_local_decoded(a, i1, b, i2, x)
    }

    /// As [`Self::g_hat_local`] with the decoded vertices supplied.
    pub fn g_hat_local_decoded(
        &self,
        a: Option<Vertex>,
        i1: LineInfo,
        b: Option<Vertex>,
        i2: LineInfo,
        x: &[f64],
    ) -> (Region, Vec<f64>) {
        if self.theta(x) >= 0.5 {
            return (Region::Outside, self.outside_hat(x));
        }
        if a.is_some() && a == b && i1 != i2 {
            return (Region::Inconsistent, self.scales.default_disp(x.len()));
        }
        let pieces = self.local_pieces(a, i1, b, i2);
        self.inside_hat(&pieces, x)
    }

    pub fn eval_f_local(&self, i1: LineInfo, i2: LineInfo, x: &[f64]) -> Result<Vec<f64>> {
        check_cube(x, self.dim())?;
        Ok(truncate(x, &self.g_hat_local(i1, i2, x).1))
    }

    /// The local route fed with the true line information of both decoded vertices.
    pub fn eval_f_local_true(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_cube(x, self.dim())?;
        let (a, b) = self.decoded_pair(x);
        let info = |v: Option<Vertex>| v.map(|v| self.instance.info(v)).unwrap_or(LineInfo::OFF);
        Ok(truncate(x, &self.g_hat_local_decoded(a, info(a), b, info(b), x).1))
    }
}
