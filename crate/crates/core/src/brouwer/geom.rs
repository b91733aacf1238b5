//! Vector primitives under the normalized inner product `⟨a,b⟩ = (1/D)Σ aᵢbᵢ`
//! and the two displacement templates: straight segments and corner junctions.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s / a.len() as f64
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += (x - y) * (x - y);
    }
    (s / a.len() as f64).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + c·b`
pub fn axpy(a: &[f64], c: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

/// `σ_{(s→·)}(x) = u · (x − s)` for a unit direction `u`.
fn sigma(u: &[f64], s: &[f64], x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((ui, si), xi) in u.iter().zip(s).zip(x) {
        acc += ui * (xi - si);
    }
    acc / u.len() as f64
}

/// Shape constants shared by every piece.
#[derive(Debug, Clone, Copy)]
pub struct Scales {
    pub h: f64,
    pub delta: f64,
    pub sqrt_h: f64,
    /// Start of the default direction `e = (0_{3m}, 1_m)`.
    pub e_from: usize,
}

impl Scales {
    pub fn new(h: f64, delta: f64, m: usize) -> Self {
        Scales {
            h,
            delta,
            sqrt_h: h.sqrt(),
            e_from: 3 * m,
        }
    }

    pub fn default_disp(&self, dim: usize) -> Vec<f64> {
        let mut g = vec![0.0; dim];
        for v in &mut g[self.e_from..] {
            *v = self.delta;
        }
        g
    }

    /// Radial template with knots `0, h, 2h, 3h`: along `dir`, toward `z`,
    /// against `dir`, then default.
    pub fn radial(&self, x: &[f64], z: &[f64], r: f64, dir: &[f64]) -> Vec<f64> {
        let (h, d) = (self.h, self.delta);
        let dim = x.len();
        let mut g = vec![0.0; dim];
        if r <= h {
            let t = r / h;
            for i in 0..dim {
                g[i] = (1.0 - t) * d * dir[i] + t * d * (z[i] - x[i]) / h;
            }
        } else if r <= 2.0 * h {
            let t = (r - h) / h;
            for i in 0..dim {
                g[i] = (1.0 - t) * d * (z[i] - x[i]) / h - t * d * dir[i];
            }
        } else if r < 3.0 * h {
            let t = (r - 2.0 * h) / h;
            for i in 0..dim {
                let e = if i >= self.e_from { d } else { 0.0 };
                g[i] = -(1.0 - t) * d * dir[i] + t * e;
            }
        } else {
            g = self.default_disp(dim);
        }
        g
    }

    /// `(1−λ)·g + λ·δe`
    pub fn blend_default(&self, g: &mut [f64], lambda: f64) {
        for (i, v) in g.iter_mut().enumerate() {
            let e = if i >= self.e_from { self.delta } else { 0.0 };
            *v = (1.0 - lambda) * *v + lambda * e;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// No displacement from this piece past the cut point.
    Open,
    /// σ-blend to the default over the last (or first) `√h` of arc.
    Terminal,
}

/// A Brouwer line segment `s → t`.
#[derive(Debug, Clone)]
pub struct Segment {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub len: f64,
    pub start: Window,
    pub end: Window,
}

/// Which sub-rule of a segment produced a displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegHit {
    Interior,
    Window,
}

impl Segment {
    pub fn new(s: Vec<f64>, t: Vec<f64>, start: Window, end: Window) -> Self {
        let d = sub(&t, &s);
        let len = norm(&d);
        let u = scale(&d, 1.0 / len);
        Segment {
            s,
            t,
            u,
            len,
            start,
            end,
        }
    }

    pub fn sigma(&self, x: &[f64]) -> f64 {
        sigma(&self.u, &self.s, x)
    }

    pub fn closest(&self, sigma: f64) -> Vec<f64> {
        axpy(&self.s, sigma, &self.u)
    }

    /// Point at arc distance `√h` from the start and from the end.
    pub fn cut_points(&self, sc: &Scales) -> (Vec<f64>, Vec<f64>) {
        (self.closest(sc.sqrt_h), self.closest(self.len - sc.sqrt_h))
    }

    /// Displacement if `x` lies in this segment's interior tube.
    pub fn interior(&self, sc: &Scales, x: &[f64]) -> Option<Vec<f64>> {
        let sg = self.sigma(x);
        if sg < sc.sqrt_h || sg > self.len - sc.sqrt_h {
            return None;
        }
        let z = self.closest(sg);
        let r = dist(x, &z);
        (r < 3.0 * sc.h).then(|| sc.radial(x, &z, r, &self.u))
    }

    /// Displacement if `x` lies in a terminal window of this segment.
    pub fn window(&self, sc: &Scales, x: &[f64]) -> Option<Vec<f64>> {
        let sg = self.sigma(x);
        let lambda = if self.end == Window::Terminal
            && sg > self.len - sc.sqrt_h
            && sg <= self.len
        {
            (sg - (self.len - sc.sqrt_h)) / sc.sqrt_h
        } else if self.start == Window::Terminal && (0.0..sc.sqrt_h).contains(&sg) {
            (sc.sqrt_h - sg) / sc.sqrt_h
        } else {
            return None;
        };
        let z = self.closest(sg);
        let r = dist(x, &z);
        if r >= 3.0 * sc.h {
            return None;
        }
        let mut g = sc.radial(x, &z, r, &self.u);
        sc.blend_default(&mut g, lambda);
        Some(g)
    }
}

/// The cut corner at Brouwer vertex `y` between `s → y` and `y → t`.
#[derive(Debug, Clone)]
pub struct Junction {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    l1: f64,
    /// `z²_{(s→y)}` and `z¹_{(y→t)}`, the ends of the cut line `L_y`.
    za: Vec<f64>,
    zb: Vec<f64>,
}

impl Junction {
    pub fn new(s: Vec<f64>, y: Vec<f64>, t: Vec<f64>, sc: &Scales) -> Self {
        let a = Segment::new(s.clone(), y.clone(), Window::Open, Window::Open);
        let b = Segment::new(y.clone(), t.clone(), Window::Open, Window::Open);
        let za = a.closest(a.len - sc.sqrt_h);
        let zb = b.closest(sc.sqrt_h);
        Junction {
            s,
            y,
            t,
            u1: a.u,
            u2: b.u,
            l1: a.len,
            za,
            zb,
        }
    }

    /// Normalized inner product of the two unit directions.
    pub fn cos_angle(&self) -> f64 {
        dot(&self.u1, &self.u2)
    }

    pub fn eval(&self, sc: &Scales, x: &[f64]) -> Option<Vec<f64>> {
        let d1 = sigma(&self.u1, &self.s, x) - (self.l1 - sc.sqrt_h);
        let d2 = sc.sqrt_h - sigma(&self.u2, &self.y, x);
        if d1 < 0.0 || d2 < 0.0 || d1 + d2 <= 0.0 {
            return None;
        }
        let tau = d2 / (d1 + d2);
        let dim = x.len();
        let mut z = vec![0.0; dim];
        let mut dir = vec![0.0; dim];
        for i in 0..dim {
            z[i] = tau * self.za[i] + (1.0 - tau) * self.zb[i];
            dir[i] = tau * self.u1[i] + (1.0 - tau) * self.u2[i];
        }
        let r = dist(x, &z);
        (r < 3.0 * sc.h).then(|| sc.radial(x, &z, r, &dir))
    }
}

/// Closest distance between segments `[p0,p1]` and `[q0,q1]`.
pub fn segment_distance(p0: &[f64], p1: &[f64], q0: &[f64], q1: &[f64]) -> f64 {
    let d1 = sub(p1, p0);
    let d2 = sub(q1, q0);
    let r = sub(p0, q0);
    let a = dot(&d1, &d1);
    let e = dot(&d2, &d2);
    let f = dot(&d2, &r);
    let c = dot(&d1, &r);
    let b = dot(&d1, &d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-15 * a * e {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    let cp = axpy(p0, s, &d1);
    let cq = axpy(q0, t, &d2);
    dist(&cp, &cq)
}
