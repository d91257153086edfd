//! Small fixed-size forward-mode derivative jets over the four coordinates
//! (x1, x2, x3, s): second-order jets carry a value, gradient and Hessian;
//! third-order jets additionally carry the symmetric third-derivative tensor
//! so that a coordinate partial of a third-order jet is again a full
//! second-order jet. Used for closed-form reference fields whose exact
//! derivatives are needed pointwise.

pub const NV: usize = 4;

#[derive(Clone, Copy, Debug)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; NV],
    pub h: [[f64; NV]; NV],
}

impl Jet2 {
    pub fn constant(v: f64) -> Jet2 {
        Jet2 {
            v,
            g: [0.0; NV],
            h: [[0.0; NV]; NV],
        }
    }

    pub fn zero() -> Jet2 {
        Jet2::constant(0.0)
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        let mut r = *self;
        r.v += o.v;
        for i in 0..NV {
            r.g[i] += o.g[i];
            for j in 0..NV {
                r.h[i][j] += o.h[i][j];
            }
        }
        r
    }

    pub fn sub(&self, o: &Jet2) -> Jet2 {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, f: f64) -> Jet2 {
        let mut r = *self;
        r.v *= f;
        for i in 0..NV {
            r.g[i] *= f;
            for j in 0..NV {
                r.h[i][j] *= f;
            }
        }
        r
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let mut r = Jet2::zero();
        r.v = self.v * o.v;
        for i in 0..NV {
            r.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..NV {
                r.h[i][j] = self.v * o.h[i][j]
                    + o.v * self.h[i][j]
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i];
            }
        }
        r
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Jet3 {
    pub v: f64,
    pub g: [f64; NV],
    pub h: [[f64; NV]; NV],
    pub t: [[[f64; NV]; NV]; NV],
}

impl Jet3 {
    pub fn constant(v: f64) -> Jet3 {
        Jet3 {
            v,
            g: [0.0; NV],
            h: [[0.0; NV]; NV],
            t: [[[0.0; NV]; NV]; NV],
        }
    }

    pub fn zero() -> Jet3 {
        Jet3::constant(0.0)
    }

    pub fn var(v: f64, idx: usize) -> Jet3 {
        let mut r = Jet3::constant(v);
        r.g[idx] = 1.0;
        r
    }

    pub fn add(&self, o: &Jet3) -> Jet3 {
        let mut r = *self;
        r.v += o.v;
        for i in 0..NV {
            r.g[i] += o.g[i];
            for j in 0..NV {
                r.h[i][j] += o.h[i][j];
                for k in 0..NV {
                    r.t[i][j][k] += o.t[i][j][k];
                }
            }
        }
        r
    }

    pub fn sub(&self, o: &Jet3) -> Jet3 {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, f: f64) -> Jet3 {
        let mut r = *self;
        r.v *= f;
        for i in 0..NV {
            r.g[i] *= f;
            for j in 0..NV {
                r.h[i][j] *= f;
                for k in 0..NV {
                    r.t[i][j][k] *= f;
                }
            }
        }
        r
    }

    pub fn shift(&self, c: f64) -> Jet3 {
        let mut r = *self;
        r.v += c;
        r
    }

    pub fn mul(&self, o: &Jet3) -> Jet3 {
        let (u, w) = (self, o);
        let mut r = Jet3::zero();
        r.v = u.v * w.v;
        for i in 0..NV {
            r.g[i] = u.v * w.g[i] + w.v * u.g[i];
            for j in 0..NV {
                r.h[i][j] =
                    u.v * w.h[i][j] + w.v * u.h[i][j] + u.g[i] * w.g[j] + u.g[j] * w.g[i];
                for k in 0..NV {
                    r.t[i][j][k] = u.v * w.t[i][j][k]
                        + w.v * u.t[i][j][k]
                        + u.g[i] * w.h[j][k]
                        + u.g[j] * w.h[i][k]
                        + u.g[k] * w.h[i][j]
                        + w.g[i] * u.h[j][k]
                        + w.g[j] * u.h[i][k]
                        + w.g[k] * u.h[i][j];
                }
            }
        }
        r
    }

    /// Composition with a scalar function given its first three derivatives
    /// at the value of `self`.
    pub fn chain(&self, f: f64, d1: f64, d2: f64, d3: f64) -> Jet3 {
        let u = self;
        let mut r = Jet3::constant(f);
        for i in 0..NV {
            r.g[i] = d1 * u.g[i];
            for j in 0..NV {
                r.h[i][j] = d1 * u.h[i][j] + d2 * u.g[i] * u.g[j];
                for k in 0..NV {
                    r.t[i][j][k] = d1 * u.t[i][j][k]
                        + d2 * (u.g[i] * u.h[j][k] + u.g[j] * u.h[i][k] + u.g[k] * u.h[i][j])
                        + d3 * u.g[i] * u.g[j] * u.g[k];
                }
            }
        }
        r
    }

    pub fn recip(&self) -> Jet3 {
        let v = self.v;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v), -6.0 / (v * v * v * v))
    }

    pub fn sqrt(&self) -> Jet3 {
        let v = self.v;
        let s = v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v))
    }

    pub fn atan(&self) -> Jet3 {
        let z = self.v;
        let d = 1.0 + z * z;
        self.chain(
            z.atan(),
            1.0 / d,
            -2.0 * z / (d * d),
            (6.0 * z * z - 2.0) / (d * d * d),
        )
    }

    /// cos(sqrt(t)) as a smooth function of t >= 0.
    pub fn cos_sqrt(&self) -> Jet3 {
        let t = self.v;
        let (c, s, sp, spp) = sinc_family(t);
        // c(t) = cos(sqrt t); c' = -s/2, c'' = -s'/2, c''' = -s''/2
        self.chain(c, -0.5 * s, -0.5 * sp, -0.5 * spp)
    }

    /// sin(sqrt(t)) / sqrt(t) as a smooth function of t >= 0.
    pub fn sinc_sqrt(&self) -> Jet3 {
        let t = self.v;
        let (_, s, sp, spp) = sinc_family(t);
        let sppp = sinc_third(t);
        self.chain(s, sp, spp, sppp)
    }

    /// Partial derivative with respect to coordinate `i`, as a full
    /// second-order jet.
    pub fn partial(&self, i: usize) -> Jet2 {
        let mut r = Jet2::zero();
        r.v = self.g[i];
        for j in 0..NV {
            r.g[j] = self.h[i][j];
            for k in 0..NV {
                r.h[j][k] = self.t[i][j][k];
            }
        }
        r
    }

    pub fn truncate(&self) -> Jet2 {
        Jet2 {
            v: self.v,
            g: self.g,
            h: self.h,
        }
    }
}

/// (cos(sqrt t), sinc(sqrt t), sinc', sinc'') with sinc(u) = sin(u)/u, all as
/// functions of t = u^2; series branch near t = 0.
fn sinc_family(t: f64) -> (f64, f64, f64, f64) {
    if t < 1e-3 {
        let c = 1.0 - t / 2.0 + t * t / 24.0 - t * t * t / 720.0 + t * t * t * t / 40320.0;
        let s = 1.0 - t / 6.0 + t * t / 120.0 - t * t * t / 5040.0 + t * t * t * t / 362880.0;
        let sp = -1.0 / 6.0 + t / 60.0 - t * t / 1680.0 + t * t * t / 90720.0;
        let spp = 1.0 / 60.0 - t / 840.0 + t * t / 30240.0;
        (c, s, sp, spp)
    } else {
        let u = t.sqrt();
        let (sin_u, cos_u) = u.sin_cos();
        let s = sin_u / u;
        let sp = (u * cos_u - sin_u) / (2.0 * u * u * u);
        let spp = (3.0 * sin_u - 3.0 * u * cos_u - u * u * sin_u) / (4.0 * u.powi(5));
        (cos_u, s, sp, spp)
    }
}

fn sinc_third(t: f64) -> f64 {
    if t < 1e-3 {
        -1.0 / 840.0 + t / 15120.0 - t * t / 665280.0
    } else {
        let u = t.sqrt();
        let (sin_u, cos_u) = u.sin_cos();
        (-15.0 * sin_u + 15.0 * u * cos_u + 6.0 * u * u * sin_u - u * u * u * cos_u)
            / (8.0 * u.powi(7))
    }
}

// ---------- quaternion algebra over second-order jets ----------

pub type QuatJet = [Jet2; 4];

pub fn qj_conj(q: &QuatJet) -> QuatJet {
    [q[0], q[1].scale(-1.0), q[2].scale(-1.0), q[3].scale(-1.0)]
}

pub fn qj_mul(p: &QuatJet, q: &QuatJet) -> QuatJet {
    let w = p[0]
        .mul(&q[0])
        .sub(&p[1].mul(&q[1]))
        .sub(&p[2].mul(&q[2]))
        .sub(&p[3].mul(&q[3]));
    let x = p[0]
        .mul(&q[1])
        .add(&p[1].mul(&q[0]))
        .add(&p[2].mul(&q[3]))
        .sub(&p[3].mul(&q[2]));
    let y = p[0]
        .mul(&q[2])
        .sub(&p[1].mul(&q[3]))
        .add(&p[2].mul(&q[0]))
        .add(&p[3].mul(&q[1]));
    let z = p[0]
        .mul(&q[3])
        .add(&p[1].mul(&q[2]))
        .sub(&p[2].mul(&q[1]))
        .add(&p[3].mul(&q[0]));
    [w, x, y, z]
}

pub fn qj_add(p: &QuatJet, q: &QuatJet) -> QuatJet {
    std::array::from_fn(|c| p[c].add(&q[c]))
}
