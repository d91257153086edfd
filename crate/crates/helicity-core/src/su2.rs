//! su(2) coefficient algebra and unit quaternions.
//!
//! Basis t_a = sigma_a/(2i), so [t_a, t_b] = eps_{abc} t_c and the inner
//! product <X, Y> = -2 tr(XY) is the Euclidean dot product of coefficients.
//! A pure quaternion (x, y, z) corresponds to 2(x t_1 + y t_2 + z t_3), i.e.
//! the quaternion units map to -i sigma_a = 2 t_a.

/// su(2) element as coefficients in the t_a basis.
pub type Su2 = [f64; 3];

#[inline]
pub fn bracket(x: Su2, y: Su2) -> Su2 {
    [
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ]
}

#[inline]
pub fn dot(x: Su2, y: Su2) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

/// Quaternion (w, x, y, z).
pub type Quat = [f64; 4];

pub const QID: Quat = [1.0, 0.0, 0.0, 0.0];

#[inline]
pub fn qmul(a: Quat, b: Quat) -> Quat {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

#[inline]
pub fn qconj(q: Quat) -> Quat {
    [q[0], -q[1], -q[2], -q[3]]
}

#[inline]
pub fn qnorm(q: Quat) -> f64 {
    (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt()
}

#[inline]
pub fn qscale(q: Quat, c: f64) -> Quat {
    [q[0] * c, q[1] * c, q[2] * c, q[3] * c]
}

#[inline]
pub fn qadd(a: Quat, b: Quat) -> Quat {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[inline]
pub fn qvec(q: Quat) -> [f64; 3] {
    [q[1], q[2], q[3]]
}

#[inline]
pub fn qpure(v: [f64; 3]) -> Quat {
    [0.0, v[0], v[1], v[2]]
}

/// vec(q (0,v) q_conj): rotation of v by q (for unit q).
#[inline]
pub fn qrotate(q: Quat, v: [f64; 3]) -> [f64; 3] {
    qvec(qmul(qmul(q, qpure(v)), qconj(q)))
}

/// Adjoint action g^{-1} X g on su(2) coefficients, g given as unit quaternion.
#[inline]
pub fn ad_inverse(q: Quat, x: Su2) -> Su2 {
    qrotate(qconj(q), x)
}

/// exp of the pure quaternion p (sinc-stable).
#[inline]
pub fn qexp_pure(p: [f64; 3]) -> Quat {
    let t = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let (c, s) = if t < 1e-8 {
        (1.0 - t * t / 2.0, 1.0 - t * t / 6.0)
    } else {
        (t.cos(), t.sin() / t)
    };
    [c, s * p[0], s * p[1], s * p[2]]
}

/// su(2) coefficients of the pure quaternion q (w-part discarded).
#[inline]
pub fn lie_of_pure_quat(q: Quat) -> Su2 {
    [2.0 * q[1], 2.0 * q[2], 2.0 * q[3]]
}

/// Pure quaternion of an su(2) element.
#[inline]
pub fn quat_of_lie(x: Su2) -> Quat {
    [0.0, 0.5 * x[0], 0.5 * x[1], 0.5 * x[2]]
}
