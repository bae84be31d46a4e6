//! Forward-mode derivative carrier.
//!
//! A [`Dual`] holds a value together with a fixed-width vector of partial
//! derivatives, one slot per derivative channel. Channels are allocated per
//! parameter binding by the scene, so the width is a small compile-time
//! constant. Arithmetic follows the product and chain rules exactly; every
//! channel is updated independently of the others, which makes gradients
//! linear in the set of bindings down to the last bit.
//!
//! The [`Real`] trait abstracts over `f64` and [`Dual`] so the same path
//! evaluation code serves the forward renderer (plain values) and the
//! gradient estimators (values plus derivatives).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Maximum number of derivative channels carried by a [`Dual`].
pub const MAX_CHANNELS: usize = 8;

/// Partial-derivative vector.
pub type Grad = [f64; MAX_CHANNELS];

/// Scalar type usable by the path evaluation code.
pub trait Real:
    Copy
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + MulAssign
{
    fn cst(v: f64) -> Self;
    /// Lifts a value with known partials; plain scalars drop the partials.
    fn lift(v: f64, grad: &Grad) -> Self;
    fn val(&self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn lift(v: f64, _grad: &Grad) -> Self {
        v
    }
    #[inline]
    fn val(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Value plus partial derivatives with respect to every channel.
#[derive(Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub g: Grad,
}

impl fmt::Debug for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dual({} ; {:?})", self.v, &self.g[..])
    }
}

impl Default for Dual {
    fn default() -> Self {
        Dual::constant(0.0)
    }
}

impl Dual {
    #[inline]
    pub const fn constant(v: f64) -> Self {
        Dual { v, g: [0.0; MAX_CHANNELS] }
    }

    #[inline]
    pub const fn new(v: f64, g: Grad) -> Self {
        Dual { v, g }
    }

    /// Independent variable seeded on `channel`.
    pub fn variable(v: f64, channel: usize) -> Self {
        let mut g = [0.0; MAX_CHANNELS];
        g[channel] = 1.0;
        Dual { v, g }
    }

    #[inline]
    fn map_g(self, s: f64, v: f64) -> Self {
        let mut g = self.g;
        for x in g.iter_mut() {
            *x *= s;
        }
        Dual { v, g }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.g.iter().all(|x| x.is_finite())
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: Dual) -> Dual {
        let mut g = self.g;
        for (a, b) in g.iter_mut().zip(o.g.iter()) {
            *a += *b;
        }
        Dual { v: self.v + o.v, g }
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: Dual) -> Dual {
        let mut g = self.g;
        for (a, b) in g.iter_mut().zip(o.g.iter()) {
            *a -= *b;
        }
        Dual { v: self.v - o.v, g }
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        let mut g = [0.0; MAX_CHANNELS];
        for i in 0..MAX_CHANNELS {
            g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        Dual { v: self.v * o.v, g }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: Dual) -> Dual {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        let mut g = [0.0; MAX_CHANNELS];
        for i in 0..MAX_CHANNELS {
            g[i] = (self.g[i] - v * o.g[i]) * inv;
        }
        Dual { v, g }
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        self.map_g(-1.0, -self.v)
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: f64) -> Dual {
        Dual { v: self.v + o, g: self.g }
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: f64) -> Dual {
        Dual { v: self.v - o, g: self.g }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: f64) -> Dual {
        self.map_g(o, self.v * o)
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: f64) -> Dual {
        let inv = 1.0 / o;
        self.map_g(inv, self.v * inv)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, o: Dual) {
        *self = *self + o;
    }
}

impl SubAssign for Dual {
    #[inline]
    fn sub_assign(&mut self, o: Dual) {
        *self = *self - o;
    }
}

impl MulAssign for Dual {
    #[inline]
    fn mul_assign(&mut self, o: Dual) {
        *self = *self * o;
    }
}

impl Real for Dual {
    #[inline]
    fn cst(v: f64) -> Self {
        Dual::constant(v)
    }
    #[inline]
    fn lift(v: f64, grad: &Grad) -> Self {
        Dual { v, g: *grad }
    }
    #[inline]
    fn val(&self) -> f64 {
        self.v
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.map_g(0.5 / s, s)
    }
    #[inline]
    fn abs(self) -> Self {
        if self.v < 0.0 {
            -self
        } else {
            self
        }
    }
    #[inline]
    fn sin(self) -> Self {
        self.map_g(self.v.cos(), self.v.sin())
    }
    #[inline]
    fn cos(self) -> Self {
        self.map_g(-self.v.sin(), self.v.cos())
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.map_g(e, e)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Dual::constant(1.0);
        }
        let p = self.v.powi(n - 1);
        self.map_g(n as f64 * p, p * self.v)
    }
}
