//! Generic scalar arithmetic used by the expression evaluator.
//!
//! Every operation in the crate that needs a derivative evaluates the same
//! expression tree over [`Dual`] numbers instead of `f64`; nesting duals
//! yields exact second derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number-like values an [`crate::expr::Expr`] can be evaluated over.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// The same scalar with one more dual level on the outside, used to
    /// differentiate code that is itself generic (e.g. deferred Lie
    /// brackets). Capped at depth 4: lifting past the cap panics, which
    /// keeps monomorphization finite.
    type Lifted: Scalar;
    /// Embed as a constant at the next dual level.
    fn lift(self) -> Self::Lifted;
    /// Embed with a unit derivative seed at the next dual level.
    fn lift_seeded(self) -> Self::Lifted;
    /// Derivative part of a lifted value.
    fn lower_eps(l: Self::Lifted) -> Self;
    fn from_f64(c: f64) -> Self;
    /// Primal value, stripped of all derivative parts.
    fn val(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    /// Integer power, valid for negative bases.
    fn powi(self, n: i64) -> Self;
    /// General power through `exp(e * ln(self))`; requires a positive base.
    fn powf(self, e: Self) -> Self {
        (e * self.ln()).exp()
    }
}

impl Scalar for f64 {
    type Lifted = Dual<f64>;
    fn lift(self) -> Dual<f64> {
        Dual::constant(self)
    }
    fn lift_seeded(self) -> Dual<f64> {
        Dual::seeded(self)
    }
    fn lower_eps(l: Dual<f64>) -> f64 {
        l.eps
    }
    fn from_f64(c: f64) -> Self {
        c
    }
    fn val(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i64) -> Self {
        f64::powi(self, n as i32)
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
}

/// Forward-mode dual number with primal part `re` and derivative part `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    /// Constant lift: derivative part zero.
    pub fn constant(re: T) -> Self {
        Dual { re, eps: T::from_f64(0.0) }
    }

    /// Variable seed: unit derivative part.
    pub fn seeded(re: T) -> Self {
        Dual { re, eps: T::from_f64(1.0) }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        Dual::new(
            self.re / o.re,
            (self.eps * o.re - self.re * o.eps) / (o.re * o.re),
        )
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

/// Dual numbers up to four levels deep; enough for the second derivatives
/// nested inside an outer directional seed that the curvature identities
/// require.
pub type D1 = Dual<f64>;
pub type D2 = Dual<D1>;
pub type D3 = Dual<D2>;
pub type D4 = Dual<D3>;

macro_rules! dual_math_body {
    ($t:ty) => {
        fn from_f64(c: f64) -> Self {
            Dual::constant(<$t as Scalar>::from_f64(c))
        }
        fn val(&self) -> f64 {
            self.re.val()
        }
        fn sin(self) -> Self {
            Dual::new(self.re.sin(), self.eps * self.re.cos())
        }
        fn cos(self) -> Self {
            Dual::new(self.re.cos(), -(self.eps * self.re.sin()))
        }
        fn tan(self) -> Self {
            let c = self.re.cos();
            Dual::new(self.re.tan(), self.eps / (c * c))
        }
        fn exp(self) -> Self {
            let e = self.re.exp();
            Dual::new(e, self.eps * e)
        }
        fn ln(self) -> Self {
            Dual::new(self.re.ln(), self.eps / self.re)
        }
        fn sqrt(self) -> Self {
            let s = self.re.sqrt();
            Dual::new(s, self.eps / (<$t as Scalar>::from_f64(2.0) * s))
        }
        fn powi(self, n: i64) -> Self {
            match n {
                0 => Dual::constant(<$t as Scalar>::from_f64(1.0)),
                _ => Dual::new(
                    <$t as Scalar>::powi(self.re, n),
                    <$t as Scalar>::from_f64(n as f64)
                        * <$t as Scalar>::powi(self.re, n - 1)
                        * self.eps,
                ),
            }
        }
    };
}

macro_rules! dual_scalar_impl {
    (cap $t:ty) => {
        impl Scalar for Dual<$t> {
            type Lifted = Dual<$t>;
            fn lift(self) -> Self {
                panic!("dual nesting depth cap (4) exceeded")
            }
            fn lift_seeded(self) -> Self {
                panic!("dual nesting depth cap (4) exceeded")
            }
            fn lower_eps(_: Self) -> Self {
                panic!("dual nesting depth cap (4) exceeded")
            }
            dual_math_body!($t);
        }
    };
    ($t:ty => $l:ty) => {
        impl Scalar for Dual<$t> {
            type Lifted = $l;
            fn lift(self) -> $l {
                Dual::constant(self)
            }
            fn lift_seeded(self) -> $l {
                Dual::seeded(self)
            }
            fn lower_eps(l: $l) -> Self {
                l.eps
            }
            dual_math_body!($t);
        }
    };
}

dual_scalar_impl!(f64 => D2);
dual_scalar_impl!(D1 => D3);
dual_scalar_impl!(D2 => D4);
dual_scalar_impl!(cap D3);
