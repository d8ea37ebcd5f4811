//! Bivariate truncated Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients of a smooth function of two
//! parameters `(u, v)` around a base point, truncated at total degree
//! `order` (at most 3). Arithmetic on jets propagates exact partial
//! derivatives, so evaluating a coordinate formula on `Jet::var_u` /
//! `Jet::var_v` yields the full derivative jet of the surface at once.
//!
//! Coefficients are stored in graded order:
//! `1, u, v, u², uv, v², u³, u²v, uv², v³`.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub const MAX_ORDER: u8 = 3;
pub const NCOEF: usize = 10;

const EXPONENTS: [(u8, u8); NCOEF] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

const fn degree(k: usize) -> u8 {
    EXPONENTS[k].0 + EXPONENTS[k].1
}

/// Index of the monomial `u^i v^j`.
pub const fn index(i: u8, j: u8) -> usize {
    let d = (i + j) as usize;
    // graded block start: 0, 1, 3, 6
    let start = d * (d + 1) / 2;
    start + j as usize
}

struct Product {
    a: usize,
    b: usize,
    out: usize,
}

const fn product_table() -> [Product; 35] {
    let mut table = [const { Product { a: 0, b: 0, out: 0 } }; 35];
    let mut n = 0;
    let mut a = 0;
    while a < NCOEF {
        let mut b = 0;
        while b < NCOEF {
            if degree(a) + degree(b) <= MAX_ORDER {
                let (ia, ja) = EXPONENTS[a];
                let (ib, jb) = EXPONENTS[b];
                table[n] = Product {
                    a,
                    b,
                    out: index(ia + ib, ja + jb),
                };
                n += 1;
            }
            b += 1;
        }
        a += 1;
    }
    table
}

static PRODUCTS: [Product; 35] = product_table();

/// Truncated Taylor polynomial in two variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; NCOEF],
    order: u8,
}

impl Jet {
    pub fn constant(value: f64, order: u8) -> Self {
        let mut c = [0.0; NCOEF];
        c[0] = value;
        Jet {
            c,
            order: order.min(MAX_ORDER),
        }
    }

    /// The independent variable `u` expanded around `u0`.
    pub fn var_u(u0: f64, order: u8) -> Self {
        let mut j = Self::constant(u0, order);
        if j.order >= 1 {
            j.c[index(1, 0)] = 1.0;
        }
        j
    }

    /// The independent variable `v` expanded around `v0`.
    pub fn var_v(v0: f64, order: u8) -> Self {
        let mut j = Self::constant(v0, order);
        if j.order >= 1 {
            j.c[index(0, 1)] = 1.0;
        }
        j
    }

    pub fn from_coefficients(c: [f64; NCOEF], order: u8) -> Self {
        let mut j = Jet {
            c,
            order: order.min(MAX_ORDER),
        };
        j.truncate();
        j
    }

    fn truncate(&mut self) {
        for k in 0..NCOEF {
            if degree(k) > self.order {
                self.c[k] = 0.0;
            }
        }
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coefficient(&self, i: u8, j: u8) -> f64 {
        if i + j > self.order {
            0.0
        } else {
            self.c[index(i, j)]
        }
    }

    /// Partial derivative `∂^{i+j} / ∂u^i ∂v^j` at the base point.
    pub fn partial(&self, i: u8, j: u8) -> f64 {
        const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
        self.coefficient(i, j) * FACT[i as usize] * FACT[j as usize]
    }

    /// `f(self)` for a scalar function given its value and first three
    /// derivatives at `self.value()`.
    pub fn compose(&self, d: [f64; 4]) -> Jet {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Jet::constant(d[0], self.order);
        if self.order == 0 {
            return out;
        }
        let mut power = delta;
        out += power * d[1];
        if self.order >= 2 {
            power *= delta;
            out += power * (d[2] / 2.0);
        }
        if self.order >= 3 {
            power *= delta;
            out += power * (d[3] / 6.0);
        }
        out
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose([e, e, e, e])
    }

    pub fn sinh(&self) -> Jet {
        let x = self.value();
        let (s, c) = (x.sinh(), x.cosh());
        self.compose([s, c, s, c])
    }

    pub fn cosh(&self) -> Jet {
        let x = self.value();
        let (s, c) = (x.sinh(), x.cosh());
        self.compose([c, s, c, s])
    }

    pub fn ln(&self) -> Jet {
        let x = self.value();
        self.compose([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)])
    }

    /// `ln |x|`; derivatives are those of `ln x` continued to `x < 0`.
    pub fn ln_abs(&self) -> Jet {
        let x = self.value();
        self.compose([x.abs().ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)])
    }

    pub fn sqrt(&self) -> Jet {
        let x = self.value();
        let s = x.sqrt();
        self.compose([s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)])
    }

    pub fn recip(&self) -> Jet {
        let x = self.value();
        let r = 1.0 / x;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn powi(&self, n: i32) -> Jet {
        let x = self.value();
        let nf = n as f64;
        self.compose([
            x.powi(n),
            nf * x.powi(n - 1),
            nf * (nf - 1.0) * x.powi(n - 2),
            nf * (nf - 1.0) * (nf - 2.0) * x.powi(n - 3),
        ])
    }

    pub fn powf(&self, p: f64) -> Jet {
        let x = self.value();
        self.compose([
            x.powf(p),
            p * x.powf(p - 1.0),
            p * (p - 1.0) * x.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0),
        ])
    }

    /// `∂/∂u` of the jet; the result has one order less.
    pub fn du(&self) -> Jet {
        let mut out = Jet::constant(0.0, self.order.saturating_sub(1));
        #[allow(clippy::needless_range_loop)]
        for k in 0..NCOEF {
            let (i, j) = EXPONENTS[k];
            if i >= 1 && degree(k) <= self.order {
                let t = index(i - 1, j);
                out.c[t] += i as f64 * self.c[k];
            }
        }
        out.truncate();
        out
    }

    /// `∂/∂v` of the jet; the result has one order less.
    pub fn dv(&self) -> Jet {
        let mut out = Jet::constant(0.0, self.order.saturating_sub(1));
        #[allow(clippy::needless_range_loop)]
        for k in 0..NCOEF {
            let (i, j) = EXPONENTS[k];
            if j >= 1 && degree(k) <= self.order {
                let t = index(i, j - 1);
                out.c[t] += j as f64 * self.c[k];
            }
        }
        out.truncate();
        out
    }

    /// Antiderivative in `u` with value `c0` at the base point.
    ///
    /// Only meaningful for jets that do not depend on `v`: the integration
    /// "constant" of a `v`-dependent jet would be a function of `v`.
    pub fn integrate_u(&self, c0: f64) -> Jet {
        let order = (self.order + 1).min(MAX_ORDER);
        let mut out = Jet::constant(c0, order);
        #[allow(clippy::needless_range_loop)]
        for k in 0..NCOEF {
            let (i, j) = EXPONENTS[k];
            if degree(k) < order && degree(k) <= self.order {
                let t = index(i + 1, j);
                out.c[t] = self.c[k] / (i as f64 + 1.0);
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self.order = self.order.min(rhs.order);
        for k in 0..NCOEF {
            self.c[k] += rhs.c[k];
        }
        self.truncate();
        self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for c in self.c.iter_mut() {
            *c = -*c;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut out = Jet::constant(0.0, order);
        for p in PRODUCTS.iter() {
            if degree(p.out) <= order {
                out.c[p.out] += self.c[p.a] * rhs.c[p.b];
            }
        }
        out
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for c in self.c.iter_mut() {
            *c *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        (-rhs) + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip() * self
    }
}
