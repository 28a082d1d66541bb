//! Logarithmic perturbation theory for the ground-state energy series.
//!
//! Writing `u = exp(∫y)` turns `−u'' + V u = E u` into the Riccati equation
//! `y' + y² = V − E`. Expanding `y = Σ y_k β^k` and `E = Σ E_k β^k` gives a
//! triangular recursion in which each `y_k` is a polynomial found by back
//! substitution, without any sum over intermediate states. For the
//! oscillators every denominator is a power of two, so the exact path runs
//! on dyadic numbers `m·2^e` rather than general rationals.

use rug::{Integer, Rational};

use crate::numeric::{BigRational, BigReal};

/// The handful of operations the recursion needs from its scalar type.
pub(crate) trait Scalar: Clone {
    fn zero_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add_prod(&mut self, a: &Self, b: &Self);
    fn add(&mut self, a: &Self);
    fn sub(&mut self, a: &Self);
    fn scaled(&self, k: i64) -> Self;
    fn halve(&mut self);
    /// Canonicalizes the internal representation; called once per
    /// finished coefficient.
    fn tidy(&mut self) {}
}

/// Exact dyadic rational `m·2^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Dyadic {
    m: Integer,
    e: i64,
}

impl Dyadic {
    pub(crate) fn from_i64(v: i64) -> Self {
        let mut d = Dyadic {
            m: Integer::from(v),
            e: 0,
        };
        d.tidy();
        d
    }

    pub(crate) fn to_rational(&self) -> BigRational {
        let q = if self.e >= 0 {
            Rational::from(Integer::from(&self.m << self.e as u32))
        } else {
            let den = Integer::from(Integer::u_pow_u(2, (-self.e) as u32));
            Rational::from((self.m.clone(), den))
        };
        BigRational::from_rug(q)
    }

    fn aligned(&self, e: i64) -> Integer {
        Integer::from(&self.m << (self.e - e) as u32)
    }
}

impl Scalar for Dyadic {
    fn zero_like(&self) -> Self {
        Dyadic {
            m: Integer::new(),
            e: 0,
        }
    }

    fn is_zero(&self) -> bool {
        self.m == 0
    }

    fn add_prod(&mut self, a: &Self, b: &Self) {
        if a.m == 0 || b.m == 0 {
            return;
        }
        let p = Dyadic {
            m: Integer::from(&a.m * &b.m),
            e: a.e + b.e,
        };
        self.add(&p);
    }

    fn add(&mut self, a: &Self) {
        if a.m == 0 {
            return;
        }
        if self.m == 0 {
            *self = a.clone();
            return;
        }
        if a.e >= self.e {
            self.m += a.aligned(self.e);
        } else {
            self.m = self.aligned(a.e) + &a.m;
            self.e = a.e;
        }
    }

    fn sub(&mut self, a: &Self) {
        let neg = Dyadic {
            m: Integer::from(-&a.m),
            e: a.e,
        };
        self.add(&neg);
    }

    fn scaled(&self, k: i64) -> Self {
        Dyadic {
            m: Integer::from(&self.m * k),
            e: self.e,
        }
    }

    fn halve(&mut self) {
        self.e -= 1;
    }

    fn tidy(&mut self) {
        if self.m == 0 {
            self.e = 0;
            return;
        }
        let z = self.m.find_one(0).unwrap_or(0);
        if z > 0 {
            self.m >>= z;
            self.e += i64::from(z);
        }
    }
}

impl Scalar for BigReal {
    fn zero_like(&self) -> Self {
        BigReal::zero_like(self)
    }

    fn is_zero(&self) -> bool {
        BigReal::is_zero(self)
    }

    fn add_prod(&mut self, a: &Self, b: &Self) {
        *self += &(a * b);
    }

    fn add(&mut self, a: &Self) {
        *self += a;
    }

    fn sub(&mut self, a: &Self) {
        *self -= a;
    }

    fn scaled(&self, k: i64) -> Self {
        self.mul_i64(k)
    }

    fn halve(&mut self) {
        *self = self.div_i64(2);
    }
}

/// `Σ_{j=1}^{k-1} y_j y_{k-j}` into a vector of length `len`, using the
/// symmetry of the convolution and the fixed parity of each `y_j`.
fn riccati_square<T: Scalar>(y: &[Vec<T>], k: usize, len: usize, zero: &T) -> Vec<T> {
    let mut s = vec![zero.clone(); len];
    let mut half = vec![zero.clone(); len];
    for j in 1..=(k - 1) / 2 {
        convolve_into(&mut half, &y[j], &y[k - j]);
    }
    for (dst, h) in s.iter_mut().zip(&half) {
        if !h.is_zero() {
            *dst = h.scaled(2);
        }
    }
    if k.is_multiple_of(2) {
        convolve_into(&mut s, &y[k / 2], &y[k / 2]);
    }
    s
}

fn convolve_into<T: Scalar>(dst: &mut [T], a: &[T], b: &[T]) {
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                dst[i + j].add_prod(ai, bj);
            }
        }
    }
}

/// `E_1 … E_order` for `H = p² + x² + β x^power` (`E_0 = 1`).
///
/// With `y_0 = −x`, order `k` reads
/// `y_k' − 2x y_k + S_k = δ_{k1} x^power − E_k`, and `y_k` is a polynomial of
/// degree `(power−2)k + 1` whose coefficients follow from the top down.
pub(crate) fn oscillator_series<T: Scalar>(power: usize, order: usize, one: &T) -> Vec<T> {
    let zero = one.zero_like();
    let mut y: Vec<Vec<T>> = vec![vec![zero.clone(), one.scaled(-1)]];
    let mut energies = Vec::with_capacity(order);
    for k in 1..=order {
        let deg = (power - 2) * k + 1;
        let mut rhs_minus_s = riccati_square(&y, k, deg + 2, &zero);
        for v in rhs_minus_s.iter_mut() {
            *v = v.scaled(-1);
        }
        if k == 1 {
            rhs_minus_s[power].add(one);
        }
        // 2 a[q−1] = (q+1) a[q+1] + S[q] − rhs[q]
        let mut a = vec![zero.clone(); deg + 2];
        let mut q = deg + 1;
        loop {
            let mut v = a[q + 1..].first().map_or(zero.clone(), |n| n.scaled(q as i64 + 1));
            v.sub(&rhs_minus_s[q]);
            v.halve();
            v.tidy();
            a[q - 1] = v;
            if q < 3 {
                break;
            }
            q -= 2;
        }
        let mut e = rhs_minus_s[0].clone();
        e.sub(&a[1]);
        e.tidy();
        a.truncate(deg + 1);
        y.push(a);
        energies.push(e);
    }
    energies
}

/// `E_1 … E_order` for the s-wave of `p²/2 − 1/r + β r` (`E_0 = −1/2`).
///
/// With `u = r·e^{−r}` and `y_0 = 1/r − 1`, each correction
/// `y_k = Σ_{i=1}^{k} a_i r^i` satisfies
/// `(q+3) a_{q+1} − 2 a_q + S_q = rhs_q`, and `E_k = −3 a_1 / 2`.
pub(crate) fn funnel_series<T: Scalar>(order: usize, one: &T) -> Vec<T> {
    let zero = one.zero_like();
    let mut y: Vec<Vec<T>> = vec![vec![]];
    let mut energies = Vec::with_capacity(order);
    for k in 1..=order {
        let mut s = if k == 1 {
            vec![zero.clone(); k + 2]
        } else {
            let mut s = vec![zero.clone(); k + 2];
            for j in 1..k {
                convolve_into(&mut s, &y[j], &y[k - j]);
            }
            s
        };
        if k == 1 {
            s[1].sub(&one.scaled(2));
        }
        let mut a = vec![zero.clone(); k + 2];
        for q in (1..=k).rev() {
            let mut v = a[q + 1].scaled(q as i64 + 3);
            v.add(&s[q]);
            v.halve();
            v.tidy();
            a[q] = v;
        }
        let mut e = a[1].scaled(-3);
        e.halve();
        e.tidy();
        a.truncate(k + 1);
        y.push(a);
        energies.push(e);
    }
    energies
}
