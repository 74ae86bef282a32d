//! Monomials and sparse polynomials over W(F4)/2^N.
//!
//! Variables are indexed by term-order priority (index 0 is compared first
//! in the lexicographic tiebreak). The invertible generator is kept apart as
//! the Laurent exponent `d`.

use std::collections::BTreeMap;
use std::fmt;

use crate::coeff::Gr;

pub const MAX_VARS: usize = 12;

/// Field order gives the term order: weight, then exponents by priority,
/// then the Laurent exponent.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    pub(crate) w: u16,
    pub(crate) e: [u8; MAX_VARS],
    pub(crate) d: i16,
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{:?}D{}", self.e, self.d)
    }
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn exps(&self) -> &[u8; MAX_VARS] {
        &self.e
    }

    pub fn exp(&self, v: usize) -> u8 {
        self.e[v]
    }

    pub fn laurent(&self) -> i16 {
        self.d
    }

    pub fn weight(&self) -> u16 {
        self.w
    }

    pub fn is_one(&self) -> bool {
        self.e.iter().all(|&x| x == 0) && self.d == 0
    }

    /// Support bitmask over the ordinary variables.
    #[inline]
    pub fn support(&self) -> u16 {
        let mut m = 0u16;
        for (i, &x) in self.e.iter().enumerate() {
            if x != 0 {
                m |= 1 << i;
            }
        }
        m
    }

    pub fn with_laurent(&self, d: i16) -> Monomial {
        Monomial { d, ..*self }
    }

    pub fn strip_laurent(&self) -> Monomial {
        self.with_laurent(0)
    }

    /// Divisibility ignoring the Laurent exponent.
    #[inline]
    pub fn divides(&self, other: &Monomial) -> bool {
        self.e.iter().zip(&other.e).all(|(a, b)| a <= b)
    }

    /// other / self, with the Laurent exponent of `other` minus that of `self`.
    pub fn quotient(&self, other: &Monomial, weights: &[u16]) -> Monomial {
        let mut e = [0u8; MAX_VARS];
        for i in 0..MAX_VARS {
            e[i] = other.e[i] - self.e[i];
        }
        Monomial::build(e, other.d - self.d, weights)
    }

    pub fn lcm(&self, other: &Monomial, weights: &[u16]) -> Monomial {
        let mut e = [0u8; MAX_VARS];
        for i in 0..MAX_VARS {
            e[i] = self.e[i].max(other.e[i]);
        }
        Monomial::build(e, 0, weights)
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.support() & other.support() == 0
    }

    pub fn build(e: [u8; MAX_VARS], d: i16, weights: &[u16]) -> Monomial {
        let w = e
            .iter()
            .zip(weights)
            .map(|(&x, &w)| x as u16 * w)
            .sum();
        Monomial { w, e, d }
    }

    /// Product; `None` on exponent overflow.
    #[inline]
    pub fn mul(&self, o: &Monomial) -> Option<Monomial> {
        let mut e = [0u8; MAX_VARS];
        for i in 0..MAX_VARS {
            e[i] = self.e[i].checked_add(o.e[i])?;
        }
        Some(Monomial {
            w: self.w.checked_add(o.w)?,
            e,
            d: self.d.checked_add(o.d)?,
        })
    }
}

/// Sparse polynomial; keys are sorted by the term order, so the leading
/// term is the last entry.
pub type Poly = BTreeMap<Monomial, Gr>;

pub fn poly_add_term(p: &mut Poly, m: Monomial, c: Gr) {
    if c.is_zero() {
        return;
    }
    match p.entry(m) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = *o.get() + c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

pub fn poly_add(p: &mut Poly, q: &Poly) {
    for (m, c) in q {
        poly_add_term(p, *m, *c);
    }
}

pub fn poly_scale(p: &Poly, c: Gr) -> Poly {
    let mut out = Poly::new();
    for (m, x) in p {
        poly_add_term(&mut out, *m, *x * c);
    }
    out
}

/// Product without reduction; exponent overflow is an error in the caller's
/// configuration, so it panics.
pub fn poly_mul(p: &Poly, q: &Poly) -> Poly {
    let mut out = Poly::new();
    for (m1, c1) in p {
        for (m2, c2) in q {
            let m = m1.mul(m2).expect("monomial exponent overflow");
            poly_add_term(&mut out, m, *c1 * *c2);
        }
    }
    out
}

pub fn poly_mul_term(p: &Poly, m: &Monomial, c: Gr) -> Poly {
    let mut out = Poly::new();
    for (m1, c1) in p {
        let mm = m1.mul(m).expect("monomial exponent overflow");
        poly_add_term(&mut out, mm, *c1 * c);
    }
    out
}

pub fn poly_shift_laurent(p: &Poly, k: i16) -> Poly {
    p.iter()
        .map(|(m, c)| (m.with_laurent(m.d + k), *c))
        .collect()
}
