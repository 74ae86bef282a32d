//! Truncated Witt vectors W(F4)/2^N and power series over them in j.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

/// Largest supported 2-adic precision.
pub const MAX_PRECISION: u8 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("precision mismatch: {0} vs {1}")]
    PrecisionMismatch(u8, u8),
    #[error("j-precision mismatch: {0} vs {1}")]
    SeriesPrecisionMismatch(usize, usize),
    #[error("precision {0} out of range 1..={MAX_PRECISION}")]
    BadPrecision(u8),
    #[error("element is not a unit")]
    NotUnit,
}

#[inline]
pub fn mask(n: u8) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// 2-adic valuation of an integer residue mod 2^n; returns n for zero.
#[inline]
pub fn val2(x: u32, n: u8) -> u8 {
    let x = x & mask(n);
    if x == 0 {
        n
    } else {
        x.trailing_zeros() as u8
    }
}

/// Inverse of an odd residue mod 2^n by Newton iteration.
pub fn inv_odd(x: u32, n: u8) -> u32 {
    debug_assert!(x & 1 == 1);
    let mut y = x; // correct to 3 bits
    for _ in 0..5 {
        y = y.wrapping_mul(2u32.wrapping_sub(x.wrapping_mul(y)));
    }
    y & mask(n)
}

/// An element a + bω of W(F4)/2^N with ω² + ω + 1 = 0.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gr {
    a: u32,
    b: u32,
    n: u8,
}

impl Gr {
    pub fn new(a: i64, b: i64, n: u8) -> Gr {
        assert!((1..=MAX_PRECISION).contains(&n), "precision {n} out of range");
        let m = mask(n) as i64 + 1;
        Gr {
            a: a.rem_euclid(m) as u32,
            b: b.rem_euclid(m) as u32,
            n,
        }
    }

    pub fn try_new(a: i64, b: i64, n: u8) -> Result<Gr, CoeffError> {
        if !(1..=MAX_PRECISION).contains(&n) {
            return Err(CoeffError::BadPrecision(n));
        }
        Ok(Gr::new(a, b, n))
    }

    #[inline]
    pub(crate) fn raw(a: u32, b: u32, n: u8) -> Gr {
        let m = mask(n);
        Gr { a: a & m, b: b & m, n }
    }

    pub fn zero(n: u8) -> Gr {
        Gr::new(0, 0, n)
    }

    pub fn one(n: u8) -> Gr {
        Gr::new(1, 0, n)
    }

    pub fn omega(n: u8) -> Gr {
        Gr::new(0, 1, n)
    }

    pub fn from_int(c: i64, n: u8) -> Gr {
        Gr::new(c, 0, n)
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn precision(&self) -> u8 {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn is_one(&self) -> bool {
        self.a == 1 && self.b == 0
    }

    /// A unit iff it is nonzero mod 2.
    pub fn is_unit(&self) -> bool {
        (self.a | self.b) & 1 == 1
    }

    /// 2-adic valuation; `n` for zero.
    pub fn valuation(&self) -> u8 {
        val2(self.a, self.n).min(val2(self.b, self.n))
    }

    /// Frobenius: ω ↦ ω².
    pub fn frobenius(&self) -> Gr {
        Gr::raw(self.a.wrapping_sub(self.b), self.b.wrapping_neg(), self.n)
    }

    /// Norm down to Z/2^N: x·φ(x) = a² − ab + b².
    pub fn norm(&self) -> u32 {
        let (a, b) = (self.a, self.b);
        a.wrapping_mul(a)
            .wrapping_sub(a.wrapping_mul(b))
            .wrapping_add(b.wrapping_mul(b))
            & mask(self.n)
    }

    pub fn inverse(&self) -> Result<Gr, CoeffError> {
        if !self.is_unit() {
            return Err(CoeffError::NotUnit);
        }
        let ninv = inv_odd(self.norm(), self.n);
        Ok(self.frobenius().scale(ninv))
    }

    /// Multiply by an integer residue.
    pub fn scale(&self, c: u32) -> Gr {
        Gr::raw(self.a.wrapping_mul(c), self.b.wrapping_mul(c), self.n)
    }

    pub fn shl(&self, k: u8) -> Gr {
        if k >= 32 {
            return Gr::zero(self.n);
        }
        Gr::raw(self.a << k, self.b << k, self.n)
    }

    /// Coordinate-wise shift right, discarding low bits.
    pub fn shr(&self, k: u8) -> Gr {
        if k >= 32 {
            return Gr::zero(self.n);
        }
        Gr::raw(self.a >> k, self.b >> k, self.n)
    }

    /// Coordinate-wise reduction mod 2^k.
    pub fn low_bits(&self, k: u8) -> Gr {
        let m = mask(k.min(self.n));
        Gr::raw(self.a & m, self.b & m, self.n)
    }

    /// Reduce to a lower precision.
    pub fn truncate(&self, n: u8) -> Gr {
        Gr::raw(self.a, self.b, n.min(self.n))
    }

    /// Reinterpret at a different precision (lifting by the standard representative).
    pub fn with_precision(&self, n: u8) -> Gr {
        Gr::raw(self.a, self.b, n)
    }

    pub fn checked_mul(&self, o: &Gr) -> Result<Gr, CoeffError> {
        if self.n != o.n {
            return Err(CoeffError::PrecisionMismatch(self.n, o.n));
        }
        Ok(self.mul_unchecked(o))
    }

    pub fn checked_add(&self, o: &Gr) -> Result<Gr, CoeffError> {
        if self.n != o.n {
            return Err(CoeffError::PrecisionMismatch(self.n, o.n));
        }
        Ok(Gr::raw(self.a.wrapping_add(o.a), self.b.wrapping_add(o.b), self.n))
    }

    #[inline]
    fn mul_unchecked(&self, o: &Gr) -> Gr {
        let (a, b, c, d) = (self.a, self.b, o.a, o.b);
        let bd = b.wrapping_mul(d);
        Gr::raw(
            a.wrapping_mul(c).wrapping_sub(bd),
            a.wrapping_mul(d).wrapping_add(b.wrapping_mul(c)).wrapping_sub(bd),
            self.n,
        )
    }

    pub fn pow(&self, mut e: u64) -> Gr {
        let mut base = *self;
        let mut acc = Gr::one(self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Split off the unit part: self = 2^v · u with u a unit (v < n).
    pub fn unit_part(&self) -> Option<(u8, Gr)> {
        let v = self.valuation();
        if v >= self.n {
            return None;
        }
        Some((v, self.shr(v)))
    }

    /// Signed representative of an element of the prime subring, if it is one.
    pub fn as_int(&self) -> Option<i64> {
        if self.b != 0 {
            return None;
        }
        let m = mask(self.n) as i64 + 1;
        let a = self.a as i64;
        Some(if a >= m / 2 { a - m } else { a })
    }
}

impl fmt::Debug for Gr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn signed(x: u32, n: u8) -> i64 {
    let m = mask(n) as i64 + 1;
    let x = x as i64;
    if x > m / 2 {
        x - m
    } else {
        x
    }
}

impl fmt::Display for Gr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = signed(self.a, self.n);
        let b = signed(self.b, self.n);
        match (a, b) {
            (_, 0) => write!(f, "{a}"),
            (0, 1) => write!(f, "w"),
            (0, -1) => write!(f, "-w"),
            (0, _) => write!(f, "{b}*w"),
            (_, 1) => write!(f, "({a}+w)"),
            (_, -1) => write!(f, "({a}-w)"),
            (_, b) if b < 0 => write!(f, "({a}{b}*w)"),
            _ => write!(f, "({a}+{b}*w)"),
        }
    }
}

impl Add for Gr {
    type Output = Gr;
    #[inline]
    fn add(self, o: Gr) -> Gr {
        debug_assert_eq!(self.n, o.n);
        Gr::raw(self.a.wrapping_add(o.a), self.b.wrapping_add(o.b), self.n)
    }
}

impl AddAssign for Gr {
    fn add_assign(&mut self, o: Gr) {
        *self = *self + o;
    }
}

impl Sub for Gr {
    type Output = Gr;
    #[inline]
    fn sub(self, o: Gr) -> Gr {
        debug_assert_eq!(self.n, o.n);
        Gr::raw(self.a.wrapping_sub(o.a), self.b.wrapping_sub(o.b), self.n)
    }
}

impl SubAssign for Gr {
    fn sub_assign(&mut self, o: Gr) {
        *self = *self - o;
    }
}

impl Neg for Gr {
    type Output = Gr;
    fn neg(self) -> Gr {
        Gr::raw(self.a.wrapping_neg(), self.b.wrapping_neg(), self.n)
    }
}

impl Mul for Gr {
    type Output = Gr;
    #[inline]
    fn mul(self, o: Gr) -> Gr {
        debug_assert_eq!(self.n, o.n);
        self.mul_unchecked(&o)
    }
}

/// Checked product; errors on precision mismatch.
pub fn gr_mul(x: &Gr, y: &Gr) -> Result<Gr, CoeffError> {
    x.checked_mul(y)
}

pub fn frobenius(x: &Gr) -> Gr {
    x.frobenius()
}

/// f(j) = Σ c_i j^i truncated at j^M.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    coeffs: Vec<Gr>,
    n: u8,
}

impl TruncatedSeries {
    pub fn zero(n: u8, m: usize) -> Self {
        assert!(m >= 1);
        TruncatedSeries {
            coeffs: vec![Gr::zero(n); m],
            n,
        }
    }

    pub fn one(n: u8, m: usize) -> Self {
        Self::constant(Gr::one(n), m)
    }

    pub fn constant(c: Gr, m: usize) -> Self {
        let mut s = Self::zero(c.precision(), m);
        s.coeffs[0] = c;
        s
    }

    /// Coefficients beyond `m` are dropped; missing ones are zero.
    pub fn from_coeffs(coeffs: &[Gr], n: u8, m: usize) -> Self {
        let mut s = Self::zero(n, m);
        for (i, c) in coeffs.iter().take(m).enumerate() {
            assert_eq!(c.precision(), n);
            s.coeffs[i] = *c;
        }
        s
    }

    pub fn j(n: u8, m: usize) -> Self {
        let mut s = Self::zero(n, m);
        if m > 1 {
            s.coeffs[1] = Gr::one(n);
        }
        s
    }

    pub fn precision(&self) -> (u8, usize) {
        (self.n, self.coeffs.len())
    }

    pub fn coeffs(&self) -> &[Gr] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Gr {
        self.coeffs.get(i).copied().unwrap_or(Gr::zero(self.n))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Index of the lowest nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn check(&self, o: &Self) -> Result<(), CoeffError> {
        if self.n != o.n {
            return Err(CoeffError::PrecisionMismatch(self.n, o.n));
        }
        if self.coeffs.len() != o.coeffs.len() {
            return Err(CoeffError::SeriesPrecisionMismatch(
                self.coeffs.len(),
                o.coeffs.len(),
            ));
        }
        Ok(())
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, CoeffError> {
        self.check(o)?;
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(x, y)| *x + *y).collect();
        Ok(TruncatedSeries { coeffs, n: self.n })
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, CoeffError> {
        self.check(o)?;
        let m = self.coeffs.len();
        let mut out = vec![Gr::zero(self.n); m];
        for (i, x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (k, y) in o.coeffs[..m - i].iter().enumerate() {
                out[i + k] += *x * *y;
            }
        }
        Ok(TruncatedSeries { coeffs: out, n: self.n })
    }

    pub fn scale(&self, c: Gr) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|x| *x * c).collect(),
            n: self.n,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.coeffs[0].is_unit()
    }

    pub fn inverse(&self) -> Result<Self, CoeffError> {
        let c0inv = self.coeffs[0].inverse()?;
        let m = self.coeffs.len();
        let mut g = vec![Gr::zero(self.n); m];
        g[0] = c0inv;
        for k in 1..m {
            let mut acc = Gr::zero(self.n);
            for i in 1..=k {
                acc += self.coeffs[i] * g[k - i];
            }
            g[k] = -(acc * c0inv);
        }
        Ok(TruncatedSeries { coeffs: g, n: self.n })
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*j")?,
                _ => write!(f, "{c}*j^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(j^{})", self.coeffs.len())
    }
}

pub fn is_unit_series(f: &TruncatedSeries) -> bool {
    f.is_unit()
}

pub fn invert_series(f: &TruncatedSeries) -> Result<TruncatedSeries, CoeffError> {
    f.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gr(n: u8) -> impl Strategy<Value = Gr> {
        (any::<u32>(), any::<u32>()).prop_map(move |(a, b)| Gr::raw(a, b, n))
    }

    #[test]
    fn omega_squared() {
        for n in [1, 4, 8] {
            let w = Gr::omega(n);
            assert_eq!(w * w, Gr::new(-1, -1, n));
            assert_eq!(w * w * w, Gr::one(n));
            assert_ne!(w, Gr::one(n));
        }
        let w = Gr::omega(4);
        assert_eq!((w * w).a(), 15);
        assert_eq!((w * w).b(), 15);
    }

    #[test]
    fn frobenius_examples() {
        let w = Gr::omega(6);
        assert_eq!(w.frobenius(), w * w);
        assert_eq!(Gr::from_int(5, 6).frobenius(), Gr::from_int(5, 6));
    }

    #[test]
    fn mismatch_is_an_error() {
        let x = Gr::one(4);
        let y = Gr::one(5);
        assert_eq!(gr_mul(&x, &y), Err(CoeffError::PrecisionMismatch(4, 5)));
        assert!(Gr::try_new(1, 0, 0).is_err());
    }

    #[test]
    fn series_units() {
        let n = 4;
        let m = 8;
        let one_plus_j = TruncatedSeries::from_coeffs(&[Gr::one(n), Gr::one(n)], n, m);
        assert!(is_unit_series(&one_plus_j));
        let two_plus_j = TruncatedSeries::from_coeffs(&[Gr::from_int(2, n), Gr::one(n)], n, m);
        assert!(!is_unit_series(&two_plus_j));
        assert!(invert_series(&two_plus_j).is_err());
        let w4j = TruncatedSeries::from_coeffs(&[Gr::omega(n), Gr::from_int(4, n)], n, m);
        assert!(is_unit_series(&w4j));
        let inv = invert_series(&one_plus_j).unwrap();
        // 1/(1+j) = Σ (−1)^i j^i
        for i in 0..m {
            assert_eq!(inv.coeff(i), Gr::from_int(if i % 2 == 0 { 1 } else { -1 }, n));
        }
    }

    #[test]
    fn display() {
        assert_eq!(Gr::new(-1, -1, 4).to_string(), "(-1-w)");
        assert_eq!(Gr::new(3, 0, 4).to_string(), "3");
        assert_eq!(Gr::omega(4).to_string(), "w");
    }

    proptest! {
        #[test]
        fn ring_axioms(n in 1u8..=12, x in any::<(u32,u32)>(), y in any::<(u32,u32)>(), z in any::<(u32,u32)>()) {
            let x = Gr::raw(x.0, x.1, n);
            let y = Gr::raw(y.0, y.1, n);
            let z = Gr::raw(z.0, z.1, n);
            prop_assert_eq!((x * y) * z, x * (y * z));
            prop_assert_eq!(x * (y + z), x * y + x * z);
            prop_assert_eq!(x * y, y * x);
            prop_assert_eq!(x + (-x), Gr::zero(n));
        }

        #[test]
        fn frobenius_is_ring_automorphism(x in gr(8), y in gr(8)) {
            prop_assert_eq!((x * y).frobenius(), x.frobenius() * y.frobenius());
            prop_assert_eq!((x + y).frobenius(), x.frobenius() + y.frobenius());
            prop_assert_eq!(x.frobenius().frobenius(), x);
        }

        #[test]
        fn unit_inverse(n in 1u8..=16, x in any::<(u32,u32)>()) {
            let x = Gr::raw(x.0, x.1, n);
            if x.is_unit() {
                prop_assert_eq!(x * x.inverse().unwrap(), Gr::one(n));
            } else {
                prop_assert!(x.inverse().is_err());
            }
        }

        #[test]
        fn norm_is_multiplicative(x in gr(10), y in gr(10)) {
            prop_assert_eq!((x * y).norm(), x.norm().wrapping_mul(y.norm()) & mask(10));
            prop_assert_eq!(x * x.frobenius(), Gr::raw(x.norm(), 0, 10));
        }

        #[test]
        fn series_ring_and_inverse(
            n in 1u8..=8,
            m in 1usize..=12,
            f in proptest::collection::vec(any::<(u32,u32)>(), 12),
            g in proptest::collection::vec(any::<(u32,u32)>(), 12),
            h in proptest::collection::vec(any::<(u32,u32)>(), 12),
        ) {
            let mk = |v: &Vec<(u32,u32)>| {
                let c: Vec<Gr> = v.iter().map(|&(a, b)| Gr::raw(a, b, n)).collect();
                TruncatedSeries::from_coeffs(&c, n, m)
            };
            let (f, g, h) = (mk(&f), mk(&g), mk(&h));
            let fg_h = f.checked_mul(&g).unwrap().checked_mul(&h).unwrap();
            let f_gh = f.checked_mul(&g.checked_mul(&h).unwrap()).unwrap();
            prop_assert_eq!(fg_h, f_gh);
            let lhs = f.checked_mul(&g.checked_add(&h).unwrap()).unwrap();
            let rhs = f.checked_mul(&g).unwrap().checked_add(&f.checked_mul(&h).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            if is_unit_series(&f) {
                let inv = invert_series(&f).unwrap();
                prop_assert_eq!(f.checked_mul(&inv).unwrap(), TruncatedSeries::one(n, m));
            }
        }
    }
}
