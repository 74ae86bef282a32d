//! The truncated quaternionic order W(F4)<S>/(S² = 2, aS = Sφ(a)) at
//! precision 2^N, extended by the Galois group, and the finite subgroups
//! inside it.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{Gr, MAX_PRECISION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilizerError {
    #[error("precision {0} out of range 2..={MAX_PRECISION}")]
    BadPrecision(u8),
    #[error("cannot parse element {0:?}: expected a0,a1,b0,b1[,e]")]
    Parse(String),
    #[error("element is not a unit")]
    NotUnit,
    #[error("no solution of x^2 = -1 at precision {0}")]
    NoOrderFour(u8),
    #[error("no pair i, j = w i w^-1 generating Q8 at precision {0}")]
    NoQ8(u8),
    #[error("no Galois element normalizing G24 at precision {0}")]
    NoGalois(u8),
}

/// (a + bS, φ^galois).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StabilizerElement {
    pub a: Gr,
    pub b: Gr,
    pub galois: u8,
}

impl StabilizerElement {
    pub fn new(a: Gr, b: Gr, galois: u8) -> Self {
        assert_eq!(a.precision(), b.precision(), "precision mismatch");
        StabilizerElement { a, b, galois: galois & 1 }
    }

    pub fn one(n: u8) -> Self {
        Self::new(Gr::one(n), Gr::zero(n), 0)
    }

    pub fn omega(n: u8) -> Self {
        Self::new(Gr::omega(n), Gr::zero(n), 0)
    }

    pub fn s(n: u8) -> Self {
        Self::new(Gr::zero(n), Gr::one(n), 0)
    }

    pub fn phi(n: u8) -> Self {
        Self::new(Gr::one(n), Gr::zero(n), 1)
    }

    pub fn scalar(a: Gr) -> Self {
        Self::new(a, Gr::zero(a.precision()), 0)
    }

    pub fn precision(&self) -> u8 {
        self.a.precision()
    }

    pub fn is_unit(&self) -> bool {
        self.a.is_unit()
    }

    /// The Galois action on coordinates: φ applied to a and b.
    pub fn frobenius(&self) -> Self {
        Self::new(self.a.frobenius(), self.b.frobenius(), self.galois)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::one(self.precision());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Inverse of a unit. On the order part (a + bS)⁻¹ = (φ(a) − bS)/N(x);
    /// (x, φ)⁻¹ = (φ(x⁻¹), φ).
    pub fn inverse(&self) -> Result<Self, StabilizerError> {
        if !self.is_unit() {
            return Err(StabilizerError::NotUnit);
        }
        let plain = Self::new(self.a, self.b, 0);
        let inv = norm(&plain).scalar.inverse().map_err(|_| StabilizerError::NotUnit)?;
        let core = Self::scalar(inv) * Self::new(self.a.frobenius(), -self.b, 0);
        Ok(if self.galois == 1 { Self { galois: 1, ..core.frobenius() } } else { core })
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.galois == 0
    }

    /// Reduction to precision k ≤ N.
    pub fn truncate(&self, k: u8) -> Self {
        Self::new(self.a.truncate(k), self.b.truncate(k), self.galois)
    }

    /// Smallest m ≥ 1 with x^m = 1, up to `bound`.
    pub fn order(&self, bound: u64) -> Option<u64> {
        let mut y = *self;
        for m in 1..=bound {
            if y.is_one() {
                return Some(m);
            }
            y = y * *self;
        }
        None
    }
}

impl Mul for StabilizerElement {
    type Output = StabilizerElement;

    /// (x, φ^e)(y, φ^f) = (x·φ^e(y), φ^{e+f}) with
    /// (a + bS)(c + dS) = (ac + 2bφ(d)) + (ad + bφ(c))S.
    fn mul(self, o: Self) -> Self {
        let y = if self.galois == 1 { o.frobenius() } else { o };
        let two = Gr::from_int(2, self.precision());
        let a = self.a * y.a + two * self.b * y.b.frobenius();
        let b = self.a * y.b + self.b * y.a.frobenius();
        Self::new(a, b, self.galois ^ o.galois)
    }
}

impl fmt::Display for StabilizerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*S", self.a, self.b)?;
        if self.galois == 1 {
            write!(f, " ; phi")?;
        }
        Ok(())
    }
}

impl fmt::Debug for StabilizerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses "a0,a1,b0,b1[,e]" at a given precision: a = a0 + a1ω, b = b0 + b1ω.
pub fn parse_element(s: &str, n: u8) -> Result<StabilizerElement, StabilizerError> {
    check_precision(n)?;
    let err = || StabilizerError::Parse(s.to_string());
    let v: Vec<i64> = s.split(',').map(|t| t.trim().parse::<i64>().map_err(|_| err())).collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a0, a1, b0, b1] => Ok(StabilizerElement::new(Gr::new(*a0, *a1, n), Gr::new(*b0, *b1, n), 0)),
        [a0, a1, b0, b1, e] if (0..=1).contains(e) => {
            Ok(StabilizerElement::new(Gr::new(*a0, *a1, n), Gr::new(*b0, *b1, n), *e as u8))
        }
        _ => Err(err()),
    }
}

impl FromStr for StabilizerElement {
    type Err = StabilizerError;

    /// Same format as `parse_element`, precision prefixed as "N:".
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, rest) = s.split_once(':').ok_or_else(|| StabilizerError::Parse(s.to_string()))?;
        let n = n.trim().parse::<u8>().map_err(|_| StabilizerError::Parse(s.to_string()))?;
        parse_element(rest, n)
    }
}

/// Coordinates as signed integers, for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementReport {
    pub precision: u8,
    pub a: [i64; 2],
    pub b: [i64; 2],
    pub galois: u8,
    pub display: String,
}

impl From<&StabilizerElement> for ElementReport {
    fn from(x: &StabilizerElement) -> Self {
        let n = x.precision();
        let sg = |v: u32| {
            let m = 1i64 << n;
            let v = v as i64;
            if v > m / 2 {
                v - m
            } else {
                v
            }
        };
        ElementReport {
            precision: n,
            a: [sg(x.a.a()), sg(x.a.b())],
            b: [sg(x.b.a()), sg(x.b.b())],
            galois: x.galois,
            display: x.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormValue {
    /// Lies in Z/2^N: its ω-coordinate is zero.
    pub scalar: Gr,
    pub galois: u8,
}

/// (a + bS, φ^e) ↦ (aφ(a) − 2bφ(b), φ^e).
pub fn norm(x: &StabilizerElement) -> NormValue {
    let two = Gr::from_int(2, x.precision());
    let scalar = x.a * x.a.frobenius() - two * x.b * x.b.frobenius();
    debug_assert_eq!(scalar.b(), 0);
    NormValue { scalar, galois: x.galois }
}

fn check_precision(n: u8) -> Result<(), StabilizerError> {
    if (2..=MAX_PRECISION).contains(&n) {
        Ok(())
    } else {
        Err(StabilizerError::BadPrecision(n))
    }
}

fn all_gr(n: u8) -> impl Iterator<Item = Gr> {
    let m = 1i64 << n;
    (0..m).flat_map(move |a| (0..m).map(move |b| Gr::new(a, b, n)))
}

fn is_minus_one(x: &StabilizerElement) -> bool {
    let n = x.precision();
    x.a == Gr::from_int(-1, n) && x.b.is_zero() && x.galois == 0
}

/// All x = a + bS with x² = −1 mod 2^N. Seeds are every solution mod 4;
/// each is lifted one binary digit at a time, keeping every lift that still
/// solves the equation, so the list is complete at precision N.
pub fn find_order4(n: u8) -> Result<Vec<StabilizerElement>, StabilizerError> {
    check_precision(n)?;
    let mut level: Vec<StabilizerElement> = all_gr(2)
        .flat_map(|a| all_gr(2).map(move |b| StabilizerElement::new(a, b, 0)))
        .filter(|x| is_minus_one(&(*x * *x)))
        .collect();
    for k in 2..n {
        let step = 1i64 << k;
        let mut next = Vec::new();
        for x in &level {
            let (a0, a1) = (x.a.a() as i64, x.a.b() as i64);
            let (b0, b1) = (x.b.a() as i64, x.b.b() as i64);
            for d in 0..16i64 {
                let y = StabilizerElement::new(
                    Gr::new(a0 + step * (d & 1), a1 + step * (d >> 1 & 1), k + 1),
                    Gr::new(b0 + step * (d >> 2 & 1), b1 + step * (d >> 3 & 1), k + 1),
                    0,
                );
                if is_minus_one(&(y * y)) {
                    next.push(y);
                }
            }
        }
        level = next;
    }
    if level.is_empty() {
        return Err(StabilizerError::NoOrderFour(n));
    }
    level.sort();
    Ok(level)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub elements: Vec<StabilizerElement>,
    /// False when the bound was hit before the set closed up.
    pub stabilized: bool,
}

impl Closure {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// The monoid generated by `gens` (a group, since everything is torsion),
/// explored breadth first until closed or `bound` elements are found.
pub fn subgroup_closure(gens: &[StabilizerElement], bound: usize) -> Result<Closure, StabilizerError> {
    let Some(first) = gens.first() else {
        return Ok(Closure { elements: Vec::new(), stabilized: true });
    };
    if gens.iter().any(|g| !g.is_unit()) {
        return Err(StabilizerError::NotUnit);
    }
    let one = StabilizerElement::one(first.precision());
    let mut seen: HashSet<StabilizerElement> = HashSet::from([one]);
    let mut frontier = vec![one];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in gens {
                let y = *x * *g;
                if seen.insert(y) {
                    if seen.len() > bound {
                        let elements = seen.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
                        return Ok(Closure { elements, stabilized: false });
                    }
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    let elements = seen.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    Ok(Closure { elements, stabilized: true })
}

/// Generators i, j of Q8 with j = ωiω⁻¹: the first solution of x² = −1
/// (in sorted order) whose ω-conjugate anticommutes with it, closing up to
/// 8 elements that ω normalizes.
pub fn q8_generators(n: u8) -> Result<(StabilizerElement, StabilizerElement), StabilizerError> {
    let w = StabilizerElement::omega(n);
    let winv = w.inverse()?;
    let minus = StabilizerElement::scalar(Gr::from_int(-1, n));
    for i in find_order4(n)? {
        let j = w * i * winv;
        if i * j != minus * j * i {
            continue;
        }
        let q8 = subgroup_closure(&[i, j], 16)?;
        if q8.order() == 8 && q8.elements.contains(&(w * j * winv)) {
            return Ok((i, j));
        }
    }
    Err(StabilizerError::NoQ8(n))
}

/// i, j, ω generating G24 = Q8 ⋊ F4^×.
pub fn g24_generators(n: u8) -> Result<Vec<StabilizerElement>, StabilizerError> {
    let (i, j) = q8_generators(n)?;
    Ok(vec![i, j, StabilizerElement::omega(n)])
}

/// An element (y, φ) normalizing G24 with square in G24, so that G24 and it
/// generate G48 = G24 ⋊ Gal. Found like `find_order4`: all candidates mod 4,
/// then lifted one digit at a time against the reductions of G24.
pub fn galois_element(g24: &[StabilizerElement]) -> Result<StabilizerElement, StabilizerError> {
    let n = g24.first().map_or(2, |g| g.precision());
    check_precision(n)?;
    let group = subgroup_closure(g24, 64)?;
    let ok = |x: &StabilizerElement, k: u8| {
        let red: HashSet<_> = group.elements.iter().map(|g| g.truncate(k)).collect();
        let Ok(xinv) = x.inverse() else { return false };
        red.contains(&(*x * *x)) && g24.iter().all(|g| red.contains(&(*x * g.truncate(k) * xinv)))
    };
    let mut level: Vec<StabilizerElement> = all_gr(2)
        .flat_map(|a| all_gr(2).map(move |b| StabilizerElement::new(a, b, 1)))
        .filter(|x| x.is_unit() && ok(x, 2))
        .collect();
    for k in 2..n {
        let step = 1i64 << k;
        let mut next = Vec::new();
        for x in &level {
            let (a0, a1) = (x.a.a() as i64, x.a.b() as i64);
            let (b0, b1) = (x.b.a() as i64, x.b.b() as i64);
            for d in 0..16i64 {
                let y = StabilizerElement::new(
                    Gr::new(a0 + step * (d & 1), a1 + step * (d >> 1 & 1), k + 1),
                    Gr::new(b0 + step * (d >> 2 & 1), b1 + step * (d >> 3 & 1), k + 1),
                    1,
                );
                if ok(&y, k + 1) {
                    next.push(y);
                }
            }
        }
        // one representative per coset of the scalars is plenty
        next.sort();
        next.truncate(4096);
        level = next;
    }
    level.into_iter().min().ok_or(StabilizerError::NoGalois(n))
}

/// Generators of G48: those of G24 and a Galois element. At N = 3 the
/// search comes up empty; N ≥ 4 works.
pub fn g48_generators(n: u8) -> Result<Vec<StabilizerElement>, StabilizerError> {
    let mut gens = g24_generators(n)?;
    gens.push(galois_element(&gens)?);
    Ok(gens)
}

/// Class of N(x) in (Z/2^N)^×/{±1}. With u = ±N(x) ≡ 1 mod 4, u = 5^t and t is
/// read mod 2^{N−2}; the class is trivial iff t = 0, i.e. x lies in the
/// kernel of the reduced norm to precision N.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormClass {
    pub precision: u8,
    pub norm: i64,
    pub exponent: u64,
    /// Binary digits of t, least significant first, N−2 of them.
    pub digits: String,
    pub trivial: bool,
}

pub fn reduced_norm_class(x: &StabilizerElement) -> Result<NormClass, StabilizerError> {
    if !x.is_unit() {
        return Err(StabilizerError::NotUnit);
    }
    let n = x.precision();
    let modulus = 1u64 << n;
    let mask = modulus - 1;
    let s = norm(x).scalar.a() as u64;
    let u = if s % 4 == 1 { s } else { modulus - s } & mask;
    // discrete log to base 5, digit by digit: 5^(2^k) ≡ 1 + 2^{k+2} mod 2^{k+3}
    let len = n.saturating_sub(2);
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = (acc * b) & mask;
            }
            b = (b * b) & mask;
            e >>= 1;
        }
        acc
    };
    // 5 has order 2^len; 5^(2^k) ≡ 1 + 2^{k+2} mod 2^{k+3} fixes bit k
    let mut t = 0u64;
    for k in 0..len {
        let r = (u * pow(5, (1u64 << len) - t)) & mask;
        if r & ((1u64 << (k + 3)) - 1) != 1 {
            t |= 1 << k;
        }
    }
    debug_assert_eq!(pow(5, t), u);
    let digits = (0..len).map(|k| if t >> k & 1 == 1 { '1' } else { '0' }).collect();
    let signed = if s > modulus / 2 { s as i64 - modulus as i64 } else { s as i64 };
    Ok(NormClass { precision: n, norm: signed, exponent: t, digits, trivial: t == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn elt(n: u8) -> impl Strategy<Value = StabilizerElement> {
        let m = 1i64 << n;
        (0..m, 0..m, 0..m, 0..m, 0u8..2)
            .prop_map(move |(a0, a1, b0, b1, e)| StabilizerElement::new(Gr::new(a0, a1, n), Gr::new(b0, b1, n), e))
    }

    #[test]
    fn norm_examples() {
        for n in [2, 4, 8] {
            assert_eq!(norm(&StabilizerElement::omega(n)).scalar, Gr::one(n));
            assert_eq!(norm(&StabilizerElement::one(n)).scalar, Gr::one(n));
            assert_eq!(norm(&StabilizerElement::s(n)).scalar, Gr::from_int(-2, n));
        }
    }

    #[test]
    fn defining_relations() {
        let n = 8;
        let s = StabilizerElement::s(n);
        assert_eq!(s * s, StabilizerElement::scalar(Gr::from_int(2, n)));
        for a in all_gr(3).map(|g| Gr::new(g.a() as i64, g.b() as i64, n)) {
            let a_ = StabilizerElement::scalar(a);
            assert_eq!(s * a_, StabilizerElement::scalar(a.frobenius()) * s);
        }
        let p = StabilizerElement::phi(n);
        let w = StabilizerElement::omega(n);
        assert_eq!(p * w * p, StabilizerElement::scalar(Gr::omega(n).frobenius()));
    }

    #[test]
    fn order_four_solutions() {
        for n in [2u8, 3, 5, 8] {
            let sols = find_order4(n).unwrap();
            assert!(sols.len() >= 2);
            let minus = StabilizerElement::scalar(Gr::from_int(-1, n));
            for x in &sols {
                assert_eq!(*x * *x, minus);
                assert_eq!(x.order(8), Some(4));
                let nx = norm(x).scalar;
                assert_eq!(nx * nx, Gr::one(n));
            }
            // x and −x are the only center-conjugates; more than one pair exists
            let classes: BTreeSet<_> = sols.iter().map(|x| std::cmp::min(*x, minus * *x)).collect();
            assert!(classes.len() >= 2);
        }
    }

    #[test]
    fn lifting_is_stable() {
        let low: HashSet<_> = find_order4(5).unwrap().into_iter().collect();
        for x in find_order4(6).unwrap() {
            assert!(low.contains(&x.truncate(5)));
        }
    }

    #[test]
    fn finite_subgroups() {
        for n in [3u8, 4, 8] {
            let w = StabilizerElement::omega(n);
            assert_eq!(subgroup_closure(&[w], 100).unwrap().order(), 3);
            let (i, j) = q8_generators(n).unwrap();
            assert_eq!(w * i * w.inverse().unwrap(), j);
            assert_eq!(subgroup_closure(&[i, j], 100).unwrap().order(), 8);
            let g = subgroup_closure(&[i, j, w], 100).unwrap();
            assert!(g.stabilized);
            assert_eq!(g.order(), 24);
            for x in &g.elements {
                assert!(reduced_norm_class(x).unwrap().trivial, "{x}");
            }
        }
        let capped = subgroup_closure(&[StabilizerElement::scalar(Gr::from_int(3, 8))], 10).unwrap();
        assert!(!capped.stabilized);
    }

    #[test]
    fn galois_extension() {
        for n in [4u8, 6, 8] {
            let g = subgroup_closure(&g48_generators(n).unwrap(), 100).unwrap();
            assert!(g.stabilized);
            assert_eq!(g.order(), 48);
            assert_eq!(g.elements.iter().filter(|x| x.galois == 1).count(), 24);
            let g24: HashSet<_> = subgroup_closure(&g24_generators(n).unwrap(), 100).unwrap().elements.into_iter().collect();
            assert!(g.elements.iter().filter(|x| x.galois == 0).all(|x| g24.contains(x)));
            assert!(g.elements.iter().all(|x| reduced_norm_class(x).unwrap().trivial));
        }
        assert_eq!(g48_generators(3), Err(StabilizerError::NoGalois(3)));
    }

    #[test]
    fn norm_classes() {
        let n = 8;
        assert!(reduced_norm_class(&StabilizerElement::omega(n)).unwrap().trivial);
        // 1 + 2ω has norm 3; the scalar 3 has norm 9
        let x = StabilizerElement::scalar(Gr::new(1, 2, n));
        let c = reduced_norm_class(&x).unwrap();
        assert_eq!((c.norm, c.trivial), (3, false));
        let c = reduced_norm_class(&StabilizerElement::scalar(Gr::from_int(3, n))).unwrap();
        assert_eq!((c.norm, c.trivial), (9, false));
        for k in 0..64u64 {
            let five = StabilizerElement::scalar(Gr::from_int(5, n)).pow(k);
            assert_eq!(reduced_norm_class(&five).unwrap().exponent, 2 * k % 64);
        }
        // 1 + S has norm −1
        let x = StabilizerElement::new(Gr::one(n), Gr::one(n), 0);
        assert_eq!(norm(&x).scalar, Gr::from_int(-1, n));
        assert!(reduced_norm_class(&x).unwrap().trivial);
        assert_eq!(reduced_norm_class(&StabilizerElement::scalar(Gr::from_int(5, n))).unwrap().digits, "010000");
        assert_eq!(reduced_norm_class(&StabilizerElement::s(n)), Err(StabilizerError::NotUnit));
    }

    #[test]
    fn parsing() {
        let x = parse_element("1, 2, 0, -1, 1", 4).unwrap();
        assert_eq!(x, StabilizerElement::new(Gr::new(1, 2, 4), Gr::new(0, -1, 4), 1));
        assert_eq!("4:1,2,0,-1,1".parse::<StabilizerElement>().unwrap(), x);
        assert!(parse_element("1,2", 4).is_err());
        assert!(parse_element("1,2,3,4,2", 4).is_err());
        assert_eq!(parse_element("1,0,0,0", 1), Err(StabilizerError::BadPrecision(1)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn norm_is_multiplicative(x in elt(8), y in elt(8)) {
            let (nx, ny, nxy) = (norm(&x), norm(&y), norm(&(x * y)));
            prop_assert_eq!(nxy.scalar, nx.scalar * ny.scalar);
            prop_assert_eq!(nxy.galois, nx.galois ^ ny.galois);
        }

        #[test]
        fn multiplication_is_associative(x in elt(6), y in elt(6), z in elt(6)) {
            prop_assert_eq!((x * y) * z, x * (y * z));
        }

        #[test]
        fn inverses(x in elt(6)) {
            prop_assume!(x.is_unit());
            let y = x.inverse().unwrap();
            prop_assert!((x * y).is_one());
            prop_assert!((y * x).is_one());
        }
    }
}
