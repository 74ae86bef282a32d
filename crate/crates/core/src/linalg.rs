//! Submodules of (Z/2^N)^n in Howell form.
//!
//! Entries are stored as `u8`, so N ≤ 8. Row operations run on whole byte
//! slices and are masked lazily.

use std::fmt;

pub const MAX_LINALG_PRECISION: u8 = 8;

#[inline]
fn bmask(n: u8) -> u8 {
    if n >= 8 {
        0xff
    } else {
        (1u8 << n) - 1
    }
}

#[inline]
fn bval(x: u8, n: u8) -> u8 {
    if x == 0 {
        n
    } else {
        (x.trailing_zeros() as u8).min(n)
    }
}

fn binv_odd(x: u8) -> u8 {
    let mut y = x;
    for _ in 0..3 {
        y = y.wrapping_mul(2u8.wrapping_sub(x.wrapping_mul(y)));
    }
    y
}

/// `dst -= c * src` entrywise, masked.
#[inline]
pub fn axpy(dst: &mut [u8], c: u8, src: &[u8], m: u8) {
    if c == 0 {
        return;
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d = d.wrapping_sub(c.wrapping_mul(*s)) & m;
    }
}

#[inline]
fn scale_row(row: &mut [u8], c: u8, m: u8) {
    for x in row.iter_mut() {
        *x = x.wrapping_mul(c) & m;
    }
}

/// A submodule of (Z/2^N)^ncols, kept in reduced Howell form.
///
/// Each row has a pivot column holding 2^v and zeros to its left; entries
/// above a pivot are reduced mod 2^v. The Howell property (every element with
/// zeros in the first k columns is a combination of rows with pivot ≥ k) is
/// what makes kernels readable off the form.
#[derive(Clone, PartialEq, Eq)]
pub struct Span {
    n: u8,
    ncols: usize,
    rows: Vec<Vec<u8>>,
    pivots: Vec<(usize, u8)>,
}

impl fmt::Debug for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Span(N={}, cols={})", self.n, self.ncols)?;
        for r in &self.rows {
            writeln!(f, "  {:?}", r)?;
        }
        Ok(())
    }
}

impl Span {
    pub fn zero(n: u8, ncols: usize) -> Span {
        assert!((1..=MAX_LINALG_PRECISION).contains(&n));
        Span {
            n,
            ncols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(n: u8, ncols: usize) -> Span {
        let rows = (0..ncols)
            .map(|i| {
                let mut r = vec![0u8; ncols];
                r[i] = 1;
                r
            })
            .collect();
        Span::from_rows(n, ncols, rows)
    }

    pub fn from_rows(n: u8, ncols: usize, rows: Vec<Vec<u8>>) -> Span {
        assert!((1..=MAX_LINALG_PRECISION).contains(&n));
        let m = bmask(n);
        let mut work: Vec<Vec<u8>> = rows
            .into_iter()
            .map(|mut r| {
                assert_eq!(r.len(), ncols);
                for x in r.iter_mut() {
                    *x &= m;
                }
                r
            })
            .filter(|r| r.iter().any(|&x| x != 0))
            .collect();
        let mut out: Vec<Vec<u8>> = Vec::new();
        let mut pivots = Vec::new();
        for col in 0..ncols {
            if work.is_empty() {
                break;
            }
            let mut best: Option<(usize, u8)> = None;
            for (i, r) in work.iter().enumerate() {
                let v = bval(r[col], n);
                if v < n && best.is_none_or(|(_, bv)| v < bv) {
                    best = Some((i, v));
                    if v == 0 {
                        break;
                    }
                }
            }
            let Some((bi, v)) = best else { continue };
            let mut p = work.swap_remove(bi);
            let u = binv_odd(p[col] >> v);
            scale_row(&mut p, u, m);
            for r in work.iter_mut() {
                let c = r[col];
                if c != 0 {
                    axpy(r, c >> v, &p, m);
                }
            }
            for r in out.iter_mut() {
                let c = r[col];
                if c >> v != 0 {
                    axpy(r, c >> v, &p, m);
                }
            }
            if v > 0 {
                let mut sat = p.clone();
                scale_row(&mut sat, 1u8 << (n - v), m);
                if sat.iter().any(|&x| x != 0) {
                    work.push(sat);
                }
            }
            work.retain(|r| r.iter().any(|&x| x != 0));
            out.push(p);
            pivots.push((col, v));
        }
        Span {
            n,
            ncols,
            rows: out,
            pivots,
        }
    }

    pub fn precision(&self) -> u8 {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    /// (column, valuation) of each row's pivot.
    pub fn pivots(&self) -> &[(usize, u8)] {
        &self.pivots
    }

    /// log2 of the number of elements.
    pub fn log_order(&self) -> u32 {
        self.pivots.iter().map(|&(_, v)| (self.n - v) as u32).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Reduce `x` to its canonical representative modulo the span.
    pub fn reduce(&self, x: &mut [u8]) {
        let m = bmask(self.n);
        for x in x.iter_mut() {
            *x &= m;
        }
        for (r, &(col, v)) in self.rows.iter().zip(&self.pivots) {
            let c = x[col] >> v;
            if c != 0 {
                axpy(x, c, r, m);
            }
        }
    }

    pub fn contains(&self, x: &[u8]) -> bool {
        let mut y = x.to_vec();
        self.reduce(&mut y);
        y.iter().all(|&c| c == 0)
    }

    pub fn contains_span(&self, other: &Span) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    pub fn sum(&self, other: &Span) -> Span {
        assert_eq!(self.ncols, other.ncols);
        let rows = self.rows.iter().chain(&other.rows).cloned().collect();
        Span::from_rows(self.n, self.ncols, rows)
    }

    pub fn with_rows(&self, extra: impl IntoIterator<Item = Vec<u8>>) -> Span {
        let rows = self.rows.iter().cloned().chain(extra).collect();
        Span::from_rows(self.n, self.ncols, rows)
    }

    /// Smallest k with 2^k·x in the span.
    pub fn order_mod(&self, x: &[u8]) -> u8 {
        let m = bmask(self.n);
        let mut y = x.to_vec();
        for k in 0..=self.n {
            if self.contains(&y) {
                return k;
            }
            scale_row(&mut y, 2, m);
        }
        self.n
    }
}

/// Solve for the preimage of a span under a linear map.
///
/// `images[i]` is f(g_i) for generators g_i of a source module, given as
/// `gens[i]`. Returns the submodule of span(gens) mapped into `target`.
pub fn preimage(n: u8, gens: &[Vec<u8>], images: &[Vec<u8>], target: &Span) -> Span {
    let src = gens.first().map_or(0, |g| g.len());
    preimage_with_width(n, src, gens, images, target)
}

pub fn preimage_with_width(
    n: u8,
    src_cols: usize,
    gens: &[Vec<u8>],
    images: &[Vec<u8>],
    target: &Span,
) -> Span {
    let tcols = target.ncols();
    let mut rows = Vec::with_capacity(gens.len() + target.rows().len());
    for (g, im) in gens.iter().zip(images) {
        let mut r = Vec::with_capacity(tcols + src_cols);
        r.extend_from_slice(im);
        r.extend_from_slice(g);
        rows.push(r);
    }
    for b in target.rows() {
        let mut r = b.clone();
        r.resize(tcols + src_cols, 0);
        rows.push(r);
    }
    let h = Span::from_rows(n, tcols + src_cols, rows);
    let kernel: Vec<Vec<u8>> = h
        .rows()
        .iter()
        .zip(h.pivots())
        .filter(|(_, &(c, _))| c >= tcols)
        .map(|(r, _)| r[tcols..].to_vec())
        .collect();
    Span::from_rows(n, src_cols, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_span(n: u8, rows: &[Vec<u8>], ncols: usize) -> std::collections::BTreeSet<Vec<u8>> {
        let m = bmask(n);
        let mut set = std::collections::BTreeSet::new();
        set.insert(vec![0u8; ncols]);
        loop {
            let mut added = false;
            let cur: Vec<_> = set.iter().cloned().collect();
            for x in &cur {
                for r in rows {
                    let y: Vec<u8> = x.iter().zip(r).map(|(a, b)| a.wrapping_add(*b) & m).collect();
                    if set.insert(y) {
                        added = true;
                    }
                }
            }
            if !added {
                return set;
            }
        }
    }

    #[test]
    fn saturation_rows() {
        // span of (2, 1) in (Z/4)^2 contains (0, 2)
        let s = Span::from_rows(2, 2, vec![vec![2, 1]]);
        assert!(s.contains(&[0, 2]));
        assert!(!s.contains(&[0, 1]));
        assert_eq!(s.log_order(), 2);
    }

    #[test]
    fn kernel_of_multiplication_by_two() {
        // f: (Z/8) -> (Z/8), x ↦ 2x; kernel is 4Z/8
        let k = preimage(3, &[vec![1]], &[vec![2]], &Span::zero(3, 1));
        assert_eq!(k.log_order(), 1);
        assert!(k.contains(&[4]));
        assert!(!k.contains(&[2]));
    }

    proptest! {
        #[test]
        fn howell_matches_brute_force(
            n in 1u8..=3,
            raw in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 3), 0..4),
        ) {
            let s = Span::from_rows(n, 3, raw.clone());
            let all = brute_span(n, &raw, 3);
            prop_assert_eq!(1u64 << s.log_order(), all.len() as u64);
            for v in &all {
                prop_assert!(s.contains(v));
            }
            // canonical representatives: reduce is constant on cosets
            let m = bmask(n);
            for v in all.iter().take(8) {
                let mut a = vec![1u8, 2, 3];
                let mut b: Vec<u8> = a.iter().zip(v).map(|(x, y)| x.wrapping_add(*y) & m).collect();
                s.reduce(&mut a);
                s.reduce(&mut b);
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn preimage_matches_brute_force(
            n in 1u8..=3,
            f in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 2), 2),
            t in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 2), 0..2),
        ) {
            let m = bmask(n);
            let target = Span::from_rows(n, 2, t);
            let gens = vec![vec![1u8, 0], vec![0u8, 1]];
            let k = preimage(n, &gens, &f, &target);
            for x0 in 0..=m {
                for x1 in 0..=m {
                    let img: Vec<u8> = (0..2)
                        .map(|c| x0.wrapping_mul(f[0][c]).wrapping_add(x1.wrapping_mul(f[1][c])) & m)
                        .collect();
                    prop_assert_eq!(k.contains(&[x0, x1]), target.contains(&img));
                }
            }
        }
    }
}
