//! Charts of a page: one glyph per generator, η and ν lines between them.
//!
//! Only "base" generators are drawn: the leading monomial has no factor of
//! j and sits in the W-coordinate. Their ω-partners and j-multiples belong to
//! the module the glyph stands for.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Poly;
use crate::sseq::{Page, Sseq};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChartError {
    #[error("page {page} is out of range (pages run from 2 to {last})")]
    PageOutOfRange { page: u32, last: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartSpec {
    /// `None` draws E∞.
    pub page: Option<u32>,
    pub stem_min: i32,
    pub stem_max: i32,
    pub smax: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Glyph {
    /// W[[j]], free to the working precision.
    Free,
    /// F4[[j]].
    F4Tower,
    /// W[[j]]/(8, 2j).
    Eight,
    /// order 2, killed by j
    Bullet,
    /// order 4
    Circled,
    /// anything else, labelled by log2 of its order
    Other(u8),
}

impl Glyph {
    pub fn symbol(&self) -> &'static str {
        match self {
            Glyph::Free => "□",
            Glyph::F4Tower => "○",
            Glyph::Eight => "⊗",
            Glyph::Bullet => "•",
            Glyph::Circled => "◉",
            Glyph::Other(_) => "?",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartClass {
    pub stem: i32,
    pub s: i32,
    pub glyph: Glyph,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LineKind {
    Eta,
    Nu,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChartLine {
    pub kind: LineKind,
    pub from: (i32, i32),
    pub to: (i32, i32),
    /// The product is only hit by a j-multiple.
    pub dashed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    pub title: String,
    pub spec: ChartSpec,
    pub classes: Vec<ChartClass>,
    pub lines: Vec<ChartLine>,
}

fn j_divisible(sq: &Sseq, p: &Poly) -> bool {
    match sq.presentation().series_var() {
        Some(v) => p.keys().all(|m| m.exp(v) > 0),
        None => false,
    }
}

fn glyph_of(log_order: u8, n: u8, j_acts: bool) -> Glyph {
    match (log_order, j_acts) {
        (k, _) if k >= n => Glyph::Free,
        (1, true) => Glyph::F4Tower,
        (3, true) => Glyph::Eight,
        (1, false) => Glyph::Bullet,
        (2, _) => Glyph::Circled,
        (k, _) => Glyph::Other(k),
    }
}

fn select_page(sq: &Sseq, page: Option<u32>) -> Result<&Page, ChartError> {
    let last = sq.einfty().r;
    match page {
        None => Ok(sq.einfty()),
        Some(r) if (2..=last).contains(&r) => Ok(sq.page(r)),
        Some(r) => Err(ChartError::PageOutOfRange { page: r, last }),
    }
}

/// Computes the chart data; the window is clipped to the computed one.
pub fn build_chart(sq: &Sseq, spec: &ChartSpec) -> Result<Chart, ChartError> {
    let page = select_page(sq, spec.page)?;
    let pres = sq.presentation();
    let n = pres.precision();
    let w = sq.config().window;
    let jv = pres.series_var();
    let title = match spec.page {
        Some(r) if r < sq.einfty().r => format!("E_{r}"),
        _ => "E_inf".to_string(),
    };
    let eta = pres.parse("eta").ok();
    let nu = pres.parse("nu").ok();
    let j = pres.parse("j").ok();

    let mut classes = Vec::new();
    let mut reps: Vec<((i32, i32), Poly)> = Vec::new();
    let smax = spec.smax.min(w.smax);
    for stem in spec.stem_min.max(w.stem_min)..=spec.stem_max.min(w.stem_max) {
        for s in 0..=smax {
            let Some(sb) = sq.slice_basis(s, stem) else { continue };
            if !sq.is_reliable(page, s, stem) {
                continue;
            }
            for (v, k) in sq.quotient_generators(page, s, stem) {
                let first = v.iter().position(|&c| c != 0).unwrap_or(0);
                let mono = &sb.basis[first / 2].mono;
                if first % 2 == 1 || jv.is_some_and(|jv| mono.exp(jv) > 0) {
                    continue;
                }
                let x = sq.element_of(s, stem, &v);
                let j_acts = j.as_ref().is_some_and(|j| {
                    pres.mul(j, &x).ok().and_then(|jx| sq.reduce_on_page(page, &jx).ok().flatten()).is_some()
                });
                classes.push(ChartClass { stem, s, glyph: glyph_of(k, n, j_acts), label: pres.mono_name(mono) });
                reps.push(((stem, s), x));
            }
        }
    }

    let mut lines = Vec::new();
    for ((stem, s), x) in &reps {
        for (kind, g, dx) in [(LineKind::Eta, &eta, 1), (LineKind::Nu, &nu, 3)] {
            let to = (stem + dx, s + 1);
            if !classes.iter().any(|c| (c.stem, c.s) == to) {
                continue;
            }
            let Some(g) = g else { continue };
            let Ok(gx) = pres.mul(g, x) else { continue };
            if let Ok(Some(y)) = sq.reduce_on_page(page, &gx) {
                lines.push(ChartLine { kind, from: (*stem, *s), to, dashed: j_divisible(sq, &y) });
            }
        }
    }
    lines.sort();
    lines.dedup();
    Ok(Chart { title, spec: *spec, classes, lines })
}

impl Chart {
    fn cells(&self) -> BTreeMap<(i32, i32), Vec<&ChartClass>> {
        let mut m: BTreeMap<(i32, i32), Vec<&ChartClass>> = BTreeMap::new();
        for c in &self.classes {
            m.entry((c.stem, c.s)).or_default().push(c);
        }
        m
    }

    /// Text grid, top row is the highest filtration; columns are stems.
    pub fn to_ascii(&self) -> String {
        let sp = &self.spec;
        let cells = self.cells();
        let width = 3;
        let mut out = format!("{} (horizontal t-s, vertical s)\n", self.title);
        for s in (0..=sp.smax.max(0)).rev() {
            let _ = write!(out, "{s:>3} |");
            for stem in sp.stem_min..=sp.stem_max {
                let cell = match cells.get(&(stem, s)) {
                    Some(cs) if cs.len() == 1 => cs[0].glyph.symbol().to_string(),
                    Some(cs) => format!("{}{}", cs[0].glyph.symbol(), cs.len()),
                    None => ".".to_string(),
                };
                let _ = write!(out, "{cell:>width$}");
            }
            out.push('\n');
        }
        let cols = (sp.stem_max - sp.stem_min + 1).max(0) as usize;
        let _ = writeln!(out, "    +{}", "-".repeat(cols * width));
        // labels sit under every fourth column
        let first = sp.stem_min + (-sp.stem_min).rem_euclid(4);
        out.push_str(&" ".repeat(5 + width - 1 + ((first - sp.stem_min).max(0) as usize) * width));
        for stem in (first..=sp.stem_max).step_by(4) {
            let _ = write!(out, "{stem:<w$}", w = 4 * width);
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
        out
    }

    pub fn to_svg(&self) -> String {
        const U: i32 = 24;
        let sp = &self.spec;
        let cols = (sp.stem_max - sp.stem_min + 1).max(0);
        let rows = sp.smax.max(0) + 1;
        let (ml, mb, mt) = (40, 30, 24);
        let (w, h) = (ml + cols * U + 10, mt + rows * U + mb);
        let x = |stem: i32| ml + (stem - sp.stem_min) * U + U / 2;
        let y = |s: i32| mt + (rows - 1 - s) * U + U / 2;
        let mut out = String::new();
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="monospace" font-size="10">"#);
        let _ = writeln!(out, r#"<text x="{ml}" y="14">{} (t-s, s)</text>"#, self.title);
        let (x0, y0) = (ml, mt + rows * U);
        let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#, x0 + cols * U);
        let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{mt}" stroke="black"/>"#);
        for stem in sp.stem_min..=sp.stem_max {
            if stem.rem_euclid(4) == 0 {
                let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{stem}</text>"#, x(stem), y0 + 14);
            }
        }
        for s in (0..rows).step_by(2) {
            let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{s}</text>"#, x0 - 4, y(s) + 4);
        }
        for l in &self.lines {
            let dash = if l.dashed { r#" stroke-dasharray="3,2""# } else { "" };
            let color = match l.kind {
                LineKind::Eta => "black",
                LineKind::Nu => "gray",
            };
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}"{dash}/>"#,
                x(l.from.0),
                y(l.from.1),
                x(l.to.0),
                y(l.to.1)
            );
        }
        for ((stem, s), cs) in self.cells() {
            let k = cs.len() as i32;
            for (i, c) in cs.iter().enumerate() {
                let cx = x(stem) + (2 * i as i32 - (k - 1)) * 4;
                let _ = writeln!(
                    out,
                    r#"<text x="{cx}" y="{}" text-anchor="middle"><title>{}</title>{}</text>"#,
                    y(s) + 4,
                    c.label,
                    c.glyph.symbol()
                );
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glyph_legend() {
        assert_eq!(glyph_of(4, 4, true), Glyph::Free);
        assert_eq!(glyph_of(1, 4, true), Glyph::F4Tower);
        assert_eq!(glyph_of(3, 4, true), Glyph::Eight);
        assert_eq!(glyph_of(1, 4, false), Glyph::Bullet);
        assert_eq!(glyph_of(2, 4, false), Glyph::Circled);
        assert_eq!(glyph_of(3, 4, false), Glyph::Other(3));
    }

    #[test]
    fn empty_chart_has_axes() {
        let c = Chart {
            title: "E_2".into(),
            spec: ChartSpec { page: Some(2), stem_min: 0, stem_max: -1, smax: 3 },
            classes: vec![],
            lines: vec![],
        };
        let svg = c.to_svg();
        assert_eq!(svg.matches("<line").count(), 2);
        assert!(c.to_ascii().contains("  0 |"));
    }
}
