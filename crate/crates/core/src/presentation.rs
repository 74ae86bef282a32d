//! Bigraded presentation of the E2 page: generators, relations, a strong
//! Gröbner basis over W(F4)/2^N, normal forms and monomial bases.

use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{Gr, TruncatedSeries};
use crate::expr::{self, Expr, ParseError, Pos};
use crate::poly::{
    poly_add, poly_add_term, poly_mul, poly_mul_term, poly_scale, Monomial, Poly, MAX_VARS,
};

/// The shipped presentation.
pub const G24_JSON: &str = include_str!("../data/g24.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresentationError {
    #[error("malformed presentation file: {0}")]
    Json(String),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{pos}: unknown symbol {name:?}")]
    UnknownSymbol { name: String, pos: Pos },
    #[error("{pos}: negative power of non-invertible generator {name:?}")]
    NegativePower { name: String, pos: Pos },
    #[error("{pos}: exponent {exp} out of range")]
    BadExponent { exp: i64, pos: Pos },
    #[error("duplicate generator name {0:?}")]
    DuplicateName(String),
    #[error("too many generators (max {MAX_VARS} non-invertible)")]
    TooManyGenerators,
    #[error("at most one invertible and one series generator are supported")]
    BadSpecialGenerators,
    #[error("inconsistent bidegree system: {0}")]
    InconsistentBidegrees(String),
    #[error("bidegrees underdetermined for {0:?}")]
    UnderdeterminedBidegrees(Vec<String>),
    #[error("relation {relation:?} is not homogeneous")]
    Inhomogeneous { relation: String },
    #[error("declared order of {name} is {declared}, relations give {derived}")]
    OrderMismatch {
        name: String,
        declared: String,
        derived: String,
    },
    #[error("rewriting exceeded the step budget")]
    StepBudget,
    #[error("element is not homogeneous")]
    NotHomogeneous,
    #[error("window unbounded: exponent of {0} in filtration 0 is not bounded by the relations")]
    WindowUnbounded(String),
    #[error("term order weights must be positive except for the series generator ({0})")]
    BadWeights(String),
    #[error("precision N={0} unsupported (need 2..=8)")]
    BadPrecision(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    Given(i32),
    Infer(InferTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InferTag {
    Infer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    Finite(u32),
    Free(FreeTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FreeTag {
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    pub s: DegreeSpec,
    pub t: DegreeSpec,
    pub order: OrderSpec,
    #[serde(default)]
    pub invertible: bool,
    #[serde(default)]
    pub series: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermOrderFile {
    pub weights: BTreeMap<String, u16>,
    /// Highest priority first.
    pub priority: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresentationFile {
    pub name: String,
    pub generators: Vec<GeneratorFile>,
    /// Symbol → scalar; only "omega" is recognised.
    #[serde(default)]
    pub scalars: BTreeMap<String, String>,
    pub term_order: TermOrderFile,
    pub relations: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdditiveOrder {
    /// 2^k
    Pow2(u8),
    Free,
}

impl std::fmt::Display for AdditiveOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AdditiveOrder::Pow2(k) => write!(f, "{}", 1u64 << k),
            AdditiveOrder::Free => write!(f, "free"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub name: String,
    pub aliases: Vec<String>,
    pub bidegree: Option<(i32, i32)>,
    pub order: AdditiveOrder,
    pub invertible: bool,
    pub series: bool,
}

/// 2^e · lhs → rhs
#[derive(Debug, Clone, PartialEq)]
pub struct RewriteRule {
    pub e: u8,
    pub lhs: Monomial,
    pub rhs: Poly,
    mask: u16,
}

impl RewriteRule {
    fn from_poly(p: &Poly) -> RewriteRule {
        let (lm, lc) = p.last_key_value().expect("nonzero");
        let e = lc.valuation();
        debug_assert_eq!(*lc, Gr::one(lc.precision()).shl(e));
        let shift = -lm.d;
        let mut rhs = Poly::new();
        for (m, c) in p.iter() {
            if m == lm {
                continue;
            }
            rhs.insert(m.with_laurent(m.d + shift), -*c);
        }
        let lhs = lm.strip_laurent();
        RewriteRule {
            e,
            lhs,
            mask: lhs.support(),
            rhs,
        }
    }
}

/// How `normal_form` picks among applicable rules and pending terms.
pub enum Strategy<'a> {
    /// Largest term first, first applicable rule.
    Canonical,
    /// Random pending term and random applicable rule.
    Random(&'a mut dyn rand::RngCore),
}

#[derive(Debug, Clone, Copy)]
pub struct PresentationConfig {
    /// 2-adic precision N.
    pub n: u8,
    /// j-adic precision M (j^M = 0).
    pub m: usize,
    /// Filtration cap for the completion; rules are complete up to this s.
    pub s_cap: i32,
}

impl Default for PresentationConfig {
    fn default() -> Self {
        PresentationConfig { n: 4, m: 16, s_cap: 32 }
    }
}

#[derive(Debug, Clone)]
pub struct Relation {
    pub source: String,
    pub poly: Poly,
}

#[derive(Debug, Clone)]
pub struct Presentation {
    pub name: String,
    cfg: PresentationConfig,
    gens: Vec<GeneratorSpec>,
    /// generator index → variable index (None for the invertible one)
    var_of_gen: Vec<Option<usize>>,
    gen_of_var: Vec<usize>,
    nvars: usize,
    weights: [u16; MAX_VARS],
    inv_gen: Option<usize>,
    series_var: Option<usize>,
    var_s: [i32; MAX_VARS],
    var_t: [i32; MAX_VARS],
    inv_t: i32,
    symbols: HashMap<String, usize>,
    scalars: HashMap<String, Gr>,
    relations: Vec<Relation>,
    rules: Vec<RewriteRule>,
    step_budget: u64,
}

/// A basis element of a bidegree: monomial and log2 of its additive order
/// (N when free to precision).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisEntry {
    pub mono: Monomial,
    pub log_order: u8,
}

/// Irreducible monomials without Laurent factor, up to a filtration bound.
#[derive(Debug, Clone)]
pub struct StandardMonomials {
    pub smax: i32,
    by_class: HashMap<(i32, i32), Vec<(Monomial, i32, u8)>>,
    pub count: usize,
}

fn line_col_of(src: &str, needle: &str, from: usize) -> Option<(usize, Pos)> {
    let idx = src[from..].find(needle)? + from;
    let before = &src[..idx];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Some((idx + needle.len(), Pos { line, col }))
}

/// "line:col: message" for a JSON syntax or schema error.
pub(crate) fn json_error_pos(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
    format!("{}:{}: {msg}", e.line(), e.column())
}

impl Presentation {
    pub fn g24(cfg: PresentationConfig) -> Result<Presentation, PresentationError> {
        Presentation::from_json(G24_JSON, cfg)
    }

    pub fn from_json(src: &str, cfg: PresentationConfig) -> Result<Presentation, PresentationError> {
        let file: PresentationFile =
            serde_json::from_str(src).map_err(|e| PresentationError::Json(json_error_pos(&e)))?;
        Presentation::from_file(&file, Some(src), cfg)
    }

    pub fn from_file(
        file: &PresentationFile,
        raw: Option<&str>,
        cfg: PresentationConfig,
    ) -> Result<Presentation, PresentationError> {
        if !(2..=8).contains(&cfg.n) {
            return Err(PresentationError::BadPrecision(cfg.n));
        }
        let n = cfg.n;
        let mut gens = Vec::new();
        let mut symbols = HashMap::new();
        for (gi, g) in file.generators.iter().enumerate() {
            let order = match g.order {
                OrderSpec::Free(_) => AdditiveOrder::Free,
                OrderSpec::Finite(k) if k.is_power_of_two() => {
                    AdditiveOrder::Pow2(k.trailing_zeros() as u8)
                }
                OrderSpec::Finite(k) => {
                    return Err(PresentationError::Json(format!(
                        "order of {} must be a power of 2, got {k}",
                        g.name
                    )))
                }
            };
            let bidegree = match (g.s, g.t) {
                (DegreeSpec::Given(s), DegreeSpec::Given(t)) => Some((s, t)),
                _ => None,
            };
            gens.push(GeneratorSpec {
                name: g.name.clone(),
                aliases: g.aliases.clone(),
                bidegree,
                order,
                invertible: g.invertible,
                series: g.series,
            });
            for name in std::iter::once(&g.name).chain(&g.aliases) {
                if symbols.insert(name.clone(), gi).is_some() {
                    return Err(PresentationError::DuplicateName(name.clone()));
                }
            }
        }
        let mut scalars = HashMap::new();
        for (k, v) in &file.scalars {
            if symbols.contains_key(k) {
                return Err(PresentationError::DuplicateName(k.clone()));
            }
            match v.as_str() {
                "omega" => scalars.insert(k.clone(), Gr::omega(n)),
                other => {
                    return Err(PresentationError::Json(format!("unknown scalar {other:?}")))
                }
            };
        }
        let inv: Vec<usize> = (0..gens.len()).filter(|&i| gens[i].invertible).collect();
        let ser: Vec<usize> = (0..gens.len()).filter(|&i| gens[i].series).collect();
        if inv.len() > 1 || ser.len() > 1 || (inv.len() == 1 && ser.len() == 1 && inv[0] == ser[0]) {
            return Err(PresentationError::BadSpecialGenerators);
        }
        let inv_gen = inv.first().copied();

        // variable indices follow the priority list
        let mut gen_of_var = Vec::new();
        for name in &file.term_order.priority {
            let gi = *symbols
                .get(name)
                .ok_or_else(|| PresentationError::Json(format!("priority names unknown generator {name:?}")))?;
            if Some(gi) == inv_gen || gen_of_var.contains(&gi) {
                return Err(PresentationError::Json(format!("bad priority entry {name:?}")));
            }
            gen_of_var.push(gi);
        }
        for gi in 0..gens.len() {
            if Some(gi) != inv_gen && !gen_of_var.contains(&gi) {
                return Err(PresentationError::Json(format!(
                    "generator {} missing from priority list",
                    gens[gi].name
                )));
            }
        }
        if gen_of_var.len() > MAX_VARS || gen_of_var.len() > 16 {
            return Err(PresentationError::TooManyGenerators);
        }
        let mut var_of_gen = vec![None; gens.len()];
        for (v, &g) in gen_of_var.iter().enumerate() {
            var_of_gen[g] = Some(v);
        }
        let mut weights = [0u16; MAX_VARS];
        for (v, &g) in gen_of_var.iter().enumerate() {
            let w = file
                .term_order
                .weights
                .get(&gens[g].name)
                .copied()
                .unwrap_or(0);
            if w == 0 && !gens[g].series {
                return Err(PresentationError::BadWeights(gens[g].name.clone()));
            }
            weights[v] = w;
        }
        let series_var = ser.first().and_then(|&g| var_of_gen[g]);

        let mut pres = Presentation {
            name: file.name.clone(),
            cfg,
            nvars: gen_of_var.len(),
            gens,
            var_of_gen,
            gen_of_var,
            weights,
            inv_gen,
            series_var,
            var_s: [0; MAX_VARS],
            var_t: [0; MAX_VARS],
            inv_t: 0,
            symbols,
            scalars,
            relations: Vec::new(),
            rules: Vec::new(),
            step_budget: 50_000_000,
        };

        // parse relations
        let mut cursor = 0;
        let mut relations = Vec::new();
        for (ri, rel) in file.relations.iter().enumerate() {
            let origin = raw
                .and_then(|r| {
                    let quoted = serde_json::to_string(rel).ok()?;
                    let (end, pos) = line_col_of(r, &quoted, cursor)?;
                    cursor = end;
                    Some(Pos { line: pos.line, col: pos.col + 1 })
                })
                .unwrap_or(Pos { line: ri + 1, col: 1 });
            let shift = |e: ParseError| ParseError {
                pos: Pos {
                    line: origin.line + e.pos.line - 1,
                    col: if e.pos.line == 1 { origin.col + e.pos.col - 1 } else { e.pos.col },
                },
                msg: e.msg,
            };
            let chain = expr::parse_chain(rel, 1).map_err(shift)?;
            let mut polys = Vec::new();
            for e in &chain {
                polys.push(pres.eval(e).map_err(|err| match err {
                    PresentationError::UnknownSymbol { name, pos } => PresentationError::UnknownSymbol {
                        name,
                        pos: shift(ParseError { pos, msg: String::new() }).pos,
                    },
                    other => other,
                })?);
            }
            let all_zero = chain.contains(&Expr::Int(0));
            if all_zero {
                for p in polys {
                    if !p.is_empty() {
                        relations.push(Relation { source: rel.clone(), poly: p });
                    }
                }
            } else {
                for w in polys.windows(2) {
                    let mut p = w[0].clone();
                    poly_add(&mut p, &poly_scale(&w[1], -Gr::one(n)));
                    if !p.is_empty() {
                        relations.push(Relation { source: rel.clone(), poly: p });
                    }
                }
            }
        }
        pres.relations = relations;

        pres.infer_bidegrees()?;
        for r in &pres.relations {
            if pres.bidegree_of(&r.poly).is_none() {
                return Err(PresentationError::Inhomogeneous {
                    relation: r.source.clone(),
                });
            }
        }
        pres.complete()?;
        pres.check_orders()?;
        Ok(pres)
    }

    pub fn config(&self) -> PresentationConfig {
        self.cfg
    }

    pub fn precision(&self) -> u8 {
        self.cfg.n
    }

    pub fn j_precision(&self) -> usize {
        self.cfg.m
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        &self.gens
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn weights(&self) -> &[u16] {
        &self.weights[..]
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.symbols.get(name).copied()
    }

    pub fn var_of(&self, name: &str) -> Option<usize> {
        self.generator_index(name).and_then(|g| self.var_of_gen[g])
    }

    pub fn var_generator(&self, v: usize) -> &GeneratorSpec {
        &self.gens[self.gen_of_var[v]]
    }

    pub fn invertible_generator(&self) -> Option<&GeneratorSpec> {
        self.inv_gen.map(|g| &self.gens[g])
    }

    pub fn series_var(&self) -> Option<usize> {
        self.series_var
    }

    /// Internal degree of the invertible generator (the periodicity).
    pub fn period(&self) -> i32 {
        self.inv_t
    }

    pub fn bidegree_of_generator(&self, name: &str) -> Option<(i32, i32)> {
        self.generator_index(name).and_then(|g| self.gens[g].bidegree)
    }

    pub fn set_step_budget(&mut self, b: u64) {
        self.step_budget = b;
    }

    pub fn one(&self) -> Poly {
        let mut p = Poly::new();
        p.insert(Monomial::one(), Gr::one(self.cfg.n));
        p
    }

    pub fn mono_bidegree(&self, m: &Monomial) -> (i32, i32) {
        let mut s = 0;
        let mut t = self.inv_t * m.d as i32;
        for v in 0..self.nvars {
            s += self.var_s[v] * m.e[v] as i32;
            t += self.var_t[v] * m.e[v] as i32;
        }
        (s, t)
    }

    pub fn mono_s(&self, m: &Monomial) -> i32 {
        (0..self.nvars).map(|v| self.var_s[v] * m.e[v] as i32).sum()
    }

    /// Common bidegree of all terms, `None` if inhomogeneous; zero is
    /// homogeneous of every degree and reported as `Some((0,0))`.
    pub fn bidegree_of(&self, p: &Poly) -> Option<(i32, i32)> {
        let mut it = p.keys().map(|m| self.mono_bidegree(m));
        let first = it.next().unwrap_or((0, 0));
        it.all(|d| d == first).then_some(first)
    }

    pub fn var_monomial(&self, v: usize, k: u8) -> Monomial {
        let mut e = [0u8; MAX_VARS];
        e[v] = k;
        Monomial::build(e, 0, &self.weights)
    }

    pub fn laurent_monomial(&self, d: i16) -> Monomial {
        Monomial::one().with_laurent(d)
    }

    pub fn monomial(&self, e: &[(usize, u8)], d: i16) -> Monomial {
        let mut ex = [0u8; MAX_VARS];
        for &(v, k) in e {
            ex[v] += k;
        }
        Monomial::build(ex, d, &self.weights)
    }

    pub fn mul_mono(&self, a: &Monomial, b: &Monomial) -> Monomial {
        a.mul(b).expect("monomial exponent overflow")
    }

    pub fn quotient(&self, divisor: &Monomial, m: &Monomial) -> Monomial {
        divisor.quotient(m, &self.weights)
    }

    fn eval(&self, e: &Expr) -> Result<Poly, PresentationError> {
        let n = self.cfg.n;
        Ok(match e {
            Expr::Int(v) => {
                let mut p = Poly::new();
                poly_add_term(&mut p, Monomial::one(), Gr::from_int(*v, n));
                p
            }
            Expr::Sym(name, pos) => {
                let mut p = Poly::new();
                if let Some(c) = self.scalars.get(name) {
                    p.insert(Monomial::one(), *c);
                } else {
                    let g = *self.symbols.get(name).ok_or_else(|| PresentationError::UnknownSymbol {
                        name: name.clone(),
                        pos: *pos,
                    })?;
                    let m = match self.var_of_gen[g] {
                        Some(v) => self.var_monomial(v, 1),
                        None => self.laurent_monomial(1),
                    };
                    p.insert(m, Gr::one(n));
                }
                p
            }
            Expr::Add(a, b) => {
                let mut p = self.eval(a)?;
                poly_add(&mut p, &self.eval(b)?);
                p
            }
            Expr::Sub(a, b) => {
                let mut p = self.eval(a)?;
                poly_add(&mut p, &poly_scale(&self.eval(b)?, -Gr::one(n)));
                p
            }
            Expr::Neg(a) => poly_scale(&self.eval(a)?, -Gr::one(n)),
            Expr::Mul(a, b) => poly_mul(&self.eval(a)?, &self.eval(b)?),
            Expr::Pow(base, k, pos) => {
                let b = self.eval(base)?;
                if *k < 0 {
                    // only a bare invertible generator may carry a negative power
                    let ok = b.len() == 1
                        && b.iter().next().is_some_and(|(m, c)| {
                            c.is_one() && m.e.iter().all(|&x| x == 0) && m.d == 1
                        });
                    if !ok {
                        let name = match &**base {
                            Expr::Sym(s, _) => s.clone(),
                            _ => "expression".into(),
                        };
                        return Err(PresentationError::NegativePower { name, pos: *pos });
                    }
                    if *k < -(i16::MAX as i64) {
                        return Err(PresentationError::BadExponent { exp: *k, pos: *pos });
                    }
                    let mut p = Poly::new();
                    p.insert(self.laurent_monomial(*k as i16), Gr::one(n));
                    return Ok(p);
                }
                if *k > 255 {
                    return Err(PresentationError::BadExponent { exp: *k, pos: *pos });
                }
                let mut acc = self.one();
                for _ in 0..*k {
                    acc = poly_mul(&acc, &b);
                }
                acc
            }
        })
    }

    /// Parse an expression into an (unreduced) polynomial.
    pub fn parse(&self, src: &str) -> Result<Poly, PresentationError> {
        let e = expr::parse_expr(src, 1)?;
        self.eval(&e)
    }

    /// Parse and reduce to normal form.
    pub fn element(&self, src: &str) -> Result<Poly, PresentationError> {
        let p = self.parse(src)?;
        self.normal_form(&p)
    }

    fn infer_bidegrees(&mut self) -> Result<(), PresentationError> {
        let gens = self.gens.clone();
        let unknown: Vec<usize> = (0..gens.len()).filter(|&g| gens[g].bidegree.is_none()).collect();
        let col_of = |g: usize| unknown.iter().position(|&u| u == g);
        // exponent vector of a monomial over generator indices
        let gexp = |m: &Monomial| -> Vec<i64> {
            let mut v = vec![0i64; gens.len()];
            for (var, &g) in self.gen_of_var.iter().enumerate() {
                v[g] = m.e[var] as i64;
            }
            if let Some(ig) = self.inv_gen {
                v[ig] = m.d as i64;
            }
            v
        };
        // rows: coefficients for unknowns, rhs for s and t
        let mut rows: Vec<(Vec<i128>, i128, i128)> = Vec::new();
        for r in &self.relations {
            let terms: Vec<&Monomial> = r.poly.keys().collect();
            for w in terms.windows(2) {
                let a = gexp(w[0]);
                let b = gexp(w[1]);
                let mut coeffs = vec![0i128; unknown.len()];
                let (mut rs, mut rt) = (0i128, 0i128);
                for g in 0..gens.len() {
                    let diff = (a[g] - b[g]) as i128;
                    if diff == 0 {
                        continue;
                    }
                    match col_of(g) {
                        Some(c) => coeffs[c] += diff,
                        None => {
                            let (s, t) = gens[g].bidegree.unwrap();
                            rs -= diff * s as i128;
                            rt -= diff * t as i128;
                        }
                    }
                }
                if coeffs.iter().all(|&c| c == 0) {
                    if rs != 0 || rt != 0 {
                        return Err(PresentationError::Inhomogeneous {
                            relation: r.source.clone(),
                        });
                    }
                    continue;
                }
                rows.push((coeffs, rs, rt));
            }
        }
        let sol = solve_rational(&rows, unknown.len()).map_err(|e| match e {
            SolveError::Inconsistent => PresentationError::InconsistentBidegrees(
                "relations force conflicting degrees".into(),
            ),
            SolveError::Underdetermined(cols) => PresentationError::UnderdeterminedBidegrees(
                cols.into_iter().map(|c| gens[unknown[c]].name.clone()).collect(),
            ),
            SolveError::NonIntegral(c) => PresentationError::InconsistentBidegrees(format!(
                "non-integral bidegree for {}",
                gens[unknown[c]].name
            )),
        })?;
        for (c, &g) in unknown.iter().enumerate() {
            let (s, t) = sol[c];
            if s < 0 {
                return Err(PresentationError::InconsistentBidegrees(format!(
                    "negative filtration for {}",
                    gens[g].name
                )));
            }
            self.gens[g].bidegree = Some((s as i32, t as i32));
        }
        for (v, &g) in self.gen_of_var.iter().enumerate() {
            let (s, t) = self.gens[g].bidegree.unwrap();
            self.var_s[v] = s;
            self.var_t[v] = t;
        }
        if let Some(ig) = self.inv_gen {
            let (s, t) = self.gens[ig].bidegree.unwrap();
            if s != 0 || t == 0 {
                return Err(PresentationError::InconsistentBidegrees(
                    "invertible generator must have s = 0 and t ≠ 0".into(),
                ));
            }
            self.inv_t = t;
        }
        if let Some(sv) = self.series_var {
            if self.var_s[sv] != 0 || self.var_t[sv] != 0 {
                return Err(PresentationError::InconsistentBidegrees(
                    "series generator must have bidegree (0, 0)".into(),
                ));
            }
        }
        Ok(())
    }

    // ---- rewriting ----

    fn reduce_with(
        &self,
        rules: &[RewriteRule],
        p: &Poly,
        strategy: &mut Strategy<'_>,
    ) -> Result<Poly, PresentationError> {
        self.reduce_masked(rules, None, p, strategy)
    }

    fn reduce_masked(
        &self,
        rules: &[RewriteRule],
        alive: Option<&[bool]>,
        p: &Poly,
        strategy: &mut Strategy<'_>,
    ) -> Result<Poly, PresentationError> {
        let n = self.cfg.n;
        let mut todo: Poly = p.clone();
        let mut done: Poly = Poly::new();
        let mut steps: u64 = 0;
        let mut cands: Vec<usize> = Vec::new();
        loop {
            let (m, c) = match strategy {
                Strategy::Canonical => match todo.pop_last() {
                    Some(x) => x,
                    None => break,
                },
                Strategy::Random(rng) => {
                    if todo.is_empty() {
                        break;
                    }
                    let i = rng.gen_range(0..todo.len());
                    let k = *todo.keys().nth(i).unwrap();
                    let c = todo.remove(&k).unwrap();
                    (k, c)
                }
            };
            if c.is_zero() {
                continue;
            }
            steps += 1;
            if steps > self.step_budget {
                return Err(PresentationError::StepBudget);
            }
            let mask = m.support();
            cands.clear();
            let mut emin = n;
            for (i, r) in rules.iter().enumerate() {
                if r.mask & !mask == 0 && r.lhs.divides(&m) && alive.is_none_or(|a| a[i]) {
                    cands.push(i);
                    emin = emin.min(r.e);
                }
            }
            let v = c.valuation();
            let full: Vec<usize> = cands.iter().copied().filter(|&i| rules[i].e <= v).collect();
            let (ri, high) = if !full.is_empty() {
                let ri = match strategy {
                    Strategy::Canonical => full[0],
                    Strategy::Random(rng) => full[rng.gen_range(0..full.len())],
                };
                (ri, c.shr(rules[ri].e))
            } else if !cands.is_empty() {
                let low = c.low_bits(emin);
                let minimal: Vec<usize> = cands.iter().copied().filter(|&i| rules[i].e == emin).collect();
                let ri = match strategy {
                    Strategy::Canonical => minimal[0],
                    Strategy::Random(rng) => minimal[rng.gen_range(0..minimal.len())],
                };
                let high = c.shr(emin);
                if !low.is_zero() {
                    self.settle(&mut done, &mut todo, m, low, strategy);
                }
                (ri, high)
            } else {
                self.settle(&mut done, &mut todo, m, c, strategy);
                continue;
            };
            if high.is_zero() {
                continue;
            }
            let r = &rules[ri];
            let q = r.lhs.quotient(&m, &self.weights);
            for (tm, tc) in &r.rhs {
                let mm = tm.mul(&q).expect("monomial exponent overflow");
                let add = *tc * high;
                if done.contains_key(&mm) {
                    let old = done.remove(&mm).unwrap();
                    poly_add_term(&mut todo, mm, old);
                }
                poly_add_term(&mut todo, mm, add);
            }
        }
        Ok(done)
    }

    fn settle(&self, done: &mut Poly, todo: &mut Poly, m: Monomial, c: Gr, strategy: &Strategy<'_>) {
        match strategy {
            Strategy::Canonical => {
                // terms are emitted in decreasing order and never revisited
                poly_add_term(done, m, c);
            }
            Strategy::Random(_) => {
                if let Some(old) = done.remove(&m) {
                    // merged coefficient must be re-examined
                    poly_add_term(todo, m, old + c);
                } else {
                    done.insert(m, c);
                }
            }
        }
    }

    /// Fully reduced canonical representative.
    pub fn normal_form(&self, p: &Poly) -> Result<Poly, PresentationError> {
        self.reduce_with(&self.rules, p, &mut Strategy::Canonical)
    }

    pub fn normal_form_with(&self, p: &Poly, strategy: &mut Strategy<'_>) -> Result<Poly, PresentationError> {
        self.reduce_with(&self.rules, p, strategy)
    }

    pub fn is_normal(&self, p: &Poly) -> Result<bool, PresentationError> {
        Ok(self.normal_form(p)? == *p)
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Result<Poly, PresentationError> {
        self.normal_form(&poly_mul(a, b))
    }

    pub fn mul_monomial(&self, a: &Poly, m: &Monomial) -> Result<Poly, PresentationError> {
        self.normal_form(&poly_mul_term(a, m, Gr::one(self.cfg.n)))
    }

    /// Smallest e with 2^e·m in the span of leading terms (N if none).
    pub fn log_order_of(&self, m: &Monomial) -> u8 {
        let mut e = self.cfg.n;
        let mask = m.support();
        for r in &self.rules {
            if r.mask & !mask == 0 && r.lhs.divides(m) {
                e = e.min(r.e);
            }
        }
        e
    }

    /// Whether a monomial can appear in a normal form.
    pub fn is_standard(&self, m: &Monomial) -> bool {
        self.log_order_of(m) > 0
    }

    // ---- completion ----

    fn monic_normalize(&self, p: &mut Poly) {
        if let Some((_, lc)) = p.last_key_value() {
            let (_, u) = lc.unit_part().expect("nonzero");
            let ui = u.inverse().expect("unit");
            *p = poly_scale(p, ui);
        }
    }

    fn complete(&mut self) -> Result<(), PresentationError> {
        let n = self.cfg.n;
        let cap = self.cfg.s_cap;
        let mut input: Vec<Poly> = self.relations.iter().map(|r| r.poly.clone()).collect();
        // declared additive orders
        for (g, spec) in self.gens.iter().enumerate() {
            if let (AdditiveOrder::Pow2(k), Some(v)) = (spec.order, self.var_of_gen[g]) {
                if k < n {
                    let mut p = Poly::new();
                    p.insert(self.var_monomial(v, 1), Gr::one(n).shl(k));
                    input.push(p);
                }
            }
        }
        if let Some(sv) = self.series_var {
            let mut p = Poly::new();
            p.insert(self.var_monomial(sv, self.cfg.m.min(255) as u8), Gr::one(n));
            input.push(p);
        }
        input.sort_by_key(|p| {
            let m = p.last_key_value().map(|(m, _)| *m).unwrap_or_default();
            (self.mono_s(&m), m)
        });

        let mut basis: Vec<Option<Poly>> = Vec::new();
        let mut rules: Vec<RewriteRule> = Vec::new();
        let mut alive: Vec<usize> = Vec::new();
        let mut alive_flag: Vec<bool> = Vec::new();
        // (s-degree, lcm weight, kind, i, j)
        let mut queue: BinaryHeap<Reverse<(i32, u16, usize, usize)>> = BinaryHeap::new();
        let mut extra: Vec<Poly> = Vec::new();
        const APOLY: usize = usize::MAX;

        let mut pending: Vec<Poly> = input;
        loop {
            // insert pending polynomials
            while let Some(p) = pending.pop() {
                let mut r = self.reduce_masked(&rules, Some(&alive_flag), &p, &mut Strategy::Canonical)?;
                if r.is_empty() {
                    continue;
                }
                self.monic_normalize(&mut r);
                let rule = RewriteRule::from_poly(&r);
                let idx = rules.len();
                let lm = rule.lhs;
                let e = rule.e;
                // retire rules made redundant by the new leading term
                let mut keep = Vec::new();
                for &i in &alive {
                    let old = &rules[i];
                    if lm.divides(&old.lhs) && e <= old.e {
                        alive_flag[i] = false;
                        pending.push(basis[i].take().unwrap());
                    } else {
                        keep.push(i);
                    }
                }
                alive = keep;
                for &i in &alive {
                    let l = lm.lcm(&rules[i].lhs, &self.weights);
                    let s = self.mono_s(&l);
                    if s <= cap && !(e == 0 && rules[i].e == 0 && lm.coprime(&rules[i].lhs)) {
                        queue.push(Reverse((s, l.w, i, idx)));
                    }
                }
                if e > 0 {
                    let s = self.mono_s(&lm);
                    extra.push(poly_scale(&r, Gr::one(n).shl(n - e)));
                    queue.push(Reverse((s, lm.w, APOLY, extra.len() - 1)));
                }
                basis.push(Some(r));
                rules.push(rule);
                alive.push(idx);
                alive_flag.push(true);
            }
            let Some(Reverse((_, _, i, j))) = queue.pop() else { break };
            let sp = if i == APOLY {
                std::mem::take(&mut extra[j])
            } else {
                let (Some(f), Some(g)) = (&basis[i], &basis[j]) else { continue };
                self.spoly(&rules[i], f, &rules[j], g)
            };
            if !sp.is_empty() {
                pending.push(sp);
            }
        }

        // interreduce
        let mut fin: Vec<RewriteRule> = alive.iter().map(|&i| rules[i].clone()).collect();
        fin.sort_by_key(|a| (a.lhs, a.e));
        let mut out: Vec<RewriteRule> = Vec::new();
        for (k, r) in fin.iter().enumerate() {
            let redundant = fin.iter().enumerate().any(|(l, o)| {
                l != k && o.lhs.divides(&r.lhs) && o.e <= r.e && (o.lhs != r.lhs || o.e < r.e || l < k)
            });
            if !redundant {
                out.push(r.clone());
            }
        }
        let snapshot = out.clone();
        for r in out.iter_mut() {
            let others: Vec<RewriteRule> = snapshot.iter().filter(|o| **o != *r).cloned().collect();
            // reduce the tail; the leading term stays
            let tail = self.reduce_with(&others, &r.rhs, &mut Strategy::Canonical)?;
            let tail = self.reduce_with(&snapshot, &tail, &mut Strategy::Canonical)?;
            r.rhs = tail;
        }
        self.rules = out;
        Ok(())
    }

    fn spoly(&self, a: &RewriteRule, f: &Poly, b: &RewriteRule, g: &Poly) -> Poly {
        let n = self.cfg.n;
        let l = a.lhs.lcm(&b.lhs, &self.weights);
        let c = a.e.max(b.e);
        let fa = poly_mul_term(f, &a.lhs.quotient(&l, &self.weights), Gr::one(n).shl(c - a.e));
        let gb = poly_mul_term(g, &b.lhs.quotient(&l, &self.weights), Gr::one(n).shl(c - b.e));
        // leading monomials of f and g may carry a Laurent shift; align them
        let (lf, _) = f.last_key_value().unwrap();
        let (lg, _) = g.last_key_value().unwrap();
        let fa = crate::poly::poly_shift_laurent(&fa, -lf.d);
        let gb = crate::poly::poly_shift_laurent(&gb, -lg.d);
        let mut out = fa;
        poly_add(&mut out, &poly_scale(&gb, -Gr::one(n)));
        out
    }

    fn check_orders(&self) -> Result<(), PresentationError> {
        let n = self.cfg.n;
        for (g, spec) in self.gens.iter().enumerate() {
            let m = match self.var_of_gen[g] {
                Some(v) => self.var_monomial(v, 1),
                None => self.laurent_monomial(1),
            };
            let derived = self.log_order_of(&m);
            let declared = match spec.order {
                AdditiveOrder::Pow2(k) => k.min(n),
                AdditiveOrder::Free => n,
            };
            if derived != declared {
                return Err(PresentationError::OrderMismatch {
                    name: spec.name.clone(),
                    declared: spec.order.to_string(),
                    derived: if derived >= n {
                        "free".into()
                    } else {
                        (1u64 << derived).to_string()
                    },
                });
            }
        }
        Ok(())
    }

    // ---- bases ----

    /// All standard monomials (Laurent exponent 0) with filtration ≤ smax.
    pub fn standard_monomials(&self, smax: i32) -> Result<StandardMonomials, PresentationError> {
        let mut by_class: HashMap<(i32, i32), Vec<(Monomial, i32, u8)>> = HashMap::new();
        let mut count = 0usize;
        let mut e = [0u8; MAX_VARS];
        self.enumerate(0, &mut e, smax, &mut |m: Monomial, lo: u8| {
            let (s, t) = self.mono_bidegree(&m);
            let key = (s, if self.inv_t != 0 { t.rem_euclid(self.inv_t) } else { t });
            by_class.entry(key).or_default().push((m, t, lo));
            count += 1;
        })?;
        for v in by_class.values_mut() {
            v.sort();
        }
        Ok(StandardMonomials { smax, by_class, count })
    }

    fn enumerate(
        &self,
        var: usize,
        e: &mut [u8; MAX_VARS],
        smax: i32,
        out: &mut dyn FnMut(Monomial, u8),
    ) -> Result<(), PresentationError> {
        if var == self.nvars {
            let m = Monomial::build(*e, 0, &self.weights);
            let lo = self.log_order_of(&m);
            out(m, lo);
            return Ok(());
        }
        let s_now: i32 = (0..var).map(|v| self.var_s[v] * e[v] as i32).sum();
        let mut k: u32 = 0;
        loop {
            e[var] = k as u8;
            let m = Monomial::build(*e, 0, &self.weights);
            if s_now + self.var_s[var] * k as i32 > smax || !self.is_standard(&m) {
                break;
            }
            self.enumerate(var + 1, e, smax, out)?;
            k += 1;
            if k > 250 {
                e[var] = 0;
                return Err(PresentationError::WindowUnbounded(self.var_generator(var).name.clone()));
            }
        }
        e[var] = 0;
        Ok(())
    }

    /// Basis of bidegree (s, t): standard monomials with their additive orders.
    /// Ordered by j-exponent, then term order.
    pub fn basis_in(&self, std: &StandardMonomials, s: i32, t: i32) -> Vec<BasisEntry> {
        let key = (s, if self.inv_t != 0 { t.rem_euclid(self.inv_t) } else { t });
        let mut out: Vec<BasisEntry> = std
            .by_class
            .get(&key)
            .map(|v| {
                v.iter()
                    .filter_map(|&(m, mt, lo)| {
                        let d = if self.inv_t != 0 {
                            (t - mt) / self.inv_t
                        } else if t == mt {
                            0
                        } else {
                            return None;
                        };
                        Some(BasisEntry { mono: m.with_laurent(d as i16), log_order: lo })
                    })
                    .collect()
            })
            .unwrap_or_default();
        let sv = self.series_var;
        out.sort_by_key(|b| (sv.map_or(0, |v| b.mono.e[v]), b.mono));
        out
    }

    pub fn basis(&self, s: i32, t: i32, smax: i32) -> Result<Vec<BasisEntry>, PresentationError> {
        if s > smax {
            return Ok(Vec::new());
        }
        let std = self.standard_monomials(s)?;
        Ok(self.basis_in(&std, s, t))
    }

    // ---- display ----

    pub fn mono_name(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        if let Some(ig) = self.inv_gen {
            match m.d {
                0 => {}
                1 => parts.push(self.gens[ig].name.clone()),
                d => parts.push(format!("{}^{}", self.gens[ig].name, d)),
            }
        }
        for v in 0..self.nvars {
            if Some(v) == self.series_var {
                continue;
            }
            match m.e[v] {
                0 => {}
                1 => parts.push(self.var_generator(v).name.clone()),
                k => parts.push(format!("{}^{}", self.var_generator(v).name, k)),
            }
        }
        if let Some(sv) = self.series_var {
            match m.e[sv] {
                0 => {}
                1 => parts.push(self.var_generator(sv).name.clone()),
                k => parts.push(format!("{}^{}", self.var_generator(sv).name, k)),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// Terms in decreasing order, ASCII names.
    pub fn show(&self, p: &Poly) -> String {
        if p.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in p.iter().rev().enumerate() {
            let name = self.mono_name(m);
            let (neg, cs) = match c.as_int() {
                Some(v) if v < 0 => (true, (-v).to_string()),
                _ => (false, c.to_string()),
            };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if cs == "1" {
                out.push_str(&name);
            } else if name == "1" {
                out.push_str(&cs);
            } else {
                let _ = write!(out, "{cs}*{name}");
            }
        }
        out
    }

    /// Group terms by their j-free part, giving series coefficients.
    pub fn series_view(&self, p: &Poly) -> Vec<(Monomial, TruncatedSeries)> {
        let n = self.cfg.n;
        let m = self.cfg.m;
        let mut map: BTreeMap<Monomial, TruncatedSeries> = BTreeMap::new();
        for (mono, c) in p {
            let (base, k) = match self.series_var {
                Some(sv) => {
                    let mut e = mono.e;
                    let k = e[sv] as usize;
                    e[sv] = 0;
                    (Monomial::build(e, mono.d, &self.weights), k)
                }
                None => (*mono, 0),
            };
            let entry = map.entry(base).or_insert_with(|| TruncatedSeries::zero(n, m));
            if k < m {
                let mut coeffs = entry.coeffs().to_vec();
                coeffs[k] += *c;
                *entry = TruncatedSeries::from_coeffs(&coeffs, n, m);
            }
        }
        map.into_iter().collect()
    }

    /// Multiply by a series in j.
    pub fn mul_series(&self, p: &Poly, f: &TruncatedSeries) -> Result<Poly, PresentationError> {
        let mut sp = Poly::new();
        let sv = self.series_var;
        for (k, c) in f.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let m = match sv {
                Some(v) => self.var_monomial(v, k.min(255) as u8),
                None if k == 0 => Monomial::one(),
                None => continue,
            };
            poly_add_term(&mut sp, m, *c);
        }
        self.mul(p, &sp)
    }
}

enum SolveError {
    Inconsistent,
    Underdetermined(Vec<usize>),
    NonIntegral(usize),
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Copy)]
struct Q(i128, i128);

impl Q {
    fn new(p: i128, q: i128) -> Q {
        let g = gcd(p, q).max(1);
        let s = if q < 0 { -1 } else { 1 };
        Q(s * p / g, s * q / g)
    }
    fn sub(self, o: Q) -> Q {
        Q::new(self.0 * o.1 - o.0 * self.1, self.1 * o.1)
    }
    fn mul(self, o: Q) -> Q {
        Q::new(self.0 * o.0, self.1 * o.1)
    }
    fn div(self, o: Q) -> Q {
        Q::new(self.0 * o.1, self.1 * o.0)
    }
    fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Solve A·x = (bs, bt) over Q; requires a unique integral solution.
fn solve_rational(rows: &[(Vec<i128>, i128, i128)], ncols: usize) -> Result<Vec<(i64, i64)>, SolveError> {
    let mut m: Vec<Vec<Q>> = rows
        .iter()
        .map(|(a, s, t)| {
            let mut r: Vec<Q> = a.iter().map(|&x| Q::new(x, 1)).collect();
            r.push(Q::new(*s, 1));
            r.push(Q::new(*t, 1));
            r
        })
        .collect();
    let mut pivcol = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        let pv = m[row][col];
        for x in m[row].iter_mut() {
            *x = x.div(pv);
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col];
                let pr = m[row].clone();
                for (x, y) in m[r].iter_mut().zip(pr) {
                    *x = x.sub(f.mul(y));
                }
            }
        }
        pivcol.push(col);
        row += 1;
    }
    for r in row..m.len() {
        if !m[r][ncols].is_zero() || !m[r][ncols + 1].is_zero() {
            return Err(SolveError::Inconsistent);
        }
    }
    if pivcol.len() < ncols {
        let free = (0..ncols).filter(|c| !pivcol.contains(c)).collect();
        return Err(SolveError::Underdetermined(free));
    }
    let mut out = vec![(0, 0); ncols];
    for (r, &c) in pivcol.iter().enumerate() {
        let (s, t) = (m[r][ncols], m[r][ncols + 1]);
        if s.1 != 1 || t.1 != 1 {
            return Err(SolveError::NonIntegral(c));
        }
        out[c] = (s.0 as i64, t.0 as i64);
    }
    Ok(out)
}

/// Unique bidegree assignment making every relation homogeneous.
pub fn infer_bidegrees(
    file: &PresentationFile,
    cfg: PresentationConfig,
) -> Result<Vec<(String, (i32, i32))>, PresentationError> {
    let p = Presentation::from_file(file, None, cfg)?;
    Ok(p.gens
        .iter()
        .map(|g| (g.name.clone(), g.bidegree.unwrap()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn pres() -> &'static Presentation {
        static P: OnceLock<Presentation> = OnceLock::new();
        P.get_or_init(|| Presentation::g24(PresentationConfig { n: 4, m: 16, s_cap: 16 }).unwrap())
    }

    fn nf(src: &str) -> String {
        let p = pres();
        p.show(&p.element(src).unwrap())
    }

    #[test]
    fn inferred_bidegrees() {
        let p = pres();
        assert_eq!(p.bidegree_of_generator("mu"), Some((1, 6)));
        assert_eq!(p.bidegree_of_generator("eps"), Some((2, 10)));
        assert_eq!(p.bidegree_of_generator("kappa"), Some((2, 16)));
        assert_eq!(p.bidegree_of_generator("kbar"), Some((4, 24)));
    }

    #[test]
    fn stated_normal_forms() {
        assert_eq!(nf("eta*nu"), "0");
        assert_eq!(nf("c4*kbar"), "D*eta^4");
        assert_eq!(nf("c6*kbar"), "D*mu*eta^3");
        assert_eq!(nf("D^0*eta"), "eta");
        assert_eq!(nf("c4^2*eta^4"), "kbar*j");
        assert_eq!(nf("nu^2*kappa"), "4*kbar");
        assert_eq!(nf("eta*eps"), "nu^3");
        assert_eq!(nf("mu^2"), "c4*eta^2");
        assert_eq!(nf("mu*c4"), "c6*eta");
    }

    #[test]
    fn c6_squared_at_high_precision() {
        // 1728 = 2^6·27 survives at N = 8 only as 64·27 ≡ 192
        let p = Presentation::g24(PresentationConfig { n: 8, m: 8, s_cap: 4 }).unwrap();
        let x = p.element("c6^2").unwrap();
        let want = p.element("c4^3 - 1728*D").unwrap();
        assert_eq!(x, want);
        assert_eq!(p.show(&x), "D*j + 64*D");
        let p4 = pres();
        assert_eq!(p4.show(&p4.element("c6^2").unwrap()), "D*j");
    }

    #[test]
    fn additive_orders() {
        let p = pres();
        let lo = |s: &str| {
            let m = *p.element(s).unwrap().keys().next().unwrap();
            p.log_order_of(&m)
        };
        assert_eq!(lo("nu"), 2);
        assert_eq!(lo("kbar"), 3);
        assert_eq!(lo("eta"), 1);
        assert_eq!(lo("c4"), 4);
        assert_eq!(lo("kbar*j"), 1);
    }

    #[test]
    fn bases() {
        let p = pres();
        let std = p.standard_monomials(6).unwrap();
        let b00 = p.basis_in(&std, 0, 0);
        assert_eq!(b00.len(), 16);
        assert_eq!(p.mono_name(&b00[0].mono), "1");
        assert!(b00.iter().all(|b| b.log_order == 4));
        let b14 = p.basis_in(&std, 1, 4);
        assert_eq!(b14.len(), 1);
        assert_eq!(p.mono_name(&b14[0].mono), "nu");
        assert_eq!(b14[0].log_order, 2);
        let b550 = p.basis_in(&std, 5, 50);
        let e = b550.iter().find(|b| p.mono_name(&b.mono) == "D*kbar*eta").unwrap();
        assert_eq!(e.log_order, 1);
    }

    #[test]
    fn delta_is_a_bijection_on_bases() {
        let p = pres();
        let std = p.standard_monomials(8).unwrap();
        for s in 0..=8 {
            for t in -40..120 {
                let a = p.basis_in(&std, s, t);
                let b = p.basis_in(&std, s, t + 24);
                assert_eq!(a.len(), b.len());
                for (x, y) in a.iter().zip(&b) {
                    assert_eq!(x.mono.with_laurent(x.mono.laurent() + 1), y.mono);
                    assert_eq!(x.log_order, y.log_order);
                }
            }
        }
    }

    #[test]
    fn relation_errors_have_positions() {
        let bad = G24_JSON.replacen("\"mu^2 = eta^2*c4\"", "\"mu^2 = eta^2*c4 +\"", 1);
        assert_ne!(bad, G24_JSON);
        let err = Presentation::from_json(&bad, PresentationConfig::default()).unwrap_err();
        match err {
            PresentationError::Parse(e) => assert!(e.pos.line > 1, "{e}"),
            other => panic!("{other}"),
        }
        let bad = G24_JSON.replacen("\"mu^2 = eta^2*c4\"", "\"mu^2 = eta^2*c5\"", 1);
        let err = Presentation::from_json(&bad, PresentationConfig::default()).unwrap_err();
        assert!(matches!(err, PresentationError::UnknownSymbol { .. }), "{err}");
    }

    #[test]
    fn underdetermined_without_nu() {
        let mut file: PresentationFile = serde_json::from_str(G24_JSON).unwrap();
        for g in file.generators.iter_mut() {
            if g.name == "nu" {
                g.s = DegreeSpec::Infer(InferTag::Infer);
                g.t = DegreeSpec::Infer(InferTag::Infer);
            }
        }
        let err = Presentation::from_file(&file, None, PresentationConfig { n: 4, m: 4, s_cap: 4 }).unwrap_err();
        assert!(matches!(err, PresentationError::UnderdeterminedBidegrees(_)), "{err}");
    }

    #[test]
    fn confluence_under_random_strategies() {
        let p = pres();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let names = ["eta", "nu", "mu", "eps", "kappa", "kbar", "c4", "c6", "j", "D"];
        for _ in 0..200 {
            let mut src = String::from("1");
            for _ in 0..rng.gen_range(2..7) {
                let g = names[rng.gen_range(0..names.len())];
                src.push_str(&format!("*{}", g));
            }
            let raw = p.parse(&src).unwrap();
            let a = p.normal_form(&raw).unwrap();
            let b = p.normal_form_with(&raw, &mut Strategy::Random(&mut rng)).unwrap();
            assert_eq!(a, b, "{src}");
        }
    }
}
