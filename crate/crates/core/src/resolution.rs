//! Degree bookkeeping for the four-stage duality tower and its spectral
//! sequence, lookups in homotopy tables, and the ledger of suspension shifts
//! that adds up to 44.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::TruncatedSeries;
use crate::presentation::Presentation;
use crate::sseq::{load_differentials, verify_delta_squared_d3, DetectionReport, Sseq, DIFFERENTIALS_JSON};
use crate::stabilizer::{self, StabilizerElement, StabilizerError};
use crate::Gr;

pub const TABLE_G24_C6: &str = include_str!("../data/tables/g24_c6.json");
pub const TABLE_G24_G24: &str = include_str!("../data/tables/g24_g24.json");
pub const TABLE_G24: &str = include_str!("../data/tables/g24.json");

#[derive(Debug, Error)]
pub enum ResolutionError {
    #[error("no table named {0:?}")]
    MissingTable(String),
    #[error("bad tower: {0}")]
    BadTower(String),
    #[error("bad table {name:?}: {why}")]
    BadTable { name: String, why: String },
    #[error("{0:?} is not registered as a subgroup of G48")]
    NotRegistered(String),
    #[error("survival input failed: {0}")]
    Prerequisite(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
}

// ---- tables ----

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableValue {
    Zero,
    Unknown,
    Group(String),
}

impl TableValue {
    fn parse(s: &str) -> TableValue {
        match s {
            "zero" | "0" => TableValue::Zero,
            "unknown" => TableValue::Unknown,
            g => TableValue::Group(g.to_string()),
        }
    }
}

impl fmt::Display for TableValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableValue::Zero => write!(f, "zero"),
            TableValue::Unknown => write!(f, "unknown"),
            TableValue::Group(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub value: TableValue,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct TableFile {
    name: String,
    periodicity: i64,
    entries: Vec<TableFileEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct TableFileEntry {
    degree: i64,
    value: String,
    provenance: String,
}

/// Homotopy groups by degree mod a period. Absent degrees are unknown,
/// never zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomotopyTable {
    pub name: String,
    pub periodicity: i64,
    pub entries: BTreeMap<i64, TableEntry>,
}

impl HomotopyTable {
    pub fn new(name: &str, periodicity: i64) -> Self {
        assert!(periodicity > 0);
        HomotopyTable { name: name.to_string(), periodicity, entries: BTreeMap::new() }
    }

    pub fn from_json(src: &str) -> Result<Self, ResolutionError> {
        let f: TableFile = serde_json::from_str(src)?;
        if f.periodicity <= 0 {
            return Err(ResolutionError::BadTable { name: f.name, why: "periodicity must be positive".into() });
        }
        let mut t = HomotopyTable::new(&f.name, f.periodicity);
        for e in f.entries {
            let key = e.degree.rem_euclid(t.periodicity);
            if t.entries.contains_key(&key) {
                return Err(ResolutionError::BadTable { name: f.name, why: format!("degree {} listed twice", e.degree) });
            }
            t.entries.insert(key, TableEntry { value: TableValue::parse(&e.value), provenance: e.provenance });
        }
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        let f = TableFile {
            name: self.name.clone(),
            periodicity: self.periodicity,
            entries: self
                .entries
                .iter()
                .map(|(d, e)| TableFileEntry { degree: *d, value: e.value.to_string(), provenance: e.provenance.clone() })
                .collect(),
        };
        serde_json::to_string_pretty(&f).expect("table serializes")
    }

    pub fn insert(&mut self, degree: i64, value: TableValue, provenance: &str) {
        self.entries
            .insert(degree.rem_euclid(self.periodicity), TableEntry { value, provenance: provenance.to_string() });
    }

    pub fn lookup(&self, degree: i64) -> TableEntry {
        self.entries
            .get(&degree.rem_euclid(self.periodicity))
            .cloned()
            .unwrap_or(TableEntry { value: TableValue::Unknown, provenance: "no entry".into() })
    }
}

/// The shipped tables, keyed by name.
pub fn imported_tables() -> BTreeMap<String, HomotopyTable> {
    [TABLE_G24_C6, TABLE_G24_G24, TABLE_G24]
        .iter()
        .map(|src| HomotopyTable::from_json(src).expect("shipped table parses"))
        .map(|t| (t.name.clone(), t))
        .collect()
}

/// π_k E^{hG24} read off E_∞ in the given degrees (associated graded).
pub fn table_from_einfty(sq: &Sseq, degrees: &[i64]) -> HomotopyTable {
    let mut t = HomotopyTable::new("E^hG24 (E_inf)", 192);
    for &k in degrees {
        let r = sq.detect(k as i32);
        let (value, why) = einfty_value(&r);
        t.insert(k, value, &why);
    }
    t
}

fn einfty_value(r: &DetectionReport) -> (TableValue, String) {
    let why = format!("computed: E_inf at stem {}, {}", r.stem, r.assumption);
    if !r.edge_unreliable.is_empty() && r.total_f2_dimension == 0 {
        (TableValue::Unknown, format!("{why}; filtrations {:?} edge-unreliable", r.edge_unreliable))
    } else if r.total_f2_dimension == 0 {
        (TableValue::Zero, why)
    } else {
        let mut f: Vec<String> = r.contributions.iter().map(|c| c.filtration.to_string()).collect();
        f.dedup();
        (TableValue::Group(format!("order 2^{} (s = {})", r.total_f2_dimension, f.join(","))), why)
    }
}

/// E^{hQ8} ≃ E^{hG24} ∨ Σ^64 E^{hG24} ∨ Σ^128 E^{hG24}: degree k collects
/// the G24 table at k, k − 64 and k − 128.
pub fn q8_table(g24: &HomotopyTable, degrees: &[i64]) -> HomotopyTable {
    let mut t = HomotopyTable::new("E^hQ8", g24.periodicity);
    for &k in degrees {
        let parts: Vec<TableEntry> = [k, k - 64, k - 128].iter().map(|&d| g24.lookup(d)).collect();
        let value = if parts.iter().any(|p| p.value == TableValue::Unknown) {
            TableValue::Unknown
        } else if parts.iter().all(|p| p.value == TableValue::Zero) {
            TableValue::Zero
        } else {
            let gs: Vec<String> = parts.iter().filter(|p| p.value != TableValue::Zero).map(|p| p.value.to_string()).collect();
            TableValue::Group(gs.join(" + "))
        };
        let why = format!("derived: sum of {} at {}, {}, {}", g24.name, k, k - 64, k - 128);
        t.insert(k, value, &why);
    }
    t
}

// ---- the tower ----

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fiber {
    pub s: i64,
    /// F_s = Σ^shift E^{hH}.
    pub shift: i64,
    pub group: String,
    /// Table for π_* F(E^{hG24}, E^{hH}).
    pub table: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub fibers: Vec<Fiber>,
    pub periodicity: i64,
}

impl TowerSpec {
    /// F_0 = E^{hG24}, F_1 = Σ^{-1}E^{hC6}, F_2 = Σ^{-2}E^{hC6}, F_3 = Σ^{45}E^{hG24}.
    pub fn duality() -> Self {
        let f = |s, shift, group: &str, table: &str| Fiber { s, shift, group: group.into(), table: table.into() };
        TowerSpec {
            fibers: vec![
                f(0, 0, "G24", "F(E^hG24, E^hG24)"),
                f(1, -1, "C6", "F(E^hG24, E^hC6)"),
                f(2, -2, "C6", "F(E^hG24, E^hC6)"),
                f(3, 45, "G24", "F(E^hG24, E^hG24)"),
            ],
            periodicity: 192,
        }
    }

    pub fn validate(&self) -> Result<(), ResolutionError> {
        let mut seen: Vec<i64> = self.fibers.iter().map(|f| f.s).collect();
        seen.sort();
        if seen != [0, 1, 2, 3] {
            return Err(ResolutionError::BadTower(format!("filtrations {seen:?}, want 0..3 once each")));
        }
        if self.periodicity <= 0 {
            return Err(ResolutionError::BadTower("periodicity must be positive".into()));
        }
        Ok(())
    }

    pub fn fiber(&self, s: i64) -> Option<&Fiber> {
        self.fibers.iter().find(|f| f.s == s)
    }

    fn top(&self) -> i64 {
        self.fibers.iter().map(|f| f.s).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub r: i64,
    pub s: i64,
    pub t: i64,
}

/// E_1^{s,t} = π_t F(E^{hG24}, Σ^s F_s), converging to π_{t-s}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct E1Entry {
    pub s: i64,
    pub t: i64,
    pub group: String,
    /// The resolution term Σ^s F_s = Σ^{s+shift} E^{hH}.
    pub term: String,
    pub table: String,
    /// Degree to look up: t − s − shift.
    pub table_degree: i64,
    pub targets: Vec<Target>,
}

fn suspension(k: i64, group: &str) -> String {
    if k == 0 {
        format!("E^h{group}")
    } else {
        format!("Sigma^{k} E^h{group}")
    }
}

impl E1Entry {
    pub fn describe(&self) -> String {
        format!("pi_{} F(E^hG24, {})", self.t, self.term)
    }
}

pub fn tower_e1(spec: &TowerSpec, stem: i64) -> Result<Vec<E1Entry>, ResolutionError> {
    spec.validate()?;
    let top = spec.top();
    let mut out = Vec::new();
    for s in 0..=top {
        let f = spec.fiber(s).expect("validated");
        let t = stem + s;
        let targets = (1..=top - s).map(|r| Target { r, s: s + r, t: t + r - 1 }).collect();
        out.push(E1Entry {
            s,
            t,
            group: f.group.clone(),
            term: suspension(s + f.shift, &f.group),
            table: f.table.clone(),
            table_degree: t - s - f.shift,
            targets,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Collapses,
    Inconclusive,
    /// Some target group is nonzero: a differential is possible.
    Obstructed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Collapses => "collapses",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Obstructed => "obstructed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lookup {
    pub r: i64,
    pub s: i64,
    pub t: i64,
    pub group: String,
    pub table: String,
    pub degree: i64,
    pub value: String,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseCertificate {
    pub location: (i64, i64),
    pub verdict: Verdict,
    pub lookups: Vec<Lookup>,
}

/// Looks up every group the differentials out of E_1^{s,t} can hit.
pub fn check_collapse(
    spec: &TowerSpec,
    tables: &BTreeMap<String, HomotopyTable>,
    (s, t): (i64, i64),
) -> Result<CollapseCertificate, ResolutionError> {
    let stem = t - s;
    let e1 = tower_e1(spec, stem)?;
    let src = e1
        .iter()
        .find(|e| e.s == s)
        .ok_or_else(|| ResolutionError::BadTower(format!("no filtration {s}")))?;
    let mut lookups = Vec::new();
    for tg in &src.targets {
        let e = &e1[tg.s as usize];
        let table = tables.get(&e.table).ok_or_else(|| ResolutionError::MissingTable(e.table.clone()))?;
        // the target sits one stem lower than the source
        let degree = tg.t - tg.s - spec.fiber(tg.s).expect("validated").shift;
        let entry = table.lookup(degree);
        lookups.push(Lookup {
            r: tg.r,
            s: tg.s,
            t: tg.t,
            group: format!("pi_{} F(E^hG24, {})", tg.t, e.term),
            table: e.table.clone(),
            degree: degree.rem_euclid(table.periodicity),
            value: entry.value.to_string(),
            provenance: entry.provenance,
        });
    }
    let verdict = if lookups.iter().all(|l| l.value == "zero") {
        Verdict::Collapses
    } else if lookups.iter().any(|l| l.value == "unknown") {
        Verdict::Inconclusive
    } else {
        Verdict::Obstructed
    };
    Ok(CollapseCertificate { location: (s, t), verdict, lookups })
}

// ---- the shift ledger ----

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerStep {
    pub description: String,
    pub shift: i64,
    pub anchor: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftLedger {
    pub k: i64,
    pub steps: Vec<LedgerStep>,
    /// Running totals after each step.
    pub partial: Vec<i64>,
    pub total: i64,
    pub notes: Vec<String>,
}

impl ShiftLedger {
    /// Total after the permanent cycle step, i.e. the shift of
    /// F(E^{hG24}, E^{hG2^1}) over E^{hG24}[[Z2]].
    pub fn intermediate(&self) -> i64 {
        self.partial[1]
    }
}

/// Checks that the d3 obstructions to Δ²g(j) vanish, a ∈ 1..=4 with
/// g ∈ {1, 1 + j, ω}.
fn delta_squared_survives(pres: &Presentation) -> Result<(), ResolutionError> {
    let specs = load_differentials(pres, DIFFERENTIALS_JSON).map_err(|e| ResolutionError::Prerequisite(e.to_string()))?;
    let d3 = specs.iter().find(|s| s.r == 3).ok_or_else(|| ResolutionError::Prerequisite("no d3".into()))?;
    let (n, m) = (pres.precision(), pres.j_precision());
    let units = [
        TruncatedSeries::one(n, m),
        TruncatedSeries::from_coeffs(&[Gr::one(n), Gr::one(n)], n, m),
        TruncatedSeries::constant(Gr::omega(n), m),
    ];
    for a in 1..=4 {
        for g in &units {
            verify_delta_squared_d3(pres, d3, a, g).map_err(|e| ResolutionError::Prerequisite(format!("a = {a}: {e}")))?;
        }
    }
    Ok(())
}

/// −3 from F(E, E^{hG2^1}) ≃ Σ^{-3}E[[G2/G2^1]], +24k from the permanent
/// cycle Δ^k g(j), −1 from the cofiber of ψ − 1. The case of interest is k = 2;
/// k = 0 needs no survival input and gives the full-group shift −4.
pub fn duality_ledger(k: i64, pres: Option<&Presentation>) -> Result<ShiftLedger, ResolutionError> {
    let survival = match k {
        0 => "Delta^0 = 1 is a permanent cycle".to_string(),
        2 => {
            let p = pres.ok_or_else(|| ResolutionError::Prerequisite("needs the E2 presentation".into()))?;
            delta_squared_survives(p)?;
            "d3(Delta^2 eta j^(a-1) G c6 c4 eta) = Delta^2 j^a G kbar eta checked for a = 1..4".to_string()
        }
        _ => return Err(ResolutionError::Prerequisite(format!("no survival certificate for Delta^{k}"))),
    };
    let steps = vec![
        LedgerStep {
            description: "function spectrum F(E, E^hG2^1) = Sigma^-3 E[[G2/G2^1]]".into(),
            shift: -3,
            anchor: "pi_* F(E, E^hG2^1) = pi_* Sigma^-3 E[[G2/G2^1]]".into(),
        },
        LedgerStep {
            description: format!("permanent cycle Delta^{k} in H^0(G24, E_{})", 24 * k),
            shift: 24 * k,
            anchor: format!("F(E^hG24, E^hG2^1) = Sigma^(-3+24k) E^hG24[[G2/G2^1]]; {survival}"),
        },
        LedgerStep {
            description: "cofiber of psi - 1 on E^hG2^1 is Sigma L_K(2) S^0".into(),
            shift: -1,
            anchor: "E^hG2^1 -> E^hG2^1 -> Sigma L_K(2) S^0".into(),
        },
    ];
    let partial: Vec<i64> = steps
        .iter()
        .scan(0, |acc, s| {
            *acc += s.shift;
            Some(*acc)
        })
        .collect();
    let total = *partial.last().unwrap();
    Ok(ShiftLedger {
        k,
        steps,
        partial,
        total,
        notes: vec!["Galois descent: Gal_+ smash E^hG48 = E^hG24, so G48 and G24 have the same shift".into()],
    })
}

// ---- restriction to subgroups ----

/// Finite subgroups of G48 with generators in the stabilizer order, checked
/// by closure against G48.
#[derive(Debug, Clone)]
pub struct SubgroupRegistry {
    pub precision: u8,
    pub g48: Vec<StabilizerElement>,
    pub groups: BTreeMap<String, (Vec<StabilizerElement>, usize)>,
}

impl SubgroupRegistry {
    pub fn build(n: u8) -> Result<Self, ResolutionError> {
        let g48 = stabilizer::g48_generators(n)?;
        let (i, j) = (g48[0], g48[1]);
        let w = StabilizerElement::omega(n);
        let minus = StabilizerElement::scalar(Gr::from_int(-1, n));
        let mut groups = BTreeMap::new();
        let mut put = |name: &str, gens: Vec<StabilizerElement>, order: usize| {
            groups.insert(name.to_string(), (gens, order));
        };
        put("trivial", vec![StabilizerElement::one(n)], 1);
        put("C2", vec![minus], 2);
        put("C3", vec![w], 3);
        put("C4", vec![i], 4);
        put("C6", vec![minus * w], 6);
        put("Q8", vec![i, j], 8);
        put("G24", g48[..3].to_vec(), 24);
        put("G48", g48.clone(), 48);
        let reg = SubgroupRegistry { precision: n, g48, groups };
        reg.validate()?;
        Ok(reg)
    }

    fn validate(&self) -> Result<(), ResolutionError> {
        let all: HashSet<StabilizerElement> =
            stabilizer::subgroup_closure(&self.g48, 100)?.elements.into_iter().collect();
        if all.len() != 48 {
            return Err(ResolutionError::NotRegistered("G48".into()));
        }
        for (name, (gens, order)) in &self.groups {
            let c = stabilizer::subgroup_closure(gens, 100)?;
            if c.order() != *order || !c.elements.iter().all(|x| all.contains(x)) {
                return Err(ResolutionError::NotRegistered(name.clone()));
            }
        }
        Ok(())
    }

    pub fn order(&self, name: &str) -> Option<usize> {
        self.groups.get(name).map(|g| g.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictShift {
    pub group: String,
    pub order: usize,
    pub shift: i64,
    pub certificate: String,
    pub notes: Vec<String>,
}

/// DE^{hF} ≃ Σ^{44}E^{hF} for F ≤ G48, by restricting the permanent cycle
/// Δ² to F.
pub fn restrict_shift(reg: &SubgroupRegistry, group: &str) -> Result<RestrictShift, ResolutionError> {
    let order = reg.order(group).ok_or_else(|| ResolutionError::NotRegistered(group.to_string()))?;
    let mut notes = vec![format!("{group} (order {order}) lies in G48 at precision 2^{}", reg.precision)];
    if order == 1 {
        notes.push("DE = Sigma^-4 E as well; 44 - (-4) = 48 and E is 2-periodic, so the two agree".into());
    }
    Ok(RestrictShift {
        group: group.to_string(),
        order,
        shift: 44,
        certificate: "restriction of the permanent cycle Delta^2 g(j) from G24 to F".into(),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::PresentationConfig;
    use proptest::prelude::*;

    #[test]
    fn tables_parse() {
        let t = imported_tables();
        assert_eq!(t.len(), 3);
        let c6 = &t["F(E^hG24, E^hC6)"];
        assert_eq!(c6.lookup(45).value, TableValue::Zero);
        assert_eq!(c6.lookup(45 + 192 * 3).value, TableValue::Zero);
        assert_eq!(c6.lookup(47).value, TableValue::Unknown);
        assert_eq!(t["F(E^hG24, E^hG24)"].lookup(191).value, TableValue::Zero);
        let back = HomotopyTable::from_json(&c6.to_json()).unwrap();
        assert_eq!(&back, c6);
        let dup = r#"{"name":"x","periodicity":4,"entries":[{"degree":1,"value":"zero","provenance":""},{"degree":5,"value":"zero","provenance":""}]}"#;
        assert!(matches!(HomotopyTable::from_json(dup), Err(ResolutionError::BadTable { .. })));
    }

    #[test]
    fn tower_indexing() {
        let spec = TowerSpec::duality();
        let e = tower_e1(&spec, 45).unwrap();
        assert_eq!(e[0].describe(), "pi_45 F(E^hG24, E^hG24)");
        let tg: Vec<_> = e[0].targets.iter().map(|t| (t.s, t.t)).collect();
        assert_eq!(tg, [(1, 45), (2, 46), (3, 47)]);
        let e = tower_e1(&spec, 0).unwrap();
        assert_eq!(e[3].t, 3);
        assert_eq!(e[3].term, "Sigma^48 E^hG24");
        assert_eq!(e[3].table_degree, -45);
        assert!(e[3].targets.is_empty());
        let mut bad = spec.clone();
        bad.fibers.pop();
        assert!(tower_e1(&bad, 0).is_err());
    }

    #[test]
    fn collapse_at_45() {
        let spec = TowerSpec::duality();
        let tables = imported_tables();
        for n in [0i64, 1, -1, 5] {
            let c = check_collapse(&spec, &tables, (0, 45 + 192 * n)).unwrap();
            assert_eq!(c.verdict, Verdict::Collapses);
            let looked: Vec<_> = c.lookups.iter().map(|l| (l.table.as_str(), l.degree)).collect();
            assert_eq!(looked, [("F(E^hG24, E^hC6)", 45), ("F(E^hG24, E^hC6)", 46), ("F(E^hG24, E^hG24)", 191)]);
        }
        let c = check_collapse(&spec, &tables, (0, 44)).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        let c = check_collapse(&spec, &tables, (3, 50)).unwrap();
        assert_eq!(c.verdict, Verdict::Collapses);
        assert!(c.lookups.is_empty());
        let mut fewer = tables.clone();
        fewer.remove("F(E^hG24, E^hC6)");
        assert!(matches!(check_collapse(&spec, &fewer, (0, 45)), Err(ResolutionError::MissingTable(_))));
        let mut more = tables.clone();
        more.get_mut("F(E^hG24, E^hC6)").unwrap().insert(46, TableValue::Group("Z/2".into()), "test");
        assert_eq!(check_collapse(&spec, &more, (0, 45)).unwrap().verdict, Verdict::Obstructed);
    }

    #[test]
    fn ledger() {
        let pres = Presentation::g24(PresentationConfig { n: 4, m: 8, s_cap: 12 }).unwrap();
        let l = duality_ledger(2, Some(&pres)).unwrap();
        assert_eq!(l.total, 44);
        assert_eq!(l.intermediate(), 45);
        let l0 = duality_ledger(0, None).unwrap();
        assert_eq!(l0.total, -4);
        assert!(duality_ledger(2, None).is_err());
        assert!(duality_ledger(1, Some(&pres)).is_err());
        let mut rev = l.steps.clone();
        rev.reverse();
        assert_eq!(rev.iter().map(|s| s.shift).sum::<i64>(), l.total);
    }

    #[test]
    fn restriction() {
        let reg = SubgroupRegistry::build(6).unwrap();
        for g in ["G48", "G24", "Q8", "C6", "C4", "C3", "C2", "trivial"] {
            assert_eq!(restrict_shift(&reg, g).unwrap().shift, 44);
        }
        assert_eq!(restrict_shift(&reg, "trivial").unwrap().notes.len(), 2);
        assert!(matches!(restrict_shift(&reg, "C5"), Err(ResolutionError::NotRegistered(_))));
    }

    #[test]
    fn q8_from_g24() {
        let mut g = HomotopyTable::new("g", 192);
        for d in [-1, 63, 127, 64, 128] {
            g.insert(d, TableValue::Zero, "");
        }
        g.insert(0, TableValue::Group("Z/2".into()), "");
        // −1, 63, 127 are congruent mod 64, so each sums the same three groups
        let q = q8_table(&g, &[-1, 63, 127, 64, 1]);
        for d in [-1, 63, 127] {
            assert_eq!(q.lookup(d).value, TableValue::Zero);
        }
        assert_eq!(q.lookup(64).value, TableValue::Group("Z/2".into()));
        assert_eq!(q.lookup(1).value, TableValue::Unknown);
    }

    proptest! {
        #[test]
        fn targets_follow_convention(stem in -200i64..400) {
            for e in tower_e1(&TowerSpec::duality(), stem).unwrap() {
                prop_assert_eq!(e.t - e.s, stem);
                for t in &e.targets {
                    prop_assert_eq!((t.s - e.s, t.t - e.t), (t.r, t.r - 1));
                }
            }
        }

        #[test]
        fn verdicts_periodic(stem in -200i64..200, s in 0i64..4) {
            let (spec, tables) = (TowerSpec::duality(), imported_tables());
            let a = check_collapse(&spec, &tables, (s, stem + s)).unwrap().verdict;
            let b = check_collapse(&spec, &tables, (s, stem + s + 192)).unwrap().verdict;
            prop_assert_eq!(a, b);
        }

        #[test]
        fn adding_entries_keeps_collapse(d in 0i64..192) {
            let (spec, mut tables) = (TowerSpec::duality(), imported_tables());
            for t in tables.values_mut() {
                if !t.entries.contains_key(&d) {
                    t.insert(d, TableValue::Group("Z/2".into()), "extra");
                }
            }
            prop_assert_eq!(check_collapse(&spec, &tables, (0, 45)).unwrap().verdict, Verdict::Collapses);
        }
    }
}
