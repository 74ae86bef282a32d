//! Run configuration, assertion blocks and report files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentation::{json_error_pos, Presentation, PresentationError};
use crate::sseq::{g24_differentials, load_differentials, DetectionReport, Sseq, SseqConfig, SseqError, Window};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {error}")]
    Read { path: String, error: std::io::Error },
    #[error("{path}: {error}")]
    Write { path: String, error: std::io::Error },
    #[error("{path}: {msg}")]
    Config { path: String, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("{path}: {error}")]
    Presentation { path: String, error: PresentationError },
    #[error("{path}: {error}")]
    Differentials { path: String, error: SseqError },
    #[error(transparent)]
    Sseq(#[from] SseqError),
}

/// One assertion about E∞ in a stem. Unset fields are not checked.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    pub stem: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filtrations: Option<Vec<i32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empty: Option<bool>,
    /// Leading-monomial labels of the generators, in any order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<String>>,
    /// Restrict the check to filtrations s <= this bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_filtration: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionResult {
    pub assertion: Assertion,
    pub passed: bool,
    pub detail: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: u8,
    pub m: usize,
    pub guard: usize,
    pub stem_min: i32,
    pub stem_max: i32,
    pub smax: i32,
    pub stems: Vec<i32>,
    pub presentation: Option<PathBuf>,
    pub differentials: Option<PathBuf>,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub assertions: Vec<Assertion>,
}

impl Default for RunConfig {
    /// The stems and claims of the main computation: F4 in stem 45 at
    /// filtration 5, nothing in stems −1, 63, 127.
    fn default() -> Self {
        let w = Window::default();
        let empty = |stem| Assertion { stem, empty: Some(true), ..Default::default() };
        RunConfig {
            n: 4,
            m: 16,
            guard: 4,
            stem_min: w.stem_min,
            stem_max: w.stem_max,
            smax: w.smax,
            stems: vec![45, -1, 63, 127],
            presentation: None,
            differentials: None,
            out: PathBuf::from("out"),
            jobs: None,
            assertions: vec![
                Assertion {
                    stem: 45,
                    dimension: Some(2),
                    filtrations: Some(vec![5]),
                    classes: Some(vec!["D*kbar*eta".into(), "w*D*kbar*eta".into()]),
                    ..Default::default()
                },
                empty(-1),
                empty(63),
                empty(127),
            ],
        }
    }
}

impl RunConfig {
    pub fn from_json(src: &str, path: &str) -> Result<Self, IoError> {
        let cfg: RunConfig = serde_json::from_str(src).map_err(|e| IoError::Config {
            path: path.to_string(),
            msg: json_error_pos(&e),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let src = read(path)?;
        Self::from_json(&src, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), IoError> {
        if !(2..=8).contains(&self.n) {
            return Err(IoError::Invalid(format!("N = {} must lie in 2..=8", self.n)));
        }
        if self.m < 1 {
            return Err(IoError::Invalid("M must be at least 1".into()));
        }
        if self.stem_min > self.stem_max || self.smax < 0 {
            return Err(IoError::Invalid(format!(
                "empty window: stems {}..{}, s <= {}",
                self.stem_min, self.stem_max, self.smax
            )));
        }
        if self.jobs == Some(0) {
            return Err(IoError::Invalid("--jobs must be positive".into()));
        }
        Ok(())
    }

    pub fn window(&self) -> Window {
        Window { stem_min: self.stem_min, stem_max: self.stem_max, smax: self.smax }
    }

    pub fn sseq_config(&self) -> SseqConfig {
        SseqConfig { n: self.n, m: self.m, guard: self.guard, window: self.window(), jobs: self.jobs }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|error| IoError::Read { path: path.display().to_string(), error })
}

/// Builds the spectral sequence from the configured (or built-in) inputs.
pub fn run_sseq(cfg: &RunConfig) -> Result<Sseq, IoError> {
    cfg.validate()?;
    let sc = cfg.sseq_config();
    let pres = match &cfg.presentation {
        Some(p) => Presentation::from_json(&read(p)?, sc.presentation_config())
            .map_err(|error| IoError::Presentation { path: p.display().to_string(), error })?,
        None => Presentation::g24(sc.presentation_config())
            .map_err(|error| IoError::Presentation { path: "<built-in>".into(), error })?,
    };
    let specs = match &cfg.differentials {
        Some(p) => load_differentials(&pres, &read(p)?)
            .map_err(|error| IoError::Differentials { path: p.display().to_string(), error })?,
        None => g24_differentials(&pres)
            .map_err(|error| IoError::Differentials { path: "<built-in>".into(), error })?,
    };
    Ok(Sseq::run(pres, specs, sc)?)
}

pub fn check_assertion(a: &Assertion, r: &DetectionReport) -> AssertionResult {
    let mut detail = Vec::new();
    let bound = a.max_filtration.unwrap_or(i32::MAX);
    let mut r = r.clone();
    r.contributions.retain(|c| c.filtration <= bound);
    r.edge_unreliable.retain(|&s| s <= bound);
    r.total_f2_dimension = r.contributions.iter().map(|c| c.log_order as u32).sum();
    let mut filt: Vec<i32> = r.contributions.iter().map(|c| c.filtration).collect();
    filt.dedup();
    if let Some(d) = a.dimension {
        if r.total_f2_dimension != d {
            detail.push(format!("dimension {} (expected {d})", r.total_f2_dimension));
        }
    }
    if let Some(f) = &a.filtrations {
        if &filt != f {
            detail.push(format!("filtrations {filt:?} (expected {f:?})"));
        }
    }
    if let Some(e) = a.empty {
        let is_empty = r.total_f2_dimension == 0;
        if is_empty != e {
            let found: Vec<String> = r.contributions.iter().map(|c| format!("{} at s={}", c.label, c.filtration)).collect();
            detail.push(format!("empty = {is_empty} (expected {e}); found {}", found.join(", ")));
        }
    }
    if let Some(cl) = &a.classes {
        let mut got: Vec<&str> = r.contributions.iter().map(|c| c.label.as_str()).collect();
        let mut want: Vec<&str> = cl.iter().map(String::as_str).collect();
        got.sort();
        want.sort();
        if got != want {
            detail.push(format!("classes {got:?} (expected {want:?})"));
        }
    }
    if !r.edge_unreliable.is_empty() {
        detail.push(format!("filtrations {:?} are edge-unreliable", r.edge_unreliable));
    }
    let passed = detail.is_empty();
    AssertionResult { assertion: a.clone(), passed, detail }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: u8,
    pub m: usize,
    pub window: Window,
    pub assumption: String,
    pub undetermined_terms: usize,
    pub reports: Vec<DetectionReport>,
    pub assertions: Vec<AssertionResult>,
    pub passed: bool,
}

/// Detection for every requested or asserted stem, plus assertion verdicts.
pub fn run_report(sq: &Sseq, cfg: &RunConfig) -> RunReport {
    let mut stems = cfg.stems.clone();
    for a in &cfg.assertions {
        if !stems.contains(&a.stem) {
            stems.push(a.stem);
        }
    }
    let reports: Vec<DetectionReport> = stems.iter().map(|&s| sq.detect(s)).collect();
    let assertions: Vec<AssertionResult> = cfg
        .assertions
        .iter()
        .map(|a| check_assertion(a, reports.iter().find(|r| r.stem == a.stem).expect("stem detected")))
        .collect();
    let undetermined = sq.pages().iter().map(|p| p.assumptions.len()).sum();
    RunReport {
        n: cfg.n,
        m: cfg.m,
        window: cfg.window(),
        assumption: crate::sseq::ASSUMPTION.into(),
        undetermined_terms: undetermined,
        passed: assertions.iter().all(|a| a.passed),
        reports,
        assertions,
    }
}

/// Writes `run.json` and one `stem_<k>.json` per stem; returns the paths.
pub fn write_reports(report: &RunReport, out: &Path) -> Result<Vec<PathBuf>, IoError> {
    let werr = |p: &Path| {
        let path = p.display().to_string();
        move |error| IoError::Write { path, error }
    };
    fs::create_dir_all(out).map_err(werr(out))?;
    let mut written = Vec::new();
    let run = out.join("run.json");
    fs::write(&run, serde_json::to_string_pretty(report).expect("report serializes") + "\n").map_err(werr(&run))?;
    written.push(run);
    for r in &report.reports {
        let p = out.join(format!("stem_{}.json", r.stem));
        fs::write(&p, serde_json::to_string_pretty(r).expect("report serializes") + "\n").map_err(werr(&p))?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sseq::DetectedClass;

    fn report(classes: &[(i32, &str)]) -> DetectionReport {
        DetectionReport {
            stem: 45,
            page: "E_inf".into(),
            assumption: String::new(),
            precision_n: 4,
            precision_m: 16,
            contributions: classes
                .iter()
                .map(|(s, l)| DetectedClass {
                    filtration: *s,
                    label: l.to_string(),
                    representative: l.to_string(),
                    log_order: 1,
                    order: "2".into(),
                })
                .collect(),
            total_f2_dimension: classes.len() as u32,
            edge_unreliable: vec![],
        }
    }

    #[test]
    fn assertions() {
        let r = report(&[(5, "D*kbar*eta"), (5, "w*D*kbar*eta")]);
        let a = &RunConfig::default().assertions[0];
        assert!(check_assertion(a, &r).passed);
        let three = Assertion { stem: 45, dimension: Some(3), ..Default::default() };
        let res = check_assertion(&three, &r);
        assert!(!res.passed);
        assert_eq!(res.detail, ["dimension 2 (expected 3)"]);
        let empty = Assertion { stem: 45, empty: Some(true), ..Default::default() };
        assert!(!check_assertion(&empty, &r).passed);
        assert!(check_assertion(&empty, &report(&[])).passed);
        let mut edgy = report(&[]);
        edgy.edge_unreliable = vec![27];
        assert!(!check_assertion(&empty, &edgy).passed);
        let low = Assertion { max_filtration: Some(20), ..empty.clone() };
        assert!(check_assertion(&low, &edgy).passed);
        let mut more = report(&[(5, "D*kbar*eta"), (5, "w*D*kbar*eta"), (15, "x"), (15, "w*x")]);
        assert!(!check_assertion(a, &more).passed);
        more.edge_unreliable = vec![25];
        let a12 = Assertion { max_filtration: Some(12), ..a.clone() };
        assert!(check_assertion(&a12, &more).passed);
    }

    #[test]
    fn config_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_json(&cfg.to_json(), "x").unwrap(), cfg);
        let partial = RunConfig::from_json(r#"{"n": 3, "stems": [0]}"#, "x").unwrap();
        assert_eq!((partial.n, partial.m, partial.stems.clone()), (3, 16, vec![0]));
        let err = RunConfig::from_json("{\n  \"n\": 4,\n  \"bogus\": 1\n}", "cfg.json").unwrap_err();
        assert!(err.to_string().starts_with("cfg.json: 3:"), "{err}");
        assert!(RunConfig::from_json(r#"{"n": 1}"#, "x").is_err());
        assert!(RunConfig::from_json(r#"{"m": 0}"#, "x").is_err());
        assert!(RunConfig::from_json(r#"{"stem_min": 5, "stem_max": 4}"#, "x").is_err());
    }
}
