//! `hfpss`: run the spectral sequence, draw charts, and check the stabilizer
//! and duality bookkeeping.
//!
//! Exit codes: 0 success, 1 an assertion failed, 2 bad input or a failed
//! computation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hfpss::chart::{build_chart, ChartSpec};
use hfpss::io::{run_report, run_sseq, write_reports, IoError, RunConfig};
use hfpss::resolution::{
    check_collapse, duality_ledger, imported_tables, restrict_shift, tower_e1, HomotopyTable, SubgroupRegistry,
    TowerSpec,
};
use hfpss::stabilizer::{self, StabilizerElement};
use hfpss::{Gr, Presentation, PresentationConfig};

#[derive(Parser)]
#[command(name = "hfpss", version, about = "Homotopy fixed point spectral sequence for E^hG24 at p = 2")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spectral sequence runs.
    #[command(subcommand)]
    Sseq(SseqCmd),
    /// Draw a page as SVG and ASCII.
    Chart(ChartArgs),
    /// Computations in the stabilizer group.
    #[command(subcommand)]
    Stab(StabCmd),
    /// Duality bookkeeping.
    #[command(subcommand)]
    Dual(DualCmd),
}

#[derive(Subcommand)]
enum SseqCmd {
    /// Compute E_inf, write reports and check the config's assertions.
    Run(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// 2-adic precision.
    #[arg(short = 'N')]
    n: Option<u8>,
    /// j-adic precision.
    #[arg(short = 'M')]
    m: Option<usize>,
    /// Stems to report, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    stems: Option<Vec<i32>>,
    #[arg(long, allow_hyphen_values = true)]
    stem_min: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    stem_max: Option<i32>,
    /// Filtration bound.
    #[arg(long)]
    smax: Option<i32>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Presentation file (default: the built-in G24 presentation).
    #[arg(long)]
    presentation: Option<PathBuf>,
    /// Differential file (default: the built-in one).
    #[arg(long)]
    differentials: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, IoError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => { $(if let Some(v) = &self.$f { c.$f = v.clone(); })* };
        }
        over!(n, m, stems, stem_min, stem_max, smax, out);
        if self.jobs.is_some() {
            c.jobs = self.jobs;
        }
        if self.presentation.is_some() {
            c.presentation = self.presentation.clone();
        }
        if self.differentials.is_some() {
            c.differentials = self.differentials.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct ChartArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Page number, or "inf".
    #[arg(long, default_value = "inf")]
    page: String,
    /// Stem range of the chart (default: the run window).
    #[arg(long, allow_hyphen_values = true)]
    from: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<i32>,
    /// Print the ASCII chart as well as writing files.
    #[arg(long)]
    print: bool,
}

#[derive(Args, Clone, Copy)]
struct Precision {
    /// 2-adic precision.
    #[arg(short = 'N', default_value_t = 4)]
    n: u8,
}

#[derive(Subcommand)]
enum StabCmd {
    /// Reduced norm a·φ(a) − 2b·φ(b) of a + bS.
    Norm(ElemArgs),
    /// Class of a unit's norm in Z2^× / {±1}, as a 2-adic digit string.
    NormClass(ElemArgs),
    /// Every x = a + bS with x² = −1.
    FindOrder4 {
        #[command(flatten)]
        p: Precision,
        /// How many solutions to print.
        #[arg(long, default_value_t = 4)]
        show: usize,
    },
    /// Closure of named generators: i, j, w, S, phi, g (the Galois
    /// element of G48), -1.
    Closure {
        #[command(flatten)]
        p: Precision,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        gens: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        bound: usize,
    },
}

#[derive(Args)]
struct ElemArgs {
    #[command(flatten)]
    p: Precision,
    /// W-coordinate, e.g. 1, w, 1+2w.
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    /// S-coordinate.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    b: String,
    /// Compose with the Frobenius.
    #[arg(long)]
    galois: bool,
}

#[derive(Subcommand)]
enum DualCmd {
    /// The suspension shifts adding up to the duality shift.
    Ledger {
        #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
        k: i64,
        #[command(flatten)]
        p: Precision,
        #[arg(short = 'M', default_value_t = 16)]
        m: usize,
    },
    /// The shift for a finite subgroup of G48.
    Restrict {
        #[arg(long)]
        group: String,
        #[command(flatten)]
        p: Precision,
    },
    /// Differentials out of a spot of the duality resolution tower.
    Collapse {
        #[arg(long, default_value_t = 0)]
        s: i64,
        #[arg(long, default_value_t = 45, allow_hyphen_values = true)]
        t: i64,
        /// Directory of table files replacing the built-in ones by name.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
}

/// An assertion failed: exit 1.
#[derive(Debug)]
struct Failed;

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "assertions failed")
    }
}

impl std::error::Error for Failed {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Failed>() => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Sseq(SseqCmd::Run(a)) => sseq_run(&a),
        Cmd::Chart(a) => chart(&a),
        Cmd::Stab(c) => stab(c),
        Cmd::Dual(c) => dual(c),
    }
}

fn sseq_run(a: &RunArgs) -> Result<()> {
    let cfg = a.config()?;
    log::info!("window {:?}, N = {}, M = {}", cfg.window(), cfg.n, cfg.m);
    let sq = run_sseq(&cfg)?;
    let report = run_report(&sq, &cfg);
    let files = write_reports(&report, &cfg.out)?;
    println!("# {}", report.assumption);
    for r in &report.reports {
        let classes: Vec<String> =
            r.contributions.iter().map(|c| format!("{} (s={}, order {})", c.label, c.filtration, c.order)).collect();
        let edge = if r.edge_unreliable.is_empty() {
            String::new()
        } else {
            format!("; edge-unreliable s = {:?}", r.edge_unreliable)
        };
        println!("stem {:>4}: dim {} [{}]{edge}", r.stem, r.total_f2_dimension, classes.join(", "));
    }
    for res in &report.assertions {
        let verdict = if res.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {}: {}", serde_json::to_string(&res.assertion)?, res.detail.join("; "));
    }
    println!("wrote {} files to {}", files.len(), cfg.out.display());
    if report.passed {
        Ok(())
    } else {
        Err(Failed.into())
    }
}

fn chart(a: &ChartArgs) -> Result<()> {
    let cfg = a.run.config()?;
    let page = match a.page.as_str() {
        "inf" | "infty" => None,
        p => Some(p.parse::<u32>().with_context(|| format!("bad page {p:?}"))?),
    };
    let sq = run_sseq(&cfg)?;
    let spec = ChartSpec {
        page,
        stem_min: a.from.unwrap_or(cfg.stem_min),
        stem_max: a.to.unwrap_or(cfg.stem_max),
        smax: cfg.smax,
    };
    let c = build_chart(&sq, &spec)?;
    let dir = cfg.out.join("charts");
    fs::create_dir_all(&dir).with_context(|| dir.display().to_string())?;
    let stem = match page {
        Some(r) => format!("e{r}"),
        None => "einf".into(),
    };
    let ascii = c.to_ascii();
    for (ext, body) in [("svg", c.to_svg()), ("txt", ascii.clone())] {
        let p = dir.join(format!("{stem}.{ext}"));
        fs::write(&p, body).with_context(|| p.display().to_string())?;
        println!("wrote {}", p.display());
    }
    if a.print {
        print!("{ascii}");
    }
    println!("{} classes, {} lines", c.classes.len(), c.lines.len());
    Ok(())
}

/// Parses sums like "1", "w", "-3+2w", "2*w" into W(F4)/2^n.
fn parse_gr(s: &str, n: u8) -> Result<Gr> {
    let src = s.replace(' ', "");
    if src.is_empty() {
        bail!("empty coefficient");
    }
    let (mut a, mut b) = (0i64, 0i64);
    let mut rest = src.as_str();
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'-' => (-1, &rest[1..]),
            b'+' => (1, &rest[1..]),
            _ => (1, rest),
        };
        let end = body.find(['+', '-']).unwrap_or(body.len());
        let term = &body[..end];
        rest = &body[end..];
        let (coef, is_w) = match term.strip_suffix('w') {
            Some(c) => (c.strip_suffix('*').unwrap_or(c), true),
            None => (term, false),
        };
        let c: i64 = match (coef, is_w) {
            ("", true) => 1,
            _ => coef.parse().map_err(|_| anyhow!("bad coefficient {s:?}"))?,
        };
        if is_w {
            b += sign * c;
        } else {
            a += sign * c;
        }
    }
    Ok(Gr::new(a, b, n))
}

fn element(e: &ElemArgs) -> Result<StabilizerElement> {
    let n = e.p.n;
    if !(2..=8).contains(&n) {
        bail!("N = {n} must lie in 2..=8");
    }
    Ok(StabilizerElement::new(parse_gr(&e.a, n)?, parse_gr(&e.b, n)?, e.galois as u8))
}

fn named(name: &str, n: u8) -> Result<StabilizerElement> {
    Ok(match name {
        "i" | "j" => {
            let (i, j) = stabilizer::q8_generators(n)?;
            if name == "i" {
                i
            } else {
                j
            }
        }
        "w" | "omega" => StabilizerElement::omega(n),
        "S" => StabilizerElement::s(n),
        "phi" => StabilizerElement::phi(n),
        "g" => stabilizer::g48_generators(n)?[3],
        "-1" => StabilizerElement::scalar(Gr::from_int(-1, n)),
        _ => bail!("unknown generator {name:?} (expected i, j, w, S, phi, g, -1)"),
    })
}

fn stab(c: StabCmd) -> Result<()> {
    match c {
        StabCmd::Norm(e) => {
            let x = element(&e)?;
            let v = stabilizer::norm(&x);
            let s = v.scalar.as_int().expect("norms are scalars");
            if v.galois == 1 {
                println!("{s} ; phi");
            } else {
                println!("{s}");
            }
        }
        StabCmd::NormClass(e) => {
            let nc = stabilizer::reduced_norm_class(&element(&e)?)?;
            println!("{}", serde_json::to_string_pretty(&nc)?);
        }
        StabCmd::FindOrder4 { p, show } => {
            let sols = stabilizer::find_order4(p.n)?;
            let minus = StabilizerElement::scalar(Gr::from_int(-1, p.n));
            println!("{} solutions of x^2 = -1 mod 2^{}", sols.len(), p.n);
            for x in sols.iter().take(show) {
                let ok = *x * *x == minus;
                println!("x = {x}");
                println!("  x^2 = {} [{}]", *x * *x, if ok { "ok" } else { "FAIL" });
            }
            if !sols.iter().all(|x| *x * *x == minus) {
                bail!("a listed solution does not square to -1");
            }
        }
        StabCmd::Closure { p, gens, bound } => {
            let g: Vec<StabilizerElement> = gens.iter().map(|s| named(s, p.n)).collect::<Result<_>>()?;
            let c = stabilizer::subgroup_closure(&g, bound)?;
            let state = if c.stabilized { "stabilized" } else { "bound reached" };
            println!("order {}, {state}", c.order());
        }
    }
    Ok(())
}

fn load_tables(dir: Option<&Path>) -> Result<BTreeMap<String, HomotopyTable>> {
    let mut tables = imported_tables();
    if let Some(dir) = dir {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| dir.display().to_string())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for p in paths {
            let src = fs::read_to_string(&p).with_context(|| p.display().to_string())?;
            let t = HomotopyTable::from_json(&src).with_context(|| p.display().to_string())?;
            tables.insert(t.name.clone(), t);
        }
    }
    Ok(tables)
}

fn dual(c: DualCmd) -> Result<()> {
    match c {
        DualCmd::Ledger { k, p, m } => {
            let pres = if k == 2 {
                Some(Presentation::g24(PresentationConfig { n: p.n, m, ..Default::default() })?)
            } else {
                None
            };
            let l = duality_ledger(k, pres.as_ref())?;
            for (step, total) in l.steps.iter().zip(&l.partial) {
                println!("{:+4}  (running {total:+})  {}", step.shift, step.description);
                println!("      {}", step.anchor);
            }
            for note in &l.notes {
                println!("note: {note}");
            }
            println!("total {}", l.total);
        }
        DualCmd::Restrict { group, p } => {
            let reg = SubgroupRegistry::build(p.n)?;
            let r = restrict_shift(&reg, &group)?;
            for note in &r.notes {
                println!("# {note}");
            }
            println!("{}", r.shift);
        }
        DualCmd::Collapse { s, t, tables } => {
            let tables = load_tables(tables.as_deref())?;
            let spec = TowerSpec::duality();
            for e in tower_e1(&spec, t - s)? {
                println!("E1^({},{}) = {}  [table {} at {}]", e.s, e.t, e.describe(), e.table, e.table_degree);
            }
            let cert = check_collapse(&spec, &tables, (s, t))?;
            for l in &cert.lookups {
                println!("d{} -> ({},{}): {} at {} = {} ({})", l.r, l.s, l.t, l.table, l.degree, l.value, l.provenance);
            }
            println!("{:?}", cert.verdict);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients() {
        assert_eq!(parse_gr("w", 4).unwrap(), Gr::omega(4));
        assert_eq!(parse_gr("-3+2w", 4).unwrap(), Gr::new(-3, 2, 4));
        assert_eq!(parse_gr("1 + 2*w - w", 4).unwrap(), Gr::new(1, 1, 4));
        assert_eq!(parse_gr("-w", 4).unwrap(), Gr::new(0, -1, 4));
        assert!(parse_gr("x", 4).is_err());
        assert!(parse_gr("", 4).is_err());
    }
}
