//! Command implementations. Each returns the process exit code and writes
//! its report to the given sink, so the binary and the tests share one path.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use monotile::aperiodicity::torus_scan;
use monotile::dendrite::{order_listing, placement_order, verify_order};
use monotile::hexgrid::Region;
use monotile::render::{render_svg, RenderError, RenderStyle, StyleKind};
use monotile::solver::{solve_region, verify_patch, Outcome, Patch, PatchDoc, SolverConfig};
use monotile::tilemodel::search::{search_rulesets, SearchBudget, Template};
use monotile::tilemodel::{load_ruleset, shipped, RuleSet};
use monotile::Execution;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error(transparent)]
    Render(#[from] RenderError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn input(path: &Path, message: impl ToString) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// A shipped rule-set name, or a path to a rule-set document.
pub fn resolve_ruleset(spec: &str) -> Result<RuleSet, CliError> {
    if let Some(rs) = shipped(spec) {
        return Ok(rs);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "unknown rule set `{spec}` (shipped: unmarked, st12, hextoo6; or a file path)"
        )));
    }
    load_ruleset(&read(path)?).map_err(|e| input(path, e))
}

/// Loads a patch document, resolving its rule set by name unless one is
/// given explicitly.
pub fn load_patch(path: &Path, ruleset: Option<&str>) -> Result<Patch, CliError> {
    let doc = PatchDoc::parse(&read(path)?).map_err(|e| input(path, e))?;
    let rs = resolve_ruleset(ruleset.unwrap_or(&doc.ruleset))?;
    doc.to_patch(Arc::new(rs)).map_err(|e| input(path, e))
}

fn out<W: Write + ?Sized>(w: &mut W, text: &str) {
    let _ = w.write_all(text.as_bytes());
}

pub struct GenerateArgs {
    pub ruleset: String,
    pub radius: u32,
    pub seed: u64,
    pub node_limit: u64,
    pub out: PathBuf,
    pub svg: Option<PathBuf>,
    pub style: String,
}

pub fn generate<W: Write + ?Sized>(a: &GenerateArgs, w: &mut W) -> Result<i32, CliError> {
    let rs = Arc::new(resolve_ruleset(&a.ruleset)?);
    let style = RenderStyle::new(a.style.parse::<StyleKind>()?);
    let region = Region::hex(a.radius);
    let cfg = SolverConfig {
        seed: a.seed,
        node_limit: a.node_limit,
    };
    let result = solve_region(&region, &rs, &cfg);
    let stats = format!(
        "nodes {} propagations {} time {:.3}s",
        result.stats.nodes,
        result.stats.propagations,
        result.stats.elapsed.as_secs_f64()
    );
    match &result.outcome {
        Outcome::Sat(_) => {
            let p = result
                .to_patch(&region, &rs)
                .expect("solver output is a valid patch");
            write(&a.out, &p.to_json())?;
            if let Some(svg) = &a.svg {
                write(svg, &render_svg(&p, &style)?)?;
            }
            out(w, &format!("SAT: {} tiles ({stats})\n", p.len()));
            Ok(EXIT_OK)
        }
        Outcome::Unsat => {
            out(
                w,
                &format!("UNSAT: radius {} has no valid patch ({stats})\n", a.radius),
            );
            Ok(EXIT_FAIL)
        }
        Outcome::Limit => {
            out(
                w,
                &format!("LIMIT: node limit {} reached ({stats})\n", a.node_limit),
            );
            Ok(EXIT_LIMIT)
        }
    }
}

pub fn verify<W: Write + ?Sized>(
    path: &Path,
    ruleset: Option<&str>,
    w: &mut W,
) -> Result<i32, CliError> {
    let p = load_patch(path, ruleset)?;
    if p.is_empty() {
        out(w, "warning: no tiles\n");
    }
    let violations = verify_patch(&p);
    for v in &violations {
        let cells: Vec<String> = v.cells.iter().map(|c| c.to_string()).collect();
        out(
            w,
            &format!(
                "violation {} at {}: {}\n",
                v.clause,
                cells.join(" "),
                v.detail
            ),
        );
    }
    match placement_order(&p) {
        Ok(seq) => {
            let verdict = match verify_order(&p, &seq) {
                Ok(()) => "exists".to_string(),
                Err(e) => format!("invalid ({e})"),
            };
            out(w, &format!("placement order: {verdict}\n"));
        }
        Err(e) => out(w, &format!("placement order: none ({e})\n")),
    }
    out(
        w,
        &format!("{} tiles, {} violations\n", p.len(), violations.len()),
    );
    Ok(if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAIL
    })
}

pub fn order<W: Write + ?Sized, E: Write + ?Sized>(
    path: &Path,
    ruleset: Option<&str>,
    w: &mut W,
    err: &mut E,
) -> Result<i32, CliError> {
    let p = load_patch(path, ruleset)?;
    match placement_order(&p) {
        Ok(seq) => {
            out(w, &order_listing(&p, &seq));
            Ok(EXIT_OK)
        }
        Err(e) => {
            out(err, &format!("error: {e}\n"));
            Ok(EXIT_FAIL)
        }
    }
}

pub struct TorusScanArgs {
    pub ruleset: String,
    pub max_det: u32,
    pub node_limit: u64,
    pub out: PathBuf,
    pub sequential: bool,
}

pub fn torus_scan_cmd<W: Write + ?Sized>(a: &TorusScanArgs, w: &mut W) -> Result<i32, CliError> {
    if a.max_det == 0 {
        return Err(CliError::Usage("--max-det must be at least 1".into()));
    }
    let rs = resolve_ruleset(&a.ruleset)?;
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let cfg = SolverConfig {
        seed: 0,
        node_limit: a.node_limit,
    };
    let report = torus_scan(a.max_det, &rs, &cfg, exec);
    write(&a.out, &report.to_json())?;
    out(w, &report.summary_text());
    Ok(if report.exhaustive() {
        EXIT_OK
    } else {
        EXIT_LIMIT
    })
}

pub struct RenderArgs {
    pub patch: PathBuf,
    pub ruleset: Option<String>,
    pub style: String,
    pub size: f64,
    pub palette: Option<String>,
    pub out: PathBuf,
}

pub fn render(a: &RenderArgs) -> Result<i32, CliError> {
    let mut style = RenderStyle::new(a.style.parse::<StyleKind>()?);
    style.size = a.size;
    if let Some(spec) = &a.palette {
        style.palette.parse_overrides(spec)?;
    }
    let p = load_patch(&a.patch, a.ruleset.as_deref())?;
    write(&a.out, &render_svg(&p, &style)?)?;
    Ok(EXIT_OK)
}

pub struct SearchArgs {
    pub template: PathBuf,
    pub max_candidates: usize,
    pub node_limit: u64,
    pub out_dir: Option<PathBuf>,
}

pub fn search<W: Write + ?Sized>(a: &SearchArgs, w: &mut W) -> Result<i32, CliError> {
    let template = Template::parse(&read(&a.template)?).map_err(|e| input(&a.template, e))?;
    let budget = SearchBudget {
        max_candidates: a.max_candidates,
        node_limit: a.node_limit,
    };
    let found = search_rulesets(&template, &budget, Execution::default())
        .map_err(|e| input(&a.template, e))?;
    out(
        w,
        &format!(
            "{} instantiations, {} invalid, {} survivors{}\n",
            found.total,
            found.invalid,
            found.survivors.len(),
            if found.incomplete {
                " (incomplete)"
            } else {
                ""
            }
        ),
    );
    for (i, c) in found.survivors.iter().enumerate() {
        let choice: Vec<String> = c.choice.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out(
            w,
            &format!(
                "survivor {i}: {} hash {}\n",
                choice.join(" "),
                c.ruleset.hash()
            ),
        );
        if let Some(dir) = &a.out_dir {
            fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.clone(),
                source,
            })?;
            write(
                &dir.join(format!("{}-{i}.json", c.ruleset.name())),
                &c.ruleset.to_json(),
            )?;
        }
    }
    Ok(match (found.survivors.is_empty(), found.incomplete) {
        (false, _) => EXIT_OK,
        (true, false) => EXIT_FAIL,
        (true, true) => EXIT_LIMIT,
    })
}
