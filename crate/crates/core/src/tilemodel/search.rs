//! Enumerating rule sets from a template with free parameters.
//!
//! A template is a rule-set document plus a list of free parameters. Each
//! parameter names one or more JSON pointers into the document and a list of
//! choices, one value per pointer. Instantiations are the cartesian product
//! of all choices in lexicographic order (first parameter slowest).
//!
//! ```json
//! {
//!   "template": { "name": "demo", ... },
//!   "free": [
//!     { "name": "male_edge", "pointers": ["/male_edge_offset/0/edge"],
//!       "choices": [[0], [1], [2]] }
//!   ]
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{load_ruleset, RuleSet, RuleSetError};
use crate::exec::Execution;
use crate::hexgrid::{Region, TorusBasis};
use crate::solver::{solve_region, solve_torus, Outcome, SolverConfig};

/// Radius of the region every survivor must be able to fill.
pub const FILTER_RADIUS: u32 = 2;
/// Every torus up to this determinant must be unsatisfiable.
pub const FILTER_MAX_DET: u32 = 4;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FreeParam {
    pub name: String,
    pub pointers: Vec<String>,
    pub choices: Vec<Vec<Value>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Template {
    pub template: Value,
    #[serde(default)]
    pub free: Vec<FreeParam>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Instantiations evaluated at most; the rest are skipped.
    pub max_candidates: usize,
    /// Node limit for each individual solver call.
    pub node_limit: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_candidates: 4096,
            node_limit: 200_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Candidate {
    /// Index of the chosen value for each free parameter, by name.
    pub choice: BTreeMap<String, usize>,
    pub ruleset: RuleSet,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub survivors: Vec<Candidate>,
    /// Instantiations generated in total.
    pub total: usize,
    /// Instantiations that were not valid rule-set documents.
    pub invalid: usize,
    /// True when some instantiation was skipped or a solver call hit its
    /// node limit; absent candidates are then not proven to fail.
    pub incomplete: bool,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("template: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("free parameter `{name}`: {message}")]
    Param { name: String, message: String },
}

impl Template {
    pub fn parse(text: &str) -> Result<Template, SearchError> {
        Ok(serde_json::from_str(text)?)
    }

    fn check(&self) -> Result<(), SearchError> {
        for p in &self.free {
            let err = |message: String| SearchError::Param {
                name: p.name.clone(),
                message,
            };
            if p.choices.is_empty() {
                return Err(err("no choices".into()));
            }
            for (i, c) in p.choices.iter().enumerate() {
                if c.len() != p.pointers.len() {
                    return Err(err(format!(
                        "choice {i} has {} values for {} pointers",
                        c.len(),
                        p.pointers.len()
                    )));
                }
            }
            for ptr in &p.pointers {
                if self.template.pointer(ptr).is_none() {
                    return Err(err(format!("pointer `{ptr}` does not resolve")));
                }
            }
        }
        Ok(())
    }

    /// Number of instantiations.
    pub fn size(&self) -> usize {
        self.free.iter().map(|p| p.choices.len()).product()
    }

    /// Choice indices of instantiation `n` in lexicographic order.
    fn choice_vector(&self, mut n: usize) -> Vec<usize> {
        let mut out = vec![0; self.free.len()];
        for (i, p) in self.free.iter().enumerate().rev() {
            out[i] = n % p.choices.len();
            n /= p.choices.len();
        }
        out
    }

    fn instantiate(&self, choice: &[usize]) -> Result<RuleSet, RuleSetError> {
        let mut doc = self.template.clone();
        for (p, &c) in self.free.iter().zip(choice) {
            for (ptr, v) in p.pointers.iter().zip(&p.choices[c]) {
                *doc.pointer_mut(ptr).expect("pointer checked") = v.clone();
            }
        }
        load_ruleset(&doc.to_string())
    }
}

enum Verdict {
    Pass,
    Fail,
    Limit,
}

fn evaluate(rs: &RuleSet, node_limit: u64) -> Verdict {
    let cfg = SolverConfig {
        seed: 0,
        node_limit,
    };
    match solve_region(&Region::hex(FILTER_RADIUS), rs, &cfg).outcome {
        Outcome::Sat(_) => {}
        Outcome::Unsat => return Verdict::Fail,
        Outcome::Limit => return Verdict::Limit,
    }
    let mut limited = false;
    for b in TorusBasis::canonical_bases(FILTER_MAX_DET) {
        match solve_torus(&b, rs, &cfg).expect("canonical basis").outcome {
            Outcome::Sat(_) => return Verdict::Fail,
            Outcome::Unsat => {}
            Outcome::Limit => limited = true,
        }
    }
    if limited {
        Verdict::Limit
    } else {
        Verdict::Pass
    }
}

/// Expands `template` and keeps every instantiation whose radius-2 region is
/// satisfiable and whose tori up to determinant 4 are all unsatisfiable.
pub fn search_rulesets(
    template: &Template,
    budget: &SearchBudget,
    exec: Execution,
) -> Result<SearchOutcome, SearchError> {
    template.check()?;
    let total = template.size();
    let evaluated: Vec<usize> = (0..total.min(budget.max_candidates)).collect();
    let results = exec.map(&evaluated, |&n| {
        let choice = template.choice_vector(n);
        let rs = template.instantiate(&choice).ok()?;
        Some((choice, evaluate(&rs, budget.node_limit), rs))
    });
    let mut out = SearchOutcome {
        survivors: Vec::new(),
        total,
        invalid: 0,
        incomplete: evaluated.len() < total,
    };
    for r in results {
        match r {
            None => out.invalid += 1,
            Some((_, Verdict::Fail, _)) => {}
            Some((_, Verdict::Limit, _)) => out.incomplete = true,
            Some((choice, Verdict::Pass, ruleset)) => out.survivors.push(Candidate {
                choice: template
                    .free
                    .iter()
                    .zip(choice)
                    .map(|(p, c)| (p.name.clone(), c))
                    .collect(),
                ruleset,
            }),
        }
    }
    Ok(out)
}
