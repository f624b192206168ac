use serde_json::{json, Value};

use monotile::hexgrid::{Region, TorusBasis};
use monotile::solver::{solve_region, solve_torus, SolverConfig};
use monotile::tilemodel::search::{
    search_rulesets, SearchBudget, SearchError, Template, FILTER_MAX_DET, FILTER_RADIUS,
};
use monotile::tilemodel::{shipped, RuleSet, HEXTOO6_TEMPLATE};
use monotile::Execution;

fn doc(name: &str) -> Value {
    serde_json::from_str(&shipped(name).unwrap().to_json()).unwrap()
}

fn template(t: Value, free: Value) -> Template {
    Template::parse(&json!({"template": t, "free": free}).to_string()).unwrap()
}

/// The filter, restated: radius-2 SAT and every small torus UNSAT.
fn passes_filter(rs: &RuleSet) -> bool {
    let cfg = SolverConfig::default();
    solve_region(&Region::hex(FILTER_RADIUS), rs, &cfg).is_sat()
        && TorusBasis::canonical_bases(FILTER_MAX_DET)
            .iter()
            .all(|b| solve_torus(b, rs, &cfg).unwrap().is_unsat())
}

#[test]
fn zero_free_parameters_give_the_single_instantiation() {
    let t = template(doc("hextoo6"), json!([]));
    let found = search_rulesets(&t, &SearchBudget::default(), Execution::default()).unwrap();
    assert_eq!(found.total, 1);
    assert_eq!(found.survivors.len(), 1);
    assert_eq!(found.survivors[0].ruleset, shipped("hextoo6").unwrap());
    assert!(found.survivors[0].choice.is_empty());
}

#[test]
fn empty_k1_gives_nothing() {
    let mut t = doc("hextoo6");
    t["k1_compat"] = json!([]);
    let found = search_rulesets(
        &template(t, json!([])),
        &SearchBudget::default(),
        Execution::default(),
    )
    .unwrap();
    assert_eq!(found.total, 1);
    assert!(found.survivors.is_empty());
    assert!(!found.incomplete);
}

#[test]
fn shipped_hextoo6_survives_its_template() {
    let t = Template::parse(HEXTOO6_TEMPLATE).unwrap();
    let found = search_rulesets(&t, &SearchBudget::default(), Execution::default()).unwrap();
    assert!(!found.incomplete);
    assert_eq!(found.total, t.size());
    let shipped = shipped("hextoo6").unwrap();
    assert!(found.survivors.iter().any(|c| c.ruleset == shipped));
    for c in &found.survivors {
        assert!(passes_filter(&c.ruleset), "{:?}", c.choice);
    }
}

#[test]
fn sequential_and_parallel_searches_agree() {
    let t = Template::parse(HEXTOO6_TEMPLATE).unwrap();
    let a = search_rulesets(&t, &SearchBudget::default(), Execution::Sequential).unwrap();
    let b = search_rulesets(&t, &SearchBudget::default(), Execution::Parallel).unwrap();
    let key = |o: &monotile::tilemodel::search::SearchOutcome| {
        o.survivors
            .iter()
            .map(|c| (c.choice.clone(), c.ruleset.to_json()))
            .collect::<Vec<_>>()
    };
    assert_eq!(key(&a), key(&b));
}

#[test]
fn budget_exhaustion_is_flagged() {
    let t = Template::parse(HEXTOO6_TEMPLATE).unwrap();
    let budget = SearchBudget {
        max_candidates: 2,
        ..Default::default()
    };
    let found = search_rulesets(&t, &budget, Execution::default()).unwrap();
    assert!(found.incomplete);
    assert!(found.survivors.len() <= 2);
}

#[test]
fn malformed_templates_are_rejected() {
    let bad = template(
        doc("hextoo6"),
        json!([{"name": "x", "pointers": ["/nope"], "choices": [[1]]}]),
    );
    assert!(matches!(
        search_rulesets(&bad, &SearchBudget::default(), Execution::default()),
        Err(SearchError::Param { .. })
    ));
    let mismatched = template(
        doc("hextoo6"),
        json!([{"name": "x", "pointers": ["/male_edge_offset/0/edge"], "choices": [[1, 2]]}]),
    );
    assert!(search_rulesets(&mismatched, &SearchBudget::default(), Execution::default()).is_err());

    // a choice that breaks the document is counted, not fatal
    let invalid = template(
        doc("hextoo6"),
        json!([{"name": "x", "pointers": ["/male_edge_offset/0/edge"], "choices": [[2], [9]]}]),
    );
    let found = search_rulesets(&invalid, &SearchBudget::default(), Execution::default()).unwrap();
    assert_eq!((found.total, found.invalid), (2, 1));
}
