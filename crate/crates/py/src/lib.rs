//! Python bindings. Orders cross the boundary as lists of names, most
//! preferred first; rules as the tokens the instance format uses.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use manego::oracle::all_orders;
use manego::{
    GateMode, ManipulationQuery, Mode, NegotiationInstance, OracleLimits, Order, Outcome, Party,
    PermutationSumInstance, Profile, Rule,
};

fn err(e: manego::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn order(names: Vec<String>) -> PyResult<Order> {
    let outcomes = names
        .iter()
        .map(|n| Outcome::new(n))
        .collect::<manego::Result<Vec<_>>>()
        .map_err(err)?;
    Order::new(outcomes).map_err(err)
}

fn profile(votes: Vec<Vec<String>>) -> PyResult<Profile> {
    Profile::new(votes.into_iter().map(order).collect::<PyResult<_>>()?).map_err(err)
}

fn parse<T: std::str::FromStr<Err = manego::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn names(order: &Order) -> Vec<String> {
    order.iter().map(|o| o.to_string()).collect()
}

/// A parsed instance file.
#[pyclass(module = "manego", frozen)]
struct Instance {
    #[pyo3(get)]
    rule: String,
    #[pyo3(get)]
    other: Vec<String>,
    #[pyo3(get)]
    team: Vec<Vec<String>>,
    text: String,
}

#[pymethods]
impl Instance {
    fn __str__(&self) -> String {
        self.text.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(rule={:?}, m={}, n={})",
            self.rule,
            self.other.len(),
            self.team.len()
        )
    }
}

#[pyfunction]
fn parse_instance(text: &str) -> PyResult<Instance> {
    let inst = manego::parse_instance(text).map_err(err)?;
    Ok(Instance {
        rule: inst.rule.to_string(),
        other: names(&inst.other),
        team: inst.team.votes().iter().map(names).collect(),
        text: inst.to_string(),
    })
}

/// Aggregate score of every outcome.
#[pyfunction]
fn scores(votes: Vec<Vec<String>>, rule: &str) -> PyResult<BTreeMap<String, u64>> {
    let table = manego::aggregate(&profile(votes)?, &parse(rule)?).map_err(err)?;
    Ok(table.iter().map(|(o, s)| (o.to_string(), s)).collect())
}

/// The team ranking, ties to the bytewise-smaller name.
#[pyfunction]
fn swf(votes: Vec<Vec<String>>, rule: &str) -> PyResult<Vec<String>> {
    Ok(names(
        &manego::swf(&profile(votes)?, &parse::<Rule>(rule)?).map_err(err)?,
    ))
}

/// Rational Compromise: `(j, outcomes)`.
#[pyfunction]
fn rc(team: Vec<String>, other: Vec<String>) -> PyResult<(usize, Vec<String>)> {
    let game = NegotiationInstance::new(order(team)?, order(other)?).map_err(err)?;
    let r = game.rc();
    Ok((r.terminating_index, r.outcomes.iter().map(|o| o.to_string()).collect()))
}

/// Subgame-perfect outcome of alternating offers.
#[pyfunction]
#[pyo3(signature = (team, other, initiator = "team"))]
fn spe(team: Vec<String>, other: Vec<String>, initiator: &str) -> PyResult<String> {
    let game = NegotiationInstance::new(order(team)?, order(other)?).map_err(err)?;
    Ok(game.spe_result(parse::<Party>(initiator)?).to_string())
}

#[pyclass(module = "manego", frozen, get_all)]
struct Manipulation {
    decision: String,
    votes: Vec<Vec<String>>,
    trace: Vec<String>,
}

#[pymethods]
impl Manipulation {
    fn __bool__(&self) -> bool {
        self.decision != "no"
    }

    fn __repr__(&self) -> String {
        format!("Manipulation(decision={:?}, votes={:?})", self.decision, self.votes)
    }
}

#[allow(clippy::too_many_arguments)]
fn query(
    votes: Vec<Vec<String>>,
    other: Vec<String>,
    rule: &str,
    mode: &str,
    target: &str,
    k: usize,
    gate: &str,
) -> PyResult<ManipulationQuery> {
    Ok(ManipulationQuery::new(
        profile(votes)?,
        order(other)?,
        parse(rule)?,
        parse::<Mode>(mode)?,
        parse(target)?,
        k,
    )
    .map_err(err)?
    .with_gate(parse::<GateMode>(gate)?))
}

/// Runs the polynomial solver for `k` manipulators.
#[pyfunction]
#[pyo3(signature = (votes, other, rule, mode, target, k = 1, gate = "paper"))]
fn manipulate(
    votes: Vec<Vec<String>>,
    other: Vec<String>,
    rule: &str,
    mode: &str,
    target: &str,
    k: usize,
    gate: &str,
) -> PyResult<Manipulation> {
    let q = query(votes, other, rule, mode, target, k, gate)?;
    let r = manego::solve(&q).map_err(err)?;
    Ok(Manipulation {
        decision: r.decision.to_string(),
        votes: r.votes.iter().map(names).collect(),
        trace: r.trace_lines(),
    })
}

/// Exhaustive search over manipulator vote multisets.
#[pyfunction]
#[pyo3(signature = (votes, other, rule, mode, target, k = 1, max_outcomes = 6, max_manipulators = 2))]
#[allow(clippy::too_many_arguments)]
fn brute_force(
    votes: Vec<Vec<String>>,
    other: Vec<String>,
    rule: &str,
    mode: &str,
    target: &str,
    k: usize,
    max_outcomes: usize,
    max_manipulators: usize,
) -> PyResult<Manipulation> {
    let q = query(votes, other, rule, mode, target, k, "paper")?;
    let limits = OracleLimits {
        max_outcomes,
        max_manipulators,
        ..OracleLimits::default()
    };
    let o = manego::brute_force(&q, &limits).map_err(err)?;
    Ok(Manipulation {
        decision: o.decision.to_string(),
        votes: o.witness.iter().map(names).collect(),
        trace: vec![format!("checked: {}", o.checked)],
    })
}

/// `(sigma, pi)` with `sigma[i] + pi[i] == values[i]`, or `None`.
#[pyfunction]
fn permutation_sum(values: Vec<u64>) -> PyResult<Option<(Vec<u64>, Vec<u64>)>> {
    let inst = PermutationSumInstance::new(values).map_err(err)?;
    Ok(manego::permutation_sum(&inst))
}

/// Every strict order over `outcomes`, lexicographic in the given order.
#[pyfunction]
fn orders(outcomes: Vec<String>) -> PyResult<Vec<Vec<String>>> {
    let base = order(outcomes)?;
    Ok(all_orders(base.ranking()).iter().map(names).collect())
}

#[pymodule]
#[pyo3(name = "manego")]
fn manego_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Manipulation>()?;
    m.add_function(wrap_pyfunction!(parse_instance, m)?)?;
    m.add_function(wrap_pyfunction!(scores, m)?)?;
    m.add_function(wrap_pyfunction!(swf, m)?)?;
    m.add_function(wrap_pyfunction!(rc, m)?)?;
    m.add_function(wrap_pyfunction!(spe, m)?)?;
    m.add_function(wrap_pyfunction!(manipulate, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(permutation_sum, m)?)?;
    m.add_function(wrap_pyfunction!(orders, m)?)?;
    Ok(())
}
