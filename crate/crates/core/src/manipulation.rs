//! Manipulation of the team's social welfare function so that the
//! negotiation ends at (constructive) or away from (destructive) a given
//! outcome.
//!
//! All four solvers share one skeleton. For each candidate RC termination
//! index `i` they fix a set `H` of `i` outcomes that should become the top
//! `i` of the team order, then build manipulator votes one at a time
//! ("stages"): `H` fills the top `i` positions and the rest fills the
//! bottom, each block ordered least-preferred-first under the aggregate of
//! the honest votes plus the votes built so far. The single-voter solvers are
//! the one-stage case, where the aggregate is the honest team order. In
//! destructive mode the target is always placed last.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::negotiation::{top_set, NegotiationInstance, RcResult, MAX_NEGOTIATION_OUTCOMES};
use crate::voting::{tally, Order, Outcome, Profile, Rule, ScoreTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Make the target the negotiation result for both initiators.
    Constructive,
    /// Keep the target from being the result for either initiator.
    Destructive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Constructive => "constructive",
            Mode::Destructive => "destructive",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constructive" => Ok(Mode::Constructive),
            "destructive" => Ok(Mode::Destructive),
            _ => Err(Error::InvalidQuery(format!("unknown mode `{s}`"))),
        }
    }
}

/// Which early-exit test runs before the main loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum GateMode {
    /// Constructive: reject when `pos(p, p_o) < ceil(m/2)`.
    /// Destructive: always safe when `pos(e, p_o) < floor(m/2)`.
    ///
    /// The constructive test rejects some solvable queries when `m` is odd,
    /// and the destructive one can declare an unsafe target safe when `m` is
    /// even.
    #[default]
    PaperLiteral,
    /// Gate on whether the outcome can appear in any RC result at all:
    /// `pos(o, p_o) >= m - (floor(m/2) + 1)`.
    Feasibility,
}

impl fmt::Display for GateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateMode::PaperLiteral => "paper",
            GateMode::Feasibility => "feasible",
        })
    }
}

impl std::str::FromStr for GateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paper-literal" => Ok(GateMode::PaperLiteral),
            "feasible" | "feasibility" => Ok(GateMode::Feasibility),
            _ => Err(Error::InvalidQuery(format!("unknown gate `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    Yes,
    No,
    /// Destructive only: the target can never be the negotiation result.
    AlwaysSafe,
}

impl Decision {
    pub fn is_positive(self) -> bool {
        !matches!(self, Decision::No)
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Yes => "yes",
            Decision::No => "no",
            Decision::AlwaysSafe => "always-safe",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManipulationQuery {
    pub honest: Profile,
    pub other: Order,
    pub rule: Rule,
    pub mode: Mode,
    pub target: Outcome,
    pub manipulators: usize,
    pub gate: GateMode,
}

impl ManipulationQuery {
    pub fn new(
        honest: Profile,
        other: Order,
        rule: Rule,
        mode: Mode,
        target: Outcome,
        manipulators: usize,
    ) -> Result<Self> {
        let query = ManipulationQuery {
            honest,
            other,
            rule,
            mode,
            target,
            manipulators,
            gate: GateMode::default(),
        };
        query.validate()?;
        Ok(query)
    }

    pub fn with_gate(mut self, gate: GateMode) -> Self {
        self.gate = gate;
        self
    }

    pub fn with_manipulators(mut self, k: usize) -> Self {
        self.manipulators = k;
        self
    }

    pub fn num_outcomes(&self) -> usize {
        self.other.len()
    }

    fn validate(&self) -> Result<()> {
        if !self.honest.votes()[0].same_outcomes(&self.other) {
            return Err(Error::OutcomeSetMismatch);
        }
        if !self.other.contains(&self.target) {
            return Err(Error::UnknownOutcome(self.target.clone()));
        }
        let m = self.num_outcomes();
        if m > MAX_NEGOTIATION_OUTCOMES {
            return Err(Error::TooManyOutcomes {
                got: m,
                max: MAX_NEGOTIATION_OUTCOMES,
            });
        }
        self.rule.vector(m)?;
        Ok(())
    }
}

/// The outcomes an iteration tries to install as the team's top `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HSet {
    pub iteration: usize,
    pub members: BTreeSet<Outcome>,
    /// Destructive mode: the member drawn from the other party's top `i`.
    pub pivot: Option<Outcome>,
}

/// Builds `H^i` from the honest team order `team` and the other party's
/// order.
///
/// Constructive: the target plus the `i - 1` team-preferred outcomes outside
/// the other party's top `i`. Destructive: the team-preferred member of the
/// other party's top `i` that is not the target (the pivot), plus the `i - 1`
/// team-preferred outcomes that are neither the target nor the pivot.
pub fn h_set(team: &Order, other: &Order, target: &Outcome, i: usize, mode: Mode) -> Result<HSet> {
    let m = team.len();
    if !team.same_outcomes(other) {
        return Err(Error::OutcomeSetMismatch);
    }
    if !team.contains(target) {
        return Err(Error::UnknownOutcome(target.clone()));
    }
    if i == 0 || i > m.div_ceil(2) {
        return Err(Error::IndexOutOfRange {
            index: i,
            max: m.div_ceil(2),
        });
    }
    let other_top = top_set(other, i)?;
    let (anchor, pivot) = match mode {
        Mode::Constructive => (target.clone(), None),
        Mode::Destructive => {
            let pivot = team
                .iter()
                .find(|o| *o != target && other_top.contains(*o))
                .cloned()
                .ok_or_else(|| Error::NoEligiblePivot {
                    iteration: i,
                    excluded: target.clone(),
                })?;
            (pivot.clone(), Some(pivot))
        }
    };
    let mut members = BTreeSet::from([anchor.clone()]);
    let eligible = team.iter().filter(|o| {
        **o != anchor
            && match mode {
                Mode::Constructive => !other_top.contains(*o),
                Mode::Destructive => *o != target,
            }
    });
    members.extend(eligible.take(i - 1).cloned());
    assert_eq!(members.len(), i, "enough eligible outcomes for i <= ceil(m/2)");
    Ok(HSet {
        iteration: i,
        members,
        pivot,
    })
}

/// One manipulator vote and the aggregate once it is counted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRecord {
    pub vote: Order,
    /// Points this vote awards.
    pub awards: ScoreTable,
    /// Aggregate scores after this stage.
    pub scores: ScoreTable,
    pub aggregate: Order,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `None` when the iteration was skipped for lack of a pivot.
    pub h_set: Option<HSet>,
    pub stages: Vec<StageRecord>,
    pub rc: Option<RcResult>,
    /// `(N_t, N_o)` on the final aggregate.
    pub spe: Option<(Outcome, Outcome)>,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManipulationResult {
    pub decision: Decision,
    pub votes: Vec<Order>,
    /// Honest-only scores and team order.
    pub base_scores: ScoreTable,
    pub base_order: Order,
    /// Outcome held at position 0 of every stage vote (the destructive
    /// target).
    pub pinned: Option<Outcome>,
    pub trace: Vec<IterationRecord>,
}

impl ManipulationResult {
    /// Renders the trace as labelled lines.
    pub fn trace_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("base.scores: {}", self.base_scores),
            format!("base.order: {}", self.base_order),
        ];
        for rec in &self.trace {
            let i = rec.iteration;
            let Some(h) = &rec.h_set else {
                lines.push(format!("iter {i}: skipped (no pivot)"));
                continue;
            };
            let members: Vec<String> = h.members.iter().map(Outcome::to_string).collect();
            lines.push(format!("iter {i}: H = {{{}}}", members.join(", ")));
            if let Some(pivot) = &h.pivot {
                lines.push(format!("iter {i}: pivot = {pivot}"));
            }
            for (l, stage) in rec.stages.iter().enumerate() {
                let l = l + 1;
                lines.push(format!("iter {i} stage {l}: vote = {}", stage.vote));
                lines.push(format!("iter {i} stage {l}: awards = {}", stage.awards));
                lines.push(format!("iter {i} stage {l}: scores = {}", stage.scores));
                lines.push(format!("iter {i} stage {l}: aggregate = {}", stage.aggregate));
            }
            if let Some(rc) = &rec.rc {
                let outs: Vec<String> = rc.outcomes.iter().map(Outcome::to_string).collect();
                lines.push(format!(
                    "iter {i}: rc j = {} outcomes = {{{}}}",
                    rc.terminating_index,
                    outs.join(", ")
                ));
            }
            if let Some((nt, no)) = &rec.spe {
                lines.push(format!("iter {i}: spe N_t = {nt} N_o = {no}"));
            }
            lines.push(format!("iter {i}: success = {}", rec.success));
        }
        lines.push(format!("decision: {}", self.decision));
        lines
    }
}

/// Whether the team order `team` meets the success predicate against
/// `other`.
pub(crate) fn succeeds(team: &Order, other: &Order, mode: Mode, target: &Outcome) -> bool {
    let instance = NegotiationInstance::new(team.clone(), other.clone()).expect("caller validated outcome sets");
    let (nt, no) = instance.spe_both();
    predicate(mode, target, &nt, &no)
}

fn predicate(mode: Mode, target: &Outcome, nt: &Outcome, no: &Outcome) -> bool {
    match mode {
        Mode::Constructive => nt == target && no == target,
        Mode::Destructive => nt != target && no != target,
    }
}

/// Re-evaluates the success predicate for `honest ∪ votes`.
pub fn verify(
    honest: &Profile,
    other: &Order,
    votes: &[Order],
    rule: &Rule,
    mode: Mode,
    target: &Outcome,
) -> Result<bool> {
    let full = honest.with_votes(votes)?;
    if !full.votes()[0].same_outcomes(other) {
        return Err(Error::OutcomeSetMismatch);
    }
    if !other.contains(target) {
        return Err(Error::UnknownOutcome(target.clone()));
    }
    let team = crate::voting::swf(&full, rule)?;
    NegotiationInstance::new(team.clone(), other.clone())?;
    Ok(succeeds(&team, other, mode, target))
}

/// Single-voter constructive manipulation.
pub fn c_manego(query: &ManipulationQuery) -> Result<ManipulationResult> {
    expect_shape(query, Mode::Constructive, Some(1))?;
    run(query)
}

/// Coalitional constructive manipulation. Exact for approval rules; with
/// Borda a `no` may be wrong, but then one extra manipulator suffices
/// whenever a manipulation exists.
pub fn cc_manego(query: &ManipulationQuery) -> Result<ManipulationResult> {
    expect_shape(query, Mode::Constructive, None)?;
    run(query)
}

/// Single-voter destructive manipulation.
pub fn d_manego(query: &ManipulationQuery) -> Result<ManipulationResult> {
    expect_shape(query, Mode::Destructive, Some(1))?;
    run(query)
}

/// Coalitional destructive manipulation, with the same guarantees as
/// [`cc_manego`].
pub fn dc_manego(query: &ManipulationQuery) -> Result<ManipulationResult> {
    expect_shape(query, Mode::Destructive, None)?;
    run(query)
}

/// Dispatches on the query's mode and coalition size.
pub fn solve(query: &ManipulationQuery) -> Result<ManipulationResult> {
    match (query.mode, query.manipulators) {
        (Mode::Constructive, 1) => c_manego(query),
        (Mode::Constructive, _) => cc_manego(query),
        (Mode::Destructive, 1) => d_manego(query),
        (Mode::Destructive, _) => dc_manego(query),
    }
}

fn expect_shape(query: &ManipulationQuery, mode: Mode, k: Option<usize>) -> Result<()> {
    query.validate()?;
    if query.mode != mode {
        return Err(Error::InvalidQuery(format!(
            "expected a {mode} query, got {}",
            query.mode
        )));
    }
    if let Some(k) = k {
        if query.manipulators != k {
            return Err(Error::InvalidQuery(format!(
                "single-voter solver needs exactly {k} manipulator, got {}",
                query.manipulators
            )));
        }
    }
    Ok(())
}

/// Smallest `pos(target, p_o)` that lets the search run; below it the
/// query is answered by the gate alone.
pub fn gate_threshold(m: usize, mode: Mode, gate: GateMode) -> usize {
    match (gate, mode) {
        (GateMode::PaperLiteral, Mode::Constructive) => m.div_ceil(2),
        (GateMode::PaperLiteral, Mode::Destructive) => m / 2,
        (GateMode::Feasibility, _) => m - (m / 2 + 1),
    }
}

/// `true` when the gate ends the search early.
fn gate_fires(query: &ManipulationQuery) -> bool {
    let pos = query.other.position(&query.target).expect("validated target");
    pos < gate_threshold(query.num_outcomes(), query.mode, query.gate)
}

/// Target last, everything else in team order.
fn safe_witness(team: &Order, target: &Outcome) -> Order {
    let mut ranking: Vec<Outcome> = team.iter().filter(|o| *o != target).cloned().collect();
    ranking.push(target.clone());
    Order::from_ranking_unchecked(ranking)
}

/// Orders `members` least-preferred-first under `reference`.
fn ascending_by(reference: &Order, members: &BTreeSet<Outcome>) -> Vec<Outcome> {
    reference
        .iter()
        .rev()
        .filter(|o| members.contains(*o))
        .cloned()
        .collect()
}

fn run(query: &ManipulationQuery) -> Result<ManipulationResult> {
    let m = query.num_outcomes();
    let vector = query.rule.vector(m)?;
    let base_scores = tally(query.honest.votes(), &vector);
    let base_order = base_scores.ranking();
    let k = query.manipulators;
    let mut result = ManipulationResult {
        decision: Decision::No,
        votes: Vec::new(),
        base_scores: base_scores.clone(),
        base_order: base_order.clone(),
        pinned: (query.mode == Mode::Destructive).then(|| query.target.clone()),
        trace: Vec::new(),
    };

    if k == 0 {
        if succeeds(&base_order, &query.other, query.mode, &query.target) {
            result.decision = Decision::Yes;
        }
        return Ok(result);
    }

    if gate_fires(query) {
        if query.mode == Mode::Destructive {
            result.decision = Decision::AlwaysSafe;
            result.votes = vec![safe_witness(&base_order, &query.target); k];
        }
        return Ok(result);
    }

    let all = query.other.outcome_set();
    for i in 1..=m.div_ceil(2) {
        let h = match h_set(&base_order, &query.other, &query.target, i, query.mode) {
            Ok(h) => h,
            Err(Error::NoEligiblePivot { .. }) => {
                result.trace.push(IterationRecord {
                    iteration: i,
                    h_set: None,
                    stages: Vec::new(),
                    rc: None,
                    spe: None,
                    success: false,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let rest: BTreeSet<Outcome> = all.difference(&h.members).cloned().collect();

        let mut scores = base_scores.clone();
        let mut reference = base_order.clone();
        let mut stages = Vec::with_capacity(k);
        for _ in 0..k {
            let mut ranking = ascending_by(&reference, &h.members);
            ranking.extend(ascending_by(&reference, &rest));
            if let Some(e) = &result.pinned {
                ranking.retain(|o| o != e);
                ranking.push(e.clone());
            }
            let vote = Order::from_ranking_unchecked(ranking);
            scores.add_vote(&vote, &vector);
            reference = scores.ranking();
            stages.push(StageRecord {
                awards: ScoreTable::of_vote(&vote, &vector),
                vote,
                scores: scores.clone(),
                aggregate: reference.clone(),
            });
        }

        let instance = NegotiationInstance::new(reference.clone(), query.other.clone())?;
        let rc = instance.rc();
        let (nt, no) = instance.spe_both();
        let success = predicate(query.mode, &query.target, &nt, &no);
        let votes: Vec<Order> = stages.iter().map(|s| s.vote.clone()).collect();
        result.trace.push(IterationRecord {
            iteration: i,
            h_set: Some(h),
            stages,
            rc: Some(rc),
            spe: Some((nt, no)),
            success,
        });
        if success {
            result.decision = Decision::Yes;
            result.votes = votes;
            return Ok(result);
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(s: &str) -> Order {
        Order::parse(s).unwrap()
    }

    fn name(s: &str) -> Outcome {
        Outcome::new(s).unwrap()
    }

    fn set(names: &[&str]) -> BTreeSet<Outcome> {
        names.iter().map(|n| name(n)).collect()
    }

    fn example_honest() -> Profile {
        Profile::new(vec![
            order("p c a b"),
            order("p b a c"),
            order("b p a c"),
            order("b a c p"),
        ])
        .unwrap()
    }

    fn example_query(mode: Mode, target: &str, k: usize) -> ManipulationQuery {
        ManipulationQuery::new(example_honest(), order("b p a c"), Rule::Borda, mode, name(target), k).unwrap()
    }

    #[test]
    fn h_sets() {
        let t = order("b p a c");
        let o = order("b p a c");
        let h = h_set(&t, &o, &name("p"), 1, Mode::Constructive).unwrap();
        assert_eq!(h.members, set(&["p"]));
        let h = h_set(&t, &o, &name("p"), 2, Mode::Constructive).unwrap();
        assert_eq!(h.members, set(&["p", "a"]));

        let err = h_set(&t, &o, &name("b"), 1, Mode::Destructive).unwrap_err();
        assert!(matches!(err, Error::NoEligiblePivot { iteration: 1, .. }));
        let h = h_set(&t, &o, &name("b"), 2, Mode::Destructive).unwrap();
        assert_eq!(h.pivot, Some(name("p")));
        assert_eq!(h.members, set(&["p", "a"]));
        assert!(!h.members.contains(&name("b")));

        assert!(h_set(&t, &o, &name("p"), 3, Mode::Constructive).is_err());
        assert!(h_set(&t, &o, &name("z"), 1, Mode::Constructive).is_err());
    }

    #[test]
    fn example_single_voter() {
        let result = c_manego(&example_query(Mode::Constructive, "p", 1)).unwrap();
        assert_eq!(result.decision, Decision::Yes);
        assert_eq!(result.votes, vec![order("a p c b")]);
        // first iteration puts p on top and fails: the team order becomes
        // p b a c, where the team opening ends at b
        let first = &result.trace[0];
        assert_eq!(first.stages[0].vote, order("p c a b"));
        assert_eq!(first.stages[0].aggregate, order("p b a c"));
        assert_eq!(first.spe, Some((name("b"), name("p"))));
        let second = &result.trace[1];
        assert_eq!(second.stages[0].aggregate, order("p a b c"));
        assert_eq!(second.stages[0].scores.score(&name("p")), 10);
    }

    #[test]
    fn example_verification() {
        let honest = example_honest();
        let other = order("b p a c");
        let p = name("p");
        let ok = |votes: &[Order]| verify(&honest, &other, votes, &Rule::Borda, Mode::Constructive, &p).unwrap();
        assert!(ok(&[order("a p c b")]));
        assert!(!ok(&[order("p c a b")]));
        assert!(!ok(&[]));
        assert!(verify(&honest, &other, &[order("a b c")], &Rule::Borda, Mode::Constructive, &p).is_err());
    }

    #[test]
    fn unanimous_target_succeeds_immediately() {
        let honest = Profile::new(vec![order("p a b c"), order("p b c a")]).unwrap();
        let q =
            ManipulationQuery::new(honest, order("p c b a"), Rule::Borda, Mode::Constructive, name("p"), 1).unwrap();
        let result = c_manego(&q).unwrap();
        assert_eq!(result.decision, Decision::Yes);
        assert_eq!(result.trace.len(), 1);
        assert_eq!(result.votes[0].top(), &name("p"));
    }

    #[test]
    fn gates() {
        // pos(c, p_o) = 0
        let r = c_manego(&example_query(Mode::Constructive, "c", 1)).unwrap();
        assert_eq!(r.decision, Decision::No);
        assert!(r.trace.is_empty());

        let r = d_manego(&example_query(Mode::Destructive, "c", 1)).unwrap();
        assert_eq!(r.decision, Decision::AlwaysSafe);
        assert_eq!(r.votes, vec![order("b p a c")]);
        let r = dc_manego(&example_query(Mode::Destructive, "c", 3)).unwrap();
        assert_eq!(r.decision, Decision::AlwaysSafe);
        assert_eq!(r.votes.len(), 3);
    }

    #[test]
    fn everyone_ranks_target_last() {
        let honest = Profile::new(vec![order("a b c e"), order("b a c e")]).unwrap();
        let q = ManipulationQuery::new(honest, order("c b a e"), Rule::Borda, Mode::Destructive, name("e"), 1).unwrap();
        assert_eq!(d_manego(&q).unwrap().decision, Decision::AlwaysSafe);
    }

    #[test]
    fn zero_manipulators_evaluates_honest_profile() {
        let q = example_query(Mode::Constructive, "b", 0);
        // honest team order b p a c against b p a c: both parties' favourite
        let r = cc_manego(&q).unwrap();
        assert_eq!(r.decision, Decision::Yes);
        assert!(r.votes.is_empty());
        let r = cc_manego(&example_query(Mode::Constructive, "p", 0)).unwrap();
        assert_eq!(r.decision, Decision::No);
    }

    #[test]
    fn coalition_of_one_matches_single_voter() {
        let single = c_manego(&example_query(Mode::Constructive, "p", 1)).unwrap();
        let coalition = cc_manego(&example_query(Mode::Constructive, "p", 1)).unwrap();
        assert_eq!(single, coalition);
    }

    #[test]
    fn shape_mismatches_rejected() {
        assert!(c_manego(&example_query(Mode::Constructive, "p", 2)).is_err());
        assert!(c_manego(&example_query(Mode::Destructive, "p", 1)).is_err());
        assert!(dc_manego(&example_query(Mode::Constructive, "p", 2)).is_err());
        assert!(ManipulationQuery::new(
            example_honest(),
            order("b p a c"),
            Rule::Borda,
            Mode::Constructive,
            name("q"),
            1
        )
        .is_err());
    }

    #[test]
    fn destructive_skips_iterations_without_pivot() {
        let r = d_manego(&example_query(Mode::Destructive, "b", 1)).unwrap();
        assert!(r.trace[0].h_set.is_none());
        if r.decision == Decision::Yes {
            assert!(verify(
                &example_honest(),
                &order("b p a c"),
                &r.votes,
                &Rule::Borda,
                Mode::Destructive,
                &name("b")
            )
            .unwrap());
        }
    }

    #[test]
    fn trace_lines_are_labelled() {
        let r = c_manego(&example_query(Mode::Constructive, "p", 1)).unwrap();
        let lines = r.trace_lines();
        assert!(lines.contains(&"iter 2 stage 1: vote = a p c b".to_string()));
        assert_eq!(lines.last().unwrap(), "decision: yes");
    }
}
