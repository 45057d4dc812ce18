//! Exhaustive ground truth for the polynomial solvers, plus diagnostics over
//! their traces.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::manipulation::{succeeds, Decision, IterationRecord, ManipulationQuery, ManipulationResult};
use crate::negotiation::{NegotiationInstance, Party};
use crate::voting::{Order, Outcome, ScoreTable};

/// Size bounds for [`brute_force`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_outcomes: usize,
    pub max_manipulators: usize,
    pub max_voters: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_outcomes: 6,
            max_manipulators: 2,
            max_voters: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleOutcome {
    /// `Yes` or `No`; the oracle never reports `AlwaysSafe`.
    pub decision: Decision,
    /// First successful vote multiset in canonical order.
    pub witness: Vec<Order>,
    /// Number of vote multisets evaluated.
    pub checked: u64,
}

/// All strict orders over `outcomes`, lexicographic in the input order.
pub fn all_orders(outcomes: &[Outcome]) -> Vec<Order> {
    let mut idx: Vec<usize> = (0..outcomes.len()).collect();
    let mut out = Vec::new();
    loop {
        out.push(Order::from_ranking_unchecked(
            idx.iter().map(|&i| outcomes[i].clone()).collect(),
        ));
        if !next_permutation(&mut idx) {
            return out;
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// `C(n + k - 1, k)`: multisets of size `k` drawn from `n` kinds.
pub fn multiset_count(n: u64, k: u64) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n + i) / u128::from(i + 1);
    }
    acc
}

/// Decides the query by trying every multiset of `k` manipulator votes.
pub fn brute_force(query: &ManipulationQuery, limits: &OracleLimits) -> Result<OracleOutcome> {
    let m = query.num_outcomes();
    let k = query.manipulators;
    let n = query.honest.len();
    let orders_count: u64 = (1..=m as u64).product();
    if m > limits.max_outcomes || k > limits.max_manipulators || n > limits.max_voters {
        return Err(Error::LimitExceeded(format!(
            "m={m} k={k} n={n} needs {} vote multisets; limits are m<={} k<={} n<={}",
            multiset_count(orders_count, k as u64),
            limits.max_outcomes,
            limits.max_manipulators,
            limits.max_voters
        )));
    }

    // Scores are kept as arrays indexed by bytewise name order, so ties
    // resolve towards the smaller index.
    let names: Vec<Outcome> = query.other.outcome_set().into_iter().collect();
    let index_of: HashMap<&Outcome, usize> = names.iter().enumerate().map(|(i, o)| (o, i)).collect();
    let vector = query.rule.vector(m)?;
    let award = |vote: &Order| {
        let mut pts = vec![0u64; m];
        for (o, s) in vote.iter().zip(&vector) {
            pts[index_of[o]] = *s;
        }
        pts
    };
    let mut base = vec![0u64; m];
    for vote in query.honest.votes() {
        for (b, a) in base.iter_mut().zip(award(vote)) {
            *b += a;
        }
    }

    let candidates = all_orders(&names);
    let awards: Vec<Vec<u64>> = candidates.iter().map(award).collect();
    let mut verdicts: HashMap<Vec<usize>, bool> = HashMap::new();
    let mut check = |scores: &[u64]| -> bool {
        let mut ranking: Vec<usize> = (0..m).collect();
        ranking.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
        *verdicts.entry(ranking).or_insert_with_key(|ranking| {
            let team = Order::from_ranking_unchecked(ranking.iter().map(|&i| names[i].clone()).collect());
            succeeds(&team, &query.other, query.mode, &query.target)
        })
    };

    let mut checked = 0u64;
    if k == 0 {
        checked += 1;
        let decision = if check(&base) { Decision::Yes } else { Decision::No };
        return Ok(OracleOutcome {
            decision,
            witness: Vec::new(),
            checked,
        });
    }

    // non-decreasing index sequences over `candidates`
    let mut chosen = vec![0usize; k];
    loop {
        let mut scores = base.clone();
        for &c in &chosen {
            for (s, a) in scores.iter_mut().zip(&awards[c]) {
                *s += a;
            }
        }
        checked += 1;
        if check(&scores) {
            return Ok(OracleOutcome {
                decision: Decision::Yes,
                witness: chosen.iter().map(|&c| candidates[c].clone()).collect(),
                checked,
            });
        }
        let Some(slot) = chosen.iter().rposition(|&c| c + 1 < candidates.len()) else {
            break;
        };
        let next = chosen[slot] + 1;
        for c in &mut chosen[slot..] {
            *c = next;
        }
    }
    Ok(OracleOutcome {
        decision: Decision::No,
        witness: Vec::new(),
        checked,
    })
}

/// The subgame-perfect outcome recomputed by plain recursion over the game
/// tree, without memoization. Limited to 5 outcomes.
pub fn spe_unmemoized(instance: &NegotiationInstance, initiator: Party) -> Result<Outcome> {
    let m = instance.team().len();
    if m > 5 {
        return Err(Error::LimitExceeded(format!(
            "unmemoized backward induction is limited to 5 outcomes, got {m}"
        )));
    }
    let remaining: Vec<Outcome> = instance.team().ranking().to_vec();
    Ok(play(instance, &remaining, initiator))
}

fn play(instance: &NegotiationInstance, remaining: &[Outcome], proposer: Party) -> Outcome {
    if let [only] = remaining {
        return only.clone();
    }
    let responder = proposer.opponent();
    let proposer_order = instance.order_of(proposer);
    let responder_order = instance.order_of(responder);
    remaining
        .iter()
        .map(|offer| {
            let rest: Vec<Outcome> = remaining.iter().filter(|o| *o != offer).cloned().collect();
            let fallback = play(instance, &rest, responder);
            if responder_order.prefers(offer, &fallback).expect("known outcomes") {
                offer.clone()
            } else {
                fallback
            }
        })
        .max_by_key(|o| proposer_order.position(o).expect("known outcomes"))
        .expect("at least two outcomes remain")
}

/// Top- and bottom-placed closure sets over one iteration of a coalitional
/// trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UdTrace {
    pub iteration: usize,
    pub h_set: BTreeSet<Outcome>,
    pub u: BTreeSet<Outcome>,
    pub d: BTreeSet<Outcome>,
    /// Closure rounds that added at least one member.
    pub u_rounds: usize,
    pub d_rounds: usize,
    /// Manipulator votes, one per stage, without the pinned outcome.
    pub placements: Vec<Order>,
    /// Aggregate scores after the last stage.
    pub final_scores: ScoreTable,
}

impl UdTrace {
    /// In every stage, `U` fills the top `|U|` positions and `D` the bottom
    /// `|D|` positions.
    pub fn placement_holds(&self) -> bool {
        self.placements.iter().all(|vote| {
            let r = vote.ranking();
            let top: BTreeSet<&Outcome> = r[..self.u.len()].iter().collect();
            let bottom: BTreeSet<&Outcome> = r[r.len() - self.d.len()..].iter().collect();
            top == self.u.iter().collect() && bottom == self.d.iter().collect()
        })
    }

    /// `(max - min)` of final scores within `U`, then within `D`.
    pub fn score_spread(&self) -> (u64, u64) {
        let spread = |set: &BTreeSet<Outcome>| {
            let scores = set.iter().map(|o| self.final_scores.score(o));
            scores.clone().max().unwrap_or(0) - scores.min().unwrap_or(0)
        };
        (spread(&self.u), spread(&self.d))
    }

    pub fn degenerate(&self) -> bool {
        self.u.len() == 1 || self.d.len() == 1
    }
}

/// Computes `U` and `D` for `iteration` of a coalitional trace.
///
/// `U` starts from the member of `H` the honest team order ranks lowest and
/// absorbs every member of `H` that some stage places above a current member,
/// until nothing changes. `D` starts from the outcome outside `H` the honest
/// team order ranks highest and absorbs outcomes placed below a current
/// member. A pinned outcome is left out of both sets and of the placements.
pub fn ud_sets(result: &ManipulationResult, iteration: usize) -> Result<UdTrace> {
    let record: &IterationRecord = result
        .trace
        .iter()
        .find(|r| r.iteration == iteration)
        .ok_or_else(|| Error::IncompleteTrace(format!("no record for iteration {iteration}")))?;
    let h = record
        .h_set
        .as_ref()
        .ok_or_else(|| Error::IncompleteTrace(format!("iteration {iteration} was skipped")))?;
    let last = record
        .stages
        .last()
        .ok_or_else(|| Error::IncompleteTrace(format!("iteration {iteration} has no stages")))?;
    let team = &result.base_order;
    let free = |o: &Outcome| result.pinned.as_ref() != Some(o);
    let placements: Vec<Order> = record
        .stages
        .iter()
        .map(|s| Order::from_ranking_unchecked(s.vote.iter().filter(|o| free(o)).cloned().collect()))
        .collect();

    let in_d = |o: &Outcome| free(o) && !h.members.contains(o);
    let u0 = team
        .iter()
        .rev()
        .find(|o| h.members.contains(*o))
        .expect("H is non-empty");
    let d0 = team
        .iter()
        .find(|o| in_d(o))
        .ok_or_else(|| Error::IncompleteTrace(format!("iteration {iteration} leaves no outcome for D")))?;
    let (u, u_rounds) = closure(u0, &placements, |o| h.members.contains(o), true);
    let (d, d_rounds) = closure(d0, &placements, in_d, false);

    Ok(UdTrace {
        iteration,
        h_set: h.members.clone(),
        u,
        d,
        u_rounds,
        d_rounds,
        placements,
        final_scores: last.scores.clone(),
    })
}

fn closure(
    seed: &Outcome,
    placements: &[Order],
    eligible: impl Fn(&Outcome) -> bool,
    above: bool,
) -> (BTreeSet<Outcome>, usize) {
    let mut set = BTreeSet::from([seed.clone()]);
    let mut rounds = 0;
    loop {
        let mut added = Vec::new();
        for vote in placements {
            let r = vote.ranking();
            // the extreme current member in this vote
            let cut = if above {
                r.iter().rposition(|o| set.contains(o)).expect("members are ranked")
            } else {
                r.iter().position(|o| set.contains(o)).expect("members are ranked")
            };
            let span = if above { &r[..cut] } else { &r[cut + 1..] };
            added.extend(span.iter().filter(|o| eligible(o) && !set.contains(*o)).cloned());
        }
        if added.is_empty() {
            return (set, rounds);
        }
        set.extend(added);
        rounds += 1;
    }
}

/// A permutation-sum instance: `n` non-decreasing integers summing to
/// `n(n+1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationSumInstance {
    values: Vec<u64>,
}

impl PermutationSumInstance {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        let n = values.len() as u64;
        if n == 0 {
            return Err(Error::InvalidQuery("permutation sum needs n >= 1".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidQuery("values must be non-decreasing".into()));
        }
        let total: u64 = values.iter().sum();
        if total != n * (n + 1) {
            return Err(Error::InvalidQuery(format!(
                "values sum to {total}, expected n(n+1) = {}",
                n * (n + 1)
            )));
        }
        Ok(PermutationSumInstance { values })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }
}

/// Finds permutations `sigma`, `pi` of `1..=n` with
/// `sigma[i] + pi[i] == values[i]`, trying every `sigma` in lexicographic
/// order and deriving `pi` from it.
pub fn permutation_sum(instance: &PermutationSumInstance) -> Option<(Vec<u64>, Vec<u64>)> {
    let x = instance.values();
    let n = x.len();
    let mut sigma: Vec<usize> = (1..=n).collect();
    loop {
        let mut used = vec![false; n + 1];
        let pi: Option<Vec<u64>> = sigma
            .iter()
            .zip(x)
            .map(|(&s, &xi)| {
                let p = xi.checked_sub(s as u64)? as usize;
                if p == 0 || p > n || std::mem::replace(&mut used[p], true) {
                    return None;
                }
                Some(p as u64)
            })
            .collect();
        if let Some(pi) = pi {
            return Some((sigma.iter().map(|&s| s as u64).collect(), pi));
        }
        if !next_permutation(&mut sigma) {
            return None;
        }
    }
}
