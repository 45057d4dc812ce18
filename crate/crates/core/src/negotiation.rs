//! Two-party bargaining over a shared outcome set.
//!
//! [`NegotiationInstance::spe_result`] solves the Voting by Alternating
//! Offers and Vetoes game by backward induction over (remaining outcomes,
//! proposer) states. [`NegotiationInstance::rc`] is the Rational Compromise
//! rule: the first non-empty intersection of the two parties' top-`j` sets.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::voting::{Order, Outcome};

/// Largest outcome set the backward-induction table is sized for.
pub const MAX_NEGOTIATION_OUTCOMES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Party {
    Team,
    Other,
}

impl Party {
    pub fn opponent(self) -> Party {
        match self {
            Party::Team => Party::Other,
            Party::Other => Party::Team,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Team => "team",
            Party::Other => "other",
        })
    }
}

impl std::str::FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "team" => Ok(Party::Team),
            "other" => Ok(Party::Other),
            _ => Err(Error::InvalidQuery(format!("unknown party `{s}`"))),
        }
    }
}

/// The `j` most preferred outcomes of `order`.
pub fn top_set(order: &Order, j: usize) -> Result<BTreeSet<Outcome>> {
    if j == 0 || j > order.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: order.len(),
        });
    }
    Ok(order.ranking()[..j].iter().cloned().collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RcResult {
    /// Smallest `j` whose top-`j` sets intersect.
    pub terminating_index: usize,
    pub outcomes: BTreeSet<Outcome>,
}

/// The team's order and the other party's order over one outcome set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegotiationInstance {
    team: Order,
    other: Order,
}

impl NegotiationInstance {
    pub fn new(team: Order, other: Order) -> Result<Self> {
        if !team.same_outcomes(&other) {
            return Err(Error::OutcomeSetMismatch);
        }
        if team.len() > MAX_NEGOTIATION_OUTCOMES {
            return Err(Error::TooManyOutcomes {
                got: team.len(),
                max: MAX_NEGOTIATION_OUTCOMES,
            });
        }
        Ok(NegotiationInstance { team, other })
    }

    pub fn team(&self) -> &Order {
        &self.team
    }

    pub fn other(&self) -> &Order {
        &self.other
    }

    pub fn order_of(&self, party: Party) -> &Order {
        match party {
            Party::Team => &self.team,
            Party::Other => &self.other,
        }
    }

    /// Rational Compromise.
    pub fn rc(&self) -> RcResult {
        let m = self.team.len();
        let mut seen_team = BTreeSet::new();
        let mut seen_other = BTreeSet::new();
        for j in 1..=m {
            seen_team.insert(&self.team.ranking()[j - 1]);
            seen_other.insert(&self.other.ranking()[j - 1]);
            let both: BTreeSet<Outcome> = seen_team.intersection(&seen_other).map(|o| (*o).clone()).collect();
            if !both.is_empty() {
                return RcResult {
                    terminating_index: j,
                    outcomes: both,
                };
            }
        }
        unreachable!("top-m sets of orders over one outcome set always intersect")
    }

    /// The subgame-perfect outcome of alternating offers started by
    /// `initiator`.
    pub fn spe_result(&self, initiator: Party) -> Outcome {
        SpeSolver::new(self).solve(initiator)
    }

    /// `(N_t, N_o)`: the outcome with the team opening, then with the other
    /// party opening.
    pub fn spe_both(&self) -> (Outcome, Outcome) {
        let mut solver = SpeSolver::new(self);
        let team_first = solver.solve(Party::Team);
        let other_first = solver.solve(Party::Other);
        (team_first, other_first)
    }
}

const UNSOLVED: u8 = u8::MAX;

/// Backward induction over bitmask states, outcome indices following the
/// team's ranking. The memo table lives only as long as the solver.
struct SpeSolver<'a> {
    instance: &'a NegotiationInstance,
    m: usize,
    /// rank[party][i]: position of outcome i in that party's order.
    rank: [Vec<usize>; 2],
    memo: Vec<u8>,
}

impl<'a> SpeSolver<'a> {
    fn new(instance: &'a NegotiationInstance) -> Self {
        let m = instance.team.len();
        let team_rank = (0..m).map(|i| m - 1 - i).collect();
        let other_rank = instance
            .team
            .iter()
            .map(|o| instance.other.position(o).expect("validated outcome sets"))
            .collect();
        SpeSolver {
            instance,
            m,
            rank: [team_rank, other_rank],
            memo: vec![UNSOLVED; 2 << m],
        }
    }

    fn solve(&mut self, initiator: Party) -> Outcome {
        let all = (1u32 << self.m) - 1;
        let idx = self.value(all, initiator);
        self.instance.team.ranking()[idx].clone()
    }

    fn slot(party: Party) -> usize {
        match party {
            Party::Team => 0,
            Party::Other => 1,
        }
    }

    fn value(&mut self, remaining: u32, proposer: Party) -> usize {
        if remaining.count_ones() == 1 {
            return remaining.trailing_zeros() as usize;
        }
        let key = ((remaining as usize) << 1) | Self::slot(proposer);
        if self.memo[key] != UNSOLVED {
            return self.memo[key] as usize;
        }
        let responder = proposer.opponent();
        let mut best: Option<usize> = None;
        let mut bits = remaining;
        while bits != 0 {
            let offer = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let continuation = self.value(remaining & !(1 << offer), responder);
            assert_ne!(offer, continuation, "responder indifference cannot arise");
            let responder_rank = &self.rank[Self::slot(responder)];
            let realized = if responder_rank[offer] > responder_rank[continuation] {
                offer
            } else {
                continuation
            };
            let proposer_rank = &self.rank[Self::slot(proposer)];
            if best.is_none_or(|b| proposer_rank[realized] > proposer_rank[b]) {
                best = Some(realized);
            }
        }
        let best = best.expect("non-empty state");
        self.memo[key] = best as u8;
        best
    }
}
