//! Outcomes, strict orders, preference profiles and positional scoring rules.
//!
//! Positions follow the "number of outcomes beaten" convention: in an order
//! over `m` outcomes the most preferred outcome sits at position `m - 1` and
//! the least preferred at position `0`. Orders are always stored and printed
//! most-preferred first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A named outcome (candidate). Names compare bytewise.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome(Arc<str>);

impl Outcome {
    pub fn new(name: &str) -> Result<Self> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidName(name.to_owned()));
        }
        Ok(Outcome(Arc::from(name)))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Outcome::new(s)
    }
}

/// A strict total order over a set of outcomes, most preferred first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Order {
    ranking: Vec<Outcome>,
}

impl Order {
    /// Builds an order from a ranking, most preferred first.
    pub fn new(ranking: Vec<Outcome>) -> Result<Self> {
        if ranking.len() < 2 {
            return Err(Error::TooFewOutcomes(ranking.len()));
        }
        let mut seen = BTreeSet::new();
        for o in &ranking {
            if !seen.insert(o) {
                return Err(Error::DuplicateOutcome(o.clone()));
            }
        }
        Ok(Order { ranking })
    }

    /// Parses whitespace-separated names, most preferred first.
    pub fn parse(text: &str) -> Result<Self> {
        let ranking = text.split_whitespace().map(Outcome::new).collect::<Result<Vec<_>>>()?;
        Order::new(ranking)
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    /// Outcomes most preferred first.
    pub fn ranking(&self) -> &[Outcome] {
        &self.ranking
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Outcome> {
        self.ranking.iter()
    }

    pub fn top(&self) -> &Outcome {
        &self.ranking[0]
    }

    pub fn contains(&self, o: &Outcome) -> bool {
        self.ranking.contains(o)
    }

    /// Number of outcomes `o` is preferred over.
    pub fn position(&self, o: &Outcome) -> Result<usize> {
        self.ranking
            .iter()
            .position(|x| x == o)
            .map(|index| self.ranking.len() - 1 - index)
            .ok_or_else(|| Error::UnknownOutcome(o.clone()))
    }

    /// The outcome sitting at `position` (0 = least preferred).
    pub fn at_position(&self, position: usize) -> Option<&Outcome> {
        let m = self.ranking.len();
        (position < m).then(|| &self.ranking[m - 1 - position])
    }

    /// True when `a` is ranked above `b`. Both must belong to the order.
    pub fn prefers(&self, a: &Outcome, b: &Outcome) -> Result<bool> {
        Ok(self.position(a)? > self.position(b)?)
    }

    /// The outcome set in bytewise name order.
    pub fn outcome_set(&self) -> BTreeSet<Outcome> {
        self.ranking.iter().cloned().collect()
    }

    pub fn same_outcomes(&self, other: &Order) -> bool {
        self.len() == other.len() && self.ranking.iter().all(|o| other.contains(o))
    }

    pub(crate) fn from_ranking_unchecked(ranking: Vec<Outcome>) -> Self {
        debug_assert!(Order::new(ranking.clone()).is_ok());
        Order { ranking }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, o) in self.ranking.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.ranking.iter().map(Outcome::name).collect();
        write!(f, "Order({})", names.join(">"))
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Order::parse(s)
    }
}

/// A non-empty multiset of votes over one common outcome set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    votes: Vec<Order>,
}

impl Profile {
    pub fn new(votes: Vec<Order>) -> Result<Self> {
        let first = votes.first().ok_or(Error::EmptyProfile)?;
        if votes.iter().any(|v| !v.same_outcomes(first)) {
            return Err(Error::OutcomeSetMismatch);
        }
        Ok(Profile { votes })
    }

    pub fn votes(&self) -> &[Order] {
        &self.votes
    }

    pub fn len(&self) -> usize {
        self.votes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.votes.is_empty()
    }

    /// Number of outcomes ranked by every vote.
    pub fn num_outcomes(&self) -> usize {
        self.votes[0].len()
    }

    pub fn outcome_set(&self) -> BTreeSet<Outcome> {
        self.votes[0].outcome_set()
    }

    /// A new profile with `extra` votes appended.
    pub fn with_votes(&self, extra: &[Order]) -> Result<Profile> {
        let mut votes = self.votes.clone();
        votes.extend_from_slice(extra);
        Profile::new(votes)
    }
}

/// A positional scoring rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// `(m-1, m-2, ..., 1, 0)`.
    Borda,
    /// `x` ones followed by zeros; `x = 1` is Plurality, `x = m - 1` is Veto.
    Approval(usize),
    /// An explicit vector, most preferred position first.
    Scoring(Vec<u64>),
}

impl Rule {
    /// The scoring vector `(s_{m-1}, ..., s_0)` for `m` outcomes.
    pub fn vector(&self, m: usize) -> Result<Vec<u64>> {
        if m < 2 {
            return Err(Error::TooFewOutcomes(m));
        }
        let vector = match self {
            Rule::Borda => (0..m as u64).rev().collect(),
            Rule::Approval(x) => {
                if *x == 0 || *x >= m {
                    return Err(Error::InvalidRule(format!(
                        "approval:{x} needs 1 <= x <= {} for {m} outcomes",
                        m - 1
                    )));
                }
                (0..m).map(|i| u64::from(i < *x)).collect()
            }
            Rule::Scoring(v) => {
                if v.len() != m {
                    return Err(Error::InvalidRule(format!(
                        "scoring vector has {} entries but there are {m} outcomes",
                        v.len()
                    )));
                }
                if v.windows(2).any(|w| w[0] < w[1]) {
                    return Err(Error::InvalidRule("scoring vector must be non-increasing".into()));
                }
                if v[0] == v[m - 1] {
                    return Err(Error::InvalidRule("top score must exceed bottom score".into()));
                }
                v.clone()
            }
        };
        Ok(vector)
    }

    pub fn is_approval(&self) -> bool {
        matches!(self, Rule::Approval(_))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Borda => f.write_str("borda"),
            Rule::Approval(x) => write!(f, "approval:{x}"),
            Rule::Scoring(v) => {
                let parts: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "scoring:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidRule(format!("unknown rule token `{s}`"));
        match s.split_once(':') {
            None if s == "borda" => Ok(Rule::Borda),
            None if s == "plurality" => Ok(Rule::Approval(1)),
            None => Err(bad()),
            Some(("approval", x)) => x.trim().parse().map(Rule::Approval).map_err(|_| bad()),
            Some(("scoring", v)) => v
                .split(',')
                .map(|t| t.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Rule::Scoring)
                .map_err(|_| bad()),
            Some(_) => Err(bad()),
        }
    }
}

/// Aggregated scores, one entry per outcome.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ScoreTable {
    scores: BTreeMap<Outcome, u64>,
}

impl ScoreTable {
    pub fn get(&self, o: &Outcome) -> Option<u64> {
        self.scores.get(o).copied()
    }

    /// Score of `o`, panicking on unknown outcomes.
    pub fn score(&self, o: &Outcome) -> u64 {
        self.scores[o]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, u64)> {
        self.scores.iter().map(|(o, s)| (o, *s))
    }

    pub fn total(&self) -> u64 {
        self.scores.values().sum()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Outcomes by descending score; equal scores rank the bytewise-smaller
    /// name higher.
    pub fn ranking(&self) -> Order {
        let mut entries: Vec<(&Outcome, u64)> = self.iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Order::from_ranking_unchecked(entries.into_iter().map(|(o, _)| o.clone()).collect())
    }

    /// The points a single vote awards, keyed by outcome.
    pub(crate) fn of_vote(vote: &Order, vector: &[u64]) -> ScoreTable {
        let mut table = ScoreTable::default();
        table.add_vote(vote, vector);
        table
    }

    pub(crate) fn add_vote(&mut self, vote: &Order, vector: &[u64]) {
        // vector is most-preferred first, as is the ranking
        for (o, s) in vote.iter().zip(vector) {
            *self.scores.entry(o.clone()).or_insert(0) += s;
        }
    }
}

impl fmt::Display for ScoreTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ranking = self.ranking();
        for (i, o) in ranking.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{o}={}", self.score(o))?;
        }
        Ok(())
    }
}

/// Number of outcomes `o` is preferred over in `order`.
pub fn position(o: &Outcome, order: &Order) -> Result<usize> {
    order.position(o)
}

/// Realizes `rule` for `m` outcomes.
pub fn realize_vector(rule: &Rule, m: usize) -> Result<Vec<u64>> {
    rule.vector(m)
}

/// Sums the points each vote awards.
pub fn aggregate(profile: &Profile, rule: &Rule) -> Result<ScoreTable> {
    let vector = rule.vector(profile.num_outcomes())?;
    Ok(tally(profile.votes(), &vector))
}

/// The social welfare function: outcomes ordered by aggregated score with
/// bytewise-ascending names breaking ties.
pub fn swf(profile: &Profile, rule: &Rule) -> Result<Order> {
    Ok(aggregate(profile, rule)?.ranking())
}

/// Tallies already-validated votes with a realized vector.
pub(crate) fn tally<'a, I>(votes: I, vector: &[u64]) -> ScoreTable
where
    I: IntoIterator<Item = &'a Order>,
{
    let mut table = ScoreTable::default();
    for vote in votes {
        table.add_vote(vote, vector);
    }
    table
}
