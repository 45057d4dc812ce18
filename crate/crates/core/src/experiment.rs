//! Seeded instance generation and solver-versus-oracle experiments.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::manipulation::{gate_threshold, solve, verify, Decision, GateMode, ManipulationQuery, Mode};
use crate::oracle::{brute_force, OracleLimits};
use crate::voting::{Order, Outcome, Profile, Rule};

/// How the target outcome of a generated instance is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TargetPolicy {
    /// Uniform among outcomes the configured gate lets through; uniform
    /// among all outcomes if there are none.
    #[default]
    GatePassing,
    Uniform,
}

impl std::fmt::Display for TargetPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TargetPolicy::GatePassing => "gate",
            TargetPolicy::Uniform => "uniform",
        })
    }
}

impl std::str::FromStr for TargetPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gate" => Ok(TargetPolicy::GatePassing),
            "uniform" => Ok(TargetPolicy::Uniform),
            _ => Err(Error::InvalidQuery(format!("unknown target policy `{s}`"))),
        }
    }
}

/// What each instance is checked for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Check {
    /// Solver and oracle decide the same with `k` manipulators.
    #[default]
    Equivalence,
    /// Oracle success with `k` implies solver success with `k + 1`.
    OneAdditive,
    /// Both gate modes against the oracle; diagnostic only.
    GateComparison,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Check::Equivalence => "equivalence",
            Check::OneAdditive => "one-additive",
            Check::GateComparison => "gates",
        })
    }
}

impl std::str::FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equivalence" => Ok(Check::Equivalence),
            "one-additive" => Ok(Check::OneAdditive),
            "gates" => Ok(Check::GateComparison),
            _ => Err(Error::InvalidQuery(format!("unknown check `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub count: usize,
    /// Outcomes per instance.
    pub m: usize,
    /// Honest voters per instance.
    pub n: usize,
    /// Manipulators.
    pub k: usize,
    pub rule: Rule,
    pub mode: Mode,
    pub gate: GateMode,
    pub target_policy: TargetPolicy,
    pub check: Check,
    pub limits: OracleLimits,
}

impl ExperimentConfig {
    pub fn new(seed: u64, count: usize, m: usize, n: usize, k: usize, rule: Rule, mode: Mode) -> Self {
        ExperimentConfig {
            seed,
            count,
            m,
            n,
            k,
            rule,
            mode,
            gate: GateMode::default(),
            target_policy: TargetPolicy::default(),
            check: Check::default(),
            limits: OracleLimits::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyProfile);
        }
        self.rule.vector(self.m)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedInstance {
    pub index: usize,
    pub instance: Instance,
    pub target: Outcome,
}

impl GeneratedInstance {
    /// Hex SHA-256 over the serialized instance and its target.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.instance.to_string().as_bytes());
        hasher.update(format!("target: {}\n", self.target).as_bytes());
        hex::encode(hasher.finalize())
    }

    pub fn query(&self, mode: Mode, k: usize, gate: GateMode) -> Result<ManipulationQuery> {
        Ok(ManipulationQuery::new(
            self.instance.team.clone(),
            self.instance.other.clone(),
            self.instance.rule.clone(),
            mode,
            self.target.clone(),
            k,
        )?
        .with_gate(gate))
    }

    /// The instance file preceded by a comment with the command that
    /// reproduces the check.
    pub fn replay_text(&self, config: &ExperimentConfig) -> String {
        let extra = match config.check {
            Check::OneAdditive => " --one-additive",
            _ => "",
        };
        format!(
            "# replay: oracle --compare{extra} --mode {} --target {} --k {} --gate {}\n{}",
            config.mode, self.target, config.k, config.gate, self.instance
        )
    }
}

/// Candidate names `c0 .. c{m-1}`.
pub fn candidate_names(m: usize) -> Vec<Outcome> {
    (0..m)
        .map(|i| Outcome::new(&format!("c{i}")).expect("valid name"))
        .collect()
}

/// The deterministic instance stream for `config`.
pub fn generate(config: &ExperimentConfig) -> Result<Vec<GeneratedInstance>> {
    config.validate()?;
    let names = candidate_names(config.m);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let shuffled = |rng: &mut ChaCha8Rng| {
        let mut v = names.clone();
        v.shuffle(rng);
        Order::new(v).expect("permutation of distinct names")
    };
    let mut out = Vec::with_capacity(config.count);
    for index in 0..config.count {
        let team: Vec<Order> = (0..config.n).map(|_| shuffled(&mut rng)).collect();
        let other = shuffled(&mut rng);
        let pool: Vec<&Outcome> = match config.target_policy {
            TargetPolicy::Uniform => names.iter().collect(),
            TargetPolicy::GatePassing => {
                let threshold = gate_threshold(config.m, config.mode, config.gate);
                let passing: Vec<&Outcome> = names
                    .iter()
                    .filter(|o| other.position(o).expect("same names") >= threshold)
                    .collect();
                if passing.is_empty() {
                    names.iter().collect()
                } else {
                    passing
                }
            }
        };
        let target = pool[rng.random_range(0..pool.len())].clone();
        out.push(GeneratedInstance {
            index,
            instance: Instance::new(config.rule.clone(), other, Profile::new(team)?)?,
            target,
        });
    }
    Ok(out)
}

/// Hex SHA-256 over the concatenated instance digests of a stream.
pub fn stream_digest(stream: &[GeneratedInstance]) -> String {
    let mut hasher = Sha256::new();
    for g in stream {
        hasher.update(g.digest().as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentRecord {
    pub index: usize,
    pub digest: String,
    pub target: Outcome,
    pub solver: Decision,
    /// `None` when the oracle refused the instance.
    pub oracle: Option<Decision>,
    pub agree: bool,
    /// One-additive check: the solver with one extra manipulator.
    pub solver_plus_one: Option<Decision>,
    /// Gate comparison: the solver under the feasibility gate.
    pub alt_gate: Option<Decision>,
    pub alt_agree: Option<bool>,
    pub error: Option<String>,
    pub solver_micros: u128,
    pub oracle_micros: u128,
    pub replay: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReportSummary {
    pub instances: usize,
    pub agreements: usize,
    pub disagreements: usize,
    pub refusals: usize,
    pub solver_positive: usize,
    pub oracle_positive: usize,
    /// Gate comparison: feasibility-gate disagreements with the oracle.
    pub alt_disagreements: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<ExperimentRecord>,
}

impl ExperimentReport {
    /// Counts derived from the records.
    pub fn summary(&self) -> ReportSummary {
        let mut s = ReportSummary {
            instances: self.records.len(),
            ..Default::default()
        };
        for r in &self.records {
            if r.oracle.is_none() {
                s.refusals += 1;
            } else if r.agree {
                s.agreements += 1;
            } else {
                s.disagreements += 1;
            }
            s.solver_positive += usize::from(r.solver.is_positive());
            s.oracle_positive += usize::from(r.oracle.is_some_and(Decision::is_positive));
            s.alt_disagreements += usize::from(r.alt_agree == Some(false));
        }
        s
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &ExperimentRecord> {
        self.records.iter().filter(|r| r.oracle.is_some() && !r.agree)
    }

    /// Comma-separated rows under a fixed header, then a `#` summary block.
    /// Timings are left out unless requested so that reports of one config
    /// compare equal byte for byte.
    pub fn to_csv(&self, timings: bool) -> String {
        let mut out = String::from("index,digest,mode,target,k,solver,oracle,agree,solver_k_plus_1,alt_gate,alt_agree");
        if timings {
            out.push_str(",solver_us,oracle_us");
        }
        out.push('\n');
        let opt = |d: Option<Decision>| d.map_or("-".to_string(), |d| d.to_string());
        for r in &self.records {
            let oracle = match (&r.oracle, &r.error) {
                (Some(d), _) => d.to_string(),
                (None, _) => "refused".to_string(),
            };
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.index,
                &r.digest[..16],
                self.config.mode,
                r.target,
                self.config.k,
                r.solver,
                oracle,
                r.agree,
                opt(r.solver_plus_one),
                opt(r.alt_gate),
                r.alt_agree.map_or("-".to_string(), |a| a.to_string()),
            );
            if timings {
                let _ = write!(out, ",{},{}", r.solver_micros, r.oracle_micros);
            }
            out.push('\n');
        }
        let s = self.summary();
        let c = &self.config;
        let _ = writeln!(
            out,
            "# config: seed={} count={} m={} n={} k={} rule={} mode={} gate={} targets={} check={}",
            c.seed, c.count, c.m, c.n, c.k, c.rule, c.mode, c.gate, c.target_policy, c.check
        );
        let _ = writeln!(out, "# instances: {}", s.instances);
        let _ = writeln!(out, "# agreements: {}", s.agreements);
        let _ = writeln!(out, "# disagreements: {}", s.disagreements);
        let _ = writeln!(out, "# refusals: {}", s.refusals);
        let _ = writeln!(out, "# solver_positive: {}", s.solver_positive);
        let _ = writeln!(out, "# oracle_positive: {}", s.oracle_positive);
        if c.check == Check::GateComparison {
            let _ = writeln!(out, "# paper_gate_disagreements: {}", s.disagreements);
            let _ = writeln!(out, "# feasible_gate_disagreements: {}", s.alt_disagreements);
        }
        out
    }
}

/// Decision of the solver, downgraded to `No` if its votes fail to verify.
fn checked_solve(query: &ManipulationQuery) -> Result<Decision> {
    let result = solve(query)?;
    if result.decision.is_positive() {
        let ok = verify(
            &query.honest,
            &query.other,
            &result.votes,
            &query.rule,
            query.mode,
            &query.target,
        )?;
        if !ok {
            return Ok(Decision::No);
        }
    }
    Ok(result.decision)
}

fn evaluate(config: &ExperimentConfig, g: &GeneratedInstance) -> Result<ExperimentRecord> {
    let query = g.query(config.mode, config.k, config.gate)?;
    let started = Instant::now();
    let solver = checked_solve(&query)?;
    let (solver_plus_one, alt_gate) = match config.check {
        Check::Equivalence => (None, None),
        Check::OneAdditive => (
            Some(checked_solve(&query.clone().with_manipulators(config.k + 1))?),
            None,
        ),
        Check::GateComparison => (
            None,
            Some(checked_solve(&query.clone().with_gate(GateMode::Feasibility))?),
        ),
    };
    let solver_micros = started.elapsed().as_micros();

    let started = Instant::now();
    let oracle = brute_force(&query, &config.limits);
    let oracle_micros = started.elapsed().as_micros();
    let (oracle, error) = match oracle {
        Ok(o) => (Some(o.decision), None),
        Err(e @ Error::LimitExceeded(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };

    let agree = match (config.check, oracle) {
        (_, None) => false,
        (Check::OneAdditive, Some(o)) => !o.is_positive() || solver_plus_one.is_some_and(Decision::is_positive),
        (_, Some(o)) => o.is_positive() == solver.is_positive(),
    };
    let alt_agree = match (alt_gate, oracle) {
        (Some(a), Some(o)) => Some(a.is_positive() == o.is_positive()),
        _ => None,
    };
    Ok(ExperimentRecord {
        index: g.index,
        digest: g.digest(),
        target: g.target.clone(),
        solver,
        oracle,
        agree,
        solver_plus_one,
        alt_gate,
        alt_agree,
        error,
        solver_micros,
        oracle_micros,
        replay: g.replay_text(config),
    })
}

/// Generates the config's instances and checks each one. Instances are
/// evaluated in parallel; records come back in instance order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let stream = generate(config)?;
    let records = stream
        .par_iter()
        .map(|g| evaluate(config, g))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config: config.clone(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig::new(7, 20, 4, 3, 1, Rule::Borda, Mode::Constructive)
    }

    #[test]
    fn same_seed_same_stream() {
        let a = generate(&config()).unwrap();
        let b = generate(&config()).unwrap();
        assert_eq!(a, b);
        assert_eq!(stream_digest(&a), stream_digest(&b));
        let mut other = config();
        other.seed = 8;
        assert_ne!(stream_digest(&a), stream_digest(&generate(&other).unwrap()));
    }

    #[test]
    fn empty_stream() {
        let mut c = config();
        c.count = 0;
        assert!(generate(&c).unwrap().is_empty());
    }

    #[test]
    fn gate_passing_targets() {
        for g in generate(&config()).unwrap() {
            assert!(g.instance.other.position(&g.target).unwrap() >= 2);
            assert_eq!(g.instance.team.len(), 3);
        }
    }

    #[test]
    fn summary_matches_records() {
        let report = run_experiment(&config()).unwrap();
        let s = report.summary();
        assert_eq!(s.instances, 20);
        assert_eq!(s.agreements + s.disagreements + s.refusals, s.instances);
        let csv = report.to_csv(false);
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 21);
    }

    #[test]
    fn refusals_are_recorded() {
        let mut c = config();
        c.count = 2;
        c.limits.max_voters = 1;
        let report = run_experiment(&c).unwrap();
        assert_eq!(report.summary().refusals, 2);
        assert!(report.records[0].error.as_deref().unwrap().contains("multisets"));
    }
}
