//! Plain-text instance files.
//!
//! ```text
//! rule: borda
//! other: b p a c
//! team:
//! p c a b
//! b a c p
//! ```
//!
//! `#` starts a comment line, tokens are whitespace separated, and every team
//! line must be a permutation of the `other:` line.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::voting::{Order, Profile, Rule};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub rule: Rule,
    pub other: Order,
    pub team: Profile,
}

impl Instance {
    pub fn new(rule: Rule, other: Order, team: Profile) -> Result<Self> {
        if !team.votes()[0].same_outcomes(&other) {
            return Err(Error::OutcomeSetMismatch);
        }
        rule.vector(other.len())?;
        Ok(Instance { rule, other, team })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses an instance file. Errors carry the 1-based line number.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut rule: Option<(usize, Rule)> = None;
    let mut other: Option<Order> = None;
    let mut in_team = false;
    let mut votes = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if in_team {
            let vote = Order::parse(line).map_err(|e| parse_err(line_no, e.to_string()))?;
            let expected = other.as_ref().expect("team follows other");
            if !vote.same_outcomes(expected) {
                return Err(parse_err(
                    line_no,
                    format!("`{line}` is not a permutation of the other party's outcomes"),
                ));
            }
            votes.push(vote);
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| parse_err(line_no, format!("expected `key: value`, got `{line}`")))?;
        match key.trim() {
            "rule" => {
                let r = value
                    .trim()
                    .parse::<Rule>()
                    .map_err(|e| parse_err(line_no, e.to_string()))?;
                rule = Some((line_no, r));
            }
            "other" => {
                let o = Order::parse(value).map_err(|e| parse_err(line_no, e.to_string()))?;
                other = Some(o);
            }
            "team" => {
                if !value.trim().is_empty() {
                    return Err(parse_err(line_no, "votes go on the lines after `team:`"));
                }
                if other.is_none() {
                    return Err(parse_err(line_no, "`other:` must precede `team:`"));
                }
                in_team = true;
            }
            k => return Err(parse_err(line_no, format!("unknown key `{k}`"))),
        }
    }

    let last = text.lines().count().max(1);
    let (rule_line, rule) = rule.ok_or_else(|| parse_err(last, "missing `rule:` line"))?;
    let other = other.ok_or_else(|| parse_err(last, "missing `other:` line"))?;
    if !in_team {
        return Err(parse_err(last, "missing `team:` section"));
    }
    if votes.is_empty() {
        return Err(parse_err(last, "team has no votes"));
    }
    rule.vector(other.len())
        .map_err(|e| parse_err(rule_line, e.to_string()))?;
    let team = Profile::new(votes)?;
    Ok(Instance { rule, other, team })
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rule: {}", self.rule)?;
        writeln!(f, "other: {}", self.other)?;
        writeln!(f, "team:")?;
        for vote in self.team.votes() {
            writeln!(f, "{vote}")?;
        }
        Ok(())
    }
}

impl FromStr for Instance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_instance(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "\
# four honest voters, Borda
rule: borda
other: b p a c
team:
p c a b
p b a c
b p a c
b a c p
";

    #[test]
    fn round_trip() {
        let inst = parse_instance(EXAMPLE).unwrap();
        assert_eq!(inst.team.len(), 4);
        let again = parse_instance(&inst.to_string()).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn approval_token() {
        let text = EXAMPLE.replace("borda", "approval:2");
        let inst = parse_instance(&text).unwrap();
        assert_eq!(inst.rule.vector(4).unwrap(), vec![1, 1, 0, 0]);
    }

    #[test]
    fn errors_name_the_line() {
        let text = EXAMPLE.replace("b p a c\nb a c p", "b p a c\nb a c");
        let err = parse_instance(&text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 8, .. }), "{err}");

        let err = parse_instance(&EXAMPLE.replace("borda", "copeland")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let err = parse_instance(&EXAMPLE.replace("other: b p a c", "other: b p b c")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        let err = parse_instance("rule: borda\nother: a b\nteam:\n").unwrap_err();
        assert!(err.to_string().contains("no votes"), "{err}");

        let err = parse_instance(&EXAMPLE.replace("borda", "approval:4")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let err = parse_instance(&EXAMPLE.replace("p b a c\n", "p b a c x\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err}");
    }
}
