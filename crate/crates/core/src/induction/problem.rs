use std::path::Path;

use serde::{Deserialize, Serialize};

use super::InductionError;
use crate::machine::Integer;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub inputs: Vec<Integer>,
    pub output: Integer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemKind {
    /// Integer function given by input/output examples.
    Operator { examples: Vec<Example> },
    /// Bit stream given by an observed prefix.
    Sequence { prefix: Vec<u8> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub kind: ProblemKind,
}

/// Integers are JSON numbers, or decimal strings when they exceed i64.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Num(i64),
    Text(String),
}

impl IntRepr {
    fn to_integer(&self) -> Result<Integer, InductionError> {
        match self {
            IntRepr::Num(n) => Ok(Integer::from(*n)),
            IntRepr::Text(t) => t
                .parse()
                .map_err(|_| InductionError::InvalidProblem(format!("'{t}' is not an integer"))),
        }
    }

    fn from_integer(i: &Integer) -> IntRepr {
        match i.as_i64() {
            Some(n) => IntRepr::Num(n),
            None => IntRepr::Text(i.to_string()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExampleFile {
    #[serde(rename = "in")]
    inputs: Vec<IntRepr>,
    out: IntRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    format_version: u32,
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    examples: Option<Vec<ExampleFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prefix: Option<String>,
}

impl Problem {
    pub fn operator(name: &str, examples: &[(&[i64], i64)]) -> Result<Problem, InductionError> {
        let p = Problem {
            name: name.to_string(),
            kind: ProblemKind::Operator {
                examples: examples
                    .iter()
                    .map(|(i, o)| Example {
                        inputs: i.iter().map(|&v| Integer::from(v)).collect(),
                        output: Integer::from(*o),
                    })
                    .collect(),
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn sequence(name: &str, prefix: &str) -> Result<Problem, InductionError> {
        let p = Problem {
            name: name.to_string(),
            kind: ProblemKind::Sequence {
                prefix: parse_bits(prefix)?,
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ProblemKind::Operator { .. } => "operator",
            ProblemKind::Sequence { .. } => "sequence",
        }
    }

    /// Number of program parameters a solution needs.
    pub fn arity(&self) -> usize {
        match &self.kind {
            ProblemKind::Operator { examples } => examples[0].inputs.len(),
            ProblemKind::Sequence { .. } => 0,
        }
    }

    pub(crate) fn wrong_kind(&self, expected: &'static str) -> InductionError {
        InductionError::WrongKind {
            name: self.name.clone(),
            expected,
            actual: self.kind_name(),
        }
    }

    pub fn validate(&self) -> Result<(), InductionError> {
        let invalid = |m: String| Err(InductionError::InvalidProblem(m));
        if self.name.trim().is_empty() {
            return invalid("name is empty".into());
        }
        match &self.kind {
            ProblemKind::Operator { examples } => {
                let Some(first) = examples.first() else {
                    return invalid(format!("{}: no examples", self.name));
                };
                if examples
                    .iter()
                    .any(|e| e.inputs.len() != first.inputs.len())
                {
                    return invalid(format!("{}: examples disagree on arity", self.name));
                }
                for (i, a) in examples.iter().enumerate() {
                    if examples[..i]
                        .iter()
                        .any(|b| b.inputs == a.inputs && b.output != a.output)
                    {
                        return invalid(format!("{}: contradictory examples", self.name));
                    }
                }
            }
            ProblemKind::Sequence { prefix } => {
                if prefix.is_empty() {
                    return invalid(format!("{}: empty prefix", self.name));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Problem, InductionError> {
        let f: ProblemFile = serde_json::from_str(text)?;
        if f.format_version != FORMAT_VERSION {
            return Err(InductionError::InvalidProblem(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                f.format_version
            )));
        }
        let kind = match (f.kind.as_str(), f.examples, f.prefix) {
            ("operator", Some(examples), None) => ProblemKind::Operator {
                examples: examples
                    .iter()
                    .map(|e| {
                        Ok(Example {
                            inputs: e
                                .inputs
                                .iter()
                                .map(IntRepr::to_integer)
                                .collect::<Result<_, _>>()?,
                            output: e.out.to_integer()?,
                        })
                    })
                    .collect::<Result<_, InductionError>>()?,
            },
            ("sequence", None, Some(prefix)) => ProblemKind::Sequence {
                prefix: parse_bits(&prefix)?,
            },
            ("operator", _, _) => {
                return Err(InductionError::InvalidProblem(
                    "operator problems need 'examples' only".into(),
                ))
            }
            ("sequence", _, _) => {
                return Err(InductionError::InvalidProblem(
                    "sequence problems need 'prefix' only".into(),
                ))
            }
            (other, _, _) => {
                return Err(InductionError::InvalidProblem(format!(
                    "unknown kind '{other}'"
                )))
            }
        };
        let p = Problem { name: f.name, kind };
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Problem, InductionError> {
        Problem::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let (examples, prefix) = match &self.kind {
            ProblemKind::Operator { examples } => (
                Some(
                    examples
                        .iter()
                        .map(|e| ExampleFile {
                            inputs: e.inputs.iter().map(IntRepr::from_integer).collect(),
                            out: IntRepr::from_integer(&e.output),
                        })
                        .collect(),
                ),
                None,
            ),
            ProblemKind::Sequence { prefix } => (None, Some(bits_to_string(prefix))),
        };
        let f = ProblemFile {
            format_version: FORMAT_VERSION,
            name: self.name.clone(),
            kind: self.kind_name().to_string(),
            examples,
            prefix,
        };
        serde_json::to_string_pretty(&f).expect("problem serializes")
    }
}

/// Parses a string of '0'/'1' characters.
pub fn parse_bits(s: &str) -> Result<Vec<u8>, InductionError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(InductionError::InvalidProblem(format!(
                "'{other}' is not a bit"
            ))),
        })
        .collect()
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter()
        .map(|b| if *b == 0 { '0' } else { '1' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = Problem::operator("square", &[(&[2], 4), (&[3], 9)]).unwrap();
        assert_eq!(Problem::from_json(&p.to_json()).unwrap(), p);
        let s = Problem::sequence("alt", "0101").unwrap();
        assert_eq!(Problem::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn big_outputs_as_strings() {
        let p = Problem::from_json(
            r#"{"format_version":1,"name":"big","kind":"operator","examples":[{"in":[1],"out":"123456789012345678901234567890"}]}"#,
        )
        .unwrap();
        let ProblemKind::Operator { examples } = &p.kind else {
            panic!()
        };
        assert_eq!(
            examples[0].output.to_string(),
            "123456789012345678901234567890"
        );
        assert_eq!(Problem::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn rejects_bad_files() {
        for bad in [
            r#"{"format_version":2,"name":"a","kind":"sequence","prefix":"01"}"#,
            r#"{"format_version":1,"name":"a","kind":"sequence","prefix":""}"#,
            r#"{"format_version":1,"name":"a","kind":"sequence","prefix":"012"}"#,
            r#"{"format_version":1,"name":"a","kind":"operator","examples":[]}"#,
            r#"{"format_version":1,"name":"a","kind":"operator","examples":[{"in":[1],"out":1},{"in":[1,2],"out":1}]}"#,
            r#"{"format_version":1,"name":"a","kind":"operator","examples":[{"in":[1],"out":1},{"in":[1],"out":2}]}"#,
            r#"{"format_version":1,"name":"","kind":"sequence","prefix":"01"}"#,
            r#"{"format_version":1,"name":"a","kind":"mystery","prefix":"01"}"#,
            r#"{"format_version":1,"name":"a","kind":"sequence","prefix":"01","extra":1}"#,
            r#"{"format_version":1,"name":"a","kind":"operator","examples":[{"in":[1],"out":"x"}]}"#,
        ] {
            assert!(Problem::from_json(bad).is_err(), "{bad}");
        }
    }
}
