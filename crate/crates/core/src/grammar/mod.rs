//! Stochastic context-free grammar over programs.
//!
//! The grammar is the prior: a program's probability is the product of the
//! production probabilities along its (unique) leftmost derivation. Programs
//! whose derivation needs a nonterminal deeper than `depth_cap` get
//! probability zero; the truncated mass is not redistributed.
//!
//! Grammar values are immutable. Learning operations (`update_from_solution`,
//! `install_idioms`) return new grammars.

mod enumerate;
mod format;
mod idioms;
mod sample;
mod update;

pub use enumerate::{enumerate, Enumerator};
pub use format::{GrammarFile, NonterminalFile, ProductionFile};
pub use idioms::{mine_idioms, mine_idioms_with_cost, IdiomCandidate};
pub use sample::{sample, sample_with_rng};
pub use update::{install_idioms, laplace_probabilities, update_from_solution};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{Datum, ParseError, Program};

/// Default derivation depth cap.
pub const DEFAULT_DEPTH_CAP: u32 = 12;
/// Default Laplace smoothing weight.
pub const DEFAULT_ALPHA: f64 = 1.0;
/// Default total probability given to newly installed idioms.
pub const DEFAULT_IDIOM_MASS: f64 = 0.1;
pub const DEFAULT_MIN_SUPPORT: usize = 2;
pub const DEFAULT_MAX_IDIOM_SIZE: usize = 7;

/// Per-nonterminal probabilities must sum to one within this tolerance.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("invalid grammar: {0}")]
    Invalid(String),
    #[error("invalid derivation: {0}")]
    InvalidDerivation(String),
    #[error("no derivation within depth cap {cap} after {attempts} attempts")]
    DepthExceeded { cap: u32, attempts: u32 },
    #[error("derived program does not parse: {0}")]
    Program(#[from] ParseError),
    #[error("grammar file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("grammar file: {0}")]
    Io(#[from] std::io::Error),
}

/// Right-hand side of a production: an S-expression with nonterminal holes,
/// written `<Name>` in the text form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Template {
    Atom(String),
    List(Vec<Template>),
    Hole(usize),
}

impl Template {
    pub fn holes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.holes_into(&mut out);
        out
    }

    fn holes_into(&self, out: &mut Vec<usize>) {
        match self {
            Template::Atom(_) => {}
            Template::Hole(nt) => out.push(*nt),
            Template::List(items) => items.iter().for_each(|t| t.holes_into(out)),
        }
    }

    pub fn from_datum(d: &Datum) -> Template {
        match d {
            Datum::Atom(a) => Template::Atom(a.clone()),
            Datum::List(items) => Template::List(items.iter().map(Template::from_datum).collect()),
        }
    }

    fn render(&self, names: &[String], out: &mut String) {
        match self {
            Template::Atom(a) => out.push_str(a),
            Template::Hole(nt) => {
                out.push('<');
                out.push_str(&names[*nt]);
                out.push('>');
            }
            Template::List(items) => {
                out.push('(');
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    t.render(names, out);
                }
                out.push(')');
            }
        }
    }
}

/// Where an installed idiom came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdiomOrigin {
    pub support: usize,
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Production {
    pub template: Template,
    pub probability: f64,
    /// Uses of this production across the solutions learned so far.
    pub count: u64,
    pub idiom: Option<IdiomOrigin>,
    holes: Vec<usize>,
}

impl Production {
    pub fn new(template: Template, probability: f64) -> Self {
        let holes = template.holes();
        Production {
            template,
            probability,
            count: 0,
            idiom: None,
            holes,
        }
    }

    pub fn holes(&self) -> &[usize] {
        &self.holes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nonterminal {
    pub name: String,
    pub productions: Vec<Production>,
}

impl Nonterminal {
    pub fn total_count(&self) -> u64 {
        self.productions.iter().map(|p| p.count).sum()
    }

    pub fn probability_sum(&self) -> f64 {
        self.productions.iter().map(|p| p.probability).sum()
    }
}

/// One step of a leftmost derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Choice {
    pub nonterminal: usize,
    pub production: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Derivation {
    pub steps: Vec<Choice>,
}

impl Derivation {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grammar {
    nonterminals: Vec<Nonterminal>,
    start: usize,
    params: Vec<String>,
    depth_cap: u32,
    idiom_target: Option<usize>,
}

impl Grammar {
    /// Builds and validates a grammar. `productions` pairs each nonterminal
    /// name with its `(template text, probability)` list.
    pub fn new(
        start: &str,
        params: &[&str],
        depth_cap: u32,
        idiom_target: Option<&str>,
        productions: &[(&str, &[(&str, f64)])],
    ) -> Result<Grammar, GrammarError> {
        let file = GrammarFile {
            format_version: format::FORMAT_VERSION,
            start: start.to_string(),
            params: params.iter().map(|p| p.to_string()).collect(),
            depth_cap,
            idiom_target: idiom_target.map(str::to_string),
            nonterminals: productions
                .iter()
                .map(|(name, prods)| NonterminalFile {
                    name: name.to_string(),
                    productions: prods
                        .iter()
                        .map(|(t, p)| ProductionFile {
                            template: t.to_string(),
                            probability: Some(*p),
                            count: 0,
                            idiom: None,
                        })
                        .collect(),
                })
                .collect(),
        };
        Grammar::from_file(file)
    }

    /// Same as [`Grammar::new`] with equiprobable alternatives.
    pub fn uniform(
        start: &str,
        params: &[&str],
        depth_cap: u32,
        idiom_target: Option<&str>,
        productions: &[(&str, &[&str])],
    ) -> Result<Grammar, GrammarError> {
        let owned: Vec<(&str, Vec<(&str, f64)>)> = productions
            .iter()
            .map(|(n, ts)| (*n, ts.iter().map(|t| (*t, 1.0 / ts.len() as f64)).collect()))
            .collect();
        let borrowed: Vec<(&str, &[(&str, f64)])> =
            owned.iter().map(|(n, v)| (*n, v.as_slice())).collect();
        Grammar::new(start, params, depth_cap, idiom_target, &borrowed)
    }

    pub fn nonterminals(&self) -> &[Nonterminal] {
        &self.nonterminals
    }

    pub fn nonterminal(&self, name: &str) -> Option<usize> {
        self.nonterminals.iter().position(|n| n.name == name)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn depth_cap(&self) -> u32 {
        self.depth_cap
    }

    pub fn with_depth_cap(&self, depth_cap: u32) -> Grammar {
        Grammar {
            depth_cap,
            ..self.clone()
        }
    }

    pub fn idiom_target(&self) -> Option<usize> {
        self.idiom_target
    }

    pub fn production(&self, c: Choice) -> &Production {
        &self.nonterminals[c.nonterminal].productions[c.production]
    }

    pub fn template_text(&self, t: &Template) -> String {
        let names: Vec<String> = self.nonterminals.iter().map(|n| n.name.clone()).collect();
        let mut out = String::new();
        t.render(&names, &mut out);
        out
    }

    /// Installed idiom productions, as (nonterminal, production) choices.
    pub fn idiom_choices(&self) -> Vec<Choice> {
        let mut out = Vec::new();
        for (ni, nt) in self.nonterminals.iter().enumerate() {
            for (pi, p) in nt.productions.iter().enumerate() {
                if p.idiom.is_some() {
                    out.push(Choice {
                        nonterminal: ni,
                        production: pi,
                    });
                }
            }
        }
        out
    }

    /// Product of the chosen production probabilities, in derivation order.
    pub fn derivation_probability(&self, d: &Derivation) -> f64 {
        d.steps
            .iter()
            .fold(1.0, |acc, c| acc * self.production(*c).probability)
    }

    /// The prior probability of `program`; zero if it has no derivation
    /// within the depth cap.
    pub fn program_probability(&self, program: &Program) -> f64 {
        self.derive(program)
            .map(|d| self.derivation_probability(&d))
            .unwrap_or(0.0)
    }

    /// The leftmost derivation of `program`, if one exists within the cap.
    pub fn derive(&self, program: &Program) -> Option<Derivation> {
        self.derive_datum(self.start, &program.to_datum())
    }

    /// Derivation of a datum from an arbitrary nonterminal.
    pub fn derive_datum(&self, nt: usize, datum: &Datum) -> Option<Derivation> {
        let mut steps = Vec::new();
        self.derive_nt(nt, datum, 1, &mut steps)
            .then_some(Derivation { steps })
    }

    /// Number of distinct derivations of `datum` from `nt` (ambiguity check).
    pub fn count_derivations(&self, nt: usize, datum: &Datum) -> usize {
        self.count_nt(nt, datum, 1)
    }

    fn derive_nt(&self, nt: usize, datum: &Datum, depth: u32, out: &mut Vec<Choice>) -> bool {
        if depth > self.depth_cap {
            return false;
        }
        for (pi, prod) in self.nonterminals[nt].productions.iter().enumerate() {
            let mark = out.len();
            out.push(Choice {
                nonterminal: nt,
                production: pi,
            });
            if self.match_template(&prod.template, datum, depth, out) {
                return true;
            }
            out.truncate(mark);
        }
        false
    }

    fn match_template(&self, t: &Template, d: &Datum, depth: u32, out: &mut Vec<Choice>) -> bool {
        match (t, d) {
            (Template::Hole(nt), _) => self.derive_nt(*nt, d, depth + 1, out),
            (Template::Atom(a), Datum::Atom(b)) => a == b,
            (Template::List(ts), Datum::List(ds)) => {
                ts.len() == ds.len()
                    && ts
                        .iter()
                        .zip(ds)
                        .all(|(t, d)| self.match_template(t, d, depth, out))
            }
            _ => false,
        }
    }

    fn count_nt(&self, nt: usize, datum: &Datum, depth: u32) -> usize {
        if depth > self.depth_cap {
            return 0;
        }
        self.nonterminals[nt]
            .productions
            .iter()
            .map(|p| self.count_template(&p.template, datum, depth))
            .sum()
    }

    fn count_template(&self, t: &Template, d: &Datum, depth: u32) -> usize {
        match (t, d) {
            (Template::Hole(nt), _) => self.count_nt(*nt, d, depth + 1),
            (Template::Atom(a), Datum::Atom(b)) => usize::from(a == b),
            (Template::List(ts), Datum::List(ds)) if ts.len() == ds.len() => ts
                .iter()
                .zip(ds)
                .map(|(t, d)| self.count_template(t, d, depth))
                .product(),
            _ => 0,
        }
    }

    /// Rebuilds the datum a derivation describes, checking every choice.
    pub fn replay(&self, d: &Derivation) -> Result<Datum, GrammarError> {
        self.replay_steps(&d.steps)
    }

    pub(crate) fn replay_steps(&self, steps: &[Choice]) -> Result<Datum, GrammarError> {
        let mut cursor = 0;
        let datum = self.replay_nt(self.start, 1, steps, &mut cursor)?;
        if cursor != steps.len() {
            return Err(GrammarError::InvalidDerivation(format!(
                "{} unused choice(s)",
                steps.len() - cursor
            )));
        }
        Ok(datum)
    }

    fn replay_nt(
        &self,
        nt: usize,
        depth: u32,
        steps: &[Choice],
        cursor: &mut usize,
    ) -> Result<Datum, GrammarError> {
        if depth > self.depth_cap {
            return Err(GrammarError::InvalidDerivation(format!(
                "exceeds depth cap {}",
                self.depth_cap
            )));
        }
        let c = *steps
            .get(*cursor)
            .ok_or_else(|| GrammarError::InvalidDerivation("derivation ends early".into()))?;
        if c.nonterminal != nt {
            return Err(GrammarError::InvalidDerivation(format!(
                "step {} expands {} where {} is pending",
                *cursor,
                self.nonterminals
                    .get(c.nonterminal)
                    .map_or("?", |n| &n.name),
                self.nonterminals[nt].name
            )));
        }
        let prod = self.nonterminals[nt]
            .productions
            .get(c.production)
            .ok_or_else(|| {
                GrammarError::InvalidDerivation(format!("no production {} in {}", c.production, nt))
            })?;
        *cursor += 1;
        self.instantiate(&prod.template, depth, steps, cursor)
    }

    fn instantiate(
        &self,
        t: &Template,
        depth: u32,
        steps: &[Choice],
        cursor: &mut usize,
    ) -> Result<Datum, GrammarError> {
        Ok(match t {
            Template::Atom(a) => Datum::Atom(a.clone()),
            Template::Hole(nt) => self.replay_nt(*nt, depth + 1, steps, cursor)?,
            Template::List(items) => Datum::List(
                items
                    .iter()
                    .map(|t| self.instantiate(t, depth, steps, cursor))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    /// Replays a derivation into a program.
    pub fn program(&self, d: &Derivation) -> Result<Program, GrammarError> {
        self.program_from_steps(&d.steps)
    }

    pub(crate) fn program_from_steps(&self, steps: &[Choice]) -> Result<Program, GrammarError> {
        let datum = self.replay_steps(steps)?;
        Ok(Program::from_datum(&datum, &self.params)?)
    }

    /// Checks per-nonterminal normalization and positivity.
    pub fn check_normalized(&self) -> Result<(), GrammarError> {
        for nt in &self.nonterminals {
            if nt.productions.is_empty() {
                return Err(GrammarError::Invalid(format!(
                    "nonterminal {} has no productions",
                    nt.name
                )));
            }
            for p in &nt.productions {
                if !(p.probability > 0.0 && p.probability <= 1.0) {
                    return Err(GrammarError::Invalid(format!(
                        "production {} of {} has probability {}",
                        self.template_text(&p.template),
                        nt.name,
                        p.probability
                    )));
                }
            }
            let sum = nt.probability_sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(GrammarError::Invalid(format!(
                    "probabilities of {} sum to {sum}",
                    nt.name
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn nonterminals_mut(&mut self) -> &mut Vec<Nonterminal> {
        &mut self.nonterminals
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for nt in &self.nonterminals {
            for p in &nt.productions {
                writeln!(
                    f,
                    "{} -> {}  [{}]",
                    nt.name,
                    self.template_text(&p.template),
                    p.probability
                )?;
            }
        }
        Ok(())
    }
}
