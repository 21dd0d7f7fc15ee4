//! JSON grammar files. Schema: `docs/grammar-format.md`.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Grammar, GrammarError, IdiomOrigin, Nonterminal, Production, Template};
use crate::machine::{Datum, Program};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrammarFile {
    pub format_version: u32,
    pub start: String,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default = "default_depth_cap")]
    pub depth_cap: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idiom_target: Option<String>,
    pub nonterminals: Vec<NonterminalFile>,
}

fn default_depth_cap() -> u32 {
    super::DEFAULT_DEPTH_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonterminalFile {
    pub name: String,
    pub productions: Vec<ProductionFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductionFile {
    pub template: String,
    /// Omitted on every production of a nonterminal means equiprobable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(default)]
    pub count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idiom: Option<IdiomOrigin>,
}

impl Grammar {
    pub fn load(path: impl AsRef<Path>) -> Result<Grammar, GrammarError> {
        let text = std::fs::read_to_string(path)?;
        Grammar::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Grammar, GrammarError> {
        let file: GrammarFile = serde_json::from_str(text)?;
        Grammar::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("grammar serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GrammarError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn to_file(&self) -> GrammarFile {
        GrammarFile {
            format_version: FORMAT_VERSION,
            start: self.nonterminals[self.start].name.clone(),
            params: self.params.clone(),
            depth_cap: self.depth_cap,
            idiom_target: self.idiom_target.map(|i| self.nonterminals[i].name.clone()),
            nonterminals: self
                .nonterminals
                .iter()
                .map(|nt| NonterminalFile {
                    name: nt.name.clone(),
                    productions: nt
                        .productions
                        .iter()
                        .map(|p| ProductionFile {
                            template: self.template_text(&p.template),
                            probability: Some(p.probability),
                            count: p.count,
                            idiom: p.idiom.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: GrammarFile) -> Result<Grammar, GrammarError> {
        let invalid = |m: String| GrammarError::Invalid(m);
        if file.format_version != FORMAT_VERSION {
            return Err(invalid(format!(
                "format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            )));
        }
        if file.depth_cap == 0 {
            return Err(invalid("depth_cap must be at least 1".into()));
        }
        let names: Vec<String> = file.nonterminals.iter().map(|n| n.name.clone()).collect();
        let mut seen = HashSet::new();
        for n in &names {
            if n.is_empty() || !seen.insert(n) {
                return Err(invalid(format!(
                    "nonterminal name '{n}' is empty or repeated"
                )));
            }
        }
        let index = |name: &str| names.iter().position(|n| n == name);
        let start = index(&file.start)
            .ok_or_else(|| invalid(format!("unknown start symbol {}", file.start)))?;
        let idiom_target = match &file.idiom_target {
            None => None,
            Some(t) => Some(index(t).ok_or_else(|| invalid(format!("unknown idiom_target {t}")))?),
        };
        // parameters must be legal binders
        Program::from_datum(&Datum::atom("0"), &file.params)
            .map_err(|e| invalid(format!("params: {e}")))?;

        let mut nonterminals = Vec::with_capacity(file.nonterminals.len());
        for nt in &file.nonterminals {
            let given = nt
                .productions
                .iter()
                .filter(|p| p.probability.is_some())
                .count();
            if given != 0 && given != nt.productions.len() {
                return Err(invalid(format!(
                    "{}: give a probability for every production or for none",
                    nt.name
                )));
            }
            let mut templates = HashSet::new();
            let mut productions = Vec::new();
            for p in &nt.productions {
                let datum = Datum::parse(&p.template)
                    .map_err(|e| invalid(format!("{} template '{}': {e}", nt.name, p.template)))?;
                let template = to_template(&datum, &names)?;
                let text = datum.to_string();
                if !templates.insert(text.clone()) {
                    return Err(invalid(format!("{}: duplicate production {text}", nt.name)));
                }
                if p.idiom.is_some() && !is_idiom_template(&template) {
                    return Err(invalid(format!(
                        "{}: idiom production must be a closed (idiom ...) form, got {text}",
                        nt.name
                    )));
                }
                let probability = p.probability.unwrap_or(1.0 / nt.productions.len() as f64);
                let mut prod = Production::new(template, probability);
                prod.count = p.count;
                prod.idiom = p.idiom.clone();
                productions.push(prod);
            }
            nonterminals.push(Nonterminal {
                name: nt.name.clone(),
                productions,
            });
        }
        let g = Grammar {
            nonterminals,
            start,
            params: file.params,
            depth_cap: file.depth_cap,
            idiom_target,
        };
        g.check_normalized()?;
        Ok(g)
    }
}

fn to_template(d: &Datum, names: &[String]) -> Result<Template, GrammarError> {
    Ok(match d {
        Datum::Atom(a) if a.starts_with('<') && a.ends_with('>') && a.len() > 2 => {
            let name = &a[1..a.len() - 1];
            let nt = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| GrammarError::Invalid(format!("unknown nonterminal {a}")))?;
            Template::Hole(nt)
        }
        Datum::Atom(a) => Template::Atom(a.clone()),
        Datum::List(items) => Template::List(
            items
                .iter()
                .map(|i| to_template(i, names))
                .collect::<Result<_, _>>()?,
        ),
    })
}

pub(crate) fn is_idiom_template(t: &Template) -> bool {
    matches!(t, Template::List(items) if items.len() == 2
        && items[0] == Template::Atom("idiom".into())
        && t.holes().is_empty())
}
