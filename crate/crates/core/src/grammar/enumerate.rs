//! Candidate enumeration.
//!
//! Two routes over the same derivation space:
//! - [`Enumerator`]: best-first over partial leftmost derivations. Yields
//!   programs in non-increasing probability order, ties in canonical text
//!   order. Memory grows with the frontier, so it suits diagnostics and
//!   prediction rather than deep searches.
//! - [`Grammar::for_each_derivation`]: depth-first, constant memory,
//!   unordered. Levin search uses it because a phase runs every candidate
//!   above its threshold anyway.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::{Choice, Derivation, Grammar};
use crate::machine::Program;

impl Grammar {
    /// Visits every complete derivation whose probability satisfies `keep`.
    /// `keep` must be monotone: if it rejects `p` it rejects everything
    /// below `p`. Probabilities are accumulated in derivation order, so they
    /// are bit-identical to [`Grammar::derivation_probability`].
    pub fn for_each_derivation(
        &self,
        keep: impl Fn(f64) -> bool,
        mut visit: impl FnMut(&[Choice], f64),
    ) {
        if !keep(1.0) {
            return;
        }
        let mut pending = vec![(self.start, 1u32)];
        let mut choices = Vec::new();
        self.dfs(&mut pending, &mut choices, 1.0, &keep, &mut visit);
    }

    fn dfs(
        &self,
        pending: &mut Vec<(usize, u32)>,
        choices: &mut Vec<Choice>,
        prob: f64,
        keep: &impl Fn(f64) -> bool,
        visit: &mut impl FnMut(&[Choice], f64),
    ) {
        let Some((nt, depth)) = pending.pop() else {
            visit(choices, prob);
            return;
        };
        let mark = pending.len();
        for (pi, prod) in self.nonterminals[nt].productions.iter().enumerate() {
            let p = prob * prod.probability;
            if !keep(p) || (!prod.holes().is_empty() && depth + 1 > self.depth_cap) {
                continue;
            }
            pending.extend(prod.holes().iter().rev().map(|&h| (h, depth + 1)));
            choices.push(Choice {
                nonterminal: nt,
                production: pi,
            });
            self.dfs(pending, choices, p, keep, visit);
            choices.pop();
            pending.truncate(mark);
        }
        pending.push((nt, depth));
    }
}

/// Every program with probability at least `min_probability`, most probable
/// first.
pub fn enumerate(grammar: &Grammar, min_probability: f64) -> Enumerator<'_> {
    Enumerator::new(grammar, min_probability)
}

struct Partial {
    prob: f64,
    seq: u64,
    choices: Vec<Choice>,
    pending: Vec<(usize, u32)>,
}

impl PartialEq for Partial {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Partial {}

impl PartialOrd for Partial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Partial {
    // max-heap: higher probability first, then earlier insertion
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob
            .total_cmp(&other.prob)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

pub struct Enumerator<'g> {
    grammar: &'g Grammar,
    min_probability: f64,
    heap: BinaryHeap<Partial>,
    seq: u64,
    /// Complete programs sharing the probability `tie_prob`.
    ties: Vec<(String, Program, Derivation)>,
    tie_prob: f64,
    ready: VecDeque<(Program, f64, Derivation)>,
}

impl<'g> Enumerator<'g> {
    fn new(grammar: &'g Grammar, min_probability: f64) -> Self {
        let mut heap = BinaryHeap::new();
        if min_probability <= 1.0 {
            heap.push(Partial {
                prob: 1.0,
                seq: 0,
                choices: Vec::new(),
                pending: vec![(grammar.start, 1)],
            });
        }
        Enumerator {
            grammar,
            min_probability,
            heap,
            seq: 1,
            ties: Vec::new(),
            tie_prob: 0.0,
            ready: VecDeque::new(),
        }
    }

    /// Like `next`, but also returns the derivation.
    pub fn next_with_derivation(&mut self) -> Option<(Program, f64, Derivation)> {
        loop {
            if let Some(item) = self.ready.pop_front() {
                return Some(item);
            }
            let flush = !self.ties.is_empty()
                && self.heap.peek().is_none_or(|top| top.prob < self.tie_prob);
            if flush {
                let mut ties = std::mem::take(&mut self.ties);
                ties.sort_by(|a, b| a.0.cmp(&b.0));
                let p = self.tie_prob;
                self.ready
                    .extend(ties.into_iter().map(|(_, prog, d)| (prog, p, d)));
                continue;
            }
            let mut item = self.heap.pop()?;
            match item.pending.pop() {
                None => match self.grammar.program_from_steps(&item.choices) {
                    Ok(program) => {
                        if self.ties.is_empty() {
                            self.tie_prob = item.prob;
                        }
                        debug_assert!(item.prob == self.tie_prob);
                        self.ties.push((
                            program.to_string(),
                            program,
                            Derivation {
                                steps: item.choices,
                            },
                        ));
                    }
                    Err(e) => log::debug!("skipping underivable candidate: {e}"),
                },
                Some((nt, depth)) => self.expand(item, nt, depth),
            }
        }
    }

    fn expand(&mut self, item: Partial, nt: usize, depth: u32) {
        let prods = &self.grammar.nonterminals[nt].productions;
        for (pi, prod) in prods.iter().enumerate() {
            let p = item.prob * prod.probability;
            if p < self.min_probability
                || (!prod.holes().is_empty() && depth + 1 > self.grammar.depth_cap)
            {
                continue;
            }
            let mut pending = item.pending.clone();
            pending.extend(prod.holes().iter().rev().map(|&h| (h, depth + 1)));
            let mut choices = item.choices.clone();
            choices.push(Choice {
                nonterminal: nt,
                production: pi,
            });
            self.heap.push(Partial {
                prob: p,
                seq: self.seq,
                choices,
                pending,
            });
            self.seq += 1;
        }
    }
}

impl Iterator for Enumerator<'_> {
    type Item = (Program, f64);

    fn next(&mut self) -> Option<(Program, f64)> {
        self.next_with_derivation().map(|(p, prob, _)| (p, prob))
    }
}
