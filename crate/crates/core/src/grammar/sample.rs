use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Choice, Derivation, Grammar, GrammarError};
use crate::machine::Program;

const MAX_ATTEMPTS: u32 = 1000;

/// Draws one program from the prior. Deterministic in `seed` (ChaCha8).
pub fn sample(grammar: &Grammar, seed: u64) -> Result<(Program, Derivation), GrammarError> {
    sample_with_rng(grammar, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Draws one program, rejecting derivations that exceed the depth cap.
pub fn sample_with_rng<R: Rng + ?Sized>(
    grammar: &Grammar,
    rng: &mut R,
) -> Result<(Program, Derivation), GrammarError> {
    'attempt: for _ in 0..MAX_ATTEMPTS {
        let mut steps = Vec::new();
        let mut pending = vec![(grammar.start(), 1u32)];
        while let Some((nt, depth)) = pending.pop() {
            if depth > grammar.depth_cap() {
                continue 'attempt;
            }
            let prods = &grammar.nonterminals()[nt].productions;
            let mut u: f64 = rng.random();
            let mut pick = prods.len() - 1;
            for (i, p) in prods.iter().enumerate() {
                if u < p.probability {
                    pick = i;
                    break;
                }
                u -= p.probability;
            }
            steps.push(Choice {
                nonterminal: nt,
                production: pick,
            });
            pending.extend(prods[pick].holes().iter().rev().map(|&h| (h, depth + 1)));
        }
        let d = Derivation { steps };
        let program = grammar.program(&d)?;
        return Ok((program, d));
    }
    Err(GrammarError::DepthExceeded {
        cap: grammar.depth_cap(),
        attempts: MAX_ATTEMPTS,
    })
}
