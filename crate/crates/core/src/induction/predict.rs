//! Sequence prediction by algorithmic probability.
//!
//! Each program is run for a fixed number of steps per output bit, so its
//! output prefix is computable. A computation budget `B` for predicting the
//! bit after an `n`-bit prefix buys every program whose share `B * P(c)`
//! covers the `K * (n + 1)` steps needed to produce `n + 1` bits; that fixes
//! the probability threshold `K * (n + 1) / B`.

use crate::grammar::{enumerate, Grammar};
use crate::machine::run_sequence;

/// Steps each program gets per output bit.
pub const SEQUENCE_FUEL_PER_BIT: u64 = 16;

/// Sum of `P(c)` over programs with `P(c) >= min_probability` whose output
/// starts with `x`.
pub fn alp_lower_bound(grammar: &Grammar, x: &[u8], min_probability: f64) -> f64 {
    let mut total = 0.0;
    for (program, p) in enumerate(grammar, min_probability) {
        let run = run_sequence(&program, x.len(), SEQUENCE_FUEL_PER_BIT);
        if run.bits == x {
            total += p;
        }
    }
    total
}

/// Probability that the bit after `prefix` is 1, from the mixture of
/// programs affordable with `budget` steps. Returns 0.5 when the budget buys
/// nothing or no affordable program produces the prefix.
pub fn predict_next(grammar: &Grammar, prefix: &[u8], budget: u64) -> f64 {
    let needed = SEQUENCE_FUEL_PER_BIT * (prefix.len() as u64 + 1);
    if budget == 0 || needed > budget {
        return 0.5;
    }
    let threshold = needed as f64 / budget as f64;
    let n = prefix.len();
    let (mut with_prefix, mut then_one) = (0.0, 0.0);
    for (program, p) in enumerate(grammar, threshold) {
        let run = run_sequence(&program, n + 1, SEQUENCE_FUEL_PER_BIT);
        if run.bits.len() >= n && run.bits[..n] == *prefix {
            with_prefix += p;
            if run.bits.get(n) == Some(&1) {
                then_one += p;
            }
        }
    }
    if with_prefix > 0.0 {
        then_one / with_prefix
    } else {
        0.5
    }
}
