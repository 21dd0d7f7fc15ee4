//! Learning from solutions: smoothed count updates and idiom installation.

use super::format::is_idiom_template;
use super::{Derivation, Grammar, GrammarError, IdiomCandidate, IdiomOrigin, Production, Template};

/// `(count_i + alpha) / (total + alpha * k)` for each alternative.
pub fn laplace_probabilities(counts: &[u64], alpha: f64) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    let denom = total as f64 + alpha * counts.len() as f64;
    counts.iter().map(|&c| (c as f64 + alpha) / denom).collect()
}

/// Folds one solution's derivation into the grammar.
///
/// Each nonterminal's current probabilities act as pseudo-counts of weight
/// `total + alpha * k`; the derivation's uses are added on top:
///
/// ```text
/// p_i' = (p_i * (total + alpha * k) + n_i) / (total + alpha * k + n)
/// ```
///
/// On a grammar whose probabilities are the smoothed counts this is exactly
/// `(count_i + alpha) / (total + alpha * k)` over the enlarged corpus; on
/// grammars carrying installed idiom mass it keeps that mass proportionally.
/// Nonterminals the derivation does not touch are unchanged.
///
/// Returns the new grammar and the update cost: one step per counted choice
/// plus one per probability recomputed.
pub fn update_from_solution(
    grammar: &Grammar,
    derivation: &Derivation,
    alpha: f64,
) -> Result<(Grammar, u64), GrammarError> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(GrammarError::Invalid(format!(
            "smoothing weight must be positive, got {alpha}"
        )));
    }
    grammar.replay(derivation)?;
    let mut uses: Vec<Vec<u64>> = grammar
        .nonterminals()
        .iter()
        .map(|nt| vec![0; nt.productions.len()])
        .collect();
    for c in &derivation.steps {
        uses[c.nonterminal][c.production] += 1;
    }
    let mut steps = derivation.len() as u64;
    let mut next = grammar.clone();
    for (nt, used) in next.nonterminals_mut().iter_mut().zip(&uses) {
        let n: u64 = used.iter().sum();
        if n == 0 {
            continue;
        }
        let weight = nt.total_count() as f64 + alpha * nt.productions.len() as f64;
        let mut fresh: Vec<f64> = nt
            .productions
            .iter()
            .zip(used)
            .map(|(p, &u)| (p.probability * weight + u as f64) / (weight + n as f64))
            .collect();
        let sum: f64 = fresh.iter().sum();
        fresh.iter_mut().for_each(|p| *p /= sum);
        for ((p, &u), q) in nt.productions.iter_mut().zip(used).zip(fresh) {
            p.count += u;
            p.probability = q;
        }
        steps += nt.productions.len() as u64;
    }
    Ok((next, steps))
}

/// Adds each idiom as a production `(idiom <fragment>)` of the grammar's
/// idiom-target nonterminal. The new productions share `idiom_mass` in
/// proportion to support; existing productions are scaled by
/// `1 - idiom_mass`.
///
/// Idioms already installed, or whose fragment the target nonterminal cannot
/// derive, are skipped. Returns the grammar and the number of probabilities
/// touched.
pub fn install_idioms(
    grammar: &Grammar,
    idioms: &[IdiomCandidate],
    idiom_mass: f64,
) -> Result<(Grammar, u64), GrammarError> {
    if !(idiom_mass > 0.0 && idiom_mass < 1.0) {
        return Err(GrammarError::Invalid(format!(
            "idiom mass must be in (0, 1), got {idiom_mass}"
        )));
    }
    let Some(target) = grammar.idiom_target() else {
        return Ok((grammar.clone(), 0));
    };
    let existing: Vec<&Template> = grammar.nonterminals()[target]
        .productions
        .iter()
        .map(|p| &p.template)
        .collect();
    let mut accepted: Vec<(Template, &IdiomCandidate)> = Vec::new();
    for idiom in idioms {
        let fragment = idiom.fragment.to_datum();
        let template = Template::List(vec![
            Template::Atom("idiom".into()),
            Template::from_datum(&fragment),
        ]);
        debug_assert!(is_idiom_template(&template));
        if existing.contains(&&template) || accepted.iter().any(|(t, _)| *t == template) {
            continue;
        }
        if grammar.derive_datum(target, &fragment).is_none() {
            log::debug!("idiom {} not derivable from target, skipped", idiom.text);
            continue;
        }
        accepted.push((template, idiom));
    }
    if accepted.is_empty() {
        return Ok((grammar.clone(), 0));
    }
    let total_support: usize = accepted.iter().map(|(_, i)| i.support).sum();
    let mut next = grammar.clone();
    let nt = &mut next.nonterminals_mut()[target];
    for p in &mut nt.productions {
        p.probability *= 1.0 - idiom_mass;
    }
    for (template, idiom) in accepted {
        let mut prod = Production::new(
            template,
            idiom_mass * idiom.support as f64 / total_support as f64,
        );
        prod.idiom = Some(IdiomOrigin {
            support: idiom.support,
            sources: idiom.sources.clone(),
        });
        nt.productions.push(prod);
    }
    let sum = nt.probability_sum();
    nt.productions.iter_mut().for_each(|p| p.probability /= sum);
    let touched = nt.productions.len() as u64;
    Ok((next, touched))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::tests::toy_arith;
    use crate::machine::{Program, Root};

    fn idiom(text: &str, support: usize) -> IdiomCandidate {
        let p = Program::parse(text, &["x"]).unwrap();
        let Root::Expr(e) = p.root().clone() else {
            panic!()
        };
        IdiomCandidate::new(e, support, vec!["a".into(), "b".into()])
    }

    #[test]
    fn laplace_formula_instances() {
        assert_eq!(laplace_probabilities(&[0, 0], 1.0), vec![0.5, 0.5]);
        let p = laplace_probabilities(&[3, 1], 1.0);
        assert!((p[0] - 4.0 / 6.0).abs() < 1e-15 && (p[1] - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn update_matches_smoothed_counts() {
        // binary nonterminal: x and (+ E E)
        let g = Grammar::uniform("E", &["x"], 12, None, &[("E", &["x", "(+ <E> <E>)"])]).unwrap();
        // (+ x (+ x x)): production "+" twice, "x" three times
        let p = Program::parse("(+ x (+ x x))", &["x"]).unwrap();
        let d = g.derive(&p).unwrap();
        let (g2, steps) = update_from_solution(&g, &d, 1.0).unwrap();
        let probs: Vec<f64> = g2.nonterminals()[0]
            .productions
            .iter()
            .map(|p| p.probability)
            .collect();
        let want = laplace_probabilities(&[3, 2], 1.0);
        assert!((probs[0] - want[0]).abs() < 1e-15 && (probs[1] - want[1]).abs() < 1e-15);
        assert_eq!(steps, 5 + 2);
        // the original is untouched
        assert_eq!(g.nonterminals()[0].productions[0].probability, 0.5);
        assert_eq!(g2.nonterminals()[0].productions[0].count, 3);

        // a second update keeps matching the accumulated counts
        let q = Program::parse("(+ x x)", &["x"]).unwrap();
        let (g3, _) = update_from_solution(&g2, &g2.derive(&q).unwrap(), 1.0).unwrap();
        let want = laplace_probabilities(&[5, 3], 1.0);
        let got: Vec<f64> = g3.nonterminals()[0]
            .productions
            .iter()
            .map(|p| p.probability)
            .collect();
        assert!((got[0] - want[0]).abs() < 1e-15 && (got[1] - want[1]).abs() < 1e-15);
    }

    #[test]
    fn two_thirds_factor_after_three_of_four() {
        // 3 uses of "x" among 4 total choices of a 2-way nonterminal
        let g = Grammar::uniform("E", &["x"], 12, None, &[("E", &["x", "(+ <E> <E>)"])]).unwrap();
        let p = Program::parse("(+ x (+ x x))", &["x"]).unwrap();
        // corpus: (+ x x) then x
        let (g1, _) = update_from_solution(
            &g,
            &g.derive(&Program::parse("(+ x x)", &["x"]).unwrap())
                .unwrap(),
            1.0,
        )
        .unwrap();
        let (g2, _) = update_from_solution(
            &g1,
            &g.derive(&Program::parse("x", &["x"]).unwrap()).unwrap(),
            1.0,
        )
        .unwrap();
        assert!((g2.nonterminals()[0].productions[0].probability - 2.0 / 3.0).abs() < 1e-15);
        assert!(g2.program_probability(&p) > g.program_probability(&p));
    }

    #[test]
    fn update_rejects_foreign_derivations() {
        let g = toy_arith(4);
        let mut d = g
            .derive(&Program::parse("(+ x 1)", &["x"]).unwrap())
            .unwrap();
        d.steps.pop();
        assert!(matches!(
            update_from_solution(&g, &d, 1.0),
            Err(GrammarError::InvalidDerivation(_))
        ));
        assert!(update_from_solution(&g, &Derivation::default(), 0.0).is_err());
    }

    #[test]
    fn install_rescales() {
        let g =
            Grammar::uniform("E", &["x"], 12, Some("E"), &[("E", &["x", "(+ <E> <E>)"])]).unwrap();
        let (g2, _) = install_idioms(&g, &[idiom("(+ x x)", 2)], 0.2).unwrap();
        let probs: Vec<f64> = g2.nonterminals()[0]
            .productions
            .iter()
            .map(|p| p.probability)
            .collect();
        assert_eq!(probs.len(), 3);
        assert!((probs[0] - 0.4).abs() < 1e-15);
        assert!((probs[1] - 0.4).abs() < 1e-15);
        assert!((probs[2] - 0.2).abs() < 1e-15);
        assert_eq!(
            g2.template_text(&g2.nonterminals()[0].productions[2].template),
            "(idiom (+ x x))"
        );
    }

    #[test]
    fn install_splits_by_support_and_skips_bad_idioms() {
        let g = toy_arith(12);
        let (g2, _) = install_idioms(
            &g,
            &[
                idiom("(+ x x)", 3),
                idiom("(+ x 1)", 1),
                idiom("(+ x x)", 3),
                idiom("(- x x)", 5),
            ],
            0.1,
        )
        .unwrap();
        let prods = &g2.nonterminals()[0].productions;
        assert_eq!(prods.len(), 5);
        assert!((prods[3].probability - 0.075).abs() < 1e-15);
        assert!((prods[4].probability - 0.025).abs() < 1e-15);
        // reinstalling is a no-op
        let (g3, touched) = install_idioms(&g2, &[idiom("(+ x x)", 3)], 0.1).unwrap();
        assert_eq!(g3, g2);
        assert_eq!(touched, 0);
    }

    #[test]
    fn installing_nothing_is_identity() {
        let g = toy_arith(4);
        assert_eq!(install_idioms(&g, &[], 0.1).unwrap().0, g);
        assert!(install_idioms(&g, &[], 1.0).is_err());
    }

    #[test]
    fn idiom_raises_probability_of_reusing_program() {
        let g = toy_arith(12);
        let plain = Program::parse("(+ (+ x x) (+ x x))", &["x"]).unwrap();
        let (g2, _) = install_idioms(&g, &[idiom("(+ x x)", 2)], 0.1).unwrap();
        let reuse = Program::parse("(+ (idiom (+ x x)) (idiom (+ x x)))", &["x"]).unwrap();
        assert!(g2.program_probability(&reuse) > g.program_probability(&plain));
        assert_eq!(g2.count_derivations(0, &reuse.to_datum()), 1);
    }
}
