use std::path::PathBuf;

use levin_forge_core::grammar::Grammar;
use levin_forge_core::induction::{alp_lower_bound, predict_next};

fn load(rel: &str) -> Grammar {
    Grammar::load(
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../..")
            .join(rel),
    )
    .unwrap()
}

#[test]
fn first_bit_mass_by_hand() {
    // L at depth d has mass M(d): M(5) = 2/3 (nil or loop), M(4) = 2/3 + 1/3 * M(5),
    // M(3) = 2/3 + 1/3 * M(4) = 26/27; a leading 0 costs 1/3 * 1/2
    let g = load("grammars/toy-bits.json");
    let want = 13.0 / 81.0;
    assert!((alp_lower_bound(&g, &[0], 1e-9) - want).abs() < 1e-15);
    assert!((alp_lower_bound(&g, &[1], 1e-9) - want).abs() < 1e-15);
    // everything extends the empty string
    let all = alp_lower_bound(&g, &[], 1e-9);
    assert!(all <= 1.0 && all > 2.0 * want);
}

#[test]
fn lower_bound_is_monotone_in_threshold() {
    let g = load("grammars/sequence-seed.json");
    for x in [&[0u8][..], &[0, 1], &[1, 1, 0]] {
        assert!(alp_lower_bound(&g, x, 0.01) <= alp_lower_bound(&g, x, 0.001));
        assert!(alp_lower_bound(&g, x, 0.001) <= alp_lower_bound(&g, x, 0.0001));
    }
}

#[test]
fn alternating_prefix_favours_zero() {
    let g = load("grammars/sequence-seed.json");
    let p = predict_next(&g, &[0, 1, 0, 1, 0, 1], 200_000);
    assert!(p < 0.5, "{p}");
    let q = predict_next(&g, &[0, 1, 0, 1, 0], 200_000);
    assert!(q > 0.5, "{q}");
}

#[test]
fn predictions_are_probabilities() {
    let g = load("grammars/toy-bits.json");
    for code in 0..64u32 {
        let prefix: Vec<u8> = (0..6).map(|i| ((code >> i) & 1) as u8).collect();
        for budget in [0, 50, 5_000, 500_000] {
            let p = predict_next(&g, &prefix, budget);
            assert!((0.0..=1.0).contains(&p));
        }
    }
    assert_eq!(predict_next(&g, &[0, 1], 0), 0.5);
}
