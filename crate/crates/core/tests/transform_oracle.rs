//! The pipeline engine against nested-loop reference operators.

use insightkit_oracles::harness::transform_case;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_tables_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..60 {
        if let Err(e) = transform_case(&mut rng, 40, 6) {
            panic!("case {case}: {e}");
        }
    }
}

#[test]
fn empty_and_single_column_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..40 {
        if let Err(e) = transform_case(&mut rng, 2, 1) {
            panic!("case {case}: {e}");
        }
    }
}
