use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{accuracy, Classifier, DataMatrix};
use crate::error::Result;

/// Mean drop in accuracy (fraction) when each column is shuffled, over
/// `n_repeats` seeded permutations.
pub fn permutation_importance<C: Classifier + ?Sized>(
    model: &C,
    x: &DataMatrix,
    y: &[usize],
    n_repeats: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let base = accuracy(&model.predict_labels(x)?, y);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(x.n_cols());
    let mut work = x.clone();
    for j in 0..x.n_cols() {
        let mut drop = 0.0;
        for _ in 0..n_repeats {
            work.column_mut(j).shuffle(&mut rng);
            drop += base - accuracy(&model.predict_labels(&work)?, y);
        }
        work.column_mut(j).copy_from_slice(x.column(j));
        out.push(drop / n_repeats.max(1) as f64);
    }
    Ok(out)
}
