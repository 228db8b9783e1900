use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{Attribution, Background};
use crate::error::{Error, Result};
use crate::rng;

/// Monte-Carlo Shapley values from `m_permutations` random feature orderings.
///
/// Each ordering switches features one at a time from the background vector
/// to the instance and credits each switch with the change in prediction.
/// Multi-row backgrounds are averaged to a single vector first, so the
/// attribution is exactly additive for every ordering.
pub fn permutation_shap<F: Fn(&[f64]) -> f64>(
    predict: F,
    features: &[String],
    instance: &[f64],
    background: &Background,
    m_permutations: usize,
    seed: u64,
) -> Result<Attribution> {
    let p = instance.len();
    if features.len() != p {
        return Err(Error::DimensionMismatch { expected: features.len(), got: p });
    }
    background.check_dim(p)?;
    if m_permutations == 0 {
        return Err(Error::InvalidParameter("at least one permutation is required".into()));
    }
    let base = background.mean_row();
    let baseline_value = predict(&base);
    let mut rng = rng::stream(seed, &[]);
    let mut order: Vec<usize> = (0..p).collect();
    let mut phi = alloc::vec![0.0; p];
    let mut x = base.clone();
    for _ in 0..m_permutations {
        order.shuffle(&mut rng);
        x.copy_from_slice(&base);
        let mut prev = baseline_value;
        for &i in &order {
            x[i] = instance[i];
            let cur = predict(&x);
            phi[i] += cur - prev;
            prev = cur;
        }
    }
    for v in &mut phi {
        *v /= m_permutations as f64;
    }
    Ok(Attribution { features: features.to_vec(), phi, baseline_value, prediction: predict(instance) })
}
