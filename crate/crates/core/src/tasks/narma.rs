use super::{DatasetMeta, TaskDataset, Targets};
use crate::seed;
use crate::series::InputSequence;
use crate::{Error, Result};

const ORDER: usize = 10;
const MAX_REGENERATIONS: u32 = 1000;

/// NARMA10 output for an input sequence: `y[0..10] = 0` and for `n >= 9`
///
/// ```text
/// y(n+1) = 0.3 y(n) + 0.05 y(n) Σ_{i=0}^{9} y(n-i) + 1.5 u(n-9) u(n) + 0.1
/// ```
///
/// The result has one more entry than `u`.
pub fn narma10_response(u: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; u.len() + 1];
    for n in ORDER - 1..u.len() {
        let window: f64 = y[n + 1 - ORDER..=n].iter().sum();
        y[n + 1] = 0.3 * y[n] + 0.05 * y[n] * window + 1.5 * u[n - 9] * u[n] + 0.1;
    }
    y
}

/// `length` pairs `(u(n), y(n+1))` for `n = 9, 10, ...` with `u ~ U[0, 0.5]`.
///
/// A draw whose response leaves `[-1, 1]` is discarded and replaced by one
/// from `derive_seed(seed, r)`, `r = 1, 2, ...`; the count is kept in the
/// metadata.
pub fn gen_narma10(length: usize, seed: u64) -> Result<TaskDataset> {
    if length < ORDER {
        return Err(Error::param(format!("NARMA10 needs length >= {ORDER}, got {length}")));
    }
    let total = length + ORDER - 1;
    for attempt in 0..=MAX_REGENERATIONS {
        let s = if attempt == 0 { seed } else { seed::derive_seed(seed, attempt as u64) };
        let mut rng = seed::rng_from_seed(s);
        let u: Vec<f64> = (0..total).map(|_| seed::uniform(&mut rng, 0.0, 0.5)).collect();
        let y = narma10_response(&u);
        if y.iter().any(|v| v.abs() > 1.0 || !v.is_finite()) {
            continue;
        }
        let mut meta = DatasetMeta::new("narma10", seed, &[("length", length as f64)]);
        meta.regenerations = attempt;
        return TaskDataset::new(
            InputSequence::scalar(u[ORDER - 1..].to_vec())?,
            Targets::Scalar(y[ORDER..].to_vec()),
            None,
            meta,
        );
    }
    Err(Error::Numerical(format!(
        "NARMA10 diverged on {MAX_REGENERATIONS} consecutive draws"
    )))
}
