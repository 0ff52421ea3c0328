use rayon::prelude::*;

use super::{MetricKind, MetricReport};
use crate::seed;
use crate::{Error, Result};

/// Splits item indices `0..n_items` into `folds` groups: a seeded shuffle cut
/// into contiguous chunks whose sizes differ by at most one. Each group is
/// returned sorted.
pub fn fold_assignment(n_items: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::param("cross-validation needs at least 2 folds"));
    }
    if n_items < folds {
        return Err(Error::param(format!("{n_items} items cannot fill {folds} folds")));
    }
    let mut order: Vec<usize> = (0..n_items).collect();
    seed::shuffle(&mut seed::rng_from_seed(seed), &mut order);
    let (base, extra) = (n_items / folds, n_items % folds);
    let mut start = 0;
    Ok((0..folds)
        .map(|f| {
            let len = base + usize::from(f < extra);
            let mut fold = order[start..start + len].to_vec();
            start += len;
            fold.sort_unstable();
            fold
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    /// Mean value across folds; `sample_count` is the total evaluated.
    pub mean: MetricReport,
    pub per_fold: Vec<MetricReport>,
}

/// Runs `eval(train, test)` once per fold, holding each fold out in turn.
///
/// Folds are evaluated in parallel and reported in fold order.
pub fn cross_validate<F>(n_items: usize, folds: usize, seed: u64, eval: F) -> Result<CrossValidation>
where
    F: Fn(&[usize], &[usize]) -> Result<MetricReport> + Sync,
{
    let groups = fold_assignment(n_items, folds, seed)?;
    let per_fold: Vec<MetricReport> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = groups
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, items)| items.iter().copied())
                .collect();
            eval(&train, &groups[f])
        })
        .collect::<Result<_>>()?;
    let kind: MetricKind = per_fold[0].kind;
    if per_fold.iter().any(|r| r.kind != kind) {
        return Err(Error::param("folds reported different metric kinds"));
    }
    let mean = per_fold.iter().map(|r| r.value).sum::<f64>() / folds as f64;
    let count = per_fold.iter().map(|r| r.sample_count).sum();
    Ok(CrossValidation {
        mean: MetricReport::new(kind, mean, count)?,
        per_fold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_partition_items() {
        let f = fold_assignment(500, 5, 3).unwrap();
        assert!(f.iter().all(|g| g.len() == 100));
        let mut all: Vec<usize> = f.concat();
        all.sort_unstable();
        assert_eq!(all, (0..500).collect::<Vec<_>>());
        let f = fold_assignment(7, 3, 3).unwrap();
        assert_eq!(f.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 2, 2]);
        assert_eq!(fold_assignment(7, 3, 3).unwrap(), f);
        assert!(fold_assignment(3, 5, 0).is_err());
        assert!(fold_assignment(10, 1, 0).is_err());
    }

    #[test]
    fn averages_fold_metrics() {
        let values = [0.0, 0.0, 0.0, 0.0, 0.02];
        let cv = cross_validate(500, 5, 9, |train, test| {
            assert_eq!(train.len() + test.len(), 500);
            assert!(test.iter().all(|t| !train.contains(t)));
            // recover the fold index from its smallest item
            let groups = fold_assignment(500, 5, 9).unwrap();
            let f = groups.iter().position(|g| g == test).unwrap();
            MetricReport::new(MetricKind::Wer, values[f], test.len())
        })
        .unwrap();
        assert!((cv.mean.value - 0.004).abs() < 1e-15);
        assert_eq!(cv.mean.sample_count, 500);
        assert!(cv.per_fold.iter().all(|r| r.sample_count == 100));

        let cv = cross_validate(40, 4, 1, |_, t| MetricReport::new(MetricKind::Nmse, 0.3, t.len())).unwrap();
        assert!((cv.mean.value - 0.3).abs() < 1e-15);
    }
}
