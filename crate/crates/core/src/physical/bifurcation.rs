use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loop_sim::LoopSimulator;
use super::PhysicalParams;
use crate::reservoir::MAX_FEEDBACK_GAIN;
use crate::seed;
use crate::{Error, Result};

pub const HISTOGRAM_BINS: usize = 200;
pub const HISTOGRAM_RANGE: (f64, f64) = (-1.05, 1.05);

/// Uniformly binned counts over a closed range.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
}

/// A run of adjacent occupied bins, i.e. one accumulation value of the scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    /// Count-weighted mean of the bin centers in the run.
    pub center: f64,
    pub count: u64,
    pub bins: usize,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo < hi) || bins == 0 {
            return Err(Error::param(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
        }
        Ok(Self {
            lo,
            hi,
            counts: vec![0; bins],
        })
    }

    /// Values outside the range land in the edge bins.
    pub fn add(&mut self, v: f64) {
        let bins = self.counts.len();
        let pos = (v - self.lo) / (self.hi - self.lo) * bins as f64;
        let idx = if pos <= 0.0 { 0 } else { (pos as usize).min(bins - 1) };
        self.counts[idx] += 1;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..=self.counts.len()).map(|b| self.lo + b as f64 * w).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..self.counts.len()).map(|b| self.lo + (b as f64 + 0.5) * w).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn occupied(&self, min_fraction: f64) -> impl Iterator<Item = bool> + '_ {
        let threshold = (min_fraction * self.total() as f64).max(1.0);
        self.counts.iter().map(move |&c| c as f64 >= threshold)
    }

    /// Groups bins holding at least `min_fraction` of the total into runs.
    pub fn levels(&self, min_fraction: f64) -> Vec<Level> {
        let centers = self.centers();
        let mut levels = Vec::new();
        let mut run: Option<(f64, u64, usize)> = None;
        for (b, keep) in self.occupied(min_fraction).enumerate() {
            if keep {
                let c = self.counts[b];
                let r = run.get_or_insert((0.0, 0, 0));
                r.0 += centers[b] * c as f64;
                r.1 += c;
                r.2 += 1;
            } else if let Some((m, count, bins)) = run.take() {
                levels.push(Level { center: m / count as f64, count, bins });
            }
        }
        if let Some((m, count, bins)) = run {
            levels.push(Level { center: m / count as f64, count, bins });
        }
        levels
    }

    /// Total width of the bins holding at least `min_fraction` of the total.
    pub fn support_width(&self, min_fraction: f64) -> f64 {
        self.occupied(min_fraction).filter(|&k| k).count() as f64 * self.bin_width()
    }
}

/// State histogram at one feedback gain.
#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationSlice {
    pub alpha: f64,
    pub histogram: Histogram,
}

/// Histograms the undriven loop's states over a grid of feedback gains.
///
/// `steps_per_alpha` and `transient_discard` count reservoir steps, each of
/// `N` node windows. Each gain starts from its own random history, constant
/// over every `θ` slot and uniform in `[-1, 1]`: the all-zero history is a
/// fixed point at `φ = 0` and would never leave it. Gains are simulated in
/// parallel; the result is ordered like `alpha_grid`.
pub fn bifurcation_scan(
    params: &PhysicalParams,
    alpha_grid: &[f64],
    steps_per_alpha: usize,
    transient_discard: usize,
) -> Result<Vec<BifurcationSlice>> {
    params.validate()?;
    if params.reservoir.input_gain != 0.0 {
        return Err(Error::param(format!(
            "bifurcation scans are undriven, input_gain must be 0 (got {})",
            params.reservoir.input_gain
        )));
    }
    if steps_per_alpha == 0 {
        return Err(Error::param("steps_per_alpha must be positive"));
    }
    if let Some(a) = alpha_grid
        .iter()
        .find(|a| !(0.0..=MAX_FEEDBACK_GAIN).contains(*a))
    {
        return Err(Error::param(format!(
            "feedback gain {a} outside [0, {MAX_FEEDBACK_GAIN}]"
        )));
    }
    alpha_grid
        .par_iter()
        .enumerate()
        .map(|(idx, &alpha)| scan_one(params, idx as u64, alpha, steps_per_alpha, transient_discard))
        .collect()
}

fn scan_one(
    params: &PhysicalParams,
    idx: u64,
    alpha: f64,
    steps: usize,
    transient: usize,
) -> Result<BifurcationSlice> {
    let mut p = *params;
    p.reservoir.feedback_gain = alpha;
    p.noise_seed = seed::derive_seed(params.noise_seed, 2 * idx);
    let theta = p.theta();
    let mut rng = seed::rng_from_seed(seed::derive_seed(params.noise_seed, 2 * idx + 1));
    let slots = p.delay_samples() / theta;
    let mut history = Vec::with_capacity(p.delay_samples());
    for _ in 0..slots {
        let v = seed::uniform(&mut rng, -1.0, 1.0);
        history.extend(std::iter::repeat_n(v, theta));
    }
    let mut sim = LoopSimulator::new(&p)?.with_history(history)?;
    let (lo, hi) = HISTOGRAM_RANGE;
    let mut histogram = Histogram::new(lo, hi, HISTOGRAM_BINS)?;
    let n = p.reservoir.n_nodes;
    for step in 0..transient + steps {
        for _ in 0..n {
            let x = sim.slot_mean(0.0, theta);
            if step >= transient {
                histogram.add(x);
            }
        }
    }
    Ok(BifurcationSlice { alpha, histogram })
}

/// Smallest gain whose histogram shows two or more levels.
pub fn first_split(slices: &[BifurcationSlice], min_fraction: f64) -> Option<f64> {
    slices
        .iter()
        .find(|s| s.histogram.levels(min_fraction).len() >= 2)
        .map(|s| s.alpha)
}

/// One line of the scan CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRow {
    pub alpha: f64,
    pub bin_center: f64,
    pub count: u64,
}

/// Writes `alpha,bin_center,count`, one row per bin of every slice.
pub fn write_bifurcation_csv(path: &Path, slices: &[BifurcationSlice]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv_at(path, e))?;
    for s in slices {
        for (c, &n) in s.histogram.centers().into_iter().zip(s.histogram.counts()) {
            w.serialize(BifurcationRow {
                alpha: s.alpha,
                bin_center: c,
                count: n,
            })
            .map_err(|e| Error::csv_at(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_bifurcation_csv(path: &Path) -> Result<Vec<BifurcationRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv_at(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv_at(path, e))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical::LoopSettings;
    use crate::reservoir::ReservoirParams;

    fn quiet(n: usize) -> PhysicalParams {
        let r = ReservoirParams::new(n, 1, 1.0, 0.0, 0.0).unwrap();
        PhysicalParams::new(r, LoopSettings { theta_samples: 4, ..LoopSettings::ideal() }, 5).unwrap()
    }

    /// Positive root of `x = sin(a x)` by bisection.
    fn fixed_point(a: f64) -> f64 {
        let (mut lo, mut hi) = (1e-9, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (a * mid).sin() - mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn histogram_binning() {
        let mut h = Histogram::new(-1.0, 1.0, 4).unwrap();
        for v in [-2.0, -0.9, -0.1, 0.0, 0.49, 0.5, 1.0, 3.0] {
            h.add(v);
        }
        assert_eq!(h.counts(), &[2, 1, 2, 3]);
        assert_eq!(h.centers(), vec![-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(h.edges().len(), 5);
        assert_eq!(h.levels(0.0).len(), 1);
        assert!((h.support_width(0.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn levels_are_separated_runs() {
        let mut h = Histogram::new(0.0, 10.0, 10).unwrap();
        for v in [0.5, 1.5, 1.5, 5.5, 9.5] {
            h.add(v);
        }
        let lv = h.levels(0.0);
        assert_eq!(lv.len(), 3);
        assert!((lv[0].center - (0.5 + 3.0) / 3.0).abs() < 1e-12);
        assert_eq!(lv[0].bins, 2);
        // threshold of 30% keeps only the doubly filled bin
        assert_eq!(h.levels(0.3).len(), 1);
    }

    #[test]
    fn subcritical_gain_collapses_to_zero() {
        let s = bifurcation_scan(&quiet(10), &[0.5], 50, 100).unwrap();
        let lv = s[0].histogram.levels(1e-3);
        assert_eq!(lv.len(), 1);
        assert!(lv[0].center.abs() < s[0].histogram.bin_width());
        assert_eq!(s[0].histogram.total(), 500);
    }

    #[test]
    fn period_one_branch_matches_fixed_point() {
        let s = bifurcation_scan(&quiet(20), &[1.5], 100, 300).unwrap();
        let lv = s[0].histogram.levels(1e-3);
        assert_eq!(lv.len(), 2);
        let x = fixed_point(1.5);
        let w = s[0].histogram.bin_width();
        assert!((lv[0].center + x).abs() < w, "{:?} vs {x}", lv);
        assert!((lv[1].center - x).abs() < w, "{:?} vs {x}", lv);
    }

    #[test]
    fn chaotic_gain_fills_the_band() {
        let s = bifurcation_scan(&quiet(20), &[3.5], 200, 200).unwrap();
        assert!(s[0].histogram.support_width(1e-3) > 1.0);
    }

    #[test]
    fn first_split_near_unity() {
        let grid: Vec<f64> = (0..=10).map(|i| 0.9 + 0.02 * i as f64).collect();
        let s = bifurcation_scan(&quiet(10), &grid, 100, 1000).unwrap();
        let a = first_split(&s, 1e-3).unwrap();
        assert!((a - 1.0).abs() <= 0.05, "split at {a}");
    }

    #[test]
    fn rejects_driven_or_out_of_range() {
        let mut p = quiet(5);
        assert!(bifurcation_scan(&p, &[4.5], 10, 0).is_err());
        p.reservoir.input_gain = 0.1;
        assert!(bifurcation_scan(&p, &[1.0], 10, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = bifurcation_scan(&quiet(5), &[0.5, 2.5], 20, 50).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        write_bifurcation_csv(&path, &s).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("alpha,bin_center,count\n"));
        let rows = read_bifurcation_csv(&path).unwrap();
        assert_eq!(rows.len(), 2 * HISTOGRAM_BINS);
        let centers = s[1].histogram.centers();
        for (row, (c, n)) in rows[HISTOGRAM_BINS..].iter().zip(centers.iter().zip(s[1].histogram.counts())) {
            assert_eq!((row.alpha, row.bin_center, row.count), (2.5, *c, *n));
        }
    }
}
