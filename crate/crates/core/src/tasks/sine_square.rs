use std::f64::consts::TAU;

use super::{DatasetMeta, Segment, TaskDataset, Targets};
use crate::seed;
use crate::series::InputSequence;
use crate::{Error, Result};

/// Samples per waveform period.
pub const SEGMENT_LEN: usize = 12;

/// Random concatenation of single periods of `sin(2π (t + ½) / 12)` and a
/// square wave (`+1` for the first half period, `-1` after). Targets are `1`
/// on square segments and `0` on sine segments; segment labels agree.
pub fn gen_sine_square(n_segments: usize, seed: u64) -> Result<TaskDataset> {
    if n_segments == 0 {
        return Err(Error::param("need at least one segment"));
    }
    let mut rng = seed::rng_from_seed(seed);
    let mut u = Vec::with_capacity(n_segments * SEGMENT_LEN);
    let mut y = Vec::with_capacity(n_segments * SEGMENT_LEN);
    let mut segments = Vec::with_capacity(n_segments);
    for s in 0..n_segments {
        let square = seed::coin(&mut rng);
        for t in 0..SEGMENT_LEN {
            u.push(if square {
                if t < SEGMENT_LEN / 2 { 1.0 } else { -1.0 }
            } else {
                (TAU * (t as f64 + 0.5) / SEGMENT_LEN as f64).sin()
            });
        }
        y.extend(std::iter::repeat_n(f64::from(u8::from(square)), SEGMENT_LEN));
        segments.push(Segment {
            range: s * SEGMENT_LEN..(s + 1) * SEGMENT_LEN,
            label: usize::from(square),
        });
    }
    let meta = DatasetMeta::new("sine_square", seed, &[("n_segments", n_segments as f64)]);
    TaskDataset::new(InputSequence::scalar(u)?, Targets::Scalar(y), Some(segments), meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_shapes() {
        let d = gen_sine_square(50, 1).unwrap();
        let u: Vec<f64> = d.inputs.channel(0).collect();
        let y = d.targets.as_scalar().unwrap();
        for seg in d.segments.as_ref().unwrap() {
            let w = &u[seg.range.clone()];
            assert!(y[seg.range.clone()].iter().all(|&v| v == seg.label as f64));
            if seg.label == 1 {
                assert!(w.iter().all(|v| v.abs() == 1.0));
            } else {
                assert!(w.iter().all(|v| v.abs() <= 1.0 && *v != 0.0));
                assert!((w[0] - (std::f64::consts::PI / 12.0).sin()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn class_balance() {
        let d = gen_sine_square(1000, 2).unwrap();
        let squares = d.segments.unwrap().iter().filter(|s| s.label == 1).count() as f64;
        // binomial σ = √(1000/4)
        assert!((squares - 500.0).abs() < 4.0 * 250f64.sqrt());
    }

    #[test]
    fn rejects_empty() {
        assert!(gen_sine_square(0, 0).is_err());
    }
}
