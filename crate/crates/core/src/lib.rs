//! Delay-line reservoir computing.
//!
//! One sine nonlinearity with delayed feedback, time-multiplexed into `N`
//! virtual nodes, plus a trained linear readout. The crate provides:
//!
//! - [`reservoir`]: the discrete node recursion and input masks,
//! - [`physical`]: a per-sample simulation of the analog loop with filters
//!   and noise, and bifurcation scans,
//! - [`readout`]: ridge regression, error metrics and cross-validation,
//! - [`tasks`]: benchmark generators (NARMA10, channel equalization,
//!   sine/square, memory capacity, feature corpora),
//! - [`experiment`]: TOML configs, seeded multi-trial runs, sweeps and CSV
//!   output.
//!
//! ```
//! use delay_rc::readout::{nmse, predict, train_linear, RegressionConfig};
//! use delay_rc::reservoir::{generate_mask, run_discrete, MaskDistribution, MaskSpec, ReservoirParams};
//! use delay_rc::tasks::gen_narma10;
//!
//! let data = gen_narma10(1000, 1)?;
//! let params = ReservoirParams::new(50, 1, 0.8, 0.2, 0.0)?;
//! let mask = generate_mask(&MaskSpec {
//!     distribution: MaskDistribution::Uniform { lo: 0.0, hi: 1.0 },
//!     n_nodes: 50,
//!     n_inputs: 1,
//!     seed: 2,
//! })?;
//! let states = run_discrete(&params, &mask, &data.inputs, None)?;
//! let y = data.targets.as_scalar().unwrap();
//!
//! let config = RegressionConfig { ridge_lambda: 1e-8, ..Default::default() };
//! let w = train_linear(&states.slice(0..500), &y[..500], &config)?;
//! let yhat = predict(&states.slice(500..1000), &w)?;
//! assert!(nmse(&y[500..], &yhat)? < 0.1);
//! # Ok::<(), delay_rc::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod experiment;
pub mod physical;
pub mod readout;
pub mod reservoir;
pub mod seed;
pub mod series;
pub mod tasks;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/reservoir.md")]
    struct Reservoir;
    #[doc = include_str!("../../../book/src/physical.md")]
    struct Physical;
    #[doc = include_str!("../../../book/src/readout.md")]
    struct Readout;
    #[doc = include_str!("../../../book/src/tasks.md")]
    struct Tasks;
    #[doc = include_str!("../../../book/src/bifurcation.md")]
    struct Bifurcation;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
}
