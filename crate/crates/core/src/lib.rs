//! Invertible auditory filter banks.
//!
//! Designs non-uniform filter banks on perceptual frequency scales, analyzes
//! and resynthesizes signals through them, and inverts them exactly: by an
//! explicit dual in the painless case, by an equivalent uniform bank, or by
//! preconditioned conjugate gradients. Gammatone and roex banks are
//! included for comparison.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bank;
pub mod design;
pub mod error;
pub mod experiments;
mod fft;
pub mod frame;
pub mod io;
pub mod metrics;
pub mod processing;
pub mod scales;
pub mod transform;

pub use bank::{Channel, FilterBank};
pub use design::{BankSpec, Family, Prototype, Spacing};
pub use error::{Error, Result};
pub use scales::FrequencyScale;
pub use transform::{analyze, synthesize, Coefficients};
