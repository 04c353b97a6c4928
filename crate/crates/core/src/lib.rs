//! # dyskit
//!
//! Speech biomarker extraction and multilingual dysarthria severity
//! classification.
//!
//! The crate is organised bottom-up:
//!
//! - [`signal`]: WAV ingestion, pitch, glottal pulses, energy, formants,
//!   harmonicity and cepstral peak prominence.
//! - [`alignment`]: TextGrid parsing, phone inventories and edit-distance
//!   alignment of canonical against decoded phone sequences.
//! - [`biomarkers`]: the 35-feature clinical registry (voice quality,
//!   phoneme accuracy, vowel space, fluency, pitch/energy statistics, rhythm).
//! - [`gop`]: goodness-of-pronunciation scoring over frame-level logits,
//!   with prior/temperature normalisation and uncertainty-based scorers.
//! - [`stats`]: Kendall tau-b, Spearman, Kruskal-Wallis, VIF, descriptive
//!   statistics.
//! - [`selection`]: Lasso / Elastic-Net / Ward-cluster multicollinearity
//!   reduction, filter / RFE / embedded selectors and iterative gain
//!   selection.
//! - [`trees`]: gradient-boosted trees with learned default directions for
//!   missing values, an extra-trees forest, and a kNN baseline.
//! - [`pipeline`]: manifests, feature tables, the healthy-distance
//!   transform, feature validation, multilingual table assembly,
//!   leave-one-speaker-out evaluation and the synthetic corpus generator.
//! - [`cli`]: the `dyskit` command line surface.
//!
//! ```
//! use dyskit::biomarkers::{vowel_space, CornerFormants};
//!
//! let corners = CornerFormants {
//!     i: Some((300.0, 2300.0)),
//!     a: Some((800.0, 1300.0)),
//!     u: Some((300.0, 800.0)),
//!     ae: Some((700.0, 1800.0)),
//! };
//! let vs = vowel_space(&corners);
//! assert_eq!(vs.vsa_triangle, Some(375000.0));
//! assert_eq!(vs.vsa_quadrilateral, Some(450000.0));
//! ```

pub mod alignment;
pub mod biomarkers;
pub mod cli;
pub mod error;
pub mod gop;
pub mod pipeline;
pub mod selection;
pub mod signal;
pub mod stats;
pub mod trees;

pub use error::{Error, Result};

/// Version string embedded in every report.
pub const VERSION: &str = concat!("dyskit ", env!("CARGO_PKG_VERSION"));
