//! Ingestion, complete-case filtering, min–max normalisation, MCAR masking, splits and folds.

pub mod dataset;
pub mod mask;
pub mod split;
pub mod synth;
pub mod table;

pub use dataset::{denormalize, normalize, Dataset, NormParams};
pub use mask::{apply_sentinel, mask_mcar, masked_count, mcar_mask, Mask, MaskedDataset, SENTINEL};
pub use split::{kfold, split, FoldSplit};
pub use synth::synth_milk;
pub use table::{complete_cases, load_csv, parse_csv, ClassColumn, RawTable};

/// Default missing-cell marker in UCI-style files.
pub const DEFAULT_MISSING_MARKER: &str = "?";
