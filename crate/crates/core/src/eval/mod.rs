//! Imputation error, Δacc and the cross-validated experiment grid.

pub mod classifier;
pub mod cv;
pub mod metrics;
pub mod report;

pub use classifier::{classifier_accuracy, classifier_fit, delta_acc, Classifier};
pub use cv::{run_cv, CellReport, CellStatus, CvConfig, EvalReport, NamedDataset};
pub use metrics::{mean_and_sample_std, rmse_all_cells, rmse_masked};
pub use report::{render_kv, render_text};
