//! Energy signatures, run summaries and plot-ready CSV output.

mod plot;
mod signature;
mod summary;

pub use plot::{emit_plot_data, profile_plot_rows, signature_plot_rows, write_plot_csv, PlotError, PlotRow, PlotSource};
pub use signature::{
    compare_signatures, compute_signature, ols_slope, read_reference_csv, signature_from_points, BinDifference,
    ComparisonError, EnergySignature, ReferenceError, SignatureBin, SignatureComparison, SignatureError,
    DEFAULT_BIN_WIDTH,
};
pub use summary::{format_hms, planned_requests, render_summary_table, summarize_run, StageSummary};
