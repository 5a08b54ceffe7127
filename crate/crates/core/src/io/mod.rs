//! Versioned text formats for landmark videos, feature CSVs, trained models
//! and plot data. Every real number is written with 17 significant digits so
//! `f64` values survive a round trip bit for bit.

mod features_csv;
mod landmarks;
mod model_file;
mod plot;

use std::path::Path;

use crate::error::{Error, Result};

pub use features_csv::{
    format_feature_csv, parse_feature_csv, read_feature_csv, write_feature_csv, FEATURE_CSV_HEADER,
};
pub use landmarks::{
    format_video, list_video_files, parse_video, read_video, read_videos_in_dir, write_video, LANDMARK_FILE_EXTENSION,
    LANDMARK_HEADER,
};
pub use model_file::{format_model, load_model, parse_model, save_model, ModelFile, MODEL_HEADER};
pub use plot::{export_plot_data, format_plot_data, parse_plot_data, PlotRow, PLOT_HEADER};

/// Decimal with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn parse_real(s: &str, path: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
        path: path.to_string(),
        line,
        reason: format!("{what}: `{s}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            path: path.to_string(),
            line,
            reason: format!("{what}: `{s}` is not finite"),
        });
    }
    Ok(v)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Rejects identifiers that would break comma- or line-separated records.
pub(crate) fn check_field(value: &str, what: &str) -> Result<()> {
    if value.is_empty() || value.contains([',', '\n', '\r']) {
        return Err(Error::InvalidInput(format!(
            "{what} `{value}` must be non-empty and free of commas and newlines"
        )));
    }
    Ok(())
}
