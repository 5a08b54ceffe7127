use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, LANDMARKS};
use crate::linalg::DIM;

use super::{check_field, fmt_real, parse_real, read_text, write_text};

pub const FEATURE_CSV_HEADER: &str = "lm,var_x,var_y,var_z,source_id,label";

/// 21 rows per video, landmark index first; an absent label is an empty cell.
pub fn format_feature_csv(features: &[FeatureMatrix<f64>]) -> Result<String> {
    let mut s = String::with_capacity(64 + features.len() * LANDMARKS * 80);
    s.push_str(FEATURE_CSV_HEADER);
    s.push('\n');
    for fm in features {
        check_field(fm.source_id(), "source_id")?;
        if let Some(l) = fm.label() {
            check_field(l, "label")?;
        }
        let label = fm.label().unwrap_or("");
        for (i, r) in fm.rows().iter().enumerate() {
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{label}",
                fmt_real(r[0]),
                fmt_real(r[1]),
                fmt_real(r[2]),
                fm.source_id()
            );
        }
    }
    Ok(s)
}

pub fn parse_feature_csv(text: &str, path: &str) -> Result<Vec<FeatureMatrix<f64>>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    match lines.next() {
        Some((_, h)) if h == FEATURE_CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                path: path.into(),
                line: 1,
                reason: format!("expected header `{FEATURE_CSV_HEADER}`"),
            })
        }
    }
    let data: Vec<(usize, &str)> = lines.filter(|(_, l)| !l.is_empty()).collect();
    if !data.len().is_multiple_of(LANDMARKS) {
        return Err(Error::Parse {
            path: path.into(),
            line: data.last().map_or(1, |d| d.0),
            reason: format!("{} data rows is not a multiple of {LANDMARKS}", data.len()),
        });
    }
    let mut out = Vec::with_capacity(data.len() / LANDMARKS);
    for chunk in data.chunks(LANDMARKS) {
        let mut rows = [[0.0; DIM]; LANDMARKS];
        let mut ident: Option<(&str, &str)> = None;
        for (i, &(n, line)) in chunk.iter().enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 6 {
                return Err(Error::Parse {
                    path: path.into(),
                    line: n,
                    reason: format!("expected 6 cells, found {}", cells.len()),
                });
            }
            if cells[0].trim().parse::<usize>().ok() != Some(i) {
                return Err(Error::Parse {
                    path: path.into(),
                    line: n,
                    reason: format!("expected landmark index {i}, found `{}`", cells[0]),
                });
            }
            for c in 0..DIM {
                rows[i][c] = parse_real(cells[1 + c], path, n, ["var_x", "var_y", "var_z"][c])?;
            }
            match ident {
                None => ident = Some((cells[4], cells[5])),
                Some(id) if id != (cells[4], cells[5]) => {
                    return Err(Error::Parse {
                        path: path.into(),
                        line: n,
                        reason: "source_id/label changes inside a 21-row block".into(),
                    })
                }
                Some(_) => {}
            }
        }
        let (source_id, label) = ident.expect("chunk is non-empty");
        let label = (!label.is_empty()).then(|| label.to_string());
        let fm = FeatureMatrix::new(rows, source_id, label).map_err(|e| Error::Parse {
            path: path.into(),
            line: chunk[0].0,
            reason: e.to_string(),
        })?;
        out.push(fm);
    }
    Ok(out)
}

pub fn write_feature_csv(features: &[FeatureMatrix<f64>], path: &Path) -> Result<()> {
    write_text(path, &format_feature_csv(features)?)
}

pub fn read_feature_csv(path: &Path) -> Result<Vec<FeatureMatrix<f64>>> {
    parse_feature_csv(&read_text(path)?, &path.display().to_string())
}
