use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Vec3;

use super::{fmt_real, parse_real, write_text};

pub const PLOT_HEADER: &str = "var_x,var_y,var_z,group";

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub values: Vec3<f64>,
    pub group: String,
}

/// Columnar scatter data: one line per feature row tagged with its group
/// (a gesture label or a cluster index).
pub fn format_plot_data<G: std::fmt::Display>(rows: &[Vec3<f64>], groups: &[G]) -> Result<String> {
    if rows.len() != groups.len() {
        return Err(Error::InvalidInput(format!(
            "{} feature rows but {} group tags",
            rows.len(),
            groups.len()
        )));
    }
    let mut s = String::from(PLOT_HEADER);
    s.push('\n');
    for (r, g) in rows.iter().zip(groups) {
        let g = g.to_string();
        super::check_field(&g, "group")?;
        let _ = writeln!(s, "{},{},{},{g}", fmt_real(r[0]), fmt_real(r[1]), fmt_real(r[2]));
    }
    Ok(s)
}

pub fn export_plot_data<G: std::fmt::Display>(rows: &[Vec3<f64>], groups: &[G], path: &Path) -> Result<()> {
    write_text(path, &format_plot_data(rows, groups)?)
}

pub fn parse_plot_data(text: &str, path: &str) -> Result<Vec<PlotRow>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    if lines.next().map(|l| l.1) != Some(PLOT_HEADER) {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            reason: format!("expected header `{PLOT_HEADER}`"),
        });
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(n, l)| {
            let cells: Vec<&str> = l.split(',').collect();
            if cells.len() != 4 {
                return Err(Error::Parse {
                    path: path.into(),
                    line: n,
                    reason: format!("expected 4 cells, found {}", cells.len()),
                });
            }
            Ok(PlotRow {
                values: [
                    parse_real(cells[0], path, n, "var_x")?,
                    parse_real(cells[1], path, n, "var_y")?,
                    parse_real(cells[2], path, n, "var_z")?,
                ],
                group: cells[3].to_string(),
            })
        })
        .collect()
}
