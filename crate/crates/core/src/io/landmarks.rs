use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::features::{GestureVideo, LandmarkFrame, LANDMARKS};
use crate::linalg::DIM;

use super::{check_field, fmt_real, parse_real, read_text, write_text};

pub const LANDMARK_HEADER: &str = "gesture-landmarks v1";
pub const LANDMARK_FILE_EXTENSION: &str = "lmk";

pub fn format_video(video: &GestureVideo<f64>) -> Result<String> {
    check_field(video.source_id(), "source_id")?;
    if let Some(l) = video.label() {
        check_field(l, "label")?;
    }
    let mut s = String::new();
    s.push_str(LANDMARK_HEADER);
    s.push('\n');
    let _ = writeln!(s, "source_id={}", video.source_id());
    if let Some(l) = video.label() {
        let _ = writeln!(s, "label={l}");
    }
    for frame in video.frames() {
        let mut first = true;
        for v in frame.points().iter().flatten() {
            if !first {
                s.push(',');
            }
            first = false;
            s.push_str(&fmt_real(*v));
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn parse_video(text: &str, path: &str) -> Result<GestureVideo<f64>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = lines.next().map(|(_, l)| l.trim_end()).unwrap_or("");
    if header != LANDMARK_HEADER {
        if let Some(v) = header.strip_prefix("gesture-landmarks ") {
            return Err(Error::VersionMismatch {
                path: path.into(),
                found: v.into(),
                expected: "v1".into(),
            });
        }
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            reason: format!("expected header `{LANDMARK_HEADER}`"),
        });
    }
    let mut source_id = None;
    let mut label = None;
    let mut frames = Vec::new();
    for (n, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if frames.is_empty() {
            if let Some(v) = line.strip_prefix("source_id=") {
                source_id = Some(v.to_string());
                continue;
            }
            if let Some(v) = line.strip_prefix("label=") {
                label = Some(v.to_string());
                continue;
            }
        }
        let values = line
            .split(',')
            .enumerate()
            .map(|(i, c)| parse_real(c, path, n, &format!("coordinate {i}")))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != LANDMARKS * DIM {
            return Err(Error::Parse {
                path: path.into(),
                line: n,
                reason: format!("expected {} coordinates, found {}", LANDMARKS * DIM, values.len()),
            });
        }
        frames.push(LandmarkFrame::from_flat(&values)?);
    }
    let source_id = source_id.ok_or_else(|| Error::MissingSection {
        path: path.into(),
        section: "source_id".into(),
    })?;
    GestureVideo::new(frames, source_id, label).map_err(|e| Error::Parse {
        path: path.into(),
        line: 0,
        reason: e.to_string(),
    })
}

pub fn write_video(video: &GestureVideo<f64>, path: &Path) -> Result<()> {
    write_text(path, &format_video(video)?)
}

pub fn read_video(path: &Path) -> Result<GestureVideo<f64>> {
    parse_video(&read_text(path)?, &path.display().to_string())
}

/// Landmark files in `dir`, sorted by file name.
pub fn list_video_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.extension().is_some_and(|e| e == LANDMARK_FILE_EXTENSION) {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

pub fn read_videos_in_dir(dir: &Path) -> Result<Vec<GestureVideo<f64>>> {
    list_video_files(dir)?.iter().map(|p| read_video(p)).collect()
}
