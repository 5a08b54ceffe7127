use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::classifier::ClusterLabelMap;
use crate::error::{Error, Result};
use crate::features::NormalizationStats;
use crate::gmm::{CovarianceMode, GaussianComponent, MixtureParams};
use crate::linalg::{Mat3, Vec3, DIM};
use crate::model::{GestureModel, TrainingMeta};

use super::{fmt_real, parse_real, read_text, write_text};

pub const MODEL_HEADER: &str = "gesture-gmm-model v1";
const MODEL_MAGIC: &str = "gesture-gmm-model";
/// Weight-sum tolerance applied when loading.
const LOAD_WEIGHT_TOL: f64 = 1e-9;

pub type ModelFile = GestureModel<f64>;

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_real(v)).collect::<Vec<_>>().join(",")
}

pub fn format_model(model: &ModelFile) -> String {
    let mut s = String::new();
    let m = &model.meta;
    let _ = writeln!(s, "{MODEL_HEADER}");
    let _ = writeln!(s, "k={}", model.k());
    let _ = writeln!(s, "covariance_mode={}", model.covariance_mode.as_str());
    let _ = writeln!(s, "seed={}", m.seed);
    let _ = writeln!(s, "tol={}", fmt_real(m.tol));
    let _ = writeln!(s, "iterations={}", m.iterations);
    let _ = writeln!(s, "final_log_likelihood={}", fmt_real(m.final_log_likelihood));
    let _ = writeln!(s, "silhouette={}", fmt_real(m.silhouette));
    let _ = writeln!(s, "[normalization]");
    let _ = writeln!(s, "mean={}", join(model.stats.mean()));
    let _ = writeln!(s, "std={}", join(model.stats.std()));
    for (k, c) in model.params.components().iter().enumerate() {
        let _ = writeln!(s, "[component {k}]");
        let _ = writeln!(s, "label={}", model.label_map.label(k));
        let _ = writeln!(s, "confidence={}", fmt_real(model.label_map.confidence()[k]));
        let _ = writeln!(s, "weight={}", fmt_real(model.params.weights()[k]));
        let _ = writeln!(s, "mean={}", join(c.mean()));
        let flat: Vec<f64> = c.covariance().iter().flatten().copied().collect();
        let _ = writeln!(s, "covariance={}", join(&flat));
    }
    let _ = writeln!(s, "[end]");
    s
}

struct Section<'a> {
    line: usize,
    fields: BTreeMap<&'a str, (usize, &'a str)>,
}

struct Reader<'a> {
    path: &'a str,
    sections: BTreeMap<String, Section<'a>>,
}

impl<'a> Reader<'a> {
    fn section(&self, name: &str) -> Result<&Section<'a>> {
        self.sections.get(name).ok_or_else(|| Error::MissingSection {
            path: self.path.into(),
            section: name.into(),
        })
    }

    fn field(&self, section: &str, key: &str) -> Result<(usize, &'a str)> {
        let sec = self.section(section)?;
        sec.fields.get(key).copied().ok_or_else(|| Error::Parse {
            path: self.path.into(),
            line: sec.line,
            reason: format!("section [{section}] is missing `{key}`"),
        })
    }

    fn real(&self, section: &str, key: &str) -> Result<f64> {
        let (line, v) = self.field(section, key)?;
        parse_real(v, self.path, line, key)
    }

    fn int<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T> {
        let (line, v) = self.field(section, key)?;
        v.trim().parse().map_err(|_| Error::Parse {
            path: self.path.into(),
            line,
            reason: format!("{key}: `{v}` is not a non-negative integer"),
        })
    }

    fn reals<const N: usize>(&self, section: &str, key: &str) -> Result<[f64; N]> {
        let (line, v) = self.field(section, key)?;
        let vals = v
            .split(',')
            .map(|c| parse_real(c, self.path, line, key))
            .collect::<Result<Vec<_>>>()?;
        vals.try_into().map_err(|v: Vec<f64>| Error::Parse {
            path: self.path.into(),
            line,
            reason: format!("{key}: expected {N} values, found {}", v.len()),
        })
    }

    fn invariant(&self, e: Error) -> Error {
        match e {
            Error::Invariant { field, reason } => Error::Invariant {
                field: format!("{}: {field}", self.path),
                reason,
            },
            other => other,
        }
    }
}

const TOP: &str = "header";

pub fn parse_model(text: &str, path: &str) -> Result<ModelFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let header = lines.next().map(|l| l.1).unwrap_or("");
    if header != MODEL_HEADER {
        if let Some(v) = header.strip_prefix(MODEL_MAGIC).map(str::trim) {
            return Err(Error::VersionMismatch {
                path: path.into(),
                found: v.into(),
                expected: "v1".into(),
            });
        }
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            reason: format!("expected header `{MODEL_HEADER}`"),
        });
    }
    let mut sections = BTreeMap::new();
    let mut current = TOP.to_string();
    sections.insert(
        current.clone(),
        Section {
            line: 1,
            fields: BTreeMap::new(),
        },
    );
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if sections.contains_key(name) {
                return Err(Error::Parse {
                    path: path.into(),
                    line: n,
                    reason: format!("duplicate section [{name}]"),
                });
            }
            current = name.to_string();
            sections.insert(
                current.clone(),
                Section {
                    line: n,
                    fields: BTreeMap::new(),
                },
            );
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.into(),
            line: n,
            reason: format!("expected `key=value`, found `{line}`"),
        })?;
        let sec = sections.get_mut(&current).expect("current section exists");
        if sec.fields.insert(k, (n, v)).is_some() {
            return Err(Error::Parse {
                path: path.into(),
                line: n,
                reason: format!("duplicate key `{k}` in [{current}]"),
            });
        }
    }
    let r = Reader { path, sections };

    let k: usize = r.int(TOP, "k")?;
    if k == 0 {
        return Err(r.invariant(Error::invariant("k", "must be at least 1")));
    }
    let (mode_line, mode) = r.field(TOP, "covariance_mode")?;
    let covariance_mode: CovarianceMode = mode.parse().map_err(|e: Error| Error::Parse {
        path: path.into(),
        line: mode_line,
        reason: e.to_string(),
    })?;
    let meta = TrainingMeta {
        seed: r.int(TOP, "seed")?,
        tol: r.real(TOP, "tol")?,
        iterations: r.int(TOP, "iterations")?,
        final_log_likelihood: r.real(TOP, "final_log_likelihood")?,
        silhouette: r.real(TOP, "silhouette")?,
    };

    let stats = NormalizationStats::new(
        r.reals::<3>("normalization", "mean")?,
        r.reals::<3>("normalization", "std")?,
    )
    .map_err(|e| r.invariant(e))?;

    let mut components = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    let mut labels = Vec::with_capacity(k);
    let mut confidence = Vec::with_capacity(k);
    for j in 0..k {
        let sec = format!("component {j}");
        labels.push(r.field(&sec, "label")?.1.to_string());
        confidence.push(r.real(&sec, "confidence")?);
        weights.push(r.real(&sec, "weight")?);
        let mean: Vec3<f64> = r.reals::<3>(&sec, "mean")?;
        let flat = r.reals::<9>(&sec, "covariance")?;
        let mut cov: Mat3<f64> = [[0.0; DIM]; DIM];
        for (i, v) in flat.iter().enumerate() {
            cov[i / DIM][i % DIM] = *v;
        }
        let comp = GaussianComponent::new(mean, cov).map_err(|e| match e {
            Error::Invariant { field, reason } => Error::Invariant {
                field: format!("{path}: component[{j}].{field}"),
                reason,
            },
            other => other,
        })?;
        components.push(comp);
    }
    if r.sections.contains_key(&format!("component {k}")) {
        return Err(Error::Parse {
            path: path.into(),
            line: r.section(&format!("component {k}"))?.line,
            reason: format!("more components than k = {k}"),
        });
    }
    r.section("end")?;

    let params = MixtureParams::with_tolerance(components, weights, LOAD_WEIGHT_TOL).map_err(|e| r.invariant(e))?;
    let label_map = ClusterLabelMap::new(labels, confidence).map_err(|e| r.invariant(e))?;
    GestureModel::new(covariance_mode, params, stats, label_map, meta).map_err(|e| r.invariant(e))
}

pub fn save_model(model: &ModelFile, path: &Path) -> Result<()> {
    write_text(path, &format_model(model))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    parse_model(&read_text(path)?, &path.display().to_string())
}
