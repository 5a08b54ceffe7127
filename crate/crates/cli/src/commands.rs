use std::collections::BTreeSet;
use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use gesture_gmm::features::compute_variances;
use gesture_gmm::io::{self, LANDMARK_FILE_EXTENSION};
use gesture_gmm::model::{evaluate, train as train_model};
use gesture_gmm::synth::{default_profiles, generate_dataset};
use gesture_gmm::{classifier, EmConfig, Error, ErrorKind, FeatureMatrix, GestureModel};

use crate::{ClassifyArgs, ScoreArgs, SynthArgs, TrainArgs};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

pub const MANIFEST_NAME: &str = "manifest.csv";

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(e) => match e.kind() {
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Numerical => EXIT_NUMERICAL,
            },
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Core(Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn synth(a: SynthArgs) -> CmdResult {
    if a.videos_per_profile == 0 {
        return Err(usage("--videos-per-profile must be at least 1"));
    }
    if a.frames < 2 {
        return Err(usage("--frames must be at least 2"));
    }
    let videos = generate_dataset::<f64>(&default_profiles(), a.videos_per_profile, a.frames, a.seed)?;
    std::fs::create_dir_all(&a.output).map_err(|e| io_failure(&a.output, e))?;
    let mut manifest = String::from("file,source_id,label\n");
    for v in &videos {
        let name = format!("{}.{LANDMARK_FILE_EXTENSION}", v.source_id());
        io::write_video(v, &a.output.join(&name))?;
        manifest.push_str(&format!("{name},{},{}\n", v.source_id(), v.label().unwrap_or("")));
    }
    let mpath = a.output.join(MANIFEST_NAME);
    std::fs::write(&mpath, manifest).map_err(|e| io_failure(&mpath, e))?;
    println!("videos={}", videos.len());
    println!("frames={}", a.frames);
    println!("manifest={}", mpath.display());
    Ok(())
}

/// Features plus the number of frames they were extracted from (0 for CSV input).
struct Loaded {
    features: Vec<FeatureMatrix>,
    frames: usize,
}

fn load_features(input: &Path) -> Result<Loaded, Failure> {
    if input.is_dir() {
        let files = io::list_video_files(input)?;
        if files.is_empty() {
            return Err(Failure::Core(Error::InvalidInput(format!(
                "no .{LANDMARK_FILE_EXTENSION} files in {}",
                input.display()
            ))));
        }
        let mut features = Vec::with_capacity(files.len());
        let mut frames = 0;
        for f in &files {
            let v = io::read_video(f)?;
            frames += v.frame_count();
            features.push(compute_variances(&v)?);
        }
        return Ok(Loaded { features, frames });
    }
    if !input.exists() {
        return Err(Failure::Core(Error::InvalidInput(format!(
            "input {} does not exist",
            input.display()
        ))));
    }
    if input.extension().is_some_and(|e| e == "csv") {
        let features = io::read_feature_csv(input)?;
        if features.is_empty() {
            return Err(Failure::Core(Error::InvalidInput(format!(
                "{} holds no feature rows",
                input.display()
            ))));
        }
        return Ok(Loaded { features, frames: 0 });
    }
    let v = io::read_video(input)?;
    Ok(Loaded {
        frames: v.frame_count(),
        features: vec![compute_variances(&v)?],
    })
}

pub fn train(a: TrainArgs) -> CmdResult {
    if let Some(0) = a.k {
        return Err(usage("--k must be at least 1"));
    }
    let probe = EmConfig {
        k: a.k.unwrap_or(1),
        max_iters: a.max_iters,
        tol: a.tol,
        reg_eps: a.reg_eps,
        seed: a.seed,
        covariance_mode: a.cov_mode.into(),
    };
    probe.validate().map_err(|e| usage(e.to_string()))?;

    let loaded = load_features(&a.input)?;
    let features = loaded.features;
    let labels: BTreeSet<&str> = features.iter().filter_map(|f| f.label()).collect();
    if labels.is_empty() || features.iter().any(|f| f.label().is_none()) {
        return Err(Failure::Core(Error::InvalidInput(
            "training requires every video to carry a label".into(),
        )));
    }
    let k = match a.k {
        Some(k) => {
            if k != labels.len() {
                eprintln!(
                    "warning: --k {k} differs from the {} distinct training labels; proceeding",
                    labels.len()
                );
            }
            k
        }
        None => labels.len(),
    };
    let config = EmConfig { k, ..probe };
    let out = train_model(&features, &config)?;
    io::save_model(&out.model, &a.model)?;
    if let Some(csv) = &a.output {
        io::write_feature_csv(&features, csv)?;
    }
    if let Some(dir) = &a.plot {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        let raw: Vec<[f64; 3]> = features.iter().flat_map(|f| f.rows().iter().copied()).collect();
        let by_label: Vec<&str> = features
            .iter()
            .flat_map(|f| std::iter::repeat_n(f.label().unwrap_or(""), f.rows().len()))
            .collect();
        io::export_plot_data(&raw, &by_label, &dir.join("before.txt"))?;
        io::export_plot_data(&raw, &out.assignment, &dir.join("after.txt"))?;
    }

    let m = &out.model;
    println!("videos={}", features.len());
    println!("rows={}", out.rows.len());
    println!("k={}", m.k());
    println!("iterations={}", m.meta.iterations);
    println!("converged={}", out.fit.trace.converged);
    println!("final_log_likelihood={:.6}", m.meta.final_log_likelihood);
    println!("silhouette={:.4}", m.meta.silhouette);
    for c in 0..m.k() {
        println!(
            "cluster.{c}.label={} confidence={:.4} weight={:.4}",
            m.label_map.label(c),
            m.label_map.confidence()[c],
            m.params.weights()[c]
        );
    }
    Ok(())
}

fn check_schema(model: &GestureModel, features: &[FeatureMatrix]) -> Result<(), Failure> {
    let known: BTreeSet<&str> = model.label_map.distinct_labels().into_iter().collect();
    if let Some(f) = features.iter().find(|f| f.label().is_some_and(|l| !known.contains(l))) {
        return Err(Failure::Core(Error::InvalidInput(format!(
            "video `{}` is labeled `{}`, which the model does not know (labels: {:?})",
            f.source_id(),
            f.label().unwrap_or(""),
            known
        ))));
    }
    Ok(())
}

pub fn classify(a: ClassifyArgs) -> CmdResult {
    let model = io::load_model(&a.model)?;
    let started = Instant::now();
    let loaded = load_features(&a.input)?;
    check_schema(&model, &loaded.features)?;
    let eval = evaluate(&model, &loaded.features)?;
    let elapsed = started.elapsed().as_secs_f64();

    let mut out = String::new();
    out.push_str(&classifier::record_header(&model.label_map));
    out.push('\n');
    for r in &eval.results {
        out.push_str(&r.record());
        out.push('\n');
    }
    if let Some(acc) = eval.accuracy() {
        out.push_str(&format!("accuracy={acc:.4} ({}/{})\n", eval.correct, eval.labeled));
        // fraction of each cluster's votes cast by rows of its own label
        for c in 0..model.k() {
            let (mut agree, mut total) = (0usize, 0usize);
            for (r, f) in eval.results.iter().zip(&loaded.features) {
                let Some(l) = f.label() else { continue };
                for v in r.votes.iter().filter(|v| v.0 == c) {
                    total += 1;
                    if l == model.label_map.label(v.0) {
                        agree += 1;
                    }
                }
            }
            if total > 0 {
                out.push_str(&format!("cluster.{c}.agreement={:.4}\n", agree as f64 / total as f64));
            }
        }
    }
    if let Some(s) = &eval.silhouette {
        out.push_str(&format!("silhouette={:.4}\n", s.overall));
    }
    print!("{out}");
    if let Some(p) = &a.output {
        std::fs::write(p, &out).map_err(|e| io_failure(p, e))?;
    }

    // Integration point for task execution: the winning gesture is handed off here.
    let mut err = std::io::stderr().lock();
    for r in &eval.results {
        let _ = writeln!(err, "dispatch {} -> {}", r.source_id, r.winner);
    }
    if loaded.frames > 0 {
        let _ = writeln!(
            err,
            "timing: {:.3e} s/frame over {} frames ({} videos)",
            elapsed / loaded.frames as f64,
            loaded.frames,
            eval.results.len()
        );
    }
    Ok(())
}

pub fn score(a: ScoreArgs) -> CmdResult {
    let model = io::load_model(&a.model)?;
    let loaded = load_features(&a.input)?;
    let rows: Vec<[f64; 3]> = loaded
        .features
        .iter()
        .flat_map(|f| model.normalize(f).rows().to_vec())
        .collect();
    let assignment = gesture_gmm::model::assign_rows(&rows, &model.params)?;
    let report = gesture_gmm::metrics::silhouette(&rows, &assignment)?;
    print!("{}", report.to_text());
    Ok(())
}
