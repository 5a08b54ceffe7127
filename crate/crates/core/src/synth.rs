//! Synthetic landmark videos for the four reference gestures.
//!
//! Each landmark follows a per-axis sinusoid around a rest pose plus Gaussian
//! jitter. The axis amplitudes encode where a gesture moves (wave sweeps in
//! x-y, pick lifts along y, stack moves on all three axes, push drives along
//! z); a per-landmark gain makes fingertips travel further than the wrist.
//!
//! Frozen calibration: with these constants the default 4 × 20 × 150 corpus
//! yields a training silhouette near 0.62 on normalized features.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::features::{FeatureRows, GestureVideo, LandmarkFrame, LANDMARKS};
use crate::linalg::{Vec3, DIM};
use crate::scalar::Scalar;

pub const DEFAULT_VIDEOS_PER_PROFILE: usize = 20;
pub const DEFAULT_FRAMES: usize = 150;

/// Coordinate jitter of every default profile.
pub const DEFAULT_NOISE_STD: f64 = 0.005;
/// Motion gain of the wrist; joints further along a finger ramp linearly to 1.
pub const WRIST_GAIN: f64 = 0.64;
/// Range of full oscillation cycles per video.
pub const CYCLES_PER_VIDEO: (f64, f64) = (2.0, 4.0);

pub const WAVE_AMPLITUDES: Vec3<f64> = [0.06, 0.06, 0.01];
pub const PICK_AMPLITUDES: Vec3<f64> = [0.02, 0.07, 0.02];
pub const STACK_AMPLITUDES: Vec3<f64> = [0.04, 0.04, 0.04];
pub const PUSH_AMPLITUDES: Vec3<f64> = [0.012, 0.012, 0.07];

#[derive(Debug, Clone, PartialEq)]
pub struct GestureProfile {
    pub name: String,
    pub axis_amplitudes: Vec3<f64>,
    pub noise_std: f64,
    pub base_pose: FeatureRows<f64>,
    /// Multiplier on `axis_amplitudes` for each landmark.
    pub landmark_gain: [f64; LANDMARKS],
}

impl GestureProfile {
    pub fn new(name: impl Into<String>, axis_amplitudes: Vec3<f64>, noise_std: f64) -> Result<Self> {
        let p = Self {
            name: name.into(),
            axis_amplitudes,
            noise_std,
            base_pose: rest_pose(),
            landmark_gain: anatomical_gains(WRIST_GAIN),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        crate::classifier::validate_label(&self.name).map_err(|r| Error::invariant("profile.name", r))?;
        if !self.axis_amplitudes.iter().all(|a| a.is_finite() && *a >= 0.0) {
            return Err(Error::invariant("profile.axis_amplitudes", "must be finite and >= 0"));
        }
        if !(self.noise_std.is_finite() && self.noise_std > 0.0) {
            return Err(Error::invariant("profile.noise_std", "must be finite and > 0"));
        }
        if !self.landmark_gain.iter().all(|g| g.is_finite() && *g >= 0.0) {
            return Err(Error::invariant("profile.landmark_gain", "must be finite and >= 0"));
        }
        if !self.base_pose.iter().flatten().all(|v| v.is_finite()) {
            return Err(Error::invariant("profile.base_pose", "must be finite"));
        }
        Ok(())
    }

    /// Expected variance of landmark `i` along `axis`: the sinusoid's
    /// `(g·A)²/2` plus the jitter variance.
    pub fn expected_variance(&self, landmark: usize, axis: usize) -> f64 {
        let a = self.landmark_gain[landmark] * self.axis_amplitudes[axis];
        0.5 * a * a + self.noise_std * self.noise_std
    }
}

/// Rest positions in normalized image coordinates: wrist at the bottom, five
/// fingers fanning upward with four joints each.
pub fn rest_pose() -> FeatureRows<f64> {
    let mut pose = [[0.0; DIM]; LANDMARKS];
    pose[0] = [0.5, 0.8, 0.0];
    let finger_angles = [-0.9f64, -0.35, -0.1, 0.15, 0.4];
    let segment = [0.09, 0.06, 0.04, 0.03];
    for (f, &ang) in finger_angles.iter().enumerate() {
        let (mut x, mut y, mut z) = (0.5, 0.8, 0.0);
        for (j, &len) in segment.iter().enumerate() {
            x += len * ang.sin();
            y -= len * ang.cos();
            z -= 0.005 * (j + 1) as f64;
            pose[1 + 4 * f + j] = [x, y, z];
        }
    }
    pose
}

/// Wrist gain `wrist`, rising linearly to 1 at each fingertip.
pub fn anatomical_gains(wrist: f64) -> [f64; LANDMARKS] {
    let mut g = [wrist; LANDMARKS];
    for (i, v) in g.iter_mut().enumerate().skip(1) {
        let depth = ((i - 1) % 4 + 1) as f64;
        *v = wrist + (1.0 - wrist) * depth / 4.0;
    }
    g
}

/// The four reference gestures: wave, pick, stack and push.
pub fn default_profiles() -> Vec<GestureProfile> {
    [
        ("wave", WAVE_AMPLITUDES),
        ("pick", PICK_AMPLITUDES),
        ("stack", STACK_AMPLITUDES),
        ("push", PUSH_AMPLITUDES),
    ]
    .into_iter()
    .map(|(n, a)| GestureProfile::new(n, a, DEFAULT_NOISE_STD).expect("default profile is valid"))
    .collect()
}

/// SplitMix64 finalizer; derives independent per-video seeds.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One labeled video; deterministic in `(profile, frames, seed)`.
pub fn generate_video<T: Scalar>(profile: &GestureProfile, frames: usize, seed: u64) -> Result<GestureVideo<T>> {
    generate_video_with_id(profile, frames, seed, format!("{}-{seed:016x}", profile.name))
}

fn generate_video_with_id<T: Scalar>(
    profile: &GestureProfile,
    frames: usize,
    seed: u64,
    source_id: String,
) -> Result<GestureVideo<T>> {
    if frames < 2 {
        return Err(Error::DegenerateInput(format!(
            "a video needs at least 2 frames, got {frames}"
        )));
    }
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cycles = rng.random_range(CYCLES_PER_VIDEO.0..CYCLES_PER_VIDEO.1);
    let omega = std::f64::consts::TAU * cycles / frames as f64;
    let mut phase = [[0.0; DIM]; LANDMARKS];
    for p in phase.iter_mut().flatten() {
        *p = rng.random_range(0.0..std::f64::consts::TAU);
    }
    let jitter =
        Normal::new(0.0, profile.noise_std).map_err(|e| Error::invariant("profile.noise_std", e.to_string()))?;
    let mut out = Vec::with_capacity(frames);
    for t in 0..frames {
        let mut pts = [[T::zero(); DIM]; LANDMARKS];
        for i in 0..LANDMARKS {
            for c in 0..DIM {
                let amp = profile.landmark_gain[i] * profile.axis_amplitudes[c];
                let v =
                    profile.base_pose[i][c] + amp * (omega * t as f64 + phase[i][c]).sin() + jitter.sample(&mut rng);
                pts[i][c] = T::lit(v);
            }
        }
        out.push(LandmarkFrame::new(pts)?);
    }
    GestureVideo::new(out, source_id, Some(profile.name.clone()))
}

/// `videos_per_profile` videos of every profile, profile-major. Video `j`
/// (global index) is generated from `mix_seed(seed, j)` only.
pub fn generate_dataset<T: Scalar>(
    profiles: &[GestureProfile],
    videos_per_profile: usize,
    frames: usize,
    seed: u64,
) -> Result<Vec<GestureVideo<T>>> {
    if videos_per_profile == 0 {
        return Err(Error::InvalidInput("videos_per_profile must be at least 1".into()));
    }
    let mut videos = Vec::with_capacity(profiles.len() * videos_per_profile);
    for (p, profile) in profiles.iter().enumerate() {
        for v in 0..videos_per_profile {
            let j = p * videos_per_profile + v;
            let id = format!("{}_{j:04}", profile.name);
            videos.push(generate_video_with_id(profile, frames, mix_seed(seed, j as u64), id)?);
        }
    }
    Ok(videos)
}
