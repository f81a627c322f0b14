//! Seeded synthetic samples: a noisy non-uniform circle, two circles of
//! different sizes, and the time-delay embedding of a scalar series.
//!
//! Angles are drawn with density proportional to `max(0, 1 + a·cos θ)` by
//! rejection sampling, radial noise is Gaussian with standard deviation
//! `noise_sigma` times the circle radius, and background points are uniform
//! in the bounding box of the circles widened by three noise deviations.

use std::collections::HashSet;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_points: usize,
    pub noise_sigma: f64,
    /// Share of the points drawn uniformly from the bounding box.
    pub background_fraction: f64,
    /// Angular skew `a` of the density `1 + a·cos θ`.
    pub nonuniformity: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            n_points: 2050,
            noise_sigma: 0.05,
            background_fraction: 0.05,
            nonuniformity: 0.8,
        }
    }
}

impl GeneratorConfig {
    /// Defaults for [`gen_circle`]: 2050 points.
    pub fn circle(seed: u64) -> Self {
        GeneratorConfig {
            seed,
            ..Default::default()
        }
    }

    /// Defaults for [`gen_two_circles`]: 300 points, with the large circle
    /// sparse enough on one side that no single Rips radius closes it
    /// without also filling the small one.
    pub fn two_circles(seed: u64) -> Self {
        GeneratorConfig {
            seed,
            n_points: 300,
            nonuniformity: 0.95,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 {
            return Err(Error::param("n_points must be at least 1"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::param(format!("noise_sigma {} must be finite and >= 0", self.noise_sigma)));
        }
        if !(0.0..1.0).contains(&self.background_fraction) {
            return Err(Error::param(format!(
                "background_fraction {} must lie in [0, 1)",
                self.background_fraction
            )));
        }
        if !(self.nonuniformity >= 0.0 && self.nonuniformity.is_finite()) {
            return Err(Error::param(format!("nonuniformity {} must be finite and >= 0", self.nonuniformity)));
        }
        Ok(())
    }

    fn background_count(&self) -> usize {
        (self.n_points as f64 * self.background_fraction).round() as usize
    }
}

/// Placement of the two circles. The large radius is four times the small.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoCircleLayout {
    pub small_radius: f64,
    /// Share of the non-background points placed on the small circle.
    pub small_share: f64,
    /// Gap between the two circles, in units of the small radius.
    pub gap: f64,
    /// Angular skew of the small circle; the large one uses the config's.
    pub small_nonuniformity: f64,
}

impl Default for TwoCircleLayout {
    fn default() -> Self {
        TwoCircleLayout {
            small_radius: 1.0,
            small_share: 0.4,
            gap: 1.0,
            small_nonuniformity: 0.3,
        }
    }
}

struct Sampler {
    rng: ChaCha8Rng,
    seen: HashSet<[u64; 2]>,
    rows: Vec<Vec<f64>>,
}

impl Sampler {
    fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seen: HashSet::new(),
            rows: Vec::new(),
        }
    }

    /// Draws until `draw` yields a point not produced before.
    fn push_unique(&mut self, mut draw: impl FnMut(&mut ChaCha8Rng) -> [f64; 2]) {
        loop {
            let p = draw(&mut self.rng);
            if self.seen.insert([p[0].to_bits(), p[1].to_bits()]) {
                self.rows.push(p.to_vec());
                return;
            }
        }
    }

    fn circle(&mut self, count: usize, center: [f64; 2], radius: f64, a: f64, cfg: &GeneratorConfig) {
        let noise = Normal::new(0.0, cfg.noise_sigma * radius).expect("sigma checked");
        for _ in 0..count {
            self.push_unique(|rng| {
                let theta = loop {
                    let t = rng.random_range(0.0..TAU);
                    let accept = (1.0 + a * t.cos()).max(0.0) / (1.0 + a);
                    if rng.random::<f64>() < accept {
                        break t;
                    }
                };
                let r = radius + noise.sample(rng);
                [center[0] + r * theta.cos(), center[1] + r * theta.sin()]
            });
        }
    }

    fn background(&mut self, count: usize, lo: [f64; 2], hi: [f64; 2]) {
        for _ in 0..count {
            self.push_unique(|rng| [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])]);
        }
    }
}

/// Noisy, non-uniform sample of the unit circle plus background points.
pub fn gen_circle(cfg: &GeneratorConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let n_bg = cfg.background_count();
    let mut s = Sampler::new(cfg.seed);
    s.circle(cfg.n_points - n_bg, [0.0, 0.0], 1.0, cfg.nonuniformity, cfg);
    let m = 1.0 + 3.0 * cfg.noise_sigma;
    s.background(n_bg, [-m, -m], [m, m]);
    Ok(s.rows)
}

/// Two disjoint circles with radii in ratio 1:4 side by side, plus background.
pub fn gen_two_circles(cfg: &GeneratorConfig) -> Result<Vec<Vec<f64>>> {
    gen_two_circles_with(cfg, &TwoCircleLayout::default())
}

/// Small-circle points come first, then large-circle points, then background.
pub fn gen_two_circles_with(cfg: &GeneratorConfig, layout: &TwoCircleLayout) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    if !(layout.small_radius > 0.0 && layout.small_radius.is_finite()) {
        return Err(Error::param("small_radius must be positive"));
    }
    if !(0.0..=1.0).contains(&layout.small_share) {
        return Err(Error::param("small_share must lie in [0, 1]"));
    }
    if !(layout.small_nonuniformity >= 0.0 && layout.small_nonuniformity.is_finite()) {
        return Err(Error::param("small_nonuniformity must be finite and >= 0"));
    }
    if !(layout.gap > 0.0) {
        return Err(Error::param("circles must be disjoint (gap > 0)"));
    }
    let (rs, rl) = (layout.small_radius, 4.0 * layout.small_radius);
    let n_bg = cfg.background_count();
    let on_circles = cfg.n_points - n_bg;
    let n_small = (on_circles as f64 * layout.small_share).round() as usize;
    let cx = rs + layout.gap * rs + rl;
    let mut s = Sampler::new(cfg.seed);
    s.circle(n_small, [0.0, 0.0], rs, layout.small_nonuniformity, cfg);
    s.circle(on_circles - n_small, [cx, 0.0], rl, cfg.nonuniformity, cfg);
    let m = 3.0 * cfg.noise_sigma * rl;
    s.background(n_bg, [-rs - m, -rl - m], [cx + rl + m, rl + m]);
    Ok(s.rows)
}

/// Centres of the two circles produced by [`gen_two_circles_with`].
pub fn two_circle_centers(layout: &TwoCircleLayout) -> [[f64; 2]; 2] {
    let rs = layout.small_radius;
    [[0.0, 0.0], [rs + layout.gap * rs + 4.0 * rs, 0.0]]
}

/// Rows `(f(t), f(t+τ), …, f(t+Mτ))` for every valid `t`.
pub fn time_delay_embed(series: &[f64], m: usize, tau: usize) -> Result<Vec<Vec<f64>>> {
    if tau == 0 {
        return Err(Error::param("tau must be at least 1"));
    }
    let span = m * tau;
    if series.len() <= span {
        return Err(Error::param(format!(
            "series of length {} is too short for M={m}, tau={tau}",
            series.len()
        )));
    }
    Ok((0..series.len() - span)
        .map(|t| (0..=m).map(|j| series[t + j * tau]).collect())
        .collect())
}

/// `sin(2π t / period)` for `t = 0..n`.
pub fn sinusoid(n: usize, period: f64) -> Vec<f64> {
    (0..n).map(|t| (TAU * t as f64 / period).sin()).collect()
}
