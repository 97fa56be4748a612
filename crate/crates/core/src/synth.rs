//! Reproducible synthetic datasets with ground-truth labels.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2D, Rect};
use crate::labels::{Label, Labeling};
use crate::oracle::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Blobs,
    Moons,
    Rings,
    Noisy,
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "blobs" => Ok(Generator::Blobs),
            "moons" => Ok(Generator::Moons),
            "rings" => Ok(Generator::Rings),
            "noisy" => Ok(Generator::Noisy),
            other => Err(Error::InvalidParameter(format!(
                "unknown generator `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Generator::Blobs => "blobs",
            Generator::Moons => "moons",
            Generator::Rings => "rings",
            Generator::Noisy => "noisy",
        })
    }
}

impl Generator {
    /// Generate with default shape parameters at roughly `n` points.
    pub fn generate(self, n: usize, seed: u64) -> Dataset {
        match self {
            Generator::Blobs => blobs(3, n / 3, 8.0, 120.0, seed),
            Generator::Moons => moons(n, 6.0, 200.0, seed),
            Generator::Rings => rings(n / 2, &[60.0, 180.0], 5.0, seed),
            Generator::Noisy => noisy(n, seed),
        }
    }
}

fn build(points: Vec<(Point2D, Label)>) -> Dataset {
    let (pts, labels): (Vec<_>, Vec<_>) = points.into_iter().unzip();
    Dataset::with_labels(pts, Labeling::new(labels))
        .expect("generators emit finite, non-empty data")
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("finite standard deviation")
}

/// `k` isotropic Gaussian blobs of `per` points each, centers spaced
/// `separation` apart along the x axis.
pub fn blobs(k: usize, per: usize, sd: f64, separation: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nd = normal(sd);
    let mut out = Vec::with_capacity(k * per);
    for c in 0..k.max(1) {
        let cx = c as f64 * separation;
        for _ in 0..per.max(1) {
            let p = Point2D::new(cx + nd.sample(&mut rng), nd.sample(&mut rng));
            out.push((p, Label::Cluster(c as u32)));
        }
    }
    build(out)
}

/// Two interleaved half circles of radius `scale` with Gaussian jitter.
pub fn moons(n: usize, sd: f64, scale: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nd = normal(sd);
    let mut out = Vec::with_capacity(n);
    for i in 0..n.max(2) {
        let upper = i % 2 == 0;
        let t = rng.random_range(0.0..PI);
        let (x, y) = if upper {
            (t.cos(), t.sin())
        } else {
            (1.0 - t.cos(), 0.5 - t.sin())
        };
        let p = Point2D::new(
            x * scale + nd.sample(&mut rng),
            y * scale + nd.sample(&mut rng),
        );
        out.push((p, Label::Cluster(u32::from(!upper))));
    }
    build(out)
}

/// Concentric rings around the origin, `per` points each.
pub fn rings(per: usize, radii: &[f64], sd: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nd = normal(sd);
    let mut out = Vec::with_capacity(per * radii.len());
    for (c, &r) in radii.iter().enumerate() {
        for _ in 0..per.max(1) {
            let t = rng.random_range(0.0..2.0 * PI);
            let rr = r + nd.sample(&mut rng);
            out.push((
                Point2D::new(rr * t.cos(), rr * t.sin()),
                Label::Cluster(c as u32),
            ));
        }
    }
    build(out)
}

/// Six non-convex clusters in a 700 × 500 box with 10% uniform noise:
/// an arc, a sine band, a ring around a disk, the disk, an L and a
/// crescent.
pub fn noisy(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shares = [0.15, 0.18, 0.17, 0.07, 0.18, 0.15];
    let mut out = Vec::with_capacity(n);
    for (c, share) in shares.iter().enumerate() {
        let m = (share * n as f64).round() as usize;
        for _ in 0..m {
            out.push((shape_point(c, &mut rng), Label::Cluster(c as u32)));
        }
    }
    let noise = n.saturating_sub(out.len()).max(1);
    let frame = Rect::from_bounds(0.0, 0.0, 700.0, 500.0);
    for _ in 0..noise {
        out.push((uniform_in(&frame, &mut rng), Label::Noise));
    }
    build(out)
}

fn uniform_in(r: &Rect, rng: &mut impl Rng) -> Point2D {
    Point2D::new(
        rng.random_range(r.min.x..=r.max.x),
        rng.random_range(r.min.y..=r.max.y),
    )
}

fn shape_point(shape: usize, rng: &mut impl Rng) -> Point2D {
    match shape {
        // upper half of a thick circle
        0 => {
            let t = rng.random_range(0.0..PI);
            let r = 90.0 + rng.random_range(-15.0..15.0);
            Point2D::new(150.0 + r * t.cos(), 370.0 + r * t.sin())
        }
        // sine band
        1 => {
            let x = rng.random_range(330.0..660.0);
            let y = 410.0
                + 35.0 * ((x - 330.0) / 330.0 * 2.0 * PI).sin()
                + rng.random_range(-15.0..15.0);
            Point2D::new(x, y)
        }
        // ring
        2 => {
            let t = rng.random_range(0.0..2.0 * PI);
            let r = 100.0 + rng.random_range(-10.0..10.0);
            Point2D::new(150.0 + r * t.cos(), 140.0 + r * t.sin())
        }
        // disk inside the ring
        3 => {
            let t = rng.random_range(0.0..2.0 * PI);
            let r = 30.0 * rng.random_range(0.0f64..1.0).sqrt();
            Point2D::new(150.0 + r * t.cos(), 140.0 + r * t.sin())
        }
        // L: vertical bar 40 × 220 and horizontal bar 90 × 40
        4 => {
            if rng.random_bool(220.0 / 310.0) {
                Point2D::new(
                    rng.random_range(330.0..370.0),
                    rng.random_range(40.0..260.0),
                )
            } else {
                Point2D::new(rng.random_range(370.0..460.0), rng.random_range(40.0..80.0))
            }
        }
        // crescent: a disk minus an offset disk
        _ => loop {
            let t = rng.random_range(0.0..2.0 * PI);
            let r = 75.0 * rng.random_range(0.0f64..1.0).sqrt();
            let p = Point2D::new(600.0 + r * t.cos(), 170.0 + r * t.sin());
            if p.dist(&Point2D::new(630.0, 195.0)) > 60.0 {
                break p;
            }
        },
    }
}

/// Append `fraction · len` points drawn uniformly from the bounding box,
/// labeled noise.
pub fn inject_noise(dataset: &Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=10.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "noise fraction {fraction} out of range"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = dataset.bounding_box();
    let m = (fraction * dataset.len() as f64).round() as usize;
    let extra: Vec<Point2D> = (0..m).map(|_| uniform_in(&frame, &mut rng)).collect();
    dataset.extended(&extra)
}
