//! Node placement in the unit square `[-1/2, 1/2]^2`.
//!
//! Points are drawn i.i.d. from a bounded density. The generator is
//! ChaCha8 seeded through `SeedableRng::seed_from_u64`, so a seed fully
//! determines an instance; Monte Carlo trial `i` of a batch uses seed
//! `base_seed + i` and can be replayed in isolation.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{self, ModelParams};

/// Half side of the unit square.
pub const HALF: f64 = 0.5;

/// Tolerance on the total mass of a step density.
const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn in_unit_square(&self) -> bool {
        (-HALF..=HALF).contains(&self.x) && (-HALF..=HALF).contains(&self.y)
    }
}

/// Axis-aligned rectangle of constant density weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub weight: f64,
}

impl Patch {
    fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn contains(&self, p: &Point) -> bool {
        (self.x0..=self.x1).contains(&p.x) && (self.y0..=self.y1).contains(&p.y)
    }

    fn overlaps(&self, o: &Patch) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }
}

/// Node density on the unit square.
///
/// Step densities are lists of non-overlapping patches that tile the square
/// and integrate to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Density {
    Uniform,
    Step { patches: Vec<Patch> },
}

impl Density {
    /// Left half at weight `left`, right half at weight `right`.
    pub fn halves(left: f64, right: f64) -> Result<Self> {
        let d = Density::Step {
            patches: vec![
                Patch { x0: -HALF, x1: 0.0, y0: -HALF, y1: HALF, weight: left },
                Patch { x0: 0.0, x1: HALF, y0: -HALF, y1: HALF, weight: right },
            ],
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let patches = match self {
            Density::Uniform => return Ok(()),
            Density::Step { patches } => patches,
        };
        if patches.is_empty() {
            return Err(Error::InvalidDensity("step density has no patches".into()));
        }
        for (i, p) in patches.iter().enumerate() {
            let coords = [p.x0, p.x1, p.y0, p.y1];
            if coords.iter().any(|c| !c.is_finite() || c.abs() > HALF) {
                return Err(Error::InvalidDensity(format!("patch {i} leaves the unit square")));
            }
            if !(p.x0 < p.x1 && p.y0 < p.y1) {
                return Err(Error::InvalidDensity(format!("patch {i} is degenerate")));
            }
            if !(p.weight.is_finite() && p.weight > 0.0) {
                return Err(Error::InvalidDensity(format!("patch {i} has non-positive weight")));
            }
            if let Some(j) = patches[..i].iter().position(|q| q.overlaps(p)) {
                return Err(Error::InvalidDensity(format!("patches {j} and {i} overlap")));
            }
        }
        // Disjoint patches inside S whose areas sum to 1 cover S up to a null set.
        let area: f64 = patches.iter().map(Patch::area).sum();
        if (area - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDensity(format!("patches cover area {area}, not the whole square")));
        }
        let mass: f64 = patches.iter().map(|p| p.weight * p.area()).sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDensity(format!("density integrates to {mass}, not 1")));
        }
        Ok(())
    }

    /// Density value at `p`; the first containing patch wins on shared edges.
    pub fn value(&self, p: &Point) -> f64 {
        match self {
            Density::Uniform => 1.0,
            Density::Step { patches } => {
                patches.iter().find(|q| q.contains(p)).map_or(0.0, |q| q.weight)
            }
        }
    }
}

/// Exact pointwise minimum and maximum of a density.
pub fn density_bounds(d: &Density) -> (f64, f64) {
    match d {
        Density::Uniform => (1.0, 1.0),
        Density::Step { patches } => patches.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.weight), hi.max(p.weight))
        }),
    }
}

/// A sampled (or imported) point set together with its radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub points: Vec<Point>,
    pub r_n: f64,
    pub seed: u64,
}

impl Instance {
    /// Wraps an externally supplied point set. `p.n` must equal `points.len()`.
    pub fn from_points(p: &ModelParams, points: Vec<Point>, seed: u64) -> Result<Self> {
        if points.len() != p.n {
            return Err(Error::InvalidInput(format!(
                "point set has {} points but n = {}",
                points.len(),
                p.n
            )));
        }
        if let Some(i) = points.iter().position(|q| !q.in_unit_square()) {
            return Err(Error::InvalidInput(format!("point {i} lies outside the unit square")));
        }
        Ok(Self { n: p.n, points, r_n: params::radius(p)?, seed })
    }
}

fn uniform_point<R: Rng>(rng: &mut R) -> Point {
    Point::new(rng.gen::<f64>() - HALF, rng.gen::<f64>() - HALF)
}

/// Draws `p.n` i.i.d. points from `d`.
///
/// Step densities use rejection against the uniform proposal with acceptance
/// probability `f(x) / max f`.
pub fn sample_nodes(p: &ModelParams, d: &Density, seed: u64) -> Result<Instance> {
    p.validate()?;
    d.validate()?;
    let (lo, hi) = density_bounds(d);
    if lo < p.eps1 || hi > p.eps2 {
        return Err(Error::InvalidDensity(format!(
            "density range [{lo}, {hi}] is not within [eps1, eps2] = [{}, {}]",
            p.eps1, p.eps2
        )));
    }
    let r_n = params::radius(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = match d {
        Density::Uniform => (0..p.n).map(|_| uniform_point(&mut rng)).collect(),
        Density::Step { .. } => (0..p.n)
            .map(|_| loop {
                let q = uniform_point(&mut rng);
                if rng.gen::<f64>() * hi < d.value(&q) {
                    break q;
                }
            })
            .collect(),
    };
    Ok(Instance { n: p.n, points, r_n, seed })
}

/// Formats a real with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes points as CSV with header `x,y`.
pub fn write_points_csv<W: Write>(points: &[Point], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "y"])?;
    for p in points {
        wr.write_record([fmt_real(p.x), fmt_real(p.y)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_points_csv<R: Read>(r: R) -> Result<Vec<Point>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(Error::InvalidInput("points CSV must have header `x,y`".into()));
    }
    let mut out = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("row {}: {e}", row + 1)))
        };
        let p = Point::new(parse(&rec[0])?, parse(&rec[1])?);
        if !p.in_unit_square() {
            return Err(Error::InvalidInput(format!("row {}: point outside the unit square", row + 1)));
        }
        out.push(p);
    }
    Ok(out)
}

pub fn load_points(path: &Path) -> Result<Vec<Point>> {
    read_points_csv(std::fs::File::open(path)?)
}
