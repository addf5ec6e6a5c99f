//! Camera position shared by several loci, one per observed object.

use crate::error::{Error, Result};
use crate::geometry::{EllipsoidModel, Rotation3, Vec3};
use crate::solver::SolutionLocus;

/// A locus together with the world placement of its ellipsoid.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedLocus {
    pub locus: SolutionLocus,
    pub center: Vec3,
    pub rotation: Rotation3,
}

impl PlacedLocus {
    pub fn new(locus: SolutionLocus, model: &EllipsoidModel) -> Self {
        Self {
            locus,
            center: model.center,
            rotation: model.rotation,
        }
    }

    pub fn to_world(&self, e_ell: &Vec3) -> Vec3 {
        self.center + self.rotation * e_ell
    }

    fn to_local(&self, x: &Vec3) -> Vec3 {
        self.rotation.inverse() * (x - self.center)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Intersection {
    pub estimate: Vec3,
    /// Largest distance from the estimate to any locus.
    pub spread: f64,
    pub distances: Vec<f64>,
    /// Several well separated points fit all loci equally well.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    point: Vec3,
    branch: usize,
    param: f64,
}

/// Camera centers of one locus, sorted by `x` for nearest-neighbour queries.
struct CurveSamples {
    samples: Vec<Sample>,
    /// Parameter spacing, used to bracket local refinement.
    step: f64,
}

impl CurveSamples {
    fn build(pl: &PlacedLocus, n: usize) -> Result<Self> {
        let mut samples = Vec::new();
        let step;
        match &pl.locus {
            SolutionLocus::Triaxial(l) => {
                if l.feasible.intervals.is_empty() {
                    return Err(Error::EmptyLocus);
                }
                let len = l.feasible.total_length();
                step = len / n as f64;
                for k in 0..n {
                    let m = l
                        .feasible
                        .at_arc((k as f64 + 0.5) * step)
                        .ok_or(Error::EmptyLocus)?;
                    for (branch, p) in l.positions_at(m)?.iter().enumerate() {
                        samples.push(Sample {
                            point: pl.to_world(p),
                            branch,
                            param: m,
                        });
                    }
                }
            }
            SolutionLocus::SpheroidNonCircular(l) => {
                step = std::f64::consts::TAU / n as f64;
                for branch in 0..4 {
                    for k in 0..n {
                        let t = k as f64 * step;
                        samples.push(Sample {
                            point: pl.to_world(&l.position(branch, t)),
                            branch,
                            param: t,
                        });
                    }
                }
            }
            SolutionLocus::SpheroidCircular(l) => {
                step = 0.0;
                for (branch, p) in l.positions().iter().enumerate() {
                    samples.push(Sample {
                        point: pl.to_world(p),
                        branch,
                        param: 0.0,
                    });
                }
            }
            SolutionLocus::Sphere(l) => {
                step = 0.0;
                for i in 0..n {
                    let p = l.sample(i, n).camera_position_in_ellipsoid_frame;
                    samples.push(Sample {
                        point: pl.to_world(&p),
                        branch: 0,
                        param: i as f64,
                    });
                }
            }
        }
        samples.sort_by(|a, b| a.point.x.total_cmp(&b.point.x));
        Ok(Self { samples, step })
    }

    fn nearest(&self, q: &Vec3) -> (usize, f64) {
        let s = &self.samples;
        let start = s.partition_point(|p| p.point.x < q.x);
        let mut best = (usize::MAX, f64::INFINITY);
        let mut check = |i: usize| -> bool {
            let dx = (s[i].point.x - q.x).abs();
            if dx > best.1 {
                return false;
            }
            let d = (s[i].point - q).norm();
            if d < best.1 {
                best = (i, d);
            }
            true
        };
        for i in start..s.len() {
            if !check(i) {
                break;
            }
        }
        for i in (0..start).rev() {
            if !check(i) {
                break;
            }
        }
        best
    }
}

/// Minimizer of `f` on `[a, b]` by golden-section search.
fn golden_section(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Closest point of the locus to `x`, refining from the nearest sample.
fn project(pl: &PlacedLocus, curve: &CurveSamples, x: &Vec3) -> Vec3 {
    let (idx, _) = curve.nearest(x);
    let s = curve.samples[idx];
    match &pl.locus {
        SolutionLocus::Triaxial(l) => {
            let Some(&(lo, hi)) = l
                .feasible
                .intervals
                .iter()
                .find(|&&(lo, hi)| s.param >= lo && s.param <= hi)
            else {
                return s.point;
            };
            let a = (s.param - 2.0 * curve.step).max(lo);
            let b = (s.param + 2.0 * curve.step).min(hi);
            let pos = |m: f64| {
                l.positions_at(m)
                    .map(|p| pl.to_world(&p[s.branch]))
                    .unwrap_or(s.point)
            };
            let m = golden_section(a, b, |m| (pos(m) - x).norm_squared());
            pos(m)
        }
        SolutionLocus::SpheroidNonCircular(l) => {
            let pos = |t: f64| pl.to_world(&l.position(s.branch, t));
            let t = golden_section(
                s.param - 2.0 * curve.step,
                s.param + 2.0 * curve.step,
                |t| (pos(t) - x).norm_squared(),
            );
            pos(t)
        }
        SolutionLocus::SpheroidCircular(_) => s.point,
        SolutionLocus::Sphere(l) => {
            let local = pl.to_local(x);
            let n = local.norm();
            if n == 0.0 {
                return s.point;
            }
            pl.to_world(&(local * (l.dist / n)))
        }
    }
}

struct Fit {
    estimate: Vec3,
    distances: Vec<f64>,
}

/// Alternating projections: move to the mean of the closest locus points.
fn refine(loci: &[PlacedLocus], curves: &[CurveSamples], start: Vec3) -> Fit {
    let mut x = start;
    for _ in 0..300 {
        let mean = loci
            .iter()
            .zip(curves)
            .map(|(pl, c)| project(pl, c, &x))
            .sum::<Vec3>()
            / loci.len() as f64;
        let moved = (mean - x).norm();
        x = mean;
        if moved <= 1e-14 * (1.0 + x.norm()) {
            break;
        }
    }
    let distances = loci
        .iter()
        .zip(curves)
        .map(|(pl, c)| (project(pl, c, &x) - x).norm())
        .collect();
    Fit {
        estimate: x,
        distances,
    }
}

/// Point closest to all loci. Candidates are the samples of the first locus
/// with the smallest summed nearest-sample distance to the others; the best
/// few are refined.
pub fn intersect_loci(
    loci: &[PlacedLocus],
    samples_per_locus: usize,
    tol: f64,
) -> Result<Intersection> {
    if loci.len() < 2 {
        return Err(Error::InvalidInput("at least two loci are required".into()));
    }
    if samples_per_locus == 0 {
        return Err(Error::InvalidInput(
            "sample count must be at least 1".into(),
        ));
    }
    let curves = loci
        .iter()
        .map(|pl| CurveSamples::build(pl, samples_per_locus))
        .collect::<Result<Vec<_>>>()?;
    let mut scored: Vec<(f64, Vec3)> = curves[0]
        .samples
        .iter()
        .map(|s| {
            let cost = curves[1..]
                .iter()
                .map(|c| c.nearest(&s.point).1)
                .sum::<f64>();
            (cost, s.point)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let extent = scored
        .iter()
        .map(|(_, p)| (p - scored[0].1).norm())
        .fold(0.0f64, f64::max);
    let separation = 1e-2 * extent.max(1e-12);
    let mut starts: Vec<Vec3> = Vec::new();
    for (_, p) in &scored {
        if starts.len() == 8 {
            break;
        }
        if starts.iter().all(|q| (q - p).norm() > separation) {
            starts.push(*p);
        }
    }
    let fits: Vec<Fit> = starts
        .into_iter()
        .map(|s| refine(loci, &curves, s))
        .collect();
    let spread_of = |f: &Fit| f.distances.iter().copied().fold(0.0f64, f64::max);
    let best = fits
        .iter()
        .min_by(|a, b| spread_of(a).total_cmp(&spread_of(b)))
        .expect("at least one candidate");
    let spread = spread_of(best);
    if !(spread <= tol) {
        return Err(Error::NoIntersection(spread));
    }
    let degenerate = fits
        .iter()
        .filter(|f| spread_of(f) <= tol)
        .any(|f| (f.estimate - best.estimate).norm() > 100.0 * tol);
    Ok(Intersection {
        estimate: best.estimate,
        spread,
        distances: best.distances.clone(),
        degenerate,
    })
}
