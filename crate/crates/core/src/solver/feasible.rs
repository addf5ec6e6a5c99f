//! Feasible values of `m = mu^(1/3)` for the triaxial ellipsoid.
//!
//! With `d = (det A / det B')^(1/3)`, `sigma = d m^2` and `mu = m^3`, the
//! squared components of `delta` in the ellipsoid frame solve the Vandermonde
//! system `M_A x = V(m)`,
//!
//! ```text
//! V(m) = [ tr(A^-1) - tr(B'^-1) m / d,  1 - m^3,  tr(B') d m^2 - tr(A) m^3 ]
//! ```
//!
//! so each component is a cubic in `m` and `m` is feasible iff all three are
//! non-negative.

use nalgebra::Matrix3;

use crate::cubic::{verified_roots, Poly3};
use crate::error::{Error, Result};
use crate::geometry::{rel_gap, ConeInvariants};

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleM {
    /// Closed intervals in `m < 0`, ascending and disjoint.
    pub intervals: Vec<(f64, f64)>,
    pub components: [Poly3; 3],
    pub d: f64,
    /// 2-norm condition number of the Vandermonde matrix.
    pub conditioning: f64,
}

impl FeasibleM {
    pub fn components_at(&self, m: f64) -> [f64; 3] {
        self.components.map(|p| p.eval(m))
    }

    pub fn contains(&self, m: f64, tol: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(lo, hi)| m >= lo - tol && m <= hi + tol)
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    /// Nearest point of the feasible set.
    pub fn clamp(&self, m: f64) -> Option<f64> {
        self.intervals
            .iter()
            .map(|&(lo, hi)| m.clamp(lo, hi))
            .min_by(|a, b| (a - m).abs().total_cmp(&(b - m).abs()))
    }

    /// Maps `s` in `[0, total_length]` to a feasible `m`, walking the
    /// intervals in order.
    pub fn at_arc(&self, s: f64) -> Option<f64> {
        let mut rest = s;
        for &(lo, hi) in &self.intervals {
            let len = hi - lo;
            if rest <= len {
                return Some(lo + rest);
            }
            rest -= len;
        }
        self.intervals.last().map(|&(_, hi)| hi)
    }
}

/// Components of `M^-1 w` for the Vandermonde matrix of `x`, each row of
/// `w` a cubic in `m`.
fn vandermonde_solve(x: [f64; 3], w: [Poly3; 3]) -> [Poly3; 3] {
    [0usize, 1, 2].map(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let den = (x[i] - x[j]) * (x[i] - x[k]);
        w[0].scale(x[j] * x[k] / den)
            .add(&w[1].scale(-(x[j] + x[k]) / den))
            .add(&w[2].scale(1.0 / den))
    })
}

fn vandermonde_condition(x: [f64; 3]) -> f64 {
    let m = Matrix3::new(
        1.0,
        1.0,
        1.0,
        x[0],
        x[1],
        x[2],
        x[0] * x[0],
        x[1] * x[1],
        x[2] * x[2],
    );
    let sv = m.singular_values();
    let (mx, mn) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    mx / mn
}

fn check_distinct(x: [f64; 3], tol: f64) -> Result<()> {
    if rel_gap(x[0], x[1]) < tol || rel_gap(x[0], x[2]) < tol || rel_gap(x[1], x[2]) < tol {
        return Err(Error::DegenerateVandermonde);
    }
    Ok(())
}

/// `d = (det A / det B')^(1/3)`
pub fn cube_root_ratio(lambda_a: [f64; 3], cone: &ConeInvariants) -> f64 {
    (lambda_a[0] * lambda_a[1] * lambda_a[2] / cone.det).cbrt()
}

/// Feasible set of `m` from the ellipsoid-frame system. `lambda_a` is in the
/// ellipsoid's own axis order, so component `i` is the squared `i`-th
/// coordinate of the camera center in the ellipsoid frame.
pub fn triaxial_feasible_m(
    lambda_a: [f64; 3],
    cone: &ConeInvariants,
    cluster_tol: f64,
) -> Result<FeasibleM> {
    check_distinct(lambda_a, cluster_tol)?;
    let d = cube_root_ratio(lambda_a, cone);
    let tr_a: f64 = lambda_a.iter().sum();
    let tr_a_inv: f64 = lambda_a.iter().map(|l| 1.0 / l).sum();
    let v = [
        Poly3::new([tr_a_inv, -cone.trace_inv / d, 0.0, 0.0]),
        Poly3::new([1.0, 0.0, 0.0, -1.0]),
        Poly3::new([0.0, 0.0, cone.trace * d, -tr_a]),
    ];
    let components = vandermonde_solve(lambda_a, v);
    let intervals = feasible_intervals(&components)?;
    Ok(FeasibleM {
        intervals,
        components,
        d,
        conditioning: vandermonde_condition(lambda_a),
    })
}

/// Same feasible set from the cone-frame system `M_B' x = V'(m)`. The
/// components returned are `d^2 m^2` times the squared coordinates of
/// `delta` in the cone's eigenbasis, which keeps them cubic.
pub fn cone_frame_feasible_m(
    lambda_a: [f64; 3],
    cone: &ConeInvariants,
    cluster_tol: f64,
) -> Result<FeasibleM> {
    check_distinct(cone.eigenvalues, cluster_tol)?;
    let d = cube_root_ratio(lambda_a, cone);
    let components = cone_frame_components(lambda_a, cone, d);
    let intervals = feasible_intervals(&components)?;
    Ok(FeasibleM {
        intervals,
        components,
        d,
        conditioning: vandermonde_condition(cone.eigenvalues),
    })
}

/// `M_B'^-1 diag(1, 1/(d m^2), 1/(d^2 m^4)) V(m)`, scaled by `d^2 m^2`.
pub fn cone_frame_components(lambda_a: [f64; 3], cone: &ConeInvariants, d: f64) -> [Poly3; 3] {
    let tr_a: f64 = lambda_a.iter().sum();
    let tr_a_inv: f64 = lambda_a.iter().map(|l| 1.0 / l).sum();
    let w = [
        Poly3::new([0.0, 0.0, d * d * tr_a_inv, -d * cone.trace_inv]),
        Poly3::new([d, 0.0, 0.0, -d]),
        Poly3::new([d * cone.trace, -tr_a, 0.0, 0.0]),
    ];
    vandermonde_solve(cone.eigenvalues, w)
}

/// Cells of `m < 0` between consecutive component roots on which every
/// component is non-negative, merged; isolated touching points are kept as
/// zero-length intervals.
pub fn feasible_intervals(components: &[Poly3; 3]) -> Result<Vec<(f64, f64)>> {
    let mut breaks: Vec<f64> = components
        .iter()
        .flat_map(verified_roots)
        .filter(|&r| r < 0.0)
        .collect();
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    let ok = |m: f64| components.iter().all(|p| p.eval(m) >= 0.0);

    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let push = |intervals: &mut Vec<(f64, f64)>, lo: f64, hi: f64| {
        if let Some(last) = intervals.last_mut() {
            if last.1 == lo {
                last.1 = hi;
                return;
            }
        }
        intervals.push((lo, hi));
    };
    let Some(&first) = breaks.first() else {
        return if ok(-1.0) {
            Err(Error::UnboundedLocus)
        } else {
            Ok(Vec::new())
        };
    };
    if ok(first - first.abs().max(1.0)) {
        return Err(Error::UnboundedLocus);
    }
    for w in breaks.windows(2) {
        if ok(0.5 * (w[0] + w[1])) {
            push(&mut intervals, w[0], w[1]);
        }
    }
    let last = *breaks.last().unwrap();
    if ok(0.5 * last) {
        push(&mut intervals, last, 0.0);
    }
    for &b in &breaks {
        if intervals.iter().any(|&(lo, hi)| b >= lo && b <= hi) {
            continue;
        }
        let touching = components
            .iter()
            .all(|p| p.eval(b) >= -1e-12 * p.magnitude(b));
        if touching {
            intervals.push((b, b));
        }
    }
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(intervals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_vandermonde() {
        let cone = ConeInvariants::from_eigenvalues([2.0, 1.0, -1.0]);
        let r = triaxial_feasible_m([0.25, 0.25, 1.0], &cone, 1e-7);
        assert_eq!(r, Err(Error::DegenerateVandermonde));
    }

    #[test]
    fn vandermonde_inverse_matches_dense() {
        let x = [0.3, 1.1, 2.5];
        let w = [
            Poly3::new([1.0, 0.0, 0.0, 0.0]),
            Poly3::new([2.0, 0.0, 0.0, 0.0]),
            Poly3::new([-1.0, 0.0, 0.0, 0.0]),
        ];
        let sol = vandermonde_solve(x, w).map(|p| p.c[0]);
        let m = Matrix3::new(
            1.0,
            1.0,
            1.0,
            x[0],
            x[1],
            x[2],
            x[0] * x[0],
            x[1] * x[1],
            x[2] * x[2],
        );
        let dense = m
            .lu()
            .solve(&nalgebra::Vector3::new(1.0, 2.0, -1.0))
            .unwrap();
        for i in 0..3 {
            assert!((sol[i] - dense[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn intervals_from_signs() {
        // (m + 3)(m + 1)(m - 5) >= 0 on [-3, -1] for m < 0
        let p = Poly3::new([-15.0, -17.0, -1.0, 1.0]);
        let one = Poly3::new([1.0, 0.0, 0.0, 0.0]);
        let iv = feasible_intervals(&[p, one, one]).unwrap();
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 + 3.0).abs() < 1e-12 && (iv[0].1 + 1.0).abs() < 1e-12);
        // -1 - m^3 stays positive for all m < -1
        let q = Poly3::new([-1.0, 0.0, 0.0, -1.0]);
        assert_eq!(
            feasible_intervals(&[q, one, one]),
            Err(Error::UnboundedLocus)
        );
    }

    #[test]
    fn touching_point_kept() {
        // -(m + 2)^2 touches zero at -2 only
        let p = Poly3::new([-4.0, -4.0, -1.0, 0.0]);
        let one = Poly3::new([1.0, 0.0, 0.0, 0.0]);
        let iv = feasible_intervals(&[p, one, one]).unwrap();
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 + 2.0).abs() < 1e-7 && iv[0].0 == iv[0].1);
    }
}
