//! Generalized eigenstructure of the pair `{A, B'}` and the scalars `sigma`, `mu`.

use nalgebra::{Cholesky, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::{rel_gap, Mat3, SymMat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenEigenPair {
    pub value: f64,
    /// Normalized so that `v^T A v = 1`.
    pub vector: Vec3,
}

/// Solves `A v = lambda B' v` with `A` positive definite.
///
/// With `A = L L^T` this is the symmetric problem `L^-1 B' L^-T w = w / lambda`,
/// `v = L^-T w`, so eigenvectors come out A-orthonormal.
pub fn generalized_eigen(a: &SymMat3, bp: &SymMat3) -> Result<[GenEigenPair; 3]> {
    let det = bp.determinant();
    let scale = bp.norm();
    if !(det.abs() > 1e-14 * scale * scale * scale) {
        return Err(Error::SingularCone(det));
    }
    let chol = Cholesky::new(a.to_matrix())
        .ok_or_else(|| Error::InvalidInput("ellipsoid matrix is not positive definite".into()))?;
    let l = chol.l();
    let li = l
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("ellipsoid matrix is singular".into()))?;
    let c = li * bp.to_matrix() * li.transpose();
    let eig = SymmetricEigen::new(0.5 * (c + c.transpose()));
    let lit = li.transpose();
    let mut out = [0usize, 1, 2].map(|i| GenEigenPair {
        value: 1.0 / eig.eigenvalues[i],
        vector: lit * eig.eigenvectors.column(i),
    });
    out.sort_by(|p, q| p.value.total_cmp(&q.value));
    Ok(out)
}

/// The multiplicity-1 eigenvalue `sigma1`, the clustered `sigma2`, and the
/// unit eigenvector for `sigma1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GevpResult {
    pub sigma1: f64,
    pub sigma2: f64,
    pub delta1: Vec3,
    /// Relative spread of the clustered pair.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaMu {
    pub sigma: f64,
    pub mu: f64,
}

/// Picks the closest pair as the double eigenvalue. Fails when the smallest
/// pairwise distance is not below `ambiguity` times the second smallest.
pub fn identify_sigma(pairs: &[GenEigenPair; 3], ambiguity: f64) -> Result<GevpResult> {
    let v = pairs.map(|p| p.value);
    // (i, j, k): pair (i, j), remaining k
    let combos = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    let mut dists: Vec<(f64, usize)> = combos
        .iter()
        .enumerate()
        .map(|(n, &(i, j, _))| ((v[i] - v[j]).abs(), n))
        .collect();
    dists.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ratio = if dists[1].0 == 0.0 {
        1.0
    } else {
        dists[0].0 / dists[1].0
    };
    if !(ratio < ambiguity) {
        return Err(Error::AmbiguousClustering(ratio));
    }
    let (i, j, k) = combos[dists[0].1];
    Ok(GevpResult {
        sigma1: v[k],
        sigma2: 0.5 * (v[i] + v[j]),
        delta1: pairs[k].vector.normalize(),
        gap: rel_gap(v[i], v[j]),
    })
}

/// `sigma = sigma1`, `mu = sigma1 / sigma2`.
pub fn mu_from_ratio(g: &GevpResult) -> SigmaMu {
    SigmaMu {
        sigma: g.sigma1,
        mu: g.sigma1 / g.sigma2,
    }
}

/// `mu = -sqrt(det(B') / det(A) * sigma^3)`
pub fn mu_from_sigma(sigma: f64, det_a: f64, det_bp: f64) -> Result<f64> {
    let r = det_bp / det_a * sigma * sigma * sigma;
    if !(r >= 0.0) {
        return Err(Error::NegativeRadicand(r));
    }
    Ok(-r.sqrt())
}

/// `sigma = det(A) / det(B') * (tr(A^-1) - |d|^2)^2 / tr(B'^-1)^2`
pub fn sigma_from_distance(
    norm_delta_sq: f64,
    tr_a_inv: f64,
    det_a: f64,
    tr_bp_inv: f64,
    det_bp: f64,
) -> Result<f64> {
    if tr_bp_inv == 0.0 || !tr_bp_inv.is_finite() {
        return Err(Error::ZeroTraceInverse);
    }
    let t = tr_a_inv - norm_delta_sq;
    Ok(det_a / det_bp * t * t / (tr_bp_inv * tr_bp_inv))
}

/// `|mu X^2 - (mu + 1) sigma X + sigma^2 I|_F / sigma^2` with `X = B'^-1 A`.
pub fn annihilator_residual(a: &SymMat3, bp: &SymMat3, sigma: f64, mu: f64) -> f64 {
    let bi = match bp.inverse() {
        Some(b) => b.to_matrix(),
        None => return f64::INFINITY,
    };
    let x = bi * a.to_matrix();
    let q = x * x * mu - x * ((mu + 1.0) * sigma) + Mat3::identity() * (sigma * sigma);
    q.norm() / (sigma * sigma)
}
