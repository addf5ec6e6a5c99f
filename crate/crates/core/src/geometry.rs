//! Basic 3D types: symmetric matrices, ellipsoids, cones and their classification.

use nalgebra::{Matrix3, SymmetricEigen, Unit, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Rotation3 = nalgebra::Rotation3<f64>;

/// Symmetric 3x3 matrix stored as its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat3 {
    pub xx: f64,
    pub xy: f64,
    pub xz: f64,
    pub yy: f64,
    pub yz: f64,
    pub zz: f64,
}

impl SymMat3 {
    pub fn new(xx: f64, xy: f64, xz: f64, yy: f64, yz: f64, zz: f64) -> Self {
        Self {
            xx,
            xy,
            xz,
            yy,
            yz,
            zz,
        }
    }

    pub fn from_diagonal(d: [f64; 3]) -> Self {
        Self::new(d[0], 0.0, 0.0, d[1], 0.0, d[2])
    }

    pub fn identity() -> Self {
        Self::from_diagonal([1.0; 3])
    }

    /// Takes the symmetric part of `m`.
    pub fn from_matrix(m: &Mat3) -> Self {
        Self::new(
            m[(0, 0)],
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
            m[(1, 1)],
            0.5 * (m[(1, 2)] + m[(2, 1)]),
            m[(2, 2)],
        )
    }

    pub fn outer(v: &Vec3) -> Self {
        Self::new(
            v.x * v.x,
            v.x * v.y,
            v.x * v.z,
            v.y * v.y,
            v.y * v.z,
            v.z * v.z,
        )
    }

    pub fn to_matrix(&self) -> Mat3 {
        Mat3::new(
            self.xx, self.xy, self.xz, self.xy, self.yy, self.yz, self.xz, self.yz, self.zz,
        )
    }

    pub fn is_finite(&self) -> bool {
        [self.xx, self.xy, self.xz, self.yy, self.yz, self.zz]
            .iter()
            .all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn determinant(&self) -> f64 {
        self.xx * (self.yy * self.zz - self.yz * self.yz)
            - self.xy * (self.xy * self.zz - self.yz * self.xz)
            + self.xz * (self.xy * self.yz - self.yy * self.xz)
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = 1.0 / det;
        Some(Self::new(
            (self.yy * self.zz - self.yz * self.yz) * inv,
            (self.xz * self.yz - self.xy * self.zz) * inv,
            (self.xy * self.yz - self.xz * self.yy) * inv,
            (self.xx * self.zz - self.xz * self.xz) * inv,
            (self.xy * self.xz - self.xx * self.yz) * inv,
            (self.xx * self.yy - self.xy * self.xy) * inv,
        ))
    }

    pub fn norm(&self) -> f64 {
        (self.xx * self.xx
            + self.yy * self.yy
            + self.zz * self.zz
            + 2.0 * (self.xy * self.xy + self.xz * self.xz + self.yz * self.yz))
            .sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(
            self.xx * s,
            self.xy * s,
            self.xz * s,
            self.yy * s,
            self.yz * s,
            self.zz * s,
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.xx + o.xx,
            self.xy + o.xy,
            self.xz + o.xz,
            self.yy + o.yy,
            self.yz + o.yz,
            self.zz + o.zz,
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        self.to_matrix() * v
    }

    pub fn quad(&self, v: &Vec3) -> f64 {
        v.dot(&self.mul_vec(v))
    }

    /// `R M R^T`
    pub fn conjugate(&self, r: &Mat3) -> Self {
        Self::from_matrix(&(r * self.to_matrix() * r.transpose()))
    }

    /// Eigenvalues ascending with matching unit eigenvectors as columns.
    pub fn eigen(&self) -> ([f64; 3], Mat3) {
        let eig = SymmetricEigen::new(self.to_matrix());
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let vals = [
            eig.eigenvalues[idx[0]],
            eig.eigenvalues[idx[1]],
            eig.eigenvalues[idx[2]],
        ];
        let vecs = Mat3::from_columns(&[
            eig.eigenvectors.column(idx[0]).into_owned(),
            eig.eigenvectors.column(idx[1]).into_owned(),
            eig.eigenvectors.column(idx[2]).into_owned(),
        ]);
        (vals, vecs)
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_gap(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative eigenvalue gap below which two eigenvalues count as repeated.
    pub cluster: f64,
    /// Alignment residual accepted for a solution.
    pub residual: f64,
    /// Smallest/second-smallest gap ratio above which sigma identification fails.
    pub ambiguity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cluster: 1e-7,
            residual: 1e-8,
            ambiguity: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidModel {
    pub center: Vec3,
    /// Ellipsoid axes expressed in the parent frame (columns).
    pub rotation: Rotation3,
    pub radii: [f64; 3],
}

impl EllipsoidModel {
    pub fn new(center: Vec3, rotation: Rotation3, radii: [f64; 3]) -> Result<Self> {
        check_radii(&radii)?;
        Ok(Self {
            center,
            rotation,
            radii,
        })
    }

    pub fn matrix(&self) -> SymMat3 {
        diag_matrix(&self.radii).conjugate(self.rotation.matrix())
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        radii_eigenvalues(&self.radii)
    }
}

pub(crate) fn check_radii(radii: &[f64; 3]) -> Result<()> {
    for &r in radii {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::NonPositiveRadius(r));
        }
    }
    Ok(())
}

pub fn radii_eigenvalues(radii: &[f64; 3]) -> [f64; 3] {
    [
        1.0 / (radii[0] * radii[0]),
        1.0 / (radii[1] * radii[1]),
        1.0 / (radii[2] * radii[2]),
    ]
}

/// `diag(1/a^2, 1/b^2, 1/c^2)`
pub fn diag_matrix(radii: &[f64; 3]) -> SymMat3 {
    SymMat3::from_diagonal(radii_eigenvalues(radii))
}

/// `A = R diag(1/a^2, 1/b^2, 1/c^2) R^T`
pub fn ellipsoid_matrix(model: &EllipsoidModel) -> Result<SymMat3> {
    check_radii(&model.radii)?;
    Ok(model.matrix())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllipsoidClass {
    Triaxial,
    Spheroid {
        /// Axis whose eigenvalue has multiplicity one.
        single_axis: usize,
        /// `lambda_single < lambda_double`, i.e. a prolate spheroid.
        single_smaller: bool,
    },
    Sphere,
}

impl EllipsoidClass {
    pub fn name(&self) -> &'static str {
        match self {
            EllipsoidClass::Triaxial => "triaxial",
            EllipsoidClass::Spheroid { .. } => "spheroid",
            EllipsoidClass::Sphere => "sphere",
        }
    }
}

/// Classifies on the eigenvalues `1/r^2`.
pub fn classify_ellipsoid(radii: &[f64; 3], rel_tol: f64) -> EllipsoidClass {
    let l = radii_eigenvalues(radii);
    let close = [
        rel_gap(l[1], l[2]) < rel_tol,
        rel_gap(l[0], l[2]) < rel_tol,
        rel_gap(l[0], l[1]) < rel_tol,
    ];
    match close.iter().filter(|&&c| c).count() {
        0 => EllipsoidClass::Triaxial,
        1 => {
            // close[i] is the pair that excludes axis i
            let single_axis = close.iter().position(|&c| c).unwrap();
            let other = (single_axis + 1) % 3;
            EllipsoidClass::Spheroid {
                single_axis,
                single_smaller: l[single_axis] < l[other],
            }
        }
        _ => EllipsoidClass::Sphere,
    }
}

/// Elliptic cone with vertex and matrix. Eigenvalues are ordered as the
/// same-sign pair by descending magnitude, then the opposite-sign one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeQuadric {
    pub vertex: Vec3,
    pub matrix: SymMat3,
    pub eigenvalues: [f64; 3],
    pub eigenvectors: Rotation3,
}

impl ConeQuadric {
    pub fn new(vertex: Vec3, matrix: SymMat3) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::InvalidInput("non-finite cone matrix".into()));
        }
        let (vals, vecs) = matrix.eigen();
        let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let det = vals[0] * vals[1] * vals[2];
        if !(det.abs() > 1e-12 * scale * scale * scale) {
            return Err(Error::SingularCone(det));
        }
        let positives = vals.iter().filter(|v| **v > 0.0).count();
        // ascending order: for (+,+,-) the negative one is index 0,
        // for (-,-,+) the positive one is index 2
        let single = match positives {
            2 => 0usize,
            1 => 2usize,
            _ => return Err(Error::NotACone(vals)),
        };
        let mut same: Vec<usize> = (0..3).filter(|&i| i != single).collect();
        same.sort_by(|&i, &j| vals[j].abs().total_cmp(&vals[i].abs()));
        let order = [same[0], same[1], single];
        let eigenvalues = order.map(|i| vals[i]);
        let mut cols = order.map(|i| vecs.column(i).into_owned());
        if cols[0].cross(&cols[1]).dot(&cols[2]) < 0.0 {
            cols[2] = -cols[2];
        }
        let eigenvectors = Rotation3::from_matrix_unchecked(Mat3::from_columns(&cols));
        Ok(Self {
            vertex,
            matrix,
            eigenvalues,
            eigenvectors,
        })
    }

    /// `det`, `tr`, `tr(inverse)` from the eigenvalues.
    pub fn invariants(&self) -> ConeInvariants {
        ConeInvariants::from_eigenvalues(self.eigenvalues)
    }

    /// Revolution axis (eigenvector of the opposite-sign eigenvalue).
    pub fn axis(&self) -> Vec3 {
        self.eigenvectors.matrix().column(2).into_owned()
    }

    pub fn class(&self, rel_tol: f64) -> ConeClass {
        if rel_gap(self.eigenvalues[0], self.eigenvalues[1]) < rel_tol {
            ConeClass::Circular { single_index: 2 }
        } else {
            ConeClass::NonCircularElliptic
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeInvariants {
    pub eigenvalues: [f64; 3],
    pub det: f64,
    pub trace: f64,
    pub trace_inv: f64,
}

impl ConeInvariants {
    pub fn from_eigenvalues(l: [f64; 3]) -> Self {
        Self {
            eigenvalues: l,
            det: l[0] * l[1] * l[2],
            trace: l[0] + l[1] + l[2],
            trace_inv: 1.0 / l[0] + 1.0 / l[1] + 1.0 / l[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeClass {
    NonCircularElliptic,
    /// `single_index` refers to the cone's eigenvalue ordering.
    Circular {
        single_index: usize,
    },
}

impl ConeClass {
    pub fn name(&self) -> &'static str {
        match self {
            ConeClass::NonCircularElliptic => "non-circular",
            ConeClass::Circular { .. } => "circular",
        }
    }
}

pub fn classify_cone(matrix: &SymMat3, rel_tol: f64) -> Result<ConeClass> {
    Ok(ConeQuadric::new(Vec3::zeros(), *matrix)?.class(rel_tol))
}

/// `Rz(yaw) Ry(pitch) Rx(roll)`, radians.
pub fn rotation_from_euler_zyx(yaw: f64, pitch: f64, roll: f64) -> Rotation3 {
    Rotation3::from_axis_angle(&Vec3::z_axis(), yaw)
        * Rotation3::from_axis_angle(&Vec3::y_axis(), pitch)
        * Rotation3::from_axis_angle(&Vec3::x_axis(), roll)
}

pub fn axis_rotation(axis: &Vec3, angle: f64) -> Rotation3 {
    Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle)
}

/// Geodesic angle between two rotations.
pub fn rotation_angle_between(a: &Rotation3, b: &Rotation3) -> f64 {
    // |A - B|_F = 2 sqrt(2) sin(theta / 2), accurate near zero unlike acos of the trace
    let d = (a.matrix() - b.matrix()).norm();
    2.0 * (d / (2.0 * std::f64::consts::SQRT_2)).min(1.0).asin()
}

/// Orthonormalizes a nearly orthonormal matrix (polar projection).
pub fn orthonormalize(m: &Mat3) -> Rotation3 {
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        let mut u = u;
        let mut c = u.column_mut(2);
        c.neg_mut();
        r = u * vt;
    }
    Rotation3::from_matrix_unchecked(r)
}

/// Two unit vectors completing `n` into a right-handed basis `(u, v, n)`.
pub fn complete_basis(n: &Vec3) -> (Vec3, Vec3) {
    let n = n.normalize();
    let helper = if n.x.abs() < 0.6 {
        Vec3::x()
    } else if n.y.abs() < 0.6 {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let u = (helper - n * n.dot(&helper)).normalize();
    let v = n.cross(&u);
    (u, v)
}

/// Row-major 3x3 or quaternion `w, x, y, z`.
pub fn rotation_from_slice(v: &[f64]) -> Result<Rotation3> {
    match v.len() {
        9 => {
            let m = Mat3::from_row_slice(v);
            let err = (m.transpose() * m - Mat3::identity()).norm();
            if !(err < 1e-9) || !(m.determinant() > 0.0) {
                return Err(Error::InvalidInput(
                    "rotation matrix is not orthonormal with det +1".into(),
                ));
            }
            Ok(orthonormalize(&m))
        }
        4 => {
            let q = nalgebra::Quaternion::new(v[0], v[1], v[2], v[3]);
            let n = q.norm();
            if !((n - 1.0).abs() < 1e-6) {
                return Err(Error::InvalidInput("quaternion is not unit length".into()));
            }
            Ok(UnitQuaternion::from_quaternion(q).to_rotation_matrix())
        }
        n => Err(Error::InvalidInput(format!(
            "rotation needs 9 or 4 numbers, got {n}"
        ))),
    }
}

/// `[w, x, y, z]` with `w >= 0`.
pub fn rotation_to_quaternion(r: &Rotation3) -> [f64; 4] {
    let q = UnitQuaternion::from_rotation_matrix(r);
    let q = q.quaternion();
    let s = if q.w < 0.0 { -1.0 } else { 1.0 };
    [s * q.w, s * q.i, s * q.j, s * q.k]
}
