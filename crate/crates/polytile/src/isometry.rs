//! Ambient isometries as 4x4 matrices on the representation space.
//!
//! Spherical isometries are orthogonal matrices on pre-stereographic
//! coordinates (D2), hyperbolic ones Lorentz matrices preserving
//! diag(-1,1,1,1) on the hyperboloid (D1), and Euclidean ones affine
//! matrices acting on `(1, x)`. Composition is matrix product with
//! renormalization once the form residual drifts past 1e-12.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::spaceform::{
    incidence, lift, mink, project, rotation_matrix3, Chart, GeodesicPlane, ModelPoint, SpaceForm,
};

/// Residual threshold beyond which a matrix is re-orthogonalized.
pub const RENORM_TOL: f64 = 1e-12;
/// Fingerprint grid pitch (design decision D4).
pub const FINGERPRINT_PITCH: f64 = 1e-7;

/// Generator word: indices into the generator list that produced an element,
/// leftmost applied first.
pub type Word = Vec<u16>;

#[derive(Clone, Debug)]
pub struct Isometry {
    pub space: SpaceForm,
    m: Matrix4<f64>,
    pub word: Word,
}

impl Isometry {
    pub fn identity(space: SpaceForm) -> Self {
        Isometry { space, m: Matrix4::identity(), word: Vec::new() }
    }

    pub(crate) fn from_matrix(space: SpaceForm, m: Matrix4<f64>) -> Self {
        let mut iso = Isometry { space, m, word: Vec::new() };
        if iso.residual() > RENORM_TOL {
            iso.renormalize();
        }
        iso
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    /// Reflection in a geodesic plane. Sphere-shaped planes act on the chart
    /// as the sphere inversion `x -> c + r^2 (x - c)/|x - c|^2`.
    pub fn reflection(plane: &GeodesicPlane) -> Self {
        let u = plane.u();
        let m = match plane.space {
            SpaceForm::Spherical => Matrix4::identity() - 2.0 * u * u.transpose(),
            SpaceForm::Hyperbolic => {
                let ju = Vector4::new(-u.x, u.y, u.z, u.w);
                Matrix4::identity() - 2.0 * u * ju.transpose()
            }
            SpaceForm::Euclidean => {
                // u = (-c, n), |n| = 1: y -> y - 2 (n.y - c) n
                let n = Vector3::new(u.y, u.z, u.w);
                let mut m = Matrix4::identity();
                let q = Matrix3::identity() - 2.0 * n * n.transpose();
                m.fixed_view_mut::<3, 3>(1, 1).copy_from(&q);
                m.fixed_view_mut::<3, 1>(1, 0).copy_from(&(-2.0 * u.x * n));
                m
            }
        };
        Isometry { space: plane.space, m, word: Vec::new() }
    }

    /// Rotation by `phi` about a line through the chart origin. Valid
    /// verbatim in all three charts because origin-centered chart rotations
    /// are ambient isometries.
    pub fn rotation(space: SpaceForm, axis: &Vector3<f64>, phi: f64) -> Result<Self> {
        let n = axis.norm();
        if n < 1e-300 {
            return Err(Error::Domain("rotation axis must be nonzero".into()));
        }
        let r3 = rotation_matrix3(&(axis / n), phi);
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(1, 1).copy_from(&r3);
        Ok(Isometry { space, m, word: Vec::new() })
    }

    /// Euclidean translation.
    pub fn translation(t: &Vector3<f64>) -> Self {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 1>(1, 0).copy_from(t);
        Isometry { space: SpaceForm::Euclidean, m, word: Vec::new() }
    }

    /// `a.compose(b)` applies `b` first, then `a`.
    pub fn compose(&self, other: &Isometry) -> Result<Isometry> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(self.space, other.space));
        }
        let mut out = Isometry {
            space: self.space,
            m: self.m * other.m,
            word: {
                let mut w = other.word.clone();
                w.extend_from_slice(&self.word);
                w
            },
        };
        if out.residual() > RENORM_TOL {
            out.renormalize();
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Isometry {
        let m = match self.space {
            SpaceForm::Spherical => self.m.transpose(),
            SpaceForm::Hyperbolic => {
                let j = Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0));
                j * self.m.transpose() * j
            }
            SpaceForm::Euclidean => {
                let q = self.m.fixed_view::<3, 3>(1, 1).into_owned();
                let t = self.m.fixed_view::<3, 1>(1, 0).into_owned();
                let mut m = Matrix4::identity();
                m.fixed_view_mut::<3, 3>(1, 1).copy_from(&q.transpose());
                m.fixed_view_mut::<3, 1>(1, 0).copy_from(&(-q.transpose() * t));
                m
            }
        };
        Isometry { space: self.space, m, word: Vec::new() }
    }

    pub fn apply_rep(&self, x: &Vector4<f64>) -> Vector4<f64> {
        self.m * x
    }

    pub fn apply(&self, p: &ModelPoint) -> Result<ModelPoint> {
        if p.space != self.space {
            return Err(Error::SpaceMismatch(self.space, p.space));
        }
        let rep = p.rep()?;
        Ok(ModelPoint::from_rep(self.space, &self.apply_rep(&rep)))
    }

    pub fn apply_chart(&self, y: &Vector3<f64>) -> Chart {
        project(self.space, &self.apply_rep(&lift(self.space, y)))
    }

    /// Image of an oriented geodesic plane.
    pub fn apply_plane(&self, plane: &GeodesicPlane) -> GeodesicPlane {
        // Covectors transform by the inverse transpose under the pairing.
        let u = plane.u();
        let v = match self.space {
            SpaceForm::Spherical => self.m * u,
            SpaceForm::Hyperbolic => {
                // <u', M x> = <u, x>  =>  u' = J M J u with M Lorentz.
                let j = Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0));
                j * self.m * j * u
            }
            SpaceForm::Euclidean => self.inverse().m.transpose() * u,
        };
        GeodesicPlane::from_u(self.space, v).expect("isometry image of a plane is a plane")
    }

    /// Max-norm residual of the defining form constraint.
    pub fn residual(&self) -> f64 {
        match self.space {
            SpaceForm::Spherical => {
                let r = self.m.transpose() * self.m - Matrix4::identity();
                r.abs().max()
            }
            SpaceForm::Hyperbolic => {
                let j = Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0));
                let r = self.m.transpose() * j * self.m - j;
                r.abs().max()
            }
            SpaceForm::Euclidean => {
                let q = self.m.fixed_view::<3, 3>(1, 1).into_owned();
                let r = (q.transpose() * q - Matrix3::identity()).abs().max();
                let top = (self.m[(0, 0)] - 1.0)
                    .abs()
                    .max(self.m[(0, 1)].abs())
                    .max(self.m[(0, 2)].abs())
                    .max(self.m[(0, 3)].abs());
                r.max(top)
            }
        }
    }

    /// Gram-Schmidt (or Lorentz-Gram-Schmidt) renormalization.
    pub fn renormalize(&mut self) {
        match self.space {
            SpaceForm::Spherical => {
                let mut cols: Vec<Vector4<f64>> = (0..4).map(|i| self.m.column(i).into_owned()).collect();
                for i in 0..4 {
                    for j in 0..i {
                        let proj = cols[i].dot(&cols[j]);
                        let prev = cols[j];
                        cols[i] -= prev * proj;
                    }
                    cols[i] = cols[i].normalize();
                }
                for (i, c) in cols.iter().enumerate() {
                    self.m.set_column(i, c);
                }
            }
            SpaceForm::Hyperbolic => {
                let mut cols: Vec<Vector4<f64>> = (0..4).map(|i| self.m.column(i).into_owned()).collect();
                // column 0 is timelike, the rest spacelike
                let n0 = (-mink(&cols[0], &cols[0])).abs().sqrt();
                cols[0] /= n0;
                if cols[0].x < 0.0 {
                    // keep the upper sheet
                    cols[0] = -cols[0];
                }
                for i in 1..4 {
                    let c0 = cols[0];
                    let p0 = mink(&cols[i], &c0);
                    cols[i] += c0 * p0; // subtract (-1)-normalized timelike projection
                    for j in 1..i {
                        let prev = cols[j];
                        let p = mink(&cols[i], &prev);
                        cols[i] -= prev * p;
                    }
                    let n = mink(&cols[i], &cols[i]).sqrt();
                    cols[i] /= n;
                }
                for (i, c) in cols.iter().enumerate() {
                    self.m.set_column(i, c);
                }
            }
            SpaceForm::Euclidean => {
                let mut q: Vec<Vector3<f64>> =
                    (0..3).map(|i| self.m.fixed_view::<3, 1>(1, 1 + i).into_owned()).collect();
                for i in 0..3 {
                    for j in 0..i {
                        let proj = q[i].dot(&q[j]);
                        let prev = q[j];
                        q[i] -= prev * proj;
                    }
                    q[i] = q[i].normalize();
                }
                for (i, c) in q.iter().enumerate() {
                    self.m.fixed_view_mut::<3, 1>(1, 1 + i).copy_from(c);
                }
                self.m[(0, 0)] = 1.0;
                self.m[(0, 1)] = 0.0;
                self.m[(0, 2)] = 0.0;
                self.m[(0, 3)] = 0.0;
            }
        }
    }

    /// Orientation: +1 proper, -1 improper.
    pub fn parity(&self) -> f64 {
        let d = match self.space {
            SpaceForm::Euclidean => self.m.fixed_view::<3, 3>(1, 1).determinant(),
            _ => self.m.determinant(),
        };
        if d >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Whether this is (numerically) a pure Euclidean translation.
    pub fn translation_part(&self) -> Option<Vector3<f64>> {
        if self.space != SpaceForm::Euclidean {
            return None;
        }
        let q = self.m.fixed_view::<3, 3>(1, 1).into_owned();
        if (q - Matrix3::identity()).abs().max() < 1e-9 {
            Some(self.m.fixed_view::<3, 1>(1, 0).into_owned())
        } else {
            None
        }
    }

    /// Fingerprint: images of four fixed generic reference points, rounded
    /// to the grid pitch of D4. Hyperbolic and Euclidean prints use chart
    /// images; spherical prints use the bounded pre-stereographic images so
    /// cells covering the projection pole stay representable.
    pub fn fingerprint(&self) -> Fingerprint {
        let refs = [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(0.1, 0.0, 0.0),
            Vector3::new(0.0, 0.1, 0.0),
            Vector3::new(0.0, 0.0, 0.1),
        ];
        let mut raw = Vec::with_capacity(16);
        for r in refs.iter() {
            let img = self.apply_rep(&lift(self.space, r));
            match self.space {
                SpaceForm::Spherical => raw.extend_from_slice(&[img.x, img.y, img.z, img.w]),
                _ => match project(self.space, &img) {
                    Chart::Finite(c) => raw.extend_from_slice(&[c.x, c.y, c.z]),
                    Chart::Infinity => unreachable!("non-spherical projection is total"),
                },
            }
        }
        let rounded = raw.iter().map(|x| (x / FINGERPRINT_PITCH).round() as i64).collect();
        Fingerprint { rounded, raw }
    }

    /// Side of a plane the image of a lifted point falls on.
    pub fn image_side(&self, plane: &GeodesicPlane, x: &Vector4<f64>) -> f64 {
        incidence(self.space, &plane.u(), &self.apply_rep(x))
    }
}

/// Images of four reference points on a rounding grid; two isometries with
/// equal fingerprints act identically on the reference frame within twice
/// the grid pitch.
#[derive(Clone, Debug)]
pub struct Fingerprint {
    pub rounded: Vec<i64>,
    pub raw: Vec<f64>,
}

impl PartialEq for Fingerprint {
    fn eq(&self, other: &Self) -> bool {
        self.rounded == other.rounded
    }
}
impl Eq for Fingerprint {}

impl Fingerprint {
    pub fn frame_distance(&self, other: &Fingerprint) -> f64 {
        self.raw
            .iter()
            .zip(&other.raw)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaceform::{distance, plane_from_center, PlaneShape};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sphere_inversion_formula() {
        // inversion of the origin in sphere{(2,0,0), sqrt 3} lands at (1/2, 0, 0)
        let pl = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(2.0, 0.0, 0.0)).unwrap();
        let r = Isometry::reflection(&pl);
        match r.apply_chart(&Vector3::zeros()) {
            Chart::Finite(c) => {
                assert_relative_eq!(c.x, 0.5, epsilon = 1e-12);
                assert!(c.y.abs() < 1e-14 && c.z.abs() < 1e-14);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn reflection_fixes_plane_and_is_involutive() {
        let pl = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(1.7, 0.4, -0.3)).unwrap();
        let r = Isometry::reflection(&pl);
        // points on the plane move less than 1e-12
        let PlaneShape::Sphere { center, radius } = pl.shape() else { panic!() };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 100 {
            let d = Vector3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let p = center + d.normalize() * radius;
            if p.norm() >= 0.999 {
                continue; // keep strictly inside the ball
            }
            match r.apply_chart(&p) {
                Chart::Finite(q) => assert!((q - p).norm() < 1e-12, "moved {}", (q - p).norm()),
                _ => panic!(),
            }
            checked += 1;
        }
        // involution on a random frame
        let rr = r.compose(&r).unwrap();
        let id = Isometry::identity(SpaceForm::Hyperbolic);
        assert_eq!(rr.fingerprint(), id.fingerprint());
        assert!(rr.fingerprint().frame_distance(&id.fingerprint()) < 1e-10);
    }

    #[test]
    fn rotation_examples() {
        let r = Isometry::rotation(SpaceForm::Euclidean, &Vector3::z(), std::f64::consts::FRAC_PI_2).unwrap();
        match r.apply_chart(&Vector3::x()) {
            Chart::Finite(c) => {
                assert!((c - Vector3::y()).norm() < 1e-14);
            }
            _ => panic!(),
        }
        let r = Isometry::rotation(SpaceForm::Hyperbolic, &Vector3::z(), std::f64::consts::FRAC_PI_4).unwrap();
        match r.apply_chart(&(Vector3::x() * 0.5)) {
            Chart::Finite(c) => {
                let e = 2.0f64.sqrt() / 4.0;
                assert!((c - Vector3::new(e, e, 0.0)).norm() < 1e-14);
            }
            _ => panic!(),
        }
        // axis is fixed for all phi
        for phi in [0.3, 1.1, 2.9] {
            let r = Isometry::rotation(SpaceForm::Spherical, &Vector3::z(), phi).unwrap();
            match r.apply_chart(&(Vector3::z() * 0.4)) {
                Chart::Finite(c) => assert!((c - Vector3::z() * 0.4).norm() < 1e-14),
                _ => panic!(),
            }
        }
    }

    #[test]
    fn apply_identity_is_identity() {
        let id = Isometry::identity(SpaceForm::Hyperbolic);
        let p = ModelPoint::new(SpaceForm::Hyperbolic, Vector3::new(0.3, -0.1, 0.2)).unwrap();
        assert_eq!(id.apply(&p).unwrap(), p);
    }

    #[test]
    fn composition_order_shows_in_fingerprints() {
        // reflections in two intersecting planes with distinct axes: the two
        // composition orders are the two rotation senses around the edge
        let a = 2.0581710272714924;
        let p1 = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(a, 0.0, 0.0)).unwrap();
        let p2 = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(0.0, a, 0.0)).unwrap();
        let r1 = Isometry::reflection(&p1);
        let r2 = Isometry::reflection(&p2);
        let a = r1.compose(&r2).unwrap();
        let b = r2.compose(&r1).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn isometries_preserve_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for space in [SpaceForm::Hyperbolic, SpaceForm::Spherical, SpaceForm::Euclidean] {
            let pl = match space {
                SpaceForm::Hyperbolic => {
                    plane_from_center(space, &Vector3::new(1.6, 0.2, 0.1)).unwrap()
                }
                _ => plane_from_center(space, &Vector3::new(0.8, 0.1, -0.2)).unwrap(),
            };
            let rot = Isometry::rotation(space, &Vector3::new(0.3, 1.0, -0.2), 0.7).unwrap();
            let g = Isometry::reflection(&pl).compose(&rot).unwrap();
            for _ in 0..200 {
                let p = Vector3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                let q = Vector3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                let mp = ModelPoint::new(space, p).unwrap();
                let mq = ModelPoint::new(space, q).unwrap();
                let d0 = distance(&mp, &mq).unwrap();
                let d1 = distance(&g.apply(&mp).unwrap(), &g.apply(&mq).unwrap()).unwrap();
                assert!((d0 - d1).abs() <= 1e-9, "{space}: {d0} vs {d1}");
            }
        }
    }

    #[test]
    fn fingerprint_stable_under_renormalization() {
        let pl = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(1.9, -0.3, 0.4)).unwrap();
        let g = Isometry::reflection(&pl)
            .compose(&Isometry::rotation(SpaceForm::Hyperbolic, &Vector3::z(), 0.41).unwrap())
            .unwrap();
        let fp0 = g.fingerprint();
        let mut h = g.clone();
        h.renormalize();
        assert_eq!(fp0, h.fingerprint());
    }

    #[test]
    fn lorentz_residual_stays_small_under_long_products() {
        let a = 2.0581710272714924f64; // 72-degree cube scale
        let planes: Vec<_> = [
            Vector3::new(a, 0.0, 0.0),
            Vector3::new(0.0, a, 0.0),
            Vector3::new(0.0, 0.0, a),
            Vector3::new(-a, 0.0, 0.0),
        ]
        .iter()
        .map(|c| plane_from_center(SpaceForm::Hyperbolic, c).unwrap())
        .collect();
        let gens: Vec<_> = planes.iter().map(Isometry::reflection).collect();
        // residuals stay small at enumeration word lengths
        let mut g = Isometry::identity(SpaceForm::Hyperbolic);
        for i in 0..6 {
            g = gens[i % 4].compose(&g).unwrap();
        }
        assert!(g.residual() < 1e-10, "residual {}", g.residual());
    }
}
