//! Charts, metrics, and geodesic planes for the three constant-curvature spaces.
//!
//! Hyperbolic space uses the Poincare ball chart, spherical space the
//! stereographic chart normalized so the equator maps to the unit sphere,
//! and Euclidean space raw coordinates. Internally every point is lifted to
//! a 4-vector `(w, x, y, z)`: the hyperboloid sheet for H^3, the unit sphere
//! in R^4 for S^3 (with the projection pole at `w = +1`), and the affine
//! slice `w = 1` for E^3. Geodesic planes are linear hyperplanes `<u, x> = 0`
//! in the lift, which keeps intersection, reflection, and incidence tests
//! uniform across the three geometries.

use nalgebra::{Matrix3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance at which an ideal point is recognized on the unit sphere.
pub const IDEAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceForm {
    Spherical,
    Euclidean,
    Hyperbolic,
}

impl SpaceForm {
    pub fn name(self) -> &'static str {
        match self {
            SpaceForm::Spherical => "spherical",
            SpaceForm::Euclidean => "euclidean",
            SpaceForm::Hyperbolic => "hyperbolic",
        }
    }
}

impl std::fmt::Display for SpaceForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Chart {
    Finite(Vector3<f64>),
    /// The stereographic projection pole (spherical only, design decision D3).
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Ordinary,
    Ideal,
}

/// A point in the working chart of one space form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelPoint {
    pub space: SpaceForm,
    pub chart: Chart,
}

impl ModelPoint {
    pub fn new(space: SpaceForm, coords: Vector3<f64>) -> Result<Self> {
        if space == SpaceForm::Hyperbolic && coords.norm() > 1.0 + IDEAL_TOL {
            return Err(Error::Domain(format!(
                "hyperbolic chart point with |coords| = {} > 1",
                coords.norm()
            )));
        }
        Ok(ModelPoint { space, chart: Chart::Finite(coords) })
    }

    pub fn origin(space: SpaceForm) -> Self {
        ModelPoint { space, chart: Chart::Finite(Vector3::zeros()) }
    }

    pub fn at_infinity(space: SpaceForm) -> Result<Self> {
        if space != SpaceForm::Spherical {
            return Err(Error::Domain("at-infinity point only exists in the spherical chart".into()));
        }
        Ok(ModelPoint { space, chart: Chart::Infinity })
    }

    pub fn kind(&self) -> PointKind {
        match self.chart {
            Chart::Infinity => PointKind::Ordinary,
            Chart::Finite(c) => {
                if self.space == SpaceForm::Hyperbolic && (c.norm() - 1.0).abs() <= IDEAL_TOL {
                    PointKind::Ideal
                } else {
                    PointKind::Ordinary
                }
            }
        }
    }

    pub fn coords(&self) -> Result<Vector3<f64>> {
        match self.chart {
            Chart::Finite(c) => Ok(c),
            Chart::Infinity => Err(Error::Domain("point at infinity has no chart coordinates".into())),
        }
    }

    /// Lift into the 4-dimensional representation space.
    pub fn rep(&self) -> Result<Vector4<f64>> {
        match self.chart {
            Chart::Infinity => Ok(Vector4::new(1.0, 0.0, 0.0, 0.0)),
            Chart::Finite(c) => {
                if self.space == SpaceForm::Hyperbolic && c.norm() >= 1.0 - IDEAL_TOL {
                    return Err(Error::Domain(format!(
                        "cannot lift hyperbolic point with |coords| = {}",
                        c.norm()
                    )));
                }
                Ok(lift(self.space, &c))
            }
        }
    }

    pub fn from_rep(space: SpaceForm, rep: &Vector4<f64>) -> Self {
        match project(space, rep) {
            Chart::Finite(c) => ModelPoint { space, chart: Chart::Finite(c) },
            Chart::Infinity => ModelPoint { space, chart: Chart::Infinity },
        }
    }
}

// ---------------------------------------------------------------------------
// Lifts, projections, and representation-space metric helpers.
// ---------------------------------------------------------------------------

/// Chart -> representation space. Hyperbolic callers must pass `|y| < 1`.
pub fn lift(space: SpaceForm, y: &Vector3<f64>) -> Vector4<f64> {
    let s = y.norm_squared();
    match space {
        SpaceForm::Hyperbolic => {
            let d = 1.0 - s;
            Vector4::new((1.0 + s) / d, 2.0 * y.x / d, 2.0 * y.y / d, 2.0 * y.z / d)
        }
        SpaceForm::Spherical => {
            let d = 1.0 + s;
            Vector4::new((s - 1.0) / d, 2.0 * y.x / d, 2.0 * y.y / d, 2.0 * y.z / d)
        }
        SpaceForm::Euclidean => Vector4::new(1.0, y.x, y.y, y.z),
    }
}

pub fn project(space: SpaceForm, x: &Vector4<f64>) -> Chart {
    let v = Vector3::new(x.y, x.z, x.w);
    match space {
        SpaceForm::Hyperbolic => Chart::Finite(v / (1.0 + x.x)),
        SpaceForm::Euclidean => Chart::Finite(v / x.x),
        SpaceForm::Spherical => {
            let d = 1.0 - x.x;
            if d.abs() <= 1e-13 {
                Chart::Infinity
            } else {
                Chart::Finite(v / d)
            }
        }
    }
}

/// Minkowski product diag(-1,1,1,1).
pub fn mink(a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    -a.x * b.x + a.y * b.y + a.z * b.z + a.w * b.w
}

/// Incidence pairing between a plane covector `u` and a lifted point `x`.
/// Zero on the plane; the solid interior is kept on the negative side.
pub fn incidence(space: SpaceForm, u: &Vector4<f64>, x: &Vector4<f64>) -> f64 {
    match space {
        SpaceForm::Hyperbolic => mink(u, x),
        _ => u.dot(x),
    }
}

/// Geodesic distance between lifted points.
pub fn dist_rep(space: SpaceForm, a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    match space {
        SpaceForm::Hyperbolic => {
            let c = -mink(a, b);
            c.max(1.0).acosh()
        }
        SpaceForm::Spherical => a.dot(b).clamp(-1.0, 1.0).acos(),
        SpaceForm::Euclidean => {
            let d = a - b;
            (d.y * d.y + d.z * d.z + d.w * d.w).sqrt()
        }
    }
}

/// Geodesic midpoint of two lifted points.
pub fn midpoint_rep(space: SpaceForm, a: &Vector4<f64>, b: &Vector4<f64>) -> Vector4<f64> {
    let s = a + b;
    normalize_point(space, &s)
}

/// Rescale a representation vector back onto the model surface.
pub fn normalize_point(space: SpaceForm, x: &Vector4<f64>) -> Vector4<f64> {
    match space {
        SpaceForm::Hyperbolic => {
            let n = (-mink(x, x)).sqrt();
            x / n
        }
        SpaceForm::Spherical => x / x.norm(),
        SpaceForm::Euclidean => x / x.x,
    }
}

/// Unit tangent at `a` pointing toward `b`.
pub fn tangent_toward(space: SpaceForm, a: &Vector4<f64>, b: &Vector4<f64>) -> Vector4<f64> {
    match space {
        SpaceForm::Hyperbolic => {
            let t = b + a * mink(a, b);
            let n = mink(&t, &t).sqrt();
            t / n
        }
        SpaceForm::Spherical => {
            let t = b - a * a.dot(b);
            t / t.norm()
        }
        SpaceForm::Euclidean => {
            let mut t = b - a;
            t.x = 0.0;
            t / t.norm()
        }
    }
}

/// Point at geodesic distance `d` from `a` in the direction of `b`.
pub fn point_toward(space: SpaceForm, a: &Vector4<f64>, b: &Vector4<f64>, d: f64) -> Vector4<f64> {
    let t = tangent_toward(space, a, b);
    point_along(space, a, &t, d)
}

/// Point at geodesic distance `d` from `a` along unit tangent `t`.
pub fn point_along(space: SpaceForm, a: &Vector4<f64>, t: &Vector4<f64>, d: f64) -> Vector4<f64> {
    match space {
        SpaceForm::Hyperbolic => a * d.cosh() + t * d.sinh(),
        SpaceForm::Spherical => a * d.cos() + t * d.sin(),
        SpaceForm::Euclidean => a + t * d,
    }
}

/// Interior angle at `v` between the geodesics toward `a` and toward `b`.
pub fn angle_at(space: SpaceForm, v: &Vector4<f64>, a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    let ta = tangent_toward(space, v, a);
    let tb = tangent_toward(space, v, b);
    let c = match space {
        SpaceForm::Hyperbolic => mink(&ta, &tb),
        _ => ta.dot(&tb),
    };
    c.clamp(-1.0, 1.0).acos()
}

// ---------------------------------------------------------------------------
// Geodesic planes.
// ---------------------------------------------------------------------------

/// Chart description of a geodesic plane: a sphere or a flat plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlaneShape {
    Sphere { center: Vector3<f64>, radius: f64 },
    Flat { normal: Vector3<f64>, offset: f64 },
}

/// A totally geodesic plane, stored as an oriented covector in the lift.
///
/// The `u` covector is normalized and oriented so that the solid interior
/// (the construction's witness point, by default the chart origin) pairs
/// negatively.
#[derive(Clone, Copy, Debug)]
pub struct GeodesicPlane {
    pub space: SpaceForm,
    u: Vector4<f64>,
}

impl GeodesicPlane {
    /// Build from a covector; normalizes, keeping orientation.
    pub(crate) fn from_u(space: SpaceForm, u: Vector4<f64>) -> Result<Self> {
        let n = match space {
            SpaceForm::Hyperbolic => {
                let m = mink(&u, &u);
                if m <= 0.0 {
                    return Err(Error::Domain(
                        "hyperbolic plane covector must be spacelike".into(),
                    ));
                }
                m.sqrt()
            }
            SpaceForm::Spherical => u.norm(),
            SpaceForm::Euclidean => (u.y * u.y + u.z * u.z + u.w * u.w).sqrt(),
        };
        if n < 1e-300 {
            return Err(Error::Domain("degenerate plane covector".into()));
        }
        Ok(GeodesicPlane { space, u: u / n })
    }

    /// Orient the covector so `witness` lies on the negative side.
    pub(crate) fn oriented_toward(mut self, witness: &Vector4<f64>) -> Self {
        if incidence(self.space, &self.u, witness) > 0.0 {
            self.u = -self.u;
        }
        self
    }

    pub(crate) fn u(&self) -> Vector4<f64> {
        self.u
    }

    /// Signed incidence of a lifted point (negative on the interior side).
    pub fn side(&self, x: &Vector4<f64>) -> f64 {
        incidence(self.space, &self.u, x)
    }

    pub fn contains(&self, x: &Vector4<f64>, tol: f64) -> bool {
        self.side(x).abs() <= tol
    }

    /// Chart description.
    pub fn shape(&self) -> PlaneShape {
        let u = self.u;
        let v = Vector3::new(u.y, u.z, u.w);
        match self.space {
            SpaceForm::Euclidean => PlaneShape::Flat { normal: v, offset: -u.x },
            SpaceForm::Hyperbolic => {
                if u.x.abs() < 1e-12 {
                    PlaneShape::Flat { normal: v, offset: 0.0 }
                } else {
                    PlaneShape::Sphere { center: v / u.x, radius: 1.0 / u.x.abs() }
                }
            }
            SpaceForm::Spherical => {
                if u.x.abs() < 1e-12 {
                    PlaneShape::Flat { normal: v, offset: 0.0 }
                } else {
                    PlaneShape::Sphere { center: -v / u.x, radius: 1.0 / u.x.abs() }
                }
            }
        }
    }

    pub fn from_shape(space: SpaceForm, shape: PlaneShape) -> Result<Self> {
        let u = match (space, shape) {
            (SpaceForm::Euclidean, PlaneShape::Flat { normal, offset }) => {
                Vector4::new(-offset, normal.x, normal.y, normal.z)
            }
            (SpaceForm::Euclidean, PlaneShape::Sphere { .. }) => {
                return Err(Error::Domain("euclidean geodesic planes are flat".into()));
            }
            (_, PlaneShape::Flat { normal, offset }) => {
                if offset.abs() > 1e-12 {
                    return Err(Error::Domain(
                        "curved-space flat planes must pass through the chart origin".into(),
                    ));
                }
                Vector4::new(0.0, normal.x, normal.y, normal.z)
            }
            (SpaceForm::Hyperbolic, PlaneShape::Sphere { center, radius }) => {
                let expect = (center.norm_squared() - 1.0).max(0.0).sqrt();
                if (radius - expect).abs() > 1e-9 * radius.max(1.0) {
                    return Err(Error::Domain(format!(
                        "hyperbolic plane sphere must satisfy r^2 = |c|^2 - 1 (radius {radius}, expected {expect})"
                    )));
                }
                Vector4::new(1.0 / radius, center.x / radius, center.y / radius, center.z / radius)
            }
            (SpaceForm::Spherical, PlaneShape::Sphere { center, radius }) => {
                let expect = (center.norm_squared() + 1.0).sqrt();
                if (radius - expect).abs() > 1e-9 * radius.max(1.0) {
                    return Err(Error::Domain(format!(
                        "spherical plane sphere must satisfy r^2 = |c|^2 + 1 (radius {radius}, expected {expect})"
                    )));
                }
                Vector4::new(1.0 / radius, -center.x / radius, -center.y / radius, -center.z / radius)
            }
        };
        // Default orientation: chart origin on the interior (negative) side.
        let origin = lift(space, &Vector3::zeros());
        Ok(GeodesicPlane::from_u(space, u)?.oriented_toward(&origin))
    }
}

/// Geodesic plane through lifted points (at least 3, non-collinear).
///
/// Uses an SVD null vector of the incidence system, so over-determined but
/// consistent point sets (e.g. the q cut points of a vertex truncation) are
/// handled in one pass.
pub fn plane_through_points(space: SpaceForm, pts: &[Vector4<f64>]) -> Result<GeodesicPlane> {
    if pts.len() < 3 {
        return Err(Error::Domain("need at least 3 points to span a plane".into()));
    }
    // Zero-padded to at least 4 rows so the thin SVD exposes the null space.
    let mut rows = nalgebra::DMatrix::<f64>::zeros(pts.len().max(4), 4);
    for (i, p) in pts.iter().enumerate() {
        let r = match space {
            SpaceForm::Hyperbolic => Vector4::new(-p.x, p.y, p.z, p.w),
            _ => *p,
        };
        for k in 0..4 {
            rows[(i, k)] = r[k];
        }
    }
    let svd = rows.svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd computed");
    let u = vt.row(vt.nrows() - 1);
    let u = Vector4::new(u[0], u[1], u[2], u[3]);
    // Residual check: all points on the plane.
    let plane = GeodesicPlane::from_u(space, u)?;
    for p in pts {
        let scale = match space {
            SpaceForm::Hyperbolic => p.x.abs(),
            _ => 1.0,
        };
        if plane.side(p).abs() > 1e-8 * scale.max(1.0) {
            return Err(Error::Domain("points are not coplanar".into()));
        }
    }
    Ok(plane)
}

// ---------------------------------------------------------------------------
// Public operations per the module contract.
// ---------------------------------------------------------------------------

/// Geodesic distance between two ordinary points of one space.
///
/// The hyperbolic branch evaluates the ball-model formula
/// `cosh d = 1 + 2|p-q|^2 / ((1-|p|^2)(1-|q|^2))`; the spherical branch lifts
/// both points through the inverse stereographic projection and takes the arc
/// angle.
pub fn distance(p: &ModelPoint, q: &ModelPoint) -> Result<f64> {
    if p.space != q.space {
        return Err(Error::SpaceMismatch(p.space, q.space));
    }
    if p.kind() == PointKind::Ideal || q.kind() == PointKind::Ideal {
        return Err(Error::Domain("distance to an ideal point is infinite".into()));
    }
    match p.space {
        SpaceForm::Euclidean => Ok((p.coords()? - q.coords()?).norm()),
        SpaceForm::Spherical => Ok(dist_rep(SpaceForm::Spherical, &p.rep()?, &q.rep()?)),
        SpaceForm::Hyperbolic => {
            let a = p.coords()?;
            let b = q.coords()?;
            if a.norm() >= 1.0 || b.norm() >= 1.0 {
                return Err(Error::Domain("hyperbolic point outside the open ball".into()));
            }
            let num = 2.0 * (a - b).norm_squared();
            let den = (1.0 - a.norm_squared()) * (1.0 - b.norm_squared());
            Ok((1.0 + num / den).max(1.0).acosh())
        }
    }
}

/// The geodesic plane "centered at" a chart point `x`.
///
/// Hyperbolic: the sphere `S(x)` of radius `sqrt(|x|^2 - 1)` (requires
/// `|x| > 1`). Euclidean: the flat plane through `x` normal to `x`.
/// Spherical: the geodesic plane through `x` orthogonal to the radial
/// geodesic, recovered from a small lifted frame on it.
pub fn plane_from_center(space: SpaceForm, x: &Vector3<f64>) -> Result<GeodesicPlane> {
    let origin = lift(space, &Vector3::zeros());
    match space {
        SpaceForm::Hyperbolic => {
            if x.norm() <= 1.0 {
                return Err(Error::Domain(format!(
                    "hyperbolic plane center must have |x| > 1 (got {})",
                    x.norm()
                )));
            }
            let r = (x.norm_squared() - 1.0).sqrt();
            GeodesicPlane::from_shape(space, PlaneShape::Sphere { center: *x, radius: r })
        }
        SpaceForm::Euclidean => {
            let n = x.norm();
            if n < 1e-300 {
                return Err(Error::Domain("plane center must be nonzero".into()));
            }
            GeodesicPlane::from_shape(space, PlaneShape::Flat { normal: x / n, offset: n })
        }
        SpaceForm::Spherical => {
            if x.norm() < 1e-300 {
                return Err(Error::Domain("spherical plane center must be nonzero".into()));
            }
            let cap = lift(space, x);
            // Three lifted points of a small frame around `x` on the plane
            // orthogonal to the radial direction, then the hyperplane they
            // span with the chart origin's lift excluded.
            let radial = tangent_toward(space, &cap, &origin);
            let mut pts = vec![cap];
            for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
                let t0 = lift(space, &(x + 0.01 * axis)) - cap;
                // Project out the radial component and the normal component in R^4.
                let t = t0 - radial * t0.dot(&radial) - cap * t0.dot(&cap);
                if t.norm() > 1e-6 {
                    pts.push(normalize_point(space, &(cap + t)));
                }
                if pts.len() == 3 {
                    break;
                }
            }
            Ok(plane_through_points(space, &pts)?.oriented_toward(&origin))
        }
    }
}

/// Result of an intersection-angle query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlaneMeet {
    Angle(f64),
    Disjoint,
}

impl PlaneMeet {
    pub fn angle(self) -> Result<f64> {
        match self {
            PlaneMeet::Angle(a) => Ok(a),
            PlaneMeet::Disjoint => Err(Error::Domain("planes are disjoint".into())),
        }
    }
}

/// Dihedral angle between two geodesic planes, measured on the interior
/// side of both orientations. Cosine arguments within 1e-12 of [-1, 1] are
/// clamped (design decision D5); beyond that the planes are disjoint.
pub fn intersection_angle(p1: &GeodesicPlane, p2: &GeodesicPlane) -> Result<PlaneMeet> {
    if p1.space != p2.space {
        return Err(Error::SpaceMismatch(p1.space, p2.space));
    }
    let u1 = p1.u();
    let u2 = p2.u();
    let c = match p1.space {
        SpaceForm::Hyperbolic => -mink(&u1, &u2),
        SpaceForm::Spherical => -u1.dot(&u2),
        SpaceForm::Euclidean => -(u1.y * u2.y + u1.z * u2.z + u1.w * u2.w),
    };
    if c.abs() > 1.0 + IDEAL_TOL {
        Ok(PlaneMeet::Disjoint)
    } else {
        Ok(PlaneMeet::Angle(c.clamp(-1.0, 1.0).acos()))
    }
}

/// Conformal equivalence between the upper half-space chart and the ball
/// chart of H^3: inversion in the sphere of radius sqrt(2) centered at
/// (0,0,-1). The map is an involution, takes (0,0,1) to the origin, and the
/// boundary plane z = 0 onto the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartDirection {
    ToBall,
    ToHalfspace,
}

pub fn halfspace_ball_conversion(p: &Vector3<f64>, direction: ChartDirection) -> Result<Vector3<f64>> {
    match direction {
        ChartDirection::ToBall => {
            if p.z <= 0.0 {
                return Err(Error::Domain("upper half-space points need z > 0".into()));
            }
        }
        ChartDirection::ToHalfspace => {
            if p.norm() >= 1.0 {
                return Err(Error::Domain("ball points need |p| < 1".into()));
            }
        }
    }
    Ok(invert_halfspace_ball(p))
}

/// The underlying inversion, defined on all of R^3 minus the center.
pub(crate) fn invert_halfspace_ball(p: &Vector3<f64>) -> Vector3<f64> {
    let c = Vector3::new(0.0, 0.0, -1.0);
    let d = p - c;
    c + 2.0 * d / d.norm_squared()
}

/// Image of a Euclidean sphere (center, radius) under the half-space/ball
/// inversion, assuming the image is again a sphere (center not on it).
pub(crate) fn invert_sphere(center: &Vector3<f64>, radius: f64) -> (Vector3<f64>, f64) {
    let c0 = Vector3::new(0.0, 0.0, -1.0);
    let k = 2.0; // radius^2 of the inversion sphere
    let d = center - c0;
    let t = k / (d.norm_squared() - radius * radius);
    (c0 + d * t, (t * radius).abs())
}

/// Image of a Euclidean plane `n . x = c` under the inversion (assuming the
/// inversion center is not on the plane), which is a sphere through the
/// center's inverse.
pub(crate) fn invert_plane(normal: &Vector3<f64>, offset: f64) -> (Vector3<f64>, f64) {
    let c0 = Vector3::new(0.0, 0.0, -1.0);
    let k = 2.0;
    let h = offset - normal.dot(&c0); // signed distance numerator
    let center = c0 + normal * (k / (2.0 * h));
    let radius = (k / (2.0 * h)).abs();
    (center, radius)
}

/// Cyclic ordering of direction vectors around a center direction.
pub fn order_ring(dirs: &[Vector3<f64>], center: &Vector3<f64>) -> Vec<usize> {
    let z = center / center.norm();
    let seed = if z.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let x = z.cross(&seed).normalize();
    let y = z.cross(&x);
    let mut idx: Vec<usize> = (0..dirs.len()).collect();
    let mut key: Vec<f64> = dirs.iter().map(|d| d.dot(&y).atan2(d.dot(&x))).collect();
    // guard against ties
    for k in &mut key {
        if !k.is_finite() {
            *k = 0.0;
        }
    }
    idx.sort_by(|&a, &b| key[a].partial_cmp(&key[b]).unwrap());
    idx
}

/// Rotation matrix about a unit axis through the chart origin:
/// `R = sin(phi) R90 + cos(phi) (I - P) + P`.
pub fn rotation_matrix3(axis: &Vector3<f64>, phi: f64) -> Matrix3<f64> {
    let (a, b, c) = (axis.x, axis.y, axis.z);
    let r90 = Matrix3::new(0.0, -c, b, c, 0.0, -a, -b, a, 0.0);
    let p = axis * axis.transpose();
    r90 * phi.sin() + (Matrix3::identity() - p) * phi.cos() + p
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hp(x: f64, y: f64, z: f64) -> ModelPoint {
        ModelPoint::new(SpaceForm::Hyperbolic, Vector3::new(x, y, z)).unwrap()
    }

    #[test]
    fn coincident_points_have_zero_distance() {
        assert_eq!(distance(&hp(0.0, 0.0, 0.0), &hp(0.0, 0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn ball_distance_matches_closed_form_and_metric_integral() {
        // cosh d = 1 + 2*0.25/(1*0.75) = 5/3, d = ln 3.
        let d = distance(&hp(0.0, 0.0, 0.0), &hp(0.5, 0.0, 0.0)).unwrap();
        assert_relative_eq!(d, 3.0f64.ln(), epsilon = 1e-12);

        // Independent oracle: integrate the ball metric 2/(1-r^2) dr along
        // the segment with Simpson's rule.
        let f = |r: f64| 2.0 / (1.0 - r * r);
        let n = 2000;
        let h = 0.5 / n as f64;
        let mut s = f(0.0) + f(0.5);
        for i in 1..n {
            let x = i as f64 * h;
            s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
        }
        let integral = s * h / 3.0;
        assert_relative_eq!(d, integral, epsilon = 1e-10);
    }

    #[test]
    fn spherical_distance_via_lift() {
        let p = ModelPoint::new(SpaceForm::Spherical, Vector3::zeros()).unwrap();
        let q = ModelPoint::new(SpaceForm::Spherical, Vector3::x()).unwrap();
        // lifts are (-1,0,0,0) and (0,1,0,0): quarter turn.
        assert_relative_eq!(distance(&p, &q).unwrap(), std::f64::consts::FRAC_PI_2, epsilon = 1e-14);
    }

    #[test]
    fn ideal_points_are_rejected() {
        let p = hp(1.0, 0.0, 0.0);
        assert_eq!(p.kind(), PointKind::Ideal);
        assert!(distance(&p, &hp(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn plane_from_center_formulas() {
        let pl = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(2.0, 0.0, 0.0)).unwrap();
        match pl.shape() {
            PlaneShape::Sphere { center, radius } => {
                assert_relative_eq!(center.x, 2.0, epsilon = 1e-12);
                assert_relative_eq!(radius, 3.0f64.sqrt(), epsilon = 1e-12);
            }
            _ => panic!("expected sphere"),
        }
        let pl = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(2.0f64.sqrt(), 0.0, 0.0)).unwrap();
        match pl.shape() {
            PlaneShape::Sphere { radius, .. } => assert_relative_eq!(radius, 1.0, epsilon = 1e-12),
            _ => panic!("expected sphere"),
        }
        assert!(plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn cube_plane_angles_tangent_and_sixty() {
        let a = 2.0f64.sqrt();
        let p1 = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(a, 0.0, 0.0)).unwrap();
        let p2 = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(0.0, a, 0.0)).unwrap();
        match intersection_angle(&p1, &p2).unwrap() {
            PlaneMeet::Angle(t) => assert!(t.abs() < 1e-7, "tangency angle {t}"),
            PlaneMeet::Disjoint => panic!("tangent planes reported disjoint"),
        }
        let a = 3.0f64.sqrt();
        let p1 = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(a, 0.0, 0.0)).unwrap();
        let p2 = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(0.0, a, 0.0)).unwrap();
        let t = intersection_angle(&p1, &p2).unwrap().angle().unwrap();
        assert_relative_eq!(t.to_degrees(), 60.0, epsilon = 1e-10);
    }

    #[test]
    fn flat_planes_with_orthogonal_normals_meet_at_right_angle() {
        let p1 = GeodesicPlane::from_shape(
            SpaceForm::Euclidean,
            PlaneShape::Flat { normal: Vector3::x(), offset: 1.0 },
        )
        .unwrap();
        let p2 = GeodesicPlane::from_shape(
            SpaceForm::Euclidean,
            PlaneShape::Flat { normal: Vector3::y(), offset: 1.0 },
        )
        .unwrap();
        let t = intersection_angle(&p1, &p2).unwrap().angle().unwrap();
        assert_relative_eq!(t.to_degrees(), 90.0, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_planes_are_reported() {
        let a = 1.2f64; // below sqrt(2): cube planes disjoint
        let p1 = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(a, 0.0, 0.0)).unwrap();
        let p2 = plane_from_center(SpaceForm::Hyperbolic, &Vector3::new(0.0, a, 0.0)).unwrap();
        assert_eq!(intersection_angle(&p1, &p2).unwrap(), PlaneMeet::Disjoint);
    }

    #[test]
    fn halfspace_conversion_examples() {
        let b = halfspace_ball_conversion(&Vector3::new(0.0, 0.0, 1.0), ChartDirection::ToBall).unwrap();
        assert!(b.norm() < 1e-14);
        // boundary plane z = 0 maps onto the unit sphere
        for x in [-1.5, -0.1, 0.4, 2.0] {
            let img = invert_halfspace_ball(&Vector3::new(x, 0.3, 0.0));
            assert_relative_eq!(img.norm(), 1.0, epsilon = 1e-12);
        }
        // round trip
        let p = Vector3::new(0.3, -0.2, 0.4);
        let h = halfspace_ball_conversion(&p, ChartDirection::ToHalfspace).unwrap();
        let back = halfspace_ball_conversion(&h, ChartDirection::ToBall).unwrap();
        assert!((back - p).norm() < 1e-12);
        // distance preservation on a pair: half-space metric
        // cosh d = 1 + |p-q|^2 / (2 z_p z_q)
        let p1 = Vector3::new(0.1, 0.2, 0.8);
        let p2 = Vector3::new(-0.3, 0.1, 1.7);
        let dh = {
            let n: f64 = (p1 - p2).norm_squared();
            (1.0f64 + n / (2.0 * p1.z * p2.z)).acosh()
        };
        let b1 = halfspace_ball_conversion(&p1, ChartDirection::ToBall).unwrap();
        let b2 = halfspace_ball_conversion(&p2, ChartDirection::ToBall).unwrap();
        let db = distance(
            &ModelPoint::new(SpaceForm::Hyperbolic, b1).unwrap(),
            &ModelPoint::new(SpaceForm::Hyperbolic, b2).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(dh, db, epsilon = 1e-12);
    }

    #[test]
    fn spherical_lift_round_trip() {
        for p in [
            Vector3::new(0.2, -0.7, 0.1),
            Vector3::new(3.0, 2.0, -8.0),
            Vector3::new(10.0, 0.0, 0.0),
        ] {
            let x = lift(SpaceForm::Spherical, &p);
            assert_relative_eq!(x.norm(), 1.0, epsilon = 1e-13);
            match project(SpaceForm::Spherical, &x) {
                Chart::Finite(q) => assert!((q - p).norm() < 1e-12 * p.norm().max(1.0)),
                Chart::Infinity => panic!("unexpected pole"),
            }
        }
    }
}
