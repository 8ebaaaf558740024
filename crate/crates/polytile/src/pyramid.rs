//! Generalized pyramids PY_q^n: a regular q-gonal base with side faces
//! meeting each other at dihedral angle 2 pi / n.
//!
//! Three constructions cover the parameter space, split by the sign of
//! `cos(2 pi / q) + cos(2 pi / n)`:
//! positive -> hyperbolic columns cut by a base plane; zero -> the Euclidean
//! borderline, realized for (4,4) by upper half-space hemispheres; negative
//! -> central subdivision of the finite Platonic solid P_{q,n}.

use nalgebra::{Vector3, Vector4};

use crate::error::{Error, Result};
use crate::solids::{self, Classification, Solid};
use crate::spaceform::{
    dist_rep, intersection_angle, invert_plane, invert_sphere, lift, plane_through_points,
    GeodesicPlane, PlaneShape, SpaceForm,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PyramidKind {
    /// Hyperbolic column of q sphere walls at radius r, cut by a base plane
    /// at parameter s (the paper's r, s coordinates).
    Column { r: f64, s: f64 },
    /// Central subdivision of P_{q,n}(scale): apex at the origin.
    Subdivision { scale: f64 },
    /// Ideal square pyramid from upper half-space hemispheres of radius rho.
    HalfSpace { rho: f64 },
    /// Degenerate n = 2 pyramid: a flat q-gon, gamma = 0.
    Flat { circumradius: f64 },
}

#[derive(Clone, Debug)]
pub struct Pyramid {
    pub q: usize,
    pub n: usize,
    pub space: SpaceForm,
    pub kind: PyramidKind,
    pub base_plane: GeodesicPlane,
    pub side_planes: Vec<GeodesicPlane>,
    /// Lifted base vertices (absent for the ideal half-space pyramid where
    /// the base ring is ideal).
    pub base_vertices: Option<Vec<Vector4<f64>>>,
    /// Base-to-side dihedral angle.
    pub gamma: f64,
    /// Side-to-side dihedral angle (should be 2 pi / n).
    pub side_dihedral: f64,
    /// Geodesic length of a base edge.
    pub base_edge: Option<f64>,
}

/// Column radius for PY_q^n: generalizes r_n = sqrt(1 + sec(2 pi/n)).
pub fn column_radius(q: usize, n: usize) -> Result<f64> {
    let cq = (2.0 * std::f64::consts::PI / q as f64).cos();
    let cn = (2.0 * std::f64::consts::PI / n as f64).cos();
    let denom = cq + cn;
    if denom <= 1e-12 {
        return Err(Error::Nonexistence(format!(
            "column pyramid PY_{q}^{n} has no finite radius (cos 2pi/q + cos 2pi/n = {denom:.3e})"
        )));
    }
    Ok(((1.0 + cn) / denom).sqrt())
}

/// Ideal-base threshold for the column: below this s the base vertices leave
/// the ball. For q = 4 this is cot(pi/n).
pub fn column_ideal_s(q: usize, n: usize) -> Result<f64> {
    let r2 = column_radius(q, n)?.powi(2);
    let cq = (2.0 * std::f64::consts::PI / q as f64).cos();
    // Ideal base vertex: |v| = 1 in the wall/wall/base triple intersection
    // gives s^2 = r^2 (1+cq) / (r^2 (1+cq) - 2); for q = 4 this reduces to
    // s^2 = r^2/(r^2 - 2), i.e. s = cot(pi/n).
    let denom = r2 * (1.0 + cq) - 2.0;
    if denom <= 0.0 {
        return Err(Error::Nonexistence(format!("column PY_{q}^{n} has no ideal base")));
    }
    Ok((r2 * (1.0 + cq) / denom).sqrt())
}

/// Which construction realizes PY_q^n.
pub fn pyramid_variant(q: usize, n: usize, space: SpaceForm) -> Result<&'static str> {
    if n == 2 {
        return Ok("flat");
    }
    let cq = (2.0 * std::f64::consts::PI / q as f64).cos();
    let cn = (2.0 * std::f64::consts::PI / n as f64).cos();
    let s = cq + cn;
    if s > 1e-9 {
        if space != SpaceForm::Hyperbolic {
            return Err(Error::Nonexistence(format!(
                "PY_{q}^{n} exists only in hyperbolic space"
            )));
        }
        Ok("column")
    } else if s < -1e-9 {
        // subdivision of the finite Platonic P_{q,n}
        crate::tables::PlatonicKind::from_pq(q, n)?;
        Ok("subdivision")
    } else {
        if (q, n) == (4, 4) {
            if space != SpaceForm::Hyperbolic {
                return Err(Error::Nonexistence("PY_4^4 exists in R^3 and H^3 only; the curved construction is hyperbolic".into()));
            }
            Ok("halfspace")
        } else {
            Err(Error::Nonexistence(format!(
                "borderline pyramid PY_{q}^{n} is not supported (only (4,4) is built)"
            )))
        }
    }
}

/// Construct PY_q^n. The size parameter is interpreted per variant:
/// column -> base-plane center norm s; subdivision -> source-solid scale;
/// half-space -> hemisphere radius rho; flat -> base circumradius.
pub fn pyramid(q: usize, n: usize, s_param: f64, space: SpaceForm) -> Result<Pyramid> {
    if q < 3 {
        return Err(Error::Domain("pyramid base needs q >= 3".into()));
    }
    if n < 2 {
        return Err(Error::Domain("pyramid side index needs n >= 2".into()));
    }
    match pyramid_variant(q, n, space)? {
        "flat" => flat_pyramid(q, s_param, space),
        "column" => column_pyramid(q, n, s_param),
        "subdivision" => subdivision_pyramid(q, n, s_param, space),
        "halfspace" => halfspace_pyramid(s_param),
        _ => unreachable!(),
    }
}

fn flat_pyramid(q: usize, circumradius: f64, space: SpaceForm) -> Result<Pyramid> {
    if circumradius <= 0.0 {
        return Err(Error::Domain("flat pyramid needs a positive circumradius".into()));
    }
    if space == SpaceForm::Hyperbolic && circumradius >= 1.0 {
        return Err(Error::Domain("flat pyramid base must stay inside the ball".into()));
    }
    let base_plane = GeodesicPlane::from_shape(
        space,
        PlaneShape::Flat { normal: Vector3::z(), offset: 0.0 },
    )?;
    let verts: Vec<Vector4<f64>> = (0..q)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / q as f64;
            lift(space, &Vector3::new(circumradius * t.cos(), circumradius * t.sin(), 0.0))
        })
        .collect();
    let base_edge = dist_rep(space, &verts[0], &verts[1]);
    Ok(Pyramid {
        q,
        n: 2,
        space,
        kind: PyramidKind::Flat { circumradius },
        base_plane,
        side_planes: Vec::new(),
        base_vertices: Some(verts),
        gamma: 0.0,
        side_dihedral: std::f64::consts::PI,
        base_edge: Some(base_edge),
    })
}

fn column_pyramid(q: usize, n: usize, s: f64) -> Result<Pyramid> {
    let space = SpaceForm::Hyperbolic;
    let r = column_radius(q, n)?;
    if s <= 1.0 {
        return Err(Error::Domain(format!("column base parameter must exceed 1 (got {s})")));
    }
    let s_ideal = column_ideal_s(q, n)?;
    if s < s_ideal - 1e-12 {
        return Err(Error::Domain(format!(
            "base parameter {s} below the ideal-base threshold {s_ideal}; base vertices leave the ball"
        )));
    }
    let side_planes: Vec<GeodesicPlane> = (0..q)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / q as f64;
            crate::spaceform::plane_from_center(space, &Vector3::new(r * t.cos(), r * t.sin(), 0.0))
        })
        .collect::<Result<_>>()?;
    let base_plane =
        crate::spaceform::plane_from_center(space, &Vector3::new(0.0, 0.0, -s))?;
    // Base vertices: triple intersections wall_k, wall_{k+1}, base.
    let mut verts = Vec::with_capacity(q);
    for k in 0..q {
        let line = solids::edge_line(space, &side_planes[k], &side_planes[(k + 1) % q])?;
        // intersect the vertical edge line with the base plane
        let u = base_plane.u();
        let f = |t: f64| crate::spaceform::incidence(space, &u, &line.at(space, t));
        // bracket: the line runs vertically; scan both directions
        let mut lo = -40.0;
        let mut hi = 40.0;
        let (a, b) = (f(lo), f(hi));
        if a.signum() == b.signum() {
            return Err(Error::Domain("column edge does not meet the base plane".into()));
        }
        let mut flo = a;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        verts.push(line.at(space, 0.5 * (lo + hi)));
    }
    let base_edge = dist_rep(space, &verts[0], &verts[1]);
    let gamma = intersection_angle(&base_plane, &side_planes[0])?.angle()?;
    let side_dihedral = intersection_angle(&side_planes[0], &side_planes[1])?.angle()?;
    Ok(Pyramid {
        q,
        n,
        space,
        kind: PyramidKind::Column { r, s },
        base_plane,
        side_planes,
        base_vertices: Some(verts),
        gamma,
        side_dihedral,
        base_edge: Some(base_edge),
    })
}

/// Central subdivision of P_{q,n}(scale): base = the first face, apex = the
/// chart origin, sides = flat planes through the origin and the base edges.
fn subdivision_pyramid(q: usize, n: usize, scale: f64, space: SpaceForm) -> Result<Pyramid> {
    let source = solids::platonic(q, n, scale, space)?;
    if space == SpaceForm::Hyperbolic && source.classification != Classification::Finite {
        return Err(Error::Domain(format!(
            "subdivision source P_{q},{n}({scale}) is not finite"
        )));
    }
    subdivision_pyramid_of(&source)
}

pub(crate) fn subdivision_pyramid_of(source: &Solid) -> Result<Pyramid> {
    let space = source.space();
    let (q, n) = (source.spec.p, source.spec.q);
    let verts = source.vertices.as_ref().expect("finite source");
    let face = &source.faces[0];
    let origin = lift(space, &Vector3::zeros());
    let ring: Vec<Vector4<f64>> = face.ring.iter().map(|&i| verts[i]).collect();
    let mut side_planes = Vec::with_capacity(ring.len());
    for k in 0..ring.len() {
        let a = ring[k];
        let b = ring[(k + 1) % ring.len()];
        // witness on the interior side: the next ring vertex
        let w = ring[(k + 2) % ring.len()];
        let pl = plane_through_points(space, &[origin, a, b])?.oriented_toward(&w);
        side_planes.push(pl);
    }
    let base_edge = dist_rep(space, &ring[0], &ring[1]);
    let gamma = intersection_angle(&face.plane, &side_planes[0])?.angle()?;
    let side_dihedral = intersection_angle(&side_planes[0], &side_planes[1])?.angle()?;
    Ok(Pyramid {
        q,
        n,
        space,
        kind: PyramidKind::Subdivision { scale: source.spec.a },
        base_plane: face.plane,
        side_planes,
        base_vertices: Some(ring),
        gamma,
        side_dihedral,
        base_edge: Some(base_edge),
    })
}

/// PY_4^4 from the upper half-space picture (design decision D4): an upper
/// hemisphere of radius rho > sqrt(2)/2 centered at a lattice point is the
/// base; the sides are four vertical planes through the unit-square walls.
/// Everything is converted to the ball chart.
fn halfspace_pyramid(rho: f64) -> Result<Pyramid> {
    let space = SpaceForm::Hyperbolic;
    if rho <= std::f64::consts::FRAC_1_SQRT_2 {
        return Err(Error::Domain(format!(
            "hemisphere radius must exceed sqrt(2)/2 (got {rho})"
        )));
    }
    // Interior witness: a half-space point above the hemisphere, inside the
    // walls (the chart origin maps below the base, outside the pyramid).
    let witness = crate::spaceform::lift(
        space,
        &crate::spaceform::invert_halfspace_ball(&Vector3::new(0.0, 0.0, 1.5 * rho)),
    );
    // Base: hemisphere centered at the origin of the boundary plane.
    let (bc, br) = invert_sphere(&Vector3::new(0.0, 0.0, 0.0), rho);
    let base_plane = GeodesicPlane::from_shape(space, PlaneShape::Sphere { center: bc, radius: br })?
        .oriented_toward(&witness);
    // Sides: vertical planes x = +-1/2, y = +-1/2.
    let mut side_planes = Vec::with_capacity(4);
    for (normal, offset) in [
        (Vector3::x(), 0.5),
        (Vector3::y(), 0.5),
        (-Vector3::x(), 0.5),
        (-Vector3::y(), 0.5),
    ] {
        let (c, r) = invert_plane(&normal, offset);
        side_planes.push(
            GeodesicPlane::from_shape(space, PlaneShape::Sphere { center: c, radius: r })?
                .oriented_toward(&witness),
        );
    }
    // Base vertices are ideal: (+-1/2, +-1/2, sqrt(rho^2 - 1/2)) in half-space.
    let h = (rho * rho - 0.5).sqrt();
    let mut corners = Vec::new();
    for (sx, sy) in [(0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)] {
        let ball = crate::spaceform::invert_halfspace_ball(&Vector3::new(sx, sy, h));
        corners.push(ball);
    }
    let gamma = intersection_angle(&base_plane, &side_planes[0])?.angle()?;
    // adjacent vertical walls are perpendicular
    let side_dihedral = intersection_angle(&side_planes[0], &side_planes[1])?.angle()?;
    Ok(Pyramid {
        q: 4,
        n: 4,
        space,
        kind: PyramidKind::HalfSpace { rho },
        base_plane,
        side_planes,
        base_vertices: None, // corners are ideal points
        gamma,
        side_dihedral,
        base_edge: None,
    })
}

impl Pyramid {
    /// Rotating by 2 pi / q about the base axis permutes the side planes.
    pub fn symmetry_defect(&self) -> Result<f64> {
        if self.side_planes.is_empty() {
            return Ok(0.0);
        }
        let rot = crate::isometry::Isometry::rotation(
            self.space,
            &Vector3::z(),
            2.0 * std::f64::consts::PI / self.q as f64,
        )?;
        let mut worst: f64 = 0.0;
        for pl in &self.side_planes {
            let img = rot.apply_plane(pl);
            let best = self
                .side_planes
                .iter()
                .map(|g| (img.u() - g.u()).norm().min((img.u() + g.u()).norm()))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn column_radius_matches_lemma() {
        // r_n = sqrt(1 + sec(2 pi / n)) at q = 4
        let r5 = column_radius(4, 5).unwrap();
        assert_relative_eq!(r5, (1.0 + 1.0 / (2.0 * PI / 5.0).cos()).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(r5, 2.058171027271493, epsilon = 1e-9);
        assert!(column_radius(4, 4).is_err()); // sec(pi/2) diverges
        assert!(column_radius(3, 4).is_err()); // negative denominator
    }

    #[test]
    fn column_gamma_at_ideal_base() {
        // q=4, n=5, s = cot(pi/5): gamma = pi/2 - pi/5 = 54 degrees
        let s = 1.0 / (PI / 5.0).tan();
        let py = pyramid(4, 5, s * (1.0 + 1e-12), SpaceForm::Hyperbolic).unwrap();
        assert_relative_eq!(py.gamma.to_degrees(), 54.0, epsilon = 1e-7);
        assert_relative_eq!(py.side_dihedral, 2.0 * PI / 5.0, epsilon = 1e-12);
    }

    #[test]
    fn column_edge_lemma_and_vertex_oracle() {
        // q=4, n=5, s=2: cosh l = 1 + 8/((r^2-2)*4 - r^2)
        let py = pyramid(4, 5, 2.0, SpaceForm::Hyperbolic).unwrap();
        let r2 = column_radius(4, 5).unwrap().powi(2);
        let cosh_l = 1.0 + 8.0 / ((r2 - 2.0) * 4.0 - r2);
        assert_relative_eq!(py.base_edge.unwrap(), cosh_l.acosh(), epsilon = 1e-12);
        assert_relative_eq!(py.base_edge.unwrap(), 1.6498591598479417, epsilon = 1e-9);
        // oracle: vertices (+-s, +-s, r)/(sqrt((r^2-2)s^2 - r^2) + r s)
        let r = r2.sqrt();
        let s = 2.0;
        let denom = ((r2 - 2.0) * s * s - r2).sqrt() + r * s;
        let v1 = Vector3::new(s, s, r) / denom;
        let v2 = Vector3::new(-s, s, r) / denom;
        let d = crate::spaceform::distance(
            &crate::spaceform::ModelPoint::new(SpaceForm::Hyperbolic, v1).unwrap(),
            &crate::spaceform::ModelPoint::new(SpaceForm::Hyperbolic, v2).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(py.base_edge.unwrap(), d, epsilon = 1e-10);
        // gamma lemma: cos gamma = 1/(sqrt(r^2-1) sqrt(s^2-1))
        assert_relative_eq!(
            py.gamma.cos(),
            1.0 / ((r2 - 1.0).sqrt() * (s * s - 1.0).sqrt()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn pyramid_rotational_symmetry() {
        let py = pyramid(4, 6, 1.9, SpaceForm::Hyperbolic).unwrap();
        assert!(py.symmetry_defect().unwrap() < 1e-10);
        let py = pyramid(5, 4, 2.5, SpaceForm::Hyperbolic).unwrap();
        assert!(py.symmetry_defect().unwrap() < 1e-10);
        assert_relative_eq!(py.side_dihedral, PI / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn subdivision_pyramid_angles() {
        // Euclidean cube subdivides into six PY_4^3 with gamma = 45 degrees.
        let py = pyramid(4, 3, 1.0, SpaceForm::Euclidean).unwrap();
        assert_relative_eq!(py.gamma.to_degrees(), 45.0, epsilon = 1e-10);
        assert_relative_eq!(py.side_dihedral.to_degrees(), 120.0, epsilon = 1e-10);
        // Euclidean tetrahedron: gamma = half of arccos(1/3).
        let py = pyramid(3, 3, 1.0, SpaceForm::Euclidean).unwrap();
        assert_relative_eq!(py.gamma, 0.5 * (1.0f64 / 3.0).acos(), epsilon = 1e-10);
        assert_relative_eq!(py.side_dihedral.to_degrees(), 120.0, epsilon = 1e-10);
        // Hyperbolic near-ideal cube: gamma approaches 30 degrees.
        let py = pyramid(4, 3, 3.0f64.sqrt() + 1e-8, SpaceForm::Hyperbolic).unwrap();
        assert_relative_eq!(py.gamma.to_degrees(), 30.0, epsilon = 1e-3);
    }

    #[test]
    fn subdivision_gamma_is_half_source_dihedral() {
        for scale in [2.0, 2.5, 4.0] {
            let source = solids::platonic(4, 3, scale, SpaceForm::Hyperbolic).unwrap();
            let py = pyramid(4, 3, scale, SpaceForm::Hyperbolic).unwrap();
            assert_relative_eq!(py.gamma, 0.5 * source.edges[0].dihedral, epsilon = 1e-10);
            assert_relative_eq!(py.side_dihedral.to_degrees(), 120.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn halfspace_pyramid_py44() {
        let rho = 1.3;
        let py = pyramid(4, 4, rho, SpaceForm::Hyperbolic).unwrap();
        // vertical walls meet at right angles: 2 pi / 4
        assert_relative_eq!(py.side_dihedral, PI / 2.0, epsilon = 1e-10);
        // gamma = arccos(1/(2 rho)) from the mixed sphere/plane formula
        assert_relative_eq!(py.gamma, (1.0 / (2.0 * rho)).acos(), epsilon = 1e-10);
        // ideal-base limit: rho -> sqrt(2)/2 gives gamma -> pi/4 = pi/2 - pi/4
        let py = pyramid(4, 4, std::f64::consts::FRAC_1_SQRT_2 + 1e-9, SpaceForm::Hyperbolic).unwrap();
        assert_relative_eq!(py.gamma, PI / 4.0, epsilon = 1e-4);
    }

    #[test]
    fn flat_pyramid_degenerates() {
        let py = pyramid(4, 2, 0.3, SpaceForm::Spherical).unwrap();
        assert_eq!(py.gamma, 0.0);
        assert!(py.base_edge.unwrap() > 0.0);
    }

    #[test]
    fn ideal_threshold_rejected() {
        let s_ideal = column_ideal_s(4, 5).unwrap();
        assert_relative_eq!(s_ideal, 1.0 / (PI / 5.0).tan(), epsilon = 1e-12);
        assert!(pyramid(4, 5, s_ideal - 1e-6, SpaceForm::Hyperbolic).is_err());
    }
}
