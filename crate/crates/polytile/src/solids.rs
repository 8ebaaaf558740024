//! Generalized Platonic solids, their truncations and rectifications, in any
//! space form. Solids are built from face planes placed along the dual
//! polyhedron's unit vertex directions; the combinatorics come from the
//! direction tables, so vertex-free (ideal, hyperideal) configurations keep
//! their face adjacency and dihedral angles.

use nalgebra::{DMatrix, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::isometry::Isometry;
use crate::spaceform::{
    dist_rep, intersection_angle, lift, order_ring, plane_from_center,
    plane_through_points, point_along, project, Chart, GeodesicPlane, PlaneMeet, SpaceForm,
};
use crate::tables::PlatonicKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Platonic,
    Truncated,
    Rectified,
    Pyramid,
    Kis,
}

/// Size parameter semantics vary by family and space: hyperbolic Platonic
/// solids use the face-sphere center norm, spherical ones the chart norm of
/// the vertices, Euclidean ones the face-plane offset.
#[derive(Clone, Copy, Debug)]
pub struct SolidSpec {
    pub p: usize,
    pub q: usize,
    pub family: Family,
    pub a: f64,
    pub space: SpaceForm,
    pub n: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Finite,
    Ideal,
    Hyperideal,
    Edgeless,
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceClass {
    /// Lies on an original face plane of the base Platonic solid.
    Primary,
    /// Vertex-truncation face (the q-gons of TP/RP).
    Cut,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeClass {
    /// Edge of a Platonic solid.
    Plain,
    /// Big-face/big-face edge of a truncation (the remaining middle segment).
    Alpha,
    /// Big-face/small-face edge.
    Beta,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub plane: GeodesicPlane,
    pub axis: Vector3<f64>,
    pub gonality: usize,
    pub class: FaceClass,
    /// Vertex ids, cyclic, counterclockwise seen from outside; empty when the
    /// solid carries no vertices.
    pub ring: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
pub struct EdgeInfo {
    pub faces: (usize, usize),
    pub vertices: Option<(usize, usize)>,
    pub dihedral: f64,
    pub class: EdgeClass,
}

#[derive(Clone, Debug)]
pub struct Solid {
    pub spec: SolidSpec,
    pub base: PlatonicKind,
    pub faces: Vec<Face>,
    /// Lifted vertex coordinates; `None` for ideal/hyperideal/edgeless solids.
    pub vertices: Option<Vec<Vector4<f64>>>,
    pub edges: Vec<EdgeInfo>,
    pub classification: Classification,
}

impl Solid {
    pub fn space(&self) -> SpaceForm {
        self.spec.space
    }

    pub fn vertex_chart(&self, i: usize) -> Vector3<f64> {
        let v = &self.vertices.as_ref().expect("solid has vertices")[i];
        match project(self.space(), v) {
            Chart::Finite(c) => c,
            Chart::Infinity => panic!("vertex at projection pole"),
        }
    }

    /// Geodesic length of an edge (requires vertices).
    pub fn edge_length(&self, e: usize) -> Result<f64> {
        let verts = self
            .vertices
            .as_ref()
            .ok_or_else(|| Error::Domain("solid has no vertices".into()))?;
        let (i, j) = self.edges[e]
            .vertices
            .ok_or_else(|| Error::Domain("edge has no endpoints".into()))?;
        Ok(dist_rep(self.space(), &verts[i], &verts[j]))
    }

    /// First edge of the given class, if any.
    pub fn edge_of_class(&self, class: EdgeClass) -> Option<usize> {
        self.edges.iter().position(|e| e.class == class)
    }

    pub fn dihedral_of_class(&self, class: EdgeClass) -> Option<f64> {
        self.edge_of_class(class).map(|e| self.edges[e].dihedral)
    }

    /// Maximum spread of edge lengths within each edge class.
    pub fn edge_length_spread(&self) -> Result<f64> {
        let mut spread: f64 = 0.0;
        for class in [EdgeClass::Plain, EdgeClass::Alpha, EdgeClass::Beta] {
            let lens: Vec<f64> = self
                .edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.class == class && e.vertices.is_some())
                .map(|(i, _)| self.edge_length(i))
                .collect::<Result<_>>()?;
            if let (Some(lo), Some(hi)) = (
                lens.iter().cloned().reduce(f64::min),
                lens.iter().cloned().reduce(f64::max),
            ) {
                spread = spread.max(hi - lo);
            }
        }
        Ok(spread)
    }
}

// ---------------------------------------------------------------------------
// Platonic construction.
// ---------------------------------------------------------------------------

/// Intersection point of three (or more) oriented planes, as an unnormalized
/// representation vector (SVD null direction).
fn planes_meet_direction(space: SpaceForm, planes: &[&GeodesicPlane]) -> Vector4<f64> {
    // Zero-padded to at least 4 rows so the thin SVD exposes the null space.
    let mut rows = DMatrix::<f64>::zeros(planes.len().max(4), 4);
    for (i, pl) in planes.iter().enumerate() {
        let u = pl.u();
        let r = match space {
            SpaceForm::Hyperbolic => Vector4::new(-u.x, u.y, u.z, u.w),
            _ => u,
        };
        for k in 0..4 {
            rows[(i, k)] = r[k];
        }
    }
    let svd = rows.svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd");
    let r = vt.row(vt.nrows() - 1);
    Vector4::new(r[0], r[1], r[2], r[3])
}

/// Build a generalized Platonic solid.
///
/// `a` is the face-sphere center norm in hyperbolic space (`a > 1`), the
/// face-plane offset in Euclidean space, and the chart circumradius of the
/// vertices in the spherical chart (`0 < a < 1`).
pub fn platonic(p: usize, q: usize, a: f64, space: SpaceForm) -> Result<Solid> {
    let kind = PlatonicKind::from_pq(p, q)?;
    match space {
        SpaceForm::Hyperbolic => {
            if a <= 1.0 {
                return Err(Error::Domain(format!("hyperbolic solids need a > 1 (got {a})")));
            }
        }
        _ => {
            if a <= 0.0 {
                return Err(Error::Domain(format!("solids need a > 0 (got {a})")));
            }
            if space == SpaceForm::Spherical && a >= 1.0 {
                return Err(Error::Domain(format!(
                    "spherical vertex scale must stay inside the equator (got {a})"
                )));
            }
        }
    }

    let face_dirs = kind.face_dirs();
    let vert_dirs = kind.vertex_dirs();

    let (planes, vertices): (Vec<GeodesicPlane>, Option<Vec<Vector4<f64>>>) = match space {
        SpaceForm::Spherical => {
            let verts: Vec<Vector4<f64>> = vert_dirs.iter().map(|v| lift(space, &(a * v))).collect();
            let origin = lift(space, &Vector3::zeros());
            let planes = face_dirs
                .iter()
                .map(|d| {
                    let ring = kind.face_ring(d);
                    let pts: Vec<Vector4<f64>> = ring.iter().map(|&i| verts[i]).collect();
                    Ok(plane_through_points(space, &pts)?.oriented_toward(&origin))
                })
                .collect::<Result<Vec<_>>>()?;
            (planes, Some(verts))
        }
        _ => {
            let planes = face_dirs
                .iter()
                .map(|d| plane_from_center(space, &(a * d)))
                .collect::<Result<Vec<_>>>()?;
            (planes, None)
        }
    };

    // Vertices by plane intersection (Euclidean always; hyperbolic when the
    // meet direction is timelike).
    let mut classification = Classification::Finite;
    let vertices = match (space, vertices) {
        (SpaceForm::Spherical, Some(v)) => Some(v),
        (SpaceForm::Euclidean, _) => {
            let mut verts = Vec::with_capacity(vert_dirs.len());
            for vd in &vert_dirs {
                let incident: Vec<usize> = incident_faces(kind, &face_dirs, vd);
                let pls: Vec<&GeodesicPlane> = incident.iter().take(3).map(|&f| &planes[f]).collect();
                let d = planes_meet_direction(space, &pls);
                if d.x.abs() < 1e-12 {
                    return Err(Error::Domain("degenerate euclidean vertex".into()));
                }
                let v = d / d.x;
                verts.push(v);
            }
            Some(verts)
        }
        (SpaceForm::Hyperbolic, _) => {
            // Probe one vertex to classify, then compute all if finite.
            let vd = &vert_dirs[0];
            let incident: Vec<usize> = incident_faces(kind, &face_dirs, vd);
            // Adjacent pair meet test first.
            let adj = kind.face_adjacency();
            let (f1, f2) = adj[0];
            match intersection_angle(&planes[f1], &planes[f2])? {
                PlaneMeet::Disjoint => {
                    classification = Classification::Edgeless;
                    None
                }
                PlaneMeet::Angle(_) => {
                    let pls: Vec<&GeodesicPlane> =
                        incident.iter().take(3).map(|&f| &planes[f]).collect();
                    let d = planes_meet_direction(space, &pls);
                    let m = crate::spaceform::mink(&d, &d) / d.norm_squared();
                    if m >= 1e-11 {
                        classification = Classification::Hyperideal;
                        None
                    } else if m > -1e-11 {
                        classification = Classification::Ideal;
                        None
                    } else {
                        let mut verts = Vec::with_capacity(vert_dirs.len());
                        for vd in &vert_dirs {
                            let incident = incident_faces(kind, &face_dirs, vd);
                            let pls: Vec<&GeodesicPlane> =
                                incident.iter().take(3).map(|&f| &planes[f]).collect();
                            let mut d = planes_meet_direction(space, &pls);
                            let n = (-crate::spaceform::mink(&d, &d)).sqrt();
                            d /= n;
                            if d.x < 0.0 {
                                d = -d;
                            }
                            verts.push(d);
                        }
                        Some(verts)
                    }
                }
            }
        }
        _ => unreachable!(),
    };

    // Faces with rings.
    let faces: Vec<Face> = face_dirs
        .iter()
        .map(|d| Face {
            plane: planes[face_dirs.iter().position(|x| x == d).unwrap()],
            axis: *d,
            gonality: p,
            class: FaceClass::Primary,
            ring: if vertices.is_some() { kind.face_ring(d) } else { Vec::new() },
        })
        .collect();

    // Edges from face adjacency.
    let mut edges = Vec::new();
    if classification != Classification::Edgeless {
        for (f1, f2) in kind.face_adjacency() {
            let dihedral = match intersection_angle(&faces[f1].plane, &faces[f2].plane)? {
                PlaneMeet::Angle(t) => t,
                PlaneMeet::Disjoint => {
                    return Err(Error::Domain(
                        "inconsistent classification: adjacent faces disjoint".into(),
                    ))
                }
            };
            let vpair = if vertices.is_some() {
                let shared: Vec<usize> = faces[f1]
                    .ring
                    .iter()
                    .filter(|i| faces[f2].ring.contains(i))
                    .cloned()
                    .collect();
                debug_assert_eq!(shared.len(), 2);
                Some((shared[0], shared[1]))
            } else {
                None
            };
            edges.push(EdgeInfo { faces: (f1, f2), vertices: vpair, dihedral, class: EdgeClass::Plain });
        }
    }

    Ok(Solid {
        spec: SolidSpec { p, q, family: Family::Platonic, a, space, n: None },
        base: kind,
        faces,
        vertices,
        edges,
        classification,
    })
}

fn incident_faces(kind: PlatonicKind, face_dirs: &[Vector3<f64>], vdir: &Vector3<f64>) -> Vec<usize> {
    let (_, q) = kind.pq();
    let mut idx: Vec<usize> = (0..face_dirs.len()).collect();
    idx.sort_by(|&a, &b| face_dirs[b].dot(vdir).partial_cmp(&face_dirs[a].dot(vdir)).unwrap());
    idx.truncate(q);
    idx
}

/// Classification per the cube-type lemma: finite / ideal / hyperideal /
/// edgeless for hyperbolic Platonic-family solids, not-applicable otherwise.
pub fn classify(s: &Solid) -> Classification {
    if s.space() != SpaceForm::Hyperbolic {
        return Classification::NotApplicable;
    }
    s.classification
}

// ---------------------------------------------------------------------------
// Edge geodesics from plane pairs (vertex-free).
// ---------------------------------------------------------------------------

/// A complete geodesic along the intersection of two planes, anchored at the
/// point nearest the chart origin (the edge midpoint of a centered solid).
#[derive(Clone, Copy, Debug)]
pub(crate) struct EdgeLine {
    pub mid: Vector4<f64>,
    pub tangent: Vector4<f64>,
}

impl EdgeLine {
    pub fn at(&self, space: SpaceForm, t: f64) -> Vector4<f64> {
        point_along(space, &self.mid, &self.tangent, t)
    }

    /// Ideal endpoint in the chosen direction (hyperbolic only): the
    /// lightlike limit `mid ± tangent`.
    pub fn ideal_endpoint(&self, sign: f64) -> Vector4<f64> {
        self.mid + self.tangent * sign
    }
}

pub(crate) fn edge_line(
    space: SpaceForm,
    p1: &GeodesicPlane,
    p2: &GeodesicPlane,
) -> Result<EdgeLine> {
    // Null space of the two incidence rows: a 2-dimensional subspace.
    // Zero-padded to 4 rows so the thin SVD exposes the null space.
    let mut rows = DMatrix::<f64>::zeros(4, 4);
    for (i, pl) in [p1, p2].iter().enumerate() {
        let u = pl.u();
        let r = match space {
            SpaceForm::Hyperbolic => Vector4::new(-u.x, u.y, u.z, u.w),
            _ => u,
        };
        for k in 0..4 {
            rows[(i, k)] = r[k];
        }
    }
    let svd = rows.svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd");
    let e = vt.row(2);
    let f = vt.row(3);
    let e = Vector4::new(e[0], e[1], e[2], e[3]);
    let f = Vector4::new(f[0], f[1], f[2], f[3]);

    let origin = lift(space, &Vector3::zeros());
    let pair = |a: &Vector4<f64>, b: &Vector4<f64>| -> f64 {
        match space {
            SpaceForm::Hyperbolic => crate::spaceform::mink(a, b),
            _ => a.dot(b),
        }
    };

    match space {
        SpaceForm::Euclidean => {
            // Affine line: points with nonzero w-component span the line.
            // Find the point of the subspace with w = 1 nearest the origin.
            let dir = if e.x.abs() > f.x.abs() { (e / e.x, f - e * (f.x / e.x)) } else { (f / f.x, e - f * (e.x / f.x)) };
            let (p0, d) = dir;
            let dv = Vector3::new(d.y, d.z, d.w);
            if dv.norm() < 1e-12 {
                return Err(Error::Domain("parallel planes have no edge line".into()));
            }
            let dvn = dv / dv.norm();
            let y0 = Vector3::new(p0.y, p0.z, p0.w);
            let y = y0 - dvn * y0.dot(&dvn);
            Ok(EdgeLine {
                mid: Vector4::new(1.0, y.x, y.y, y.z),
                tangent: Vector4::new(0.0, dvn.x, dvn.y, dvn.z),
            })
        }
        _ => {
            // Project the origin onto the subspace with the space's pairing.
            let g11 = pair(&e, &e);
            let g12 = pair(&e, &f);
            let g22 = pair(&f, &f);
            let b1 = pair(&origin, &e);
            let b2 = pair(&origin, &f);
            let det = g11 * g22 - g12 * g12;
            if det.abs() < 1e-300 {
                return Err(Error::Domain("degenerate edge line".into()));
            }
            let alpha = (b1 * g22 - b2 * g12) / det;
            let beta = (g11 * b2 - g12 * b1) / det;
            let proj = e * alpha + f * beta;
            let norm2 = pair(&proj, &proj);
            let mid = match space {
                SpaceForm::Hyperbolic => {
                    if norm2 >= 0.0 {
                        return Err(Error::Domain(
                            "edge line does not meet the hyperbolic plane in front of the origin".into(),
                        ));
                    }
                    let mut m = proj / (-norm2).sqrt();
                    if m.x < 0.0 {
                        m = -m;
                    }
                    m
                }
                _ => {
                    let mut m = proj / norm2.sqrt();
                    if pair(&m, &origin) < 0.0 {
                        m = -m;
                    }
                    m
                }
            };
            // Unit spacelike tangent within the subspace, orthogonal to mid.
            let w = if pair(&e, &mid).abs() < pair(&f, &mid).abs() { e } else { f };
            let t0 = match space {
                SpaceForm::Hyperbolic => w + mid * pair(&w, &mid),
                _ => w - mid * pair(&w, &mid),
            };
            let tn = pair(&t0, &t0).sqrt();
            Ok(EdgeLine { mid, tangent: t0 / tn })
        }
    }
}

// ---------------------------------------------------------------------------
// Truncation and rectification.
// ---------------------------------------------------------------------------

struct BaseCombinatorics {
    kind: PlatonicKind,
    /// edge -> (endpoint vertex-direction indices, incident face indices)
    edges: Vec<((usize, usize), (usize, usize))>,
    /// face ring as vertex-direction indices
    rings: Vec<Vec<usize>>,
}

fn base_combinatorics(kind: PlatonicKind) -> BaseCombinatorics {
    let face_dirs = kind.face_dirs();
    let rings: Vec<Vec<usize>> = face_dirs.iter().map(|d| kind.face_ring(d)).collect();
    let mut edges = Vec::new();
    for (f1, f2) in kind.face_adjacency() {
        let shared: Vec<usize> = rings[f1].iter().filter(|i| rings[f2].contains(i)).cloned().collect();
        debug_assert_eq!(shared.len(), 2);
        edges.push(((shared[0], shared[1]), (f1, f2)));
    }
    BaseCombinatorics { kind, edges, rings }
}

struct EdgeGeometry {
    line: EdgeLine,
    /// Tangent sign that moves toward endpoint 0 (resp. 1 = opposite).
    toward_first: f64,
}

fn edge_geometry(s: &Solid, combi: &BaseCombinatorics) -> Result<Vec<EdgeGeometry>> {
    let space = s.space();
    let vert_dirs = combi.kind.vertex_dirs();
    combi
        .edges
        .iter()
        .map(|&((va, _vb), (f1, f2))| {
            let line = edge_line(space, &s.faces[f1].plane, &s.faces[f2].plane)?;
            let probe = |sign: f64| -> f64 {
                let p = line.at(space, sign * 0.05);
                match project(space, &p) {
                    Chart::Finite(c) => c.normalize().dot(&vert_dirs[va]),
                    Chart::Infinity => -2.0,
                }
            };
            let toward_first = if probe(1.0) >= probe(-1.0) { 1.0 } else { -1.0 };
            Ok(EdgeGeometry { line, toward_first })
        })
        .collect()
}

/// Cut position/corner-distance mismatch for the regular truncation, using
/// the corner of face 0 at its first ring vertex.
fn truncation_mismatch(
    s: &Solid,
    combi: &BaseCombinatorics,
    geom: &[EdgeGeometry],
    m: f64,
) -> f64 {
    let space = s.space();
    let ring = &combi.rings[0];
    let v = ring[0];
    let prev = ring[ring.len() - 1];
    let next = ring[1];
    let c1 = cut_point(space, combi, geom, v, prev, m);
    let c2 = cut_point(space, combi, geom, v, next, m);
    dist_rep(space, &c1, &c2) - 2.0 * m
}

fn edge_index(combi: &BaseCombinatorics, a: usize, b: usize) -> usize {
    combi
        .edges
        .iter()
        .position(|&((x, y), _)| (x == a && y == b) || (x == b && y == a))
        .expect("edge exists")
}

/// Cut point on edge {near, far} at arc distance m from the midpoint toward `near`.
fn cut_point(
    space: SpaceForm,
    combi: &BaseCombinatorics,
    geom: &[EdgeGeometry],
    near: usize,
    far: usize,
    m: f64,
) -> Vector4<f64> {
    let e = edge_index(combi, near, far);
    let ((va, _), _) = combi.edges[e];
    let sign = if va == near { geom[e].toward_first } else { -geom[e].toward_first };
    geom[e].line.at(space, sign * m)
}

/// Regular truncation cut offset: solves corner-edge = middle-edge by
/// bisection to 1e-12 (design decision D3 of the solid constructors).
fn solve_regular_cut(s: &Solid, combi: &BaseCombinatorics, geom: &[EdgeGeometry]) -> Result<f64> {
    let space = s.space();
    // Upper end: half edge length for finite solids, else expand until the
    // mismatch turns negative.
    let mut hi = match (&s.vertices, space) {
        (Some(verts), _) => {
            let ((va, vb), _) = combi.edges[0];
            0.5 * dist_rep(space, &verts[va], &verts[vb]) - 1e-12
        }
        (None, _) => {
            let mut h = 1.0;
            let mut found = None;
            while h < 80.0 {
                if truncation_mismatch(s, combi, geom, h) < 0.0 {
                    found = Some(h);
                    break;
                }
                h *= 1.5;
            }
            found.ok_or_else(|| {
                Error::Nonexistence("no regular truncation: corner edges never catch up".into())
            })?
        }
    };
    let mut lo = hi * 1e-9;
    let f_lo = truncation_mismatch(s, combi, geom, lo);
    let f_hi = truncation_mismatch(s, combi, geom, hi);
    if f_lo <= 0.0 || f_hi >= 0.0 {
        return Err(Error::BracketFailure { lo, hi, f_lo, f_hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if truncation_mismatch(s, combi, geom, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Truncation that also accepts hyperideal bases (needed by the kis angle
/// condition, whose family passes through base solids with no vertices).
pub(crate) fn truncate_extended(s: &Solid) -> Result<Solid> {
    if s.spec.family != Family::Platonic {
        return Err(Error::Domain("can only truncate Platonic-family solids".into()));
    }
    if s.classification == Classification::Edgeless {
        return Err(Error::Domain("edgeless solid has no edges to truncate".into()));
    }
    let combi = base_combinatorics(s.base);
    let geom = edge_geometry(s, &combi)?;
    let m = solve_regular_cut(s, &combi, &geom)?;
    build_cut_solid(s, &combi, &geom, m, Family::Truncated)
}

/// Truncate a finite Platonic solid so all faces become regular.
pub fn truncate(s: &Solid) -> Result<Solid> {
    if s.space() == SpaceForm::Hyperbolic && s.classification != Classification::Finite {
        return Err(Error::Domain(
            "truncation needs a finite solid with vertices to cut".into(),
        ));
    }
    truncate_extended(s)
}

/// Rectify a finite Platonic solid: cut vertices at the edge midpoints.
pub fn rectify(s: &Solid) -> Result<Solid> {
    if s.spec.family != Family::Platonic {
        return Err(Error::Domain("can only rectify Platonic-family solids".into()));
    }
    if s.space() == SpaceForm::Hyperbolic && s.classification != Classification::Finite {
        return Err(Error::Domain("rectification needs a finite solid".into()));
    }
    let combi = base_combinatorics(s.base);
    let geom = edge_geometry(s, &combi)?;
    build_cut_solid(s, &combi, &geom, 0.0, Family::Rectified)
}

fn build_cut_solid(
    s: &Solid,
    combi: &BaseCombinatorics,
    geom: &[EdgeGeometry],
    m: f64,
    family: Family,
) -> Result<Solid> {
    let space = s.space();
    let kind = s.base;
    let (p, q) = kind.pq();
    let vert_dirs = kind.vertex_dirs();
    let face_dirs = kind.face_dirs();
    let origin = lift(space, &Vector3::zeros());
    let rectified = family == Family::Rectified;

    // New vertices: rectified -> one per edge (midpoint); truncated -> two.
    let mut verts: Vec<Vector4<f64>> = Vec::new();
    // (edge, end-vertex-dir-index) -> vertex id
    let mut cut_id: std::collections::HashMap<(usize, usize), usize> = std::collections::HashMap::new();
    for (e, &((va, vb), _)) in combi.edges.iter().enumerate() {
        if rectified {
            verts.push(geom[e].line.mid);
            cut_id.insert((e, va), verts.len() - 1);
            cut_id.insert((e, vb), verts.len() - 1);
        } else {
            verts.push(cut_point(space, combi, geom, va, vb, m));
            cut_id.insert((e, va), verts.len() - 1);
            verts.push(cut_point(space, combi, geom, vb, va, m));
            cut_id.insert((e, vb), verts.len() - 1);
        }
    }

    // Big faces on the original planes.
    let mut faces: Vec<Face> = Vec::new();
    for (f, dir) in face_dirs.iter().enumerate() {
        let ring0 = &combi.rings[f];
        let mut ring = Vec::new();
        for k in 0..ring0.len() {
            let v = ring0[k];
            let w = ring0[(k + 1) % ring0.len()];
            let e = edge_index(combi, v, w);
            if rectified {
                ring.push(cut_id[&(e, v)]);
            } else {
                ring.push(cut_id[&(e, v)]);
                ring.push(cut_id[&(e, w)]);
            }
        }
        faces.push(Face {
            plane: s.faces[f].plane,
            axis: *dir,
            gonality: if rectified { p } else { 2 * p },
            class: FaceClass::Primary,
            ring,
        });
    }

    // Small faces at the original vertices.
    let mut small_face_of_vertex = vec![0usize; vert_dirs.len()];
    for (v, vdir) in vert_dirs.iter().enumerate() {
        let incident: Vec<usize> = combi
            .edges
            .iter()
            .enumerate()
            .filter(|(_, ((a, b), _))| *a == v || *b == v)
            .map(|(e, _)| e)
            .collect();
        debug_assert_eq!(incident.len(), q);
        let ids: Vec<usize> = incident.iter().map(|&e| cut_id[&(e, v)]).collect();
        let chart_dirs: Vec<Vector3<f64>> = ids
            .iter()
            .map(|&i| match project(space, &verts[i]) {
                Chart::Finite(c) => c,
                Chart::Infinity => Vector3::zeros(),
            })
            .collect();
        let order = order_ring(&chart_dirs, vdir);
        let ring: Vec<usize> = order.iter().map(|&k| ids[k]).collect();
        let pts: Vec<Vector4<f64>> = ring.iter().map(|&i| verts[i]).collect();
        let plane = plane_through_points(space, &pts)?.oriented_toward(&origin);
        small_face_of_vertex[v] = faces.len();
        faces.push(Face { plane, axis: *vdir, gonality: q, class: FaceClass::Cut, ring });
    }

    // Edges.
    let mut edges: Vec<EdgeInfo> = Vec::new();
    if !rectified {
        // middle segments: between the two cuts of each original edge
        for (e, &((va, vb), (f1, f2))) in combi.edges.iter().enumerate() {
            let dihedral = intersection_angle(&faces[f1].plane, &faces[f2].plane)?.angle()?;
            edges.push(EdgeInfo {
                faces: (f1, f2),
                vertices: Some((cut_id[&(e, va)], cut_id[&(e, vb)])),
                dihedral,
                class: EdgeClass::Alpha,
            });
        }
    }
    // corner segments: around each original vertex, consecutive cuts share a
    // big face; they bound (big face, small face).
    for (v, _) in vert_dirs.iter().enumerate() {
        let small = small_face_of_vertex[v];
        let ring = faces[small].ring.clone();
        for k in 0..ring.len() {
            let i1 = ring[k];
            let i2 = ring[(k + 1) % ring.len()];
            // find the big face containing both cut vertices
            let big = faces
                .iter()
                .position(|f| f.class == FaceClass::Primary && f.ring.contains(&i1) && f.ring.contains(&i2))
                .ok_or_else(|| Error::Domain("corner cut does not lie on a big face".into()))?;
            let dihedral = intersection_angle(&faces[big].plane, &faces[small].plane)?.angle()?;
            edges.push(EdgeInfo {
                faces: (big, small),
                vertices: Some((i1, i2)),
                dihedral,
                class: EdgeClass::Beta,
            });
        }
    }

    Ok(Solid {
        spec: SolidSpec { family, ..s.spec },
        base: kind,
        faces,
        vertices: Some(verts),
        edges,
        classification: Classification::Finite,
    })
}

/// Angles of the ideal regular truncation of a hyperideal base: the cut
/// points sit at the ideal endpoints of the base's edge geodesics. Returns
/// (alpha, beta).
pub(crate) fn ideal_truncation_angles(s: &Solid) -> Result<(f64, f64)> {
    let space = s.space();
    if space != SpaceForm::Hyperbolic || s.classification != Classification::Hyperideal {
        return Err(Error::Domain("ideal truncation limit needs a hyperideal base".into()));
    }
    let combi = base_combinatorics(s.base);
    let geom = edge_geometry(s, &combi)?;
    let alpha = s.edges[0].dihedral;
    // corner plane at vertex direction 0: ideal endpoints of its edges
    let v = 0usize;
    let mut pts = Vec::new();
    for (e, &((va, vb), _)) in combi.edges.iter().enumerate() {
        if va == v || vb == v {
            let sign = if va == v { geom[e].toward_first } else { -geom[e].toward_first };
            pts.push(geom[e].line.ideal_endpoint(sign));
        }
    }
    let origin = lift(space, &Vector3::zeros());
    let cutplane = plane_through_points(space, &pts)?.oriented_toward(&origin);
    // beta against a face containing vertex 0
    let f = combi
        .rings
        .iter()
        .position(|r| r.contains(&v))
        .expect("vertex on some face");
    let beta = intersection_angle(&s.faces[f].plane, &cutplane)?.angle()?;
    Ok((alpha, beta))
}

/// Largest chart norm among the vertices (ideality measure of a cut solid).
pub(crate) fn max_vertex_norm(s: &Solid) -> f64 {
    match &s.vertices {
        None => f64::INFINITY,
        Some(verts) => verts
            .iter()
            .map(|v| match project(s.space(), v) {
                Chart::Finite(c) => c.norm(),
                Chart::Infinity => f64::INFINITY,
            })
            .fold(0.0, f64::max),
    }
}

/// Verify that rotating a solid by its face symmetry permutes faces within
/// plane tolerance (used by tests and the pyramid checks).
pub(crate) fn rotation_permutes_faces(s: &Solid, axis: &Vector3<f64>, angle: f64) -> Result<f64> {
    let rot = Isometry::rotation(s.space(), axis, angle)?;
    let mut worst: f64 = 0.0;
    for f in &s.faces {
        let img = rot.apply_plane(&f.plane);
        let best = s
            .faces
            .iter()
            .map(|g| {
                let d = (img.u() - g.plane.u()).norm().min((img.u() + g.plane.u()).norm());
                d
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cube_dihedral_examples() {
        // a = sqrt(2+sqrt 5): 72 degrees, finite
        let a = (2.0 + 5.0f64.sqrt()).sqrt();
        let s = platonic(4, 3, a, SpaceForm::Hyperbolic).unwrap();
        assert_eq!(s.classification, Classification::Finite);
        assert_relative_eq!(s.edges[0].dihedral.to_degrees(), 72.0, epsilon = 1e-10);

        // ideal octahedron at sqrt 3 with 90 degrees
        let s = platonic(3, 4, 3.0f64.sqrt(), SpaceForm::Hyperbolic).unwrap();
        assert!(matches!(s.classification, Classification::Ideal));
        assert_relative_eq!(s.edges[0].dihedral.to_degrees(), 90.0, epsilon = 1e-9);

        // tetrahedron at a = 3: 60 degrees (ideal)
        let s = platonic(3, 3, 3.0, SpaceForm::Hyperbolic).unwrap();
        assert_relative_eq!(s.edges[0].dihedral.to_degrees(), 60.0, epsilon = 1e-9);
    }

    #[test]
    fn cube_classification_thresholds() {
        assert_eq!(platonic(4, 3, 2.0, SpaceForm::Hyperbolic).unwrap().classification, Classification::Finite);
        assert_eq!(platonic(4, 3, 1.6, SpaceForm::Hyperbolic).unwrap().classification, Classification::Hyperideal);
        assert_eq!(platonic(4, 3, 1.2, SpaceForm::Hyperbolic).unwrap().classification, Classification::Edgeless);
        // +-1e-9 bracketing at sqrt 3 and sqrt 2
        let s3 = 3.0f64.sqrt();
        assert_eq!(platonic(4, 3, s3 + 1e-9, SpaceForm::Hyperbolic).unwrap().classification, Classification::Finite);
        assert_eq!(platonic(4, 3, s3 - 1e-9, SpaceForm::Hyperbolic).unwrap().classification, Classification::Hyperideal);
        let s2 = 2.0f64.sqrt();
        assert_eq!(platonic(4, 3, s2 + 1e-9, SpaceForm::Hyperbolic).unwrap().classification, Classification::Hyperideal);
        assert_eq!(platonic(4, 3, s2 - 1e-9, SpaceForm::Hyperbolic).unwrap().classification, Classification::Edgeless);
    }

    #[test]
    fn closed_form_dihedrals_on_random_scales() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = 1.8 + 3.0 * rng.gen::<f64>();
            let cube = platonic(4, 3, a, SpaceForm::Hyperbolic).unwrap();
            assert_relative_eq!(cube.edges[0].dihedral.cos(), 1.0 / (a * a - 1.0), epsilon = 1e-10);
            let tetra = platonic(3, 3, 2.0 + a, SpaceForm::Hyperbolic).unwrap();
            let at = 2.0 + a;
            assert_relative_eq!(
                tetra.edges[0].dihedral.cos(),
                (at * at + 3.0) / (3.0 * (at * at - 1.0)),
                epsilon = 1e-10
            );
            let octa = platonic(3, 4, a, SpaceForm::Hyperbolic).unwrap();
            assert_relative_eq!(
                octa.edges[0].dihedral.cos(),
                (3.0 - a * a) / (3.0 * (a * a - 1.0)),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn finite_cube_vertex_formula() {
        let a = 2.4;
        let s = platonic(4, 3, a, SpaceForm::Hyperbolic).unwrap();
        let t = (a - (a * a - 3.0).sqrt()) / 3.0 * 3.0f64.sqrt(); // norm of (t,t,t) with t = (a - sqrt(a^2-3))/3
        for i in 0..8 {
            let c = s.vertex_chart(i);
            assert_relative_eq!(c.norm(), t, epsilon = 1e-10);
            // components all equal magnitude
            assert_relative_eq!(c.x.abs(), c.y.abs(), epsilon = 1e-10);
            assert_relative_eq!(c.x.abs(), c.z.abs(), epsilon = 1e-10);
        }
    }

    #[test]
    fn euclidean_truncated_octahedron_angles() {
        let s = platonic(3, 4, 1.0, SpaceForm::Euclidean).unwrap();
        let t = truncate(&s).unwrap();
        let alpha = t.dihedral_of_class(EdgeClass::Alpha).unwrap();
        let beta = t.dihedral_of_class(EdgeClass::Beta).unwrap();
        assert_relative_eq!(alpha, (-1.0f64 / 3.0).acos(), epsilon = 1e-10);
        assert_relative_eq!(beta, (-1.0f64 / 3.0f64.sqrt()).acos(), epsilon = 1e-10);
        // standard-coordinates oracle: truncated octahedron with vertices the
        // permutations of (0, +-1, +-2) has square faces at distance 2 and
        // hexagon faces on planes x+y+z = +-... ; angle between hexagon planes
        // (1,1,1)/sqrt3 and (1,1,-1)/sqrt3 is arccos(-1/3); hexagon-square is
        // arccos(-1/sqrt3).
        let n1 = Vector3::new(1.0, 1.0, 1.0).normalize();
        let n2 = Vector3::new(1.0, 1.0, -1.0).normalize();
        assert_relative_eq!((-(n1.dot(&n2)) as f64).acos(), alpha, epsilon = 1e-12);
        let nsq = Vector3::new(0.0, 0.0, 1.0);
        assert_relative_eq!((-(n1.dot(&nsq)) as f64).acos(), beta, epsilon = 1e-12);
        assert_eq!(t.faces.len(), 14);
        // truncation edge regularity
        assert!(t.edge_length_spread().unwrap() < 1e-9);
        let l_alpha = t.edge_length(t.edge_of_class(EdgeClass::Alpha).unwrap()).unwrap();
        let l_beta = t.edge_length(t.edge_of_class(EdgeClass::Beta).unwrap()).unwrap();
        assert_relative_eq!(l_alpha, l_beta, epsilon = 1e-9);
    }

    #[test]
    fn euclidean_truncated_cube_angles() {
        let s = platonic(4, 3, 1.0, SpaceForm::Euclidean).unwrap();
        let t = truncate(&s).unwrap();
        let alpha = t.dihedral_of_class(EdgeClass::Alpha).unwrap().to_degrees();
        let beta = t.dihedral_of_class(EdgeClass::Beta).unwrap().to_degrees();
        assert_relative_eq!(alpha, 90.0, epsilon = 1e-9);
        assert_relative_eq!(beta, 125.26438968275465, epsilon = 1e-9);
        assert_relative_eq!(alpha + 2.0 * beta, 340.5287793655093, epsilon = 1e-8);
    }

    #[test]
    fn rectified_tetrahedron_is_octahedron() {
        let s = platonic(3, 3, 1.0, SpaceForm::Euclidean).unwrap();
        let r = rectify(&s).unwrap();
        // combinatorics of the octahedron: 8 triangles, 6 vertices, 12 edges
        assert_eq!(r.faces.len(), 8);
        assert!(r.faces.iter().all(|f| f.gonality == 3));
        assert_eq!(r.vertices.as_ref().unwrap().len(), 6);
        assert_eq!(r.edges.len(), 12);
        // and it is a regular octahedron: all dihedrals equal
        for e in &r.edges {
            assert_relative_eq!(e.dihedral, (-1.0f64 / 3.0).acos(), epsilon = 1e-9);
        }
    }

    #[test]
    fn spherical_cube_at_120_degrees() {
        let a = 1.0 / 3.0f64.sqrt();
        let s = platonic(4, 3, a, SpaceForm::Spherical).unwrap();
        assert_relative_eq!(s.edges[0].dihedral.to_degrees(), 120.0, epsilon = 1e-9);
        for e in &s.edges {
            assert_relative_eq!(e.dihedral.to_degrees(), 120.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn hyperideal_truncation_matches_vertex_route_on_finite_solid() {
        // For a finite hyperbolic cube the plane-pair truncation must agree
        // with what the vertex picture says: cut distance from the midpoint
        // is half-edge minus cut depth, and corner edges equal middle edges.
        let s = platonic(4, 3, 2.2, SpaceForm::Hyperbolic).unwrap();
        let t = truncate(&s).unwrap();
        assert!(t.edge_length_spread().unwrap() < 1e-9);
        assert_eq!(t.faces.len(), 14);
    }

    #[test]
    fn ideal_truncation_angle_identity() {
        // At any hyperideal base, the ideal-vertex figure forces
        // alpha + 2 beta = pi.
        for a in [1.3, 1.35, 1.5, 1.6] {
            let s = platonic(3, 4, a, SpaceForm::Hyperbolic).unwrap();
            assert_eq!(s.classification, Classification::Hyperideal);
            let (alpha, beta) = ideal_truncation_angles(&s).unwrap();
            assert_relative_eq!(alpha + 2.0 * beta, std::f64::consts::PI, epsilon = 1e-9);
        }
    }
}
