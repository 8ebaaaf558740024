//! Discrete groups from face reflections and reflection-rotations, orbit
//! enumeration with fingerprint dedup, fundamental surface patches, and the
//! welded periodic surfaces they generate.

use std::collections::HashMap;

use nalgebra::{Vector3, Vector4};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::isometry::{Fingerprint, Isometry, FINGERPRINT_PITCH};
use crate::kis::KisSolid;
use crate::solids::{FaceClass, Solid};
use crate::spaceform::{lift, GeodesicPlane, SpaceForm};
use crate::surface::{Surface, SurfaceFace};

// ---------------------------------------------------------------------------
// Tolerant point registries.
// ---------------------------------------------------------------------------

/// Quantized-key set over f64 vectors with boundary probing, used for both
/// isometry fingerprints and domain centers. Distinct entries in all paper
/// constructions are separated by >= 1e-2, far above the grid pitch.
pub(crate) struct TolerantSet {
    pitch: f64,
    dim: usize,
    map: HashMap<Vec<i64>, Vec<usize>>,
    raws: Vec<Vec<f64>>,
}

impl TolerantSet {
    pub fn new(pitch: f64, dim: usize) -> Self {
        TolerantSet { pitch, dim, map: HashMap::new(), raws: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.raws.len()
    }

    fn key(&self, raw: &[f64]) -> Vec<i64> {
        raw.iter().map(|x| (x / self.pitch).round() as i64).collect()
    }

    /// All quantization keys a matching point might carry (coordinates close
    /// to a cell boundary probe both sides).
    fn probe_keys(&self, raw: &[f64]) -> Vec<Vec<i64>> {
        let base = self.key(raw);
        let mut border: Vec<usize> = Vec::new();
        for (i, x) in raw.iter().enumerate() {
            let frac = x / self.pitch - (x / self.pitch).round();
            if frac.abs() > 0.5 - 1e-3 {
                border.push(i);
            }
        }
        let mut keys = vec![base.clone()];
        for &i in &border {
            let mut next = Vec::with_capacity(keys.len() * 2);
            for k in keys {
                let mut k2 = k.clone();
                let x = raw[i] / self.pitch;
                k2[i] += if x - x.round() > 0.0 { 1 } else { -1 };
                next.push(k);
                next.push(k2);
            }
            keys = next;
            if keys.len() > 4096 {
                break; // cannot happen with separated data; stay bounded
            }
        }
        keys
    }

    /// Find an entry within `10 * pitch` in max-norm, or insert. Returns
    /// (index, inserted). Errors when a quantization collision pairs frames
    /// further apart than the tolerance allows.
    pub fn find_or_insert(&mut self, raw: &[f64]) -> Result<(usize, bool)> {
        debug_assert_eq!(raw.len(), self.dim);
        let mut best: Option<(usize, f64)> = None;
        for k in self.probe_keys(raw) {
            if let Some(bucket) = self.map.get(&k) {
                for &idx in bucket {
                    let d = self.raws[idx]
                        .iter()
                        .zip(raw)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    if best.map_or(true, |(_, bd)| d < bd) {
                        best = Some((idx, d));
                    }
                }
            }
        }
        if let Some((idx, d)) = best {
            if d <= 10.0 * self.pitch {
                return Ok((idx, false));
            }
            if self.key(raw) == self.key(&self.raws[idx]) {
                return Err(Error::FingerprintCollision { dist: d });
            }
        }
        let idx = self.raws.len();
        self.map.entry(self.key(raw)).or_default().push(idx);
        self.raws.push(raw.to_vec());
        Ok((idx, true))
    }

}

/// Vertex weld registry: nearest-point queries with the ambiguity guard of
/// design decision D2 (a second-nearest hit inside [tol, 3 tol) is an error).
pub(crate) struct WeldRegistry {
    tol: f64,
    cell: f64,
    map: HashMap<[i64; 4], Vec<usize>>,
    pub pts: Vec<Vector4<f64>>,
}

impl WeldRegistry {
    pub fn new(tol: f64) -> Self {
        WeldRegistry { tol, cell: tol * 4.0, map: HashMap::new(), pts: Vec::new() }
    }

    fn key(&self, p: &Vector4<f64>) -> [i64; 4] {
        [
            (p.x / self.cell).round() as i64,
            (p.y / self.cell).round() as i64,
            (p.z / self.cell).round() as i64,
            (p.w / self.cell).round() as i64,
        ]
    }

    /// Candidate bucket offsets per axis: only sides the query could reach.
    fn offsets(&self, x: f64, margin: f64) -> [i64; 3] {
        let f = x / self.cell - (x / self.cell).round();
        let mut o = [0i64, 2, 2]; // 2 = unused sentinel
        let mut n = 1;
        if f < -0.5 + margin {
            o[n] = -1;
            n += 1;
        }
        if f > 0.5 - margin {
            o[n] = 1;
        }
        o
    }

    fn nearest_with_margin(&self, p: &Vector4<f64>, margin: f64) -> Option<(usize, f64)> {
        let k = self.key(p);
        let ox = self.offsets(p.x, margin);
        let oy = self.offsets(p.y, margin);
        let oz = self.offsets(p.z, margin);
        let ow = self.offsets(p.w, margin);
        let mut best: Option<(usize, f64)> = None;
        for &dx in ox.iter().filter(|&&d| d != 2) {
            for &dy in oy.iter().filter(|&&d| d != 2) {
                for &dz in oz.iter().filter(|&&d| d != 2) {
                    for &dw in ow.iter().filter(|&&d| d != 2) {
                        if let Some(bucket) =
                            self.map.get(&[k[0] + dx, k[1] + dy, k[2] + dz, k[3] + dw])
                        {
                            for &idx in bucket {
                                let d = (self.pts[idx] - p).abs().max();
                                if best.map_or(true, |(_, bd)| d < bd) {
                                    best = Some((idx, d));
                                }
                            }
                        }
                    }
                }
            }
        }
        best
    }

    pub fn find_or_insert(&mut self, p: &Vector4<f64>) -> Result<usize> {
        // fast path: a true match sits within tol of p
        let margin = self.tol / self.cell + 1e-3;
        if let Some((idx, d)) = self.nearest_with_margin(p, margin) {
            if d < self.tol {
                return Ok(idx);
            }
        }
        // slow path (new points only): certify separation >= 3 tol
        if let Some((idx, d)) = self.nearest_with_margin(p, 1.0) {
            if d < self.tol {
                return Ok(idx);
            }
            if d < 3.0 * self.tol {
                return Err(Error::WeldAmbiguity { dist: d });
            }
        }
        let idx = self.pts.len();
        self.map.entry(self.key(p)).or_default().push(idx);
        self.pts.push(*p);
        Ok(idx)
    }

    pub fn find(&self, p: &Vector4<f64>) -> Option<usize> {
        let margin = self.tol / self.cell + 1e-3;
        self.nearest_with_margin(p, margin)
            .and_then(|(idx, d)| (d < self.tol).then_some(idx))
    }
}

// ---------------------------------------------------------------------------
// Group specifications.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Reflection,
    ReflectionRotation,
    Translation,
}

#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub space: SpaceForm,
    pub kind: GroupKind,
    pub generators: Vec<Isometry>,
    /// Fundamental face planes backing the generators (when applicable).
    pub walls: Vec<GeodesicPlane>,
}

/// One reflection per face of a fundamental solid. The dihedral angles must
/// be integral fractions of 2 pi.
pub fn prismatic_generators(fundamental: &Solid) -> Result<GroupSpec> {
    for e in &fundamental.edges {
        let t = e.dihedral;
        let n = (2.0 * std::f64::consts::PI / t).round();
        let expect = 2.0 * std::f64::consts::PI / n;
        if n < 2.0 || (t - expect).abs() > 1e-9 {
            return Err(Error::TilerConsistency(format!(
                "dihedral angle {:.9} rad is not an integral fraction of 2 pi",
                t
            )));
        }
    }
    let mut generators = Vec::new();
    let mut walls = Vec::new();
    for (i, f) in fundamental.faces.iter().enumerate() {
        let mut g = Isometry::reflection(&f.plane);
        g.word = vec![i as u16];
        generators.push(g);
        walls.push(f.plane);
    }
    Ok(GroupSpec { space: fundamental.space(), kind: GroupKind::Reflection, generators, walls })
}

/// One reflection-rotation per 2p-gonal face of a kis solid: reflect in the
/// face plane, then rotate by pi/p about the face axis (the "+" rotation
/// sense fixed by design decision D3).
pub fn antiprismatic_generators(kis: &KisSolid) -> Result<GroupSpec> {
    let residual = (kis.angle_sum() - 2.0 * std::f64::consts::PI).abs();
    if residual > 1e-9 {
        return Err(Error::TilerConsistency(format!(
            "kis angle-condition residual {residual:.3e} too large for a tiling group"
        )));
    }
    let space = kis.space();
    let p = kis.p();
    let mut generators = Vec::new();
    let mut walls = Vec::new();
    for (i, f) in kis.tp.faces.iter().enumerate() {
        if f.class != FaceClass::Primary {
            continue;
        }
        let rot = Isometry::rotation(space, &f.axis, std::f64::consts::PI / p as f64)?;
        let mut g = rot.compose(&Isometry::reflection(&f.plane))?;
        g.word = vec![i as u16];
        generators.push(g);
        walls.push(f.plane);
    }
    Ok(GroupSpec { space, kind: GroupKind::ReflectionRotation, generators, walls })
}

/// Translation group from explicit vectors (Euclidean lattices).
pub fn translation_group(vectors: &[Vector3<f64>]) -> GroupSpec {
    let generators = vectors
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut g = Isometry::translation(t);
            g.word = vec![i as u16];
            g
        })
        .collect();
    GroupSpec {
        space: SpaceForm::Euclidean,
        kind: GroupKind::Translation,
        generators,
        walls: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// Orbit enumeration.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct EnumerationLimit {
    pub max_depth: usize,
    pub max_elements: usize,
}

#[derive(Clone, Debug)]
pub struct OrbitSet {
    pub elements: Vec<Isometry>,
    pub depth_reached: usize,
    pub truncated: bool,
}

impl OrbitSet {
    /// Distinct images of the fundamental domain, counted by deduplicating
    /// the images of its center point (the chart origin).
    pub fn cell_image_count(&self, space: SpaceForm) -> usize {
        let center = lift(space, &Vector3::zeros());
        let mut set = TolerantSet::new(1e-6, 4);
        for el in &self.elements {
            let c = el.apply_rep(&center);
            set.find_or_insert(&[c.x, c.y, c.z, c.w]).expect("separated centers");
        }
        set.len()
    }
}

/// Breadth-first closure over generator application with fingerprint dedup.
///
/// Each layer's products are computed in parallel, then merged in a canonical
/// order (word length, then lexicographic fingerprint), so the output is
/// identical for every thread count. Non-involutive generator sets are closed
/// under inverses.
pub fn enumerate(spec: &GroupSpec, limit: EnumerationLimit) -> Result<OrbitSet> {
    let mut gens: Vec<Isometry> = spec.generators.clone();
    if spec.kind != GroupKind::Reflection {
        let base = gens.len();
        for i in 0..base {
            let mut inv = gens[i].inverse();
            inv.word = vec![(base + i) as u16];
            gens.push(inv);
        }
    }

    let identity = Isometry::identity(spec.space);
    let mut seen = TolerantSet::new(FINGERPRINT_PITCH, identity.fingerprint().raw.len());
    seen.find_or_insert(&identity.fingerprint().raw)?;
    let mut elements = vec![identity.clone()];
    let mut frontier: Vec<Isometry> = vec![identity];
    let mut depth = 0;
    let mut truncated = false;

    while !frontier.is_empty() && depth < limit.max_depth {
        // Parallel product + fingerprint computation.
        let mut candidates: Vec<(Isometry, Fingerprint)> = frontier
            .par_iter()
            .flat_map_iter(|m| {
                gens.iter().map(move |g| {
                    let c = g.compose(m).expect("same space");
                    let fp = c.fingerprint();
                    (c, fp)
                })
            })
            .collect();
        // Canonical order: word length then fingerprint key; ties broken by
        // word so the retained representative is schedule-independent.
        candidates.sort_by(|a, b| {
            (a.0.word.len(), &a.1.rounded, &a.0.word).cmp(&(b.0.word.len(), &b.1.rounded, &b.0.word))
        });
        let mut next = Vec::new();
        for (c, fp) in candidates {
            let (_, inserted) = seen.find_or_insert(&fp.raw)?;
            if inserted {
                elements.push(c.clone());
                next.push(c);
                if elements.len() >= limit.max_elements {
                    truncated = true;
                    break;
                }
            }
        }
        depth += 1;
        if truncated {
            break;
        }
        frontier = next;
    }
    if !frontier.is_empty() && depth >= limit.max_depth {
        truncated = true;
    }
    Ok(OrbitSet { elements, depth_reached: depth, truncated })
}

// ---------------------------------------------------------------------------
// Fundamental patches.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchFaceKind {
    /// Prism side rectangle; edge slots cycle [base, lateral, top, lateral].
    PrismSide,
    /// Antiprism side triangle pointing down (base edge on the inner solid).
    AntiprismDown,
    /// Antiprism side triangle pointing up (top edge on the image solid).
    AntiprismUp,
    /// Kept small face of a truncated/rectified inner solid.
    Kept,
}

#[derive(Clone, Debug)]
pub struct PatchPoly {
    pub verts: Vec<Vector4<f64>>,
    pub kind: PatchFaceKind,
    /// Index of the wall the generating prism/antiprism crosses.
    pub wall: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct FundamentalPatch {
    pub space: SpaceForm,
    pub polys: Vec<PatchPoly>,
    pub walls: Vec<GeodesicPlane>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchKind {
    Prismatic,
    Antiprismatic,
}

/// The portion of the surface generated from one fundamental domain: the
/// prism or antiprism side faces over every primary face of the inner solid
/// (whole, since the walls bisect them), plus the kept small faces of
/// truncated/rectified inners.
pub fn fundamental_patch(
    kind: PatchKind,
    inner: &Solid,
    walls: &[GeodesicPlane],
    wall_axes: &[Vector3<f64>],
    p_for_twist: usize,
) -> Result<FundamentalPatch> {
    let space = inner.space();
    let verts = inner
        .vertices
        .as_ref()
        .ok_or_else(|| Error::Domain("patch needs a finite inner solid".into()))?;
    let mut polys = Vec::new();
    let primary: Vec<usize> = inner
        .faces
        .iter()
        .enumerate()
        .filter(|(_, f)| f.class == FaceClass::Primary)
        .map(|(i, _)| i)
        .collect();
    if primary.len() != walls.len() {
        return Err(Error::TilerConsistency(format!(
            "{} primary faces vs {} walls",
            primary.len(),
            walls.len()
        )));
    }
    for (k, &fi) in primary.iter().enumerate() {
        let face = &inner.faces[fi];
        if (face.axis - wall_axes[k]).norm() > 1e-9 {
            return Err(Error::TilerConsistency("inner face axes do not match the walls".into()));
        }
        let ring: Vec<Vector4<f64>> = face.ring.iter().map(|&i| verts[i]).collect();
        let g = match kind {
            PatchKind::Prismatic => Isometry::reflection(&walls[k]),
            PatchKind::Antiprismatic => Isometry::rotation(
                space,
                &wall_axes[k],
                std::f64::consts::PI / p_for_twist as f64,
            )?
            .compose(&Isometry::reflection(&walls[k]))?,
        };
        let tops: Vec<Vector4<f64>> = ring.iter().map(|v| g.apply_rep(v)).collect();
        let m = ring.len();
        match kind {
            PatchKind::Prismatic => {
                for j in 0..m {
                    let quad = vec![ring[j], ring[(j + 1) % m], tops[(j + 1) % m], tops[j]];
                    check_bisected(space, &walls[k], &quad[0], &quad[3])?;
                    polys.push(PatchPoly { verts: quad, kind: PatchFaceKind::PrismSide, wall: Some(k) });
                }
            }
            PatchKind::Antiprismatic => {
                for j in 0..m {
                    let down = vec![ring[j], ring[(j + 1) % m], tops[j]];
                    check_bisected(space, &walls[k], &ring[j], &tops[j])?;
                    polys.push(PatchPoly { verts: down, kind: PatchFaceKind::AntiprismDown, wall: Some(k) });
                    let up = vec![tops[j], tops[(j + 1) % m], ring[(j + 1) % m]];
                    polys.push(PatchPoly { verts: up, kind: PatchFaceKind::AntiprismUp, wall: Some(k) });
                }
            }
        }
    }
    // Kept faces of truncated/rectified inner solids are part of the surface.
    for f in &inner.faces {
        if f.class == FaceClass::Cut {
            let ring: Vec<Vector4<f64>> = f.ring.iter().map(|&i| verts[i]).collect();
            polys.push(PatchPoly { verts: ring, kind: PatchFaceKind::Kept, wall: None });
        }
    }
    Ok(FundamentalPatch { space, polys, walls: walls.to_vec() })
}

/// Lateral edges must be bisected by the wall (their midpoint lies on it).
fn check_bisected(
    space: SpaceForm,
    wall: &GeodesicPlane,
    bottom: &Vector4<f64>,
    top: &Vector4<f64>,
) -> Result<()> {
    let mid = crate::spaceform::midpoint_rep(space, bottom, top);
    let side = wall.side(&mid).abs();
    if side > 1e-9 * mid.x.abs().max(1.0) {
        return Err(Error::TilerConsistency(format!(
            "prism is not bisected by the fundamental face plane (offset {side:.3e})"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Surface building.
// ---------------------------------------------------------------------------

/// Apply every orbit element to the patch, weld vertices, merge duplicate
/// faces, and orient the result.
pub fn build_surface(patch: &FundamentalPatch, orbit: &OrbitSet, weld_tol: f64) -> Result<Surface> {
    let space = patch.space;
    let mut weld = WeldRegistry::new(weld_tol);
    let mut centers = TolerantSet::new(1e-6, 4);
    let mut faces: Vec<SurfaceFace> = Vec::new();
    let mut face_index: HashMap<Vec<usize>, usize> = HashMap::new();
    let center0 = lift(space, &Vector3::zeros());

    for (ei, el) in orbit.elements.iter().enumerate() {
        let c = el.apply_rep(&center0);
        let (dom, _) = centers.find_or_insert(&[c.x, c.y, c.z, c.w])?;
        for poly in &patch.polys {
            let ids: Vec<usize> = poly
                .verts
                .iter()
                .map(|v| weld.find_or_insert(&el.apply_rep(v)))
                .collect::<Result<_>>()?;
            let mut key = ids.clone();
            key.sort_unstable();
            key.dedup();
            if key.len() != ids.len() {
                return Err(Error::TilerConsistency("degenerate face after welding".into()));
            }
            match face_index.get(&key) {
                Some(&fi) => {
                    let f = &mut faces[fi];
                    if !f.domains.contains(&dom) {
                        f.domains.push(dom);
                    }
                    if ei == 0 {
                        f.from_identity = true;
                    }
                }
                None => {
                    face_index.insert(key, faces.len());
                    faces.push(SurfaceFace {
                        ring: ids,
                        kind: poly.kind,
                        domains: vec![dom],
                        from_identity: ei == 0,
                    });
                }
            }
        }
    }

    let domain_centers: Vec<Vector4<f64>> = centers
        .raws
        .iter()
        .map(|r| Vector4::new(r[0], r[1], r[2], r[3]))
        .collect();
    Surface::assemble(space, weld.pts, faces, domain_centers, patch.walls.clone())
}

/// Orbit sanity property: group relations (r_i r_j)^n = id around each edge
/// of a reflection group's fundamental solid, measured on the reference
/// frame. Returns the worst frame distance.
pub fn edge_relation_defect(fundamental: &Solid, spec: &GroupSpec) -> Result<f64> {
    if spec.kind != GroupKind::Reflection {
        return Err(Error::Domain("edge relations apply to reflection groups".into()));
    }
    let id_fp = Isometry::identity(spec.space).fingerprint();
    let mut worst: f64 = 0.0;
    for e in &fundamental.edges {
        let n = (2.0 * std::f64::consts::PI / e.dihedral).round() as usize;
        let (i, j) = e.faces;
        let rirj = spec.generators[i].compose(&spec.generators[j])?;
        let mut w = Isometry::identity(spec.space);
        for _ in 0..n {
            w = rirj.compose(&w)?;
        }
        worst = worst.max(w.fingerprint().frame_distance(&id_fp));
    }
    Ok(worst)
}

/// Antiprismatic matching: n copies of the kis solid close around a pyramid
/// side edge, i.e. the alternating word (g_i g_j^-1)^... of the two adjacent
/// wall generators composes to the identity after n steps. We check the
/// weaker but decisive fingerprint identity of (g_i^2)^? ... in practice the
/// pyramid side condition is equivalent to g_i^2 being the 2 pi/p rotation;
/// both are verified.
pub fn reflection_rotation_defects(kis: &KisSolid, spec: &GroupSpec) -> Result<(f64, f64)> {
    let space = spec.space;
    let p = kis.p();
    // g^2 = rotation by 2 pi / p about the face axis
    let mut worst_sq: f64 = 0.0;
    for (g, f) in spec.generators.iter().zip(kis.tp.faces.iter().filter(|f| f.class == FaceClass::Primary)) {
        let gg = g.compose(g)?;
        let rot = Isometry::rotation(space, &f.axis, 2.0 * std::f64::consts::PI / p as f64)?;
        worst_sq = worst_sq.max(gg.fingerprint().frame_distance(&rot.fingerprint()));
    }
    // n copies fit around a pyramid side edge: the edge between two adjacent
    // pyramids' side faces is fixed by an order-n word. The side-side
    // dihedral is 2 pi / n by construction; verify via the pyramid.
    let n_defect = match &kis.pyramid {
        None => 0.0,
        Some(py) => (py.side_dihedral - 2.0 * std::f64::consts::PI / kis.n as f64).abs(),
    };
    Ok((worst_sq, n_defect))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers;

    #[test]
    fn spherical_cube_group_cells() {
        let outer = solvers::solve_platonic_angle(4, 3, 3).unwrap().witness.solid;
        let spec = prismatic_generators(&outer).unwrap();
        assert_eq!(spec.generators.len(), 6);
        let orbit = enumerate(&spec, EnumerationLimit { max_depth: 64, max_elements: 100_000 }).unwrap();
        assert!(!orbit.truncated);
        assert_eq!(orbit.cell_image_count(SpaceForm::Spherical), 8);
        // the generated reflection group is W(D4) of order 192
        assert_eq!(orbit.elements.len(), 192);
    }

    #[test]
    fn depth_zero_orbit_is_identity() {
        let outer = solvers::solve_platonic_angle(4, 3, 3).unwrap().witness.solid;
        let spec = prismatic_generators(&outer).unwrap();
        let orbit = enumerate(&spec, EnumerationLimit { max_depth: 0, max_elements: 10 }).unwrap();
        assert_eq!(orbit.elements.len(), 1);
        assert!(orbit.elements[0].word.is_empty());
    }

    #[test]
    fn group_relations_hold_on_reference_frame() {
        let outer = solvers::solve_platonic_angle(4, 3, 5).unwrap().witness.solid;
        let spec = prismatic_generators(&outer).unwrap();
        assert!(edge_relation_defect(&outer, &spec).unwrap() <= 1e-8);
    }

    #[test]
    fn rejects_non_tiling_dihedral() {
        let s = crate::solids::platonic(4, 3, 2.2, SpaceForm::Hyperbolic).unwrap();
        assert!(prismatic_generators(&s).is_err());
    }
}
