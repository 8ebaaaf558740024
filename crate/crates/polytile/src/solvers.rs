//! Closing-up parameter solvers: dihedral-angle targeting (a_n), prism
//! squareness (b), the kis angle condition alpha + 2 beta + 2 gamma = 2 pi,
//! and antiprism regularity. All one-dimensional solves use bisection over
//! brackets backed by the intermediate-value arguments, with a 32-point
//! pre-scan that rejects non-monotone profiles (design decision D3).

use crate::error::{Error, Result};
use crate::isometry::Isometry;
use crate::kis::{self, KisSolid};
use crate::pyramid::{self, PyramidKind};
use crate::solids::{self, Classification, FaceClass, Solid};
use crate::spaceform::SpaceForm;
use crate::tables::PlatonicKind;

pub const MAX_BISECT_ITERS: usize = 200;

/// Outcome of a bisection solve.
#[derive(Clone, Debug)]
pub struct SolveResult<W> {
    /// Solved parameter values (meaning depends on the operation).
    pub values: Vec<f64>,
    /// Independently re-measured defect at the solution.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub witness: W,
}

// ---------------------------------------------------------------------------
// Bisection engine.
// ---------------------------------------------------------------------------

fn bisect_signed(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
) -> Result<(f64, usize)> {
    let mut iters = 0;
    while iters < MAX_BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * mid.abs().max(1.0) {
            return Ok((mid, iters));
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok((mid, iters));
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    Ok((0.5 * (lo + hi), iters))
}

/// Bisect a function known to increase through zero on [lo, hi].
pub fn bisect_increasing(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<f64> {
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::BracketFailure { lo, hi, f_lo, f_hi });
    }
    Ok(bisect_signed(&mut f, lo, hi, f_lo)?.0)
}

/// Bisect a function known to decrease through zero on [lo, hi].
pub fn bisect_decreasing(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<f64> {
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo < 0.0 || f_hi > 0.0 {
        return Err(Error::BracketFailure { lo, hi, f_lo, f_hi });
    }
    Ok(bisect_signed(&mut f, lo, hi, f_lo)?.0)
}

/// Full solve: 32-point pre-scan verifying a single sign change and a
/// monotone profile, then bisection to 1e-12 relative bracket width.
pub fn solve_scanned(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    context: &str,
) -> Result<(f64, usize, (f64, f64))> {
    const SCAN: usize = 32;
    let mut xs = Vec::with_capacity(SCAN);
    let mut ys = Vec::with_capacity(SCAN);
    for i in 0..SCAN {
        let x = lo + (hi - lo) * i as f64 / (SCAN - 1) as f64;
        xs.push(x);
        ys.push(f(x)?);
    }
    let mut crossings = Vec::new();
    for i in 1..SCAN {
        if ys[i - 1].signum() != ys[i].signum() {
            crossings.push(i);
        }
    }
    if crossings.len() != 1 {
        if crossings.is_empty() {
            return Err(Error::BracketFailure { lo, hi, f_lo: ys[0], f_hi: ys[SCAN - 1] });
        }
        return Err(Error::NonMonotone { context: format!("{context}: {} sign changes", crossings.len()) });
    }
    // Monotone trend check across the scan (tolerating tiny numerical noise).
    let increasing = ys[SCAN - 1] > ys[0];
    let span = (ys[SCAN - 1] - ys[0]).abs();
    for i in 1..SCAN {
        let step = ys[i] - ys[i - 1];
        let bad = if increasing { step < -1e-7 * span.max(1.0) } else { step > 1e-7 * span.max(1.0) };
        if bad {
            return Err(Error::NonMonotone { context: context.to_string() });
        }
    }
    let i = crossings[0];
    let (value, iters) = bisect_signed(&mut f, xs[i - 1], xs[i], ys[i - 1])?;
    Ok((value, iters, (lo, hi)))
}

// ---------------------------------------------------------------------------
// Per-solid scale thresholds.
// ---------------------------------------------------------------------------

fn dihedral_at(p: usize, q: usize, a: f64, space: SpaceForm) -> Result<f64> {
    let s = solids::platonic(p, q, a, space)?;
    if s.edges.is_empty() {
        return Err(Error::Domain("edgeless".into()));
    }
    Ok(s.edges[0].dihedral)
}

/// Smallest hyperbolic scale at which adjacent face planes still meet.
pub fn edge_existence_threshold(p: usize, q: usize) -> Result<f64> {
    let mut lo = 1.0 + 1e-9; // edgeless side
    let mut hi = 8.0;
    if solids::platonic(p, q, lo, SpaceForm::Hyperbolic)?.classification == Classification::Edgeless {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let c = solids::platonic(p, q, mid, SpaceForm::Hyperbolic)?.classification;
            if c == Classification::Edgeless {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    } else {
        hi = lo;
    }
    Ok(hi)
}

/// Scale of the ideal hyperbolic solid (dihedral = the q-gon vertex-figure
/// angle).
pub fn hyperbolic_ideal_scale(p: usize, q: usize) -> Result<f64> {
    let kind = PlatonicKind::from_pq(p, q)?;
    let target = kind.ideal_dihedral();
    let lo = edge_existence_threshold(p, q)? * (1.0 + 1e-9);
    bisect_increasing(
        |a| Ok(dihedral_at(p, q, a, SpaceForm::Hyperbolic)? - target),
        lo,
        1e3,
    )
}

// ---------------------------------------------------------------------------
// Geography.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceAssignment {
    Spherical,
    /// Euclidean constructions are determined only up to similarity.
    EuclideanScaleFree,
    HyperbolicFinite,
    HyperbolicIdeal,
    Hyperideal,
}

impl SpaceAssignment {
    pub fn space_form(self) -> SpaceForm {
        match self {
            SpaceAssignment::Spherical => SpaceForm::Spherical,
            SpaceAssignment::EuclideanScaleFree => SpaceForm::Euclidean,
            _ => SpaceForm::Hyperbolic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpaceAssignment::Spherical => "spherical",
            SpaceAssignment::EuclideanScaleFree => "euclidean",
            SpaceAssignment::HyperbolicFinite => "hyperbolic-finite",
            SpaceAssignment::HyperbolicIdeal => "hyperbolic-ideal",
            SpaceAssignment::Hyperideal => "hyperbolic-hyperideal",
        }
    }
}

/// Which space realizes the Platonic solid P_{p,q} with dihedral 2 pi / n.
pub fn platonic_geography(p: usize, q: usize, n: usize) -> Result<SpaceAssignment> {
    if n < 3 {
        return Err(Error::Nonexistence(format!(
            "dihedral 2pi/{n} needs n >= 3 for a Platonic reflection group"
        )));
    }
    let kind = PlatonicKind::from_pq(p, q)?;
    let theta = 2.0 * std::f64::consts::PI / n as f64;
    let eucl = kind.euclidean_dihedral();
    let ideal = kind.ideal_dihedral();
    let tol = 1e-12;
    Ok(if (theta - eucl).abs() <= tol {
        SpaceAssignment::EuclideanScaleFree
    } else if theta > eucl {
        SpaceAssignment::Spherical
    } else if (theta - ideal).abs() <= tol {
        SpaceAssignment::HyperbolicIdeal
    } else if theta > ideal {
        SpaceAssignment::HyperbolicFinite
    } else {
        SpaceAssignment::Hyperideal
    })
}

#[derive(Clone, Debug)]
pub struct PlatonicAngleWitness {
    pub assignment: SpaceAssignment,
    pub solid: Solid,
}

/// Solve for the scale a_n with dihedral(P_{p,q}(a_n)) = 2 pi / n in the
/// space the geography table assigns.
pub fn solve_platonic_angle(p: usize, q: usize, n: usize) -> Result<SolveResult<PlatonicAngleWitness>> {
    let assignment = platonic_geography(p, q, n)?;
    let theta = 2.0 * std::f64::consts::PI / n as f64;
    match assignment {
        SpaceAssignment::EuclideanScaleFree => {
            let solid = solids::platonic(p, q, 1.0, SpaceForm::Euclidean)?;
            let residual = (solid.edges[0].dihedral - theta).abs();
            Ok(SolveResult {
                values: vec![1.0],
                residual,
                bracket: (1.0, 1.0),
                iterations: 0,
                witness: PlatonicAngleWitness { assignment, solid },
            })
        }
        SpaceAssignment::Spherical => {
            let (a, iterations, bracket) = solve_scanned(
                |a| Ok(dihedral_at(p, q, a, SpaceForm::Spherical)? - theta),
                0.02,
                0.98,
                "spherical dihedral targeting",
            )?;
            let solid = solids::platonic(p, q, a, SpaceForm::Spherical)?;
            let residual = (solid.edges[0].dihedral - theta).abs();
            Ok(SolveResult { values: vec![a], residual, bracket, iterations, witness: PlatonicAngleWitness { assignment, solid } })
        }
        SpaceAssignment::HyperbolicIdeal => {
            let a = hyperbolic_ideal_scale(p, q)?;
            let solid = solids::platonic(p, q, a, SpaceForm::Hyperbolic)?;
            let residual = (solid.edges[0].dihedral - theta).abs();
            Ok(SolveResult {
                values: vec![a],
                residual,
                bracket: (a, a),
                iterations: 0,
                witness: PlatonicAngleWitness { assignment, solid },
            })
        }
        SpaceAssignment::HyperbolicFinite | SpaceAssignment::Hyperideal => {
            let (lo, hi) = if assignment == SpaceAssignment::HyperbolicFinite {
                (hyperbolic_ideal_scale(p, q)? + 1e-6, 1e3)
            } else {
                (
                    edge_existence_threshold(p, q)? * (1.0 + 1e-9) + 1e-9,
                    hyperbolic_ideal_scale(p, q)?,
                )
            };
            let (a, iterations, bracket) = solve_scanned(
                |a| Ok(dihedral_at(p, q, a, SpaceForm::Hyperbolic)? - theta),
                lo,
                hi,
                "hyperbolic dihedral targeting",
            )?;
            let solid = solids::platonic(p, q, a, SpaceForm::Hyperbolic)?;
            let residual = (solid.edges[0].dihedral - theta).abs();
            Ok(SolveResult { values: vec![a], residual, bracket, iterations, witness: PlatonicAngleWitness { assignment, solid } })
        }
    }
}

// ---------------------------------------------------------------------------
// Prismatic inner solve.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerBase {
    Platonic,
    Truncated,
    Rectified,
}

impl InnerBase {
    pub fn name(self) -> &'static str {
        match self {
            InnerBase::Platonic => "platonic",
            InnerBase::Truncated => "truncated",
            InnerBase::Rectified => "rectified",
        }
    }
}

pub(crate) fn build_inner(p: usize, q: usize, b: f64, space: SpaceForm, base: InnerBase) -> Result<Solid> {
    let s = solids::platonic(p, q, b, space)?;
    match base {
        InnerBase::Platonic => Ok(s),
        InnerBase::Truncated => solids::truncate(&s),
        InnerBase::Rectified => solids::rectify(&s),
    }
}

#[derive(Clone, Debug)]
pub struct PrismaticWitness {
    pub fundamental: Solid,
    pub inner: Solid,
    pub base: InnerBase,
    pub prism_edge: f64,
    pub prism_height: f64,
}

fn prism_mismatch(fundamental: &Solid, inner: &Solid) -> Result<(f64, f64)> {
    let space = inner.space();
    let verts = inner
        .vertices
        .as_ref()
        .ok_or_else(|| Error::Domain("inner solid must be finite".into()))?;
    let face = inner
        .faces
        .iter()
        .find(|f| f.class == FaceClass::Primary)
        .expect("primary face");
    let wall = &fundamental.faces[0].plane;
    debug_assert!((face.axis - fundamental.faces[0].axis).norm() < 1e-12);
    let v0 = verts[face.ring[0]];
    let v1 = verts[face.ring[1]];
    let edge = crate::spaceform::dist_rep(space, &v0, &v1);
    let refl = Isometry::reflection(wall);
    let height = crate::spaceform::dist_rep(space, &v0, &refl.apply_rep(&v0));
    Ok((edge, height))
}

/// Solve for the inner scale b so the prisms between the inner solid's
/// primary faces and their wall reflections have square sides.
pub fn solve_prismatic_inner(
    p: usize,
    q: usize,
    n: usize,
    base: InnerBase,
) -> Result<SolveResult<PrismaticWitness>> {
    let outer = solve_platonic_angle(p, q, n)?;
    let assignment = outer.witness.assignment;
    let fundamental = outer.witness.solid;
    let space = assignment.space_form();

    if space == SpaceForm::Euclidean {
        if base != InnerBase::Platonic {
            return Err(Error::Nonexistence(
                "euclidean prismatic constructions exist for the cube only".into(),
            ));
        }
        // Scale-free: fix the inner solid at b = 1 and derive the wall offset
        // so the prism is exactly square (design decision D1).
        let inner = build_inner(p, q, 1.0, space, base)?;
        let edge = inner.edge_length(0)?;
        let fundamental = solids::platonic(p, q, 1.0 + edge / 2.0, space)?;
        let (edge, height) = prism_mismatch(&fundamental, &inner)?;
        return Ok(SolveResult {
            values: vec![1.0],
            residual: (height - edge).abs(),
            bracket: (1.0, 1.0),
            iterations: 0,
            witness: PrismaticWitness { fundamental, inner, base, prism_edge: edge, prism_height: height },
        });
    }

    let (lo, hi) = match space {
        SpaceForm::Hyperbolic => {
            let finite = hyperbolic_ideal_scale(p, q)?;
            (fundamental.spec.a.max(finite) + 1e-6, 1e3)
        }
        SpaceForm::Spherical => (0.02, fundamental.spec.a - 1e-6),
        SpaceForm::Euclidean => unreachable!(),
    };
    let mismatch = |b: f64| -> Result<f64> {
        let inner = build_inner(p, q, b, space, base)?;
        let (edge, height) = prism_mismatch(&fundamental, &inner)?;
        Ok(height - edge)
    };
    let (b, iterations, bracket) = solve_scanned(mismatch, lo, hi, "prism squareness")?;
    let inner = build_inner(p, q, b, space, base)?;
    let (prism_edge, prism_height) = prism_mismatch(&fundamental, &inner)?;
    Ok(SolveResult {
        values: vec![b],
        residual: (prism_height - prism_edge).abs(),
        bracket,
        iterations,
        witness: PrismaticWitness { fundamental, inner, base, prism_edge, prism_height },
    })
}

// ---------------------------------------------------------------------------
// Kis angle condition.
// ---------------------------------------------------------------------------

/// Euclidean angle sum alpha + 2 beta + 2 gamma_n for KP_{p,q}^n, when the
/// Euclidean pyramid exists (n = 2 always; otherwise the subdivision cases).
pub fn euclidean_kis_sum(p: usize, q: usize, n: usize) -> Result<Option<f64>> {
    if n == 2 {
        let k = kis::kis(p, q, 2, 1.0, SpaceForm::Euclidean)?;
        return Ok(Some(k.angle_sum()));
    }
    if PlatonicKind::from_pq(q, n).is_err() {
        return Ok(None); // no Euclidean pyramid PY_q^n
    }
    let k = kis::kis(p, q, n, 1.0, SpaceForm::Euclidean)?;
    Ok(Some(k.angle_sum()))
}

/// Which space admits the n-akis tiling KP_{p,q}^n.
pub fn antiprismatic_geography(p: usize, q: usize, n: usize) -> Result<SpaceForm> {
    if n < 2 {
        return Err(Error::Nonexistence("kis tilings need n >= 2".into()));
    }
    PlatonicKind::from_pq(p, q)?;
    match euclidean_kis_sum(p, q, n)? {
        Some(sum) => {
            let two_pi = 2.0 * std::f64::consts::PI;
            if (sum - two_pi).abs() <= 1e-9 {
                Ok(SpaceForm::Euclidean)
            } else if sum < two_pi {
                Ok(SpaceForm::Spherical)
            } else {
                Ok(SpaceForm::Hyperbolic)
            }
        }
        // No Euclidean pyramid: the angle sum already exceeds 2 pi for the
        // smaller n of the same family, and gamma grows with n.
        None => Ok(SpaceForm::Hyperbolic),
    }
}

#[derive(Clone, Debug)]
pub struct KisWitness {
    pub kis: KisSolid,
    pub space: SpaceForm,
    /// Angle sums evaluated at the bracket ends (ideal end, small/minimal end)
    /// for the hyperbolic and spherical solves.
    pub bracket_end_sums: Option<(f64, f64)>,
}

/// Scale at which the regular truncation of P_{p,q} becomes ideal (the lower
/// end of the hyperbolic kis family).
pub fn truncation_ideal_scale(p: usize, q: usize) -> Result<f64> {
    let valid = |a: f64| -> bool {
        solids::platonic(p, q, a, SpaceForm::Hyperbolic)
            .and_then(|s| solids::truncate_extended(&s))
            .is_ok()
    };
    let mut lo = edge_existence_threshold(p, q)? * (1.0 + 1e-9);
    if valid(lo) {
        return Ok(lo);
    }
    let mut hi = lo;
    loop {
        hi *= 1.05;
        if valid(hi) {
            break;
        }
        if hi > 1e4 {
            return Err(Error::Nonexistence(format!(
                "no regular truncation found for P_{p},{q} at any scale"
            )));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if valid(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Ideal-limit gamma of the matched pyramid PY_q^n.
fn ideal_gamma(q: usize, n: usize) -> Result<f64> {
    if n == 2 {
        return Ok(0.0);
    }
    match pyramid::pyramid_variant(q, n, SpaceForm::Hyperbolic)? {
        "column" => Ok(std::f64::consts::FRAC_PI_2 - std::f64::consts::PI / n as f64),
        "subdivision" => {
            let ideal = hyperbolic_ideal_scale(q, n)?;
            let py = pyramid::pyramid(q, n, ideal * (1.0 + 1e-9), SpaceForm::Hyperbolic)?;
            Ok(py.gamma)
        }
        other => Err(Error::Nonexistence(format!(
            "no ideal gamma for pyramid variant {other}"
        ))),
    }
}

/// Angle sum at the ideal end of the kis family: alpha + 2 beta of the ideal
/// regular truncation (computed from a hyperideal base via the ideal cut
/// points) plus twice the ideal pyramid gamma.
pub fn kis_ideal_end_sum(p: usize, q: usize, n: usize) -> Result<f64> {
    let a_star = truncation_ideal_scale(p, q)?;
    // Probe a hyperideal base just below the family: the ideal-vertex figure
    // makes alpha + 2 beta independent of the probe.
    let probe = solids::platonic(p, q, a_star * (1.0 - 1e-7), SpaceForm::Hyperbolic)?;
    let (alpha, beta) = solids::ideal_truncation_angles(&probe)?;
    Ok(alpha + 2.0 * beta + 2.0 * ideal_gamma(q, n)?)
}

/// Solve the kis angle condition for (a, s): the base scale and the matched
/// pyramid parameter with alpha + 2 beta + 2 gamma = 2 pi.
pub fn solve_kis_angle_condition(p: usize, q: usize, n: usize) -> Result<SolveResult<KisWitness>> {
    let space = antiprismatic_geography(p, q, n)?;
    let two_pi = 2.0 * std::f64::consts::PI;

    match space {
        SpaceForm::Euclidean => {
            let k = kis::kis(p, q, n, 1.0, SpaceForm::Euclidean)?;
            let residual = (k.angle_sum() - two_pi).abs();
            let s = pyramid_param(&k);
            Ok(SolveResult {
                values: vec![1.0, s],
                residual,
                bracket: (1.0, 1.0),
                iterations: 0,
                witness: KisWitness { kis: k, space, bracket_end_sums: None },
            })
        }
        SpaceForm::Spherical => {
            // n = 2 truncated-solid tilings: the sum grows from the
            // near-Euclidean value below 2 pi toward 3 pi at the great-sphere
            // limit.
            let hi = spherical_great_limit(p, q)?;
            let lo = 0.02;
            let sum_at = |a: f64| -> Result<f64> { Ok(kis::kis(p, q, n, a, SpaceForm::Spherical)?.angle_sum()) };
            let end_lo = sum_at(lo)?;
            let end_hi = sum_at(hi)?;
            let (a, iterations, bracket) =
                solve_scanned(|a| Ok(sum_at(a)? - two_pi), lo, hi, "spherical kis angle condition")?;
            let k = kis::kis(p, q, n, a, SpaceForm::Spherical)?;
            let residual = (k.angle_sum() - two_pi).abs();
            let s = pyramid_param(&k);
            Ok(SolveResult {
                values: vec![a, s],
                residual,
                bracket,
                iterations,
                witness: KisWitness { kis: k, space, bracket_end_sums: Some((end_lo, end_hi)) },
            })
        }
        SpaceForm::Hyperbolic => {
            let a_star = truncation_ideal_scale(p, q)?;
            let lo = a_star * (1.0 + 1e-7);
            let ideal_end = kis_ideal_end_sum(p, q, n)?;
            let sum_at = |a: f64| -> Result<f64> { Ok(kis::kis(p, q, n, a, SpaceForm::Hyperbolic)?.angle_sum()) };
            let hi = kis_upper_scale(p, q, n, lo)?;
            let end_hi = sum_at(hi)?;
            if ideal_end >= two_pi || end_hi <= two_pi {
                return Err(Error::BracketFailure {
                    lo,
                    hi,
                    f_lo: ideal_end - two_pi,
                    f_hi: end_hi - two_pi,
                });
            }
            let (a, iterations, bracket) =
                solve_scanned(|a| Ok(sum_at(a)? - two_pi), lo, hi, "hyperbolic kis angle condition")?;
            let k = kis::kis(p, q, n, a, SpaceForm::Hyperbolic)?;
            let residual = (k.angle_sum() - two_pi).abs();
            let s = pyramid_param(&k);
            Ok(SolveResult {
                values: vec![a, s],
                residual,
                bracket,
                iterations,
                witness: KisWitness { kis: k, space, bracket_end_sums: Some((ideal_end, end_hi)) },
            })
        }
    }
}

fn pyramid_param(k: &KisSolid) -> f64 {
    match &k.pyramid {
        None => 0.0,
        Some(py) => match py.kind {
            PyramidKind::Column { s, .. } => s,
            PyramidKind::Subdivision { scale } => scale,
            PyramidKind::HalfSpace { rho } => rho,
            PyramidKind::Flat { circumradius } => circumradius,
        },
    }
}

/// Base scale at which the spherical truncation's vertices reach the great
/// sphere (all dihedral angles approach pi there).
pub fn spherical_great_limit(p: usize, q: usize) -> Result<f64> {
    let norm_at = |a: f64| -> Result<f64> {
        let s = solids::platonic(p, q, a, SpaceForm::Spherical)?;
        let t = solids::truncate(&s)?;
        Ok(solids::max_vertex_norm(&t))
    };
    bisect_increasing(|a| Ok(norm_at(a)? - (1.0 - 1e-7)), 0.02, 1.0 - 1e-9)
}

/// Upper end of the hyperbolic kis bracket: near-Euclidean for subdivision
/// pyramids, minimal-pyramid-edge for column pyramids (located by pre-scan).
fn kis_upper_scale(p: usize, q: usize, n: usize, lo: f64) -> Result<f64> {
    let variant = pyramid::pyramid_variant(q, n, SpaceForm::Hyperbolic)?;
    match variant {
        "column" => {
            let min_edge = pyramid::pyramid(q, n, 1e6, SpaceForm::Hyperbolic)?.base_edge.unwrap();
            let edge_at = |a: f64| -> Result<f64> {
                let s = solids::platonic(p, q, a, SpaceForm::Hyperbolic)?;
                solids::truncate_extended(&s)?.edge_length(0)
            };
            // TP edge length decreases with a; stop where it meets the
            // minimal pyramid edge.
            let a_max = bisect_decreasing(
                |a| Ok(edge_at(a)? - min_edge * (1.0 + 1e-9)),
                lo,
                1e3,
            )?;
            Ok(a_max * (1.0 - 1e-9))
        }
        _ => {
            // Subdivision pyramids track the truncation edge all the way to
            // the small/near-Euclidean end.
            Ok((lo * 40.0).max(60.0))
        }
    }
}

// ---------------------------------------------------------------------------
// Antiprismatic inner solve.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AntiprismaticWitness {
    pub kis: KisSolid,
    pub inner: Solid,
    pub base: InnerBase,
    pub base_edge: f64,
    pub lateral_edge: f64,
    /// Spread of the lateral edges across all antiprism positions.
    pub lateral_spread: f64,
}

fn antiprism_lateral(kis: &KisSolid, inner: &Solid) -> Result<(f64, f64, f64)> {
    let space = inner.space();
    let verts = inner
        .vertices
        .as_ref()
        .ok_or_else(|| Error::Domain("inner solid must be finite".into()))?;
    let p = kis.p();
    let wall_face = &kis.tp.faces[0];
    debug_assert_eq!(wall_face.class, FaceClass::Primary);
    let face = inner
        .faces
        .iter()
        .find(|f| f.class == FaceClass::Primary)
        .expect("primary face");
    debug_assert!((face.axis - wall_face.axis).norm() < 1e-12);
    let g = Isometry::rotation(space, &wall_face.axis, std::f64::consts::PI / p as f64)?
        .compose(&Isometry::reflection(&wall_face.plane))?;
    let ring: Vec<_> = face.ring.iter().map(|&i| verts[i]).collect();
    let tops: Vec<_> = ring.iter().map(|v| g.apply_rep(v)).collect();
    let edge = crate::spaceform::dist_rep(space, &ring[0], &ring[1]);
    // lateral edge: nearest top vertex to ring[0]; by the half-step twist the
    // two nearest are equidistant.
    let mut dists: Vec<f64> = tops.iter().map(|w| crate::spaceform::dist_rep(space, &ring[0], w)).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lateral = dists[0];
    let spread = (dists[1] - dists[0]).abs();
    Ok((edge, lateral, spread))
}

/// Solve for the inner scale b making the antiprisms between the inner
/// solid's faces and their reflection-rotation images regular.
pub fn solve_antiprismatic_inner(
    p: usize,
    q: usize,
    n: usize,
    base: InnerBase,
) -> Result<SolveResult<AntiprismaticWitness>> {
    if base == InnerBase::Truncated {
        return Err(Error::Nonexistence(
            "antiprismatic constructions use platonic or rectified inners".into(),
        ));
    }
    let kis_solve = solve_kis_angle_condition(p, q, n)?;
    let kis = kis_solve.witness.kis;
    let space = kis.space();

    let (lo, hi) = match space {
        SpaceForm::Hyperbolic => (hyperbolic_ideal_scale(p, q)? + 1e-6, 200.0),
        SpaceForm::Spherical => (0.02, 0.95),
        SpaceForm::Euclidean => (0.05, 50.0),
    };
    let mismatch = |b: f64| -> Result<f64> {
        let inner = build_inner(p, q, b, space, base)?;
        let (edge, lateral, _) = antiprism_lateral(&kis, &inner)?;
        Ok(lateral - edge)
    };
    let (b, iterations, bracket) = solve_scanned(mismatch, lo, hi, "antiprism regularity")?;
    let inner = build_inner(p, q, b, space, base)?;
    let (base_edge, lateral_edge, lateral_spread) = antiprism_lateral(&kis, &inner)?;
    Ok(SolveResult {
        values: vec![b],
        residual: (lateral_edge - base_edge).abs(),
        bracket,
        iterations,
        witness: AntiprismaticWitness { kis, inner, base, base_edge, lateral_edge, lateral_spread },
    })
}

// ---------------------------------------------------------------------------
// Euclidean angle-sum table.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AngleTableRow {
    pub kind: PlatonicKind,
    pub sum2_deg: f64,
    pub sum3_deg: f64,
}

/// The ten Euclidean angle sums alpha + 2 beta + 2 gamma_n, n in {2, 3}.
pub fn euclidean_angle_table() -> Result<Vec<AngleTableRow>> {
    let kinds = [
        PlatonicKind::Tetrahedron,
        PlatonicKind::Cube,
        PlatonicKind::Octahedron,
        PlatonicKind::Dodecahedron,
        PlatonicKind::Icosahedron,
    ];
    kinds
        .iter()
        .map(|&kind| {
            let (p, q) = kind.pq();
            let s2 = euclidean_kis_sum(p, q, 2)?.expect("n=2 always euclidean-evaluable");
            let s3 = euclidean_kis_sum(p, q, 3)?
                .ok_or_else(|| Error::Nonexistence(format!("no euclidean PY for {}", kind.name())))?;
            Ok(AngleTableRow { kind, sum2_deg: s2.to_degrees(), sum3_deg: s3.to_degrees() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn cube_angle_solve_closed_form() {
        let r = solve_platonic_angle(4, 3, 5).unwrap();
        assert_eq!(r.witness.assignment, SpaceAssignment::HyperbolicFinite);
        assert_relative_eq!(r.values[0], (2.0 + 5.0f64.sqrt()).sqrt(), epsilon = 1e-9);
        assert!(r.residual < 1e-10);
        assert!(r.iterations <= MAX_BISECT_ITERS);
    }

    #[test]
    fn octahedron_formula_family() {
        for n in 5..=12 {
            let r = solve_platonic_angle(3, 4, n).unwrap();
            let nf = n as f64;
            let formula = 6.0f64.sqrt() * (PI / nf).cos() / (3.0 * (2.0 * PI / nf).cos() + 1.0).sqrt();
            assert_relative_eq!(r.values[0], formula, epsilon = 1e-9);
        }
    }

    #[test]
    fn spherical_cube_vertex_scale() {
        let r = solve_platonic_angle(4, 3, 3).unwrap();
        assert_eq!(r.witness.assignment, SpaceAssignment::Spherical);
        assert_relative_eq!(r.values[0], 1.0 / 3.0f64.sqrt(), epsilon = 1e-9);
        assert_relative_eq!(r.witness.solid.edges[0].dihedral.to_degrees(), 120.0, epsilon = 1e-9);
    }

    #[test]
    fn prism_inner_cube_closed_form() {
        let r = solve_prismatic_inner(4, 3, 5, InnerBase::Platonic).unwrap();
        let a = (2.0 + 5.0f64.sqrt()).sqrt();
        assert_relative_eq!(r.values[0], a + (a * a - 1.0).sqrt(), epsilon = 1e-9);
        assert!(r.residual < 1e-10, "residual {}", r.residual);
    }

    #[test]
    fn prism_inner_formula_family() {
        for n in 5..=10 {
            let r = solve_prismatic_inner(4, 3, n, InnerBase::Platonic).unwrap();
            let a = solve_platonic_angle(4, 3, n).unwrap().values[0];
            assert_relative_eq!(r.values[0], a + (a * a - 1.0).sqrt(), epsilon = 1e-9);
        }
    }

    #[test]
    fn spherical_prism_inner_cube() {
        let r = solve_prismatic_inner(4, 3, 3, InnerBase::Platonic).unwrap();
        let expected = (-1.0 - 2.0f64.sqrt() + (2.0 * (3.0 + 2.0f64.sqrt())).sqrt()) / 3.0f64.sqrt();
        assert_relative_eq!(r.values[0], expected, epsilon = 1e-6);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn euclidean_prism_inner_is_scale_convention() {
        let r = solve_prismatic_inner(4, 3, 4, InnerBase::Platonic).unwrap();
        assert_eq!(r.values[0], 1.0);
        assert!(r.residual < 1e-12);
        assert_relative_eq!(r.witness.prism_edge, r.witness.prism_height, epsilon = 1e-12);
    }

    #[test]
    fn euclidean_kis_sums() {
        let table = euclidean_angle_table().unwrap();
        let expect = [
            (PlatonicKind::Tetrahedron, 289.47122063449069, 360.0),
            (PlatonicKind::Cube, 340.52877936550931, 411.05755873101862),
            (PlatonicKind::Octahedron, 360.0, 450.0),
            (PlatonicKind::Dodecahedron, 401.81031489577875, 472.33909426128801),
            (PlatonicKind::Icosahedron, 423.43494882292216, 540.0),
        ];
        for (row, (kind, s2, s3)) in table.iter().zip(expect.iter()) {
            assert_eq!(row.kind, *kind);
            assert_relative_eq!(row.sum2_deg, s2, epsilon = 1e-6);
            assert_relative_eq!(row.sum3_deg, s3, epsilon = 1e-6);
        }
    }

    #[test]
    fn kis_condition_euclidean_exact() {
        let r = solve_kis_angle_condition(3, 3, 3).unwrap();
        assert!(r.residual <= 1e-12, "residual {}", r.residual);
        let k = &r.witness.kis;
        assert_relative_eq!(k.alpha, (1.0f64 / 3.0).acos(), epsilon = 1e-12);
        assert_relative_eq!(k.beta, PI - (1.0f64 / 3.0).acos(), epsilon = 1e-12);
    }

    #[test]
    fn kis_condition_hyperbolic_octahedron() {
        let r = solve_kis_angle_condition(3, 4, 3).unwrap();
        assert_eq!(r.witness.space, SpaceForm::Hyperbolic);
        assert!(r.residual <= 1e-10, "residual {}", r.residual);
        let (lo_end, hi_end) = r.witness.bracket_end_sums.unwrap();
        assert_relative_eq!(lo_end, 4.0 * PI / 3.0, epsilon = 1e-6);
        assert!(hi_end > 2.0 * PI);
    }

    #[test]
    fn kis_condition_spherical_tetrahedron() {
        let r = solve_kis_angle_condition(3, 3, 2).unwrap();
        assert_eq!(r.witness.space, SpaceForm::Spherical);
        assert!(r.residual <= 1e-10);
        let (lo_end, hi_end) = r.witness.bracket_end_sums.unwrap();
        assert!((lo_end.to_degrees() - 289.47).abs() < 0.5, "small end {}", lo_end.to_degrees());
        assert!(hi_end < 2.0 * PI || hi_end > 2.0 * PI); // finite
        assert!((hi_end - 3.0 * PI).abs() < 0.05, "great end {}", hi_end);
        assert!(hi_end > 2.0 * PI);
    }

    #[test]
    fn antiprismatic_inner_euclidean_tetrahedron() {
        // regular octahedra as antiprisms over the tetrahedron
        let r = solve_antiprismatic_inner(3, 3, 3, InnerBase::Platonic).unwrap();
        assert!(r.residual <= 1e-10, "residual {}", r.residual);
        assert!(r.witness.lateral_spread <= 1e-10);
    }

    #[test]
    fn antiprismatic_geography_table() {
        use SpaceForm::*;
        let expect: [(usize, usize, [SpaceForm; 3]); 5] = [
            (3, 3, [Spherical, Euclidean, Hyperbolic]),
            (4, 3, [Spherical, Hyperbolic, Hyperbolic]),
            (3, 4, [Euclidean, Hyperbolic, Hyperbolic]),
            (5, 3, [Hyperbolic, Hyperbolic, Hyperbolic]),
            (3, 5, [Hyperbolic, Hyperbolic, Hyperbolic]),
        ];
        for (p, q, rows) in expect {
            for (i, n) in (2..=4).enumerate() {
                assert_eq!(antiprismatic_geography(p, q, n).unwrap(), rows[i], "({p},{q},{n})");
            }
        }
    }

    #[test]
    fn platonic_geography_table() {
        use SpaceAssignment::*;
        let expect: [(usize, usize, [SpaceAssignment; 5]); 5] = [
            (3, 3, [Spherical, Spherical, Spherical, HyperbolicIdeal, Hyperideal]),
            (4, 3, [Spherical, EuclideanScaleFree, HyperbolicFinite, HyperbolicIdeal, Hyperideal]),
            (3, 4, [Spherical, HyperbolicIdeal, Hyperideal, Hyperideal, Hyperideal]),
            (5, 3, [Spherical, HyperbolicFinite, HyperbolicFinite, HyperbolicIdeal, Hyperideal]),
            (3, 5, [HyperbolicFinite, Hyperideal, Hyperideal, Hyperideal, Hyperideal]),
        ];
        for (p, q, rows) in expect {
            for (i, n) in (3..=7).enumerate() {
                assert_eq!(platonic_geography(p, q, n).unwrap(), rows[i], "({p},{q},{n})");
            }
        }
    }
}
