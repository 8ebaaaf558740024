//! End-to-end assembly: solve the closing-up parameters, derive the discrete
//! group, tile the fundamental patch, and weld the periodic surface.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::orbit::{
    self, antiprismatic_generators, build_surface, fundamental_patch, prismatic_generators,
    EnumerationLimit, FundamentalPatch, GroupSpec, OrbitSet, PatchKind,
};
use crate::solids::FaceClass;
use crate::solvers::{
    self, AntiprismaticWitness, InnerBase, PrismaticWitness, SolveResult,
};
use crate::spaceform::SpaceForm;
use crate::surface::Surface;

pub const DEFAULT_WELD_TOL: f64 = 1e-7;
/// Orbit caps: spherical groups close on their own; infinite groups are
/// depth-limited (design decision D1 of the orbit tiler).
pub const SPHERICAL_DEPTH_CAP: usize = 72;
pub const MAX_ELEMENTS: usize = 40_000;

#[derive(Clone, Debug)]
pub struct PrismaticBuild {
    pub solve: SolveResult<PrismaticWitness>,
    pub group: GroupSpec,
    pub orbit: OrbitSet,
    pub patch: FundamentalPatch,
    pub surface: Surface,
}

pub fn build_prismatic(
    p: usize,
    q: usize,
    n: usize,
    base: InnerBase,
    depth: usize,
    weld_tol: f64,
) -> Result<PrismaticBuild> {
    let solve = solvers::solve_prismatic_inner(p, q, n, base)?;
    let group = prismatic_generators(&solve.witness.fundamental)?;
    let walls: Vec<_> = solve.witness.fundamental.faces.iter().map(|f| f.plane).collect();
    let axes: Vec<Vector3<f64>> = solve.witness.fundamental.faces.iter().map(|f| f.axis).collect();
    let patch = fundamental_patch(PatchKind::Prismatic, &solve.witness.inner, &walls, &axes, p)?;
    let orbit = orbit::enumerate(&group, enumeration_limit(group.space, depth))?;
    let surface = build_surface(&patch, &orbit, weld_tol)?;
    Ok(PrismaticBuild { solve, group, orbit, patch, surface })
}

#[derive(Clone, Debug)]
pub struct AntiprismaticBuild {
    pub solve: SolveResult<AntiprismaticWitness>,
    pub group: GroupSpec,
    pub orbit: OrbitSet,
    pub patch: FundamentalPatch,
    pub surface: Surface,
}

pub fn build_antiprismatic(
    p: usize,
    q: usize,
    n: usize,
    base: InnerBase,
    depth: usize,
    weld_tol: f64,
) -> Result<AntiprismaticBuild> {
    let solve = solvers::solve_antiprismatic_inner(p, q, n, base)?;
    let group = antiprismatic_generators(&solve.witness.kis)?;
    let tp = &solve.witness.kis.tp;
    let walls: Vec<_> = tp
        .faces
        .iter()
        .filter(|f| f.class == FaceClass::Primary)
        .map(|f| f.plane)
        .collect();
    let axes: Vec<Vector3<f64>> = tp
        .faces
        .iter()
        .filter(|f| f.class == FaceClass::Primary)
        .map(|f| f.axis)
        .collect();
    let patch =
        fundamental_patch(PatchKind::Antiprismatic, &solve.witness.inner, &walls, &axes, p)?;
    let orbit = orbit::enumerate(&group, enumeration_limit(group.space, depth))?;
    let surface = build_surface(&patch, &orbit, weld_tol)?;
    Ok(AntiprismaticBuild { solve, group, orbit, patch, surface })
}

pub fn enumeration_limit(space: SpaceForm, depth: usize) -> EnumerationLimit {
    match space {
        SpaceForm::Spherical => {
            EnumerationLimit { max_depth: SPHERICAL_DEPTH_CAP, max_elements: MAX_ELEMENTS }
        }
        _ => EnumerationLimit { max_depth: depth, max_elements: MAX_ELEMENTS },
    }
}

/// Cell count of the spherical tiling behind a prismatic construction.
pub fn spherical_cell_count(p: usize, q: usize, n: usize) -> Result<usize> {
    let solve = solvers::solve_platonic_angle(p, q, n)?;
    if solve.witness.assignment != solvers::SpaceAssignment::Spherical {
        return Err(Error::Domain(format!(
            "({p},{q},{n}) is not spherical (got {})",
            solve.witness.assignment.name()
        )));
    }
    let group = prismatic_generators(&solve.witness.solid)?;
    let orbit = orbit::enumerate(&group, enumeration_limit(SpaceForm::Spherical, 0))?;
    if orbit.truncated {
        return Err(Error::TilerConsistency("spherical group enumeration truncated".into()));
    }
    Ok(orbit.cell_image_count(SpaceForm::Spherical))
}

/// Cell count of the spherical tiling by kis solids KP_{p,q}^n.
pub fn spherical_kis_cell_count(p: usize, q: usize, n: usize) -> Result<usize> {
    let solve = solvers::solve_kis_angle_condition(p, q, n)?;
    if solve.witness.space != SpaceForm::Spherical {
        return Err(Error::Domain(format!("KP_{p},{q}^{n} is not spherical")));
    }
    let group = antiprismatic_generators(&solve.witness.kis)?;
    let orbit = orbit::enumerate(&group, enumeration_limit(SpaceForm::Spherical, 0))?;
    if orbit.truncated {
        return Err(Error::TilerConsistency("spherical group enumeration truncated".into()));
    }
    Ok(orbit.cell_image_count(SpaceForm::Spherical))
}
