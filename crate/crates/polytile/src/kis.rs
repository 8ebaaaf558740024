//! n-akis solids KP_{p,q}^n: a regular truncation TP_{p,q} with pyramids
//! PY_q^n attached over its q-gonal faces. For n = 2 the pyramids are flat
//! and KP^2 = TP. The angle triple (alpha, beta, gamma) drives the tiling
//! condition alpha + 2 beta + 2 gamma = 2 pi.

use crate::error::{Error, Result};
use crate::pyramid::{self, Pyramid};
use crate::solids::{self, EdgeClass, Solid};
use crate::spaceform::SpaceForm;

#[derive(Clone, Debug)]
pub struct KisSolid {
    /// The truncated base; its Primary faces are the 2p-gons.
    pub tp: Solid,
    /// The attached pyramid (None for n = 2).
    pub pyramid: Option<Pyramid>,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl KisSolid {
    pub fn angle_sum(&self) -> f64 {
        self.alpha + 2.0 * self.beta + 2.0 * self.gamma
    }

    pub fn space(&self) -> SpaceForm {
        self.tp.space()
    }

    pub fn p(&self) -> usize {
        self.tp.spec.p
    }
}

/// Size parameter for the pyramid matched to a target base-edge length.
pub(crate) fn match_pyramid_edge(
    q: usize,
    n: usize,
    space: SpaceForm,
    target_edge: f64,
) -> Result<Pyramid> {
    match pyramid::pyramid_variant(q, n, space)? {
        "flat" => pyramid::pyramid(q, 2, flat_circumradius(q, space, target_edge)?, space),
        "column" => {
            let s_lo = pyramid::column_ideal_s(q, n)? * (1.0 + 1e-11);
            let s_hi = 1e6;
            let edge_at = |s: f64| -> Result<f64> {
                Ok(pyramid::pyramid(q, n, s, space)?.base_edge.unwrap())
            };
            let min_edge = edge_at(s_hi)?;
            if target_edge <= min_edge {
                return Err(Error::Nonexistence(format!(
                    "target edge {target_edge:.6} below the minimum base edge {min_edge:.6} of PY_{q}^{n}"
                )));
            }
            let s = crate::solvers::bisect_decreasing(
                |s| Ok(edge_at(s)? - target_edge),
                s_lo,
                s_hi,
            )?;
            pyramid::pyramid(q, n, s, space)
        }
        "subdivision" => {
            // Solve the source Platonic scale so its edge matches.
            let (lo, hi) = match space {
                SpaceForm::Hyperbolic => {
                    let ideal = crate::solvers::hyperbolic_ideal_scale(q, n)?;
                    (ideal * (1.0 + 1e-11), 1e4)
                }
                SpaceForm::Euclidean => (1e-6, 1e6),
                SpaceForm::Spherical => (1e-6, 1.0 - 1e-9),
            };
            let edge_at = |c: f64| -> Result<f64> {
                let s = solids::platonic(q, n, c, space)?;
                s.edge_length(0)
            };
            let decreasing = space == SpaceForm::Hyperbolic;
            let c = if decreasing {
                crate::solvers::bisect_decreasing(|c| Ok(edge_at(c)? - target_edge), lo, hi)?
            } else {
                crate::solvers::bisect_increasing(|c| Ok(edge_at(c)? - target_edge), lo, hi)?
            };
            pyramid::pyramid(q, n, c, space)
        }
        "halfspace" => {
            // PY_4^4: the base ring is ideal; no finite edge to match.
            Err(Error::Nonexistence(
                "PY_4^4 has an ideal base ring and cannot match a finite edge".into(),
            ))
        }
        _ => unreachable!(),
    }
}

fn flat_circumradius(q: usize, space: SpaceForm, edge: f64) -> Result<f64> {
    // circumradius of a regular q-gon with the given geodesic edge length
    let half_angle = std::f64::consts::PI / q as f64;
    Ok(match space {
        SpaceForm::Euclidean => edge / (2.0 * half_angle.sin()),
        SpaceForm::Hyperbolic => {
            // sinh(R) sin(pi/q) = sinh(edge/2) in chart-geodesic terms; the
            // chart circumradius follows from the ball-model radius map
            let rr = ((edge / 2.0).sinh() / half_angle.sin()).asinh();
            (rr / 2.0).tanh()
        }
        SpaceForm::Spherical => {
            let rr = ((edge / 2.0).sin() / half_angle.sin()).asin();
            (rr / 2.0).tan()
        }
    })
}

/// Build KP_{p,q}^n from the base Platonic scale `a`.
pub fn kis(p: usize, q: usize, n: usize, a: f64, space: SpaceForm) -> Result<KisSolid> {
    if n < 2 {
        return Err(Error::Domain("kis needs n >= 2".into()));
    }
    let base = solids::platonic(p, q, a, space)?;
    let tp = solids::truncate_extended(&base)?;
    let alpha = tp
        .dihedral_of_class(EdgeClass::Alpha)
        .ok_or_else(|| Error::Domain("truncation lost its alpha edges".into()))?;
    let beta = tp
        .dihedral_of_class(EdgeClass::Beta)
        .ok_or_else(|| Error::Domain("truncation lost its beta edges".into()))?;
    if n == 2 {
        return Ok(KisSolid { tp, pyramid: None, n, alpha, beta, gamma: 0.0 });
    }
    let edge = tp.edge_length(0)?;
    let py = match_pyramid_edge(q, n, space, edge)?;
    let gamma = py.gamma;
    Ok(KisSolid { tp, pyramid: Some(py), n, alpha, beta, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn euclidean_triakis_truncated_tetrahedron_closes() {
        // KP_{3,3}^3: alpha = arccos(1/3), beta = pi - arccos(1/3),
        // 2 gamma = arccos(1/3); the sum is exactly 2 pi.
        let k = kis(3, 3, 3, 1.0, SpaceForm::Euclidean).unwrap();
        assert_relative_eq!(k.alpha, (1.0f64 / 3.0).acos(), epsilon = 1e-10);
        assert_relative_eq!(k.beta, PI - (1.0f64 / 3.0).acos(), epsilon = 1e-10);
        assert_relative_eq!(2.0 * k.gamma, (1.0f64 / 3.0).acos(), epsilon = 1e-10);
        assert_relative_eq!(k.angle_sum(), 2.0 * PI, epsilon = 1e-9);
        // pyramid base edge matches the TP edge
        let e = k.tp.edge_length(0).unwrap();
        assert_relative_eq!(k.pyramid.as_ref().unwrap().base_edge.unwrap(), e, epsilon = 1e-9);
    }

    #[test]
    fn euclidean_bitruncated_cubic_honeycomb_closes_without_pyramids() {
        // KP_{3,4}^2 = TP_{3,4}: alpha + 2 beta = 2 pi.
        let k = kis(3, 4, 2, 1.0, SpaceForm::Euclidean).unwrap();
        assert!(k.pyramid.is_none());
        assert_relative_eq!(k.angle_sum(), 2.0 * PI, epsilon = 1e-9);
    }

    #[test]
    fn kis_matches_pyramid_edge_hyperbolic() {
        let k = kis(3, 4, 3, 2.4, SpaceForm::Hyperbolic).unwrap();
        let e = k.tp.edge_length(0).unwrap();
        let py = k.pyramid.as_ref().unwrap();
        assert_relative_eq!(py.base_edge.unwrap(), e, epsilon = 1e-9);
        assert_relative_eq!(py.side_dihedral, 2.0 * PI / 3.0, epsilon = 1e-10);
    }
}
