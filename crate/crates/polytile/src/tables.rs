//! Unit direction tables for the five Platonic types (design decision D1 of
//! the solid constructors): vertex directions and face-center directions,
//! plus the combinatorial constants used to validate built solids.

use nalgebra::Vector3;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlatonicKind {
    Tetrahedron,
    Cube,
    Octahedron,
    Dodecahedron,
    Icosahedron,
}

impl PlatonicKind {
    pub fn from_pq(p: usize, q: usize) -> Result<Self> {
        match (p, q) {
            (3, 3) => Ok(PlatonicKind::Tetrahedron),
            (4, 3) => Ok(PlatonicKind::Cube),
            (3, 4) => Ok(PlatonicKind::Octahedron),
            (5, 3) => Ok(PlatonicKind::Dodecahedron),
            (3, 5) => Ok(PlatonicKind::Icosahedron),
            _ => Err(Error::Domain(format!("no Platonic solid with (p, q) = ({p}, {q})"))),
        }
    }

    pub fn pq(self) -> (usize, usize) {
        match self {
            PlatonicKind::Tetrahedron => (3, 3),
            PlatonicKind::Cube => (4, 3),
            PlatonicKind::Octahedron => (3, 4),
            PlatonicKind::Dodecahedron => (5, 3),
            PlatonicKind::Icosahedron => (3, 5),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlatonicKind::Tetrahedron => "tetrahedron",
            PlatonicKind::Cube => "cube",
            PlatonicKind::Octahedron => "octahedron",
            PlatonicKind::Dodecahedron => "dodecahedron",
            PlatonicKind::Icosahedron => "icosahedron",
        }
    }

    pub fn dual(self) -> PlatonicKind {
        match self {
            PlatonicKind::Tetrahedron => PlatonicKind::Tetrahedron,
            PlatonicKind::Cube => PlatonicKind::Octahedron,
            PlatonicKind::Octahedron => PlatonicKind::Cube,
            PlatonicKind::Dodecahedron => PlatonicKind::Icosahedron,
            PlatonicKind::Icosahedron => PlatonicKind::Dodecahedron,
        }
    }

    pub fn face_count(self) -> usize {
        match self {
            PlatonicKind::Tetrahedron => 4,
            PlatonicKind::Cube => 6,
            PlatonicKind::Octahedron => 8,
            PlatonicKind::Dodecahedron => 12,
            PlatonicKind::Icosahedron => 20,
        }
    }

    pub fn vertex_count(self) -> usize {
        self.dual().face_count()
    }

    pub fn edge_count(self) -> usize {
        let (p, _) = self.pq();
        self.face_count() * p / 2
    }

    /// Unit vertex directions.
    pub fn vertex_dirs(self) -> Vec<Vector3<f64>> {
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        match self {
            PlatonicKind::Tetrahedron => {
                // Opposite the face centers at (1,1,1), (1,-1,-1), (-1,1,-1),
                // (-1,-1,1): the tetrahedron is self-dual through negation.
                [(-1., -1., -1.), (-1., 1., 1.), (1., -1., 1.), (1., 1., -1.)]
                    .iter()
                    .map(|&(x, y, z)| Vector3::new(x, y, z) / 3.0f64.sqrt())
                    .collect()
            }
            PlatonicKind::Cube => {
                let mut v = Vec::new();
                for sx in [1.0, -1.0] {
                    for sy in [1.0, -1.0] {
                        for sz in [1.0, -1.0] {
                            v.push(Vector3::new(sx, sy, sz) / 3.0f64.sqrt());
                        }
                    }
                }
                v
            }
            PlatonicKind::Octahedron => vec![
                Vector3::x(),
                -Vector3::x(),
                Vector3::y(),
                -Vector3::y(),
                Vector3::z(),
                -Vector3::z(),
            ],
            PlatonicKind::Icosahedron => {
                let n = (1.0 + phi * phi).sqrt();
                let mut v = Vec::new();
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        v.push(Vector3::new(0.0, s1, s2 * phi) / n);
                        v.push(Vector3::new(s1, s2 * phi, 0.0) / n);
                        v.push(Vector3::new(s1 * phi, 0.0, s2) / n);
                    }
                }
                v
            }
            PlatonicKind::Dodecahedron => {
                // Face centroids of the icosahedron above: the cube vertices
                // plus the cyclic permutations of (1/phi, 0, phi).
                let mut v: Vec<Vector3<f64>> = PlatonicKind::Cube.vertex_dirs();
                let n = 3.0f64.sqrt();
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        v.push(Vector3::new(s1 / phi, 0.0, s2 * phi) / n);
                        v.push(Vector3::new(s2 * phi, s1 / phi, 0.0) / n);
                        v.push(Vector3::new(0.0, s2 * phi, s1 / phi) / n);
                    }
                }
                v
            }
        }
    }

    /// Unit face-center directions (the dual's vertex directions; the
    /// self-dual tetrahedron pairs with its negated copy).
    pub fn face_dirs(self) -> Vec<Vector3<f64>> {
        match self {
            PlatonicKind::Tetrahedron => self.vertex_dirs().iter().map(|v| -v).collect(),
            _ => self.dual().vertex_dirs(),
        }
    }

    /// Euclidean dihedral angle (radians).
    pub fn euclidean_dihedral(self) -> f64 {
        match self {
            PlatonicKind::Tetrahedron => (1.0f64 / 3.0).acos(),
            PlatonicKind::Cube => std::f64::consts::FRAC_PI_2,
            PlatonicKind::Octahedron => (-1.0f64 / 3.0).acos(),
            PlatonicKind::Dodecahedron => (-1.0f64 / 5.0f64.sqrt()).acos(),
            PlatonicKind::Icosahedron => (-5.0f64.sqrt() / 3.0).acos(),
        }
    }

    /// Dihedral angle of the ideal hyperbolic solid: the interior angle of
    /// the Euclidean regular q-gon (the horospherical vertex figure).
    pub fn ideal_dihedral(self) -> f64 {
        let (_, q) = self.pq();
        std::f64::consts::PI * (q as f64 - 2.0) / q as f64
    }

    /// Indices of the p vertices on the face with center direction `dir`.
    pub fn face_ring(self, dir: &Vector3<f64>) -> Vec<usize> {
        let (p, _) = self.pq();
        let verts = self.vertex_dirs();
        let mut idx: Vec<usize> = (0..verts.len()).collect();
        idx.sort_by(|&a, &b| verts[b].dot(dir).partial_cmp(&verts[a].dot(dir)).unwrap());
        idx.truncate(p);
        let ring_dirs: Vec<Vector3<f64>> = idx.iter().map(|&i| verts[i]).collect();
        let order = crate::spaceform::order_ring(&ring_dirs, dir);
        order.into_iter().map(|k| idx[k]).collect()
    }

    /// Pairs of adjacent face indices (sharing an edge), computed from the
    /// face direction table by maximal pairwise dot product.
    pub fn face_adjacency(self) -> Vec<(usize, usize)> {
        let dirs = self.face_dirs();
        let mut best: f64 = -2.0;
        for i in 0..dirs.len() {
            for j in 0..i {
                let d = dirs[i].dot(&dirs[j]);
                if d < 1.0 - 1e-9 {
                    best = best.max(d);
                }
            }
        }
        let mut out = Vec::new();
        for i in 0..dirs.len() {
            for j in 0..i {
                if (dirs[i].dot(&dirs[j]) - best).abs() < 1e-9 {
                    out.push((j, i));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_counts() {
        for k in [
            PlatonicKind::Tetrahedron,
            PlatonicKind::Cube,
            PlatonicKind::Octahedron,
            PlatonicKind::Dodecahedron,
            PlatonicKind::Icosahedron,
        ] {
            assert_eq!(k.vertex_dirs().len(), k.vertex_count(), "{:?}", k);
            assert_eq!(k.face_dirs().len(), k.face_count(), "{:?}", k);
            assert_eq!(k.face_adjacency().len(), k.edge_count(), "{:?}", k);
            for v in k.vertex_dirs() {
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
            // each face ring has p distinct members
            let (p, _) = k.pq();
            for d in k.face_dirs() {
                let ring = k.face_ring(&d);
                assert_eq!(ring.len(), p);
            }
        }
    }

    #[test]
    fn vertex_valency_matches_q() {
        for k in [
            PlatonicKind::Tetrahedron,
            PlatonicKind::Cube,
            PlatonicKind::Octahedron,
            PlatonicKind::Dodecahedron,
            PlatonicKind::Icosahedron,
        ] {
            let (_, q) = k.pq();
            let mut count = vec![0usize; k.vertex_count()];
            for d in k.face_dirs() {
                for v in k.face_ring(&d) {
                    count[v] += 1;
                }
            }
            assert!(count.iter().all(|&c| c == q), "{:?}: {:?}", k, count);
        }
    }
}
