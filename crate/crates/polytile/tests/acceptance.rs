//! Acceptance suite: every top-level claim the engine is expected to
//! reproduce, one test per criterion, each printing a pass line with the
//! measured values (run with `cargo test --test acceptance -- --nocapture`
//! to see them).

use std::f64::consts::PI;

use polytile::orbit::{self, EnumerationLimit, GroupKind};
use polytile::pyramid;
use polytile::scenario::{self, build_antiprismatic, build_prismatic};
use polytile::solvers::{self, InnerBase, SpaceAssignment};
use polytile::spaceform::SpaceForm;
use polytile::surface::{
    genus_consistency, quotient_complex, straight_ahead_wall_cycles, verify_regular_faces,
    verify_vertex_figures, TraceMode,
};

fn pass(n: usize, msg: &str) {
    println!("[PASS] criterion {n:2}: {msg}");
}

#[test]
fn criterion_01_cube_closed_forms() {
    let a_expect = (2.0 + 5.0f64.sqrt()).sqrt();
    let r = solvers::solve_platonic_angle(4, 3, 5).unwrap();
    assert!((r.values[0] - a_expect).abs() < 1e-9, "a = {}", r.values[0]);

    let pr = solvers::solve_prismatic_inner(4, 3, 5, InnerBase::Platonic).unwrap();
    let b_expect = a_expect + (a_expect * a_expect - 1.0).sqrt();
    assert!((pr.values[0] - b_expect).abs() < 1e-9, "b = {}", pr.values[0]);

    // re-measured prism side squareness: edge vs height
    let d = (pr.witness.prism_edge - pr.witness.prism_height).abs();
    assert!(d < 1e-9, "prism side defect {d}");
    pass(1, &format!("a = {:.9}, b = {:.9}, |edge - height| = {:.2e}", r.values[0], pr.values[0], d));
}

#[test]
fn criterion_02_octahedron_scale_formula() {
    let mut worst: f64 = 0.0;
    for n in 5..=12 {
        let r = solvers::solve_platonic_angle(3, 4, n).unwrap();
        let nf = n as f64;
        let formula = 6.0f64.sqrt() * (PI / nf).cos() / (3.0 * (2.0 * PI / nf).cos() + 1.0).sqrt();
        worst = worst.max((r.values[0] - formula).abs());
    }
    assert!(worst < 1e-9, "worst deviation {worst}");
    pass(2, &format!("a_n matches the closed form for n = 5..12 (worst {worst:.2e})"));
}

#[test]
fn criterion_03_euclidean_angle_table() {
    let table = solvers::euclidean_angle_table().unwrap();
    let printed = [
        (289.47, 360.0),
        (340.53, 411.06),
        (360.0, 450.0),
        (401.81, 472.34),
        (423.44, 540.0),
    ];
    let mut worst: f64 = 0.0;
    for (row, (s2, s3)) in table.iter().zip(printed.iter()) {
        worst = worst.max((row.sum2_deg - s2).abs());
        worst = worst.max((row.sum3_deg - s3).abs());
    }
    assert!(worst <= 0.01, "worst table deviation {worst}");
    pass(3, &format!("all ten angle sums within {worst:.4} degrees of the printed table"));
}

#[test]
fn criterion_04_kis_ideal_bracket() {
    let r = solvers::solve_kis_angle_condition(3, 4, 3).unwrap();
    let (ideal_end, near_euclid_end) = r.witness.bracket_end_sums.unwrap();
    assert!(
        (ideal_end - 4.0 * PI / 3.0).abs() < 1e-6,
        "ideal end {} vs 4 pi / 3",
        ideal_end
    );
    assert!(near_euclid_end > 2.0 * PI, "near-euclidean end {near_euclid_end}");
    assert!(r.residual <= 1e-10, "root residual {}", r.residual);
    pass(
        4,
        &format!(
            "ideal end = {ideal_end:.9} (4pi/3 = {:.9}), other end = {near_euclid_end:.6} > 2pi, residual {:.2e}",
            4.0 * PI / 3.0,
            r.residual
        ),
    );
}

#[test]
fn criterion_05_geography_tables() {
    use SpaceAssignment::*;
    let platonic: [(usize, usize, [SpaceAssignment; 5]); 5] = [
        (3, 3, [Spherical, Spherical, Spherical, HyperbolicIdeal, Hyperideal]),
        (4, 3, [Spherical, EuclideanScaleFree, HyperbolicFinite, HyperbolicIdeal, Hyperideal]),
        (3, 4, [Spherical, HyperbolicIdeal, Hyperideal, Hyperideal, Hyperideal]),
        (5, 3, [Spherical, HyperbolicFinite, HyperbolicFinite, HyperbolicIdeal, Hyperideal]),
        (3, 5, [HyperbolicFinite, Hyperideal, Hyperideal, Hyperideal, Hyperideal]),
    ];
    let mut checked = 0;
    for (p, q, rows) in platonic {
        for (i, n) in (3..=7).enumerate() {
            assert_eq!(
                solvers::platonic_geography(p, q, n).unwrap(),
                rows[i],
                "platonic ({p},{q},{n})"
            );
            checked += 1;
        }
    }
    let anti: [(usize, usize, [SpaceForm; 3]); 5] = [
        (3, 3, [SpaceForm::Spherical, SpaceForm::Euclidean, SpaceForm::Hyperbolic]),
        (4, 3, [SpaceForm::Spherical, SpaceForm::Hyperbolic, SpaceForm::Hyperbolic]),
        (3, 4, [SpaceForm::Euclidean, SpaceForm::Hyperbolic, SpaceForm::Hyperbolic]),
        (5, 3, [SpaceForm::Hyperbolic, SpaceForm::Hyperbolic, SpaceForm::Hyperbolic]),
        (3, 5, [SpaceForm::Hyperbolic, SpaceForm::Hyperbolic, SpaceForm::Hyperbolic]),
    ];
    let mut checked_a = 0;
    for (p, q, rows) in anti {
        for (i, n) in (2..=4).enumerate() {
            assert_eq!(
                solvers::antiprismatic_geography(p, q, n).unwrap(),
                rows[i],
                "antiprismatic ({p},{q},{n})"
            );
            checked_a += 1;
        }
    }
    assert_eq!(checked, 25);
    assert_eq!(checked_a, 15);
    pass(5, "25 Platonic and 15 antiprismatic geography entries match");
}

#[test]
fn criterion_06_spherical_orbit_counts() {
    let cases = [
        ((4, 3, 3), 8usize),
        ((3, 3, 3), 5),
        ((3, 3, 4), 16),
        ((3, 4, 3), 24),
        ((5, 3, 3), 120),
        ((3, 3, 5), 600),
    ];
    for ((p, q, n), expect) in cases {
        let cells = scenario::spherical_cell_count(p, q, n).unwrap();
        assert_eq!(cells, expect, "cells of ({p},{q},{n})");
    }
    let kis_cases = [((3, 3, 2), 10usize), ((4, 3, 2), 48)];
    for ((p, q, n), expect) in kis_cases {
        let cells = scenario::spherical_kis_cell_count(p, q, n).unwrap();
        assert_eq!(cells, expect, "kis cells of ({p},{q},{n})");
    }
    pass(6, "cell counts 8, 5, 16, 24, 120, 600, 10, 48 all exact");
}

#[test]
fn criterion_07_spherical_surface_counts() {
    let b = build_prismatic(4, 3, 3, InnerBase::Platonic, 0, 1e-7).unwrap();
    assert!(b.surface.is_closed());
    assert_eq!(b.surface.face_count(), 96, "prismatic cube faces");
    assert_eq!(b.surface.vertex_count(), 64, "prismatic cube vertices");
    let figs = verify_vertex_figures(&b.surface, 1e-8).unwrap();
    assert_eq!(figs.valencies.len(), 1);
    assert_eq!(*figs.valencies.keys().next().unwrap(), 6, "valency 6");

    let mut tetra_faces = Vec::new();
    for n in [3, 4, 5] {
        let b = build_prismatic(3, 3, n, InnerBase::Platonic, 0, 1e-7).unwrap();
        assert!(b.surface.is_closed(), "tetra n={n} closed");
        tetra_faces.push(b.surface.face_count());
    }
    assert_eq!(tetra_faces, vec![30, 96, 3600]);
    pass(7, "prismatic cube 96/64/valency-6; prismatic tetrahedra 30, 96, 3600 squares");
}

#[test]
fn criterion_08_quotient_table() {
    // (build, F, valency (None = derived), genus)
    struct Case {
        name: &'static str,
        q: polytile::surface::QuotientComplex,
        f: i64,
        valency: Option<usize>,
        genus: i64,
    }
    let mut cases = Vec::new();

    let mucube = build_prismatic(4, 3, 4, InnerBase::Platonic, 2, 1e-7).unwrap();
    cases.push(Case {
        name: "mucube",
        q: quotient_complex(&mucube.surface).unwrap(),
        f: 12,
        valency: Some(6),
        genus: 3,
    });

    let octa = build_prismatic(3, 4, 4, InnerBase::Platonic, 2, 1e-7).unwrap();
    cases.push(Case {
        name: "prismatic octahedron",
        q: quotient_complex(&octa.surface).unwrap(),
        f: 12,
        valency: Some(8),
        genus: 4,
    });

    let rp = build_prismatic(3, 4, 4, InnerBase::Rectified, 2, 1e-7).unwrap();
    cases.push(Case {
        name: "prismatic cuboctahedron",
        q: quotient_complex(&rp.surface).unwrap(),
        f: 18,
        valency: Some(6),
        genus: 4,
    });

    let tp = build_prismatic(3, 4, 4, InnerBase::Truncated, 2, 1e-7).unwrap();
    cases.push(Case {
        name: "prismatic truncated octahedron",
        q: quotient_complex(&tp.surface).unwrap(),
        f: 30,
        valency: Some(5),
        genus: 4,
    });

    let dodeca = build_prismatic(5, 3, 4, InnerBase::Platonic, 2, 1e-7).unwrap();
    cases.push(Case {
        name: "prismatic dodecahedron",
        q: quotient_complex(&dodeca.surface).unwrap(),
        f: 30,
        valency: None,
        genus: 6,
    });

    let icosa = build_prismatic(3, 5, 3, InnerBase::Platonic, 2, 1e-7).unwrap();
    cases.push(Case {
        name: "prismatic icosahedron",
        q: quotient_complex(&icosa.surface).unwrap(),
        f: 30,
        valency: Some(10),
        genus: 10,
    });

    let anticube = build_antiprismatic(4, 3, 2, InnerBase::Platonic, 2, 1e-7).unwrap();
    cases.push(Case {
        name: "antiprismatic cube",
        q: quotient_complex(&anticube.surface).unwrap(),
        f: 24,
        valency: Some(9),
        genus: 3,
    });

    let antidodeca = build_antiprismatic(5, 3, 2, InnerBase::Platonic, 2, 1e-7).unwrap();
    cases.push(Case {
        name: "antiprismatic dodecahedron",
        q: quotient_complex(&antidodeca.surface).unwrap(),
        f: 60,
        valency: Some(9),
        genus: 6,
    });

    let arp = build_antiprismatic(5, 3, 2, InnerBase::Rectified, 2, 1e-7).unwrap();
    cases.push(Case {
        name: "antiprismatic icosidodecahedron",
        q: quotient_complex(&arp.surface).unwrap(),
        f: 80,
        valency: Some(8),
        genus: 6,
    });

    for c in &cases {
        genus_consistency(&c.q, c.f, c.valency, c.genus)
            .unwrap_or_else(|e| panic!("{}: {e}; quotient {:?}", c.name, c.q));
        // exact Euler identity
        assert_eq!(c.q.euler, c.q.v - c.q.e + c.q.f, "{}", c.name);
        assert_eq!(c.q.euler, 2 - 2 * c.q.genus, "{}", c.name);
    }
    // the dodecahedral valency is forced by Euler consistency
    let dq = &cases[4].q;
    assert_eq!(dq.valencies.len(), 1);
    assert_eq!(*dq.valencies.keys().next().unwrap(), 6);

    pass(
        8,
        "quotients (12,6,3) (12,8,4) (18,6,4) (30,5,4) (30,6,6) (30,10,10) (24,9,3) (60,9,6) (80,8,6) verified",
    );
}

#[test]
fn criterion_09_parity_witnesses() {
    // straight-ahead cycles of the prismatic octahedron quotient: the prism
    // waists close with odd length 3; cycles through prism tops and bottoms
    // close with even length under the wall identification
    let octa = build_prismatic(3, 4, 4, InnerBase::Platonic, 2, 1e-7).unwrap();
    let lengths = straight_ahead_wall_cycles(&octa.patch).unwrap();
    assert!(lengths.contains_key(&3), "waist cycles of length 3: {lengths:?}");
    let has_even = lengths.keys().any(|l| l % 2 == 0);
    assert!(has_even, "even cycle lengths: {lengths:?}");

    // Euclidean antiprismatic tetrahedron: Petrie polygons of the
    // translational quotient include lengths 6 (antiprism waists) and 8
    let ap = build_antiprismatic(3, 3, 3, InnerBase::Platonic, 3, 1e-7).unwrap();
    let lattice = polytile::surface::surface_translation_lattice(&ap.surface).unwrap();
    let map = polytile::surface::lattice_quotient_map(&ap.surface, &lattice).unwrap();
    let petrie = map.trace(TraceMode::Petrie).unwrap();
    assert!(petrie.contains_key(&6), "petrie 6: {petrie:?}");
    assert!(petrie.contains_key(&8), "petrie 8: {petrie:?}");

    pass(
        9,
        &format!(
            "octahedron straight-ahead lengths {:?}; antiprismatic tetrahedron Petrie lengths {:?}",
            lengths.keys().collect::<Vec<_>>(),
            petrie.keys().collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_10_pyramid_lemmas() {
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for n in 5..=10 {
        let r2 = pyramid::column_radius(4, n).unwrap().powi(2);
        let s_ideal = pyramid::column_ideal_s(4, n).unwrap();
        assert!((s_ideal - 1.0 / (PI / n as f64).tan()).abs() < 1e-12);
        for _ in 0..20 {
            let s = s_ideal + 0.02 + 3.0 * rng.gen::<f64>();
            let py = pyramid::pyramid(4, n, s, SpaceForm::Hyperbolic).unwrap();
            // side-side dihedral is 2 pi / n
            worst = worst.max((py.side_dihedral - 2.0 * PI / n as f64).abs());
            // gamma lemma
            let gamma_expect = (1.0 / ((r2 - 1.0).sqrt() * (s * s - 1.0).sqrt())).acos();
            worst = worst.max((py.gamma - gamma_expect).abs());
            // edge-length lemma
            let cosh_l = 1.0 + 2.0 * s * s / ((r2 - 2.0) * s * s - r2);
            worst = worst.max((py.base_edge.unwrap() - cosh_l.acosh()).abs());
        }
        // ideal-base limit of gamma
        let py = pyramid::pyramid(4, n, s_ideal * (1.0 + 1e-10), SpaceForm::Hyperbolic).unwrap();
        let limit = PI / 2.0 - PI / n as f64;
        assert!((py.gamma - limit).abs() < 1e-7, "gamma limit n={n}: {} vs {limit}", py.gamma);
    }
    assert!(worst < 1e-9, "worst lemma deviation {worst}");
    pass(10, &format!("pyramid lemmas verified for q=4, n=5..10 (worst {worst:.2e})"));
}

#[test]
fn criterion_11_spherical_inner_cube() {
    let r = solvers::solve_prismatic_inner(4, 3, 3, InnerBase::Platonic).unwrap();
    let expect = (-1.0 - 2.0f64.sqrt() + (2.0 * (3.0 + 2.0f64.sqrt())).sqrt()) / 3.0f64.sqrt();
    let d = (r.values[0] - expect).abs();
    assert!(d < 1e-6, "b = {} vs {expect}", r.values[0]);
    pass(11, &format!("spherical inner cube b = {:.9} matches the closed form ({d:.2e})", r.values[0]));
}

#[test]
fn criterion_12_property_suite() {
    use nalgebra::Vector3;
    use polytile::isometry::Isometry;
    use polytile::spaceform::{distance, ModelPoint};
    use rand::prelude::*;

    // distance preservation (1e-9) and reflection involutivity (1e-10) on
    // every space form
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for space in [SpaceForm::Hyperbolic, SpaceForm::Spherical, SpaceForm::Euclidean] {
        let plane = match space {
            SpaceForm::Hyperbolic => {
                polytile::spaceform::plane_from_center(space, &Vector3::new(1.7, 0.3, -0.2)).unwrap()
            }
            _ => polytile::spaceform::plane_from_center(space, &Vector3::new(0.7, 0.2, -0.1)).unwrap(),
        };
        let g = Isometry::reflection(&plane)
            .compose(&Isometry::rotation(space, &Vector3::new(0.2, -1.0, 0.4), 0.83).unwrap())
            .unwrap();
        for _ in 0..1000 {
            let p = Vector3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let q = Vector3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let mp = ModelPoint::new(space, p).unwrap();
            let mq = ModelPoint::new(space, q).unwrap();
            let d0 = distance(&mp, &mq).unwrap();
            let d1 = distance(&g.apply(&mp).unwrap(), &g.apply(&mq).unwrap()).unwrap();
            assert!((d0 - d1).abs() <= 1e-9, "{space}: distance drift {}", (d0 - d1).abs());
        }
        let r = Isometry::reflection(&plane);
        let rr = r.compose(&r).unwrap();
        let idfp = Isometry::identity(space).fingerprint();
        assert!(rr.fingerprint().frame_distance(&idfp) <= 1e-10, "{space}: involution");
    }

    // group edge relations (1e-8) on the 72-degree cube reflection group
    let outer = solvers::solve_platonic_angle(4, 3, 5).unwrap().witness.solid;
    let spec = orbit::prismatic_generators(&outer).unwrap();
    assert!(orbit::edge_relation_defect(&outer, &spec).unwrap() <= 1e-8);

    // reflection-rotation matching conditions on a spherical kis group
    let ksolve = solvers::solve_kis_angle_condition(4, 3, 2).unwrap();
    let kspec = orbit::antiprismatic_generators(&ksolve.witness.kis).unwrap();
    assert_eq!(kspec.kind, GroupKind::ReflectionRotation);
    let (sq_defect, n_defect) = orbit::reflection_rotation_defects(&ksolve.witness.kis, &kspec).unwrap();
    assert!(sq_defect <= 1e-8 && n_defect <= 1e-8, "{sq_defect} {n_defect}");

    // determinism across thread counts: enumerate the same group in 1- and
    // 4-thread pools and compare everything bit for bit
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            orbit::enumerate(&spec, EnumerationLimit { max_depth: 3, max_elements: 10_000 }).unwrap()
        })
    };
    let o1 = run(1);
    let o4 = run(4);
    assert_eq!(o1.elements.len(), o4.elements.len());
    for (a, b) in o1.elements.iter().zip(o4.elements.iter()) {
        assert_eq!(a.word, b.word);
        assert_eq!(a.matrix(), b.matrix(), "matrices must be bit-identical");
    }

    // Euler and double-counting identities, exactly, on a closed surface
    let b = build_prismatic(4, 3, 3, InnerBase::Platonic, 0, 1e-7).unwrap();
    let s = &b.surface;
    let sum_val: usize = {
        let vf = s.vertex_faces();
        (0..s.vertex_count())
            .map(|v| s.vertex_link(v, &vf[v]).map(|l| l.len()).unwrap_or(0))
            .sum()
    };
    assert_eq!(sum_val, 2 * s.edge_count());
    let sum_gon: usize = s.faces.iter().map(|f| f.ring.len()).sum();
    assert_eq!(sum_gon, 2 * s.edge_count());
    let faces = verify_regular_faces(s, 1e-8);
    assert!(faces.pass, "face regularity: {faces:?}");
    let figs = verify_vertex_figures(s, 1e-8).unwrap();
    assert!(figs.pass, "vertex figures: {figs:?}");

    pass(12, "isometry, involution, relation, determinism, and counting identities all green");
}

#[test]
fn quotient_depth_invariance() {
    // supporting property: depth-2 and depth-3 builds agree on the quotient
    let b2 = build_prismatic(3, 4, 4, InnerBase::Platonic, 2, 1e-7).unwrap();
    let b3 = build_prismatic(3, 4, 4, InnerBase::Platonic, 3, 1e-7).unwrap();
    let q2 = quotient_complex(&b2.surface).unwrap();
    let q3 = quotient_complex(&b3.surface).unwrap();
    assert_eq!(q2, q3);
}
