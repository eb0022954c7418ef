use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subnodal::discretize::*;
use subnodal::eigensolve::*;
use subnodal::vf_algebra::*;

fn line(lo: f64, hi: f64) -> SRStructure {
    SRStructure::new("line", vec![VectorField::partial(1, 0)], Polynomial::one(1), vec![AxisDomain::Dirichlet { lo, hi }]).unwrap()
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn three_point_stencil() {
    let s = line(0.0, 1.0);
    let g = build_grid(s.domain(), &[5]).unwrap();
    assert_eq!(g.n_unknowns(), 3);
    let a = assemble_sublaplacian(&s, &g).unwrap();
    let d = a.matrix.to_dense();
    for i in 0..3usize {
        for j in 0..3 {
            let want = match i.abs_diff(j) {
                0 => 32.0,
                1 => -16.0,
                _ => 0.0,
            };
            assert!((d[(i, j)] - want).abs() < 1e-12, "entry ({i},{j}) = {}", d[(i, j)]);
        }
    }
    let mut ev: Vec<f64> = d.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let r2 = 2f64.sqrt();
    for (got, want) in ev.iter().zip([(2.0 - r2) * 16.0, 32.0, (2.0 + r2) * 16.0]) {
        assert!((got - want).abs() < 1e-10);
    }
}

#[test]
fn unknown_counts() {
    let h = SRStructure::heisenberg();
    let g = build_grid(h.domain(), &[48, 48, 64]).unwrap();
    assert_eq!(g.n_unknowns(), 46 * 48 * 64);
    assert_eq!(g.id, "48x48x64");
    let s = SRStructure::grushin(1);
    let g = build_grid(s.domain(), &[64, 64]).unwrap();
    assert_eq!(g.n_unknowns(), 62 * 64);
    assert_eq!(g.n_nodes(), 64 * 64);
    for u in [0, 17, 62 * 64 - 1] {
        assert_eq!(g.node_to_unknown(g.unknown_to_node(u)), Some(u));
    }
    assert!(g.is_wall_node(0));
}

#[test]
fn grid_errors() {
    let s = SRStructure::grushin(1);
    assert!(matches!(build_grid(s.domain(), &[2, 64]), Err(DiscretizeError::InvalidCount { axis: 0, count: 2 })));
    assert!(matches!(build_grid(s.domain(), &[8]), Err(DiscretizeError::DimensionMismatch { .. })));
    let shear = Shear { target: 2, source: 1, coeff: (2.0 * PI).sqrt() };
    let twisted = vec![
        AxisDomain::Twisted { len: (2.0 * PI).sqrt(), shear },
        AxisDomain::Periodic { len: 1.0 },
        AxisDomain::Periodic { len: 1.0 },
    ];
    assert_eq!(build_grid(&twisted, &[8, 8, 8]).unwrap_err(), DiscretizeError::UnsupportedTwist { axis: 0 });
}

#[test]
fn periodic_wrap() {
    let s = SRStructure::grushin(1);
    let g = build_grid(s.domain(), &[5, 8]).unwrap();
    let last = g.node_index(&[2, 7]);
    assert_eq!(g.neighbor(last, 1, 1), Some(g.node_index(&[2, 0])));
    assert_eq!(g.neighbor(g.node_index(&[0, 3]), 0, -1), None);
}

#[test]
fn nonzero_divergence_rejected() {
    let f = parse_vector_field("x*dx", 2).unwrap();
    let s = SRStructure::grushin(1);
    let bad = SRStructure::new("bad", vec![f], Polynomial::one(2), s.domain().to_vec()).unwrap();
    let g = build_grid(s.domain(), &[8, 8]).unwrap();
    let err = assemble_sublaplacian(&bad, &g).unwrap_err();
    assert!(matches!(err, DiscretizeError::NonzeroDivergence { field: 0, .. }));
    assert!(err.to_string().contains("measure correction"));
    let h = SRStructure::heisenberg();
    assert!(matches!(assemble_sublaplacian(&h, &g), Err(DiscretizeError::DimensionMismatch { .. })));
}

#[test]
fn grushin_symmetric_psd() {
    let s = SRStructure::grushin(1);
    let g = build_grid(s.domain(), &[64, 64]).unwrap();
    let a = assemble_sublaplacian(&s, &g).unwrap();
    assert!(a.symmetry_defect() < 1e-12);
    let p = smallest_eigenpairs(&a, 1, 1e-8).unwrap();
    assert!(p[0].value >= -1e-10);
}

#[test]
fn heisenberg_contains_4pi() {
    let h = SRStructure::heisenberg();
    let g = build_grid(h.domain(), &[48, 48, 64]).unwrap();
    let a = assemble_sublaplacian(&h, &g).unwrap();
    let sector = axis_constant_sector(&a, &g, 2).unwrap();
    let pairs = smallest_eigenpairs(&sector.reduced, 6, 1e-8).unwrap();
    assert!(pairs.iter().any(|p| (p.value / (4.0 * PI) - 1.0).abs() < 0.03));
}

#[test]
fn refinement_order_on_phi11() {
    let h = SRStructure::heisenberg();
    let c = (2.0 * PI).sqrt();
    let mut errs = Vec::new();
    for (nx, ny) in [(17, 16), (33, 32)] {
        let g = build_grid(h.domain(), &[nx, ny, 4]).unwrap();
        let a = assemble_sublaplacian(&h, &g).unwrap();
        let phi = g.sample_unknowns(|x| (c * x[0]).sin() * (c * x[1]).sin());
        let aphi = a.apply(&phi);
        let err = aphi.iter().zip(&phi).map(|(y, f)| (y - 4.0 * PI * f).abs()).fold(0.0, f64::max);
        errs.push(err);
    }
    let order = (errs[0] / errs[1]).log2();
    assert!(order >= 1.8, "observed order {order}, errors {errs:?}");
}

#[test]
fn schrodinger_examples() {
    let a = (PI / 2.0).sqrt();
    let op = assemble_schrodinger_1d(Potential::Harmonic { m: 32.0 }, (-a, a), 4096).unwrap();
    let p = smallest_eigenpairs(&op, 1, 1e-10).unwrap();
    assert!((p[0].value / 32.0 - 1.0).abs() < 0.02);
    assert!(p[0].vector.iter().all(|&v| v >= -1e-12));

    let op = assemble_schrodinger_1d(Potential::Power { k: 0.0, alpha: 1 }, (-1.0, 1.0), 2000).unwrap();
    let p = smallest_eigenpairs(&op, 1, 1e-10).unwrap();
    assert!((p[0].value / (PI * PI / 4.0) - 1.0).abs() < 1e-5);

    let ks = [8.0f64, 16.0, 32.0, 64.0];
    let mus: Vec<f64> = ks
        .iter()
        .map(|&k| {
            let op = assemble_schrodinger_1d(Potential::Power { k, alpha: 1 }, (-1.0, 1.0), 2048).unwrap();
            smallest_eigenpairs(&op, 1, 1e-10).unwrap()[0].value
        })
        .collect();
    let slope = (mus[3] / mus[0]).ln() / (ks[3] / ks[0]).ln();
    assert!((slope - 1.0).abs() < 0.05, "slope {slope}");

    assert!(assemble_schrodinger_1d(Potential::Harmonic { m: 1.0 }, (0.0, 1.0), 8).is_err());
}

#[test]
fn blend_identity_and_ordering() {
    let s = SRStructure::grushin(1);
    let g = build_grid(s.domain(), &[24, 24]).unwrap();
    let a0 = assemble_sublaplacian(&s, &g).unwrap();
    assert_eq!(assemble_riemannian_blend(&s, &g, 0.0).unwrap().matrix, a0.matrix);
    let a1 = assemble_riemannian_blend(&s, &g, 1.0).unwrap();
    assert!(a1.symmetry_defect() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let v = random_vec(a0.dim(), &mut rng);
        assert!(a1.quadratic_form(&v) >= a0.quadratic_form(&v) - 1e-9);
    }
    let l1 = |eps: f64| {
        let a = assemble_riemannian_blend(&s, &g, eps).unwrap();
        smallest_eigenpairs(&a, 1, 1e-10).unwrap()[0].value
    };
    assert!(l1(0.2) >= l1(0.1) - 1e-9);
}

#[test]
fn dumps() {
    let s = line(0.0, 1.0);
    let g = build_grid(s.domain(), &[5]).unwrap();
    let a = assemble_sublaplacian(&s, &g).unwrap();
    let mut buf = Vec::new();
    a.write_dump(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# dimension 3 nnz 7 structure line"));
    assert_eq!(lines.count(), 7);
    let mut buf = Vec::new();
    g.write_dump(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains("# axis 0 dirichlet count 5"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

fn small_coeff() -> impl Strategy<Value = i64> {
    -3i64..=3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // a(y)∂x + b(x)∂y is divergence-free for any polynomials a, b.
    #[test]
    fn assembled_operators_are_symmetric_psd(
        a in proptest::collection::vec(small_coeff(), 3),
        b in proptest::collection::vec(small_coeff(), 3),
        seed in 0u64..1000,
    ) {
        let n = 2;
        let y = Polynomial::var(n, 1);
        let x = Polynomial::var(n, 0);
        let poly = |c: &[i64], v: &Polynomial| {
            let mut p = Polynomial::zero(n);
            for (k, &ck) in c.iter().enumerate() {
                p = &p + &v.pow(k as u32).scale(&rat(ck));
            }
            p
        };
        let f1 = &VectorField::directional(poly(&a, &y), 0) + &VectorField::partial(n, 1);
        let f2 = VectorField::directional(poly(&b, &x), 1);
        let dom = vec![AxisDomain::Dirichlet { lo: -1.0, hi: 1.0 }, AxisDomain::Periodic { len: 2.0 }];
        let s = SRStructure::new("random", vec![f1, f2], Polynomial::one(n), dom).unwrap();
        let g = build_grid(s.domain(), &[9, 10]).unwrap();
        let op = assemble_sublaplacian(&s, &g).unwrap();
        prop_assert!(op.symmetry_defect() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_vec(op.dim(), &mut rng);
        prop_assert!(op.quadratic_form(&v) >= -1e-10);
    }
}
