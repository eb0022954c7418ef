use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subnodal::discretize::*;
use subnodal::eigensolve::*;
use subnodal::vf_algebra::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn tridiag_op(d: &[f64], e: &[f64]) -> SparseSymmetricOperator {
    let n = d.len();
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, d[i]));
        if i + 1 < n {
            t.push((i, i + 1, e[i]));
            t.push((i + 1, i, e[i]));
        }
    }
    let meta = OperatorMeta { structure_id: "test".into(), grid_id: format!("{n}"), scheme: "manual".into() };
    SparseSymmetricOperator::new(Csr::from_triplets(n, n, t), vec![1.0; n], meta)
}

/// `∂x, ∂y` on `(0,1) × T_1`: a tensor Laplacian with known discrete spectrum.
fn flat_box() -> SRStructure {
    let fields = vec![VectorField::partial(2, 0), VectorField::partial(2, 1)];
    let dom = vec![AxisDomain::Dirichlet { lo: 0.0, hi: 1.0 }, AxisDomain::Periodic { len: 1.0 }];
    SRStructure::new("flat", fields, Polynomial::one(2), dom).unwrap()
}

fn flat_oracle(nx: usize, ny: usize) -> Vec<f64> {
    let hx = 1.0 / (nx - 1) as f64;
    let hy = 1.0 / ny as f64;
    let mut all = Vec::new();
    for j in 1..nx - 1 {
        for l in 0..ny {
            let a = 4.0 / (hx * hx) * (j as f64 * PI * hx / 2.0).sin().powi(2);
            let b = 4.0 / (hy * hy) * (l as f64 * PI / ny as f64).sin().powi(2);
            all.push(a + b);
        }
    }
    all.sort_by(f64::total_cmp);
    all
}

fn check_pairs(a: &SparseSymmetricOperator, pairs: &[EigenPair], tol: f64) {
    for w in pairs.windows(2) {
        assert!(w[0].value <= w[1].value);
    }
    for (i, p) in pairs.iter().enumerate() {
        assert!(p.residual <= tol * (p.value.abs() + 1.0), "residual {} at {}", p.residual, p.value);
        assert!((residual_norm(a, p).unwrap() - p.residual).abs() < 1e-12);
        assert!((dot(&p.vector, &p.vector) - 1.0).abs() < 1e-12);
        for q in &pairs[..i] {
            assert!(dot(&p.vector, &q.vector).abs() < 1e-8);
        }
    }
}

#[test]
fn three_by_three() {
    let a = tridiag_op(&[32.0; 3], &[-16.0; 2]);
    let p = smallest_eigenpairs(&a, 3, 1e-10).unwrap();
    let r2 = 2f64.sqrt();
    for (got, want) in p.iter().zip([(2.0 - r2) * 16.0, 32.0, (2.0 + r2) * 16.0]) {
        assert!((got.value - want).abs() < 1e-10);
        assert!(got.residual <= 1e-12);
    }
}

#[test]
fn dirichlet_line_both_paths() {
    let n = 200;
    let h = 1.0 / (n + 1) as f64;
    let a = tridiag_op(&vec![2.0 / (h * h); n], &vec![-1.0 / (h * h); n - 1]);
    let exact = |j: usize| 4.0 / (h * h) * (j as f64 * PI * h / 2.0).sin().powi(2);
    let dense = smallest_eigenpairs(&a, 8, 1e-9).unwrap();
    let opts = SolverOptions { dense_threshold: 0, ..Default::default() };
    let tri = smallest_eigenpairs_with(&a, 8, 1e-9, &opts).unwrap();
    for j in 0..8 {
        assert!((dense[j].value - exact(j + 1)).abs() < 1e-8 * exact(j + 1));
        assert!((tri[j].value - exact(j + 1)).abs() < 1e-10 * exact(j + 1));
        let cont = ((j + 1) as f64 * PI).powi(2);
        // relative gap between continuum and discrete values is about (jπh)²/12
        assert!(cont / tri[j].value - 1.0 < 1.01 * cont * h * h / 12.0);
    }
    check_pairs(&a, &tri, 1e-9);
    assert!(tri[0].vector.iter().all(|&v| v > 0.0));
}

#[test]
fn lobpcg_matches_tensor_oracle() {
    let s = flat_box();
    let (nx, ny) = (26, 24);
    let g = build_grid(s.domain(), &[nx, ny]).unwrap();
    let a = assemble_sublaplacian(&s, &g).unwrap();
    let oracle = flat_oracle(nx, ny);
    for band in [true, false] {
        let opts = SolverOptions { dense_threshold: 0, band_preconditioner: band, ..Default::default() };
        let p = smallest_eigenpairs_with(&a, 12, 1e-9, &opts).unwrap();
        for (got, want) in p.iter().zip(&oracle) {
            assert!((got.value - want).abs() < 1e-7 * want, "{} vs {want}", got.value);
        }
        check_pairs(&a, &p, 1e-9);
    }
}

#[test]
fn solver_is_deterministic() {
    let s = flat_box();
    let g = build_grid(s.domain(), &[30, 32]).unwrap();
    let a = assemble_sublaplacian(&s, &g).unwrap();
    let opts = SolverOptions { dense_threshold: 0, seed: 99, ..Default::default() };
    let p1 = smallest_eigenpairs_with(&a, 6, 1e-8, &opts).unwrap();
    let p2 = smallest_eigenpairs_with(&a, 6, 1e-8, &opts).unwrap();
    assert_eq!(p1, p2);
}

#[test]
fn solver_errors() {
    let a = tridiag_op(&[2.0; 5], &[-1.0; 4]);
    assert_eq!(smallest_eigenpairs(&a, 6, 1e-8).unwrap_err(), EigenError::InvalidCount { k: 6, dim: 5 });
    assert_eq!(smallest_eigenpairs(&a, 0, 1e-8).unwrap_err(), EigenError::InvalidCount { k: 0, dim: 5 });
    assert!(matches!(smallest_eigenpairs(&a, 1, 0.0), Err(EigenError::InvalidTolerance(_))));
    let s = flat_box();
    let g = build_grid(s.domain(), &[40, 40]).unwrap();
    let a = assemble_sublaplacian(&s, &g).unwrap();
    let opts = SolverOptions { dense_threshold: 0, max_iter: 1, band_preconditioner: false, ..Default::default() };
    match smallest_eigenpairs_with(&a, 4, 1e-12, &opts) {
        Err(EigenError::NotConverged { residuals, .. }) => assert_eq!(residuals.len(), 4),
        other => panic!("expected non-convergence, got {:?}", other.map(|p| p.len())),
    }
}

#[test]
fn nonunit_mass() {
    let n = 600;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d: Vec<f64> = (0..n).map(|_| 2.0 + rng.gen_range(0.0..1.0)).collect();
    let e = vec![-1.0; n - 1];
    let mut a = tridiag_op(&d, &e);
    a.mass = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let lob = smallest_eigenpairs_with(&a, 5, 1e-10, &SolverOptions { dense_threshold: 0, ..Default::default() }).unwrap();
    let dense = smallest_eigenpairs_with(&a, 5, 1e-10, &SolverOptions { dense_threshold: 10_000, ..Default::default() }).unwrap();
    for (p, q) in lob.iter().zip(&dense) {
        assert!((p.value - q.value).abs() < 1e-8);
        assert!(p.residual < 1e-8);
        let mnorm: f64 = p.vector.iter().zip(&a.mass).map(|(v, m)| m * v * v).sum();
        assert!((mnorm - 1.0).abs() < 1e-10);
    }
}

#[test]
fn rayleigh_examples() {
    let s = SRStructure::grushin(1);
    let g = build_grid(s.domain(), &[20, 20]).unwrap();
    let a = assemble_sublaplacian(&s, &g).unwrap();
    let ops = difference_operators(s.fields(), &g);
    let w = node_weights(&s, &g);
    let p = smallest_eigenpairs(&a, 1, 1e-10).unwrap();
    let rq = rayleigh_quotient(&ops, &w, &a.mass, &p[0].vector).unwrap();
    assert!((rq - p[0].value).abs() < 1e-8);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let v: Vec<f64> = (0..a.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q = rayleigh_quotient(&ops, &w, &a.mass, &v).unwrap();
        assert!(q >= p[0].value - 1e-8);
        let direct = a.quadratic_form(&v) / dot(&v, &v);
        assert!((q - direct).abs() < 1e-9 * direct);
        let scaled: Vec<f64> = v.iter().map(|x| -3.5 * x).collect();
        assert!((rayleigh_quotient(&ops, &w, &a.mass, &scaled).unwrap() - q).abs() < 1e-9 * q);
    }
    assert_eq!(rayleigh_quotient(&ops, &w, &a.mass, &vec![0.0; a.dim()]), Err(EigenError::ZeroVector));

    let torus = SRStructure::new(
        "torus",
        vec![VectorField::partial(2, 0), VectorField::partial(2, 1)],
        Polynomial::one(2),
        vec![AxisDomain::Periodic { len: 1.0 }, AxisDomain::Periodic { len: 2.0 }],
    )
    .unwrap();
    let g = build_grid(torus.domain(), &[8, 9]).unwrap();
    let ops = difference_operators(torus.fields(), &g);
    let w = node_weights(&torus, &g);
    assert_eq!(rayleigh_quotient(&ops, &w, &vec![1.0; 72], &vec![1.0; 72]).unwrap(), 0.0);
}

#[test]
fn residual_perturbation_bound() {
    let a = tridiag_op(&[32.0; 3], &[-16.0; 2]);
    let p = smallest_eigenpairs(&a, 1, 1e-12).unwrap().remove(0);
    let delta = [1e-3, -2e-3, 5e-4];
    let v: Vec<f64> = p.vector.iter().zip(&delta).map(|(x, d)| x + d).collect();
    let r = residual_norm(&a, &EigenPair { value: p.value, vector: v, residual: 0.0 }).unwrap();
    let dn = dot(&delta, &delta).sqrt();
    let anorm = a.matrix.to_dense().norm();
    assert!(r <= anorm * dn + p.value.abs() * dn + 1e-12);
    assert!(r > 0.0);
}

#[test]
fn grushin_refinement_ladder() {
    let s = SRStructure::grushin(1);
    let l: Vec<f64> = [(17, 16), (33, 32), (65, 64)]
        .iter()
        .map(|&(nx, ny)| {
            let g = build_grid(s.domain(), &[nx, ny]).unwrap();
            let a = assemble_sublaplacian(&s, &g).unwrap();
            smallest_eigenpairs(&a, 1, 1e-10).unwrap()[0].value
        })
        .collect();
    let d1 = (l[1] - l[0]).abs();
    let d2 = (l[2] - l[1]).abs();
    assert!(d2 < d1, "ladder {l:?}");
    assert!((l[1] - l[0]).signum() == (l[2] - l[1]).signum(), "non-monotone ladder {l:?}");
}

#[test]
fn cluster_rule() {
    let v = [1.0, 1.0 + 1e-7, 2.0, 3.0, 3.0 + 3e-6, 3.0 + 6e-6];
    let c = clusters(&v);
    assert_eq!(c.iter().map(|c| (c.first, c.mult)).collect::<Vec<_>>(), vec![(0, 2), (2, 1), (3, 3)]);
    assert!((c[0].gap_above - (1.0 - 1e-7)).abs() < 1e-12);
    assert!(c[2].gap_above.is_infinite());
    let per = mode_clusters(&v);
    assert_eq!(per[4].first, 3);
    assert_eq!(per[4].mult, 3);
}

#[test]
fn fourier_blocks_match_full_solve() {
    let h = SRStructure::heisenberg();
    let g = build_grid(h.domain(), &[8, 8, 6]).unwrap();
    let a = assemble_sublaplacian(&h, &g).unwrap();
    let full = smallest_eigenpairs(&a, 40, 1e-10).unwrap();
    let four = fourier_spectrum(&a, &g, 40).unwrap();
    for (p, (q, _)) in full.iter().zip(&four) {
        assert!((p.value - q.value).abs() < 1e-9 * (p.value + 1.0));
        assert!(q.residual < 1e-9 * (q.value + 1.0));
    }
    let vecs: Vec<EigenPair> = four.into_iter().map(|(p, _)| p).collect();
    check_pairs(&a, &vecs, 1e-9);
}

#[test]
fn axis_sector_is_exact() {
    let h = SRStructure::heisenberg();
    let g = build_grid(h.domain(), &[10, 8, 6]).unwrap();
    let a = assemble_sublaplacian(&h, &g).unwrap();
    let sector = axis_constant_sector(&a, &g, 2).unwrap();
    assert_eq!(sector.reduced.dim(), 8 * 8);
    let p = smallest_eigenpairs(&sector.reduced, 10, 1e-10).unwrap();
    for q in &p {
        let lifted = sector.lift_pair(&a, q).unwrap();
        assert!(lifted.residual < 1e-9 * (q.value + 1.0));
        assert!((dot(&lifted.vector, &lifted.vector) - 1.0).abs() < 1e-12);
    }
    assert!(axis_constant_sector(&a, &g, 0).is_err());

    let sheared = SRStructure::new(
        "sheared",
        vec![VectorField::directional(Polynomial::var(2, 1), 0), VectorField::partial(2, 1)],
        Polynomial::one(2),
        vec![AxisDomain::Dirichlet { lo: 0.0, hi: 1.0 }, AxisDomain::Periodic { len: 1.0 }],
    )
    .unwrap();
    let g = build_grid(sheared.domain(), &[8, 8]).unwrap();
    let a = assemble_sublaplacian(&sheared, &g).unwrap();
    assert!(matches!(axis_constant_sector(&a, &g, 1), Err(EigenError::NotInvariant(_))));
    assert!(matches!(fourier_spectrum(&a, &g, 3), Err(EigenError::NotInvariant(_))));
}

#[test]
fn tridiagonal_helpers() {
    let d = [2.0, 2.0, 2.0, 2.0];
    let e = [-1.0, -1.0, -1.0];
    assert_eq!(sturm_count(&d, &e, 0.0), 0);
    assert_eq!(sturm_count(&d, &e, 2.0 + 1e-9), 2);
    assert_eq!(sturm_count(&d, &e, 5.0), 4);
    let pairs = tridiagonal_eigenpairs(&d, &e, 4);
    for (j, (lam, v)) in pairs.iter().enumerate() {
        let want = 2.0 - 2.0 * ((j + 1) as f64 * PI / 5.0).cos();
        assert!((lam - want).abs() < 1e-13);
        let r: f64 = (0..4)
            .map(|i| {
                let mut y = d[i] * v[i] - lam * v[i];
                if i > 0 {
                    y += e[i - 1] * v[i - 1];
                }
                if i < 3 {
                    y += e[i] * v[i + 1];
                }
                y * y
            })
            .sum();
        assert!(r.sqrt() < 1e-12);
    }
}

#[test]
fn eigenpair_dump() {
    let p = EigenPair { value: 2.5, vector: vec![0.6, -0.8], residual: 1e-12 };
    let mut buf = Vec::new();
    write_eigenpair(&p, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "# value 2.5 residual 1e-12\n0.6\n-0.8\n");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_tridiagonal_matches_dense(
        d in proptest::collection::vec(-5.0f64..5.0, 12..40),
        seed in 0u64..500,
    ) {
        let n = d.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let op = tridiag_op(&d, &e);
        let k = n / 3;
        let dense = smallest_eigenpairs(&op, k, 1e-9).unwrap();
        let tri = tridiagonal_eigenvalues(&d, &e, k);
        for (p, t) in dense.iter().zip(&tri) {
            prop_assert!((p.value - t).abs() < 1e-9 * (t.abs() + 1.0));
        }
    }
}
