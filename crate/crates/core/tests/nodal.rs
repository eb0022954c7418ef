use std::f64::consts::PI;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subnodal::discretize::*;
use subnodal::eigensolve::*;
use subnodal::nodal::*;
use subnodal::vf_algebra::*;

/// `ψ_k(x) cos(k y)` on a Grushin grid with `nx` nodes (walls included),
/// `ψ_k` the discrete ground state of `−∂x² + k²x²` on the same x nodes.
fn grushin_mode(g: &Grid, k: f64) -> Vec<f64> {
    let nx = g.axis(0).count;
    let op = assemble_schrodinger_1d(Potential::Power { k, alpha: 1 }, (-1.0, 1.0), nx - 2).unwrap();
    let psi = smallest_eigenpairs(&op, 1, 1e-10).unwrap().remove(0).vector;
    (0..g.n_unknowns())
        .map(|u| {
            let m = g.unknown_multi(u);
            psi[m[0] - 1] * (k * g.axis(1).coord(m[1])).cos()
        })
        .collect()
}

fn heisenberg_grid(counts: &[usize]) -> Grid {
    build_grid(SRStructure::heisenberg().domain(), counts).unwrap()
}

#[test]
fn positive_vector_is_one_domain() {
    let g = heisenberg_grid(&[6, 5, 4]);
    let d = nodal_decomposition(&g, &vec![1.0; g.n_unknowns()], DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(d.domain_count, 1);
    assert!(!d.has_nodal_cells());
    assert_eq!(d.domain_sizes, vec![g.n_unknowns()]);
}

#[test]
fn all_nodal_vector() {
    let g = heisenberg_grid(&[6, 5, 4]);
    let d = nodal_decomposition(&g, &vec![0.0; g.n_unknowns()], DEFAULT_ZERO_TOL).unwrap();
    assert!(d.is_all_nodal());
    assert_eq!(d.nodal_nodes.len(), g.n_unknowns());
    assert!(nodal_decomposition(&g, &[1.0], 0.0).is_err());
}

#[test]
fn phi_1_2_has_eight_domains() {
    let g = heisenberg_grid(&[33, 32, 4]);
    let c = (2.0 * PI).sqrt();
    let v = g.sample_unknowns(|x| (c * x[0]).sin() * (2.0 * c * x[1]).sin());
    let d = nodal_decomposition(&g, &v, DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(d.domain_count, 8);
}

#[test]
fn grushin_psi3_has_six_domains() {
    let s = SRStructure::grushin(1);
    let g = build_grid(s.domain(), &[65, 64]).unwrap();
    let v = grushin_mode(&g, 3.0);
    let d = nodal_decomposition(&g, &v, DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(d.domain_count, 6);
    assert!(!d.sign_change_edges.is_empty());
    for e in &d.sign_change_edges {
        assert_eq!(e.axis, 1);
        assert!(v[e.a] * v[e.b] < 0.0);
    }
    let pts = d.cell_points(&g);
    assert_eq!(pts.len(), d.nodal_nodes.len() + d.sign_change_edges.len());
}

#[test]
fn crossing_counts() {
    let s = SRStructure::grushin(1);
    let g = build_grid(s.domain(), &[65, 64]).unwrap();
    let v = grushin_mode(&g, 4.0);
    assert!(g.axis(0).coord(32).abs() < 1e-12);
    assert_eq!(directional_crossing_count(&g, &v, 1, &[32, 0]).unwrap(), 8);
    assert_eq!(directional_crossing_count(&g, &v, 0, &[0, 0]).unwrap(), 0);
    assert_eq!(directional_crossing_count(&g, &vec![2.0; g.n_unknowns()], 1, &[10, 0]).unwrap(), 0);
    assert!(directional_crossing_count(&g, &v, 1, &[65, 0]).is_err());
    assert!(directional_crossing_count(&g, &v, 2, &[1, 0]).is_err());
}

fn pair(value: f64, n: usize) -> EigenPair {
    EigenPair { value, vector: vec![0.0; n], residual: 0.0 }
}

#[test]
fn courant_ground_and_negative_control() {
    let g = heisenberg_grid(&[12, 10, 4]);
    let pos = nodal_decomposition(&g, &vec![1.0; g.n_unknowns()], DEFAULT_ZERO_TOL).unwrap();
    // ten y-arcs: sin(5·√(2π)·y) has ten sign arcs on the circle
    let c = (2.0 * PI).sqrt();
    let ten = g.sample_unknowns(|x| (5.0 * c * x[1] + 0.1).sin());
    let ten = nodal_decomposition(&g, &ten, DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(ten.domain_count, 10);
    let n = g.n_unknowns();
    let spec = vec![pair(1.0, n), pair(2.0, n), pair(3.0, n)];
    let rep = courant_check(&spec, &[pos.clone(), ten, pos.clone()]);
    assert_eq!(rep.rows[0].domain_count, 1);
    assert!(rep.rows[0].pass && rep.rows[0].strong_pass);
    assert!(!rep.rows[1].pass);
    assert_eq!(rep.rows[1].courant_bound, 2);
    assert_eq!(rep.violations, 1);
    assert!(!rep.pass());

    let spec = vec![pair(1.0, n), pair(2.0, n), pair(2.0 + 1e-9, n)];
    let rep = courant_check(&spec, &[pos.clone(), pos.clone(), pos]);
    assert_eq!((rep.rows[2].mode_index, rep.rows[2].mult, rep.rows[2].courant_bound), (2, 2, 3));
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("mode_index,eigenvalue,mult,domain_count,courant_bound,pass"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn heisenberg_4pi_mode_has_four_domains() {
    let h = SRStructure::heisenberg();
    let g = heisenberg_grid(&[32, 32, 48]);
    let a = assemble_sublaplacian(&h, &g).unwrap();
    let modes = fourier_spectrum(&a, &g, 120).unwrap();
    let pairs: Vec<EigenPair> = modes.iter().map(|(p, _)| p.clone()).collect();
    let decs: Vec<NodalDecomposition> =
        pairs.iter().map(|p| nodal_decomposition(&g, &p.vector, DEFAULT_ZERO_TOL).unwrap()).collect();
    let rep = courant_check(&pairs, &decs);
    assert!(rep.pass());
    let i = modes
        .iter()
        .position(|(p, l)| l.wave == vec![1, 0] && l.level == 1 && (p.value / (4.0 * PI) - 1.0).abs() < 0.03)
        .expect("4π mode present");
    assert_eq!(decs[i].domain_count, 4);
    assert!(rep.rows[i].courant_bound >= 4);
}

#[test]
fn thickening_never_adds_domains_on_examples() {
    let s = SRStructure::grushin(1);
    let g = build_grid(s.domain(), &[65, 64]).unwrap();
    let c = (2.0 * PI).sqrt();
    let gh = heisenberg_grid(&[33, 32, 4]);
    let cases = [
        (g.clone(), grushin_mode(&g, 3.0)),
        (g.clone(), grushin_mode(&g, 7.0)),
        (gh.clone(), gh.sample_unknowns(|x| (c * x[0]).sin() * (2.0 * c * x[1]).sin())),
    ];
    for (grid, v) in &cases {
        let mut last = usize::MAX;
        for tol in [0.0, 1e-9, 1e-6, 1e-3, 1e-2, 0.05] {
            let n = nodal_decomposition(grid, v, tol).unwrap().domain_count;
            assert!(n <= last, "count grew to {n} at tol {tol}");
            last = n;
        }
    }
}

#[test]
fn cell_dump() {
    let g = heisenberg_grid(&[6, 8, 4]);
    let c = (2.0 * PI).sqrt();
    let v = g.sample_unknowns(|x| (c * x[1] + 0.2).sin());
    let d = nodal_decomposition(&g, &v, DEFAULT_ZERO_TOL).unwrap();
    let mut buf = Vec::new();
    d.write_cells(&g, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + d.sign_change_edges.len());
    assert_eq!(d.sign_change_edges.len(), 2 * 4 * 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partition_is_order_independent(seed in 0u64..10_000, waves in 1usize..4) {
        let g = heisenberg_grid(&[9, 8, 6]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..6.0)).collect();
        let v = g.sample_unknowns(|x| (waves as f64 * x[1] * 2.5 + phase[0]).sin() + 0.7 * (x[2] + phase[1]).cos() + 0.3 * (3.0 * x[0] + phase[2]).sin());
        let mut edges = grid_edges(&g);
        let d1 = nodal_decomposition_with_edges(&g, &v, DEFAULT_ZERO_TOL, &edges).unwrap();
        edges.shuffle(&mut rng);
        let d2 = nodal_decomposition_with_edges(&g, &v, DEFAULT_ZERO_TOL, &edges).unwrap();
        prop_assert_eq!(&d1, &d2);
        for (u, &l) in d1.labels.iter().enumerate() {
            prop_assert_eq!(l == NODAL, d1.nodal_nodes.contains(&u));
        }
        prop_assert_eq!(d1.domain_sizes.iter().sum::<usize>() + d1.nodal_nodes.len(), g.n_unknowns());
    }
}
