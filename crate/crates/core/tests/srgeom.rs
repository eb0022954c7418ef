use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subnodal::discretize::*;
use subnodal::nodal::*;
use subnodal::srgeom::*;
use subnodal::vf_algebra::*;

fn plane() -> SRStructure {
    let fields = vec![VectorField::partial(2, 0), VectorField::partial(2, 1)];
    let domain = vec![AxisDomain::Dirichlet { lo: 0.0, hi: 1.0 }, AxisDomain::Dirichlet { lo: 0.0, hi: 1.0 }];
    SRStructure::new("plane", fields, Polynomial::one(2), domain).unwrap()
}

/// Grushin lattice `x ∈ [−1, 1]`, `y ∈ [−ylen/2, ylen/2]`, node at the origin.
fn grushin_grid(nx: usize, hy: f64, ny: usize) -> Grid {
    let half = hy * (ny - 1) as f64 / 2.0;
    Grid::new("grushin-test", vec![Axis::dirichlet(-1.0, 1.0, nx), Axis::dirichlet(-half, half, ny)]).unwrap()
}

#[test]
fn control_cost_examples() {
    let h = SRStructure::heisenberg();
    assert!((control_metric_cost(&h, &[0.0; 3], &[0.3, 0.0, 0.0]) - 0.09).abs() < 1e-14);
    assert!(control_metric_cost(&h, &[0.0; 3], &[0.0, 0.0, 1.0]).is_infinite());
    let g = SRStructure::grushin(1);
    for (x0, s) in [(0.5, 0.1), (-0.25, 0.3), (2.0, -1.0)] {
        let c = control_metric_cost(&g, &[x0, 0.0], &[0.0, s]);
        assert!((c - (s / x0).powi(2)).abs() < 1e-12 * c.max(1.0), "{x0} {s} {c}");
    }
    let g2 = SRStructure::grushin(2);
    let c = control_metric_cost(&g2, &[0.5, 0.0], &[0.0, 0.1]);
    assert!((c - (0.1f64 / 0.25).powi(2)).abs() < 1e-12);
    assert!(control_metric_cost(&g, &[0.0, 0.0], &[0.0, 0.1]).is_infinite());
    // slightly off the distribution, rejected at the default tolerance, accepted when loosened
    assert!(control_metric_cost(&h, &[0.0; 3], &[1.0, 0.0, 1e-6]).is_infinite());
    assert!(control_metric_cost_with(&h, &[0.0; 3], &[1.0, 0.0, 1e-6], 1e-3).is_finite());
}

#[test]
fn primitive_offsets_are_coprime() {
    let o = primitive_offsets(&[1, 1]);
    assert_eq!(o.len(), 8);
    let o = primitive_offsets(&[2, 2]);
    assert_eq!(o.len(), 16);
    assert!(!o.contains(&vec![2, 2]) && !o.contains(&vec![0, 2]));
}

#[test]
fn distance_to_source_is_zero_and_errors() {
    let s = plane();
    let g = build_grid(s.domain(), &[11, 11]).unwrap();
    let f = sr_distance_map(&s, &g, &Sources::Nodes(vec![37]), StencilSpec::generic(2, 1), DEFAULT_ETA).unwrap();
    assert_eq!(f.values[37], 0.0);
    assert_eq!(f.unreachable, 0);
    f.ensure_connected().unwrap();
    assert_eq!(sr_distance_map(&s, &g, &Sources::Nodes(vec![]), StencilSpec::generic(2, 1), DEFAULT_ETA).unwrap_err(), SrError::EmptySources);
    assert!(matches!(
        sr_distance_map(&s, &g, &Sources::Nodes(vec![0]), StencilSpec::generic(2, 0), DEFAULT_ETA),
        Err(SrError::InvalidStencil(_))
    ));
    let mut out = Vec::new();
    f.write_dump(&mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), g.n_nodes() + 1);
}

#[test]
fn euclidean_plane_distances() {
    // radius-1 stencil gives the octagonal metric, exact along the axes and diagonals
    let s = plane();
    let g = build_grid(s.domain(), &[11, 11]).unwrap();
    let f = sr_distance_map(&s, &g, &Sources::Nodes(vec![0]), StencilSpec::generic(2, 1), DEFAULT_ETA).unwrap();
    assert!((f.values[g.node_index(&[10, 0])] - 1.0).abs() < 1e-12);
    assert!((f.values[g.node_index(&[10, 10])] - 2f64.sqrt()).abs() < 1e-12);
    let far = f.values[g.node_index(&[10, 5])];
    assert!((far - (0.5 * 2f64.sqrt() + 0.5)).abs() < 1e-12);
    let f3 = sr_distance_map(&s, &g, &Sources::Nodes(vec![0]), StencilSpec::generic(2, 3), DEFAULT_ETA).unwrap();
    assert!((f3.values[g.node_index(&[10, 5])] - 1.25f64.sqrt()).abs() < 0.02);
}

#[test]
fn heisenberg_axis_distance() {
    let s = SRStructure::heisenberg();
    let g = build_grid(s.domain(), &[65, 64, 64]).unwrap();
    let origin = g.node_index(&[32, 0, 0]);
    let f = sr_distance_map(&s, &g, &Sources::Nodes(vec![origin]), StencilSpec::generic(3, 2), DEFAULT_ETA).unwrap();
    let h = g.axis(0).h;
    for i in 37..=57 {
        let t = (i - 32) as f64 * h;
        let d = f.values[g.node_index(&[i, 0, 0])];
        assert!((d / t - 1.0).abs() < 0.03, "t {t} d {d}");
    }
    // vertical separation costs far more than its Euclidean length
    let dz = f.values[g.node_index(&[32, 0, 1])];
    assert!(dz > 10.0 * g.axis(2).h || dz.is_infinite());
}

#[test]
fn grushin_vertical_exponent() {
    let s = SRStructure::grushin(1);
    let g = grushin_grid(81, 0.0025, 241);
    let src = g.node_index(&[40, 120]);
    let f = sr_distance_map(&s, &g, &Sources::Nodes(vec![src]), StencilSpec::Generic { radius: vec![2, 40] }, DEFAULT_ETA).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in [4usize, 8, 16, 32, 64] {
        let delta = j as f64 * 0.0025;
        xs.push(delta.ln());
        ys.push(f.values[g.node_index(&[40, 120 + j])].ln());
    }
    let slope = least_squares_slope(&xs, &ys);
    assert!((slope - 0.5).abs() < 0.06, "slope {slope}");
}

#[test]
fn distances_are_symmetric() {
    let s = SRStructure::grushin(1);
    let g = grushin_grid(41, 0.01, 41);
    let graph = StencilGraph::new(&s, &g, StencilSpec::Generic { radius: vec![2, 6] }, DEFAULT_ETA).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..12 {
        let p = rng.gen_range(0..g.n_nodes());
        let q = rng.gen_range(0..g.n_nodes());
        let dp = graph.distances(&[(p, 0.0)], f64::INFINITY);
        let dq = graph.distances(&[(q, 0.0)], f64::INFINITY);
        assert!((dp[q] - dq[p]).abs() <= 1e-9, "{} {}", dp[q], dq[p]);
    }
}

#[test]
fn larger_stencil_never_increases_distances() {
    let s = SRStructure::grushin(1);
    let g = grushin_grid(31, 0.01, 31);
    let src = Sources::Nodes(vec![g.node_index(&[15, 15]), g.node_index(&[3, 27])]);
    let mut prev: Option<Vec<f64>> = None;
    for r in [(1, 1), (2, 3), (3, 6)] {
        let f = sr_distance_map(&s, &g, &src, StencilSpec::Generic { radius: vec![r.0, r.1] }, DEFAULT_ETA).unwrap();
        if let Some(p) = &prev {
            for (a, b) in f.values.iter().zip(p) {
                assert!(*a <= *b + 1e-12);
            }
        }
        prev = Some(f.values);
    }
}

#[test]
fn completion_mode_projects_to_grushin() {
    // ∂x, ∂z + x ∂y with h_y = h_x h_z / 2 makes the completed edges exact
    let lift = desingularize_grushin(1);
    let h = 0.1;
    let g3 = Grid::new(
        "lift",
        vec![Axis::dirichlet(-1.0, 1.0, 21), Axis::dirichlet(-0.2, 0.2, 81), Axis::dirichlet(-0.8, 0.8, 17)],
    )
    .unwrap();
    assert!((g3.axis(1).h - h * h / 2.0).abs() < 1e-15);
    let spec = StencilSpec::Completion { driving: vec![0, 2], radius: vec![3, 3] };
    let src3 = g3.node_index(&[10, 40, 8]);
    let d3 = sr_distance_map(&lift, &g3, &Sources::Nodes(vec![src3]), spec, DEFAULT_ETA).unwrap();
    let s = SRStructure::grushin(1);
    let g2 = Grid::new("plane", vec![g3.axis(0).clone(), g3.axis(1).clone()]).unwrap();
    let d2 = sr_distance_map(&s, &g2, &Sources::Nodes(vec![g2.node_index(&[10, 40])]), StencilSpec::Generic { radius: vec![2, 40] }, DEFAULT_ETA).unwrap();
    let mut worst: f64 = 0.0;
    for (i, j) in [(14, 40), (16, 50), (12, 60), (6, 30), (18, 44), (10, 56)] {
        let proj = (0..17).map(|k| d3.values[g3.node_index(&[i, j, k])]).fold(f64::INFINITY, f64::min);
        let plane = d2.values[g2.node_index(&[i, j])];
        worst = worst.max((proj / plane - 1.0).abs());
    }
    assert!(worst < 0.1, "{worst}");
    assert!(matches!(
        StencilGraph::new(&lift, &g3, StencilSpec::Completion { driving: vec![1, 2], radius: vec![1, 1] }, DEFAULT_ETA),
        Err(SrError::InvalidStencil(_))
    ));
}

fn grushin_ballbox(alpha: u32, eps: &[f64]) -> BallBoxReport {
    let s = SRStructure::grushin(alpha);
    let c = if alpha == 1 { 0.35 } else { 0.3 };
    let opts = BallBoxOptions { nodes: 128, window: vec![1.3, c], spec: StencilSpec::generic(2, 3), eta: DEFAULT_ETA };
    ball_box_check(&s, &[0.0, 0.0], eps, &[1, alpha + 1], &opts).unwrap()
}

#[test]
fn ball_box_at_singular_point() {
    let r = grushin_ballbox(1, &[0.05, 0.1, 0.2, 0.4]);
    for row in &r.rows {
        assert!(row.inner > 0.0 && row.inner <= row.outer, "{row:?}");
        assert!(row.ratio <= 4.0, "{row:?}");
        assert!(!row.truncated, "{row:?}");
        assert!(row.nodes_in_ball >= 1);
    }
    assert!(r.max_ratio() <= 4.0);
}

#[test]
fn ball_box_at_elliptic_point() {
    let s = SRStructure::grushin(1);
    let opts = BallBoxOptions { nodes: 96, window: vec![1.3, 1.3], spec: StencilSpec::generic(2, 3), eta: DEFAULT_ETA };
    let r = ball_box_check(&s, &[1.0, 0.0], &[0.05, 0.1, 0.2], &[1, 1], &opts).unwrap();
    for row in &r.rows {
        assert!(row.ratio <= 2.0, "{row:?}");
    }
}

#[test]
fn balls_are_nested() {
    let s = SRStructure::grushin(1);
    let g = grushin_grid(41, 0.01, 41);
    let graph = StencilGraph::new(&s, &g, StencilSpec::Generic { radius: vec![2, 6] }, DEFAULT_ETA).unwrap();
    let q = g.node_index(&[20, 20]);
    let d = graph.distances(&[(q, 0.0)], f64::INFINITY);
    let mut prev = 0;
    for eps in [0.0, 0.05, 0.1, 0.2, 0.4] {
        let ball: Vec<usize> = (0..g.n_nodes()).filter(|&p| d[p] <= eps).collect();
        assert!(ball.contains(&q));
        assert!(ball.len() >= prev);
        prev = ball.len();
        // the cutoff run agrees inside the ball
        let dc = graph.distances(&[(q, 0.0)], eps);
        for &p in &ball {
            assert_eq!(dc[p], d[p]);
        }
    }
}

#[test]
fn box_gauge_is_anisotropic() {
    assert!((box_gauge(&[0.1, 0.01], &[0.0, 0.0], &[1, 2], 0.1) - 1.0).abs() < 1e-12);
    assert!((box_gauge(&[0.05, 0.04], &[0.0, 0.0], &[1, 2], 0.1) - 2.0).abs() < 1e-12);
}

#[test]
fn box_count_single_node_and_square() {
    let s = plane();
    let g = build_grid(s.domain(), &[33, 33]).unwrap();
    let graph = StencilGraph::new(&s, &g, StencilSpec::generic(2, 2), DEFAULT_ETA).unwrap();
    let eps = [0.4, 0.2, 0.1, 0.05];
    let one = boxcount_dimension(&graph, &[500], &eps, 100).unwrap();
    assert_eq!(one.counts, vec![Some(1); 4]);
    assert!(one.slope.abs() < 1e-12);
    let all: Vec<usize> = (0..g.n_nodes()).collect();
    // on a flat torus there is no boundary layer in the counts
    let torus = plane().with_domain(vec![AxisDomain::Periodic { len: 1.0 }, AxisDomain::Periodic { len: 1.0 }]).unwrap();
    let tg = build_grid(torus.domain(), &[64, 64]).unwrap();
    let tgraph = StencilGraph::new(&torus, &tg, StencilSpec::generic(2, 2), DEFAULT_ETA).unwrap();
    let sq = boxcount_dimension(&tgraph, &(0..tg.n_nodes()).collect::<Vec<_>>(), &eps, 4000).unwrap();
    assert!((sq.slope - 2.0).abs() < 0.3, "{sq:?}");
    let line: Vec<usize> = (0..33).map(|j| g.node_index(&[16, j])).collect();
    let ln = boxcount_dimension(&graph, &line, &eps, 2000).unwrap();
    assert!((ln.slope - 1.0).abs() < 0.2, "{:?}", ln.counts);
    let proxy = ln.proxy(1.0);
    assert!(proxy.iter().all(|p| p.unwrap() > 0.5 && p.unwrap() < 4.0), "{proxy:?}");
    match boxcount_dimension(&graph, &all, &eps, 3) {
        Err(SrError::BudgetExceeded(partial)) => {
            assert_eq!(partial.radii.len(), 3);
            assert_eq!(partial.counts[3], None);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn density_of_a_nodal_line() {
    let s = plane();
    let g = build_grid(s.domain(), &[41, 41]).unwrap();
    let graph = StencilGraph::new(&s, &g, StencilSpec::generic(2, 3), DEFAULT_ETA).unwrap();
    let v = g.sample_unknowns(|x| x[0] - 0.5);
    let dec = nodal_decomposition(&g, &v, DEFAULT_ZERO_TOL).unwrap();
    let all = DensityOptions { margin: 0.0, ..Default::default() };
    let r = nodal_density_statistic(&s, &graph, &dec, &all).unwrap();
    // the wall corners reach the line through the first interior row
    assert!((r.rho - 0.5).abs() < 0.01, "{r:?}");
    assert_eq!(r.excluded, 0);
    // nodes 0.225 or more from the walls are at most 0.275 from the line
    let r = nodal_density_statistic(&s, &graph, &dec, &DensityOptions { margin: 0.21, ..Default::default() }).unwrap();
    assert!((r.rho - 0.275).abs() < 1e-9, "{r:?}");
    assert!(r.excluded > 0);

    let w = g.sample_unknowns(|x| x[0] - 0.51);
    let dec = nodal_decomposition(&g, &w, DEFAULT_ZERO_TOL).unwrap();
    assert!(dec.nodal_nodes.is_empty());
    let r = nodal_density_statistic(&s, &graph, &dec, &all).unwrap();
    assert!((r.rho - 0.51).abs() < 0.0126, "{r:?}");

    let zero = vec![0.0; g.n_unknowns()];
    let dec = nodal_decomposition(&g, &zero, DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(nodal_density_statistic(&s, &graph, &dec, &all).unwrap().rho, 0.0);

    let pos = vec![1.0; g.n_unknowns()];
    let dec = nodal_decomposition(&g, &pos, DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(nodal_density_statistic(&s, &graph, &dec, &all).unwrap_err(), SrError::EmptyNodalSet);
}

#[test]
fn grushin_half_edge_seeds() {
    let s = SRStructure::grushin(1);
    let g = grushin_grid(11, 0.05, 11);
    let v = g.sample_unknowns(|x| x[1] - 0.01);
    let dec = nodal_decomposition(&g, &v, DEFAULT_ZERO_TOL).unwrap();
    let seeds = nodal_seeds(&s, &g, &dec, DEFAULT_ETA);
    // the x = 0 column has no finite half edge in y
    assert_eq!(seeds.len(), 2 * (dec.sign_change_edges.len() - 1));
    for &(p, c) in &seeds {
        let x = g.node_coords(p)[0];
        assert!((c - 0.025 / x.abs()).abs() < 1e-12);
    }
}

#[test]
fn perimeter_of_a_line() {
    let s = plane();
    let g = build_grid(s.domain(), &[41, 41]).unwrap();
    let v = g.sample_unknowns(|x| x[0] - 0.51);
    let p = horizontal_perimeter_proxy(&s, &g, &v).unwrap();
    // unit segment, minus the wall cells
    assert!((p - 39.0 / 40.0).abs() < 1e-12, "{p}");
    let v = g.sample_unknowns(|x| x[0] - 0.51 + 0.3 * (x[1] - 0.5));
    let p = horizontal_perimeter_proxy(&s, &g, &v).unwrap();
    assert!((p - 1.09f64.sqrt()).abs() < 0.15, "{p}");
    assert_eq!(horizontal_perimeter_proxy(&s, &g, &vec![1.0; g.n_unknowns()]).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn triangle_inequality_on_random_sources(seed in 0u64..1000) {
        let s = SRStructure::grushin(1);
        let g = grushin_grid(21, 0.02, 21);
        let graph = StencilGraph::new(&s, &g, StencilSpec::Generic { radius: vec![2, 4] }, DEFAULT_ETA).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (rng.gen_range(0..g.n_nodes()), rng.gen_range(0..g.n_nodes()));
        let da = graph.distances(&[(a, 0.0)], f64::INFINITY);
        let db = graph.distances(&[(b, 0.0)], f64::INFINITY);
        let both = graph.distances(&[(a, 0.0), (b, 0.0)], f64::INFINITY);
        for p in 0..g.n_nodes() {
            prop_assert!(both[p] == da[p].min(db[p]));
            prop_assert!(da[p] <= da[b] + db[p] + 1e-12);
        }
    }
}
