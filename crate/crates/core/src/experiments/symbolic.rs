use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::vf_algebra::{
    compute_flag, desingularize_grushin, dilate_field, graded_components, graded_decomposition, lie_bracket, nonholonomic_order,
    parse_vector_field, privileged_coordinates_exp2, rat, rat_frac, FlagData, Order, Point, Polynomial, Rational, SRStructure,
    VectorField,
};

use super::ExperimentError;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlagRow {
    pub structure: String,
    pub point: Vec<f64>,
    pub flag: FlagData,
}

fn random_poly(n: usize, max_deg: u32, rng: &mut ChaCha8Rng) -> Polynomial {
    let terms = (0..rng.gen_range(0..4)).map(|_| {
        let mut e = vec![0u32; n];
        for _ in 0..rng.gen_range(0..=max_deg) {
            e[rng.gen_range(0..n)] += 1;
        }
        (e, rat_frac(rng.gen_range(-3..=3), rng.gen_range(1..=3)))
    });
    Polynomial::from_terms(n, terms.collect::<Vec<_>>())
}

/// Random polynomial field of degree at most 3.
pub fn random_field(n: usize, rng: &mut ChaCha8Rng) -> VectorField {
    VectorField::new((0..n).map(|_| random_poly(n, 3, rng)).collect()).expect("components share a dimension")
}

/// `δ_ε^* X` by substitution: component `j` is `ε^{−w_j} a_j(ε^{w_1} x_1, …)`.
pub fn dilate_by_substitution(x: &VectorField, weights: &[usize], eps: &Rational) -> VectorField {
    let n = x.dim();
    let subs: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n, i).scale(&eps.pow(weights[i] as i32))).collect();
    let comps = (0..n).map(|j| x.component(j).compose(&subs).scale(&eps.pow(-(weights[j] as i32)))).collect();
    VectorField::new(comps).expect("components share a dimension")
}

/// Exact rank of rational vectors.
fn rank(vectors: &[Vec<Rational>]) -> usize {
    let mut rows: Vec<Vec<Rational>> = vectors.to_vec();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &pivot;
                let sub: Vec<Rational> = rows[r].iter().map(|x| x * &f).collect();
                for (a, b) in rows[i].iter_mut().zip(sub) {
                    *a -= b;
                }
            }
        }
        r += 1;
    }
    r
}

/// Span dimensions of all bracket words (any bracketing) of length `≤ j`,
/// `j = 1..=depth`, at `q`.
pub fn word_span_dims(fields: &[VectorField], q: &[Rational], depth: usize) -> Vec<usize> {
    let mut by_len: Vec<Vec<VectorField>> = vec![fields.to_vec()];
    for len in 2..=depth {
        let mut next = Vec::new();
        for i in 1..len {
            for a in &by_len[i - 1] {
                for b in &by_len[len - i - 1] {
                    let c = lie_bracket(a, b).expect("fields share a dimension");
                    if !c.is_zero() && !next.contains(&c) {
                        next.push(c);
                    }
                }
            }
        }
        by_len.push(next);
    }
    let mut acc: Vec<Vec<Rational>> = Vec::new();
    by_len
        .iter()
        .map(|level| {
            acc.extend(level.iter().map(|v| v.eval(q)));
            rank(&acc)
        })
        .collect()
}

fn vf(text: &str, n: usize) -> VectorField {
    parse_vector_field(text, n).expect("built-in field parses")
}

fn check(name: &str, failures: Vec<String>, total: usize) -> SuiteCheck {
    let pass = failures.is_empty();
    let detail = if pass { format!("{total} cases") } else { format!("{} of {total} failed: {}", failures.len(), failures.join("; ")) };
    SuiteCheck { name: name.into(), pass, detail }
}

/// Structure, point, then growth vector, step, weights, `Q` and regularity.
type FlagExpectation = (SRStructure, Point, Vec<usize>, usize, Vec<usize>, usize, bool);

/// Example structures, points and the flags they must have.
fn flag_expectations() -> Vec<FlagExpectation> {
    let g1 = SRStructure::grushin(1);
    let h = SRStructure::heisenberg();
    let lift = desingularize_grushin(1);
    vec![
        (g1.clone(), Point::exact_ints(&[0, 0]), vec![1, 2], 2, vec![1, 2], 3, false),
        (g1, Point::exact_ints(&[1, 0]), vec![2], 1, vec![1, 1], 2, true),
        (h.clone(), Point::exact_ints(&[0, 0, 0]), vec![2, 3], 2, vec![1, 1, 2], 4, true),
        (h, Point::Exact(vec![rat(2), rat_frac(-1, 3), rat(5)]), vec![2, 3], 2, vec![1, 1, 2], 4, true),
        (lift.clone(), Point::exact_ints(&[0, 0, 0]), vec![2, 3], 2, vec![1, 1, 2], 4, true),
        (lift, Point::exact_ints(&[1, 1, 1]), vec![2, 3], 2, vec![1, 1, 2], 4, true),
    ]
}

/// Flags of the example structures at a few points.
pub fn flag_rows(alphas: &[u32]) -> Vec<FlagRow> {
    let mut rows = Vec::new();
    let mut push = |s: &SRStructure, q: Point, depth: usize| {
        let flag = compute_flag(s, &q, depth);
        rows.push(FlagRow { structure: s.name.clone(), point: q.to_f64(), flag });
    };
    for &a in alphas {
        let g = SRStructure::grushin(a);
        for q in [[0, 0], [1, 0], [-2, 3]] {
            push(&g, Point::exact_ints(&q), a as usize + 2);
        }
        let lift = desingularize_grushin(a);
        for q in [[0, 0, 0], [1, 1, 1]] {
            push(&lift, Point::exact_ints(&q), a as usize + 3);
        }
    }
    let h = SRStructure::heisenberg();
    for q in [[0, 0, 0], [2, -1, 5]] {
        push(&h, Point::exact_ints(&q), 3);
    }
    rows
}

/// Exact checks of the symbolic layer: Jacobi identity, graded
/// reconstruction, dilation homogeneity against substitution, nilpotent
/// idempotence, example flags, bracket-word spans and privileged orders.
pub fn symbolic_suite(seed: u64) -> Result<Vec<SuiteCheck>, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut fails = Vec::new();
    let trials = 40;
    for t in 0..trials {
        let n = rng.gen_range(1..=4);
        let (x, y, z) = (random_field(n, &mut rng), random_field(n, &mut rng), random_field(n, &mut rng));
        let b = |a: &VectorField, c: &VectorField| lie_bracket(a, c).expect("same dimension");
        let sum = &(&b(&x, &b(&y, &z)) + &b(&y, &b(&z, &x))) + &b(&z, &b(&x, &y));
        if !sum.is_zero() {
            fails.push(format!("triple {t}"));
        }
    }
    out.push(check("jacobi_identity", fails, trials));

    let mut recon = Vec::new();
    let mut homog = Vec::new();
    let eps_values = [rat_frac(3, 2), rat_frac(-2, 7), rat(5)];
    for t in 0..trials {
        let n = rng.gen_range(1..=4);
        let x = random_field(n, &mut rng);
        let w: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
        let comps = graded_components(&x, &w)?;
        let sum = comps.values().fold(VectorField::zero(n), |acc, v| &acc + v);
        if sum != x {
            recon.push(format!("field {t}"));
        }
        for (&k, v) in &comps {
            for e in &eps_values {
                let expect = v.scale(&e.pow(k as i32));
                if dilate_by_substitution(v, &w, e) != expect || dilate_field(v, &w, e)? != expect {
                    homog.push(format!("field {t} degree {k} ε = {e}"));
                }
            }
        }
    }
    out.push(check("graded_reconstruction", recon, trials));
    out.push(check("dilation_homogeneity", homog, trials));

    let examples: Vec<(VectorField, Vec<usize>)> = vec![
        (vf("dx", 2), vec![1, 2]),
        (vf("x*dy", 2), vec![1, 2]),
        (vf("x^2*dy", 2), vec![1, 3]),
        (vf("dx + x^2*dy", 2), vec![1, 2]),
        (vf("dx", 3), vec![1, 1, 2]),
        (vf("dy - x*dz", 3), vec![1, 1, 2]),
        (vf("dz + x*dy", 3), vec![1, 2, 1]),
        (vf("dx + y*dx + x*y*dz", 3), vec![1, 1, 2]),
    ];
    let mut idem = Vec::new();
    for (x, w) in &examples {
        let hat = graded_decomposition(x, w)?.nilpotent_part();
        if graded_decomposition(&hat, w)?.nilpotent_part() != hat {
            idem.push(x.to_string());
        }
    }
    out.push(check("nilpotent_idempotence", idem, examples.len()));

    let expectations = flag_expectations();
    let mut flags = Vec::new();
    let mut words = Vec::new();
    for (s, q, growth, step, weights, q_dim, regular) in &expectations {
        let f = compute_flag(s, q, 4);
        if (&f.growth_vector, f.step, &f.weights, f.homogeneous_dimension, f.regular) != (growth, *step, weights, *q_dim, *regular) {
            flags.push(format!("{} at {:?}: {:?}", s.name, q.to_f64(), f));
        }
        if f.growth_vector.windows(2).any(|w| w[0] > w[1]) || f.weights.iter().sum::<usize>() != f.homogeneous_dimension {
            flags.push(format!("{} at {:?}: inconsistent flag", s.name, q.to_f64()));
        }
        let Point::Exact(qe) = q else { unreachable!("exact example points") };
        let spans = word_span_dims(s.fields(), qe, 4);
        let expect: Vec<usize> = (0..4).map(|j| *f.growth_vector.get(j).unwrap_or(f.growth_vector.last().unwrap())).collect();
        if spans != expect {
            words.push(format!("{} at {:?}: words {spans:?} flag {:?}", s.name, q.to_f64(), f.growth_vector));
        }
    }
    out.push(check("example_flags", flags, expectations.len()));
    out.push(check("bracket_word_spans", words, expectations.len()));

    let h = SRStructure::heisenberg();
    let hframe = vec![vf("dx", 3), vf("dy - x*dz", 3), vf("dz", 3)];
    let charts: Vec<(SRStructure, Vec<Rational>, Vec<VectorField>)> = vec![
        (h.clone(), vec![rat(0), rat(0), rat(0)], hframe.clone()),
        (h, vec![rat(2), rat_frac(-1, 3), rat(5)], hframe),
        (SRStructure::grushin(1), vec![rat(0), rat_frac(3, 4)], vec![vf("dx", 2), vf("dy", 2)]),
        (SRStructure::grushin(2), vec![rat(0), rat_frac(-1, 2)], vec![vf("dx", 2), vf("dy", 2)]),
        (desingularize_grushin(1), vec![rat(0), rat(0), rat(0)], vec![vf("dx", 3), vf("dz + x*dy", 3), vf("dy", 3)]),
    ];
    let mut orders = Vec::new();
    for (s, q, frame) in &charts {
        let chart = privileged_coordinates_exp2(s, q, frame, None)?;
        let pushed = chart.pushed_structure(s);
        let n = s.dim();
        let origin = Point::Exact(vec![Rational::zero(); n]);
        let step = chart.weights.iter().copied().max().unwrap_or(1);
        for i in 0..n {
            let o = nonholonomic_order(&pushed, &Polynomial::var(n, i), &origin, step + 1);
            if o != Order::Exactly(chart.weights[i]) {
                orders.push(format!("{} coordinate {i}: {o:?} vs weight {}", s.name, chart.weights[i]));
            }
        }
        // the chart inverts its forward map exactly
        for (j, psi) in chart.inverse.iter().enumerate() {
            if psi.compose(&chart.forward) != Polynomial::var(n, j) {
                orders.push(format!("{} inverse component {j}", s.name));
            }
        }
    }
    out.push(check("privileged_orders", orders, charts.len()));
    Ok(out)
}
