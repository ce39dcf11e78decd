use proptest::prelude::*;
use volsamp_core::leverage::{exact_scores, rescale, LeverageProfile, ProfileKind};
use volsamp_core::linalg::{
    adjugate, cholesky, det, det_gram, inverse, pseudoinverse, sherman_morrison_downdate,
    spd_inverse, symmetric_eigen,
};
use volsamp_core::{FiniteDesign, Matrix, SampleBatch, Scheme, Vector};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-3.0f64..3.0, rows * cols)
        .prop_map(move |v| Matrix::new(rows, cols, v).unwrap())
}

fn tall_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..=3).prop_flat_map(|c| (c..=8).prop_flat_map(move |r| matrix(r, c)))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cauchy_binet(x in tall_matrix()) {
        let total: f64 = combinations(x.rows(), x.cols())
            .iter()
            .map(|s| det(&x.select_rows(s)).powi(2))
            .sum();
        let g = det_gram(&x);
        prop_assert!((g - total).abs() <= 1e-9 * total.max(1.0), "{g} vs {total}");
    }

    #[test]
    fn penrose_conditions(x in (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| matrix(r, c))) {
        let p = pseudoinverse(&x);
        let xp = x.matmul(&p);
        let px = p.matmul(&x);
        let scale = x.max_abs().max(1.0) * p.max_abs().max(1.0);
        prop_assert!(max_diff(&xp.matmul(&x), &x) <= 1e-8 * scale * x.max_abs().max(1.0));
        prop_assert!(max_diff(&px.matmul(&p), &p) <= 1e-8 * scale * p.max_abs().max(1.0));
        prop_assert!(max_diff(&xp, &xp.transpose()) <= 1e-8 * scale);
        prop_assert!(max_diff(&px, &px.transpose()) <= 1e-8 * scale);
    }

    #[test]
    fn penrose_conditions_rank_deficient(a in matrix(6, 2), b in matrix(2, 4)) {
        let x = a.matmul(&b);
        let p = pseudoinverse(&x);
        let xp = x.matmul(&p);
        let px = p.matmul(&x);
        let scale = x.max_abs().max(1.0) * p.max_abs().max(1.0);
        prop_assert!(max_diff(&xp.matmul(&x), &x) <= 1e-8 * scale * x.max_abs().max(1.0));
        prop_assert!(max_diff(&px.matmul(&p), &p) <= 1e-8 * scale * p.max_abs().max(1.0));
        prop_assert!(max_diff(&xp, &xp.transpose()) <= 1e-8 * scale);
        prop_assert!(max_diff(&px, &px.transpose()) <= 1e-8 * scale);
    }

    #[test]
    fn pseudoinverse_left_inverse_for_full_column_rank(x in tall_matrix()) {
        let g = x.gram();
        let c = cholesky(&g);
        prop_assume!(c.is_ok());
        let (vals, _) = symmetric_eigen(&g);
        prop_assume!(vals[0] > 1e-6 * vals[vals.len() - 1]);
        let p = pseudoinverse(&x);
        let id = Matrix::identity(x.cols());
        prop_assert!(max_diff(&p.matmul(&x), &id) <= 1e-8 * (vals[vals.len() - 1] / vals[0]).sqrt());
    }

    #[test]
    fn adjugate_is_det_times_inverse(a in (1usize..=4).prop_flat_map(|n| matrix(n, n))) {
        let inv = inverse(&a);
        prop_assume!(inv.is_ok());
        let inv = inv.unwrap();
        prop_assume!(inv.max_abs() < 1e6);
        let alt = inv.scaled(det(&a));
        let adj = adjugate(&a);
        prop_assert!(max_diff(&adj, &alt) <= 1e-8 * alt.max_abs().max(1.0));
    }

    #[test]
    fn cholesky_round_trip_up_to_cond_1e8(
        q in matrix(4, 4),
        log_cond in 0.0f64..8.0,
    ) {
        // A = Q diag(λ) Qᵀ with λ spanning `log_cond` decades.
        let (_, vecs) = symmetric_eigen(&q.gram().add(&Matrix::identity(4)));
        let lambdas: Vec<f64> = (0..4).map(|i| 10f64.powf(-log_cond * i as f64 / 3.0)).collect();
        let a = vecs.matmul(&Matrix::diag(&lambdas)).matmul(&vecs.transpose());
        let a = a.add(&a.transpose()).scaled(0.5);
        let c = cholesky(&a).unwrap();
        let l = c.lower();
        let back = l.matmul(&l.transpose());
        prop_assert!(max_diff(&back, &a) <= 1e-10 * a.max_abs());
        let logdet: f64 = lambdas.iter().map(|v| v.ln()).sum();
        prop_assert!((c.logdet() - logdet).abs() < 1e-6);
    }

    #[test]
    fn downdate_matches_direct_inverse(g in matrix(6, 3), x in prop::collection::vec(-1.0f64..1.0, 3)) {
        let a = g.gram().add(&Matrix::identity(3));
        let ainv = spd_inverse(&a).unwrap();
        let lev: f64 = x.iter().zip(ainv.mul_vec(&x).iter()).map(|(p, q)| p * q).sum();
        prop_assume!(lev < 0.9);
        let direct = spd_inverse(&a.sub(&Matrix::from_fn(3, 3, |i, j| x[i] * x[j]))).unwrap();
        let sm = sherman_morrison_downdate(&ainv, &x).unwrap();
        prop_assert!(max_diff(&direct, &sm) <= 1e-8 * direct.max_abs().max(1.0));
    }

    #[test]
    fn leverage_invariant_under_right_multiplication(x in matrix(20, 4), m in matrix(4, 4)) {
        let (sv, _) = symmetric_eigen(&m.gram());
        prop_assume!(sv[0] > 1e-2 * sv[3]);
        let a = FiniteDesign::from_matrix(x.clone()).unwrap();
        let sa = exact_scores(&a);
        prop_assume!(sa.is_ok());
        let b = FiniteDesign::from_matrix(x.matmul(&m)).unwrap();
        let (sa, sb) = (sa.unwrap(), exact_scores(&b).unwrap());
        for (p, q) in sa.scores().iter().zip(sb.scores().iter()) {
            prop_assert!((p - q).abs() < 1e-8 * p.abs().max(1.0), "{p} vs {q}");
        }
    }

    #[test]
    fn exact_scores_average_to_d(x in (1usize..=5).prop_flat_map(|d| matrix(30, d))) {
        let fd = FiniteDesign::from_matrix(x.clone()).unwrap();
        let p = exact_scores(&fd).unwrap();
        prop_assert!(p.scores().iter().all(|s| *s >= 0.0));
        prop_assert!((p.total() / 30.0 - x.cols() as f64).abs() < 1e-8);
    }

    #[test]
    fn rescaled_rows_have_leverage_d(x in matrix(25, 3), pick in prop::collection::vec(0usize..25, 1..10),
                                     factors in prop::collection::vec(0.6f64..1.4, 25)) {
        let fd = FiniteDesign::from_matrix(x.clone()).unwrap();
        let exact = exact_scores(&fd).unwrap();
        let sigma = x.gram().scaled(1.0 / 25.0);
        let chol = cholesky(&sigma).unwrap();
        // Rescaled rows satisfy x̃ᵀ(Σ/d)⁻¹x̃ = d exactly.
        let mut b = SampleBatch::new(x.select_rows(&pick), Scheme::Lev);
        b.y = Some(Vector::zeros(pick.len()));
        b.leverages = Some(pick.iter().map(|&i| exact.scores()[i]).collect());
        let (px, _) = rescale(&b).unwrap();
        for r in 0..px.rows() {
            let l = 3.0 * chol.inv_quad_form(px.row(r));
            prop_assert!((l - 3.0).abs() < 1e-6);
        }
        // Perturbed scores in [0.6, 1.4] keep it inside [d/3, 3d].
        let perturbed = LeverageProfile::from_scores(
            exact.scores().iter().zip(&factors).map(|(s, f)| s * f).collect(),
            ProfileKind::Perturbed { lo: 0.6, hi: 1.4 },
        ).unwrap();
        b.leverages = Some(pick.iter().map(|&i| perturbed.scores()[i]).collect());
        let (px, _) = rescale(&b).unwrap();
        for r in 0..px.rows() {
            let l = 3.0 * chol.inv_quad_form(px.row(r));
            prop_assert!((1.0..=9.0).contains(&l), "{l}");
        }
    }
}
