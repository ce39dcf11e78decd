use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use volsamp_core::design::{
    cubic_gaussian_optimum, finite_optimum, mc_loss_difference, CubicGaussianDesign,
    GaussianDesign, LinearResponse, OneHotCubicDesign, ScaledBasisDesign, UniformBoxDesign,
};
use volsamp_core::dist::{tv_distance, DistTable};
use volsamp_core::estimator::{least_squares, leveraged_volume_estimator};
use volsamp_core::leverage::{
    default_sketch_rows, exact_scores, rescale, sample_lev, sample_lev_oracle, sketched_scores,
    LevMethod, ProfileKind,
};
use volsamp_core::linalg::{cholesky, Matrix, Vector};
use volsamp_core::sampler::{
    decompose_vs_k, sample_leveraged_volume, sample_leveraged_volume_finite, sample_vs_k, VsMethod,
    VsOptions,
};
use volsamp_core::stats::{chi_square, quantile, VecStats};
use volsamp_core::{DesignOracle, FiniteDesign};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn four_atoms() -> FiniteDesign {
    FiniteDesign::from_matrix(Matrix::from_rows(&[
        [1.0, 0.0],
        [0.0, 1.0],
        [1.0, 1.0],
        [2.0, -1.0],
    ]))
    .unwrap()
}

fn ar1(d: usize) -> Matrix {
    Matrix::from_fn(d, d, |i, j| 0.5f64.powi(i.abs_diff(j) as i32))
}

#[test]
fn empirical_second_moments_match_closed_forms() {
    let mut r = rng(1);
    let oracles: Vec<(&str, Box<dyn DesignOracle>)> = vec![
        ("gaussian", Box::new(GaussianDesign::new(ar1(3)).unwrap())),
        ("cubic", Box::new(CubicGaussianDesign::new(3).unwrap())),
        ("one_hot", Box::new(OneHotCubicDesign::new(3).unwrap())),
        (
            "scaled_basis",
            Box::new(ScaledBasisDesign::new(3, 0.5, 0.3).unwrap()),
        ),
        (
            "box",
            Box::new(
                UniformBoxDesign::new(LinearResponse {
                    w: vec![1.0, 0.0, -1.0].into(),
                    noise_sd: 1.0,
                })
                .unwrap(),
            ),
        ),
        (
            "finite",
            Box::new(
                FiniteDesign::from_matrix(Matrix::from_rows(&[
                    [1.0, 0.2, 0.0],
                    [0.3, 1.0, -1.0],
                    [1.5, 1.0, 0.5],
                    [2.0, -0.5, 0.1],
                    [0.5, 0.8, 1.2],
                ]))
                .unwrap(),
            ),
        ),
    ];
    let m = 100_000;
    for (name, o) in &oracles {
        let d = o.dim();
        let mut acc = Matrix::zeros(d, d);
        for _ in 0..m {
            let x = o.draw_x(&mut r);
            acc.rank_one_update(1.0, &x, &x);
        }
        let err = acc
            .scaled(1.0 / m as f64)
            .sub(&o.second_moment().unwrap())
            .frobenius_norm();
        assert!(err <= 5.0 * d as f64 / (m as f64).sqrt(), "{name}: {err}");
    }
}

#[test]
fn uniform_leverage_design_samples_uniformly() {
    let mut r = rng(2);
    let fd = FiniteDesign::from_matrix(Matrix::from_rows(&[
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
    ]))
    .unwrap();
    let p = exact_scores(&fd).unwrap();
    assert!(p.scores().iter().all(|s| (s - 2.0).abs() < 1e-12));
    let m = 100_000;
    let b = sample_lev(&fd, &p, m, &mut r).unwrap();
    let se = (0.25f64 * 0.75 / m as f64).sqrt();
    for atom in 0..4 {
        let f = b
            .atom_keys()
            .unwrap()
            .iter()
            .filter(|&&i| i == atom)
            .count() as f64
            / m as f64;
        assert!((f - 0.25).abs() < 3.0 * se, "atom {atom}: {f}");
    }
}

#[test]
fn one_hot_leverage_sampling_keeps_the_coordinate_law() {
    // All one-hot directions have the same leverage profile, so the chosen
    // coordinate stays uniform under leverage sampling.
    let mut r = rng(3);
    let o = OneHotCubicDesign::new(2).unwrap();
    let (b, _) = sample_lev_oracle(&o, 100_000, LevMethod::Exact, &mut r).unwrap();
    let coords: Vec<usize> = (0..b.k())
        .map(|i| {
            if b.x.row(i)[0].abs() > b.x.row(i)[1].abs() {
                0
            } else {
                1
            }
        })
        .collect();
    let emp = DistTable::from_samples(coords).unwrap();
    let uniform = DistTable::from_weights([(0, 1.0), (1, 1.0)]).unwrap();
    assert!(tv_distance(&emp, &uniform) <= 0.01);
}

#[test]
fn rescaled_leverage_rows_have_second_moment_sigma_over_d() {
    let mut r = rng(4);
    let sigma = Matrix::from_rows(&[[2.0, 0.5, 0.1], [0.5, 1.0, -0.3], [0.1, -0.3, 0.8]]);
    let o = GaussianDesign::new(sigma.clone()).unwrap();
    let m = 100_000;
    let (b, _) = sample_lev_oracle(&o, m, LevMethod::Exact, &mut r).unwrap();
    let (px, _) = rescale(&b).unwrap();
    let est = px.gram().scaled(1.0 / m as f64);
    let target = sigma.scaled(1.0 / 3.0);
    let rel = est.sub(&target).frobenius_norm() / target.frobenius_norm();
    assert!(rel <= 0.03, "{rel}");
    // Each rescaled row has leverage exactly d under Σ/d.
    let c = cholesky(&target).unwrap();
    for i in 0..1000 {
        assert!((c.inv_quad_form(px.row(i)) - 3.0).abs() < 1e-6);
    }
}

#[test]
fn cubic_design_optimum_matches_monte_carlo_argmin() {
    let mut r = rng(5);
    let d = 5;
    let o = CubicGaussianDesign::new(d).unwrap();
    let mut xtx = Matrix::zeros(d, d);
    let mut xty = Vector::zeros(d);
    for _ in 0..1_000_000 {
        let p = o.draw_point(&mut r);
        let y = o.response(&p, &mut r);
        xtx.rank_one_update(1.0, &p.x, &p.x);
        for (a, v) in xty.iter_mut().zip(p.x.iter()) {
            *a += v * y;
        }
    }
    let w = cholesky(&xtx).unwrap().solve(&xty);
    let opt = cubic_gaussian_optimum(d);
    assert!(w.sub(&opt).max_abs() <= 0.02, "{w:?}");
}

#[test]
fn cubic_design_perturbations_increase_the_loss() {
    let mut r = rng(6);
    let d = 5;
    let o = CubicGaussianDesign::new(d).unwrap();
    let opt = cubic_gaussian_optimum(d);
    for _ in 0..100 {
        let w: Vector = opt
            .iter()
            .map(|v| v + 0.1 * Distribution::<f64>::sample(&StandardNormal, &mut r))
            .collect();
        let diff = mc_loss_difference(&o, &w, &opt, 1_000_000, &mut r).unwrap();
        let (lo, _) = diff.interval(3.0);
        assert!(lo > 0.0, "L(w) - L(w*) = {} ± {}", diff.mean, diff.std_err);
        assert!(o.loss(&w).unwrap() > o.loss(&opt).unwrap());
    }
}

#[test]
fn sketch_audit_passes_on_gaussian_design() {
    let mut r = rng(7);
    let (n, d) = (1000, 10);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut r)).collect())
        .collect();
    let fd = FiniteDesign::from_matrix(Matrix::from_rows(&rows)).unwrap();
    let p = sketched_scores(&fd, default_sketch_rows(d), &mut r).unwrap();
    match p.kind() {
        ProfileKind::Sketched { lo, hi } => assert!(lo >= 0.5 && hi <= 1.5, "{lo} {hi}"),
        k => panic!("{k:?}"),
    }
    let exact = exact_scores(&fd).unwrap();
    for (a, b) in p.scores().iter().zip(exact.scores().iter()) {
        assert!(*a >= 0.5 * b && *a <= 1.5 * b);
    }
}

#[test]
fn composed_volume_positions_are_uniform() {
    let mut r = rng(8);
    let fd = four_atoms();
    let subsets = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
    let mut counts = [0u64; 6];
    for _ in 0..100_000 {
        let b = sample_vs_k(&fd, 4, VsMethod::Rejection, &mut r).unwrap();
        let pos = b.volume_rows.unwrap();
        let idx = subsets.iter().position(|s| s[..] == pos[..]).unwrap();
        counts[idx] += 1;
    }
    // 1% critical value of chi-square with 5 degrees of freedom.
    assert!(chi_square(&counts, &[1.0 / 6.0; 6]) < 15.086);
}

#[test]
fn decomposed_rest_rows_are_uniform_atoms() {
    let mut r = rng(9);
    let fd = FiniteDesign::from_matrix(Matrix::from_rows(&[[1.0], [2.0], [3.0]])).unwrap();
    let mut counts = [0usize; 3];
    let mut total = 0;
    for _ in 0..50_000 {
        let b = sample_vs_k(&fd, 3, VsMethod::Rejection, &mut r).unwrap();
        let (_, rest) = decompose_vs_k(&b, &mut r).unwrap();
        for i in rest.atom_keys().unwrap() {
            counts[i] += 1;
            total += 1;
        }
    }
    let se = (2.0 / 9.0 / total as f64).sqrt();
    for c in counts {
        let f = c as f64 / total as f64;
        assert!((f - 1.0 / 3.0).abs() < 3.0 * se, "{f}");
    }
}

#[test]
fn single_row_of_volume_d_sample_follows_leverage() {
    let mut r = rng(10);
    let fd = four_atoms();
    let lev = exact_scores(&fd).unwrap();
    let target = DistTable::from_weights(lev.scores().iter().copied().enumerate()).unwrap();
    let rows: Vec<usize> = (0..100_000)
        .map(|_| {
            sample_vs_k(&fd, 2, VsMethod::Rejection, &mut r)
                .unwrap()
                .atom_keys()
                .unwrap()[0]
        })
        .collect();
    assert!(tv_distance(&DistTable::from_samples(rows).unwrap(), &target) <= 0.02);
}

#[test]
fn leveraged_volume_estimator_is_unbiased_on_two_point_design() {
    let mut r = rng(11);
    let fd = FiniteDesign::new(Matrix::from_rows(&[[1.0], [2.0]]), vec![1.0, 1.0].into()).unwrap();
    let p = exact_scores(&fd).unwrap();
    let mut s = VecStats::new(1);
    for _ in 0..200_000 {
        let (b, _) = sample_leveraged_volume_finite(&fd, &p, 1, &mut r).unwrap();
        s.push(&leveraged_volume_estimator(&b).unwrap().w);
    }
    let c = s.cells()[0];
    assert!((c.mean() - 0.6).abs() <= 3.0 * c.std_err(), "{}", c.mean());
}

#[test]
fn leveraged_volume_estimator_is_unbiased_on_one_hot_cubic() {
    let mut r = rng(12);
    let d = 3;
    let o = OneHotCubicDesign::new(d).unwrap();
    let mut s = VecStats::new(d);
    for _ in 0..100_000 {
        let (b, _) = sample_leveraged_volume(&o, 3 * d, &VsOptions::default(), &mut r).unwrap();
        s.push(&leveraged_volume_estimator(&b).unwrap().w);
    }
    for c in s.cells() {
        assert!(
            (c.mean() - 3.0).abs() <= 3.0 * c.std_err(),
            "{} ± {}",
            c.mean(),
            c.std_err()
        );
    }
}

#[test]
fn leveraged_volume_loss_quantile_decreases_with_k() {
    let mut r = rng(13);
    let (n, d) = (500, 10);
    let fd = FiniteDesign::skewed(n, d, &mut r).unwrap();
    let p = exact_scores(&fd).unwrap();
    let opt = fd.loss(&finite_optimum(&fd).unwrap()).unwrap();
    let mut previous = f64::INFINITY;
    let mut reached = false;
    for k in [d + 2, 2 * d, 4 * d, 8 * d, 16 * d, 50 * d] {
        let ratios: Vec<f64> = (0..200)
            .map(|_| {
                let (b, _) = sample_leveraged_volume_finite(&fd, &p, k, &mut r).unwrap();
                fd.loss(&leveraged_volume_estimator(&b).unwrap().w).unwrap() / opt
            })
            .collect();
        let q = quantile(&ratios, 0.9);
        assert!(ratios.iter().all(|v| *v >= 1.0 - 1e-9));
        assert!(q <= previous, "k={k}: {q} > {previous}");
        previous = q;
        reached |= q <= 1.2;
    }
    assert!(reached, "90th percentile never reached 1.2: {previous}");
}

#[test]
fn volume_sampled_box_design_has_full_rank() {
    let mut r = rng(14);
    let o = UniformBoxDesign::new(LinearResponse {
        w: vec![1.0, -2.0].into(),
        noise_sd: 0.5,
    })
    .unwrap();
    for _ in 0..1000 {
        let b = sample_vs_k(&o, 2, VsMethod::Rejection, &mut r).unwrap();
        assert!(!least_squares(&b).unwrap().rank_deficient);
    }
}
