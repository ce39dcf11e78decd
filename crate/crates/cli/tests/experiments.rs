use volsamp::config::{Design, DesignArgs, SchemeName, Synthetic};
use volsamp::experiment::{default_k_grid, run_bias_experiment, run_loss_experiment};
use volsamp::CliError;
use volsamp_core::design::CubicGaussianDesign;
use volsamp_core::stats::RunningStats;

fn synthetic(kind: Synthetic, d: Option<usize>) -> Design {
    DesignArgs {
        synthetic: Some(kind),
        d,
        ..DesignArgs::default()
    }
    .build(11)
    .unwrap()
    .0
}

fn mean_ratio(rows: &[volsamp::experiment::LossRow], scheme: &str, k: usize) -> (f64, f64) {
    let mut s = RunningStats::new();
    rows.iter()
        .filter(|r| r.scheme == scheme && r.k == k)
        .for_each(|r| s.push(r.loss / r.loss_opt));
    (s.mean(), s.std_err())
}

#[test]
fn default_grid() {
    assert_eq!(default_k_grid(5), vec![5, 7, 10, 20, 40]);
    assert_eq!(default_k_grid(1), vec![1, 2, 3, 4, 8]);
}

#[test]
fn losses_never_beat_the_optimum() {
    let design = synthetic(Synthetic::Skewed, Some(4));
    let schemes = [
        SchemeName::Iid,
        SchemeName::Lev,
        SchemeName::Volume,
        SchemeName::LeveragedVolume,
    ];
    let rows = run_loss_experiment(&design, &schemes, &default_k_grid(4), 20, 3).unwrap();
    assert_eq!(rows.len(), 4 * 5 * 20);
    for r in &rows {
        assert!(r.loss >= r.loss_opt * (1.0 - 1e-9), "{r:?}");
    }
}

#[test]
fn volume_sampling_stalls_on_two_cluster_design() {
    // Default two-cluster design: n = 1000, d = 2, four outliers with noise 200.
    let design = synthetic(Synthetic::TwoCluster, None);
    let ks = [40, 80, 160];
    let rows = run_loss_experiment(
        &design,
        &[SchemeName::Volume, SchemeName::LeveragedVolume],
        &ks,
        100,
        5,
    )
    .unwrap();
    for k in ks {
        let (vol, _) = mean_ratio(&rows, "volume", k);
        let (lv, _) = mean_ratio(&rows, "leveraged_volume", k);
        assert!(vol >= 1.5, "k={k}: volume {vol}");
        assert!(lv <= 1.1, "k={k}: leveraged volume {lv}");
    }
}

#[test]
fn single_estimators_are_comparable() {
    let design = Design::Oracle(Box::new(CubicGaussianDesign::new(5).unwrap()));
    let rows = run_bias_experiment(
        &design,
        &[SchemeName::Iid, SchemeName::IidVsD],
        &[10],
        &[1],
        200,
        8,
    )
    .unwrap();
    let median = |scheme: &str| {
        let mut v: Vec<f64> = rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| r.error)
            .collect();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let (a, b) = (median("iid"), median("iid_vs_d"));
    assert!((a / b).log10().abs() < 1.0, "{a} vs {b}");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let design = synthetic(Synthetic::Skewed, Some(3));
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                run_loss_experiment(&design, &[SchemeName::LeveragedVolume], &[3, 6], 30, 9)
                    .unwrap()
            })
    };
    assert_eq!(run(1), run(4));
    let bias_design = synthetic(Synthetic::Cubic, Some(2));
    let bias = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                run_bias_experiment(&bias_design, &[SchemeName::IidVsD], &[2, 4], &[1, 10], 5, 9)
                    .unwrap()
            })
    };
    assert_eq!(bias(1), bias(3));
}

#[test]
fn invalid_grids_are_usage_errors() {
    let design = synthetic(Synthetic::Skewed, Some(4));
    let e = run_loss_experiment(&design, &[SchemeName::Lev], &[3], 5, 0).unwrap_err();
    assert!(matches!(e, CliError::Usage(_)));
    assert_eq!(e.exit_code(), 2);
    let e = run_loss_experiment(&design, &[SchemeName::Lev], &[4], 0, 0).unwrap_err();
    assert!(matches!(e, CliError::Usage(_)));
    let cubic = synthetic(Synthetic::Cubic, Some(2));
    let e = run_bias_experiment(&cubic, &[SchemeName::Iid], &[2], &[0], 1, 0).unwrap_err();
    assert!(matches!(e, CliError::Usage(_)));
}
