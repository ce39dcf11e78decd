use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use volsamp::data::{
    expand_degree2, load_design, parse_svmlight, read_csv_design, read_svmlight_records,
    records_to_design, write_svmlight,
};
use volsamp::CliError;
use volsamp_core::linalg::{symmetric_eigen, Matrix};
use volsamp_core::FiniteDesign;

fn gaussian_design(n: usize, d: usize, seed: u64) -> FiniteDesign {
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut r)).collect())
        .collect();
    let y: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
    FiniteDesign::new(Matrix::from_rows(&rows), y.into()).unwrap()
}

/// Numerical rank from the Gram spectrum, independent of the library's QR.
fn spectral_rank(x: &Matrix) -> usize {
    let (vals, _) = symmetric_eigen(&x.gram());
    let top = vals.iter().cloned().fold(0.0, f64::max);
    vals.iter().filter(|v| **v > 1e-10 * top).count()
}

#[test]
fn svmlight_round_trip_is_exact() {
    let fd = gaussian_design(100, 5, 1);
    let mut buf = Vec::new();
    write_svmlight(&fd, &mut buf).unwrap();
    let back = records_to_design(&read_svmlight_records(buf.as_slice()).unwrap()).unwrap();
    assert_eq!(back.x().data(), fd.x().data());
    assert_eq!(&back.y()[..], &fd.y()[..]);
}

#[test]
fn svmlight_file_with_comments_and_gaps() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(
        f,
        "# bodyfat-style sample\n\n1.5 1:2 3:4\n  \n-2 2:1.25\n# trailing"
    )
    .unwrap();
    let fd = parse_svmlight(f.path()).unwrap();
    assert_eq!(fd.x().rows(), 2);
    assert_eq!(fd.x().row(0), &[2.0, 0.0, 4.0]);
    assert_eq!(fd.x().row(1), &[0.0, 1.25, 0.0]);
    assert_eq!(&fd.y()[..], &[1.5, -2.0]);
}

#[test]
fn svmlight_errors() {
    let mut empty = tempfile::NamedTempFile::new().unwrap();
    writeln!(empty, "# only a comment\n").unwrap();
    assert!(matches!(
        parse_svmlight(empty.path()),
        Err(CliError::EmptyFile(_))
    ));

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "1 1:1\n2 1:2\n1 3:1 2:1").unwrap();
    match parse_svmlight(bad.path()) {
        Err(CliError::Parse { line, message }) => {
            assert_eq!(line, 3);
            assert!(message.contains("increase"), "{message}");
        }
        other => panic!("{other:?}"),
    }

    let mut text = tempfile::NamedTempFile::new().unwrap();
    writeln!(text, "1 1:1\n\n1 1:one").unwrap();
    assert!(matches!(
        parse_svmlight(text.path()),
        Err(CliError::Parse { line: 3, .. })
    ));
    assert!(matches!(
        parse_svmlight(std::path::Path::new("/nonexistent/data.svm")),
        Err(CliError::Io { .. })
    ));
}

#[test]
fn csv_design_uses_last_column_as_response() {
    let text = "a,b,y\n1,2,3\n4,5,6\n# note\n7,8.5,-1\n";
    let fd = read_csv_design(text.as_bytes()).unwrap();
    assert_eq!(fd.x().row(2), &[7.0, 8.5]);
    assert_eq!(&fd.y()[..], &[3.0, 6.0, -1.0]);
    assert!(matches!(
        read_csv_design("a,y\n1,2\nx,3\n".as_bytes()),
        Err(CliError::Parse { line: 3, .. })
    ));

    let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    assert_eq!(load_design(f.path()).unwrap().x().data(), fd.x().data());
}

#[test]
fn expansion_drops_zero_columns() {
    let x = Matrix::from_rows(&[
        [1.0, 0.0, 2.0],
        [3.0, 0.0, -1.0],
        [0.5, 0.0, 0.25],
        [2.0, 0.0, 2.0],
        [-1.0, 0.0, 4.0],
    ]);
    let fd = FiniteDesign::new(x, vec![0.0; 5].into()).unwrap();
    let e = expand_degree2(&fd).unwrap();
    // a, c, a², ac, c²; the zero column and its products vanish.
    assert_eq!(e.x().cols(), 5);
    assert_eq!(e.x().row(1), &[3.0, -1.0, 9.0, -3.0, 1.0]);
}

#[test]
fn expansion_removes_duplicates_of_binary_features() {
    // Binary indicators satisfy b² = b, so those squares are duplicates.
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|_| {
            vec![
                StandardNormal.sample(&mut r),
                StandardNormal.sample(&mut r),
                f64::from(r.random::<bool>()),
                f64::from(r.random::<bool>()),
            ]
        })
        .collect();
    let fd = FiniteDesign::new(Matrix::from_rows(&rows), vec![0.0; 200].into()).unwrap();
    let e = expand_degree2(&fd).unwrap();
    assert_eq!(e.x().cols(), 4 + 10 - 2);
    assert_eq!(spectral_rank(e.x()), e.x().cols());
    for j in 0..e.x().cols() {
        for k in 0..j {
            assert_ne!(e.x().col(j).into_inner(), e.x().col(k).into_inner());
        }
    }
}

#[test]
fn expansion_rejects_residual_rank_deficiency() {
    // Third column is the sum of the first two: not a duplicate, still dependent.
    let x = Matrix::from_rows(&[
        [1.0, 2.0, 3.0],
        [0.5, -1.0, -0.5],
        [2.0, 0.0, 2.0],
        [1.5, 1.0, 2.5],
        [-1.0, 3.0, 2.0],
        [0.0, 1.0, 1.0],
        [3.0, -2.0, 1.0],
        [2.5, 0.5, 3.0],
        [-2.0, -1.0, -3.0],
        [1.0, 1.0, 2.0],
    ]);
    let fd = FiniteDesign::new(x, vec![0.0; 10].into()).unwrap();
    assert!(matches!(
        expand_degree2(&fd),
        Err(CliError::RankDeficientAfterExpansion { .. })
    ));
}
