mod oracles;

use riskweave::cart::leaf_confidence;
use riskweave::chi_square_sf;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn matches_high_precision_grid() {
    let grid = oracles::chi_square::reference_grid();
    assert_eq!(grid.len(), 500);
    let mut worst = 0.0f64;
    for (stat, df, expected) in grid {
        let got = chi_square_sf(stat, df).unwrap();
        worst = worst.max((got - expected).abs());
    }
    assert!(worst <= 1e-8, "max abs error {worst:e}");
}

#[test]
fn agrees_with_statrs() {
    for df in 1..=10u32 {
        let dist = ChiSquared::new(f64::from(df)).unwrap();
        for i in 1..=200 {
            let stat = f64::from(i) * 0.25;
            let a = chi_square_sf(stat, df).unwrap();
            let b = 1.0 - dist.cdf(stat);
            assert!((a - b).abs() < 1e-9, "df={df} stat={stat}: {a} vs {b}");
        }
    }
}

#[test]
fn textbook_critical_values() {
    assert!((chi_square_sf(3.841, 1).unwrap() - 0.05).abs() < 1e-4);
    assert!((chi_square_sf(6.635, 1).unwrap() - 0.01).abs() < 1e-4);
}

#[test]
fn leaf_confidence_shrinks_with_support() {
    let p = |a, b| leaf_confidence(&[a, b]).unwrap();
    assert!(p(14, 5) > p(140, 50));
    assert!(p(140, 50) > p(1400, 500));
    assert_eq!(p(10, 10), 1.0);
}
