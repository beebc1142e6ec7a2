use std::sync::OnceLock;

use manifold_bias::estimators::{
    claim1_lhs, criterion_on_set, error_analysis, estimate_kappa, true_kappa_volume, CriterionConfig, EstimatorStats,
    KappaForm, PerturbationSet, DEFAULT_COUNTS, DEFAULT_RUNS,
};
use manifold_bias::numeric::mean;
use manifold_bias::rng::{derive_seed, stream};
use manifold_bias::sphere::alpha_for_radius;
use manifold_bias::surfaces::peaks::{MAXIMUM, SADDLE};
use manifold_bias::surfaces::{GaussianMixture, GmmScore, GridScore, PeaksFunction, ScalarFieldGrid, DEFAULT_EPS};

const R: f64 = 0.5;

struct Study {
    truth: [f64; 2],
    stats: [EstimatorStats; 2],
}

fn study() -> &'static Study {
    static S: OnceLock<Study> = OnceLock::new();
    S.get_or_init(|| {
        let grid = PeaksFunction::default().domain_grid().unwrap();
        let oracle = GridScore::new(&grid).unwrap();
        let pts = [MAXIMUM, SADDLE];
        Study {
            truth: pts.map(|p| true_kappa_volume(&grid, &p, R, DEFAULT_EPS).unwrap()),
            stats: [0, 1].map(|i| {
                error_analysis(&oracle, &pts[i], R, &DEFAULT_COUNTS, DEFAULT_RUNS, 40 + i as u64, DEFAULT_EPS).unwrap()
            }),
        }
    })
}

fn at(stats: &EstimatorStats, count: usize) -> (f64, f64) {
    let i = stats.sample_counts.iter().position(|&c| c == count).unwrap();
    (stats.means[i], stats.stds[i])
}

fn pooled(a: f64, b: f64) -> f64 {
    ((a * a + b * b) / 2.0).sqrt()
}

#[test]
fn maximum_beats_saddle_already_at_four_samples() {
    let s = study();
    assert!(s.truth[0] > s.truth[1]);
    let (m_max, s_max) = at(&s.stats[0], 4);
    let (m_sad, s_sad) = at(&s.stats[1], 4);
    assert!(m_max - m_sad > pooled(s_max, s_sad), "{m_max}±{s_max} vs {m_sad}±{s_sad}");
}

#[test]
fn large_count_means_match_the_quadrature_truth() {
    let s = study();
    let tol = 2.0 * pooled(at(&s.stats[0], 256).1, at(&s.stats[1], 256).1);
    for (stats, truth) in s.stats.iter().zip(s.truth) {
        let m = at(stats, 256).0;
        assert!((m - truth).abs() <= tol, "mean {m} truth {truth} tolerance {tol}");
    }
}

#[test]
fn low_count_mean_is_already_close_to_the_high_count_mean() {
    let st = &study().stats[0];
    let (m4, s4) = at(st, 4);
    let (m256, _) = at(st, 256);
    assert!((m4 - m256).abs() < 2.0 * s4);
}

#[test]
fn std_shrinks_along_a_log_log_line() {
    for st in &study().stats {
        assert!(st.loglog_slope < 0.0 && st.loglog_r2 >= 0.8, "{st:?}");
    }
}

/// Boundary flux of a smooth grid field against its volume integral (divergence theorem).
#[test]
fn boundary_estimate_agrees_with_volume_integral_on_a_smooth_surface() {
    let grid = ScalarFieldGrid::square(-2.0, 2.0, 0.01, |x, y| -(x * x + 2.0 * y * y) / 2.0 + 0.3 * (x * y).sin()).unwrap();
    let oracle = GridScore::new(&grid).unwrap();
    let center = [0.2, -0.1];
    let radius = 0.8;
    let truth = true_kappa_volume(&grid, &center, radius, DEFAULT_EPS).unwrap();
    let runs: Vec<f64> = (0..40)
        .map(|r| {
            estimate_kappa(&oracle, &center, radius, 512, &mut stream(derive_seed(5, r)), DEFAULT_EPS, KappaForm::Normalized)
                .unwrap()
        })
        .collect();
    let est = mean(&runs);
    let se = manifold_bias::numeric::std_dev(&runs) / (runs.len() as f64).sqrt();
    // Quadrature error of the disc average on a 0.01 grid is at the percent level.
    let tol = 3.0 * (se * se + (0.01 * truth.abs()).powi(2)).sqrt();
    assert!((est - truth).abs() <= tol, "boundary {est} ± {se} vs volume {truth}");
}

#[test]
fn claim1_identity_holds_on_the_perturbed_mixture() {
    let gmm = GaussianMixture::three_mode();
    let alpha = alpha_for_radius(0.8, 2).unwrap();
    let oracle = GmmScore::perturbed(&gmm, alpha).unwrap();
    let cfg = CriterionConfig {
        alpha,
        delta: 0.0,
        a: 1.0,
        b: -1.0,
        c: 0.0,
        ..CriterionConfig::defaults_for_dim(2)
    };
    let mut rng = stream(8);
    for i in 0..20 {
        let e = manifold_bias::rng::normal_vec(&mut rng, 2);
        let x0 = [-5.0 + 3.0 * e[0], -2.5 + 3.0 * e[1]];
        let set = PerturbationSet::draw(&x0, alpha, 64, derive_seed(9, i)).unwrap();
        let rep = criterion_on_set(&oracle, &set, &CriterionConfig { seed: derive_seed(9, i), ..cfg }).unwrap();
        let scores: Vec<Vec<f64>> = set.points().iter().map(|p| gmm.perturbed(alpha).unwrap().score(p).unwrap()).collect();
        let lhs = claim1_lhs(&set, &scores, 0.0);
        let assembled = alpha.sqrt() * rep.kappa_hat - rep.d_hat;
        assert!((lhs - assembled).abs() <= 1e-10 * lhs.abs().max(1.0), "{lhs} vs {assembled}");
    }
}
