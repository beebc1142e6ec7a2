use manifold_bias::detection::{
    auc, calibrate_threshold, detection_metrics, moe_fit, moe_score, CombinerHyper, CombinerKind, Direction,
};
use manifold_bias::estimators::{criterion_c, CriterionConfig};
use manifold_bias::rng::{derive_seed, normal_vec, stream};
use manifold_bias::surfaces::{GaussianMixture, GmmScore};

/// Generated points jittered onto the modes, real points from a wider mixture kept
/// outside the near-mode ellipses.
fn planted(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let gmm = GaussianMixture::three_mode();
    let wide = GaussianMixture::uniform(gmm.means().to_vec(), 1.0).unwrap();
    let mut rng = stream(seed);
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let e = normal_vec(&mut rng, 2);
        let m = &gmm.means()[i % 3];
        pts.push(vec![m[0] + 0.05 * e[0], m[1] + 0.05 * e[1]]);
        labels.push(true);
    }
    while labels.len() < 2 * n {
        let x = wide.sample(&mut rng);
        if gmm.nearest_component(&x).unwrap().1 > 2.45 {
            pts.push(x);
            labels.push(false);
        }
    }
    (pts, labels)
}

/// `κ − D` weights at ball radius 0.8.
fn criterion(pts: &[Vec<f64>], seed: u64) -> Vec<f64> {
    let alpha = 0.32;
    let oracle = GmmScore::perturbed(&GaussianMixture::three_mode(), alpha).unwrap();
    pts.iter()
        .enumerate()
        .map(|(i, x)| {
            let cfg = CriterionConfig {
                alpha,
                a: 1.0,
                b: -1.0,
                c: 0.0,
                seed: derive_seed(seed, i as u64),
                ..CriterionConfig::defaults_for_dim(2)
            };
            criterion_c(&oracle, x, &cfg).unwrap().c_raw
        })
        .collect()
}

fn reals(scores: &[f64], labels: &[bool]) -> Vec<f64> {
    scores.iter().zip(labels).filter(|(_, l)| !**l).map(|(s, _)| *s).collect()
}

#[test]
fn criterion_calibrated_on_reals_separates_planted_modes() {
    let (pts, labels) = planted(60, 1);
    let scores = criterion(&pts, 2);
    let real = reals(&scores, &labels);
    let at = |k: f64| {
        detection_metrics(&scores, &labels, &calibrate_threshold(&real, k, Direction::GreaterIsGenerated).unwrap()).unwrap()
    };
    let m = at(1.0);
    assert!(m.auc >= 0.9 && m.ap >= 0.9, "{m:?}");
    assert!(m.accuracy >= 0.85, "{m:?}");
    assert_eq!((m.n_pos, m.n_neg), (60, 60));
    // The reals have a long lower tail (far from the modes D dominates), so
    // mean + 2 std overshoots every mode score: ranking stays perfect while
    // the k = 2 rule flags nothing.
    let strict = at(2.0);
    assert_eq!(strict.auc, m.auc);
    assert!(strict.accuracy <= m.accuracy);
}

#[test]
fn negated_scores_with_the_opposite_direction_give_identical_metrics() {
    let (pts, labels) = planted(30, 3);
    let scores = criterion(&pts, 4);
    let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
    let up = calibrate_threshold(&reals(&scores, &labels), 2.0, Direction::GreaterIsGenerated).unwrap();
    let down = calibrate_threshold(&reals(&neg, &labels), 2.0, Direction::LessIsGenerated).unwrap();
    let (a, b) = (detection_metrics(&scores, &labels, &up).unwrap(), detection_metrics(&neg, &labels, &down).unwrap());
    assert_eq!(a, b);
}

#[test]
fn combiner_keeps_the_strong_feature_and_ignores_noise() {
    let (train_pts, train_y) = planted(60, 5);
    let (test_pts, test_y) = planted(60, 6);
    let features = |pts: &[Vec<f64>], seed: u64| -> Vec<Vec<f64>> {
        let c = criterion(pts, seed);
        let mut rng = stream(derive_seed(seed, 99));
        c.into_iter().map(|v| vec![v, normal_vec(&mut rng, 1)[0]]).collect()
    };
    let (train_x, test_x) = (features(&train_pts, 7), features(&test_pts, 8));
    let best_single = auc(&test_x.iter().map(|f| f[0]).collect::<Vec<_>>(), &test_y).unwrap();
    for kind in [CombinerKind::Logistic, CombinerKind::Forest] {
        let model = moe_fit(&train_x, &train_y, kind, &CombinerHyper::default(), 9).unwrap();
        let combined = auc(&moe_score(&model, &test_x).unwrap(), &test_y).unwrap();
        assert!(combined >= best_single - 0.02, "{kind:?}: {combined} vs single {best_single}");
    }
}
