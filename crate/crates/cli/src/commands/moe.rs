//! Mixture-of-experts combiner over detector features with a held-out split.

use manifold_bias::detection::{auc, moe_fit, moe_score, CombinerHyper, CombinerKind};
use manifold_bias::rng::{derive_seed, normal_vec, stream};
use serde_json::json;

use crate::commands::{direction, metrics::evaluate};
use crate::config::{p, ParamSpec};
use crate::error::{CliError, CliResult};
use crate::io::{fmt, label_name, numbered, LabeledPoints, Table};
use crate::Context;

pub const PARAMS: &[ParamSpec] = &[
    p("input", "", "CSV with columns id, features…, label; empty generates synthetic features"),
    p("synthetic_n", "200", "synthetic rows per class"),
    p("synthetic_dims", "3", "synthetic feature count"),
    p("synthetic_shift", "0.8", "mean shift of the generated class on every synthetic feature"),
    p("test_fraction", "0.5", "share of rows held out for evaluation"),
    p("combiner", "forest", "forest, tree or logistic"),
    p("max_depth", "4", "tree depth"),
    p("n_trees", "100", "forest size"),
    p("iterations", "500", "logistic regression gradient steps"),
    p("learning_rate", "0.5", "logistic regression step size"),
    p("k", "2", "threshold = mean + k·std of the real training scores"),
    p("direction", "greater", "greater: high scores flag generated; less: low scores do"),
];

/// Features `N(shift·label, 1)` per dimension, classes interleaved.
fn synthetic(n: usize, dims: usize, shift: f64, seed: u64) -> LabeledPoints {
    let mut rng = stream(seed);
    let mut pts = LabeledPoints {
        feature_names: numbered("f", dims),
        ids: Vec::with_capacity(2 * n),
        points: Vec::with_capacity(2 * n),
        labels: Vec::with_capacity(2 * n),
    };
    for i in 0..2 * n {
        let label = i % 2 == 1;
        let offset = if label { shift } else { 0.0 };
        pts.ids.push(i.to_string());
        pts.points.push(normal_vec(&mut rng, dims).into_iter().map(|v| v + offset).collect());
        pts.labels.push(label);
    }
    pts
}

/// Test-set mask from a seeded permutation, stratified so both classes appear on both sides.
fn split(labels: &[bool], test_fraction: f64, seed: u64) -> Vec<bool> {
    let mut test = vec![false; labels.len()];
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.sort_by_key(|&i| derive_seed(seed, i as u64));
        let n_test = (test_fraction * idx.len() as f64).round() as usize;
        for &i in idx.iter().take(n_test) {
            test[i] = true;
        }
    }
    test
}

fn subset<T: Clone>(xs: &[T], mask: &[bool], keep: bool) -> Vec<T> {
    xs.iter().zip(mask).filter(|(_, m)| **m == keep).map(|(x, _)| x.clone()).collect()
}

pub fn run(ctx: &Context) -> CliResult<()> {
    let prm = &ctx.params;
    let seed = ctx.seed();
    let input = prm.raw("input");
    let pts = if input.is_empty() {
        let pts = synthetic(
            prm.get_nonzero("synthetic_n")?,
            prm.get_nonzero("synthetic_dims")?,
            prm.get("synthetic_shift")?,
            derive_seed(seed, 0),
        );
        ctx.out.write_table("features.csv", &pts.to_table())?;
        pts
    } else {
        LabeledPoints::from_table(&Table::read(input.as_ref())?)?
    };
    let test_fraction: f64 = prm.get("test_fraction")?;
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CliError::Config("test_fraction must lie in (0, 1)".into()));
    }
    let kind = match prm.raw("combiner") {
        "forest" => CombinerKind::Forest,
        "tree" => CombinerKind::Tree,
        "logistic" => CombinerKind::Logistic,
        other => return Err(CliError::Config(format!("combiner = {other:?}: expected forest, tree or logistic"))),
    };
    let hyper = CombinerHyper {
        max_depth: prm.get_nonzero("max_depth")?,
        n_trees: prm.get_nonzero("n_trees")?,
        iterations: prm.get_nonzero("iterations")?,
        learning_rate: prm.get_positive("learning_rate")?,
    };

    let is_test = split(&pts.labels, test_fraction, derive_seed(seed, 1));
    let (train_x, train_y) = (subset(&pts.points, &is_test, false), subset(&pts.labels, &is_test, false));
    let (test_x, test_y) = (subset(&pts.points, &is_test, true), subset(&pts.labels, &is_test, true));
    let combiner = moe_fit(&train_x, &train_y, kind, &hyper, derive_seed(seed, 2))?;
    let scores = moe_score(&combiner, &pts.points)?;

    let mut table = Table::new(&["id", "split", "label", "score"]);
    for i in 0..pts.ids.len() {
        table.push(vec![
            pts.ids[i].clone(),
            if is_test[i] { "test" } else { "train" }.into(),
            label_name(pts.labels[i]).into(),
            fmt(scores[i]),
        ]);
    }
    ctx.out.write_table("moe_scores.csv", &table)?;

    let k: f64 = prm.get("k")?;
    let dir = direction(prm)?;
    let (cal, train_doc) = evaluate(&subset(&scores, &is_test, false), &train_y, k, dir)?;
    let test_scores = subset(&scores, &is_test, true);
    let (_, mut test_doc) = evaluate(&test_scores, &test_y, k, dir)?;
    // Held-out accuracy uses the threshold calibrated on the training reals.
    test_doc["accuracy"] = json!(manifold_bias::detection::accuracy(&test_scores, &test_y, &cal)?);
    test_doc["threshold"] = json!(cal.threshold);
    let per_feature = pts
        .feature_names
        .iter()
        .enumerate()
        .map(|(f, name)| {
            let col: Vec<f64> = test_x.iter().map(|x| x[f]).collect();
            Ok(json!({ "feature": name, "test_auc": auc(&col, &test_y)? }))
        })
        .collect::<CliResult<Vec<_>>>()?;

    ctx.out.write_json("combiner.json", &combiner)?;
    ctx.out.write_json(
        "moe_metrics.json",
        &json!({
            "combiner": kind,
            "hyper": hyper,
            "n_train": train_y.len(),
            "n_test": test_y.len(),
            "train": train_doc,
            "test": test_doc,
            "features": per_feature,
        }),
    )?;
    Ok(())
}
