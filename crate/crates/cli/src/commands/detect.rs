//! Criterion per labeled point, calibration on the real rows, detection metrics.

use manifold_bias::diffusion::{load_model, DenoiserAtStep, Space};
use manifold_bias::estimators::{criterion_c, CriterionConfig, CriterionReport};
use manifold_bias::rng::derive_seed;
use manifold_bias::surfaces::{GaussianMixture, GmmScore, ScoreOracle};
use serde_json::json;

use crate::commands::{direction, metrics::evaluate};
use crate::config::{p, ParamSpec};
use crate::error::{CliError, CliResult};
use crate::io::{fmt, label_name, LabeledPoints, Table};
use crate::Context;

pub const PARAMS: &[ParamSpec] = &[
    p("input", "", "CSV with columns id, x0..x(d-1), label (real or generated)"),
    p("oracle", "three_mode", "score source: three_mode, gmm (mixture JSON) or model (trained denoiser JSON)"),
    p("oracle_path", "", "file for the gmm and model oracles"),
    p("t", "", "denoiser step for the model oracle; empty picks the step closest to alpha"),
    p("s", "64", "perturbations per point"),
    p("delta", "1e-8", "score normalization epsilon"),
    p("alpha", "", "perturbation scale; empty uses alpha·sqrt(d) = 1.28"),
    p("a", "1", "curvature weight"),
    p("b", "1", "gradient-magnitude weight"),
    p("c", "1", "bias-term weight"),
    p("normalize", "true", "use the ball-normalized curvature"),
    p("rank_by", "c_scaled", "score used for metrics: c_scaled, c_raw, kappa_hat, d_hat or bias_hat"),
    p("k", "2", "threshold = mean + k·std of the real scores"),
    p("direction", "greater", "greater: high scores flag generated; less: low scores do"),
];

fn pick(r: &CriterionReport, by: &str) -> f64 {
    match by {
        "c_scaled" => r.c_scaled,
        "c_raw" => r.c_raw,
        "kappa_hat" => r.kappa_hat,
        "d_hat" => r.d_hat,
        _ => r.bias_hat,
    }
}

fn score_all(oracle: &impl ScoreOracle, pts: &LabeledPoints, base: &CriterionConfig, seed: u64) -> CliResult<Vec<CriterionReport>> {
    if oracle.dim() != pts.feature_names.len() {
        return Err(CliError::Config(format!(
            "oracle dimension {} but input has {} coordinates",
            oracle.dim(),
            pts.feature_names.len()
        )));
    }
    pts.points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let cfg = CriterionConfig {
                seed: derive_seed(seed, i as u64),
                ..*base
            };
            Ok(criterion_c(oracle, x, &cfg)?)
        })
        .collect()
}

pub fn run(ctx: &Context) -> CliResult<()> {
    let prm = &ctx.params;
    let input = prm.raw("input");
    if input.is_empty() {
        return Err(CliError::Config("detect needs --input".into()));
    }
    let pts = LabeledPoints::from_table(&Table::read(input.as_ref())?)?;
    let d = pts.feature_names.len();
    let rank_by = prm.raw("rank_by");
    if !["c_scaled", "c_raw", "kappa_hat", "d_hat", "bias_hat"].contains(&rank_by) {
        return Err(CliError::Config(format!("rank_by = {rank_by:?} is not a criterion column")));
    }
    let defaults = CriterionConfig::defaults_for_dim(d);
    let cfg = CriterionConfig {
        s: prm.get_nonzero("s")?,
        alpha: prm.get_opt("alpha")?.unwrap_or(defaults.alpha),
        a: prm.get("a")?,
        b: prm.get("b")?,
        c: prm.get("c")?,
        delta: prm.get_positive("delta")?,
        seed: 0,
        normalize_by_ball: prm.get_bool("normalize")?,
    };
    cfg.validate()?;

    let path = prm.raw("oracle_path");
    let need_path = || -> CliResult<&str> {
        if path.is_empty() {
            Err(CliError::Config(format!("oracle {} needs --oracle_path", prm.raw("oracle"))))
        } else {
            Ok(path)
        }
    };
    let seed = ctx.seed();
    let (reports, oracle_doc) = match prm.raw("oracle") {
        "three_mode" | "gmm" => {
            let gmm = if prm.raw("oracle") == "gmm" {
                let p = need_path()?;
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {p}: {e}")))?;
                GaussianMixture::from_json(&text)?
            } else {
                GaussianMixture::three_mode()
            };
            let oracle = GmmScore::perturbed(&gmm, cfg.alpha)?;
            (score_all(&oracle, &pts, &cfg, seed)?, json!({ "kind": prm.raw("oracle"), "path": path }))
        }
        "model" => {
            let net = load_model(need_path()?.as_ref())?;
            let t = prm.get_opt("t")?.unwrap_or_else(|| net.schedule.step_for_alpha(cfg.alpha));
            let oracle = DenoiserAtStep::new(&net, t, Space::Data)?;
            let doc = json!({ "kind": "model", "path": path, "t": t, "step_alpha": oracle.alpha() });
            (score_all(&oracle, &pts, &cfg, seed)?, doc)
        }
        other => return Err(CliError::Config(format!("oracle = {other:?}: expected three_mode, gmm or model"))),
    };

    let mut table = Table::new(&["id", "label", "kappa_hat", "d_hat", "bias_hat", "c_raw", "c_scaled", "s", "radius", "alpha", "seed"]);
    for ((id, l), r) in pts.ids.iter().zip(&pts.labels).zip(&reports) {
        table.push(vec![
            id.clone(),
            label_name(*l).into(),
            fmt(r.kappa_hat),
            fmt(r.d_hat),
            fmt(r.bias_hat),
            fmt(r.c_raw),
            fmt(r.c_scaled),
            r.s.to_string(),
            fmt(r.radius),
            fmt(r.alpha),
            r.seed.to_string(),
        ]);
    }
    ctx.out.write_table("criteria.csv", &table)?;

    let scores: Vec<f64> = reports.iter().map(|r| pick(r, rank_by)).collect();
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(CliError::Numerical(format!("criterion not finite for row {}", pts.ids[i])));
    }
    let (cal, mut doc) = evaluate(&scores, &pts.labels, prm.get("k")?, direction(prm)?)?;
    doc["rank_by"] = json!(rank_by);
    doc["oracle"] = oracle_doc;
    doc["criterion"] = json!(cfg);
    ctx.out.write_json("calibration.json", &json!({ "rank_by": rank_by, "calibration": cal }))?;
    ctx.out.write_json("metrics.json", &doc)?;
    Ok(())
}
