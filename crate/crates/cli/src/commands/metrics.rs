//! Detection metrics for a precomputed score column, calibrated on real rows.

use manifold_bias::detection::{accuracy, calibrate_threshold, detection_metrics, CalibrationThreshold, Direction};
use serde_json::{json, Value};

use crate::commands::{direction, SENSITIVITY_K};
use crate::config::{p, ParamSpec};
use crate::error::{CliError, CliResult};
use crate::io::{parse_label, Table};
use crate::Context;

pub const PARAMS: &[ParamSpec] = &[
    p("input", "", "CSV with columns id, score, label (real or generated)"),
    p("score_column", "score", "name of the score column"),
    p("k", "2", "threshold = mean + k·std of the real scores"),
    p("direction", "greater", "greater: high scores flag generated; less: low scores do"),
];

/// Calibration on the real rows plus the metrics document shared by every scoring subcommand.
pub(crate) fn evaluate(
    scores: &[f64],
    labels: &[bool],
    k: f64,
    direction: Direction,
) -> CliResult<(CalibrationThreshold, Value)> {
    let real: Vec<f64> = scores.iter().zip(labels).filter(|(_, l)| !**l).map(|(s, _)| *s).collect();
    if real.is_empty() {
        return Err(CliError::Config("calibration needs at least one real row".into()));
    }
    let cal = calibrate_threshold(&real, k, direction)?;
    let m = detection_metrics(scores, labels, &cal)?;
    let sensitivity = SENSITIVITY_K
        .iter()
        .map(|&kk| {
            let c = calibrate_threshold(&real, kk, direction)?;
            Ok(json!({ "k": kk, "threshold": c.threshold, "accuracy": accuracy(scores, labels, &c)? }))
        })
        .collect::<CliResult<Vec<Value>>>()?;
    let doc = json!({
        "auc": m.auc,
        "ap": m.ap,
        "accuracy": m.accuracy,
        "n_pos": m.n_pos,
        "n_neg": m.n_neg,
        "k": k,
        "threshold": cal.threshold,
        "direction": direction,
        "sensitivity": sensitivity,
    });
    Ok((cal, doc))
}

pub fn run(ctx: &Context) -> CliResult<()> {
    let prm = &ctx.params;
    let input = prm.raw("input");
    if input.is_empty() {
        return Err(CliError::Config("metrics needs --input".into()));
    }
    let table = Table::read(input.as_ref())?;
    let sc = table.column(prm.raw("score_column"))?;
    let lc = table.column("label")?;
    let mut scores = Vec::with_capacity(table.rows.len());
    let mut labels = Vec::with_capacity(table.rows.len());
    for r in 0..table.rows.len() {
        let s = table.f64_at(r, sc)?;
        if !s.is_finite() {
            return Err(CliError::Config(format!("row {}: non-finite score", r + 1)));
        }
        scores.push(s);
        labels.push(parse_label(&table.rows[r][lc])?);
    }
    let (cal, doc) = evaluate(&scores, &labels, prm.get("k")?, direction(prm)?)?;
    ctx.out.write_json("calibration.json", &cal)?;
    ctx.out.write_json("metrics.json", &doc)?;
    Ok(())
}
