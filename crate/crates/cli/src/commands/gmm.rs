//! Toy diffusion on a 2-D mixture: train, sample, record trajectories, and
//! compare the learned score with the exact one.

use manifold_bias::diffusion::{
    geometric_null, kde, kde_modes, make_schedule, run_toy, save_model, DenoiserNet, GridSpec, Optimizer, ToyConfig,
    TrainConfig,
};
use manifold_bias::numeric::{dot, mean, norm};
use manifold_bias::surfaces::GaussianMixture;
use serde_json::json;

use crate::config::{p, ParamSpec};
use crate::error::{CliError, CliResult};
use crate::io::{fmt, Table};
use crate::Context;

pub const PARAMS: &[ParamSpec] = &[
    p("mixture", "", "mixture JSON file; empty uses the three-mode mixture"),
    p("points", "1000", "training points drawn from the mixture"),
    p("samples", "1000", "generated samples"),
    p("trajectories", "100", "trajectories for the termination statistic"),
    p("recorded", "5", "trajectories written out state by state"),
    p("steps", "100", "diffusion steps T"),
    p("beta_start", "1e-4", "first beta of the linear schedule"),
    p("beta_end", "0.02", "last beta of the linear schedule"),
    p("epochs", "1000", "training epochs"),
    p("batch_size", "100", "minibatch size"),
    p("lr", "1e-3", "learning rate"),
    p("widths", "64,64", "hidden layer widths"),
    p("optimizer", "adam", "adam or sgd"),
    p("standardize", "true", "z-score the data per axis before training"),
    p("threshold", "2.45", "Mahalanobis radius counted as near a mode"),
    p("n_boot", "1000", "bootstrap resamples for the fraction CI"),
    p("null_p", "", "binomial null probability; empty uses one over the mode count"),
    p("bandwidth", "0.3", "KDE bandwidth"),
    p("kde_lo", "-8", "lower corner of the KDE and null-coverage box (both axes)"),
    p("kde_hi", "3", "upper corner of the KDE and null-coverage box (both axes)"),
    p("kde_spacing", "0.1", "KDE grid spacing"),
    p("kde_modes", "3", "number of KDE modes reported"),
    p("field_n", "40", "score-field lattice points per axis"),
    p("field_lo", "-8", "score-field lower corner (both axes)"),
    p("field_hi", "3", "score-field upper corner (both axes)"),
    p("field_step", "0", "diffusion step at which learned and exact scores are compared"),
];

fn load_mixture(path: &str) -> CliResult<GaussianMixture> {
    if path.is_empty() {
        return Ok(GaussianMixture::three_mode());
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read mixture {path}: {e}")))?;
    Ok(GaussianMixture::from_json(&text)?)
}

/// Unit vector, or zeros for a zero vector.
fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    if n > 0.0 {
        v.iter().map(|x| x / n).collect()
    } else {
        vec![0.0; v.len()]
    }
}

/// Learned data-space score against the exact score of the same noised law.
///
/// The model diffuses the standardized data, so the exact reference is the
/// standardized mixture perturbed at `1 − ᾱ_t`, mapped back by the chain rule.
fn score_field(net: &DenoiserNet, gmm: &GaussianMixture, n: usize, lo: f64, hi: f64, t: usize) -> CliResult<(Table, f64)> {
    let sc = &net.scaler;
    let noised = gmm
        .standardized(&sc.shift, &sc.scale)?
        .perturbed(net.schedule.perturbation_alpha(t))?;
    let mut table = Table::new(&[
        "x0", "x1", "true_s0", "true_s1", "learned_s0", "learned_s1", "true_u0", "true_u1", "learned_u0", "learned_u1",
        "cosine",
    ]);
    let mut cosines = Vec::with_capacity(n * n);
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    for i in 0..n {
        for j in 0..n {
            let x = [lo + i as f64 * step, lo + j as f64 * step];
            let exact: Vec<f64> = noised
                .score(&sc.to_model(&x))?
                .iter()
                .zip(&sc.scale)
                .map(|(s, c)| s / c)
                .collect();
            let learned = net.data_score(&x, t);
            if learned.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Numerical(format!("learned score not finite at {x:?}")));
            }
            let (ue, ul) = (unit(&exact), unit(&learned));
            let cos = dot(&ue, &ul);
            cosines.push(cos);
            let mut row: Vec<String> = x.iter().map(|v| fmt(*v)).collect();
            row.extend(exact.iter().chain(&learned).chain(&ue).chain(&ul).map(|v| fmt(*v)));
            row.push(fmt(cos));
            table.push(row);
        }
    }
    Ok((table, mean(&cosines)))
}

fn points_table(points: &[Vec<f64>]) -> Table {
    let mut t = Table::new(&["id", "x0", "x1"]);
    for (i, x) in points.iter().enumerate() {
        t.push(vec![i.to_string(), fmt(x[0]), fmt(x[1])]);
    }
    t
}

pub fn run(ctx: &Context) -> CliResult<()> {
    let prm = &ctx.params;
    let gmm = load_mixture(prm.raw("mixture"))?;
    if gmm.dim() != 2 {
        return Err(CliError::Config(format!("mixture must be 2-D, got {}", gmm.dim())));
    }
    let optimizer = match prm.raw("optimizer") {
        "adam" => Optimizer::Adam,
        "sgd" => Optimizer::Sgd,
        other => return Err(CliError::Config(format!("optimizer = {other:?}: expected adam or sgd"))),
    };
    let schedule = make_schedule(prm.get_nonzero("steps")?, prm.get("beta_start")?, prm.get("beta_end")?)?;
    let field_step: usize = prm.get("field_step")?;
    if field_step >= schedule.steps {
        return Err(CliError::Config(format!("field_step = {field_step}: must be below steps = {}", schedule.steps)));
    }
    let cfg = ToyConfig {
        n_train: prm.get_nonzero("points")?,
        n_samples: prm.get_nonzero("samples")?,
        n_traj: prm.get_nonzero("trajectories")?,
        threshold: prm.get("threshold")?,
        n_boot: prm.get_nonzero("n_boot")?,
        null_p: prm.get_opt("null_p")?,
        schedule,
        train: TrainConfig {
            epochs: prm.get_nonzero("epochs")?,
            batch_size: prm.get_nonzero("batch_size")?,
            learning_rate: prm.get_positive("lr")?,
            widths: prm.get_list("widths")?,
            optimizer,
            standardize: prm.get_bool("standardize")?,
            seed: 0,
        },
        seed: ctx.seed(),
    };
    let recorded: usize = prm.get("recorded")?;
    let bandwidth = prm.get_positive("bandwidth")?;
    let (kde_lo, kde_hi): (f64, f64) = (prm.get("kde_lo")?, prm.get("kde_hi")?);
    let grid = GridSpec::square(kde_lo, kde_hi, prm.get_positive("kde_spacing")?);
    let n_modes = prm.get_nonzero("kde_modes")?;
    let field_n = prm.get_nonzero("field_n")?;
    let (field_lo, field_hi): (f64, f64) = (prm.get("field_lo")?, prm.get("field_hi")?);
    if !(field_hi > field_lo) {
        return Err(CliError::Config("field_hi must exceed field_lo".into()));
    }

    let run = run_toy(&gmm, &cfg)?;
    let out = &ctx.out;

    let mut loss = Table::new(&["epoch", "loss"]);
    for (e, l) in run.loss_history.iter().enumerate() {
        loss.push(vec![e.to_string(), fmt(*l)]);
    }
    out.write_table("loss.csv", &loss)?;
    out.write_table("data.csv", &points_table(&run.data))?;

    let mut samples = Table::new(&["id", "x0", "x1", "nearest", "mahalanobis"]);
    for (i, x) in run.samples.iter().enumerate() {
        let (k, m) = gmm.nearest_component(x)?;
        samples.push(vec![i.to_string(), fmt(x[0]), fmt(x[1]), k.to_string(), fmt(m)]);
    }
    out.write_table("samples.csv", &samples)?;

    let t_max = cfg.schedule.steps;
    let mut traj = Table::new(&["traj_id", "step", "t", "x0", "x1"]);
    for rec in run.trajectories.iter().take(recorded) {
        for (k, s) in rec.states.iter().enumerate() {
            traj.push(vec![rec.index.to_string(), k.to_string(), (t_max - k).to_string(), fmt(s[0]), fmt(s[1])]);
        }
    }
    out.write_table("trajectories.csv", &traj)?;

    let mut ends = Table::new(&["traj_id", "x0", "x1", "nearest", "mahalanobis", "near"]);
    for rec in &run.trajectories {
        let x = rec.terminal();
        let (k, m) = gmm.nearest_component(x)?;
        ends.push(vec![
            rec.index.to_string(),
            fmt(x[0]),
            fmt(x[1]),
            k.to_string(),
            fmt(m),
            (m <= cfg.threshold).to_string(),
        ]);
    }
    out.write_table("endpoints.csv", &ends)?;

    let density = kde(&run.samples, bandwidth, &grid)?;
    out.write_text("kde.csv", &density.to_csv())?;
    let modes = kde_modes(&run.samples, bandwidth, &grid, n_modes)?;
    let mut mt = Table::new(&["rank", "x0", "x1", "grid_x0", "grid_x1", "density"]);
    for (r, m) in modes.iter().enumerate() {
        mt.push(vec![
            r.to_string(),
            fmt(m.point[0]),
            fmt(m.point[1]),
            fmt(m.grid_point[0]),
            fmt(m.grid_point[1]),
            fmt(m.density),
        ]);
    }
    out.write_table("kde_modes.csv", &mt)?;

    let rep = &run.report;
    let geo = geometric_null(&gmm, cfg.threshold, [kde_lo; 2], [kde_hi; 2])?;
    out.write_json(
        "termination.json",
        &json!({
            "fraction": rep.fraction,
            "ci": [rep.ci_low, rep.ci_high],
            "ci_low": rep.ci_low,
            "ci_high": rep.ci_high,
            "ci_level": manifold_bias::diffusion::termination::CI_LEVEL,
            "p_value": rep.p_value,
            "null_p": rep.null_p,
            "geometric_null": geo,
            "threshold": rep.threshold,
            "n_traj": rep.n_traj,
            "n_near": rep.n_near,
            "n_boot": rep.n_boot,
            "shares": run.shares,
        }),
    )?;

    let (field, mean_cos) = score_field(&run.net, &gmm, field_n, field_lo, field_hi, field_step)?;
    out.write_table("score_field.csv", &field)?;

    let model_path = out.path("model.json");
    save_model(&run.net, &model_path).map_err(|e| match e {
        manifold_bias::Error::Io(source) => CliError::io(&model_path, source),
        other => other.into(),
    })?;

    out.write_json(
        "summary.json",
        &json!({
            "seed": cfg.seed,
            "config": cfg,
            "final_loss": run.loss_history.last(),
            "termination_fraction": rep.fraction,
            "shares": run.shares,
            "kde_modes": modes.iter().map(|m| &m.point).collect::<Vec<_>>(),
            "field_step": field_step,
            "field_mean_cosine": mean_cos,
        }),
    )?;
    Ok(())
}
