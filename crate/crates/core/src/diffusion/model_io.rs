//! JSON persistence for trained denoisers.

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::model::{DataScaler, DenoiserNet};
use super::schedule::make_schedule;
use crate::error::{Error, Result};

const FORMAT: &str = "toy-denoiser";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    steps: usize,
    beta_start: f64,
    beta_end: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format: String,
    version: u32,
    /// `[d + 1, hidden..., d]`.
    sizes: Vec<usize>,
    schedule: ScheduleDoc,
    scaler: DataScaler,
    mlp: Mlp,
}

pub fn model_to_json(net: &DenoiserNet) -> Result<String> {
    let doc = ModelDoc {
        format: FORMAT.into(),
        version: VERSION,
        sizes: net.mlp.sizes(),
        schedule: ScheduleDoc {
            steps: net.schedule.steps,
            beta_start: net.schedule.beta_start,
            beta_end: net.schedule.beta_end,
        },
        scaler: net.scaler.clone(),
        mlp: net.mlp.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Parses and validates shapes, finiteness and the schedule; betas are rebuilt from the endpoints.
pub fn model_from_json(text: &str) -> Result<DenoiserNet> {
    let doc: ModelDoc = serde_json::from_str(text)?;
    if doc.format != FORMAT || doc.version != VERSION {
        return Err(Error::Parse(format!("unsupported model document {} v{}", doc.format, doc.version)));
    }
    if doc.mlp.layers.is_empty() || doc.mlp.sizes() != doc.sizes {
        return Err(Error::Parse("layer sizes do not match the declared sizes".into()));
    }
    for l in &doc.mlp.layers {
        if l.weights.len() != l.n_in * l.n_out || l.biases.len() != l.n_out {
            return Err(Error::Parse("parameter array has the wrong length".into()));
        }
    }
    if doc.mlp.layers.windows(2).any(|w| w[0].n_out != w[1].n_in) {
        return Err(Error::Parse("consecutive layers disagree on width".into()));
    }
    if !doc.mlp.is_finite() {
        return Err(Error::NonFinite("model parameters".into()));
    }
    if doc.scaler.shift.len() != doc.scaler.scale.len() {
        return Err(Error::Parse("scaler shift and scale lengths differ".into()));
    }
    let schedule = make_schedule(doc.schedule.steps, doc.schedule.beta_start, doc.schedule.beta_end)?;
    DenoiserNet::new(doc.mlp, schedule, doc.scaler)
}

pub fn save_model(net: &DenoiserNet, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, model_to_json(net)?)?;
    Ok(())
}

pub fn load_model(path: &std::path::Path) -> Result<DenoiserNet> {
    model_from_json(&std::fs::read_to_string(path)?)
}
