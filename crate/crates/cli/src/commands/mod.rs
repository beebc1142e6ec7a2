//! One module per subcommand. Each exposes `PARAMS` and `run`.

pub mod detect;
pub mod gmm;
pub mod kappa;
pub mod metrics;
pub mod moe;
pub mod surface;

use manifold_bias::detection::Direction;

use crate::config::Params;
use crate::error::{CliError, CliResult};

pub(crate) fn direction(params: &Params) -> CliResult<Direction> {
    match params.raw("direction") {
        "greater" => Ok(Direction::GreaterIsGenerated),
        "less" => Ok(Direction::LessIsGenerated),
        other => Err(CliError::Config(format!("direction = {other:?}: expected greater or less"))),
    }
}

/// Threshold multipliers reported in every metrics file.
pub(crate) const SENSITIVITY_K: [f64; 3] = [1.0, 2.0, 3.0];
