//! `κ̂` against its grid-quadrature truth at interest points of the peaks surface.

use manifold_bias::estimators::{kappa_runs, kappa_volume_from_curvature, stats_from_runs};
use manifold_bias::rng::derive_seed;
use manifold_bias::surfaces::peaks::{CriticalKind, FIVE_POINTS, MAXIMUM, SADDLE};
use manifold_bias::surfaces::{grid_tv_curvature, GridScore, Orientation, PeaksFunction};

use crate::config::{p, ParamSpec};
use crate::error::{CliError, CliResult};
use crate::io::{fmt, Table};
use crate::Context;

pub const PARAMS: &[ParamSpec] = &[
    p("runs", "100", "independent runs per boundary count"),
    p("counts", "2,4,8,16,32,64,128,256", "boundary sample counts, strictly ascending"),
    p("radius", "0.5", "ball radius"),
    p("delta", "1e-8", "score normalization and curvature epsilon"),
    p("variant", "both", "interest points: two, five or both"),
    p("floor", "1e-5", "density floor of the peaks surface"),
    p("orientation", "mirrored", "peaks orientation: mirrored or as_written"),
];

struct Point {
    variant: &'static str,
    name: String,
    kind: CriticalKind,
    xy: [f64; 2],
}

fn kind_name(k: CriticalKind) -> &'static str {
    match k {
        CriticalKind::Maximum => "maximum",
        CriticalKind::Saddle => "saddle",
    }
}

/// The two-point set is literal; the five critical points belong to the
/// mirrored surface and are reflected in y for the as-written orientation.
fn interest_points(variant: &str, orientation: Orientation) -> CliResult<Vec<Point>> {
    let two = || {
        vec![
            Point { variant: "two", name: "maximum".into(), kind: CriticalKind::Maximum, xy: MAXIMUM },
            Point { variant: "two", name: "saddle".into(), kind: CriticalKind::Saddle, xy: SADDLE },
        ]
    };
    let five = || {
        let (mut nmax, mut nsad) = (0, 0);
        FIVE_POINTS
            .iter()
            .map(|&(xy, kind)| {
                let counter = if kind == CriticalKind::Maximum { &mut nmax } else { &mut nsad };
                *counter += 1;
                let y = match orientation {
                    Orientation::Mirrored => xy[1],
                    Orientation::AsWritten => -xy[1],
                };
                Point {
                    variant: "five",
                    name: format!("{}{}", kind_name(kind), counter),
                    kind,
                    xy: [xy[0], y],
                }
            })
            .collect::<Vec<_>>()
    };
    Ok(match variant {
        "two" => two(),
        "five" => five(),
        "both" => two().into_iter().chain(five()).collect(),
        other => return Err(CliError::Config(format!("variant = {other:?}: expected two, five or both"))),
    })
}

pub fn run(ctx: &Context) -> CliResult<()> {
    let prm = &ctx.params;
    let runs = prm.get_nonzero("runs")?;
    let counts: Vec<usize> = prm.get_list("counts")?;
    let radius = prm.get_positive("radius")?;
    let delta = prm.get_positive("delta")?;
    let floor = prm.get_positive("floor")?;
    let orientation = match prm.raw("orientation") {
        "mirrored" => Orientation::Mirrored,
        "as_written" => Orientation::AsWritten,
        other => return Err(CliError::Config(format!("orientation = {other:?}: expected mirrored or as_written"))),
    };
    let points = interest_points(prm.raw("variant"), orientation)?;

    let grid = PeaksFunction::new(floor, orientation).domain_grid()?;
    let oracle = GridScore::new(&grid)?;
    let curvature = grid_tv_curvature(&grid, delta)?;

    let mut truth = Table::new(&["variant", "point", "kind", "x", "y", "truth"]);
    let mut stats = Table::new(&["variant", "point", "count", "mean", "std"]);
    let mut raw = Table::new(&["variant", "point", "count", "run", "kappa"]);
    let mut fit = Table::new(&["variant", "point", "slope", "r2"]);
    if runs == 1 {
        eprintln!("warning: runs = 1, so std is left empty and kappa_fit.csv is not written");
    }
    for (i, pt) in points.iter().enumerate() {
        let t = kappa_volume_from_curvature(&curvature, &pt.xy, radius)?;
        truth.push(vec![
            pt.variant.into(),
            pt.name.clone(),
            kind_name(pt.kind).into(),
            fmt(pt.xy[0]),
            fmt(pt.xy[1]),
            fmt(t),
        ]);
        let values = kappa_runs(&oracle, &pt.xy, radius, &counts, runs, derive_seed(ctx.seed(), i as u64), delta)?;
        let st = stats_from_runs(&counts, &values);
        for (c, per_run) in values.iter().enumerate() {
            let std = if runs == 1 { String::new() } else { fmt(st.stds[c]) };
            stats.push(vec![pt.variant.into(), pt.name.clone(), counts[c].to_string(), fmt(st.means[c]), std]);
            for (r, v) in per_run.iter().enumerate() {
                raw.push(vec![pt.variant.into(), pt.name.clone(), counts[c].to_string(), r.to_string(), fmt(*v)]);
            }
        }
        fit.push(vec![pt.variant.into(), pt.name.clone(), fmt(st.loglog_slope), fmt(st.loglog_r2)]);
    }
    ctx.out.write_table("kappa_truth.csv", &truth)?;
    ctx.out.write_table("kappa_stats.csv", &stats)?;
    ctx.out.write_table("kappa_runs.csv", &raw)?;
    if runs > 1 {
        ctx.out.write_table("kappa_fit.csv", &fit)?;
    }
    Ok(())
}
