//! One function per command; each fills the output set with its tables.

use std::collections::BTreeMap;

use epswitch_core::dynamics::{
    accumulated_decay, run_switch_experiment, Direction, InputLabel, IntegrateOptions, PlaneAxes, SwitchOptions,
};
use epswitch_core::ep::{classify_ep_order, ClassifyOptions, EpCandidate, EpError, RefineOptions};
use epswitch_core::linalg::CMatrix;
use epswitch_core::model::dynamical_matrix;
use epswitch_core::spectral::{eigendecompose, track_spectrum, ParamPath, TrackOptions};
use epswitch_core::LoopPath;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Command, RunConfig};
use crate::emit::{Cell, OutputSet, Table};
use crate::CliError;

pub fn dispatch(config: &RunConfig, out: &mut OutputSet) -> Result<(), CliError> {
    match config.command {
        Command::Scan => scan(config, out),
        Command::Surface => surface(config, out),
        Command::FindEp => find_ep(config, out),
        Command::Loop => loop_command(config, out),
        Command::Evolve => evolve(config, out),
    }
}

fn scan(config: &RunConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let grid = config.scan_grid()?;
    let cells: Vec<_> = (0..grid.len()).into_par_iter().map(|k| grid.cell(k, config.method)).collect();
    let mut table = Table::new([grid.axis1.name.as_str(), grid.axis2.name.as_str(), "max_cond"]);
    for c in cells {
        table.push(vec![c.x.into(), c.y.into(), c.max_cond.into()]);
    }
    out.write_table("condition_map", &table, config.format())
}

fn surface(config: &RunConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let grid = config.scan_grid()?;
    let method = config.method;
    let cells: Vec<_> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (x, y, p) = grid.point(k);
            (x, y, eigendecompose(&dynamical_matrix(&p, method)).ok())
        })
        .collect();
    let mut table = Table::new([grid.axis1.name.as_str(), grid.axis2.name.as_str(), "branch", "re", "im", "cond"]);
    for (x, y, es) in cells {
        for b in 0..8 {
            let (re, im, cond) = match &es {
                Some(es) => (Cell::Num(es.values[b].re), Cell::Num(es.values[b].im), Cell::Num(es.cond[b])),
                None => (Cell::Missing, Cell::Missing, Cell::Missing),
            };
            table.push(vec![x.into(), y.into(), (b + 1).into(), re, im, cond]);
        }
    }
    out.write_table("eigenvalue_surface", &table, config.format())
}

/// Contents of `best.json` for `find-ep`.
#[derive(Debug, Clone, Serialize)]
struct BestRecord {
    seed: usize,
    candidate: EpCandidate,
    classified_order: Option<usize>,
    classification: String,
    left_right_angle_deg: f64,
}

/// Refined (or best unconverged) candidate and its order classification.
type SeedOutcome = (EpCandidate, Result<usize, EpError>);

fn refine_options(config: &RunConfig) -> RefineOptions {
    let search = config.search.as_ref().expect("validated");
    let mut opts = if search.order == 2 { RefineOptions::default() } else { RefineOptions::high_order() };
    opts.method = config.method;
    if let Some(t) = search.diameter_tol {
        opts.diameter_tol = t;
    }
    if let Some(t) = search.cond_tol {
        opts.cond_tol = t;
    }
    if let Some(x) = search.max_excursion {
        opts.max_excursion = x;
    }
    opts
}

fn find_ep(config: &RunConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let search = config.search.as_ref().expect("validated");
    let seeds = config.seed_params()?;
    let opts = refine_options(config);
    let classify = ClassifyOptions { method: config.method, ..ClassifyOptions::default() };
    let radius = search.classify_radius;

    let results: Vec<Result<SeedOutcome, EpError>> = seeds
        .par_iter()
        .map(|seed| {
            let c = match epswitch_core::ep::refine_ep(seed, &search.free, search.order, &opts) {
                Ok(c) => c,
                Err(EpError::NoConvergence { candidate }) => *candidate,
                Err(e) => return Err(e),
            };
            let order = classify_ep_order(&c, radius, &classify);
            Ok((c, order))
        })
        .collect();

    let mut header = vec!["seed".to_string(), "converged".into(), "cluster_diameter".into(), "max_cond".into()];
    header.extend(search.free.iter().map(|n| n.as_str().to_string()));
    header.extend(["excursion".into(), "evaluations".into(), "classified_order".into(), "classification".into()]);
    let mut table = Table::new(header);
    let mut best: Option<BestRecord> = None;
    for (i, (r, seed)) in results.into_iter().zip(&seeds).enumerate() {
        let (c, order) = r.map_err(CliError::compute)?;
        let excursion = search.free.iter().map(|&n| (c.location.get(n) - seed.get(n)).abs()).fold(0.0, f64::max);
        let (classified, note) = match &order {
            Ok(k) => (Some(*k), "ok".to_string()),
            Err(e) => (None, e.to_string()),
        };
        let mut row = vec![(i + 1).into(), c.converged.into(), c.cluster_diameter.into(), c.max_cond.into()];
        row.extend(search.free.iter().map(|&n| Cell::Num(c.location.get(n))));
        row.extend([
            excursion.into(),
            c.evaluations.into(),
            classified.map_or(Cell::Missing, Cell::from),
            Cell::Text(note.clone()),
        ]);
        table.push(row);
        let better = best.as_ref().is_none_or(|b| c.cluster_diameter < b.candidate.cluster_diameter);
        if c.converged && better {
            let angle = c.left_right_angle_deg();
            best = Some(BestRecord {
                seed: i + 1,
                candidate: c,
                classified_order: classified,
                classification: note,
                left_right_angle_deg: angle,
            });
        }
    }
    out.write_table("candidates", &table, config.format())?;
    match best {
        Some(b) => out.write_json("best.json", &b),
        None => {
            let summary: Vec<String> = table
                .rows
                .iter()
                .map(|r| match (&r[0], &r[2]) {
                    (Cell::Int(s), Cell::Num(d)) => format!("seed {s}: diameter {d:.3e}"),
                    _ => String::new(),
                })
                .collect();
            Err(CliError::Compute(format!(
                "no start reached the order-{} tolerance ({})",
                search.order,
                summary.join("; ")
            )))
        }
    }
}

fn loop_command(config: &RunConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let path = config.loop_path()?;
    let samples = config.path.as_ref().expect("validated").samples;
    let tracked = track_spectrum(&path, samples, config.method, TrackOptions::default()).map_err(CliError::compute)?;

    let mut table = Table::new(["t", "delta1", "omega1", "branch", "re", "im"]);
    for (t, es) in tracked.grid_samples() {
        let [d, o] = path.point(t);
        for (b, v) in es.values.iter().enumerate() {
            table.push(vec![t.into(), d.into(), o.into(), (b + 1).into(), v.re.into(), v.im.into()]);
        }
    }
    out.write_table("branches", &table, config.format())?;

    let perm = tracked.permutation.clone().expect("loops are closed");
    let record: BTreeMap<String, usize> = (0..perm.len()).map(|k| ((k + 1).to_string(), perm.apply(k) + 1)).collect();
    out.write_json("permutation.json", &record)?;

    let decay = accumulated_decay(&path, samples, config.method).map_err(CliError::compute)?;
    let summary = LoopSummary {
        cycles: perm.to_string(),
        identity: perm.is_identity(),
        refinements: tracked.refinements,
        samples,
        period: path.period(),
        start_values: tracked.samples[0].values.iter().map(|v| [v.re, v.im]).collect(),
        final_decay: *decay.final_gamma(),
    };
    out.write_json("loop_summary.json", &summary)
}

#[derive(Debug, Clone, Serialize)]
struct LoopSummary {
    /// 1-based cycle notation, `id` for the identity.
    cycles: String,
    identity: bool,
    refinements: usize,
    samples: usize,
    period: f64,
    start_values: Vec<[f64; 2]>,
    /// `Γ_ℓj(T)`, row ℓ, column j.
    final_decay: [[f64; 8]; 8],
}

/// Complex matrix as separate real and imaginary row arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for ComplexMatrix {
    fn from(m: &CMatrix) -> Self {
        let n = m.n();
        ComplexMatrix {
            re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }
}

/// Serializable switch-experiment result. Branch labels are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchRecord {
    pub input: u8,
    pub direction: Direction,
    pub axes: PlaneAxes,
    pub path: LoopPath,
    pub start_values: Vec<[f64; 2]>,
    pub input_bloch: [f64; 8],
    pub output_bloch: [f64; 8],
    pub input_rho: ComplexMatrix,
    pub output_rho: ComplexMatrix,
    pub output_off_diagonal: ComplexMatrix,
    pub output_nearest_pure: Option<ComplexMatrix>,
    pub max_coherence: f64,
    pub input_projections: [f64; 8],
    pub output_projections: [f64; 8],
    pub dominant_output: [usize; 2],
    pub swapped: bool,
    pub adiabatic_fraction: Option<f64>,
    pub reconstruction_error: Option<f64>,
    pub steps: usize,
    pub dt: f64,
    pub guard_change: f64,
}

fn evolve(config: &RunConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let ev = config.evolve.expect("validated");
    let path = config.loop_path()?;
    let direction = ev.direction.unwrap_or(path.direction);
    let path = path.with_direction(direction);
    let input = InputLabel::from_number(ev.input).expect("validated");
    let opts = SwitchOptions {
        integrate: IntegrateOptions { method: config.method, steps: ev.steps, ..IntegrateOptions::default() },
        track: ev.track,
        ..SwitchOptions::default()
    };
    let rep = run_switch_experiment(input, direction, &path, &opts).map_err(CliError::compute)?;

    let record = SwitchRecord {
        input: ev.input,
        direction,
        axes: rep.axes,
        path,
        start_values: rep.start_values.iter().map(|v| [v.re, v.im]).collect(),
        input_bloch: rep.input_bloch.0,
        output_bloch: rep.output_bloch.0,
        input_rho: rep.input_state.matrix().into(),
        output_rho: rep.output_state.matrix().into(),
        output_off_diagonal: (&rep.output_off_diagonal).into(),
        output_nearest_pure: rep.output_nearest_pure.as_ref().map(|r| r.matrix().into()),
        max_coherence: rep.max_coherence,
        input_projections: rep.input_projections,
        output_projections: rep.output_projections,
        dominant_output: rep.dominant_output.map(|b| b + 1),
        swapped: rep.swapped,
        adiabatic_fraction: rep.adiabatic_fraction,
        reconstruction_error: rep.reconstruction_error,
        steps: rep.trajectory.times.len() - 1,
        dt: rep.dt,
        guard_change: rep.guard_change,
    };
    out.write_json("report.json", &record)?;

    let mut header = vec!["t".to_string(), "delta1".into(), "omega1".into()];
    header.extend((1..=8).map(|i| format!("s{i}")));
    let mut traj = Table::new(header);
    for (t, s) in rep.trajectory.times.iter().zip(&rep.trajectory.states) {
        let [d, o] = path.point(*t);
        let mut row: Vec<Cell> = vec![(*t).into(), d.into(), o.into()];
        row.extend(s.0.iter().map(|&x| Cell::Num(x)));
        traj.push(row);
    }
    out.write_table("trajectory", &traj, config.format())?;

    if let Some(coeffs) = &rep.coefficients {
        let mut table = Table::new(["t", "branch", "re", "im", "abs2"]);
        for (t, a) in rep.trajectory.times.iter().zip(coeffs) {
            for (b, z) in a.iter().enumerate() {
                table.push(vec![(*t).into(), (b + 1).into(), z.re.into(), z.im.into(), z.norm_sqr().into()]);
            }
        }
        out.write_table("coefficients", &table, config.format())?;
    }
    Ok(())
}
