//! Subcommand implementations. Each one computes first and writes all files at the end.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use nmpk::koopman::{trial_seed, KoopmanOperator};
use nmpk::lti::{normal_form, Phase, DEFAULT_HYPERBOLIC_MARGIN, DEFAULT_RELATIVE_DEGREE_TOL};
use nmpk::numkit::eigenvalues;
use nmpk::signals::Disturbances;
use nmpk::KoopmanOperator64;
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, SweepAxis};
use crate::experiment::{Experiment, Identified, Tracked};
use crate::plot::{thin, LinePlot, Series};
use crate::report::{ensure_dir, write_csv, write_file, write_report, RunReport};
use crate::CliError;

const PLOT_POINTS: usize = 1500;

/// Structural properties of the configured plant.
#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub order: usize,
    pub relative_degree: usize,
    pub gain: f64,
    /// Monic, descending powers.
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
    pub zeros: Vec<[f64; 2]>,
    pub poles: Vec<[f64; 2]>,
    pub phase: String,
    pub internal_eigenvalues: Vec<[f64; 2]>,
}

fn pairs(v: &[Complex<f64>]) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out
}

pub fn analysis(cfg: &ExperimentConfig) -> Result<Analysis, CliError> {
    let ss = cfg.plant.build()?;
    let tf = ss.to_transfer()?;
    let r = ss.relative_degree(DEFAULT_RELATIVE_DEGREE_TOL)?;
    let phase = ss.classify_phase(DEFAULT_HYPERBOLIC_MARGIN)?;
    let nf = normal_form(&ss)?;
    Ok(Analysis {
        order: ss.order(),
        relative_degree: r,
        gain: tf.gain,
        numerator: tf.numerator.clone(),
        denominator: tf.denominator.clone(),
        zeros: pairs(&ss.zeros()?),
        poles: pairs(&ss.poles()?),
        phase: match phase {
            Phase::MinimumPhase => "minimum-phase",
            Phase::NonMinimumPhase => "non-minimum-phase",
        }
        .into(),
        internal_eigenvalues: pairs(&eigenvalues(&nf.a4)?),
    })
}

pub fn analyze(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let a = analysis(cfg)?;
    println!("order {}  relative degree {}  gain {}", a.order, a.relative_degree, a.gain);
    println!("zeros {:?}", a.zeros);
    println!("poles {:?}", a.poles);
    println!("{}", a.phase);
    let mut report = RunReport::new("analyze", cfg.seed);
    ensure_dir(out)?;
    let text = serde_json::to_string_pretty(&a).map_err(|e| CliError::Validation(e.to_string()))?;
    write_file(&mut report, out.join("analysis.json"), |w| writeln!(w, "{text}"))?;
    report.details = serde_json::to_value(&a).unwrap_or_default();
    finish(report, out, start)
}

fn finish(mut report: RunReport, out: &Path, start: Instant) -> Result<RunReport, CliError> {
    report.wall_time_s = start.elapsed().as_secs_f64();
    let path = write_report(&report, out)?;
    report.files.push(path);
    Ok(report)
}

fn write_operator(report: &mut RunReport, out: &Path, op: &KoopmanOperator64) -> Result<(), CliError> {
    write_file(report, out.join("k.csv"), |w| op.write_csv(w))
}

fn identified_details(id: &Identified) -> serde_json::Value {
    json!({
        "atoms": id.operator.dictionary().len(),
        "residual": id.residual,
        "relative_residual": id.relative_residual,
        "trials": id.monte_carlo.trials,
        "max_trial_deviation": id.monte_carlo.max_deviation(),
    })
}

pub fn identify(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let ex = Experiment::from_config(cfg)?;
    let id = ex.identify()?;
    println!("identified {} coefficients, residual {:e} (relative {:e})", id.operator.dictionary().len(), id.residual, id.relative_residual);

    let mut report = RunReport::new("identify", cfg.seed);
    report.details = identified_details(&id);
    ensure_dir(out)?;
    write_operator(&mut report, out, &id.operator)?;
    let om = &id.monte_carlo.mean;
    let atoms = id.operator.dictionary().atoms().to_vec();
    write_file(&mut report, out.join("output_matrix.csv"), |w| {
        let times: Vec<String> = om.sample_times.iter().map(|t| t.to_string()).collect();
        writeln!(w, "row,{}", times.join(","))?;
        for (i, atom) in atoms.iter().enumerate() {
            let vals: Vec<String> = om.rows.row_slice(i).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{atom},{}", vals.join(","))?;
        }
        let d: Vec<String> = om.desired.iter().map(|v| v.to_string()).collect();
        writeln!(w, "desired,{}", d.join(","))
    })?;
    finish(report, out, start)
}

fn load_or_identify(ex: &Experiment, k_file: Option<&Path>) -> Result<(KoopmanOperator64, Option<Identified>), CliError> {
    match k_file {
        Some(path) => {
            let f = File::open(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
            let op = KoopmanOperator::read_csv(ex.dictionary()?, BufReader::new(f))
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            Ok((op, None))
        }
        None => {
            let id = ex.identify()?;
            Ok((id.operator.clone(), Some(id)))
        }
    }
}

fn desired(ex: &Experiment, t: f64) -> f64 {
    ex.trajectory.eval(t, 0).unwrap_or(f64::NAN)
}

pub fn track(cfg: &ExperimentConfig, k_file: Option<&Path>, out: &Path) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let ex = Experiment::from_config(cfg)?;
    let (op, id) = load_or_identify(&ex, k_file)?;
    let tr = ex.track(&op)?;
    println!(
        "steady-state error on [{}, {}]: max {:e}, rms {:e}",
        ex.window[0], ex.window[1], tr.metrics.max, tr.metrics.rms
    );

    let mut report = RunReport::new("track", cfg.seed);
    report.steady_state = Some(ex.window);
    report.metrics.insert("koopman".into(), tr.metrics);
    report.details = json!({ "identification": id.as_ref().map(identified_details) });
    ensure_dir(out)?;
    if id.is_some() {
        write_operator(&mut report, out, &op)?;
    }
    write_tracking(&mut report, out, &ex, &tr)?;
    finish(report, out, start)
}

fn write_tracking(report: &mut RunReport, out: &Path, ex: &Experiment, tr: &Tracked) -> Result<(), CliError> {
    let t = &tr.trajectory;
    let rows = (0..t.len()).map(|k| {
        let yd = desired(ex, t.times[k]);
        vec![t.times[k], yd, t.y[k], t.y[k] - yd, t.inputs[k]]
    });
    write_csv(report, out.join("tracking.csv"), &["time", "y_d", "y", "error", "u"], rows)?;
    let plot = LinePlot {
        title: "Tracking".into(),
        x_label: "t [s]".into(),
        y_label: "output".into(),
        series: vec![
            Series::new("y_d", thin(t.times.iter().map(|&s| (s, desired(ex, s))).collect(), PLOT_POINTS)),
            Series::new("y", thin(t.times.iter().copied().zip(t.y.iter().copied()).collect(), PLOT_POINTS)),
            Series::new("error", thin(t.times.iter().zip(&t.y).map(|(&s, &y)| (s, y - desired(ex, s))).collect(), PLOT_POINTS)),
        ],
        markers: false,
    };
    let svg = plot.render();
    write_file(report, out.join("tracking.svg"), |w| w.write_all(svg.as_bytes()))
}

pub fn oracle(cfg: &ExperimentConfig, k_file: Option<&Path>, out: &Path) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let ex = Experiment::from_config(cfg)?;
    let inv = ex.stable_inverse()?;
    let model = ex.track_oracle(&inv)?;
    let (op, id) = load_or_identify(&ex, k_file)?;
    let data = ex.track(&op)?;
    let ratio = model.metrics.max / data.metrics.max;
    println!("model-based max error {:e}, data-driven max error {:e} (ratio {:e})", model.metrics.max, data.metrics.max, ratio);

    let mut report = RunReport::new("oracle", cfg.seed);
    report.steady_state = Some(ex.window);
    report.metrics.insert("oracle".into(), model.metrics);
    report.metrics.insert("koopman".into(), data.metrics);
    report.details = json!({
        "max_error_ratio": ratio,
        "half_width": ex.half_width,
        "dt": ex.dt,
        "identification": id.as_ref().map(identified_details),
    });
    ensure_dir(out)?;
    let (m, d) = (&model.trajectory, &data.trajectory);
    let rows = (0..m.len()).map(|k| vec![m.times[k], m.inputs[k], d.inputs[k], m.y[k], d.y[k], desired(&ex, m.times[k])]);
    write_csv(&mut report, out.join("oracle.csv"), &["time", "u_oracle", "u_koopman", "y_oracle", "y_koopman", "y_d"], rows)?;
    write_csv(&mut report, out.join("oracle_input.csv"), &["time", "u_hat"], (0..m.len()).map(|k| vec![m.times[k], m.inputs[k]]))?;
    let err = |t: &nmpk::Trajectory64| thin(t.times.iter().zip(&t.y).map(|(&s, &y)| (s, y - desired(&ex, s))).collect(), PLOT_POINTS);
    let plot = LinePlot {
        title: "Model-based vs data-driven tracking error".into(),
        x_label: "t [s]".into(),
        y_label: "y - y_d".into(),
        series: vec![Series::new("stable inverse", err(m)), Series::new("koopman", err(d))],
        markers: false,
    };
    let svg = plot.render();
    write_file(&mut report, out.join("oracle.svg"), |w| w.write_all(svg.as_bytes()))?;
    finish(report, out, start)
}

/// One sweep point's configuration.
pub fn sweep_point(cfg: &ExperimentConfig, axis: SweepAxis, value: f64, keep_window: bool) -> ExperimentConfig {
    let mut c = cfg.clone();
    match axis {
        SweepAxis::HalfWidth => c.dictionary.half_width = value as usize,
        SweepAxis::Dt => {
            if keep_window {
                let window = cfg.dictionary.half_width as f64 * cfg.dictionary.dt;
                c.dictionary.half_width = ((window / value).round() as usize).max(1);
            }
            c.dictionary.dt = value;
        }
        SweepAxis::MonteCarlo => c.identification.trials = value as usize,
        SweepAxis::Disturbance => c.identification.disturbances = Disturbances::multiplicative(value),
    }
    c.sweep = None;
    c
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub repetition: usize,
    pub seed: u64,
    pub max_error: f64,
    pub rms_error: f64,
    pub error: Option<String>,
}

/// Runs every (value, repetition) point; repetition `i` uses the same derived seed for all values.
pub fn sweep_rows(cfg: &ExperimentConfig) -> Result<(Vec<SweepRow>, Option<CliError>), CliError> {
    let sw = cfg.sweep.as_ref().ok_or_else(|| CliError::Validation("sweep needs a [sweep] section".into()))?;
    let points: Vec<(f64, usize)> = sw.values.iter().flat_map(|&v| (0..sw.repetitions).map(move |i| (v, i))).collect();
    let results: Vec<(SweepRow, Option<CliError>)> = points
        .par_iter()
        .map(|&(value, repetition)| {
            let mut c = sweep_point(cfg, sw.axis, value, sw.keep_window);
            c.seed = trial_seed(cfg.seed, repetition);
            let seed = c.seed;
            let run = || -> Result<Tracked, CliError> {
                c.validate()?;
                let ex = Experiment::from_config(&c)?;
                let id = ex.identify()?;
                ex.track(&id.operator)
            };
            match run() {
                Ok(tr) => (SweepRow { value, repetition, seed, max_error: tr.metrics.max, rms_error: tr.metrics.rms, error: None }, None),
                Err(e) => (
                    SweepRow { value, repetition, seed, max_error: f64::NAN, rms_error: f64::NAN, error: Some(e.to_string()) },
                    Some(e),
                ),
            }
        })
        .collect();
    let mut first = None;
    let mut rows = Vec::with_capacity(results.len());
    for (row, err) in results {
        if first.is_none() {
            first = err;
        }
        rows.push(row);
    }
    Ok((rows, first))
}

pub fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<(RunReport, Option<CliError>), CliError> {
    let start = Instant::now();
    let sw = cfg.sweep.clone().ok_or_else(|| CliError::Validation("sweep needs a [sweep] section".into()))?;
    let (rows, failure) = sweep_rows(cfg)?;
    let axis = serde_json::to_value(sw.axis).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();

    let summary: Vec<(f64, f64, f64, usize)> = sw
        .values
        .iter()
        .map(|&v| {
            let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.value == v && r.error.is_none()).collect();
            let n = ok.len().max(1) as f64;
            (v, ok.iter().map(|r| r.max_error).sum::<f64>() / n, ok.iter().map(|r| r.rms_error).sum::<f64>() / n, ok.len())
        })
        .collect();
    for (v, m, r, n) in &summary {
        println!("{axis} = {v}: mean max error {m:e}, mean rms error {r:e} over {n} runs");
    }

    let mut report = RunReport::new("sweep", cfg.seed);
    report.steady_state = Some(cfg.tracking.steady_state);
    report.details = json!({
        "axis": axis,
        "repetitions": sw.repetitions,
        "failures": rows.iter().filter(|r| r.error.is_some()).count(),
        "summary": summary.iter().map(|(v, m, r, n)| json!({"value": v, "mean_max_error": m, "mean_rms_error": r, "runs": n})).collect::<Vec<_>>(),
    });
    ensure_dir(out)?;
    write_file(&mut report, out.join("sweep.csv"), |w| {
        writeln!(w, "value,repetition,seed,max_error,rms_error,status")?;
        for r in &rows {
            let status = r.error.as_deref().map(|e| format!("\"failed: {}\"", e.replace('"', "'"))).unwrap_or_else(|| "ok".into());
            writeln!(w, "{},{},{},{},{},{}", r.value, r.repetition, r.seed, r.max_error, r.rms_error, status)?;
        }
        Ok(())
    })?;
    let plot = LinePlot {
        title: format!("Steady-state error vs {axis}"),
        x_label: axis.clone(),
        y_label: "mean error".into(),
        series: vec![
            Series::new("max |y - y_d|", summary.iter().map(|s| (s.0, s.1)).collect()),
            Series::new("rms |y - y_d|", summary.iter().map(|s| (s.0, s.2)).collect()),
        ],
        markers: true,
    };
    let svg = plot.render();
    write_file(&mut report, out.join("sweep.svg"), |w| w.write_all(svg.as_bytes()))?;
    Ok((finish(report, out, start)?, failure))
}
