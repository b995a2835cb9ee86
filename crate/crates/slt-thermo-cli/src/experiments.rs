//! Experiment dispatch: each named experiment maps onto the scan harness,
//! emits CSV rows plus a JSON summary, and optionally SVG line plots.

use crate::config::{ExperimentConfig, ExperimentId};
use crate::output::{self, atomic_write, ExitStatus, OutputBundle};
use crate::svg::{emit_svg_lineplot, SeriesBundle};
use anyhow::{anyhow, Context, Result};
use serde_json::{Map, Value};
use slt_thermo::model::{build_model, ModelId, ModelSpec, ProbeId};
use slt_thermo::rng::SeededRng;
use slt_thermo::sampler::SamplerConfig;
use slt_thermo::scan::{
    beta_scan, correlation_report, eos_scaling, field_response, landscape_scan, n_scan,
    waic_compare, ScanResult,
};
use slt_thermo::thermo::ThermoReport;
use std::path::{Path, PathBuf};
use std::time::Instant;

const ENTROPY_CROSSING_THRESHOLD: f64 = 0.1;

pub struct Emitted {
    pub rows: Vec<Map<String, Value>>,
    pub csv_paths: Vec<PathBuf>,
    pub svg_paths: Vec<PathBuf>,
    pub flags: Vec<String>,
}

impl Emitted {
    fn new() -> Self {
        Emitted { rows: Vec::new(), csv_paths: Vec::new(), svg_paths: Vec::new(), flags: Vec::new() }
    }
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn flatten_report(experiment: &str, scan: &str, report: &ThermoReport) -> Map<String, Value> {
    let mut row = Map::new();
    row.insert("experiment".into(), Value::String(experiment.to_string()));
    row.insert("scan".into(), Value::String(scan.to_string()));
    row.insert("model".into(), Value::String(report.model.clone()));
    row.insert("beta".into(), num(report.beta));
    row.insert("h".into(), num(report.h));
    row.insert("n".into(), Value::Number(report.n.into()));
    row.insert("nu_mode".into(), Value::String(report.nu_mode.as_str().to_string()));
    row.insert("nu_loglik".into(), num(report.nu_loglik));
    row.insert("p_waic".into(), num(report.p_waic));
    row.insert("gibbs_train_loss".into(), num(report.gibbs_train_loss));
    row.insert(
        "gibbs_gen_loss".into(),
        report.gibbs_gen_loss.map(num).unwrap_or(Value::Null),
    );
    row.insert("eos_gap".into(), report.eos_gap.map(num).unwrap_or(Value::Null));
    row.insert("eos_ratio".into(), report.eos_ratio.map(num).unwrap_or(Value::Null));
    row.insert("ess_min".into(), num(report.ess_min));
    row.insert("rhat_max".into(), num(report.rhat_max));
    row.insert("accept_rate".into(), num(report.accept_rate));
    row.insert("divergences".into(), Value::Number(report.divergences.into()));
    row.insert("flags".into(), Value::String(report.flags.join(";")));
    for (map, prefix) in [
        (&report.nu_functional, "nu_functional"),
        (&report.chi_pi_cov, "chi_pi_cov"),
        (&report.chi_pi_normalized, "chi_pi_normalized"),
        (&report.chi_pi_var, "chi_pi_var"),
        (&report.chi_beta_h, "chi_beta_h"),
        (&report.active_set_entropy, "active_set_entropy"),
        (&report.continuous_entropy, "continuous_entropy"),
    ] {
        for (probe, value) in map.iter() {
            row.insert(format!("{prefix}_{probe}"), num(*value));
        }
    }
    for (key, value) in report.extras.iter() {
        row.insert(key.clone(), num(*value));
    }
    row
}

fn scan_rows(experiment: &str, scan_name: &str, scan: &ScanResult) -> Vec<Map<String, Value>> {
    let mut rows = Vec::new();
    for (i, report) in scan.reports.iter().enumerate() {
        let mut row = match report {
            Some(r) => flatten_report(experiment, scan_name, r),
            None => {
                let mut row = Map::new();
                row.insert("experiment".into(), Value::String(experiment.to_string()));
                row.insert("scan".into(), Value::String(scan_name.to_string()));
                row.insert("axis".into(), Value::String(scan.axis.as_str().to_string()));
                row.insert(
                    "flags".into(),
                    Value::String(
                        scan.point_errors[i].clone().unwrap_or_else(|| "failed".to_string()),
                    ),
                );
                row
            }
        };
        row.insert("axis".into(), Value::String(scan.axis.as_str().to_string()));
        row.insert("axis_value".into(), num(scan.grid[i]));
        for (probe, flow) in scan.entropy_flow.iter() {
            row.insert(format!("entropy_flow_{probe}"), num(flow[i]));
        }
        rows.push(row);
    }
    rows
}

fn scan_flags(scan: &ScanResult) -> Vec<String> {
    let mut flags = Vec::new();
    for (i, err) in scan.point_errors.iter().enumerate() {
        if let Some(e) = err {
            flags.push(format!("{}@{}={}: {e}", scan.label, scan.axis.as_str(), scan.grid[i]));
        }
    }
    for (i, report) in scan.reports.iter().enumerate() {
        if let Some(r) = report {
            for f in &r.flags {
                flags.push(format!("{f}@{}={}", scan.axis.as_str(), scan.grid[i]));
            }
        }
    }
    flags
}

fn write_csv(dir: &Path, name: &str, rows: &[Map<String, Value>]) -> Result<PathBuf> {
    let path = dir.join(name);
    atomic_write(&path, output::rows_to_csv(rows).as_bytes())?;
    Ok(path)
}

fn plot_scan(
    dir: &Path,
    name: &str,
    scan: &ScanResult,
    probes: &[ProbeId],
) -> Result<Option<PathBuf>> {
    if !scan.complete() {
        return Ok(None);
    }
    let mut series = Vec::new();
    if let Some(nu) = scan.series_of(|r| Some(r.nu_loglik)) {
        series.push(("nu_loglik".to_string(), nu));
    }
    for &probe in probes {
        if let Some(h) = scan.entropy_series(probe) {
            series.push((format!("H_{}", probe.as_str()), h));
        }
    }
    if series.is_empty() {
        return Ok(None);
    }
    let bundle = SeriesBundle {
        x: &scan.grid,
        series,
        x_label: scan.axis.as_str().to_string(),
        y_label: "diagnostic".to_string(),
        log_x: true,
    };
    let svg = emit_svg_lineplot(&bundle)?;
    let path = dir.join(name);
    atomic_write(&path, svg.as_bytes())?;
    Ok(Some(path))
}

fn sampler_for(cfg: &ExperimentConfig) -> SamplerConfig {
    let mut s = cfg.sampler.clone();
    s.seed = cfg.seed;
    s
}

fn fixed_dataset(cfg: &ExperimentConfig, spec: &ModelSpec) -> Result<slt_thermo::model::Dataset> {
    let model = build_model(spec)?;
    let mut rng = SeededRng::derive(cfg.seed, &[0x6669_7864, cfg.data_n as u64]);
    Ok(model.generate_data(cfg.data_n, &mut rng))
}

/// exp1: sample-size and temperature scans on the branch-symmetric model.
fn run_exp1(cfg: &ExperimentConfig, out: &mut Emitted) -> Result<()> {
    let spec = &cfg.model;
    let sampler = sampler_for(cfg);
    let probes = &cfg.probes;

    let ns = n_scan(spec, &cfg.n_grid, 1.0, probes, &sampler, cfg.nu_mode, false)?;
    out.flags.extend(scan_flags(&ns));
    let rows = scan_rows("exp1", "n_scan", &ns);
    out.csv_paths.push(write_csv(&cfg.output_dir, "exp1_n_scan.csv", &rows)?);
    out.rows.extend(rows);

    let data = fixed_dataset(cfg, spec)?;
    let bs = beta_scan(spec, &data, &cfg.beta_grid, probes, &sampler, cfg.nu_mode)?;
    out.flags.extend(scan_flags(&bs));
    let rows = scan_rows("exp1", "beta_scan", &bs);
    out.csv_paths.push(write_csv(&cfg.output_dir, "exp1_beta_scan.csv", &rows)?);
    out.rows.extend(rows);

    if cfg.emit_plots {
        if let Some(p) = plot_scan(&cfg.output_dir, "exp1_n_scan.svg", &ns, probes)? {
            out.svg_paths.push(p);
        }
        if let Some(p) = plot_scan(&cfg.output_dir, "exp1_beta_scan.svg", &bs, probes)? {
            out.svg_paths.push(p);
        }
    }
    Ok(())
}

/// exp2: temperature scans per prior strength plus the (n, α) landscape.
fn run_exp2(cfg: &ExperimentConfig, out: &mut Emitted) -> Result<()> {
    let sampler = sampler_for(cfg);
    let probes = &cfg.probes;
    let data = fixed_dataset(cfg, &cfg.model)?;

    let mut beta_rows = Vec::new();
    for &alpha in &cfg.alpha_grid {
        let mut spec = cfg.model.clone();
        spec.hyperparameters.insert("dirichlet_alpha".to_string(), alpha);
        let bs = beta_scan(&spec, &data, &cfg.beta_grid, probes, &sampler, cfg.nu_mode)?;
        out.flags.extend(scan_flags(&bs));
        for mut row in scan_rows("exp2", "beta_scan", &bs) {
            row.insert("alpha".into(), num(alpha));
            beta_rows.push(row);
        }
        if cfg.emit_plots {
            let name = format!("exp2_beta_scan_alpha_{alpha}.svg");
            if let Some(p) = plot_scan(&cfg.output_dir, &name, &bs, probes)? {
                out.svg_paths.push(p);
            }
        }
    }
    out.csv_paths.push(write_csv(&cfg.output_dir, "exp2_beta_scan.csv", &beta_rows)?);
    out.rows.extend(beta_rows);

    let cells = landscape_scan(&cfg.model, &cfg.alpha_grid, &cfg.n_grid, 1.0, &sampler, cfg.nu_mode)?;
    let mut rows = Vec::new();
    for cell in &cells {
        let mut row = flatten_report("exp2", "landscape", &cell.report);
        row.insert("alpha".into(), num(cell.alpha));
        for (eps, p) in &cell.boundary_tail {
            row.insert(format!("p_wmin_gt_{eps}"), num(*p));
        }
        rows.push(row);
    }
    out.csv_paths.push(write_csv(&cfg.output_dir, "exp2_landscape.csv", &rows)?);
    out.rows.extend(rows);
    Ok(())
}

/// exp3 / exp4: paired temperature and sample-size scans on one model.
fn run_paired_scans(cfg: &ExperimentConfig, exp: &str, out: &mut Emitted) -> Result<()> {
    let sampler = sampler_for(cfg);
    let probes = &cfg.probes;
    let data = fixed_dataset(cfg, &cfg.model)?;

    let bs = beta_scan(&cfg.model, &data, &cfg.beta_grid, probes, &sampler, cfg.nu_mode)?;
    out.flags.extend(scan_flags(&bs));
    let rows = scan_rows(exp, "beta_scan", &bs);
    out.csv_paths.push(write_csv(&cfg.output_dir, &format!("{exp}_beta_scan.csv"), &rows)?);
    out.rows.extend(rows);

    let ns = n_scan(&cfg.model, &cfg.n_grid, 1.0, probes, &sampler, cfg.nu_mode, false)?;
    out.flags.extend(scan_flags(&ns));
    let rows = scan_rows(exp, "n_scan", &ns);
    out.csv_paths.push(write_csv(&cfg.output_dir, &format!("{exp}_n_scan.csv"), &rows)?);
    out.rows.extend(rows);

    if cfg.emit_plots {
        if let Some(p) = plot_scan(&cfg.output_dir, &format!("{exp}_beta_scan.svg"), &bs, probes)? {
            out.svg_paths.push(p);
        }
        if let Some(p) = plot_scan(&cfg.output_dir, &format!("{exp}_n_scan.svg"), &ns, probes)? {
            out.svg_paths.push(p);
        }
    }
    Ok(())
}

/// exp5: prior-field linear-response runs for the two mixture observables.
fn run_exp5(cfg: &ExperimentConfig, out: &mut Emitted) -> Result<()> {
    let sampler = sampler_for(cfg);
    let data = fixed_dataset(cfg, &cfg.model)?;
    let mut rows = Vec::new();
    for &probe in &cfg.probes {
        let fr = field_response(&cfg.model, &data, 1.0, probe, &cfg.h_grid, &sampler)?;
        for (i, &h) in fr.h_grid.iter().enumerate() {
            let mut row = Map::new();
            row.insert("experiment".into(), Value::String("exp5".into()));
            row.insert("scan".into(), Value::String("field_response".into()));
            row.insert("model".into(), Value::String(cfg.model.model_id.as_str().into()));
            row.insert("probe".into(), Value::String(probe.as_str().into()));
            row.insert("h".into(), num(h));
            row.insert("delta_e".into(), num(fr.delta_e.values()[i]));
            row.insert("predicted".into(), num(fr.predicted.values()[i]));
            rows.push(row);
        }
        let mut summary = Map::new();
        summary.insert("experiment".into(), Value::String("exp5".into()));
        summary.insert("scan".into(), Value::String("field_response_fit".into()));
        summary.insert("model".into(), Value::String(cfg.model.model_id.as_str().into()));
        summary.insert("probe".into(), Value::String(probe.as_str().into()));
        summary.insert("r_squared".into(), num(fr.r_squared));
        summary.insert("slope".into(), num(fr.slope));
        summary.insert("baseline_var".into(), num(fr.baseline_var));
        summary.insert("baseline_mean".into(), num(fr.baseline_mean));
        rows.push(summary);

        if cfg.emit_plots {
            let bundle = SeriesBundle {
                x: &fr.h_grid,
                series: vec![
                    ("observed".to_string(), fr.delta_e.values().to_vec()),
                    ("predicted".to_string(), fr.predicted.values().to_vec()),
                ],
                x_label: "h".into(),
                y_label: format!("delta_E[{}]", probe.as_str()),
                log_x: false,
            };
            let svg = emit_svg_lineplot(&bundle)?;
            let path = cfg.output_dir.join(format!("exp5_field_response_{}.svg", probe.as_str()));
            atomic_write(&path, svg.as_bytes())?;
            out.svg_paths.push(path);
        }
    }
    out.csv_paths.push(write_csv(&cfg.output_dir, "exp5_field_response.csv", &rows)?);
    out.rows.extend(rows);
    Ok(())
}

pub fn eos_model_set() -> Vec<ModelSpec> {
    vec![
        ModelSpec::new(ModelId::DiscreteSymmetry),
        ModelSpec::new(ModelId::BoundaryMixture),
        ModelSpec::new(ModelId::GaugeRank1),
        ModelSpec::new(ModelId::ReluSingle),
        ModelSpec::new(ModelId::GaussianControl),
    ]
}

/// exp6: replicated equation-of-state scaling for the four canonical models
/// plus the regular control.
fn run_exp6(cfg: &ExperimentConfig, out: &mut Emitted) -> Result<()> {
    let sampler = sampler_for(cfg);
    let mut rows = Vec::new();
    for spec in eos_model_set() {
        let scaling =
            eos_scaling(&spec, &cfg.n_grid, 1.0, &sampler, cfg.nu_mode, cfg.eos_replicates)?;
        for (i, &n) in scaling.n_grid.iter().enumerate() {
            let mut row = Map::new();
            row.insert("experiment".into(), Value::String("exp6".into()));
            row.insert("scan".into(), Value::String("eos".into()));
            row.insert("model".into(), Value::String(scaling.model.clone()));
            row.insert("n".into(), Value::Number(n.into()));
            row.insert("mean_gap".into(), num(scaling.mean_gap[i]));
            row.insert("gap_se".into(), num(scaling.gap_se[i]));
            row.insert("mean_nu".into(), num(scaling.mean_nu[i]));
            row.insert("ratio".into(), num(scaling.ratio[i]));
            row.insert("replicates".into(), Value::Number(scaling.replicates.into()));
            rows.push(row);
        }
        let mut summary = Map::new();
        summary.insert("experiment".into(), Value::String("exp6".into()));
        summary.insert("scan".into(), Value::String("eos_fit".into()));
        summary.insert("model".into(), Value::String(scaling.model.clone()));
        summary.insert("slope".into(), scaling.slope.map(num).unwrap_or(Value::Null));
        summary.insert("ratio_cv".into(), scaling.ratio_cv.map(num).unwrap_or(Value::Null));
        if scaling.slope.is_none() {
            out.flags.push(format!("{}: nonpositive mean gap, slope undefined", scaling.model));
        }
        rows.push(summary);
    }
    out.csv_paths.push(write_csv(&cfg.output_dir, "exp6_eos.csv", &rows)?);
    out.rows.extend(rows);
    Ok(())
}

pub fn canonical_model_set() -> Vec<ModelSpec> {
    vec![
        ModelSpec::new(ModelId::DiscreteSymmetry),
        ModelSpec::new(ModelId::BoundaryMixture),
        ModelSpec::new(ModelId::GaugeRank1),
        ModelSpec::new(ModelId::ReluSingle),
    ]
}

/// exp7: geometric vs thermodynamic fluctuation across β and n, per model.
fn run_exp7(cfg: &ExperimentConfig, out: &mut Emitted) -> Result<()> {
    let sampler = sampler_for(cfg);
    let mut rows = Vec::new();
    for spec in canonical_model_set() {
        let probe = ExperimentConfig::primary_probe(spec.model_id);
        let probes = [probe];
        let model = build_model(&spec)?;
        let mut rng = SeededRng::derive(cfg.seed, &[0x6669_7864, spec.model_id as u64]);
        let data = model.generate_data(cfg.data_n, &mut rng);

        let bs = beta_scan(&spec, &data, &cfg.beta_grid, &probes, &sampler, cfg.nu_mode)?;
        out.flags.extend(scan_flags(&bs));
        let ns = n_scan(&spec, &cfg.n_grid, 1.0, &probes, &sampler, cfg.nu_mode, false)?;
        out.flags.extend(scan_flags(&ns));

        for scan in [&bs, &ns] {
            for (i, report) in scan.reports.iter().enumerate() {
                let Some(r) = report else { continue };
                let geom = r.nu_functional.get(probe.as_str()).copied().unwrap_or(f64::NAN);
                let mut row = Map::new();
                row.insert("experiment".into(), Value::String("exp7".into()));
                row.insert("scan".into(), Value::String(scan.axis.as_str().into()));
                row.insert("model".into(), Value::String(spec.model_id.as_str().into()));
                row.insert("axis_value".into(), num(scan.grid[i]));
                row.insert("probe".into(), Value::String(probe.as_str().into()));
                row.insert("nu_thermo".into(), num(r.nu_loglik));
                row.insert("nu_geom".into(), num(geom));
                row.insert(
                    "geom_over_thermo".into(),
                    num(if r.nu_loglik > 0.0 { geom / r.nu_loglik } else { f64::NAN }),
                );
                rows.push(row);
            }
        }
    }
    out.csv_paths.push(write_csv(&cfg.output_dir, "exp7_fluctuation_split.csv", &rows)?);
    out.rows.extend(rows);
    Ok(())
}

/// exp8: correlation of fluctuation with entropy magnitude and entropy flow
/// over β-scans of the three discrete-mechanism models.
fn run_exp8(cfg: &ExperimentConfig, out: &mut Emitted) -> Result<()> {
    let sampler = sampler_for(cfg);
    let mut rows = Vec::new();
    let specs = [
        ModelSpec::new(ModelId::DiscreteSymmetry),
        ModelSpec::new(ModelId::BoundaryMixture),
        ModelSpec::new(ModelId::ReluSingle),
    ];
    for spec in specs {
        let probe = ExperimentConfig::primary_probe(spec.model_id);
        let probes = [probe];
        let model = build_model(&spec)?;
        let data_n = if spec.model_id == ModelId::ReluSingle { 20 } else { cfg.data_n };
        let mut rng = SeededRng::derive(cfg.seed, &[0x6669_7864, spec.model_id as u64]);
        let data = model.generate_data(data_n, &mut rng);
        let bs = beta_scan(&spec, &data, &cfg.beta_grid, &probes, &sampler, cfg.nu_mode)?;
        out.flags.extend(scan_flags(&bs));

        let scan_rows_v = scan_rows("exp8", "beta_scan", &bs);
        rows.extend(scan_rows_v);

        for cr in correlation_report(&[&bs], probe)? {
            let mut row = Map::new();
            row.insert("experiment".into(), Value::String("exp8".into()));
            row.insert("scan".into(), Value::String("correlation".into()));
            row.insert("model".into(), Value::String(spec.model_id.as_str().into()));
            row.insert("probe".into(), Value::String(cr.probe.clone()));
            row.insert(
                "corr_nu_entropy".into(),
                cr.corr_nu_entropy.map(num).unwrap_or(Value::Null),
            );
            row.insert("corr_nu_flow".into(), cr.corr_nu_flow.map(num).unwrap_or(Value::Null));
            row.insert("flags".into(), Value::String(cr.flags.join(";")));
            rows.push(row);
        }
    }
    out.csv_paths.push(write_csv(&cfg.output_dir, "exp8_correlations.csv", &rows)?);
    out.rows.extend(rows);
    Ok(())
}

/// exp9: WAIC vs 2ν̂ comparison table at β = 1.
fn run_exp9(cfg: &ExperimentConfig, out: &mut Emitted) -> Result<()> {
    let sampler = sampler_for(cfg);
    let specs = [
        ModelSpec::new(ModelId::DiscreteSymmetry),
        ModelSpec::new(ModelId::BoundaryMixture),
        ModelSpec::new(ModelId::ReluSingle),
    ];
    let table = waic_compare(&specs, &cfg.n_grid, &sampler, cfg.nu_mode)?;
    let mut rows = Vec::new();
    for r in &table {
        let mut row = Map::new();
        row.insert("experiment".into(), Value::String("exp9".into()));
        row.insert("scan".into(), Value::String("waic_compare".into()));
        row.insert("model".into(), Value::String(r.model.clone()));
        row.insert("n".into(), Value::Number(r.n.into()));
        row.insert("p_waic".into(), num(r.p_waic));
        row.insert("two_nu_loglik".into(), num(r.two_nu_loglik));
        row.insert("ratio".into(), num(r.ratio));
        row.insert("p_waic_over_n".into(), num(r.p_waic_over_n));
        row.insert("two_nu_over_n".into(), num(r.two_nu_over_n));
        rows.push(row);
    }
    out.csv_paths.push(write_csv(&cfg.output_dir, "exp9_waic.csv", &rows)?);
    out.rows.extend(rows);
    Ok(())
}

fn crossing_index(entropies: &[Option<f64>]) -> Option<usize> {
    entropies
        .iter()
        .position(|h| h.map(|v| v < ENTROPY_CROSSING_THRESHOLD).unwrap_or(false))
}

/// exp10: multi-unit ReLU sample-size scan with sign, permutation and death
/// probes, plus the entropy crossing summary.
fn run_exp10(cfg: &ExperimentConfig, out: &mut Emitted) -> Result<()> {
    let sampler = sampler_for(cfg);
    let probes = &cfg.probes;
    let ns = n_scan(&cfg.model, &cfg.n_grid, 1.0, probes, &sampler, cfg.nu_mode, false)?;
    out.flags.extend(scan_flags(&ns));
    let rows = scan_rows("exp10", "n_scan", &ns);
    out.csv_paths.push(write_csv(&cfg.output_dir, "exp10_n_scan.csv", &rows)?);
    out.rows.extend(rows);

    let mut summary = Map::new();
    summary.insert("experiment".into(), Value::String("exp10".into()));
    summary.insert("scan".into(), Value::String("entropy_crossings".into()));
    summary.insert("threshold_nats".into(), num(ENTROPY_CROSSING_THRESHOLD));
    for &probe in probes {
        if !probe.is_discrete() {
            continue;
        }
        let series: Vec<Option<f64>> = ns
            .reports
            .iter()
            .map(|r| r.as_ref().and_then(|rep| rep.active_set_entropy.get(probe.as_str()).copied()))
            .collect();
        let idx = crossing_index(&series);
        summary.insert(
            format!("crossing_index_{}", probe.as_str()),
            idx.map(|i| Value::Number(i.into())).unwrap_or(Value::Null),
        );
    }
    out.rows.push(summary);

    if cfg.emit_plots {
        if let Some(p) = plot_scan(&cfg.output_dir, "exp10_n_scan.svg", &ns, probes)? {
            out.svg_paths.push(p);
        }
    }
    Ok(())
}

fn run_custom(cfg: &ExperimentConfig, out: &mut Emitted) -> Result<()> {
    run_paired_scans(cfg, "custom", out)
}

/// Run one experiment end to end. The JSON summary is written even when a
/// stage fails (with the error in `flags`); only an unwritable output
/// directory aborts before any sampling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<OutputBundle> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("output dir {} is not writable", cfg.output_dir.display()))?;
    let probe_path = cfg.output_dir.join(".write_probe");
    std::fs::write(&probe_path, b"ok")
        .with_context(|| format!("output dir {} is not writable", cfg.output_dir.display()))?;
    let _ = std::fs::remove_file(&probe_path);

    let started = Instant::now();
    let mut out = Emitted::new();
    let result = match cfg.experiment {
        ExperimentId::Exp1 => run_exp1(cfg, &mut out),
        ExperimentId::Exp2 => run_exp2(cfg, &mut out),
        ExperimentId::Exp3 => run_paired_scans(cfg, "exp3", &mut out),
        ExperimentId::Exp4 => run_paired_scans(cfg, "exp4", &mut out),
        ExperimentId::Exp5 => run_exp5(cfg, &mut out),
        ExperimentId::Exp6 => run_exp6(cfg, &mut out),
        ExperimentId::Exp7 => run_exp7(cfg, &mut out),
        ExperimentId::Exp8 => run_exp8(cfg, &mut out),
        ExperimentId::Exp9 => run_exp9(cfg, &mut out),
        ExperimentId::Exp10 => run_exp10(cfg, &mut out),
        ExperimentId::Custom => run_custom(cfg, &mut out),
    };

    let status = match &result {
        Ok(()) if out.flags.is_empty() => ExitStatus::Ok,
        Ok(()) => ExitStatus::OkWithFlags,
        Err(e) => {
            out.flags.push(format!("failed: {e}"));
            ExitStatus::Failed
        }
    };

    let mut timings = Map::new();
    timings.insert("total_seconds".into(), num(started.elapsed().as_secs_f64()));
    let summary = output::summary_json(
        &cfg.digest(),
        cfg.experiment.as_str(),
        &out.rows,
        &out.flags,
        &timings,
    );
    let summary_path = cfg.output_dir.join(format!("{}_summary.json", cfg.experiment.as_str()));
    atomic_write(&summary_path, summary.as_bytes())?;

    if let Err(e) = result {
        // surfaced via exit status; the summary carries the detail
        eprintln!("error: {e}");
    }

    Ok(OutputBundle {
        csv_paths: out.csv_paths,
        json_summary_path: summary_path,
        svg_paths: out.svg_paths,
        exit_status: status,
    })
}

/// Free-form single scans used by the dedicated subcommands.
pub fn run_single_beta_scan(cfg: &ExperimentConfig) -> Result<OutputBundle> {
    run_named(cfg, |cfg, out| {
        let sampler = sampler_for(cfg);
        let data = fixed_dataset(cfg, &cfg.model)?;
        let bs = beta_scan(&cfg.model, &data, &cfg.beta_grid, &cfg.probes, &sampler, cfg.nu_mode)?;
        out.flags.extend(scan_flags(&bs));
        let rows = scan_rows("scan-beta", "beta_scan", &bs);
        out.csv_paths.push(write_csv(&cfg.output_dir, "beta_scan.csv", &rows)?);
        out.rows.extend(rows);
        if cfg.emit_plots {
            if let Some(p) = plot_scan(&cfg.output_dir, "beta_scan.svg", &bs, &cfg.probes)? {
                out.svg_paths.push(p);
            }
        }
        Ok(())
    }, "scan-beta")
}

pub fn run_single_n_scan(cfg: &ExperimentConfig, beta: f64, with_test: bool) -> Result<OutputBundle> {
    run_named(cfg, move |cfg, out| {
        let sampler = sampler_for(cfg);
        let ns = n_scan(&cfg.model, &cfg.n_grid, beta, &cfg.probes, &sampler, cfg.nu_mode, with_test)?;
        out.flags.extend(scan_flags(&ns));
        let rows = scan_rows("scan-n", "n_scan", &ns);
        out.csv_paths.push(write_csv(&cfg.output_dir, "n_scan.csv", &rows)?);
        out.rows.extend(rows);
        if cfg.emit_plots {
            if let Some(p) = plot_scan(&cfg.output_dir, "n_scan.svg", &ns, &cfg.probes)? {
                out.svg_paths.push(p);
            }
        }
        Ok(())
    }, "scan-n")
}

pub fn run_single_field_response(cfg: &ExperimentConfig, beta: f64) -> Result<OutputBundle> {
    run_named(cfg, move |cfg, out| {
        let sampler = sampler_for(cfg);
        let data = fixed_dataset(cfg, &cfg.model)?;
        let probe = *cfg
            .probes
            .first()
            .ok_or_else(|| anyhow!("field-response requires a probe"))?;
        let fr = field_response(&cfg.model, &data, beta, probe, &cfg.h_grid, &sampler)?;
        let mut rows = Vec::new();
        for (i, &h) in fr.h_grid.iter().enumerate() {
            let mut row = Map::new();
            row.insert("model".into(), Value::String(cfg.model.model_id.as_str().into()));
            row.insert("probe".into(), Value::String(probe.as_str().into()));
            row.insert("h".into(), num(h));
            row.insert("delta_e".into(), num(fr.delta_e.values()[i]));
            row.insert("predicted".into(), num(fr.predicted.values()[i]));
            rows.push(row);
        }
        let mut fit = Map::new();
        fit.insert("model".into(), Value::String(cfg.model.model_id.as_str().into()));
        fit.insert("probe".into(), Value::String(probe.as_str().into()));
        fit.insert("r_squared".into(), num(fr.r_squared));
        fit.insert("slope".into(), num(fr.slope));
        fit.insert("baseline_var".into(), num(fr.baseline_var));
        rows.push(fit);
        out.csv_paths.push(write_csv(&cfg.output_dir, "field_response.csv", &rows)?);
        out.rows.extend(rows);
        Ok(())
    }, "field-response")
}

pub fn run_single_eos(cfg: &ExperimentConfig, specs: Vec<ModelSpec>) -> Result<OutputBundle> {
    run_named(cfg, move |cfg, out| {
        let sampler = sampler_for(cfg);
        let mut rows = Vec::new();
        for spec in &specs {
            let s = eos_scaling(spec, &cfg.n_grid, 1.0, &sampler, cfg.nu_mode, cfg.eos_replicates)?;
            for (i, &n) in s.n_grid.iter().enumerate() {
                let mut row = Map::new();
                row.insert("model".into(), Value::String(s.model.clone()));
                row.insert("n".into(), Value::Number(n.into()));
                row.insert("mean_gap".into(), num(s.mean_gap[i]));
                row.insert("gap_se".into(), num(s.gap_se[i]));
                row.insert("mean_nu".into(), num(s.mean_nu[i]));
                row.insert("ratio".into(), num(s.ratio[i]));
                rows.push(row);
            }
            let mut fit = Map::new();
            fit.insert("model".into(), Value::String(s.model.clone()));
            fit.insert("slope".into(), s.slope.map(num).unwrap_or(Value::Null));
            fit.insert("ratio_cv".into(), s.ratio_cv.map(num).unwrap_or(Value::Null));
            rows.push(fit);
        }
        out.csv_paths.push(write_csv(&cfg.output_dir, "eos.csv", &rows)?);
        out.rows.extend(rows);
        Ok(())
    }, "eos")
}

pub fn run_single_waic_compare(cfg: &ExperimentConfig, specs: Vec<ModelSpec>) -> Result<OutputBundle> {
    run_named(cfg, move |cfg, out| {
        let sampler = sampler_for(cfg);
        let table = waic_compare(&specs, &cfg.n_grid, &sampler, cfg.nu_mode)?;
        let mut rows = Vec::new();
        for r in &table {
            let mut row = Map::new();
            row.insert("model".into(), Value::String(r.model.clone()));
            row.insert("n".into(), Value::Number(r.n.into()));
            row.insert("p_waic".into(), num(r.p_waic));
            row.insert("two_nu_loglik".into(), num(r.two_nu_loglik));
            row.insert("ratio".into(), num(r.ratio));
            row.insert("p_waic_over_n".into(), num(r.p_waic_over_n));
            row.insert("two_nu_over_n".into(), num(r.two_nu_over_n));
            rows.push(row);
        }
        out.csv_paths.push(write_csv(&cfg.output_dir, "waic_compare.csv", &rows)?);
        out.rows.extend(rows);
        Ok(())
    }, "waic-compare")
}

fn run_named(
    cfg: &ExperimentConfig,
    body: impl FnOnce(&ExperimentConfig, &mut Emitted) -> Result<()>,
    name: &str,
) -> Result<OutputBundle> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("output dir {} is not writable", cfg.output_dir.display()))?;
    let started = Instant::now();
    let mut out = Emitted::new();
    let result = body(cfg, &mut out);
    let status = match &result {
        Ok(()) if out.flags.is_empty() => ExitStatus::Ok,
        Ok(()) => ExitStatus::OkWithFlags,
        Err(e) => {
            out.flags.push(format!("failed: {e}"));
            ExitStatus::Failed
        }
    };
    let mut timings = Map::new();
    timings.insert("total_seconds".into(), num(started.elapsed().as_secs_f64()));
    let summary =
        output::summary_json(&cfg.digest(), name, &out.rows, &out.flags, &timings);
    let summary_path = cfg.output_dir.join(format!("{name}_summary.json"));
    atomic_write(&summary_path, summary.as_bytes())?;
    if let Err(e) = result {
        eprintln!("error: {e}");
    }
    Ok(OutputBundle {
        csv_paths: out.csv_paths,
        json_summary_path: summary_path,
        svg_paths: out.svg_paths,
        exit_status: status,
    })
}

