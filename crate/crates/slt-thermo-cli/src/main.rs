//! Command-line entry point: run named experiments from a JSON config, or
//! drive individual scans directly. Exit codes: 0 ok, 2 ok with flags,
//! 1 failed.

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use slt_thermo_cli::config::{parse_config, ExperimentConfig};
use slt_thermo_cli::{experiments, output};
use slt_thermo::model::{ModelId, ModelSpec, ProbeId};
use slt_thermo::thermo::NuMode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "slt-thermo", version, about = "Tempered-posterior thermodynamic diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonFlags {
    /// Override the config seed (SLT_THERMO_SEED takes precedence over both)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit SVG line plots alongside the CSVs
    #[arg(long)]
    plots: bool,
    /// Fluctuation convention: sum_pointwise | mean_normalized | variance_of_sum
    #[arg(long)]
    nu_mode: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named experiment from a JSON config file
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Temperature scan on a fixed dataset
    ScanBeta {
        #[arg(long)]
        model: String,
        #[arg(long, value_delimiter = ',')]
        beta_grid: Option<Vec<f64>>,
        #[arg(long)]
        data_n: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        probes: Option<Vec<String>>,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Sample-size scan with a fresh dataset per point
    ScanN {
        #[arg(long)]
        model: String,
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<u64>>,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        with_test: bool,
        #[arg(long, value_delimiter = ',')]
        probes: Option<Vec<String>>,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Prior-field linear-response run for one probe
    FieldResponse {
        #[arg(long)]
        model: String,
        #[arg(long)]
        probe: String,
        #[arg(long, value_delimiter = ',')]
        h_grid: Option<Vec<f64>>,
        #[arg(long)]
        data_n: Option<u64>,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Replicated equation-of-state scaling over n
    Eos {
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<u64>>,
        #[arg(long)]
        replicates: Option<u64>,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// WAIC vs 2ν̂ comparison table at β = 1
    WaicCompare {
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<u64>>,
        #[command(flatten)]
        common: CommonFlags,
    },
}

fn apply_common(cfg: &mut ExperimentConfig, common: &CommonFlags) -> Result<()> {
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if common.plots {
        cfg.emit_plots = true;
    }
    if let Some(mode) = &common.nu_mode {
        cfg.nu_mode = NuMode::parse(mode)?;
    }
    // Env override for CI sweeps: highest precedence.
    if let Ok(seed) = std::env::var("SLT_THERMO_SEED") {
        match seed.parse::<u64>() {
            Ok(s) => cfg.seed = s,
            Err(_) => bail!("SLT_THERMO_SEED must be an unsigned integer, got `{seed}`"),
        }
    }
    Ok(())
}

/// Base config for the free-form subcommands: the `custom` defaults with the
/// requested model substituted and the model's own probe set.
fn custom_config(model: &str) -> Result<ExperimentConfig> {
    let mut cfg = parse_config(&format!(
        r#"{{"experiment":"custom","model":{{"model_id":"{model}"}}}}"#
    ))?;
    let built = slt_thermo::model::build_model(&cfg.model)
        .map_err(|e| anyhow::anyhow!("invalid model: {e}"))?;
    cfg.probes = built.probes().to_vec();
    Ok(cfg)
}

fn parse_probe_list(names: &[String]) -> Result<Vec<ProbeId>> {
    names.iter().map(|s| ProbeId::parse(s).map_err(|e| anyhow::anyhow!("{e}"))).collect()
}

fn parse_model_list(names: &[String]) -> Result<Vec<ModelSpec>> {
    names
        .iter()
        .map(|s| ModelId::parse(s).map(ModelSpec::new).map_err(|e| anyhow::anyhow!("{e}")))
        .collect()
}

fn usize_grid(grid: Vec<u64>) -> Vec<usize> {
    grid.into_iter().map(|n| n as usize).collect()
}

fn run() -> Result<output::ExitStatus> {
    let cli = Cli::parse();
    let bundle = match cli.command {
        Command::Run { config, common } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            apply_common(&mut cfg, &common)?;
            experiments::run_experiment(&cfg)?
        }
        Command::ScanBeta { model, beta_grid, data_n, probes, common } => {
            let mut cfg = custom_config(&model)?;
            if let Some(grid) = beta_grid {
                cfg.beta_grid = grid;
            }
            if let Some(n) = data_n {
                cfg.data_n = n as usize;
            }
            if let Some(p) = probes {
                cfg.probes = parse_probe_list(&p)?;
            }
            apply_common(&mut cfg, &common)?;
            experiments::run_single_beta_scan(&cfg)?
        }
        Command::ScanN { model, n_grid, beta, with_test, probes, common } => {
            let mut cfg = custom_config(&model)?;
            if let Some(grid) = n_grid {
                cfg.n_grid = usize_grid(grid);
            }
            if let Some(p) = probes {
                cfg.probes = parse_probe_list(&p)?;
            }
            apply_common(&mut cfg, &common)?;
            experiments::run_single_n_scan(&cfg, beta, with_test)?
        }
        Command::FieldResponse { model, probe, h_grid, data_n, beta, common } => {
            let mut cfg = custom_config(&model)?;
            cfg.probes = vec![ProbeId::parse(&probe).map_err(|e| anyhow::anyhow!("{e}"))?];
            if let Some(grid) = h_grid {
                cfg.h_grid = grid;
            }
            if let Some(n) = data_n {
                cfg.data_n = n as usize;
            }
            apply_common(&mut cfg, &common)?;
            experiments::run_single_field_response(&cfg, beta)?
        }
        Command::Eos { models, n_grid, replicates, common } => {
            let mut cfg = parse_config(r#"{"experiment":"exp6"}"#)?;
            if let Some(grid) = n_grid {
                cfg.n_grid = usize_grid(grid);
            }
            if let Some(r) = replicates {
                cfg.eos_replicates = r as usize;
            }
            apply_common(&mut cfg, &common)?;
            let specs = match models {
                Some(names) => parse_model_list(&names)?,
                None => experiments::eos_model_set(),
            };
            experiments::run_single_eos(&cfg, specs)?
        }
        Command::WaicCompare { models, n_grid, common } => {
            let mut cfg = parse_config(r#"{"experiment":"exp9"}"#)?;
            if let Some(grid) = n_grid {
                cfg.n_grid = usize_grid(grid);
            }
            apply_common(&mut cfg, &common)?;
            let specs = match models {
                Some(names) => parse_model_list(&names)?,
                None => vec![
                    ModelSpec::new(ModelId::DiscreteSymmetry),
                    ModelSpec::new(ModelId::BoundaryMixture),
                    ModelSpec::new(ModelId::ReluSingle),
                ],
            };
            experiments::run_single_waic_compare(&cfg, specs)?
        }
    };
    for path in &bundle.csv_paths {
        println!("wrote {}", path.display());
    }
    for path in &bundle.svg_paths {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", bundle.json_summary_path.display());
    println!("status: {}", bundle.exit_status.as_str());
    Ok(bundle.exit_status)
}

fn main() -> ExitCode {
    match run() {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
