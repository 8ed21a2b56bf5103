//! Command-line front end: sweeps, resonance catalogs, bound states, the
//! Feshbach curve, Fano overlays, critical sizes, and the self-check battery.
//!
//! Exit codes: 0 success, 1 invalid input, 2 failed `verify` checks.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wgqed::{
    apply_set, bound_state_closed_form, bound_state_numeric, critical_size, find_resonances,
    parse_config, preset, resolve_pair, run_sweep, verify, Column, OutputFormat, SweepConfig,
};

#[derive(Parser)]
#[command(
    name = "wgqed",
    version,
    about = "Single-photon scattering observables for a two-mode rectangular waveguide"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate observables over a configured grid and emit CSV or JSON.
    Sweep(SweepArgs),
    /// List the band landmarks and resonance positions of a channel pair.
    Resonances(ParamArgs),
    /// Solve the pole cubic by both methods and report all three roots.
    #[command(name = "bound-states")]
    BoundStates(ParamArgs),
    /// Trace the Feshbach detuning as a function of the b-channel coupling.
    #[command(name = "feshbach-curve")]
    FeshbachCurve(CurveArgs),
    /// Emit transmission and the Fano profile side by side for overlay.
    #[command(name = "fano-compare")]
    FanoCompare(SweepArgs),
    /// Largest transverse size at which the second mode stays negligible.
    #[command(name = "critical-size")]
    CriticalSize(CriticalSizeArgs),
    /// Run the named-invariant self checks and report pass/fail per check.
    Verify(ParamArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep configuration file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named figure configuration (fig2a … fig6b).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ParamArgs {
    /// JSON sweep configuration file (only its parameters are used).
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named figure configuration (only its parameters are used).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Output format (default: csv; verify defaults to plain text).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output path (default: standard output).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override the grid point count.
    #[arg(long, value_name = "N")]
    points: Option<usize>,
    /// Override one parameter, e.g. --set gamma_b=0.15 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Sweep(args) => {
            let cfg = load_config(&args.config, &args.preset, &args.common, None, true)?;
            let result = run_sweep(&cfg).map_err(|e| e.to_string())?;
            emit(&args.common.out, result.render(cfg.format))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::FanoCompare(args) => {
            let default = preset("fig6a").map_err(|e| e.to_string())?;
            let cfg = load_config(&args.config, &args.preset, &args.common, Some(default), false)?;
            let has = |c: Column| cfg.outputs.as_deref().unwrap_or(&[]).contains(&c);
            if !(has(Column::Transmission) && has(Column::FanoF)) {
                return Err(
                    "fano-compare needs a configuration emitting both the T and fano_f columns \
                     (the fig6a/fig6b presets do)"
                        .into(),
                );
            }
            let result = run_sweep(&cfg).map_err(|e| e.to_string())?;
            emit(&args.common.out, result.render(cfg.format))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::FeshbachCurve(args) => {
            let default = preset("fig5").map_err(|e| e.to_string())?;
            let cfg = load_config(&None, &None, &args.common, Some(default), false)?;
            let result = run_sweep(&cfg).map_err(|e| e.to_string())?;
            emit(&args.common.out, result.render(cfg.format))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Resonances(args) => {
            let cfg = default_or_given(&args)?;
            let pair = resolve_pair(&cfg.parameters).map_err(|e| e.to_string())?;
            let res = find_resonances(&pair);
            let text = match effective_format(&cfg, &args.common) {
                OutputFormat::Json => serde_json::to_string_pretty(&res)
                    .expect("resonance sets hold only finite numbers"),
                OutputFormat::Csv => {
                    let mut rows: Vec<(String, f64)> = vec![
                        ("delta_min".into(), res.delta_min),
                        ("delta_max_f".into(), res.delta_max_f),
                        ("k_c".into(), res.k_c),
                    ];
                    for (i, k) in res.k_res.iter().enumerate() {
                        rows.push((format!("k_res_{}", i + 1), *k));
                    }
                    if let Some(df) = res.delta_f {
                        rows.push(("delta_f".into(), df));
                    }
                    if let Some((k1, k2)) = res.k_f {
                        rows.push(("k_f_1".into(), k1));
                        rows.push(("k_f_2".into(), k2));
                    }
                    rows.push((
                        "feshbach_in_band".into(),
                        if res.delta_f.is_some() && res.k_f.is_some() {
                            1.0
                        } else {
                            0.0
                        },
                    ));
                    let mut out = String::from("name,value\n");
                    for (name, value) in rows {
                        out.push_str(&format!("{name},{value:.16e}\n"));
                    }
                    out
                }
            };
            emit(&args.common.out, text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::BoundStates(args) => {
            let cfg = default_or_given(&args)?;
            let pair = resolve_pair(&cfg.parameters).map_err(|e| e.to_string())?;
            let b = pair.b();
            let closed =
                bound_state_closed_form(b.omega0(), b.v1(), b.v2(), pair.gamma_b())
                    .map_err(|e| e.to_string())?;
            let numeric = bound_state_numeric(b.omega0(), b.v1(), b.v2(), pair.gamma_b())
                .map_err(|e| e.to_string())?;
            let text = match effective_format(&cfg, &args.common) {
                OutputFormat::Json => {
                    let value = serde_json::json!({
                        "closed_form": closed,
                        "numeric": numeric,
                    });
                    serde_json::to_string_pretty(&value)
                        .expect("bound-state sets hold only finite numbers")
                }
                OutputFormat::Csv => {
                    let mut out = String::from(
                        "method,delta_f,e_bound,quasibound_1_re,quasibound_1_im,\
                         quasibound_2_re,quasibound_2_im,residual,delta_max_f\n",
                    );
                    for (method, set) in [("closed_form", &closed), ("numeric", &numeric)] {
                        out.push_str(&format!(
                            "{method},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                            set.delta_f,
                            set.e_bound,
                            set.quasibound.0.re,
                            set.quasibound.0.im,
                            set.quasibound.1.re,
                            set.quasibound.1.im,
                            set.residual,
                            set.delta_max_f,
                        ));
                    }
                    out
                }
            };
            emit(&args.common.out, text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CriticalSize(args) => {
            let l_c = critical_size(args.omega0, args.c).map_err(|e| e.to_string())?;
            let text = match args.format.unwrap_or(FormatArg::Csv) {
                FormatArg::Json => serde_json::to_string_pretty(&serde_json::json!({
                    "omega0": args.omega0,
                    "c": args.c,
                    "l_c": l_c,
                }))
                .expect("critical sizes are finite"),
                FormatArg::Csv => format!(
                    "omega0,c,l_c\n{:.16e},{:.16e},{:.16e}\n",
                    args.omega0, args.c, l_c
                ),
            };
            emit(&args.out, text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let cfg = default_or_given(&args)?;
            let report = verify(&cfg).map_err(|e| e.to_string())?;
            let text = match args.common.format {
                Some(FormatArg::Json) => report.to_json(),
                Some(FormatArg::Csv) => {
                    let mut out = String::from("name,passed,worst,tolerance\n");
                    for c in &report.checks {
                        out.push_str(&format!(
                            "{},{},{:.16e},{:.16e}\n",
                            c.name,
                            u8::from(c.passed),
                            c.worst,
                            c.tolerance
                        ));
                    }
                    out
                }
                None => report.to_text(),
            };
            emit(&args.common.out, text)?;
            Ok(if report.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

#[derive(Args)]
struct CriticalSizeArgs {
    /// Emitter transition frequency in rad/s.
    #[arg(long)]
    omega0: f64,
    /// Speed of light in the same units (default: vacuum, SI).
    #[arg(long, default_value_t = 299_792_458.0)]
    c: f64,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Resolves --config / --preset / defaults and applies --points and --set
/// overrides. `required` demands an explicit --config or --preset.
fn load_config(
    config: &Option<PathBuf>,
    preset_name: &Option<String>,
    common: &CommonArgs,
    default: Option<SweepConfig>,
    required: bool,
) -> Result<SweepConfig, String> {
    let mut cfg = if let Some(path) = config {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        parse_config(&text).map_err(|e| e.to_string())?
    } else if let Some(name) = preset_name {
        preset(name).map_err(|e| e.to_string())?
    } else if let Some(cfg) = default {
        cfg
    } else if required {
        return Err("give either --config <path> or --preset <name>".into());
    } else {
        unreachable!("subcommands without a default mark the config required")
    };
    if let Some(points) = common.points {
        cfg.range.count = points;
    }
    for item in &common.set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| format!("--set needs KEY=VALUE, got `{item}`"))?;
        apply_set(&mut cfg, key, value).map_err(|e| e.to_string())?;
    }
    if let Some(format) = common.format {
        cfg.format = match format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    Ok(cfg)
}

fn default_or_given(args: &ParamArgs) -> Result<SweepConfig, String> {
    let default = parse_config(
        r#"{"model":"quadratic","axis":"detuning","range":{"start":-0.5,"stop":0.5,"count":101}}"#,
    )
    .map_err(|e| e.to_string())?;
    load_config(&args.config, &args.preset, &args.common, Some(default), false)
}

fn effective_format(cfg: &SweepConfig, common: &CommonArgs) -> OutputFormat {
    match common.format {
        Some(FormatArg::Json) => OutputFormat::Json,
        Some(FormatArg::Csv) => OutputFormat::Csv,
        None => cfg.format,
    }
}

fn emit(out: &Option<PathBuf>, text: String) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
