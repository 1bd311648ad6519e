use std::f64::consts::PI;

use serde_json::{json, Map, Value};
use zeno_core::analysis::{linear_grid, log_grid, sweep_rate_curve};
use zeno_core::oracle::{
    default_dt, integrate_amplitudes, oracle_rate, oracle_rate_with_step, TrajectoryPoint,
};
use zeno_core::rate::decay_rate;
use zeno_core::renorm::{compute_omega1_closed_form, delta_omega_map};
use zeno_core::spectra::presets;
use zeno_core::{discretize_bath, Approach, AmplitudeState, AtomBathModel, MeasurementProtocol, SpectrumKind};

use crate::config::{
    parse_list, Cli, Command, ConfigFile, Echo, Format, GridConfig, ModelConfig, OracleCheckArgs, OracleConfig,
    OutputConfig, RateCurveArgs, ShiftArgs, ZenoMapArgs,
};
use crate::error::{CliError, Result};
use crate::output::{csv_table, emit, fmt_float, json_document, key_value_text};

/// Norm drift allowed for an oracle run to count as accurate.
const ORACLE_DRIFT_LIMIT: f64 = 1e-9;

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Shift(a) => shift(a),
        Command::RateCurve(a) => rate_curve(a),
        Command::ZenoMap(a) => zeno_map(a),
        Command::OracleCheck(a) => oracle_check(a),
    }
}

fn echo_header(command: &str) -> Echo {
    vec![
        ("command".into(), format!("zeno {command}")),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
    ]
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Json => "json",
        Format::Csv | Format::Text => "csv",
    }
}

fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect();
    s.trim_matches('_').to_string()
}

/// Data commands render text as CSV.
fn render_table(format: Format, command: &str, echo: &Echo, header: &[&str], rows: Vec<Vec<Value>>) -> Result<String> {
    match format {
        Format::Json => {
            let objects = rows
                .into_iter()
                .map(|row| Value::Object(header.iter().map(|h| h.to_string()).zip(row).collect()))
                .collect();
            Ok(json_document(command, echo, "rows", Value::Array(objects)))
        }
        Format::Csv | Format::Text => {
            let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(cell).collect()).collect();
            csv_table(echo, header, &cells)
        }
    }
}

/// Floats are carried as JSON numbers; NaN becomes null there and "NaN" in CSV.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(fmt_float(x))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) => fmt_float(n.as_f64().expect("finite float")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn shift(args: ShiftArgs) -> Result<()> {
    let mut file = ConfigFile::load(args.output.config.as_deref())?;
    let model_cfg = ModelConfig::resolve(args.model, &mut file)?;
    let out = OutputConfig::resolve(args.output, &mut file, Format::Text)?;
    file.finish()?;
    let scale = out.frequency_scale(model_cfg.omega_scale)?;

    let model = AtomBathModel::reduced(model_cfg.spectrum.clone());
    let omega1 = model.omega1()?;
    let omega_prime = model.omega_prime()?;
    let mut quantities = vec![
        ("omega0", scale),
        ("omega1", omega1 * scale),
        ("omega_prime", omega_prime * scale),
        ("shift_I", omega1 - 1.0),
        ("shift_II", 1.0 - omega_prime),
    ];
    if let SpectrumKind::OhmicFamily(p) = model.spectrum().kind() {
        let closed = compute_omega1_closed_form(p, 1.0)?;
        let (a, b) = (closed - 1.0, omega1 - 1.0);
        let diff = if a == b { 0.0 } else { (a / b - 1.0).abs() };
        quantities.push(("omega1_closed_form", closed * scale));
        quantities.push(("closed_form_rel_diff", diff));
    }

    let mut echo = echo_header("shift");
    model_cfg.echo(&mut echo);
    out.echo(&mut echo);
    let text = match out.format {
        Format::Text => {
            let mut pairs: Vec<(String, String)> = echo.iter().skip(2).cloned().collect();
            pairs.extend(quantities.iter().map(|(k, v)| (k.to_string(), fmt_float(*v))));
            key_value_text(&pairs)
        }
        Format::Json => {
            let report: Map<String, Value> = quantities.iter().map(|(k, v)| (k.to_string(), num(*v))).collect();
            json_document("shift", &echo, "report", Value::Object(report))
        }
        Format::Csv => {
            let header: Vec<&str> = quantities.iter().map(|(k, _)| *k).collect();
            let row = vec![quantities.iter().map(|(_, v)| fmt_float(*v)).collect()];
            csv_table(&echo, &header, &row)?
        }
    };
    emit(out.report_destination().as_deref(), &text)
}

fn rate_curve(args: RateCurveArgs) -> Result<()> {
    let mut file = ConfigFile::load(args.output.config.as_deref())?;
    let model_cfg = ModelConfig::resolve(args.model, &mut file)?;
    let approach = file.pick(args.approach, "approach")?.unwrap_or(Approach::ApproachI);
    let grid = GridConfig::resolve(args.grid, &mut file, model_cfg.spectrum.cutoff())?;
    let out = OutputConfig::resolve(args.output, &mut file, Format::Csv)?;
    file.finish()?;
    let scale = out.frequency_scale(model_cfg.omega_scale)?;

    let model = AtomBathModel::reduced(model_cfg.spectrum.clone());
    let taus = grid.taus()?;
    let curve = sweep_rate_curve(&model, approach, &taus)?;
    let rwa = if approach == Approach::Rwa {
        curve.clone()
    } else {
        sweep_rate_curve(&model, Approach::Rwa, &taus)?
    };

    let rows = curve
        .points
        .iter()
        .zip(&rwa.points)
        .map(|(p, q)| {
            vec![
                num(p.tau / scale),
                num(p.rate * scale),
                num(p.r0 * scale),
                num(p.ratio),
                num(q.rate * scale),
                num((p.rate - q.rate).abs() * scale),
                Value::String(approach.label().into()),
            ]
        })
        .collect();

    let mut echo = echo_header("rate-curve");
    model_cfg.echo(&mut echo);
    echo.push(("approach".into(), approach.label().into()));
    grid.echo(&mut echo);
    out.echo(&mut echo);
    let header = ["tau", "R", "R0", "ratio", "R_rwa", "delta_R", "approach"];
    let text = render_table(out.format, "rate-curve", &echo, &header, rows)?;
    let name = format!(
        "rate_curve_{}_{}.{}",
        slug(&model_cfg.label),
        approach.label(),
        extension(out.format)
    );
    emit(out.data_destination(&name).as_deref(), &text)
}

fn zeno_map(args: ZenoMapArgs) -> Result<()> {
    let mut file = ConfigFile::load(args.output.config.as_deref())?;
    let a_values = file.pick(args.a_values, "a-values")?;
    let a_min = file.pick(args.a_min, "a-min")?.unwrap_or(1e-9);
    let a_max = file.pick(args.a_max, "a-max")?.unwrap_or(1e-6);
    let a_points = file.pick(args.a_points, "a-points")?.unwrap_or(31);
    let s_min = file.pick(args.s_min, "s-min")?.unwrap_or(1e-3);
    let s_max = file.pick(args.s_max, "s-max")?.unwrap_or(4e-3);
    let s_points = file.pick(args.s_points, "s-points")?.unwrap_or(31);
    let omega_c = file.pick(args.omega_c, "omega-c")?.unwrap_or(presets::OHMIC_CUTOFF);
    let omega_scale = file.pick(args.omega_scale, "omega-scale")?;
    let out = OutputConfig::resolve(args.output, &mut file, Format::Csv)?;
    file.finish()?;
    let scale = out.frequency_scale(omega_scale)?;

    let (a_grid, a_desc) = match a_values {
        Some(list) => {
            let v = parse_list(&list).map_err(|e| CliError::Config(format!("a-values: {e}")))?;
            (v, list)
        }
        None => (
            log_grid(a_min, a_max, a_points).map_err(CliError::config)?,
            format!("log {a_min:e}..{a_max:e} x {a_points}"),
        ),
    };
    let s_grid = linear_grid(s_min, s_max, s_points).map_err(CliError::config)?;
    let map = delta_omega_map(&s_grid, &a_grid, omega_c)?;

    let mut rows = Vec::with_capacity(s_grid.len() * a_grid.len());
    for (s, row) in s_grid.iter().zip(&map) {
        for (a, d) in a_grid.iter().zip(row) {
            rows.push(vec![num(*a), num(*s), num(d * scale)]);
        }
    }

    let mut echo = echo_header("zeno-map");
    echo.push(("omega-c".into(), format!("{omega_c:e}")));
    if let Some(s) = omega_scale {
        echo.push(("omega-scale".into(), format!("{s:e}")));
    }
    echo.push(("a-grid".into(), a_desc));
    echo.push(("s-grid".into(), format!("linear {s_min:e}..{s_max:e} x {s_points}")));
    out.echo(&mut echo);
    let text = render_table(out.format, "zeno-map", &echo, &["A", "s", "delta_omega"], rows)?;
    emit(out.data_destination(&format!("zeno_map.{}", extension(out.format))).as_deref(), &text)
}

struct CheckRow {
    approach: Approach,
    tau: f64,
    tau_omega_c: f64,
    formula: f64,
    oracle: f64,
    rel_err: f64,
    drift: f64,
    pass: bool,
}

fn oracle_check(args: OracleCheckArgs) -> Result<()> {
    let mut file = ConfigFile::load(args.output.config.as_deref())?;
    let model_cfg = ModelConfig::resolve(args.model.clone(), &mut file)?;
    let omega_c = model_cfg.spectrum.cutoff();
    let cfg = OracleConfig::resolve(&args, &mut file, omega_c)?;
    let out = OutputConfig::resolve(args.output, &mut file, Format::Text)?;
    file.finish()?;
    let scale = out.frequency_scale(model_cfg.omega_scale)?;

    let spec = &model_cfg.spectrum;
    let model = AtomBathModel::reduced(spec.clone());
    let bath = discretize_bath(spec, cfg.modes, cfg.omega_max)?;

    let mut rows = Vec::new();
    let mut trajectory: Vec<Vec<String>> = Vec::new();
    for &approach in &cfg.approaches {
        for &x in &cfg.tau_omega_c {
            let tau = x / omega_c;
            let protocol = MeasurementProtocol::new(tau, cfg.measurements)?;
            let formula = decay_rate(&model, tau, approach)?.rate;
            let (oracle, drift) = match cfg.dt {
                Some(dt) => oracle_rate_with_step(&bath, approach, &protocol, dt)?,
                None => oracle_rate(&bath, approach, &protocol)?,
            };
            let rel_err = if formula == oracle { 0.0 } else { (oracle / formula - 1.0).abs() };
            rows.push(CheckRow {
                approach,
                tau,
                tau_omega_c: x,
                formula,
                oracle,
                rel_err,
                drift,
                pass: rel_err <= cfg.tolerance && drift < ORACLE_DRIFT_LIMIT,
            });
            if cfg.trajectory.is_some() {
                let (center, g) = bath.frame(approach);
                let dt = cfg.dt.unwrap_or_else(|| default_dt(&bath, center));
                let mut record = |p: &TrajectoryPoint| {
                    trajectory.push(vec![
                        approach.label().into(),
                        fmt_float(tau / scale),
                        fmt_float(p.t / scale),
                        fmt_float(p.excited_population),
                        fmt_float(p.norm),
                    ])
                };
                record(&TrajectoryPoint {
                    t: 0.0,
                    excited_population: 1.0,
                    norm: 1.0,
                });
                integrate_amplitudes(&bath, center, &g, AmplitudeState::excited(bath.len()), tau, dt, &mut record)?;
            }
        }
    }

    let passed = rows.iter().filter(|r| r.pass).count();
    let all_pass = passed == rows.len();
    let diagnostics = discretization_diagnostics(&model, &bath, &cfg)?;

    let mut echo = echo_header("oracle-check");
    model_cfg.echo(&mut echo);
    cfg.echo(&mut echo);
    out.echo(&mut echo);

    if let Some(path) = &cfg.trajectory {
        let text = csv_table(
            &echo,
            &["approach", "tau", "t", "excited_population", "norm"],
            &trajectory,
        )?;
        emit(Some(path.as_path()), &text)?;
    }

    let verdict = format!(
        "{} ({passed}/{} within {}%, drift < {ORACLE_DRIFT_LIMIT:e})",
        if all_pass { "PASS" } else { "FAIL" },
        rows.len(),
        cfg.tolerance * 100.0
    );
    let text = match out.format {
        Format::Text => oracle_text(&rows, scale, &diagnostics, &verdict, all_pass),
        Format::Json => {
            let table: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "approach": r.approach.label(),
                        "tau": num(r.tau / scale),
                        "tau_omega_c": num(r.tau_omega_c),
                        "R_formula": num(r.formula * scale),
                        "R_oracle": num(r.oracle * scale),
                        "rel_err": num(r.rel_err),
                        "drift": num(r.drift),
                        "pass": r.pass,
                    })
                })
                .collect();
            let diag: Map<String, Value> = diagnostics.iter().map(|(k, v)| (k.to_string(), num(*v))).collect();
            json_document(
                "oracle-check",
                &echo,
                "report",
                json!({ "rows": table, "diagnostics": diag, "pass": all_pass }),
            )
        }
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.approach.label().into(),
                        fmt_float(r.tau / scale),
                        fmt_float(r.tau_omega_c),
                        fmt_float(r.formula * scale),
                        fmt_float(r.oracle * scale),
                        fmt_float(r.rel_err),
                        fmt_float(r.drift),
                        if r.pass { "PASS" } else { "FAIL" }.into(),
                    ]
                })
                .collect();
            csv_table(
                &echo,
                &["approach", "tau", "tau_omega_c", "R_formula", "R_oracle", "rel_err", "drift", "result"],
                &cells,
            )?
        }
    };
    emit(out.report_destination().as_deref(), &text)?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError::CheckFailed(verdict))
    }
}

/// How well the discrete bath resolves the spectrum and the kernel.
fn discretization_diagnostics(
    model: &AtomBathModel,
    bath: &zeno_core::DiscretizedBath,
    cfg: &OracleConfig,
) -> Result<Vec<(&'static str, f64)>> {
    let spacing = bath.omega_max() / bath.len() as f64;
    let omega_c = model.spectrum().cutoff();
    let narrowest = cfg.tau_omega_c.iter().copied().fold(0.0, f64::max) / omega_c;
    let exact = model.omega1()? - 1.0;
    let discrete = bath.omega1() - 1.0;
    let shift_err = if exact == discrete { 0.0 } else { (discrete / exact - 1.0).abs() };
    Ok(vec![
        ("mode_spacing", spacing),
        ("modes_per_kernel_width", 2.0 * PI / narrowest / spacing),
        ("modes_below_cutoff", omega_c / spacing),
        ("shift_I_rel_err", shift_err),
    ])
}

fn oracle_text(rows: &[CheckRow], scale: f64, diagnostics: &[(&str, f64)], verdict: &str, all_pass: bool) -> String {
    let mut s = format!(
        "{:<8} {:>10} {:>12} {:>12} {:>12} {:>10} {:>10}  result\n",
        "approach", "tau*wc", "tau", "R_formula", "R_oracle", "rel_err", "drift"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<8} {:>10.4} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.2e} {:>10.2e}  {}\n",
            r.approach.label(),
            r.tau_omega_c,
            r.tau / scale,
            r.formula * scale,
            r.oracle * scale,
            r.rel_err,
            r.drift,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    s.push('\n');
    let pairs: Vec<(String, String)> = diagnostics.iter().map(|(k, v)| (k.to_string(), format!("{v:.4e}"))).collect();
    if !all_pass {
        s.push_str("discretization diagnostic:\n");
    }
    s.push_str(&key_value_text(&pairs));
    s.push_str(&format!("oracle-check: {verdict}\n"));
    s
}
