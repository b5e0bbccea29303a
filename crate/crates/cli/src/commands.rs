use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use vacpair_core::plot::{render_plot, PlotStyle};
use vacpair_core::recipe::Recipe;
use vacpair_core::riccati::{linear_grid, number_density, solve_mode};
use vacpair_core::scan::{distribution, method_spectrum, sweep_delay, SweepSpec, Template};
use vacpair_core::semiclassical::{dominant_turning_points, find_turning_points, pair_integrals};
use vacpair_core::table::format_float;
use vacpair_core::{
    field, FieldConfig, Gauge, Method, MomentumPoint, QuadratureSettings, SolverSettings, SpectrumTable, Tolerances,
};

use crate::{
    Command, Common, CompareArgs, ConstructorArg, DensityArgs, Failure, GridArgs, MakeConfigArgs, RecipeArgs, RenderArgs,
    SpectrumArgs, SweepArgs, TurningArgs, ValidateArgs,
};

type Outcome = Result<(), Failure>;

pub(crate) fn run(command: Command) -> Outcome {
    match command {
        Command::Spectrum(a) => spectrum(a),
        Command::Density(a) => density(a),
        Command::SweepDelay(a) => sweep(a),
        Command::TurningPoints(a) => turning_points(a),
        Command::Compare(a) => compare(a),
        Command::Validate(a) => validate(a),
        Command::Render(a) => render(a),
        Command::Recipe(a) => recipe(a),
        Command::MakeConfig(a) => make_config(a),
    }
}

fn parse_gauge(text: &str) -> Result<Gauge, Failure> {
    if let Ok(g) = text.parse::<f64>() {
        return Ok(Gauge::Constant(g));
    }
    serde_json::from_value(serde_json::Value::String(text.into()))
        .map_err(|_| Failure::Usage(format!("unknown gauge '{text}'; use a number, paper_2pulse or vanish_at_minus_infinity")))
}

fn load_config(common: &Common) -> Result<FieldConfig, Failure> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Failure::Usage("--config <file> is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = FieldConfig::from_json(&text)?;
    if let Some(g) = &common.gauge {
        cfg = cfg.with_gauge(parse_gauge(g)?);
    }
    Ok(cfg)
}

fn tolerances(common: &Common) -> Tolerances {
    let d = Tolerances::default();
    Tolerances::new(common.rel_tol.unwrap_or(d.rel_tol), common.abs_tol.unwrap_or(d.abs_tol))
}

fn grid(g: &GridArgs) -> Result<Vec<MomentumPoint>, Failure> {
    Ok(linear_grid(g.kpar_min, g.kpar_max, g.kpar_steps, g.kperp)?)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn to_json(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

fn maybe_plot(path: Option<&Path>, tables: &[SpectrumTable], log_y: bool, title: &str) -> Outcome {
    if let Some(path) = path {
        let style = PlotStyle {
            title: title.into(),
            log_y,
            ..PlotStyle::default()
        };
        emit(Some(path), &render_plot(tables, &style)?)?;
    }
    Ok(())
}

fn spectrum(a: SpectrumArgs) -> Outcome {
    let cfg = load_config(&a.common)?;
    let s = SolverSettings::for_config(&cfg, tolerances(&a.common))?;
    let table = method_spectrum(&cfg, &grid(&a.grid)?, a.method.into(), &s)?;
    emit(a.common.out.as_deref(), &table.to_csv_string())?;
    maybe_plot(a.plot.as_deref(), &[table], a.log_y, &cfg.label)
}

#[derive(Serialize)]
struct DensityOutput<'a> {
    config: &'a str,
    #[serde(flatten)]
    report: vacpair_core::DensityReport,
}

fn density(a: DensityArgs) -> Outcome {
    if Method::from(a.method) != Method::Riccati {
        return Err(Failure::Usage("density is only available with --method riccati".into()));
    }
    let cfg = load_config(&a.common)?;
    let s = SolverSettings::for_config(&cfg, tolerances(&a.common))?;
    let quad = QuadratureSettings {
        eps_tail: a.eps_tail,
        ..QuadratureSettings::new(a.kpar_min, a.kpar_max, a.kpar_steps, a.kperp_max, a.kperp_steps)
    };
    let report = number_density(&cfg, &quad, &s)?;
    emit(
        a.common.out.as_deref(),
        &to_json(&DensityOutput {
            config: &cfg.label,
            report,
        }),
    )
}

fn sweep(a: SweepArgs) -> Outcome {
    if a.common.config.is_some() {
        return Err(Failure::Usage("sweep-delay takes its field from --spec, not --config".into()));
    }
    let text = fs::read_to_string(&a.spec).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", a.spec.display())))?;
    let mut spec: SweepSpec = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("bad sweep spec: {e}")))?;
    if let Some(m) = a.method {
        spec.method = m.into();
    }
    if let Some(g) = &a.common.gauge {
        spec.gauge = Some(parse_gauge(g)?);
    }
    let tol = tolerances(&a.common);
    let table = sweep_delay(&spec, &|cfg| SolverSettings::for_config(cfg, tol))?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    emit(a.common.out.as_deref(), &String::from_utf8(csv).expect("csv is utf-8"))?;
    let failed = table.failures();
    if failed == table.rows.len() {
        return Err(Failure::Physics(format!("all {failed} sweep rows failed")));
    }
    if failed > 0 {
        eprintln!("warning: {failed} of {} sweep rows failed; see the status column", table.rows.len());
    }
    Ok(())
}

fn turning_points(a: TurningArgs) -> Outcome {
    let cfg = load_config(&a.common)?;
    let mut text = String::from("k_parallel,re_t,im_t,residual,vartheta\n");
    for k in grid(&a.grid)? {
        let points = if a.dominant {
            dominant_turning_points(&cfg, k, None)?
        } else {
            find_turning_points(&cfg, k, None)?
                .into_iter()
                .map(|tp| pair_integrals(&cfg, k, &tp).map(|p| (tp, p)))
                .collect::<Result<Vec<_>, _>>()?
        };
        for (tp, p) in points {
            let cells = [k.k_parallel, tp.t.re, tp.t.im, tp.residual, p.vartheta].map(format_float);
            text.push_str(&cells.join(","));
            text.push('\n');
        }
    }
    emit(a.common.out.as_deref(), &text)
}

fn compare(a: CompareArgs) -> Outcome {
    if a.methods.is_empty() {
        return Err(Failure::Usage("--methods needs at least one method".into()));
    }
    let cfg = load_config(&a.common)?;
    let s = SolverSettings::for_config(&cfg, tolerances(&a.common))?;
    let points = grid(&a.grid)?;
    let tables = a
        .methods
        .iter()
        .map(|&m| method_spectrum(&cfg, &points, m.into(), &s))
        .collect::<Result<Vec<_>, _>>()?;
    let merged = SpectrumTable::interleave(&tables)?;
    emit(a.common.out.as_deref(), &merged.to_csv_string())?;

    let reference = Method::from(a.method.unwrap_or(a.methods[0]));
    if let Some(base) = tables.iter().find(|t| t.methods() == [reference]) {
        let scale = base.values().into_iter().fold(0.0, f64::max);
        for t in &tables {
            let dev = t.values().iter().zip(base.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            eprintln!("{}: max |f - f_{}| / max f_{} = {:.3e}", t.methods()[0], reference, reference, dev / scale);
        }
    }
    maybe_plot(a.plot.as_deref(), &tables, a.log_y, &cfg.label)
}

#[derive(Serialize)]
struct ValidationPoint {
    k_parallel: f64,
    k_perp: f64,
    riccati: f64,
    other: f64,
    rel_diff: f64,
    pass: bool,
}

#[derive(Serialize)]
struct ValidationCase {
    config: String,
    max_rel_diff: f64,
    pass: bool,
    points: Vec<ValidationPoint>,
}

#[derive(Serialize)]
struct ValidationReport {
    method: Method,
    tolerance: f64,
    pass: bool,
    cases: Vec<ValidationCase>,
}

fn builtin_suite() -> Result<Vec<FieldConfig>, Failure> {
    use vacpair_core::{GaugeKeyword, SignMode};
    Ok(vec![
        field::make_single_pulse(0.1, 0.05)?.with_gauge(Gauge::Constant(0.0)),
        field::make_pulse_train(2, SignMode::Alternating, 0.1, 0.05, 180.32)?.with_gauge(Gauge::Named(GaugeKeyword::Paper2pulse)),
    ])
}

fn validate(a: ValidateArgs) -> Outcome {
    let method = Method::from(a.method);
    if method == Method::Riccati {
        return Err(Failure::Usage("validate compares riccati with another method".into()));
    }
    let configs = if a.common.config.is_some() { vec![load_config(&a.common)?] } else { builtin_suite()? };
    let points = linear_grid(a.kpar_min, a.kpar_max, a.kpar_steps, a.kperp)?;
    let mut cases = Vec::new();
    for cfg in configs {
        let s = SolverSettings::for_config(&cfg, tolerances(&a.common))?;
        let mut rows = Vec::new();
        for &k in &points {
            let exact = solve_mode(&cfg, k, &s)?.f;
            let other = distribution(&cfg, k, method, &s)?;
            let rel_diff = if exact == other { 0.0 } else { (other - exact).abs() / exact.abs() };
            rows.push(ValidationPoint {
                k_parallel: k.k_parallel,
                k_perp: k.k_perp,
                riccati: exact,
                other,
                rel_diff,
                pass: rel_diff < a.tolerance && other >= 0.0,
            });
        }
        let max_rel_diff = rows.iter().map(|r| r.rel_diff).fold(0.0, f64::max);
        cases.push(ValidationCase {
            config: cfg.label.clone(),
            max_rel_diff,
            pass: rows.iter().all(|r| r.pass),
            points: rows,
        });
    }
    let report = ValidationReport {
        method,
        tolerance: a.tolerance,
        pass: cases.iter().all(|c| c.pass),
        cases,
    };
    emit(a.common.out.as_deref(), &to_json(&report))?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Physics(format!("{method} disagrees with riccati beyond {:e}", a.tolerance)))
    }
}

fn render(a: RenderArgs) -> Outcome {
    let mut tables = Vec::new();
    for path in &a.inputs {
        let table = SpectrumTable::read_csv_path(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        if table.is_empty() {
            return Err(Failure::Usage(format!("{} has no rows", path.display())));
        }
        tables.extend(table.methods().into_iter().map(|m| table.only(m)));
    }
    let style = PlotStyle {
        title: a.title,
        x_label: a.x_label,
        y_label: a.y_label,
        log_y: a.log_y,
        ..PlotStyle::default()
    };
    emit(a.out.as_deref(), &render_plot(&tables, &style)?)
}

fn recipe(a: RecipeArgs) -> Outcome {
    let recipe = Recipe::from_path(&a.recipe).map_err(|e| Failure::Usage(format!("{}: {e}", a.recipe.display())))?;
    let output = recipe.run()?;
    fs::create_dir_all(&a.out_dir)?;
    let csv_path = a.out_dir.join(format!("{}.csv", recipe.name));
    emit(Some(&csv_path), &output.csv)?;
    eprintln!("wrote {}", csv_path.display());
    if let Some(svg) = output.svg {
        let svg_path = a.out_dir.join(format!("{}.svg", recipe.name));
        emit(Some(&svg_path), &svg)?;
        eprintln!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn make_config(a: MakeConfigArgs) -> Outcome {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for this constructor")));
    let template = match a.constructor {
        ConstructorArg::SinglePulse => Template::SinglePulse {
            amplitude: need(a.amplitude, "amplitude")?,
            inverse_width: need(a.inverse_width, "inverse-width")?,
        },
        ConstructorArg::EqualSignAssist | ConstructorArg::AlternatingAssist => {
            let (e1, w1, e2, w2) = (need(a.e1, "e1")?, need(a.w1, "w1")?, need(a.e2, "e2")?, need(a.w2, "w2")?);
            if a.constructor == ConstructorArg::EqualSignAssist {
                Template::EqualSignAssist { e1, w1, e2, w2, delay: a.delay }
            } else {
                Template::AlternatingAssist { e1, w1, e2, w2, delay: a.delay }
            }
        }
        ConstructorArg::PulseTrain => Template::PulseTrain {
            n: a.n.ok_or_else(|| Failure::Usage("--n is required for pulse-train".into()))?,
            sign_mode: a
                .sign_mode
                .ok_or_else(|| Failure::Usage("--sign-mode is required for pulse-train".into()))?
                .into(),
            amplitude: need(a.amplitude, "amplitude")?,
            inverse_width: need(a.inverse_width, "inverse-width")?,
            delay: a.delay,
        },
    };
    let gauge = a.gauge.as_deref().map(parse_gauge).transpose()?;
    let mut text = template.build(gauge)?.to_json();
    text.push('\n');
    emit(a.out.as_deref(), &text)
}
