//! Grid evaluation of the scattering observables: JSON-configurable sweeps
//! over wavenumber, detuning, or b-channel coupling, figure presets, CSV and
//! JSON emission, and a named-invariant self-check battery.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bound_states::{
    bound_state_closed_form, bound_state_numeric, feshbach_detuning,
};
use crate::error::Error;
use crate::scattering::{
    fano_profile, find_resonances, scatter_linear, scatter_quadratic, scatter_quadratic_by_k,
    LimitKind,
};
use crate::self_energy::{sigma, sigma_integral_oracle, SelfEnergyInput};
use crate::waveguide::{
    cutoff_wavenumber, exact_dispersion, quadratic_expand, ChannelPair, CurvatureForm, Direction,
    ModeIndex, QuadraticDispersion, WaveguideGeometry,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    K,
    Detuning,
    GammaB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Uniform closed grid: `count` points from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Named model parameters; everything is optional and falls back to the
/// reference set ω0 = 1, δ = 0.8, v_a1 = 1, γ_a = 0.01, γ_b = 0.05. The
/// quadratic channel pair comes either from `delta` (and `v_a1`) or from the
/// explicit trio `v_a2`, `v_b1`, `v_b2` — never both. `detuning` fixes the
/// evaluation point of gamma_b-axis sweeps; `q` and `d` feed the Fano column.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub omega0: Option<f64>,
    pub delta: Option<f64>,
    pub v_a1: Option<f64>,
    pub v_a2: Option<f64>,
    pub v_b1: Option<f64>,
    pub v_b2: Option<f64>,
    pub gamma_a: Option<f64>,
    pub gamma_b: Option<f64>,
    pub detuning: Option<f64>,
    pub q: Option<f64>,
    pub d: Option<f64>,
    pub curvature: Option<CurvatureForm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: Model,
    pub axis: Axis,
    pub range: Range,
    #[serde(default)]
    pub parameters: Params,
    /// Column selection; `None` picks a default set for the model/axis.
    #[serde(default)]
    pub outputs: Option<Vec<Column>>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Emittable columns. The `limit_flag` column is not listed here: it is
/// always appended last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Column {
    #[serde(rename = "k")]
    K,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "re_r")]
    ReR,
    #[serde(rename = "im_r")]
    ImR,
    #[serde(rename = "R")]
    Reflection,
    #[serde(rename = "T")]
    Transmission,
    #[serde(rename = "P_loss")]
    Loss,
    #[serde(rename = "gamma_b")]
    GammaB,
    #[serde(rename = "delta_f")]
    DeltaF,
    #[serde(rename = "fano_f")]
    FanoF,
}

impl Column {
    pub fn header(&self) -> &'static str {
        match self {
            Column::K => "k",
            Column::Delta => "delta",
            Column::ReR => "re_r",
            Column::ImR => "im_r",
            Column::Reflection => "R",
            Column::Transmission => "T",
            Column::Loss => "P_loss",
            Column::GammaB => "gamma_b",
            Column::DeltaF => "delta_f",
            Column::FanoF => "fano_f",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFlag {
    Ok,
    BandMin,
    BranchWindow,
    BelowBand,
}

impl RowFlag {
    pub fn label(&self) -> &'static str {
        match self {
            RowFlag::Ok => "ok",
            RowFlag::BandMin => "band_min",
            RowFlag::BranchWindow => "branch_window",
            RowFlag::BelowBand => "below_band",
        }
    }
}

/// One grid point: a cell per selected column (`None` renders as an empty
/// CSV cell, e.g. the observables of a below-band row) plus the limit flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cells: Vec<Option<f64>>,
    pub flag: RowFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: Model,
    pub axis: Axis,
    pub columns: Vec<Column>,
    /// Resolved parameter echo, name → value.
    pub params: BTreeMap<String, f64>,
    /// Located landmarks (band minima, resonance positions) when defined.
    pub annotations: BTreeMap<String, f64>,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepError {
    /// The configuration itself is unusable; names the offending field.
    Config { field: String, reason: String },
    /// A model evaluation failed.
    Core(Error),
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepError::Config { field, reason } => {
                write!(f, "config error in `{field}`: {reason}")
            }
            SweepError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SweepError {}

impl From<Error> for SweepError {
    fn from(e: Error) -> Self {
        SweepError::Core(e)
    }
}

fn config_err(field: &str, reason: impl Into<String>) -> SweepError {
    SweepError::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

pub fn parse_config(text: &str) -> Result<SweepConfig, SweepError> {
    serde_json::from_str(text).map_err(|e| config_err("config", e.to_string()))
}

fn default_columns(model: Model, axis: Axis) -> Vec<Column> {
    match (model, axis) {
        (Model::Quadratic, Axis::GammaB) => vec![Column::GammaB, Column::DeltaF],
        (Model::Linear, Axis::GammaB) => vec![
            Column::GammaB,
            Column::Reflection,
            Column::Transmission,
            Column::Loss,
        ],
        (Model::Quadratic, Axis::K) => vec![
            Column::K,
            Column::Delta,
            Column::Reflection,
            Column::Transmission,
            Column::Loss,
        ],
        _ => vec![
            Column::Delta,
            Column::Reflection,
            Column::Transmission,
            Column::Loss,
        ],
    }
}

/// Builds the quadratic channel pair a parameter set describes, with the
/// same defaults and the same delta-versus-explicit-trio exclusivity rule
/// the sweep applies.
pub fn resolve_pair(p: &Params) -> Result<ChannelPair, SweepError> {
    let probe = SweepConfig {
        model: Model::Quadratic,
        axis: Axis::Detuning,
        range: Range {
            start: 0.0,
            stop: 1.0,
            count: 2,
        },
        parameters: *p,
        outputs: None,
        format: OutputFormat::Csv,
    };
    Ok(resolve(&probe)?.pair.expect("quadratic resolution always yields a pair"))
}

/// Effective parameter values after defaults.
struct Resolved {
    omega0: f64,
    delta: Option<f64>,
    gamma_a: f64,
    gamma_b: f64,
    detuning: f64,
    q: f64,
    d: f64,
    pair: Option<ChannelPair>,
}

fn resolve(config: &SweepConfig) -> Result<Resolved, SweepError> {
    let p = &config.parameters;
    for (name, v) in [
        ("omega0", p.omega0),
        ("delta", p.delta),
        ("v_a1", p.v_a1),
        ("v_a2", p.v_a2),
        ("v_b1", p.v_b1),
        ("v_b2", p.v_b2),
        ("gamma_a", p.gamma_a),
        ("gamma_b", p.gamma_b),
        ("detuning", p.detuning),
        ("q", p.q),
        ("d", p.d),
    ] {
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(config_err(name, format!("must be finite, got {x}")));
            }
        }
    }
    let omega0 = p.omega0.unwrap_or(1.0);
    let gamma_a = p.gamma_a.unwrap_or(0.01);
    let gamma_b = p.gamma_b.unwrap_or(0.05);
    let v_a1 = p.v_a1.unwrap_or(1.0);
    let mut resolved = Resolved {
        omega0,
        delta: None,
        gamma_a,
        gamma_b,
        detuning: p.detuning.unwrap_or(0.0),
        q: p.q.unwrap_or(1e-4),
        d: p.d.unwrap_or(1e-3),
        pair: None,
    };
    if config.model == Model::Quadratic {
        let explicit = [p.v_a2, p.v_b1, p.v_b2];
        let n_explicit = explicit.iter().filter(|v| v.is_some()).count();
        let pair = match n_explicit {
            0 => {
                let delta = p.delta.unwrap_or(0.8);
                resolved.delta = Some(delta);
                ChannelPair::from_delta(
                    omega0,
                    delta,
                    v_a1,
                    gamma_a,
                    gamma_b,
                    p.curvature.unwrap_or_default(),
                )?
            }
            3 => {
                if p.delta.is_some() {
                    return Err(config_err(
                        "delta",
                        "give either delta or the explicit v_a2/v_b1/v_b2 trio, not both",
                    ));
                }
                let a = QuadraticDispersion::new(omega0, v_a1, p.v_a2.unwrap())?;
                let b = QuadraticDispersion::new(omega0, p.v_b1.unwrap(), p.v_b2.unwrap())?;
                ChannelPair::new(a, b, gamma_a, gamma_b)?
            }
            _ => {
                return Err(config_err(
                    "parameters",
                    "v_a2, v_b1, v_b2 must be given together",
                ))
            }
        };
        resolved.pair = Some(pair);
    }
    Ok(resolved)
}

fn validate(config: &SweepConfig, resolved: &Resolved) -> Result<Vec<Column>, SweepError> {
    let r = &config.range;
    if !(r.start.is_finite() && r.stop.is_finite()) {
        return Err(config_err("range", "start and stop must be finite"));
    }
    if r.start >= r.stop {
        return Err(config_err(
            "range",
            format!("start must be strictly below stop, got [{}, {}]", r.start, r.stop),
        ));
    }
    if r.count < 2 {
        return Err(config_err(
            "range",
            format!("count must be at least 2, got {}", r.count),
        ));
    }
    if config.model == Model::Linear && config.axis == Axis::K {
        return Err(config_err(
            "axis",
            "the linear model resolves no wavenumber; sweep detuning or gamma_b",
        ));
    }
    if config.axis == Axis::GammaB && r.start < 0.0 {
        return Err(config_err("range", "gamma_b cannot be negative"));
    }
    let columns = config
        .outputs
        .clone()
        .unwrap_or_else(|| default_columns(config.model, config.axis));
    if columns.is_empty() {
        return Err(config_err("outputs", "at least one column is required"));
    }
    if config.model == Model::Linear {
        for c in &columns {
            if matches!(c, Column::K | Column::DeltaF | Column::FanoF) {
                return Err(config_err(
                    "outputs",
                    format!("column {} is undefined in the linear model", c.header()),
                ));
            }
        }
    }
    if columns.contains(&Column::FanoF) && resolved.d == 0.0 {
        return Err(config_err("d", "the fano_f column needs a nonzero width d"));
    }
    if config.model == Model::Quadratic && config.axis == Axis::GammaB {
        let pair = resolved.pair.as_ref().unwrap();
        if resolved.detuning < pair.delta_min() {
            return Err(config_err(
                "detuning",
                format!(
                    "evaluation detuning {} lies below the band minimum {}",
                    resolved.detuning,
                    pair.delta_min()
                ),
            ));
        }
    }
    Ok(columns)
}

fn grid(range: &Range) -> Vec<f64> {
    let step = (range.stop - range.start) / (range.count - 1) as f64;
    (0..range.count)
        .map(|i| {
            if i + 1 == range.count {
                range.stop
            } else {
                range.start + step * i as f64
            }
        })
        .collect()
}

struct RowObs {
    k: Option<f64>,
    delta: Option<f64>,
    re_r: Option<f64>,
    im_r: Option<f64>,
    reflection: Option<f64>,
    transmission: Option<f64>,
    loss: Option<f64>,
    gamma_b: Option<f64>,
    delta_f: Option<f64>,
    fano: Option<f64>,
    flag: RowFlag,
}

impl RowObs {
    fn project(&self, columns: &[Column]) -> SweepRow {
        let cells = columns
            .iter()
            .map(|c| match c {
                Column::K => self.k,
                Column::Delta => self.delta,
                Column::ReR => self.re_r,
                Column::ImR => self.im_r,
                Column::Reflection => self.reflection,
                Column::Transmission => self.transmission,
                Column::Loss => self.loss,
                Column::GammaB => self.gamma_b,
                Column::DeltaF => self.delta_f,
                Column::FanoF => self.fano,
            })
            .collect();
        SweepRow {
            cells,
            flag: self.flag,
        }
    }
}

fn flag_of(limit: Option<LimitKind>) -> RowFlag {
    match limit {
        None => RowFlag::Ok,
        Some(LimitKind::BandMinimum) => RowFlag::BandMin,
        Some(LimitKind::BranchWindow) => RowFlag::BranchWindow,
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult, SweepError> {
    let resolved = resolve(config)?;
    let columns = validate(config, &resolved)?;
    let want_fano = columns.contains(&Column::FanoF);

    let mut params = BTreeMap::new();
    params.insert("gamma_a".into(), resolved.gamma_a);
    if config.axis != Axis::GammaB {
        params.insert("gamma_b".into(), resolved.gamma_b);
    } else {
        params.insert("detuning".into(), resolved.detuning);
    }
    let mut annotations = BTreeMap::new();

    let mut rows = Vec::with_capacity(config.range.count);
    match config.model {
        Model::Linear => {
            for x in grid(&config.range) {
                let point = match config.axis {
                    Axis::Detuning => scatter_linear(resolved.gamma_a, resolved.gamma_b, x)?,
                    Axis::GammaB => scatter_linear(resolved.gamma_a, x, resolved.detuning)?,
                    Axis::K => unreachable!("rejected by validate"),
                };
                let gamma_b_row = if config.axis == Axis::GammaB {
                    x
                } else {
                    resolved.gamma_b
                };
                let obs = RowObs {
                    k: None,
                    delta: Some(point.delta),
                    re_r: Some(point.r.re),
                    im_r: Some(point.r.im),
                    reflection: Some(point.reflection),
                    transmission: Some(point.transmission),
                    loss: Some(point.loss),
                    gamma_b: Some(gamma_b_row),
                    delta_f: None,
                    fano: None,
                    flag: RowFlag::Ok,
                };
                rows.push(obs.project(&columns));
            }
        }
        Model::Quadratic => {
            let pair = resolved.pair.unwrap();
            params.insert("omega0".into(), resolved.omega0);
            params.insert("v_a1".into(), pair.a().v1());
            params.insert("v_a2".into(), pair.a().v2());
            params.insert("v_b1".into(), pair.b().v1());
            params.insert("v_b2".into(), pair.b().v2());
            if let Some(delta) = resolved.delta {
                params.insert("delta".into(), delta);
            }
            if want_fano {
                params.insert("q".into(), resolved.q);
                params.insert("d".into(), resolved.d);
            }

            let res = find_resonances(&pair);
            annotations.insert("delta_min".into(), res.delta_min);
            annotations.insert("delta_max_f".into(), res.delta_max_f);
            annotations.insert("k_c".into(), res.k_c);
            if config.axis != Axis::GammaB {
                if let Some(df) = res.delta_f {
                    annotations.insert("delta_f".into(), df);
                }
                if let Some((k1, k2)) = res.k_f {
                    annotations.insert("k_f_1".into(), k1);
                    annotations.insert("k_f_2".into(), k2);
                }
                for (i, k) in res.k_res.iter().enumerate() {
                    annotations.insert(format!("k_res_{}", i + 1), *k);
                }
            }
            let shared_delta_f = res.delta_f;

            for x in grid(&config.range) {
                let obs = match config.axis {
                    Axis::K => {
                        let point = scatter_quadratic_by_k(&pair, x)?;
                        quad_obs(point, resolved.gamma_b, shared_delta_f, want_fano, &resolved)
                    }
                    Axis::Detuning => {
                        if x < pair.delta_min() {
                            RowObs {
                                k: None,
                                delta: Some(x),
                                re_r: None,
                                im_r: None,
                                reflection: None,
                                transmission: None,
                                loss: None,
                                gamma_b: Some(resolved.gamma_b),
                                delta_f: shared_delta_f,
                                fano: None,
                                flag: RowFlag::BelowBand,
                            }
                        } else {
                            let point = scatter_quadratic(&pair, x)?;
                            quad_obs(point, resolved.gamma_b, shared_delta_f, want_fano, &resolved)
                        }
                    }
                    Axis::GammaB => {
                        let pair_row = pair.with_gamma_b(x)?;
                        let point = scatter_quadratic(&pair_row, resolved.detuning)?;
                        let df = feshbach_detuning(&pair_row).ok();
                        quad_obs(point, x, df, want_fano, &resolved)
                    }
                };
                rows.push(obs.project(&columns));
            }
        }
    }

    Ok(SweepResult {
        model: config.model,
        axis: config.axis,
        columns,
        params,
        annotations,
        rows,
    })
}

fn quad_obs(
    point: crate::scattering::ScatteringPoint,
    gamma_b_row: f64,
    delta_f: Option<f64>,
    want_fano: bool,
    resolved: &Resolved,
) -> RowObs {
    let fano = if want_fano {
        delta_f.and_then(|df| fano_profile(point.delta, df, resolved.q, resolved.d).ok())
    } else {
        None
    };
    RowObs {
        k: point.k,
        delta: Some(point.delta),
        re_r: Some(point.r.re),
        im_r: Some(point.r.im),
        reflection: Some(point.reflection),
        transmission: Some(point.transmission),
        loss: Some(point.loss),
        gamma_b: Some(gamma_b_row),
        delta_f,
        fano,
        flag: flag_of(point.limit),
    }
}

impl SweepResult {
    fn model_name(&self) -> &'static str {
        match self.model {
            Model::Linear => "linear",
            Model::Quadratic => "quadratic",
        }
    }

    fn axis_name(&self) -> &'static str {
        match self.axis {
            Axis::K => "k",
            Axis::Detuning => "detuning",
            Axis::GammaB => "gamma_b",
        }
    }

    /// Deterministic CSV: `# key=value` header (parameters, then located
    /// landmarks), one header row, then one line per grid point with full
    /// double precision and the limit flag last.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# model={}\n", self.model_name()));
        out.push_str(&format!("# axis={}\n", self.axis_name()));
        for (k, v) in &self.params {
            out.push_str(&format!("# {k}={v:.16e}\n"));
        }
        for (k, v) in &self.annotations {
            out.push_str(&format!("# {k}={v:.16e}\n"));
        }
        let mut header: Vec<&str> = self.columns.iter().map(|c| c.header()).collect();
        header.push("limit_flag");
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut line = String::new();
            for cell in &row.cells {
                if let Some(v) = cell {
                    line.push_str(&format!("{v:.16e}"));
                }
                line.push(',');
            }
            line.push_str(row.flag.label());
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// JSON form; re-reading it reproduces the result exactly.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep results hold only finite numbers")
    }

    pub fn from_json(text: &str) -> Result<Self, SweepError> {
        serde_json::from_str(text).map_err(|e| config_err("result", e.to_string()))
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Named figure configurations. Parameters follow the figure captions; where
/// a caption leaves γ_b open, the preset bakes the value the companion
/// curves use (0.05 for the quadratic figures, width-matched values for the
/// Fano overlays).
pub fn preset(name: &str) -> Result<SweepConfig, SweepError> {
    let base = Params {
        gamma_a: Some(0.01),
        ..Params::default()
    };
    let quad_k = |gamma_b: f64| SweepConfig {
        model: Model::Quadratic,
        axis: Axis::K,
        range: Range {
            start: -4.5,
            stop: 0.6,
            count: 2000,
        },
        parameters: Params {
            gamma_b: Some(gamma_b),
            delta: Some(0.8),
            v_a1: Some(1.0),
            omega0: Some(1.0),
            ..base
        },
        outputs: Some(vec![
            Column::K,
            Column::Delta,
            Column::Reflection,
            Column::Transmission,
            Column::Loss,
        ]),
        format: OutputFormat::Csv,
    };
    let fano = |gamma_b: f64, d: f64| -> Result<SweepConfig, SweepError> {
        let pair =
            ChannelPair::from_delta(1.0, 0.8, 1.0, 0.01, gamma_b, CurvatureForm::Exact)?;
        let df = feshbach_detuning(&pair)?;
        Ok(SweepConfig {
            model: Model::Quadratic,
            axis: Axis::Detuning,
            range: Range {
                start: df - 5.0 * d,
                stop: df + 5.0 * d,
                count: 2001,
            },
            parameters: Params {
                gamma_b: Some(gamma_b),
                delta: Some(0.8),
                v_a1: Some(1.0),
                omega0: Some(1.0),
                q: Some(1e-4),
                d: Some(d),
                ..base
            },
            outputs: Some(vec![Column::Delta, Column::Transmission, Column::FanoF]),
            format: OutputFormat::Csv,
        })
    };
    match name {
        "fig2a" => Ok(SweepConfig {
            model: Model::Linear,
            axis: Axis::Detuning,
            range: Range {
                start: -0.1,
                stop: 0.1,
                count: 1001,
            },
            parameters: Params {
                gamma_b: Some(0.01),
                ..base
            },
            outputs: Some(vec![
                Column::Delta,
                Column::Reflection,
                Column::Transmission,
                Column::Loss,
            ]),
            format: OutputFormat::Csv,
        }),
        "fig2b" => Ok(SweepConfig {
            model: Model::Linear,
            axis: Axis::GammaB,
            range: Range {
                start: 0.0,
                stop: 0.1,
                count: 1001,
            },
            parameters: Params {
                detuning: Some(0.0),
                ..base
            },
            outputs: Some(vec![
                Column::GammaB,
                Column::Reflection,
                Column::Transmission,
                Column::Loss,
            ]),
            format: OutputFormat::Csv,
        }),
        "fig3a" => Ok(quad_k(0.0)),
        "fig3b" => Ok(quad_k(0.05)),
        "fig3c" => Ok(quad_k(0.15)),
        "fig4a" | "fig4b" => {
            let mut cfg = quad_k(0.05);
            cfg.axis = Axis::Detuning;
            cfg.range = Range {
                start: -0.8888888888888888,
                stop: 0.5,
                count: 2001,
            };
            cfg.outputs = Some(if name == "fig4a" {
                vec![Column::Delta, Column::Transmission]
            } else {
                vec![Column::Delta, Column::Loss]
            });
            Ok(cfg)
        }
        "fig5" => Ok(SweepConfig {
            model: Model::Quadratic,
            axis: Axis::GammaB,
            range: Range {
                start: 0.005,
                stop: 0.2,
                count: 200,
            },
            parameters: Params {
                delta: Some(0.8),
                v_a1: Some(1.0),
                omega0: Some(1.0),
                detuning: Some(0.0),
                ..base
            },
            outputs: Some(vec![Column::GammaB, Column::DeltaF]),
            format: OutputFormat::Csv,
        }),
        "fig6a" => fano(0.04580541244261782, 1e-3),
        "fig6b" => fano(0.11372870414327747, 10f64.powf(-2.5)),
        other => Err(config_err(
            "preset",
            format!(
                "unknown preset `{other}`; expected one of fig2a, fig2b, fig3a, fig3b, fig3c, \
                 fig4a, fig4b, fig5, fig6a, fig6b"
            ),
        )),
    }
}

/// Applies one `key=value` override onto a config.
pub fn apply_set(config: &mut SweepConfig, key: &str, value: &str) -> Result<(), SweepError> {
    let bad_num =
        |reason: std::num::ParseFloatError| config_err(key, format!("not a number: {reason}"));
    let set_f64 = |slot: &mut Option<f64>| -> Result<(), SweepError> {
        *slot = Some(value.parse::<f64>().map_err(bad_num)?);
        Ok(())
    };
    match key {
        "omega0" => set_f64(&mut config.parameters.omega0),
        "delta" => set_f64(&mut config.parameters.delta),
        "v_a1" => set_f64(&mut config.parameters.v_a1),
        "v_a2" => set_f64(&mut config.parameters.v_a2),
        "v_b1" => set_f64(&mut config.parameters.v_b1),
        "v_b2" => set_f64(&mut config.parameters.v_b2),
        "gamma_a" => set_f64(&mut config.parameters.gamma_a),
        "gamma_b" => set_f64(&mut config.parameters.gamma_b),
        "detuning" => set_f64(&mut config.parameters.detuning),
        "q" => set_f64(&mut config.parameters.q),
        "d" => set_f64(&mut config.parameters.d),
        "range_start" => {
            config.range.start = value.parse().map_err(bad_num)?;
            Ok(())
        }
        "range_stop" => {
            config.range.stop = value.parse().map_err(bad_num)?;
            Ok(())
        }
        "points" | "count" => {
            config.range.count = value
                .parse::<usize>()
                .map_err(|e| config_err(key, format!("not a point count: {e}")))?;
            Ok(())
        }
        "model" => {
            config.model = match value {
                "linear" => Model::Linear,
                "quadratic" => Model::Quadratic,
                other => return Err(config_err(key, format!("unknown model `{other}`"))),
            };
            Ok(())
        }
        "axis" => {
            config.axis = match value {
                "k" => Axis::K,
                "detuning" => Axis::Detuning,
                "gamma_b" => Axis::GammaB,
                other => return Err(config_err(key, format!("unknown axis `{other}`"))),
            };
            Ok(())
        }
        "curvature" => {
            config.parameters.curvature = Some(match value {
                "exact" => CurvatureForm::Exact,
                "legacy" => CurvatureForm::Legacy,
                other => return Err(config_err(key, format!("unknown curvature `{other}`"))),
            });
            Ok(())
        }
        "format" => {
            config.format = match value {
                "csv" => OutputFormat::Csv,
                "json" => OutputFormat::Json,
                other => return Err(config_err(key, format!("unknown format `{other}`"))),
            };
            Ok(())
        }
        other => Err(config_err(
            other,
            "unknown parameter; see the config reference for valid keys",
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst measured deviation for the check's quantity.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

fn check(name: &str, worst: f64, tolerance: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: worst <= tolerance,
        worst,
        tolerance,
        detail: detail.into(),
    }
}

/// Runs the named-invariant battery against the configured parameters:
/// structural identities of the scattering amplitudes, branch dichotomy and
/// quadrature agreement of the self-energy, bound-state residuals and
/// cross-method agreement, limit-point behavior, and finite-difference
/// validation of the dispersion expansion. Failures are report entries, not
/// errors.
pub fn verify(config: &SweepConfig) -> Result<VerifyReport, SweepError> {
    let resolved = resolve(config)?;
    let mut checks = Vec::new();

    // Linear model identities at the resonance point.
    {
        let (ga, gb) = (resolved.gamma_a, resolved.gamma_b);
        let p = scatter_linear(ga, gb, 0.0)?;
        let t_expect = gb * gb / ((ga + gb) * (ga + gb));
        let worst = (p.transmission - t_expect)
            .abs()
            .max((p.reflection - ga * ga / ((ga + gb) * (ga + gb))).abs())
            .max((p.reflection + p.transmission + p.loss - 1.0).abs());
        checks.push(check(
            "linear_on_resonance",
            worst,
            1e-12,
            "T, R, and flux sum against the rate formulas at zero detuning",
        ));
    }

    // Dispersion expansion against centered finite differences.
    {
        let geoms = [
            (std::f64::consts::PI / 0.6, std::f64::consts::PI / 0.6, 1.0, 1.0),
            (std::f64::consts::PI / 0.5, std::f64::consts::PI / 0.7, 1.0, 1.0),
            (2.0 * std::f64::consts::PI, 2.2 * std::f64::consts::PI, 2.0, 2.5),
        ];
        let mut worst = 0.0f64;
        for (lx, ly, c, omega0) in geoms {
            let geom = WaveguideGeometry::new(lx, ly, c)?;
            for mode in [ModeIndex::TE01, ModeIndex::TE11] {
                let disp = quadratic_expand(&geom, omega0, mode, Direction::Positive)?;
                let k_cut = cutoff_wavenumber(&geom, mode);
                let k0 = (omega0 * omega0 / (c * c) - k_cut * k_cut).sqrt();
                let f = |k: f64| exact_dispersion(&geom, mode, k);
                let h = 0.02 * (k_cut * k_cut + k0 * k0).sqrt();
                let d1 = |h: f64| (f(k0 + h) - f(k0 - h)) / (2.0 * h);
                let d2 = |h: f64| (f(k0 + h) - 2.0 * f(k0) + f(k0 - h)) / (h * h);
                let v1_fd = (4.0 * d1(0.5 * h) - d1(h)) / 3.0;
                let v2_fd = (4.0 * d2(0.5 * h) - d2(h)) / 6.0;
                worst = worst
                    .max((v1_fd - disp.v1()).abs() / disp.v1().abs())
                    .max((v2_fd - disp.v2()).abs() / disp.v2().abs());
            }
        }
        checks.push(check(
            "dispersion_taylor_fd",
            worst,
            1e-6,
            "v1, v2 against Richardson-refined finite differences of the exact branch",
        ));
    }

    let Some(pair) = resolved.pair else {
        let all_passed = checks.iter().all(|c| c.passed);
        return Ok(VerifyReport { checks, all_passed });
    };

    let dm = pair.delta_min();
    let edge = pair.delta_max_f();

    // Unitarity below the b branch point.
    {
        let mut worst = 0.0f64;
        for i in 0..200 {
            let delta = dm + 1e-6 + (edge - 1e-6 - (dm + 1e-6)) * i as f64 / 199.0;
            let p = scatter_quadratic(&pair, delta)?;
            worst = worst.max((p.reflection + p.transmission - 1.0).abs());
        }
        checks.push(check(
            "unitarity_below_threshold",
            worst,
            1e-12,
            "max |R+T-1| on 200 points between the band minimum and the branch point",
        ));
    }

    // Loss bounds above the branch point.
    {
        let mut worst = 0.0f64;
        for i in 0..200 {
            let delta = edge + 1e-9 + (0.5 - edge - 1e-9) * i as f64 / 199.0;
            let p = scatter_quadratic(&pair, delta)?;
            worst = worst
                .max(-p.loss)
                .max(p.reflection + p.transmission + p.loss - 1.0)
                .max(-(p.reflection.min(p.transmission)));
        }
        checks.push(check(
            "loss_bounds",
            worst,
            1e-12,
            "P_loss nonnegative and flux closed on 200 points above the branch point",
        ));
    }

    // t = 1 + r on a mixed grid through both entry points.
    {
        let mut worst = 0.0f64;
        for i in 0..100 {
            let k = -4.5 + 5.1 * i as f64 / 99.0;
            let p = scatter_quadratic_by_k(&pair, k)?;
            worst = worst.max((p.t - (1.0 + p.r)).norm());
        }
        checks.push(check(
            "t_equals_one_plus_r",
            worst,
            1e-14,
            "transmission amplitude identity over a wavenumber grid",
        ));
    }

    // Wavenumber <-> detuning round trip.
    {
        let mut worst = 0.0f64;
        let a = pair.a();
        for i in 0..100 {
            let delta = dm + (0.5 - dm) * (i + 1) as f64 / 100.0;
            let (near, far) = a.k_of_detuning(delta)?;
            let scale = delta.abs().max(1e-3);
            worst = worst
                .max((a.detuning_of_k(near) - delta).abs() / scale)
                .max((a.detuning_of_k(far) - delta).abs() / scale);
        }
        checks.push(check(
            "k_detuning_round_trip",
            worst,
            1e-10,
            "both quadratic roots reproduce their detuning",
        ));
    }

    // Self-energy branch dichotomy.
    {
        let mut worst = 0.0f64;
        let b = pair.b();
        let gb = pair.gamma_b().max(0.01);
        for i in 0..100 {
            let delta = edge + 1e-3 + (0.5 - edge) * i as f64 / 99.0;
            let s = sigma(&SelfEnergyInput::new(*b, gb, b.omega0() + delta)?)?;
            worst = worst.max(s.value.re.abs()).max(s.value.im);
            let delta_below = edge - 1e-3 - (edge - dm) * i as f64 / 110.0;
            let s = sigma(&SelfEnergyInput::new(*b, gb, b.omega0() + delta_below)?)?;
            worst = worst.max(s.value.im.abs()).max(s.value.re);
        }
        checks.push(check(
            "sigma_branch_dichotomy",
            worst,
            1e-15,
            "purely imaginary above the branch point, real negative below",
        ));
    }

    // Self-energy quadrature oracle.
    {
        let mut worst = 0.0f64;
        let gb = pair.gamma_b().max(0.01);
        for (disp, gamma) in [(pair.a(), pair.gamma_a()), (pair.b(), gb)] {
            let omega_min = disp.band_minimum();
            let omega0 = disp.omega0();
            let window = 0.05 * omega0;
            let energies = [
                omega_min - 0.3 * omega0,
                omega_min - 0.1 * omega0,
                omega_min + 1.2 * window,
                0.5 * (omega_min + window + omega0),
                omega0,
                omega0 + 0.3 * omega0,
            ];
            for energy in energies {
                let input = SelfEnergyInput::new(*disp, gamma, energy)?;
                let exact = sigma(&input)?.value;
                let numeric = sigma_integral_oracle(&input)?;
                worst = worst.max((numeric - exact).norm() / exact.norm());
            }
        }
        checks.push(check(
            "sigma_oracle",
            worst,
            1e-3,
            "closed form against the regulator-extrapolated dispersion integral",
        ));
    }

    // Bound-state checks need a coupled b channel.
    if pair.gamma_b() > 0.0 {
        let (v1, v2) = (pair.b().v1(), pair.b().v2());
        let omega0 = pair.a().omega0();
        let mut worst_agree = 0.0f64;
        let mut worst_res = 0.0f64;
        for gb in [0.5 * pair.gamma_b(), pair.gamma_b(), 2.0 * pair.gamma_b()] {
            let cf = bound_state_closed_form(omega0, v1, v2, gb)?;
            let num = bound_state_numeric(omega0, v1, v2, gb)?;
            worst_agree = worst_agree
                .max((cf.delta_f - num.delta_f).abs())
                .max((cf.quasibound.0 - num.quasibound.0).norm());
            worst_res = worst_res.max(cf.residual).max(num.residual);
        }
        checks.push(check(
            "bound_state_agreement",
            worst_agree,
            1e-8,
            "radical and iterated roots of the pole cubic",
        ));
        checks.push(check(
            "bound_state_residual",
            worst_res,
            1e-10,
            "unsquared pole condition at every reported bound state",
        ));

        let df = feshbach_detuning(&pair)?;
        if df >= dm {
            let p = scatter_quadratic(&pair, df)?;
            checks.push(check(
                "feshbach_total_reflection",
                p.t.norm(),
                1e-9,
                "|t| at the Feshbach detuning",
            ));
        } else {
            checks.push(check(
                "feshbach_total_reflection",
                0.0,
                1e-9,
                "skipped: the Feshbach detuning sits below the open band",
            ));
        }
    }

    // Band-minimum limit point.
    {
        let p = scatter_quadratic(&pair, dm)?;
        let worst = (p.r + 1.0).norm().max(p.transmission).max(p.loss.abs());
        checks.push(check(
            "band_minimum_limit",
            worst,
            1e-15,
            "r = -1, t = 0 at the band minimum",
        ));
    }

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { checks, all_passed })
}

impl VerifyReport {
    /// One line per check plus a summary, the shape the `verify` subcommand
    /// prints.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{}: {} (worst {:.3e}, tolerance {:.1e}) — {}\n",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.worst,
                c.tolerance,
                c.detail
            ));
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!(
            "verify: {passed}/{} checks passed\n",
            self.checks.len()
        ));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verify reports hold only finite numbers")
    }
}
