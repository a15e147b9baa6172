//! One-dimensional parameter sweeps and the figure presets.
//!
//! A sweep varies one scenario field over a grid and evaluates a set of
//! series at every grid point. Each series may override further fields
//! (weather grade, sky preset, divergence) before evaluation. Fields are
//! addressed by dotted paths into the scenario document, for example
//! `transmitter.aperture_m`. Two virtual variables are also accepted:
//! `geometry.los_m` sets the elevation that gives the requested slant
//! range, and `channel_loss_db` feeds a loss directly to the QKD metrics.
//!
//! Grid points are evaluated in parallel and assembled by index, so the
//! output does not depend on scheduling.

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::atmosphere::{weather_rate, SkyPreset};
use crate::budget::Method;
use crate::geometry::{ground_footprint_diameter, LinkGeometry};
use crate::optics::diffraction_divergence;
use crate::qkd::{cv_snr, dv_feasibility};

use super::scenario::{Scenario, ScenarioError};
use super::table::{Cell, Table};

pub type SeriesTable = Table;

#[derive(Debug, Clone, PartialEq)]
pub enum SweepVariable {
    /// Dotted path to a numeric scenario field.
    Field(String),
    /// Line-of-sight distance in meters, realised through the elevation.
    LosDistance,
    /// Channel loss in dB, bypassing the link budget.
    ChannelLoss,
}

impl SweepVariable {
    pub fn parse(path: &str) -> Self {
        match path {
            "geometry.los_m" => SweepVariable::LosDistance,
            "channel_loss_db" => SweepVariable::ChannelLoss,
            other => SweepVariable::Field(other.to_string()),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            SweepVariable::Field(p) => p,
            SweepVariable::LosDistance => "geometry.los_m",
            SweepVariable::ChannelLoss => "channel_loss_db",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: Scale,
}

impl Grid {
    pub fn new(variable: &str, min: f64, max: f64, points: usize, scale: Scale) -> Self {
        Self {
            variable: SweepVariable::parse(variable),
            min,
            max,
            points,
            scale,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.points < 2 {
            return Err(SweepError::Spec(format!("point count {} < 2", self.points)));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.min >= self.max {
            return Err(SweepError::Spec(format!("need finite min < max, got {} and {}", self.min, self.max)));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return Err(SweepError::Spec("log scale needs min > 0".into()));
        }
        Ok(())
    }

    /// Grid values in ascending order; the endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == last {
                    return self.max;
                }
                let frac = i as f64 / last as f64;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * frac,
                    Scale::Log => {
                        let (lo, hi) = (self.min.log10(), self.max.log10());
                        10f64.powf(lo + (hi - lo) * frac)
                    }
                }
            })
            .collect()
    }
}

/// Quantity reported by a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    ChannelLoss(Method),
    DvQber(Method),
    CvSnr(Method),
    /// Ground beam radius in meters.
    FootprintRadius,
    /// Weather attenuation rate in dB/km.
    WeatherRate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub overrides: Vec<(String, Value)>,
    pub metric: Metric,
}

impl Series {
    pub fn new(label: impl Into<String>, metric: Metric) -> Self {
        Self {
            label: label.into(),
            overrides: Vec::new(),
            metric,
        }
    }

    pub fn with(mut self, path: &str, value: Value) -> Self {
        self.overrides.push((path.to_string(), value));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub grid: Grid,
    /// Applied to the scenario before any series override.
    pub held: Vec<(String, Value)>,
    pub series: Vec<Series>,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Quantity family for custom sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricKind {
    #[default]
    ChannelLoss,
    Qber,
    Snr,
}

impl std::str::FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "channel-loss" => Ok(MetricKind::ChannelLoss),
            "qber" => Ok(MetricKind::Qber),
            "snr" => Ok(MetricKind::Snr),
            _ => Err(format!("unknown metric `{s}` (expected channel-loss, qber or snr)")),
        }
    }
}

impl SweepSpec {
    /// A sweep over an arbitrary field with one series per method and sky preset.
    pub fn custom(grid: Grid, kind: MetricKind, methods: &[Method], skies: &[SkyPreset]) -> Self {
        let mut series = Vec::new();
        for &m in methods {
            let (metric, suffix) = match kind {
                MetricKind::ChannelLoss => (Metric::ChannelLoss(m), "channel_db"),
                MetricKind::Qber => (Metric::DvQber(m), "qber"),
                MetricKind::Snr => (Metric::CvSnr(m), "snr"),
            };
            if skies.is_empty() {
                series.push(Series::new(format!("{}_{suffix}", m.name()), metric));
            }
            for &sky in skies {
                series.push(
                    Series::new(format!("{}_{suffix}_{}", m.name(), sky.name()), metric)
                        .with("sky.preset", json!(sky.name()))
                        .with("sky.custom_radiance", Value::Null),
                );
            }
        }
        Self {
            name: "custom".into(),
            grid,
            held: Vec::new(),
            series,
        }
    }
}

/// Sweeps matching the published figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigurePreset {
    /// Weather attenuation rate against visibility.
    Fig2,
    /// Clear-sky channel loss against LoS distance, both methods.
    Fig3,
    /// Channel loss with fog below 500 m.
    Fig4,
    /// Channel loss with rain below 5 km.
    Fig5,
    /// QBER against channel loss for each sky preset.
    Fig6,
    /// Channel loss against transmitter aperture at 20 degrees.
    Fig7,
    /// Channel loss against LoS distance for widened beams, moonless night.
    Fig8,
    /// QBER against LoS distance for widened beams, moonless night.
    Fig9,
    /// CV-QKD SNR against LoS distance for widened beams.
    Fig10,
    /// Ground footprint radius against divergence, vertical link.
    Fig11,
}

const FOG_GRADES: [(&str, f64); 3] = [("light", 1.0), ("moderate", 0.5), ("heavy", 0.2)];
const RAIN_GRADES: [(&str, f64); 3] = [("light", 10.0), ("moderate", 5.0), ("heavy", 2.0)];
const WIDE_BEAMS_MRAD: [f64; 4] = [1.0, 3.0, 5.0, 10.0];

impl FigurePreset {
    pub const ALL: [FigurePreset; 10] = [
        FigurePreset::Fig2,
        FigurePreset::Fig3,
        FigurePreset::Fig4,
        FigurePreset::Fig5,
        FigurePreset::Fig6,
        FigurePreset::Fig7,
        FigurePreset::Fig8,
        FigurePreset::Fig9,
        FigurePreset::Fig10,
        FigurePreset::Fig11,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigurePreset::Fig2 => "fig2",
            FigurePreset::Fig3 => "fig3",
            FigurePreset::Fig4 => "fig4",
            FigurePreset::Fig5 => "fig5",
            FigurePreset::Fig6 => "fig6",
            FigurePreset::Fig7 => "fig7",
            FigurePreset::Fig8 => "fig8",
            FigurePreset::Fig9 => "fig9",
            FigurePreset::Fig10 => "fig10",
            FigurePreset::Fig11 => "fig11",
        }
    }

    pub fn spec(self) -> SweepSpec {
        let los_grid = || Grid::new("geometry.los_m", 20_000.0, 230_000.0, 43, Scale::Linear);
        let clear = || {
            vec![
                ("weather.kind".to_string(), json!("clear")),
                ("transmitter.divergence_override_rad".to_string(), Value::Null),
                ("transmitter.aperture_m".to_string(), json!(0.1)),
                ("receiver.aperture_m".to_string(), json!(0.4)),
                ("geometry.hap_altitude_m".to_string(), json!(20_000.0)),
            ]
        };
        let (grid, held, series) = match self {
            FigurePreset::Fig2 => (
                Grid::new("weather.visibility_km", 0.1, 10.0, 41, Scale::Log),
                vec![
                    ("weather.layer_top_altitude_m".to_string(), Value::Null),
                    ("transmitter.wavelength_nm".to_string(), json!(1550.0)),
                ],
                ["fog", "rain", "snow"]
                    .into_iter()
                    .map(|k| Series::new(format!("{k}_db_per_km"), Metric::WeatherRate).with("weather.kind", json!(k)))
                    .collect(),
            ),
            FigurePreset::Fig3 => (
                los_grid(),
                clear(),
                Method::ALL
                    .into_iter()
                    .map(|m| Series::new(format!("{}_channel_db", m.name()), Metric::ChannelLoss(m)))
                    .collect(),
            ),
            FigurePreset::Fig4 | FigurePreset::Fig5 => {
                let (kind, grades, layer) = if self == FigurePreset::Fig4 {
                    ("fog", FOG_GRADES, 500.0)
                } else {
                    ("rain", RAIN_GRADES, 5_000.0)
                };
                let mut held = clear();
                held.retain(|(p, _)| p != "weather.kind");
                let mut series = Vec::new();
                for m in Method::ALL {
                    for (grade, vis) in grades {
                        series.push(
                            Series::new(format!("{}_{kind}_{grade}_db", m.name()), Metric::ChannelLoss(m))
                                .with("weather.kind", json!(kind))
                                .with("weather.visibility_km", json!(vis))
                                .with("weather.layer_top_altitude_m", json!(layer)),
                        );
                    }
                }
                (los_grid(), held, series)
            }
            FigurePreset::Fig6 => (
                Grid::new("channel_loss_db", 0.0, 60.0, 121, Scale::Linear),
                vec![("weather.kind".to_string(), json!("clear"))],
                SkyPreset::NAMED
                    .into_iter()
                    .map(|s| {
                        Series::new(format!("qber_{}", s.name()), Metric::DvQber(Method::Method1))
                            .with("sky.preset", json!(s.name()))
                            .with("sky.custom_radiance", Value::Null)
                    })
                    .collect(),
            ),
            FigurePreset::Fig7 => {
                let mut held = clear();
                held.retain(|(p, _)| p != "transmitter.aperture_m" && p != "receiver.aperture_m");
                held.push(("geometry.elevation_deg".to_string(), json!(20.0)));
                let mut series = Vec::new();
                for m in Method::ALL {
                    for rx in [0.2, 0.4, 0.6] {
                        series.push(
                            Series::new(format!("{}_rx{rx}m_db", m.name()), Metric::ChannelLoss(m))
                                .with("receiver.aperture_m", json!(rx)),
                        );
                    }
                }
                (Grid::new("transmitter.aperture_m", 0.05, 0.30, 26, Scale::Linear), held, series)
            }
            FigurePreset::Fig8 | FigurePreset::Fig9 | FigurePreset::Fig10 => {
                let (prefix, metric) = match self {
                    FigurePreset::Fig8 => ("channel_db", Metric::ChannelLoss(Method::Method1)),
                    FigurePreset::Fig9 => ("qber", Metric::DvQber(Method::Method1)),
                    _ => ("snr", Metric::CvSnr(Method::Method1)),
                };
                let mut held = clear();
                held.push(("sky.preset".to_string(), json!("moonless")));
                held.push(("sky.custom_radiance".to_string(), Value::Null));
                held.push(("method".to_string(), json!("method1")));
                let mut series = vec![Series::new(format!("{prefix}_diffraction"), metric)];
                for mrad in WIDE_BEAMS_MRAD {
                    series.push(
                        Series::new(format!("{prefix}_{mrad}mrad"), metric)
                            .with("transmitter.divergence_override_rad", json!(mrad * 1e-3)),
                    );
                }
                (los_grid(), held, series)
            }
            FigurePreset::Fig11 => (
                Grid::new("transmitter.divergence_override_rad", 0.5e-3, 10e-3, 20, Scale::Linear),
                vec![
                    ("geometry.elevation_deg".to_string(), json!(90.0)),
                    ("geometry.hap_altitude_m".to_string(), json!(20_000.0)),
                    ("transmitter.aperture_m".to_string(), json!(0.1)),
                ],
                vec![Series::new("footprint_radius_m", Metric::FootprintRadius)],
            ),
        };
        SweepSpec {
            name: self.name().to_string(),
            grid,
            held,
            series,
        }
    }
}

impl std::str::FromStr for FigurePreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigurePreset::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure `{s}` (expected fig2..fig11)"))
    }
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let mut node = doc;
    let mut keys = path.split('.').peekable();
    while let Some(key) = keys.next() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("`{path}` does not address a scenario field"))?;
        if keys.peek().is_none() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj
            .get_mut(key)
            .ok_or_else(|| format!("unknown scenario section `{key}` in `{path}`"))?;
    }
    Err("empty variable path".into())
}

fn has_path(doc: &Value, path: &str) -> bool {
    path.split('.').try_fold(doc, |node, key| node.get(key)).is_some()
}

fn apply(doc: &mut Value, overrides: &[(String, Value)]) -> Result<(), String> {
    overrides.iter().try_for_each(|(p, v)| set_path(doc, p, v.clone()))
}

fn evaluate(base: &Value, variable: &SweepVariable, x: f64, metric: Metric) -> Result<f64, String> {
    let mut doc = base.clone();
    match variable {
        SweepVariable::Field(path) => set_path(&mut doc, path, json!(x))?,
        SweepVariable::LosDistance => {
            let alt = doc["geometry"]["hap_altitude_m"].as_f64().unwrap_or_default();
            let geom = LinkGeometry::from_los_distance(alt, x).map_err(|e| e.to_string())?;
            set_path(&mut doc, "geometry.elevation_deg", json!(geom.elevation_deg))?;
        }
        SweepVariable::ChannelLoss => {}
    }
    let s = Scenario::from_value(doc).map_err(|e| e.to_string())?;
    let direct_loss = (*variable == SweepVariable::ChannelLoss).then_some(x);
    let loss = |m: Method| -> Result<f64, String> {
        match direct_loss {
            Some(l) => Ok(l),
            None => s.link().total(m).map(|b| b.channel_total).map_err(|e| e.to_string()),
        }
    };
    let tx = &s.transmitter;
    let value = match metric {
        Metric::ChannelLoss(m) => loss(m)?,
        Metric::DvQber(m) => dv_feasibility(&s.sky, &s.receiver, &s.detector, &s.dv, tx.wavelength_m(), loss(m)?)
            .map_err(|e| e.to_string())?
            .qber
            .unwrap_or(f64::NAN),
        Metric::CvSnr(m) => cv_snr(&s.cv, loss(m)?).map_err(|e| e.to_string())?,
        Metric::FootprintRadius => {
            let los = s.geometry.los_distance().map_err(|e| e.to_string())?;
            ground_footprint_diameter(tx.aperture_m, los, diffraction_divergence(tx)).map_err(|e| e.to_string())? / 2.0
        }
        Metric::WeatherRate => weather_rate(&s.weather, tx.wavelength_nm).map_err(|e| e.to_string())?,
    };
    Ok(value)
}

pub fn run_sweep(spec: &SweepSpec, scenario: &Scenario) -> Result<SeriesTable, SweepError> {
    run_sweep_with(spec, scenario, true)
}

/// Runs a sweep, optionally on the rayon pool. Output is identical either way.
pub fn run_sweep_with(spec: &SweepSpec, scenario: &Scenario, parallel: bool) -> Result<SeriesTable, SweepError> {
    spec.grid.validate()?;
    if spec.series.is_empty() {
        return Err(SweepError::Spec("no series selected".into()));
    }
    let mut base = scenario.to_value();
    if let SweepVariable::Field(path) = &spec.grid.variable {
        if !has_path(&base, path) {
            return Err(SweepError::Spec(format!("unknown sweep variable `{path}`")));
        }
    }
    apply(&mut base, &spec.held).map_err(SweepError::Spec)?;
    Scenario::from_value(base.clone())?;

    let series_bases = spec
        .series
        .iter()
        .map(|s| {
            let mut doc = base.clone();
            apply(&mut doc, &s.overrides).map(|_| doc)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(SweepError::Spec)?;

    let xs = spec.grid.values();
    let eval_row = |x: &f64| -> (Vec<Cell>, Option<String>) {
        let mut cells = vec![Cell::Value(*x)];
        let mut errors = Vec::new();
        for (series, doc) in spec.series.iter().zip(&series_bases) {
            match evaluate(doc, &spec.grid.variable, *x, series.metric) {
                Ok(v) => cells.push(Cell::Value(v)),
                Err(e) => {
                    cells.push(Cell::Error);
                    errors.push(format!("{}: {e}", series.label));
                }
            }
        }
        (cells, (!errors.is_empty()).then(|| errors.join("; ")))
    };
    let evaluated: Vec<_> = if parallel {
        xs.par_iter().map(eval_row).collect()
    } else {
        xs.iter().map(eval_row).collect()
    };

    let mut columns = vec![spec.grid.variable.label().to_string()];
    columns.extend(spec.series.iter().map(|s| s.label.clone()));
    let mut rows = Vec::with_capacity(evaluated.len());
    let mut errors = Vec::new();
    for (i, (cells, err)) in evaluated.into_iter().enumerate() {
        if let Some(e) = err {
            errors.push((i, e));
        }
        rows.push(cells);
    }
    Ok(Table { columns, rows, errors })
}
