//! JSON scenario documents.
//!
//! Every section and field is optional and falls back to the reference
//! link parameters (1550 nm, 20 km platform at 20 degrees elevation,
//! 0.1 m / 0.4 m telescopes, 5 urad jitter, moonless night). Unknown keys
//! are rejected.
//!
//! ```json
//! {
//!   "geometry": { "hap_altitude_m": 20000, "elevation_deg": 90 },
//!   "transmitter": { "divergence_override_rad": 0.001 },
//!   "weather": { "kind": "fog", "visibility_km": 0.5 },
//!   "sky": { "preset": "day_clear" },
//!   "method": "nanobob"
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atmosphere::{MolecularAbsorptionTable, SkyRadiance, TurbulenceModel, WeatherCondition};
use crate::budget::{Link, Method, NanoBobEfficiencies, ReceiverLosses};
use crate::error::ModelError;
use crate::geometry::LinkGeometry;
use crate::optics::{PointingModel, ReceiverOptics, TransmitterOptics};
use crate::qkd::{CvProtocolParams, DetectorParams, DvProtocolParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub geometry: LinkGeometry,
    pub transmitter: TransmitterOptics,
    pub receiver: ReceiverOptics,
    pub pointing: PointingModel,
    pub turbulence: TurbulenceModel,
    pub molecular_absorption: MolecularAbsorptionTable,
    pub weather: WeatherCondition,
    pub sky: SkyRadiance,
    pub receiver_losses: ReceiverLosses,
    pub nanobob_efficiencies: NanoBobEfficiencies,
    pub dv: DvProtocolParams,
    pub detector: DetectorParams,
    pub cv: CvProtocolParams,
    /// Loss estimate that feeds the feasibility verdicts.
    pub method: Method,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown scenario key at line {line}, column {column}: {message}")]
    UnknownKey { line: usize, column: usize, message: String },
    #[error("invalid scenario field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ScenarioError {
    fn from_model(section: &str, err: ModelError) -> Self {
        let (field, reason) = match &err {
            ModelError::Domain { quantity, .. } => (format!("{section}.{quantity}"), err.to_string()),
            ModelError::Invalid { field, reason } if field.contains('.') => (field.clone(), reason.clone()),
            ModelError::Invalid { field, reason } => (format!("{section}.{field}"), reason.clone()),
            _ => (section.to_string(), err.to_string()),
        };
        ScenarioError::Invalid { field, reason }
    }
}

impl From<serde_json::Error> for ScenarioError {
    fn from(e: serde_json::Error) -> Self {
        let (line, column) = (e.line(), e.column());
        let message = e.to_string();
        if message.starts_with("unknown field") {
            ScenarioError::UnknownKey { line, column, message }
        } else {
            ScenarioError::Parse { line, column, message }
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let check = |section: &str, r: crate::Result<()>| r.map_err(|e| ScenarioError::from_model(section, e));
        check("geometry", self.geometry.validate())?;
        check("transmitter", self.transmitter.validate())?;
        check("receiver", self.receiver.validate())?;
        check("pointing", self.pointing.validate())?;
        check("turbulence", self.turbulence.validate())?;
        check("molecular_absorption", self.molecular_absorption.validate())?;
        check("weather", self.weather.validate())?;
        check("sky", self.sky.validate())?;
        check("receiver_losses", self.receiver_losses.validate())?;
        check("nanobob_efficiencies", self.nanobob_efficiencies.validate())?;
        check("dv", self.dv.validate())?;
        check("detector", self.detector.validate())?;
        check("cv", self.cv.validate())?;
        if let Some(layer) = self.weather.layer() {
            if layer.top_altitude_m > self.geometry.hap_altitude_m {
                return Err(ScenarioError::Invalid {
                    field: "weather.layer_top_altitude_m".into(),
                    reason: format!(
                        "weather layer top {} m is above the platform altitude {} m",
                        layer.top_altitude_m, self.geometry.hap_altitude_m
                    ),
                });
            }
        }
        Ok(())
    }

    /// The link-loss view of this scenario.
    pub fn link(&self) -> Link {
        Link {
            geometry: self.geometry,
            transmitter: self.transmitter,
            rx_aperture_m: self.receiver.aperture_m,
            pointing: self.pointing,
            turbulence: self.turbulence,
            molecular: self.molecular_absorption.clone(),
            weather: self.weather,
            receiver_losses: self.receiver_losses,
            efficiencies: self.nanobob_efficiencies,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("scenario serializes")
    }

    /// Parses and validates a scenario from a JSON value.
    pub fn from_value(value: serde_json::Value) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_value(value)?;
        s.validate()?;
        Ok(s)
    }
}

/// Parses a scenario document. Empty or whitespace-only input gives the defaults.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    if text.trim().is_empty() {
        return Ok(Scenario::default());
    }
    let s: Scenario = serde_json::from_str(text)?;
    s.validate()?;
    Ok(s)
}

pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_scenario(&text)
}
