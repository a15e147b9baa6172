//! Attenuation rates along the slant path and the background sky.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, ModelError, Result};
use crate::geometry::WeatherLayer;

/// Molecular absorption rates in dB/km, keyed by wavelength in nm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MolecularAbsorptionTable {
    pub entries: BTreeMap<u32, f64>,
}

impl Default for MolecularAbsorptionTable {
    fn default() -> Self {
        Self {
            entries: BTreeMap::from([(550, 0.13), (690, 0.01), (850, 0.41), (1550, 0.01)]),
        }
    }
}

impl MolecularAbsorptionTable {
    pub fn validate(&self) -> Result<()> {
        for (&nm, &rate) in &self.entries {
            ensure(nm > 0, "molecular wavelength_nm", f64::from(nm), "> 0")?;
            ensure(rate >= 0.0 && rate.is_finite(), "molecular rate_db_per_km", rate, ">= 0")?;
        }
        Ok(())
    }
}

/// Tabulated molecular absorption. No interpolation between entries.
pub fn molecular_rate(table: &MolecularAbsorptionTable, wavelength_nm: f64) -> Result<f64> {
    if wavelength_nm.fract() != 0.0 || !(0.0..=f64::from(u32::MAX)).contains(&wavelength_nm) {
        return Err(ModelError::MissingWavelength(wavelength_nm));
    }
    table
        .entries
        .get(&(wavelength_nm as u32))
        .copied()
        .ok_or(ModelError::MissingWavelength(wavelength_nm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeatherKind {
    #[default]
    Clear,
    Fog,
    Rain,
    Snow,
}

impl WeatherKind {
    /// Default top of the layer: fog sits below 500 m, rain and snow reach 5 km.
    pub fn default_layer_altitude_m(self) -> Option<f64> {
        match self {
            WeatherKind::Clear => None,
            WeatherKind::Fog => Some(500.0),
            WeatherKind::Rain | WeatherKind::Snow => Some(5_000.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeatherKind::Clear => "clear",
            WeatherKind::Fog => "fog",
            WeatherKind::Rain => "rain",
            WeatherKind::Snow => "snow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct WeatherCondition {
    pub kind: WeatherKind,
    pub visibility_km: Option<f64>,
    /// Overrides the per-kind default layer altitude.
    pub layer_top_altitude_m: Option<f64>,
}

impl WeatherCondition {
    pub fn clear() -> Self {
        Self::default()
    }

    pub fn new(kind: WeatherKind, visibility_km: f64) -> Self {
        Self {
            kind,
            visibility_km: Some(visibility_km),
            layer_top_altitude_m: None,
        }
    }

    pub fn layer(&self) -> Option<WeatherLayer> {
        if self.kind == WeatherKind::Clear {
            return None;
        }
        self.layer_top_altitude_m
            .or_else(|| self.kind.default_layer_altitude_m())
            .map(|top_altitude_m| WeatherLayer { top_altitude_m })
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != WeatherKind::Clear {
            let v = self.visibility_km.ok_or_else(|| ModelError::Invalid {
                field: "visibility_km".into(),
                reason: "required for fog, rain and snow".into(),
            })?;
            ensure(v > 0.0 && v.is_finite(), "visibility_km", v, "> 0")?;
        }
        if let Some(h) = self.layer_top_altitude_m {
            ensure(h > 0.0 && h.is_finite(), "layer_top_altitude_m", h, "> 0")?;
        }
        Ok(())
    }
}

/// Size-distribution coefficient `p` of the fog model.
///
/// Boundaries go to the upper branch: `V >= 50 -> 1.6`, `6 <= V < 50 -> 1.3`.
pub fn size_distribution_coefficient(visibility_km: f64) -> f64 {
    if visibility_km >= 50.0 {
        1.6
    } else if visibility_km >= 6.0 {
        1.3
    } else {
        0.585 * visibility_km.cbrt()
    }
}

fn check_visibility(v: f64) -> Result<()> {
    ensure(v > 0.0 && v.is_finite(), "visibility_km", v, "> 0")
}

pub fn fog_rate(visibility_km: f64, wavelength_nm: f64) -> Result<f64> {
    check_visibility(visibility_km)?;
    let p = size_distribution_coefficient(visibility_km);
    Ok(3.91 / visibility_km * (wavelength_nm / 550.0).powf(-p))
}

pub fn rain_rate(visibility_km: f64) -> Result<f64> {
    check_visibility(visibility_km)?;
    Ok(2.8 / visibility_km)
}

pub fn snow_rate(visibility_km: f64) -> Result<f64> {
    check_visibility(visibility_km)?;
    Ok(58.0 / visibility_km)
}

/// Weather attenuation rate in dB/km.
pub fn weather_rate(cond: &WeatherCondition, wavelength_nm: f64) -> Result<f64> {
    cond.validate()?;
    let v = cond.visibility_km.unwrap_or_default();
    match cond.kind {
        WeatherKind::Clear => Ok(0.0),
        WeatherKind::Fog => fog_rate(v, wavelength_nm),
        WeatherKind::Rain => rain_rate(v),
        WeatherKind::Snow => snow_rate(v),
    }
}

/// Sky brightness presets in W m^-2 sr^-1 um^-1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SkyPreset {
    DayCloud,
    DayHazy,
    DayClear,
    FullMoon,
    NewMoon,
    #[default]
    Moonless,
    Custom,
}

impl SkyPreset {
    pub const NAMED: [SkyPreset; 6] = [
        SkyPreset::DayCloud,
        SkyPreset::DayHazy,
        SkyPreset::DayClear,
        SkyPreset::FullMoon,
        SkyPreset::NewMoon,
        SkyPreset::Moonless,
    ];

    pub fn radiance(self) -> Option<f64> {
        match self {
            SkyPreset::DayCloud => Some(150.0),
            SkyPreset::DayHazy => Some(15.0),
            SkyPreset::DayClear => Some(1.5),
            SkyPreset::FullMoon => Some(1.5e-3),
            SkyPreset::NewMoon => Some(1.5e-4),
            SkyPreset::Moonless => Some(1.5e-5),
            SkyPreset::Custom => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SkyPreset::DayCloud => "day_cloud",
            SkyPreset::DayHazy => "day_hazy",
            SkyPreset::DayClear => "day_clear",
            SkyPreset::FullMoon => "full_moon",
            SkyPreset::NewMoon => "new_moon",
            SkyPreset::Moonless => "moonless",
            SkyPreset::Custom => "custom",
        }
    }

    pub fn is_night(self) -> bool {
        matches!(self, SkyPreset::FullMoon | SkyPreset::NewMoon | SkyPreset::Moonless)
    }
}

impl std::str::FromStr for SkyPreset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SkyPreset::NAMED
            .into_iter()
            .chain([SkyPreset::Custom])
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown sky preset `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SkyRadiance {
    pub preset: SkyPreset,
    /// Required when `preset` is `custom`.
    pub custom_radiance: Option<f64>,
    /// Additive light-pollution term, same units.
    pub light_pollution: f64,
}

impl SkyRadiance {
    pub fn preset(preset: SkyPreset) -> Self {
        Self {
            preset,
            ..Default::default()
        }
    }

    pub fn custom(radiance: f64) -> Self {
        Self {
            preset: SkyPreset::Custom,
            custom_radiance: Some(radiance),
            light_pollution: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.preset == SkyPreset::Custom {
            let r = self.custom_radiance.ok_or_else(|| ModelError::Invalid {
                field: "custom_radiance".into(),
                reason: "required for the custom preset".into(),
            })?;
            ensure(r >= 0.0 && r.is_finite(), "custom_radiance", r, ">= 0")?;
        } else if self.custom_radiance.is_some() {
            return Err(ModelError::Invalid {
                field: "custom_radiance".into(),
                reason: "only allowed with the custom preset".into(),
            });
        }
        ensure(
            self.light_pollution >= 0.0 && self.light_pollution.is_finite(),
            "light_pollution",
            self.light_pollution,
            ">= 0",
        )
    }

    /// Total spectral radiance `H_b`.
    pub fn brightness(&self) -> f64 {
        self.preset
            .radiance()
            .or(self.custom_radiance)
            .unwrap_or_default()
            + self.light_pollution
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TurbulenceModel {
    pub fried_parameter_m: f64,
    /// Rayleigh scattering and absorption allowance used by the NanoBob estimate.
    pub fixed_atmospheric_loss_db: f64,
}

impl Default for TurbulenceModel {
    fn default() -> Self {
        Self {
            fried_parameter_m: 0.2,
            fixed_atmospheric_loss_db: 3.0,
        }
    }
}

impl TurbulenceModel {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.fried_parameter_m > 0.0 && self.fried_parameter_m.is_finite(),
            "fried_parameter_m",
            self.fried_parameter_m,
            "> 0",
        )?;
        ensure(
            self.fixed_atmospheric_loss_db >= 0.0 && self.fixed_atmospheric_loss_db.is_finite(),
            "fixed_atmospheric_loss_db",
            self.fixed_atmospheric_loss_db,
            ">= 0",
        )
    }
}
