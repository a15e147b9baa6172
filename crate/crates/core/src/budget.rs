//! Total channel loss of the HAP-to-ground link.
//!
//! Two estimates are provided. Method 1 sums the individual mechanisms in
//! dB: geometric spreading, pointing misalignment, molecular absorption and
//! weather. The NanoBob estimate lumps spreading, turbulence broadening and
//! terminal efficiencies into one logarithm and adds a fixed atmospheric
//! allowance.
//!
//! `channel_total` excludes the receiver-internal loss, which the QBER model
//! already accounts for through the detector efficiency. `system_total` adds
//! it back.

use serde::{Deserialize, Serialize};

use crate::atmosphere::{molecular_rate, weather_rate, MolecularAbsorptionTable, TurbulenceModel, WeatherCondition};
use crate::error::{ensure, ModelError, Result};
use crate::geometry::{slant_through_layer, LinkGeometry};
use crate::optics::{
    diffraction_divergence, effective_jitter, nanobob_divergence, pointing_loss_db, turbulent_divergence,
    PointingModel, TransmitterOptics,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverLosses {
    pub non_ideal_optics_db: f64,
    pub telescope_db: f64,
}

impl Default for ReceiverLosses {
    fn default() -> Self {
        Self {
            non_ideal_optics_db: 3.0,
            telescope_db: 2.2,
        }
    }
}

impl ReceiverLosses {
    pub fn total_db(&self) -> f64 {
        self.non_ideal_optics_db + self.telescope_db
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.non_ideal_optics_db >= 0.0, "non_ideal_optics_db", self.non_ideal_optics_db, ">= 0")?;
        ensure(self.telescope_db >= 0.0, "telescope_db", self.telescope_db, ">= 0")
    }
}

/// Transmitter, receiver and pointing efficiencies of the NanoBob estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NanoBobEfficiencies {
    pub transmitter: f64,
    pub receiver: f64,
    pub pointing: f64,
}

impl Default for NanoBobEfficiencies {
    fn default() -> Self {
        Self {
            transmitter: 0.8,
            receiver: 0.8,
            pointing: 0.8,
        }
    }
}

impl NanoBobEfficiencies {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("transmitter efficiency", self.transmitter),
            ("receiver efficiency", self.receiver),
            ("pointing efficiency", self.pointing),
        ] {
            ensure(v > 0.0 && v <= 1.0, name, v, "0 < efficiency <= 1")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Method1,
    Nanobob,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Method1, Method::Nanobob];

    pub fn name(self) -> &'static str {
        match self {
            Method::Method1 => "method1",
            Method::Nanobob => "nanobob",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}` (expected method1 or nanobob)"))
    }
}

/// Per-mechanism losses in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub method: Method,
    pub geometric: f64,
    pub pointing: f64,
    /// NanoBob only: `-10 log10(T_t T_r)`.
    pub terminal_efficiency: f64,
    pub molecular: f64,
    pub weather: f64,
    /// NanoBob only.
    pub fixed_atmospheric: f64,
    pub receiver: f64,
    pub channel_total: f64,
    pub system_total: f64,
}

impl LossBreakdown {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        method: Method,
        geometric: f64,
        pointing: f64,
        terminal_efficiency: f64,
        molecular: f64,
        weather: f64,
        fixed_atmospheric: f64,
        receiver: f64,
    ) -> Self {
        let channel_total = geometric + pointing + terminal_efficiency + molecular + weather + fixed_atmospheric;
        Self {
            method,
            geometric,
            pointing,
            terminal_efficiency,
            molecular,
            weather,
            fixed_atmospheric,
            receiver,
            channel_total,
            system_total: channel_total + receiver,
        }
    }

    /// `(name, dB)` pairs of every component that enters `channel_total`.
    pub fn channel_components(&self) -> [(&'static str, f64); 6] {
        [
            ("geometric", self.geometric),
            ("pointing", self.pointing),
            ("terminal_efficiency", self.terminal_efficiency),
            ("molecular", self.molecular),
            ("weather", self.weather),
            ("fixed_atmospheric", self.fixed_atmospheric),
        ]
    }
}

/// Unclamped geometric loss `20 log10((D_tx + R theta) / D_rx)`.
///
/// Negative when the spot is smaller than the receiver aperture.
pub fn geometric_loss_db_raw(tx_aperture_m: f64, rx_aperture_m: f64, los_m: f64, divergence_rad: f64) -> Result<f64> {
    ensure(tx_aperture_m > 0.0, "tx_aperture_m", tx_aperture_m, "> 0")?;
    ensure(rx_aperture_m > 0.0, "rx_aperture_m", rx_aperture_m, "> 0")?;
    ensure(los_m >= 0.0, "los_m", los_m, ">= 0")?;
    ensure(divergence_rad >= 0.0, "divergence_rad", divergence_rad, ">= 0")?;
    Ok(20.0 * ((tx_aperture_m + los_m * divergence_rad) / rx_aperture_m).log10())
}

/// Geometric loss clamped at 0 dB, as used inside the totals.
pub fn geometric_loss_db(tx_aperture_m: f64, rx_aperture_m: f64, los_m: f64, divergence_rad: f64) -> Result<f64> {
    geometric_loss_db_raw(tx_aperture_m, rx_aperture_m, los_m, divergence_rad).map(|l| l.max(0.0))
}

/// Everything the loss estimates need about one link.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub geometry: LinkGeometry,
    pub transmitter: TransmitterOptics,
    pub rx_aperture_m: f64,
    pub pointing: PointingModel,
    pub turbulence: TurbulenceModel,
    pub molecular: MolecularAbsorptionTable,
    pub weather: WeatherCondition,
    pub receiver_losses: ReceiverLosses,
    pub efficiencies: NanoBobEfficiencies,
}

impl Default for Link {
    fn default() -> Self {
        Self {
            geometry: LinkGeometry::default(),
            transmitter: TransmitterOptics::default(),
            rx_aperture_m: 0.4,
            pointing: PointingModel::default(),
            turbulence: TurbulenceModel::default(),
            molecular: MolecularAbsorptionTable::default(),
            weather: WeatherCondition::clear(),
            receiver_losses: ReceiverLosses::default(),
            efficiencies: NanoBobEfficiencies::default(),
        }
    }
}

impl Link {
    pub fn los_m(&self) -> Result<f64> {
        self.geometry.los_distance()
    }

    /// Weather loss `L_w R_w` in dB.
    pub fn weather_loss_db(&self) -> Result<f64> {
        let Some(layer) = self.weather.layer() else {
            return Ok(0.0);
        };
        if layer.top_altitude_m > self.geometry.hap_altitude_m {
            return Err(ModelError::Invalid {
                field: "weather.layer_top_altitude_m".into(),
                reason: format!(
                    "layer top {} m is above the platform at {} m",
                    layer.top_altitude_m, self.geometry.hap_altitude_m
                ),
            });
        }
        let rate = weather_rate(&self.weather, self.transmitter.wavelength_nm)?;
        let slant_km = slant_through_layer(layer, self.geometry.elevation_deg)? / 1_000.0;
        Ok(rate * slant_km)
    }

    pub fn total(&self, method: Method) -> Result<LossBreakdown> {
        match method {
            Method::Method1 => method1_total(self),
            Method::Nanobob => nanobob_total(self),
        }
    }
}

/// Method 1: `L_p + L_geo + L_ma R_LoS + L_w R_w (+ L_rx)`.
pub fn method1_total(link: &Link) -> Result<LossBreakdown> {
    let los = link.los_m()?;
    let theta = diffraction_divergence(&link.transmitter);
    let geometric = geometric_loss_db(link.transmitter.aperture_m, link.rx_aperture_m, los, theta)?;
    let jitter = effective_jitter(&link.pointing, los, &link.transmitter, link.turbulence.fried_parameter_m)?;
    let pointing = pointing_loss_db(
        &PointingModel {
            jitter_rad: jitter,
            ..link.pointing
        },
        theta,
    )?;
    let molecular = molecular_rate(&link.molecular, link.transmitter.wavelength_nm)? * los / 1_000.0;
    Ok(LossBreakdown::assemble(
        Method::Method1,
        geometric,
        pointing,
        0.0,
        molecular,
        link.weather_loss_db()?,
        0.0,
        link.receiver_losses.total_db(),
    ))
}

/// NanoBob: `10 log10(R^2 (theta^2 + theta_atm^2) / (D_rx^2 T_t T_p T_r)) + L_atm + L_w R_w (+ L_rx)`.
///
/// The logarithm is split into spreading (clamped at 0 dB), pointing
/// efficiency and terminal efficiencies so the breakdown stays additive.
pub fn nanobob_total(link: &Link) -> Result<LossBreakdown> {
    let los = link.los_m()?;
    let theta = nanobob_divergence(&link.transmitter);
    let theta_atm = turbulent_divergence(link.transmitter.wavelength_m(), link.turbulence.fried_parameter_m)?;
    ensure(link.rx_aperture_m > 0.0, "rx_aperture_m", link.rx_aperture_m, "> 0")?;
    let eff = &link.efficiencies;
    eff.validate()?;
    let spreading = 10.0 * (los.powi(2) * (theta.powi(2) + theta_atm.powi(2)) / link.rx_aperture_m.powi(2)).log10();
    Ok(LossBreakdown::assemble(
        Method::Nanobob,
        spreading.max(0.0),
        -10.0 * eff.pointing.log10(),
        -10.0 * (eff.transmitter * eff.receiver).log10(),
        0.0,
        link.weather_loss_db()?,
        link.turbulence.fixed_atmospheric_loss_db,
        link.receiver_losses.total_db(),
    ))
}
