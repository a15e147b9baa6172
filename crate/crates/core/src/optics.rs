//! Transmitter and receiver optics: divergence, field of view, pointing
//! misalignment and turbulence-induced beam wander.

use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, ModelError, Result};

/// Calibrated receiver solid angle used when no focal chain is supplied.
///
/// Reproduces the clear-daytime 43 dB DV-QKD threshold; see
/// [`crate::qkd::calibrate_fov_solid_angle`].
pub const CALIBRATED_FOV_SR: f64 = 1.02e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransmitterOptics {
    pub aperture_m: f64,
    pub wavelength_nm: f64,
    /// Deliberately widened beam; bypasses the diffraction estimates.
    pub divergence_override_rad: Option<f64>,
    /// Classical (non-QKD) transmit power. Informational only.
    pub classical_power_w: f64,
}

impl Default for TransmitterOptics {
    fn default() -> Self {
        Self {
            aperture_m: 0.1,
            wavelength_nm: 1550.0,
            divergence_override_rad: None,
            classical_power_w: 1e-3,
        }
    }
}

impl TransmitterOptics {
    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_nm * 1e-9
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.aperture_m > 0.0 && self.aperture_m.is_finite(), "aperture_m", self.aperture_m, "> 0")?;
        ensure(
            self.wavelength_nm > 0.0 && self.wavelength_nm.is_finite(),
            "wavelength_nm",
            self.wavelength_nm,
            "> 0",
        )?;
        if let Some(t) = self.divergence_override_rad {
            ensure(t > 0.0 && t.is_finite(), "divergence_override_rad", t, "> 0")?;
        }
        ensure(self.classical_power_w >= 0.0, "classical_power_w", self.classical_power_w, ">= 0")
    }
}

/// Receiver telescope, relay optics, detector and filter.
///
/// The field of view comes from the two-lens focal chain when both focal
/// lengths are given, otherwise from `fov_solid_angle_sr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverOptics {
    pub aperture_m: f64,
    pub detector_diameter_m: f64,
    pub telescope_focal_length_m: Option<f64>,
    pub relay_focal_length_m: Option<f64>,
    pub lens_separation_m: Option<f64>,
    pub filter_bandwidth_um: f64,
    pub fov_solid_angle_sr: Option<f64>,
}

impl Default for ReceiverOptics {
    fn default() -> Self {
        Self {
            aperture_m: 0.4,
            detector_diameter_m: 64.5e-6,
            telescope_focal_length_m: None,
            relay_focal_length_m: None,
            lens_separation_m: None,
            filter_bandwidth_um: 1e-4,
            fov_solid_angle_sr: Some(CALIBRATED_FOV_SR),
        }
    }
}

impl ReceiverOptics {
    /// Collecting area `pi (D_rx / 2)^2`.
    pub fn aperture_area(&self) -> f64 {
        PI * (self.aperture_m / 2.0).powi(2)
    }

    fn focal_chain(&self) -> Option<(f64, f64, f64)> {
        match (self.telescope_focal_length_m, self.relay_focal_length_m) {
            (Some(f1), Some(f2)) => Some((f1, f2, self.lens_separation_m.unwrap_or(0.0))),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.aperture_m > 0.0 && self.aperture_m.is_finite(), "aperture_m", self.aperture_m, "> 0")?;
        ensure(
            self.detector_diameter_m > 0.0,
            "detector_diameter_m",
            self.detector_diameter_m,
            "> 0",
        )?;
        ensure(
            self.filter_bandwidth_um >= 0.0 && self.filter_bandwidth_um.is_finite(),
            "filter_bandwidth_um",
            self.filter_bandwidth_um,
            ">= 0",
        )?;
        if let Some(sr) = self.fov_solid_angle_sr {
            ensure(sr > 0.0 && sr.is_finite(), "fov_solid_angle_sr", sr, "> 0")?;
        }
        let partial = self.telescope_focal_length_m.is_some() != self.relay_focal_length_m.is_some()
            || (self.lens_separation_m.is_some() && self.focal_chain().is_none());
        if partial {
            return Err(ModelError::Invalid {
                field: "receiver".into(),
                reason: "focal chain needs both telescope_focal_length_m and relay_focal_length_m".into(),
            });
        }
        if self.focal_chain().is_some() {
            effective_focal_length(self)?;
        } else if self.fov_solid_angle_sr.is_none() {
            return Err(ModelError::UnresolvedFov);
        }
        Ok(())
    }
}

/// Receiver field of view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldOfView {
    /// Full planar acceptance angle.
    pub planar_rad: f64,
    pub solid_sr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointingModel {
    pub jitter_rad: f64,
    /// Fold RMS beam wander into the jitter as `sqrt(variance) / R`.
    pub beam_wander_as_jitter: bool,
}

impl Default for PointingModel {
    fn default() -> Self {
        Self {
            jitter_rad: 5e-6,
            beam_wander_as_jitter: false,
        }
    }
}

impl PointingModel {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.jitter_rad >= 0.0 && self.jitter_rad.is_finite(),
            "jitter_rad",
            self.jitter_rad,
            ">= 0",
        )
    }
}

/// Diffraction-limited divergence `1.22 lambda / D_tx`, or the override.
pub fn diffraction_divergence(tx: &TransmitterOptics) -> f64 {
    tx.divergence_override_rad
        .unwrap_or(1.22 * tx.wavelength_m() / tx.aperture_m)
}

/// NanoBob divergence `2.44 lambda / D_tx`, or the override.
pub fn nanobob_divergence(tx: &TransmitterOptics) -> f64 {
    tx.divergence_override_rad
        .unwrap_or(2.44 * tx.wavelength_m() / tx.aperture_m)
}

/// Turbulence divergence `2.1 lambda / r0`.
pub fn turbulent_divergence(wavelength_m: f64, fried_parameter_m: f64) -> Result<f64> {
    ensure(fried_parameter_m > 0.0, "fried_parameter_m", fried_parameter_m, "> 0")?;
    Ok(2.1 * wavelength_m / fried_parameter_m)
}

/// Effective focal length of the telescope plus relay optics.
pub fn effective_focal_length(rx: &ReceiverOptics) -> Result<f64> {
    let (f1, f2, d) = rx.focal_chain().ok_or(ModelError::UnresolvedFov)?;
    let denom = f1 + f2 - d;
    if denom == 0.0 {
        return Err(ModelError::SingularFocalChain);
    }
    Ok(f1 * f2 / denom)
}

pub fn receiver_fov(rx: &ReceiverOptics) -> Result<FieldOfView> {
    if rx.focal_chain().is_some() {
        let f = effective_focal_length(rx)?;
        let planar = 2.0 * (rx.detector_diameter_m / (2.0 * f)).atan();
        // small-cone solid angle
        let solid = PI * (planar / 2.0).powi(2);
        return Ok(FieldOfView {
            planar_rad: planar,
            solid_sr: solid,
        });
    }
    let solid = rx.fov_solid_angle_sr.ok_or(ModelError::UnresolvedFov)?;
    Ok(FieldOfView {
        planar_rad: 2.0 * (solid / PI).sqrt(),
        solid_sr: solid,
    })
}

/// Fraction of power surviving misalignment: `exp(-8 jitter^2 / theta^2)`.
pub fn pointing_transmission(pointing: &PointingModel, divergence_rad: f64) -> Result<f64> {
    ensure(divergence_rad > 0.0, "divergence_rad", divergence_rad, "> 0")?;
    Ok((-8.0 * (pointing.jitter_rad / divergence_rad).powi(2)).exp())
}

/// Misalignment loss in dB, `(80 / ln 10) (jitter / theta)^2`.
pub fn pointing_loss_db(pointing: &PointingModel, divergence_rad: f64) -> Result<f64> {
    ensure(divergence_rad > 0.0, "divergence_rad", divergence_rad, "> 0")?;
    Ok(80.0 / LN_10 * (pointing.jitter_rad / divergence_rad).powi(2))
}

/// Beam centroid displacement variance in m^2 at the receiver plane.
pub fn beam_wander_variance(los_m: f64, tx: &TransmitterOptics, fried_parameter_m: f64) -> Result<f64> {
    ensure(los_m > 0.0, "los_m", los_m, "> 0")?;
    ensure(fried_parameter_m > 0.0, "fried_parameter_m", fried_parameter_m, "> 0")?;
    let d = tx.aperture_m;
    Ok(0.54 * los_m.powi(2) * (tx.wavelength_m() / d).powi(2) * (d / fried_parameter_m).powf(5.0 / 3.0))
}

/// Jitter seen by the misalignment model, optionally including beam wander.
pub fn effective_jitter(
    pointing: &PointingModel,
    los_m: f64,
    tx: &TransmitterOptics,
    fried_parameter_m: f64,
) -> Result<f64> {
    if !pointing.beam_wander_as_jitter {
        return Ok(pointing.jitter_rad);
    }
    let wander = beam_wander_variance(los_m, tx, fried_parameter_m)?.sqrt() / los_m;
    Ok(pointing.jitter_rad.hypot(wander))
}
