//! QKD feasibility from channel loss and sky background.
//!
//! DV-QKD (decoy-state BB84) is judged by its QBER, where only background
//! and dark counts are treated as error sources and each noise count is
//! wrong half the time:
//!
//! ```text
//! QBER = 0.5 N_noise / (N_signal + N_noise)
//! ```
//!
//! Basis sifting scales signal and noise by the same factor and cancels out
//! of the ratio, so it is left out. Detector dead time is applied to the
//! total click rate and likewise leaves the QBER unchanged.
//!
//! CV-QKD (Gaussian-modulated coherent states, homodyne detection) is judged
//! by its SNR in shot-noise units,
//!
//! ```text
//! SNR = T V_sig / (1 + v_el + T xi),   T = 10^(-loss / 10)
//! ```
//!
//! which depends on this choice of model rather than on any measured curve.

use serde::{Deserialize, Serialize};

use crate::atmosphere::SkyRadiance;
use crate::budget::{Link, Method};
use crate::error::{ensure, ModelError, Result};
use crate::optics::{receiver_fov, ReceiverOptics};

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Which mean photon number drives the detected signal rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MeanPhotonMode {
    /// Weighted over signal and decoy pulses.
    #[default]
    PulseAverage,
    SignalOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DvProtocolParams {
    pub repetition_rate_hz: f64,
    pub signal_mean_photon: f64,
    pub decoy_mean_photon: f64,
    pub signal_probability: f64,
    pub decoy_probability: f64,
    pub qber_limit: f64,
    pub gate_width_s: f64,
    pub mean_photon_mode: MeanPhotonMode,
}

impl Default for DvProtocolParams {
    fn default() -> Self {
        Self {
            repetition_rate_hz: 5e8,
            signal_mean_photon: 0.5,
            decoy_mean_photon: 1.0,
            signal_probability: 0.8,
            decoy_probability: 0.2,
            qber_limit: 0.11,
            gate_width_s: 500e-12,
            mean_photon_mode: MeanPhotonMode::PulseAverage,
        }
    }
}

impl DvProtocolParams {
    pub fn mean_photon_number(&self) -> f64 {
        match self.mean_photon_mode {
            MeanPhotonMode::PulseAverage => {
                self.signal_probability * self.signal_mean_photon + self.decoy_probability * self.decoy_mean_photon
            }
            MeanPhotonMode::SignalOnly => self.signal_mean_photon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.repetition_rate_hz > 0.0, "repetition_rate_hz", self.repetition_rate_hz, "> 0")?;
        ensure(self.signal_mean_photon > 0.0, "signal_mean_photon", self.signal_mean_photon, "> 0")?;
        ensure(self.decoy_mean_photon > 0.0, "decoy_mean_photon", self.decoy_mean_photon, "> 0")?;
        for (name, p) in [
            ("signal_probability", self.signal_probability),
            ("decoy_probability", self.decoy_probability),
        ] {
            ensure((0.0..=1.0).contains(&p), name, p, "0 <= p <= 1")?;
        }
        let total = self.signal_probability + self.decoy_probability;
        ensure((total - 1.0).abs() < 1e-9, "signal_probability + decoy_probability", total, "= 1")?;
        ensure(
            self.qber_limit > 0.0 && self.qber_limit < 0.5,
            "qber_limit",
            self.qber_limit,
            "0 < limit < 0.5",
        )?;
        ensure(self.gate_width_s > 0.0, "gate_width_s", self.gate_width_s, "> 0")?;
        gate_factor(self).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorParams {
    pub efficiency: f64,
    pub dead_time_s: f64,
    pub dark_rate_hz: f64,
    /// Fibre core diameter coupled to the detector.
    pub diameter_m: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            efficiency: 0.25,
            dead_time_s: 18e-6,
            dark_rate_hz: 500.0,
            diameter_m: 64.5e-6,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.efficiency > 0.0 && self.efficiency <= 1.0,
            "efficiency",
            self.efficiency,
            "0 < efficiency <= 1",
        )?;
        ensure(self.dead_time_s >= 0.0, "dead_time_s", self.dead_time_s, ">= 0")?;
        ensure(self.dark_rate_hz >= 0.0, "dark_rate_hz", self.dark_rate_hz, ">= 0")?;
        ensure(self.diameter_m > 0.0, "diameter_m", self.diameter_m, "> 0")
    }
}

/// CV-QKD parameters, all variances in shot-noise units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvProtocolParams {
    pub modulation_variance: f64,
    pub excess_noise: f64,
    pub electronic_noise: f64,
    pub snr_threshold: f64,
}

impl Default for CvProtocolParams {
    fn default() -> Self {
        Self {
            modulation_variance: 10.0,
            excess_noise: 0.03,
            electronic_noise: 0.1,
            snr_threshold: 0.024,
        }
    }
}

impl CvProtocolParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.modulation_variance > 0.0, "modulation_variance", self.modulation_variance, "> 0")?;
        ensure(self.excess_noise >= 0.0, "excess_noise", self.excess_noise, ">= 0")?;
        ensure(self.electronic_noise >= 0.0, "electronic_noise", self.electronic_noise, ">= 0")?;
        ensure(self.snr_threshold > 0.0, "snr_threshold", self.snr_threshold, "> 0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    #[default]
    Dv,
    Cv,
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dv" => Ok(Protocol::Dv),
            "cv" => Ok(Protocol::Cv),
            _ => Err(format!("unknown protocol `{s}` (expected dv or cv)")),
        }
    }
}

/// Verdict at one channel loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityResult {
    pub protocol: Protocol,
    pub channel_loss_db: f64,
    /// Detected signal clicks per second (DV only).
    pub signal_counts_hz: Option<f64>,
    /// Detected noise clicks per second (DV only).
    pub noise_counts_hz: Option<f64>,
    pub qber: Option<f64>,
    pub snr: Option<f64>,
    pub feasible: bool,
    /// Limit-crossing loss minus the actual channel loss, in dB.
    pub margin_db: f64,
}

/// Fraction of each pulse period the detector is gated on.
pub fn gate_factor(dv: &DvProtocolParams) -> Result<f64> {
    let g = dv.gate_width_s * dv.repetition_rate_hz;
    if g > 1.0 {
        return Err(ModelError::GateFactor(g));
    }
    Ok(g)
}

pub fn photon_energy(wavelength_m: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / wavelength_m
}

fn transmittance(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Background power `H_b Omega A_rec B` collected by the receiver, in W.
pub fn background_power(sky: &SkyRadiance, rx: &ReceiverOptics) -> Result<f64> {
    let fov = receiver_fov(rx)?;
    Ok(sky.brightness() * fov.solid_sr * rx.aperture_area() * rx.filter_bandwidth_um)
}

/// Gated background plus dark counts per second.
pub fn noise_count_rate(
    sky: &SkyRadiance,
    rx: &ReceiverOptics,
    det: &DetectorParams,
    dv: &DvProtocolParams,
    wavelength_m: f64,
) -> Result<f64> {
    let gate = gate_factor(dv)?;
    let photons = background_power(sky, rx)? / photon_energy(wavelength_m);
    Ok(photons * gate * det.efficiency + det.dark_rate_hz * gate)
}

/// Detected signal rate before dead-time saturation.
pub fn raw_signal_rate(dv: &DvProtocolParams, det: &DetectorParams, channel_loss_db: f64) -> f64 {
    dv.repetition_rate_hz * dv.mean_photon_number() * transmittance(channel_loss_db) * det.efficiency
}

/// Non-paralysable dead-time model `N / (1 + N tau)`.
pub fn saturate(rate_hz: f64, dead_time_s: f64) -> f64 {
    rate_hz / (1.0 + rate_hz * dead_time_s)
}

/// Detected signal rate with dead-time saturation.
pub fn signal_count_rate(dv: &DvProtocolParams, det: &DetectorParams, channel_loss_db: f64) -> Result<f64> {
    ensure(channel_loss_db >= 0.0, "channel_loss_db", channel_loss_db, ">= 0")?;
    Ok(saturate(raw_signal_rate(dv, det, channel_loss_db), det.dead_time_s))
}

pub fn qber(signal_hz: f64, noise_hz: f64) -> Result<f64> {
    ensure(signal_hz >= 0.0, "signal_hz", signal_hz, ">= 0")?;
    ensure(noise_hz >= 0.0, "noise_hz", noise_hz, ">= 0")?;
    if signal_hz + noise_hz == 0.0 {
        return Err(ModelError::UndefinedQber);
    }
    Ok(0.5 * noise_hz / (signal_hz + noise_hz))
}

/// Signal rate needed for the QBER to sit exactly at `limit`.
fn signal_at_limit(noise_hz: f64, limit: f64) -> f64 {
    noise_hz * (0.5 - limit) / limit
}

fn loss_for_raw_signal(dv: &DvProtocolParams, det: &DetectorParams, raw_signal_hz: f64) -> f64 {
    10.0 * (raw_signal_rate(dv, det, 0.0) / raw_signal_hz).log10()
}

/// Channel loss at which the QBER reaches the protocol limit.
///
/// Returns `+inf` when there is no noise at all.
pub fn max_tolerable_loss_db(
    sky: &SkyRadiance,
    rx: &ReceiverOptics,
    det: &DetectorParams,
    dv: &DvProtocolParams,
    wavelength_m: f64,
) -> Result<f64> {
    let noise = noise_count_rate(sky, rx, det, dv, wavelength_m)?;
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(loss_for_raw_signal(dv, det, signal_at_limit(noise, dv.qber_limit)))
}

/// DV-QKD verdict at a given channel loss.
pub fn dv_feasibility(
    sky: &SkyRadiance,
    rx: &ReceiverOptics,
    det: &DetectorParams,
    dv: &DvProtocolParams,
    wavelength_m: f64,
    channel_loss_db: f64,
) -> Result<FeasibilityResult> {
    ensure(channel_loss_db >= 0.0, "channel_loss_db", channel_loss_db, ">= 0")?;
    let noise = noise_count_rate(sky, rx, det, dv, wavelength_m)?;
    let signal = raw_signal_rate(dv, det, channel_loss_db);
    let q = qber(signal, noise)?;
    let limit_loss = max_tolerable_loss_db(sky, rx, det, dv, wavelength_m)?;
    let keep = 1.0 / (1.0 + (signal + noise) * det.dead_time_s);
    Ok(FeasibilityResult {
        protocol: Protocol::Dv,
        channel_loss_db,
        signal_counts_hz: Some(signal * keep),
        noise_counts_hz: Some(noise * keep),
        qber: Some(q),
        snr: None,
        feasible: q <= dv.qber_limit,
        margin_db: limit_loss - channel_loss_db,
    })
}

pub fn cv_snr(cv: &CvProtocolParams, channel_loss_db: f64) -> Result<f64> {
    ensure(channel_loss_db >= 0.0, "channel_loss_db", channel_loss_db, ">= 0")?;
    let t = transmittance(channel_loss_db);
    Ok(t * cv.modulation_variance / (1.0 + cv.electronic_noise + t * cv.excess_noise))
}

/// Channel loss at which the SNR falls to the threshold.
///
/// `None` when even a lossless channel is below threshold.
pub fn cv_threshold_loss_db(cv: &CvProtocolParams) -> Option<f64> {
    let s = cv.snr_threshold;
    let denom = cv.modulation_variance - s * cv.excess_noise;
    if denom <= 0.0 {
        return None;
    }
    let t = s * (1.0 + cv.electronic_noise) / denom;
    (t <= 1.0).then(|| -10.0 * t.log10())
}

pub fn cv_feasibility(cv: &CvProtocolParams, channel_loss_db: f64) -> Result<FeasibilityResult> {
    let snr = cv_snr(cv, channel_loss_db)?;
    let limit_loss = cv_threshold_loss_db(cv).unwrap_or(f64::NEG_INFINITY);
    Ok(FeasibilityResult {
        protocol: Protocol::Cv,
        channel_loss_db,
        signal_counts_hz: None,
        noise_counts_hz: None,
        qber: None,
        snr: Some(snr),
        feasible: snr >= cv.snr_threshold,
        margin_db: limit_loss - channel_loss_db,
    })
}

/// Receiver solid angle that puts the DV loss threshold at `target_loss_db`.
///
/// Inverts the count chain back through the background power. Fails when
/// dark counts alone already exceed the noise budget.
pub fn calibrate_fov_solid_angle(
    target_loss_db: f64,
    sky: &SkyRadiance,
    rx: &ReceiverOptics,
    det: &DetectorParams,
    dv: &DvProtocolParams,
    wavelength_m: f64,
) -> Result<f64> {
    let gate = gate_factor(dv)?;
    let signal = raw_signal_rate(dv, det, target_loss_db);
    let noise = signal * dv.qber_limit / (0.5 - dv.qber_limit);
    let background = noise - det.dark_rate_hz * gate;
    ensure(background > 0.0, "background count budget", background, "> 0")?;
    let power = background / (gate * det.efficiency) * photon_energy(wavelength_m);
    let per_sr = sky.brightness() * rx.aperture_area() * rx.filter_bandwidth_um;
    ensure(per_sr > 0.0, "radiance x area x bandwidth", per_sr, "> 0")?;
    Ok(power / per_sr)
}

/// Outcome of the divergence solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "divergence_rad", rename_all = "snake_case")]
pub enum DivergenceSolution {
    Bounded(f64),
    /// Any divergence works (infinite loss tolerance).
    Unbounded,
    /// Infeasible even at the diffraction-limited divergence.
    NoSolution,
}

/// Widest divergence whose channel loss stays within `tolerable_loss_db`.
///
/// Bisects on the divergence override between the diffraction limit of the
/// transmitter (for the chosen method) and an expanding upper bracket.
pub fn max_feasible_divergence(link: &Link, method: Method, tolerable_loss_db: f64) -> Result<DivergenceSolution> {
    if tolerable_loss_db == f64::INFINITY {
        return Ok(DivergenceSolution::Unbounded);
    }
    let loss_at = |theta: f64| -> Result<f64> {
        let mut l = link.clone();
        l.transmitter.divergence_override_rad = Some(theta);
        Ok(l.total(method)?.channel_total)
    };
    let mut base = link.transmitter;
    base.divergence_override_rad = None;
    let mut lo = match method {
        Method::Method1 => crate::optics::diffraction_divergence(&base),
        Method::Nanobob => crate::optics::nanobob_divergence(&base),
    };
    let at_limit = loss_at(lo)?;
    if at_limit.is_nan() || at_limit > tolerable_loss_db {
        return Ok(DivergenceSolution::NoSolution);
    }
    let mut hi = lo * 2.0;
    while loss_at(hi)? <= tolerable_loss_db {
        lo = hi;
        hi *= 2.0;
        if hi > std::f64::consts::PI {
            return Ok(DivergenceSolution::Unbounded);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if loss_at(mid)? <= tolerable_loss_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DivergenceSolution::Bounded(lo))
}
