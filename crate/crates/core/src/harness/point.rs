//! Full evaluation of one scenario.

use serde::Serialize;
use thiserror::Error;

use crate::atmosphere::{molecular_rate, weather_rate};
use crate::budget::{LossBreakdown, Method};
use crate::error::ModelError;
use crate::geometry::{ground_footprint_diameter, slant_through_layer};
use crate::optics::{beam_wander_variance, diffraction_divergence, receiver_fov, FieldOfView};
use crate::qkd::{
    cv_feasibility, cv_threshold_loss_db, dv_feasibility, max_feasible_divergence, max_tolerable_loss_db,
    DivergenceSolution, FeasibilityResult, Protocol,
};

use super::scenario::Scenario;

/// A model error tagged with the module that raised it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{module}: {source}")]
pub struct RunError {
    pub module: &'static str,
    #[source]
    pub source: ModelError,
}

fn tag(module: &'static str) -> impl Fn(ModelError) -> RunError {
    move |source| RunError { module, source }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub los_m: f64,
    pub weather_slant_m: Option<f64>,
    pub footprint_diameter_m: f64,
    pub beam_wander_variance_m2: f64,
    pub fov: FieldOfView,
    pub method1: LossBreakdown,
    pub nanobob: LossBreakdown,
    /// Method whose channel loss feeds `dv` and `cv`.
    pub method: Method,
    pub dv: FeasibilityResult,
    pub cv: FeasibilityResult,
}

impl PointReport {
    pub fn breakdown(&self, method: Method) -> &LossBreakdown {
        match method {
            Method::Method1 => &self.method1,
            Method::Nanobob => &self.nanobob,
        }
    }
}

pub fn run_point(scenario: &Scenario) -> Result<PointReport, RunError> {
    let link = scenario.link();
    let los_m = link.los_m().map_err(tag("geometry"))?;
    let weather_slant_m = scenario
        .weather
        .layer()
        .map(|layer| slant_through_layer(layer, scenario.geometry.elevation_deg))
        .transpose()
        .map_err(tag("geometry"))?;
    let tx = &scenario.transmitter;
    let footprint_diameter_m =
        ground_footprint_diameter(tx.aperture_m, los_m, diffraction_divergence(tx)).map_err(tag("geometry"))?;
    let beam_wander_variance_m2 =
        beam_wander_variance(los_m, tx, scenario.turbulence.fried_parameter_m).map_err(tag("optics"))?;
    let fov = receiver_fov(&scenario.receiver).map_err(tag("optics"))?;
    molecular_rate(&scenario.molecular_absorption, tx.wavelength_nm).map_err(tag("atmosphere"))?;
    weather_rate(&scenario.weather, tx.wavelength_nm).map_err(tag("atmosphere"))?;
    let method1 = link.total(Method::Method1).map_err(tag("budget"))?;
    let nanobob = link.total(Method::Nanobob).map_err(tag("budget"))?;
    let loss = match scenario.method {
        Method::Method1 => method1.channel_total,
        Method::Nanobob => nanobob.channel_total,
    };
    let dv = dv_feasibility(
        &scenario.sky,
        &scenario.receiver,
        &scenario.detector,
        &scenario.dv,
        tx.wavelength_m(),
        loss,
    )
    .map_err(tag("qkd"))?;
    let cv = cv_feasibility(&scenario.cv, loss).map_err(tag("qkd"))?;
    Ok(PointReport {
        los_m,
        weather_slant_m,
        footprint_diameter_m,
        beam_wander_variance_m2,
        fov,
        method1,
        nanobob,
        method: scenario.method,
        dv,
        cv,
    })
}

/// Largest channel loss the protocol tolerates.
///
/// `None` when no loss is tolerable; `Some(inf)` when any loss is.
pub fn solve_max_loss(scenario: &Scenario, protocol: Protocol) -> Result<Option<f64>, RunError> {
    match protocol {
        Protocol::Dv => max_tolerable_loss_db(
            &scenario.sky,
            &scenario.receiver,
            &scenario.detector,
            &scenario.dv,
            scenario.transmitter.wavelength_m(),
        )
        .map(|l| (l >= 0.0).then_some(l))
        .map_err(tag("qkd")),
        Protocol::Cv => Ok(cv_threshold_loss_db(&scenario.cv)),
    }
}

/// Widest beam divergence the protocol tolerates with this scenario's link and method.
pub fn solve_max_divergence(scenario: &Scenario, protocol: Protocol) -> Result<DivergenceSolution, RunError> {
    let Some(limit) = solve_max_loss(scenario, protocol)? else {
        return Ok(DivergenceSolution::NoSolution);
    };
    max_feasible_divergence(&scenario.link(), scenario.method, limit).map_err(tag("budget"))
}
