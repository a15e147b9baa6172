//! Published reference values and closed-form cross-checks through the public API.

use std::f64::consts::LN_10;

use approx::assert_relative_eq;
use hapqkd::atmosphere::{fog_rate, rain_rate, snow_rate, SkyPreset, SkyRadiance, WeatherCondition, WeatherKind};
use hapqkd::budget::Method;
use hapqkd::geometry::LinkGeometry;
use hapqkd::harness::{load_scenario, run_point, Scenario};
use hapqkd::qkd::{cv_threshold_loss_db, gate_factor, max_tolerable_loss_db};

/// Method-1 channel loss written out by hand from the reference parameters.
fn method1_by_hand(elevation_deg: f64) -> f64 {
    let (lambda, d_tx, d_rx, jitter) = (1550e-9, 0.1, 0.4, 5e-6);
    let r = 20_000.0 / elevation_deg.to_radians().sin();
    let theta = 1.22 * lambda / d_tx;
    let geo = (20.0 * ((d_tx + r * theta) / d_rx).log10()).max(0.0);
    let pointing = 80.0 / LN_10 * (jitter / theta).powi(2);
    let molecular = 0.01 * r / 1000.0;
    geo + pointing + molecular
}

/// NanoBob channel loss written out by hand from the reference parameters.
fn nanobob_by_hand(elevation_deg: f64) -> f64 {
    let (lambda, d_tx, d_rx, r0) = (1550e-9, 0.1, 0.4, 0.2);
    let r = 20_000.0 / elevation_deg.to_radians().sin();
    let theta = 2.44 * lambda / d_tx;
    let theta_atm = 2.1 * lambda / r0;
    let efficiencies: f64 = 0.8 * 0.8 * 0.8;
    10.0 * (r * r * (theta * theta + theta_atm * theta_atm) / (d_rx * d_rx * efficiencies)).log10() + 3.0
}

#[test]
fn clear_sky_losses_match_hand_evaluation() {
    for elevation in [5.0, 20.0, 45.0, 90.0] {
        let mut s = Scenario::default();
        s.geometry = LinkGeometry::new(20_000.0, elevation).unwrap();
        let r = run_point(&s).unwrap();
        assert_relative_eq!(r.method1.channel_total, method1_by_hand(elevation), max_relative = 1e-12);
        assert_relative_eq!(r.nanobob.channel_total, nanobob_by_hand(elevation), max_relative = 1e-12);
    }
}

#[test]
fn regular_and_vertical_elevation_losses() {
    let s = Scenario::default();
    let r = run_point(&s).unwrap();
    assert!((r.method1.channel_total - 12.60).abs() < 0.01);
    assert!((r.nanobob.channel_total - 21.50).abs() < 0.01);
    let v = run_point(&load_scenario(r#"{"geometry": {"elevation_deg": 90}}"#).unwrap()).unwrap();
    assert!((v.method1.channel_total - 4.18).abs() < 0.01);
    assert!((v.nanobob.channel_total - 12.18).abs() < 0.01);
    assert_eq!(v.method1.receiver, 5.2);
    assert_relative_eq!(v.method1.system_total, v.method1.channel_total + 5.2);
}

#[test]
fn visibility_one_km_rates() {
    assert_relative_eq!(fog_rate(1.0, 1550.0).unwrap(), 2.133, epsilon = 5e-4);
    assert_eq!(rain_rate(1.0).unwrap(), 2.8);
    assert_eq!(snow_rate(1.0).unwrap(), 58.0);
    assert_eq!(fog_rate(0.2, 550.0).unwrap(), 3.91 / 0.2);
}

#[test]
fn weather_adds_rate_times_slant() {
    let mut s = Scenario::default();
    let clear = run_point(&s).unwrap();
    s.weather = WeatherCondition::new(WeatherKind::Fog, 0.5);
    let fog = run_point(&s).unwrap();
    let slant = 500.0 / 20f64.to_radians().sin();
    let expected = fog_rate(0.5, 1550.0).unwrap() * slant / 1000.0;
    for m in Method::ALL {
        let added = fog.breakdown(m).channel_total - clear.breakdown(m).channel_total;
        assert_relative_eq!(added, expected, max_relative = 1e-9);
    }
}

#[test]
fn detector_gate_is_one_quarter() {
    assert_eq!(gate_factor(&Scenario::default().dv).unwrap(), 0.25);
}

#[test]
fn dv_thresholds_by_time_of_day() {
    let s = Scenario::default();
    let at = |p| {
        max_tolerable_loss_db(&SkyRadiance::preset(p), &s.receiver, &s.detector, &s.dv, s.transmitter.wavelength_m())
            .unwrap()
    };
    assert!((at(SkyPreset::Moonless) - 52.3).abs() < 0.05);
    assert!((at(SkyPreset::DayClear) - 43.0).abs() < 0.05);
    assert!((at(SkyPreset::DayHazy) - 34.0).abs() < 1.0);
    assert!((at(SkyPreset::DayCloud) - 24.0).abs() < 1.0);
}

#[test]
fn cv_threshold() {
    let l = cv_threshold_loss_db(&Scenario::default().cv).unwrap();
    // T = 0.024 * 1.1 / (10 - 0.024 * 0.03)
    let t: f64 = 0.0264 / (10.0 - 0.00072);
    assert_relative_eq!(l, -10.0 * t.log10(), max_relative = 1e-12);
    assert!((l - 25.8).abs() < 0.1);
}

#[test]
fn los_endpoints() {
    let far = LinkGeometry::new(20_000.0, 5.0).unwrap().los_distance().unwrap();
    assert_relative_eq!(far, 229_474.26, epsilon = 0.01);
    assert_eq!(LinkGeometry::new(20_000.0, 90.0).unwrap().los_distance().unwrap(), 20_000.0);
}
