//! Slant-path geometry between a HAP and a ground station.
//!
//! The Earth is treated as flat: the slant range is the altitude divided by
//! the sine of the elevation angle, even at low elevations.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Platform altitude and elevation angle seen from the ground station.
///
/// Angles are in degrees at this boundary; everything else is SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkGeometry {
    pub hap_altitude_m: f64,
    pub elevation_deg: f64,
}

impl Default for LinkGeometry {
    fn default() -> Self {
        Self {
            hap_altitude_m: 20_000.0,
            elevation_deg: 20.0,
        }
    }
}

impl LinkGeometry {
    pub fn new(hap_altitude_m: f64, elevation_deg: f64) -> Result<Self> {
        let geom = Self {
            hap_altitude_m,
            elevation_deg,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Geometry whose line of sight has the given length.
    pub fn from_los_distance(hap_altitude_m: f64, los_m: f64) -> Result<Self> {
        ensure(hap_altitude_m > 0.0, "hap_altitude_m", hap_altitude_m, "> 0")?;
        ensure(
            los_m >= hap_altitude_m && los_m.is_finite(),
            "los_m",
            los_m,
            ">= hap altitude",
        )?;
        Self::new(hap_altitude_m, (hap_altitude_m / los_m).asin().to_degrees())
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.hap_altitude_m > 0.0 && self.hap_altitude_m.is_finite(),
            "hap_altitude_m",
            self.hap_altitude_m,
            "> 0",
        )?;
        check_elevation(self.elevation_deg)
    }

    pub fn elevation_rad(&self) -> f64 {
        self.elevation_deg.to_radians()
    }

    pub fn los_distance(&self) -> Result<f64> {
        los_distance(self)
    }
}

/// Top of the weather layer (fog, rain or snow) above the ground station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherLayer {
    pub top_altitude_m: f64,
}

fn check_elevation(elevation_deg: f64) -> Result<()> {
    ensure(
        elevation_deg > 0.0 && elevation_deg <= 90.0,
        "elevation_deg",
        elevation_deg,
        "0 < elevation <= 90",
    )
}

/// Line-of-sight distance `H / sin(elevation)` in meters.
pub fn los_distance(geom: &LinkGeometry) -> Result<f64> {
    geom.validate()?;
    Ok(geom.hap_altitude_m / geom.elevation_rad().sin())
}

/// Path length through a weather layer, `H_w / sin(elevation)` in meters.
pub fn slant_through_layer(layer: WeatherLayer, elevation_deg: f64) -> Result<f64> {
    ensure(
        layer.top_altitude_m > 0.0 && layer.top_altitude_m.is_finite(),
        "layer_top_altitude_m",
        layer.top_altitude_m,
        "> 0",
    )?;
    check_elevation(elevation_deg)?;
    Ok(layer.top_altitude_m / elevation_deg.to_radians().sin())
}

/// Full diameter of the beam on the ground: `D_tx + R * theta`.
pub fn ground_footprint_diameter(tx_aperture_m: f64, los_m: f64, divergence_rad: f64) -> Result<f64> {
    ensure(tx_aperture_m >= 0.0, "tx_aperture_m", tx_aperture_m, ">= 0")?;
    ensure(los_m >= 0.0, "los_m", los_m, ">= 0")?;
    ensure(divergence_rad >= 0.0, "divergence_rad", divergence_rad, ">= 0")?;
    Ok(tx_aperture_m + los_m * divergence_rad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn los_examples() {
        let g = |e| LinkGeometry::new(20_000.0, e).unwrap().los_distance().unwrap();
        assert_eq!(g(90.0), 20_000.0);
        assert_relative_eq!(g(30.0), 40_000.0, max_relative = 1e-12);
        // 20 km / sin 5 deg; the quoted range tops out at ~230 km.
        assert_relative_eq!(g(5.0), 229_474.264_913_397, max_relative = 1e-12);
    }

    #[test]
    fn elevation_out_of_range() {
        for e in [0.0, -5.0, 90.5, 200.0, f64::NAN] {
            assert!(LinkGeometry::new(20_000.0, e).is_err(), "{e}");
        }
        assert!(LinkGeometry::new(0.0, 45.0).is_err());
    }

    #[test]
    fn layer_examples() {
        let s = |h, e| slant_through_layer(WeatherLayer { top_altitude_m: h }, e).unwrap();
        assert_eq!(s(500.0, 90.0), 500.0);
        assert_relative_eq!(s(5_000.0, 30.0), 10_000.0, max_relative = 1e-12);
        assert_relative_eq!(s(500.0, 5.0), 5_736.86, max_relative = 1e-6);
        assert!(slant_through_layer(WeatherLayer { top_altitude_m: 0.0 }, 30.0).is_err());
        assert!(slant_through_layer(WeatherLayer { top_altitude_m: -1.0 }, 30.0).is_err());
    }

    #[test]
    fn footprint_examples() {
        assert_relative_eq!(ground_footprint_diameter(0.1, 20_000.0, 1e-3).unwrap(), 20.1, max_relative = 1e-12);
        assert_relative_eq!(ground_footprint_diameter(0.1, 20_000.0, 3e-3).unwrap(), 60.1, max_relative = 1e-12);
        assert_eq!(ground_footprint_diameter(0.1, 1e6, 0.0).unwrap(), 0.1);
        assert!(ground_footprint_diameter(0.1, -1.0, 1e-3).is_err());
    }

    #[test]
    fn from_los_roundtrip() {
        let g = LinkGeometry::from_los_distance(20_000.0, 60_000.0).unwrap();
        assert_relative_eq!(g.los_distance().unwrap(), 60_000.0, max_relative = 1e-12);
        assert!(LinkGeometry::from_los_distance(20_000.0, 19_000.0).is_err());
    }

    proptest! {
        #[test]
        fn los_decreasing_in_elevation(h in 1.0..50_000.0f64, a in 0.1..89.0f64, d in 0.01..1.0f64) {
            let lo = LinkGeometry::new(h, a).unwrap().los_distance().unwrap();
            let hi = LinkGeometry::new(h, a + d).unwrap().los_distance().unwrap();
            prop_assert!(hi < lo);
            prop_assert!(lo >= h);
        }

        #[test]
        fn layer_agrees_with_los(h in 1.0..50_000.0f64, a in 0.1..90.0f64) {
            let layer = slant_through_layer(WeatherLayer { top_altitude_m: h }, a).unwrap();
            let los = LinkGeometry::new(h, a).unwrap().los_distance().unwrap();
            prop_assert_eq!(layer, los);
        }

        #[test]
        fn footprint_affine(d in 0.0..1.0f64, r in 0.0..3e5f64, t in 0.0..0.01f64) {
            let base = ground_footprint_diameter(d, r, t).unwrap();
            let doubled_r = ground_footprint_diameter(d, 2.0 * r, t).unwrap();
            prop_assert!((doubled_r - base - r * t).abs() <= 1e-9 * (1.0 + base));
            let doubled_t = ground_footprint_diameter(d, r, 2.0 * t).unwrap();
            prop_assert!((doubled_t - base - r * t).abs() <= 1e-9 * (1.0 + base));
        }
    }
}
