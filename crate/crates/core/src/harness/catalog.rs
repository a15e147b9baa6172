//! Read-only catalog of public-domain high-altitude platforms.
//!
//! Text columns are kept verbatim; missing cells are `None`. The numeric
//! columns take the upper end of quoted ranges and are `None` when the
//! source gives no number (e.g. "6 persons", "LEO/SSO", "Tethered").

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const PLATFORMS_CSV: &str = include_str!("../../assets/platforms.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlatformClass {
    FixedWing,
    Balloon,
    Airship,
    Tethered,
}

impl PlatformClass {
    pub fn name(self) -> &'static str {
        match self {
            PlatformClass::FixedWing => "fixed_wing",
            PlatformClass::Balloon => "balloon",
            PlatformClass::Airship => "airship",
            PlatformClass::Tethered => "tethered",
        }
    }
}

impl std::str::FromStr for PlatformClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "fixed_wing" => Ok(PlatformClass::FixedWing),
            "balloon" => Ok(PlatformClass::Balloon),
            "airship" => Ok(PlatformClass::Airship),
            "tethered" => Ok(PlatformClass::Tethered),
            _ => Err(format!("unknown platform class `{s}` (expected fixed-wing, balloon, airship or tethered)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformRecord {
    pub class: PlatformClass,
    pub company: String,
    pub name: String,
    pub platform_type: String,
    pub aircraft_weight: Option<String>,
    pub payload_capacity: Option<String>,
    pub payload_power: Option<String>,
    pub dimensions: Option<String>,
    pub mobility: Option<String>,
    pub flight_duration: Option<String>,
    pub altitude: Option<String>,
    pub availability: Option<String>,
    pub altitude_km: Option<f64>,
    pub payload_kg: Option<f64>,
    pub payload_power_w: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CatalogFilter {
    pub class: Option<PlatformClass>,
    /// Exact, case-insensitive platform name.
    pub name: Option<String>,
    /// Records without a numeric payload never pass this filter.
    pub min_payload_kg: Option<f64>,
}

impl CatalogFilter {
    fn accepts(&self, r: &PlatformRecord) -> bool {
        self.class.is_none_or(|c| r.class == c)
            && self.name.as_ref().is_none_or(|n| r.name.eq_ignore_ascii_case(n))
            && self
                .min_payload_kg
                .is_none_or(|min| r.payload_kg.is_some_and(|p| p >= min))
    }
}

fn records() -> &'static [PlatformRecord] {
    static RECORDS: OnceLock<Vec<PlatformRecord>> = OnceLock::new();
    RECORDS.get_or_init(|| {
        csv::Reader::from_reader(PLATFORMS_CSV.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .expect("embedded platform table is well formed")
    })
}

pub fn catalog(filter: &CatalogFilter) -> Vec<PlatformRecord> {
    records().iter().filter(|r| filter.accepts(r)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zephyr_s() {
        let hits = catalog(&CatalogFilter {
            class: Some(PlatformClass::FixedWing),
            name: Some("Zephyr S".into()),
            ..Default::default()
        });
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].altitude_km, Some(21.0));
        assert_eq!(hits[0].payload_kg, Some(2.0));
        assert_eq!(hits[0].aircraft_weight.as_deref(), Some("75 kg"));
    }

    #[test]
    fn heavy_payloads() {
        let hits = catalog(&CatalogFilter {
            min_payload_kg: Some(250.0),
            ..Default::default()
        });
        let names: Vec<&str> = hits.iter().map(|r| r.name.as_str()).collect();
        for want in ["Stratobus", "Helios", "Global Hawk"] {
            assert!(names.contains(&want), "{want} missing from {names:?}");
        }
        assert!(hits.iter().all(|r| r.payload_kg.unwrap() >= 250.0));
    }

    #[test]
    fn empty_filter_returns_every_row() {
        let rows = PLATFORMS_CSV.lines().filter(|l| !l.is_empty()).count() - 1;
        assert_eq!(catalog(&CatalogFilter::default()).len(), rows);
    }

    #[test]
    fn absent_cells_stay_absent() {
        let sunglider = &catalog(&CatalogFilter {
            name: Some("sunglider".into()),
            ..Default::default()
        })[0];
        assert_eq!(sunglider.payload_capacity, None);
        assert_eq!(sunglider.payload_kg, None);
        let bloon = &catalog(&CatalogFilter {
            name: Some("Bloon".into()),
            ..Default::default()
        })[0];
        assert_eq!(bloon.payload_capacity.as_deref(), Some("6 persons"));
        assert_eq!(bloon.payload_kg, None);
    }

    #[test]
    fn class_parsing() {
        assert_eq!("fixed-wing".parse::<PlatformClass>(), Ok(PlatformClass::FixedWing));
        assert!("rocket".parse::<PlatformClass>().is_err());
    }
}
