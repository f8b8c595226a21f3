//! Runtime, fit-count and CO2 accounting.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::learners::FitTally;

pub const DEFAULT_POWER_WATTS: f64 = 65.0;
pub const DEFAULT_CARBON_INTENSITY: f64 = 475.0;

/// Energy model turning wall-clock time into grams of CO2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourceModel {
    pub power_watts: f64,
    pub carbon_intensity_g_per_kwh: f64,
}

impl Default for ResourceModel {
    fn default() -> Self {
        Self {
            power_watts: DEFAULT_POWER_WATTS,
            carbon_intensity_g_per_kwh: DEFAULT_CARBON_INTENSITY,
        }
    }
}

impl ResourceModel {
    pub fn co2_grams(&self, wall_clock_seconds: f64) -> f64 {
        (wall_clock_seconds / 3600.0) * (self.power_watts / 1000.0) * self.carbon_intensity_g_per_kwh
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub wall_clock_seconds: f64,
    pub model_fits: u64,
    pub co2_grams: f64,
}

impl ResourceReport {
    pub fn new(wall_clock_seconds: f64, model_fits: u64, model: &ResourceModel) -> Self {
        Self {
            wall_clock_seconds,
            model_fits,
            co2_grams: model.co2_grams(wall_clock_seconds),
        }
    }

    pub fn from_measurement(m: Measurement, model: &ResourceModel) -> Self {
        Self::new(m.seconds, m.fits, model)
    }
}

/// Raw time and fit count for some piece of strategy-owned work.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub seconds: f64,
    pub fits: u64,
}

impl Measurement {
    pub fn merge(&mut self, other: Measurement) {
        self.seconds += other.seconds;
        self.fits += other.fits;
    }
}

/// Runs `work` with a fresh fit tally, timing it.
pub fn measure<T>(work: impl FnOnce(&mut FitTally) -> T) -> (T, Measurement) {
    let mut tally = FitTally::default();
    let start = Instant::now();
    let out = work(&mut tally);
    let seconds = start.elapsed().as_secs_f64();
    (
        out,
        Measurement {
            seconds,
            fits: tally.fits,
        },
    )
}

/// Selection and evaluation accounting for one strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyResources {
    /// Inner-loop model selection only.
    pub selection: ResourceReport,
    /// Refits on outer-train, outer-test scoring and the final refit.
    pub evaluation: ResourceReport,
    pub total: ResourceReport,
}

impl StrategyResources {
    pub fn new(selection: Measurement, evaluation: Measurement, model: &ResourceModel) -> Self {
        let mut total = selection;
        total.merge(evaluation);
        Self {
            selection: ResourceReport::from_measurement(selection, model),
            evaluation: ResourceReport::from_measurement(evaluation, model),
            total: ResourceReport::from_measurement(total, model),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceSummary {
    pub cv: StrategyResources,
    pub mv: StrategyResources,
}
