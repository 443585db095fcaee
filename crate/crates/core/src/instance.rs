//! Problem data for unit commitment: generating units, the demand profile, and
//! the binary on/off schedule.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Current version of the instance file format.
pub const INSTANCE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("failed to read instance file {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed instance document")]
    Parse(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CommitmentError {
    #[error("commitment shape {rows}x{cols} does not match instance {units}x{periods}")]
    Shape {
        rows: usize,
        cols: usize,
        units: usize,
        periods: usize,
    },
    #[error("non-binary entry {value} at (unit {unit}, period {period})")]
    NonBinary {
        unit: usize,
        period: usize,
        value: i64,
    },
}

/// One thermal generating unit. Output bounds and cost rate are time-invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitSpec {
    pub id: usize,
    /// Minimum output when online, MW.
    pub p_min: f64,
    /// Maximum output when online, MW.
    pub p_max: f64,
    /// Linear generation cost, $/MWh.
    pub cost_rate: f64,
    /// Minimum consecutive on-periods.
    pub min_up: u32,
    /// Minimum consecutive off-periods.
    pub min_down: u32,
    /// State before the first period. Defaults to off.
    #[serde(default)]
    pub initial_state: bool,
    /// Periods the initial state has already lasted. Defaults to `min_down`,
    /// which leaves an initially-off unit free at period 0.
    #[serde(default)]
    pub initial_duration: Option<u32>,
}

impl UnitSpec {
    pub fn initial_duration(&self) -> u32 {
        self.initial_duration.unwrap_or(self.min_down)
    }

    /// Minimum duration that applies to a run in `on` state.
    pub fn min_duration(&self, on: bool) -> u32 {
        if on {
            self.min_up
        } else {
            self.min_down
        }
    }

    fn validate(&self) -> Result<(), String> {
        let id = self.id;
        let finite = [self.p_min, self.p_max, self.cost_rate]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(format!("unit {id}: non-finite parameter"));
        }
        if self.p_min < 0.0 {
            return Err(format!("unit {id}: p_min {} is negative", self.p_min));
        }
        if self.p_min > self.p_max {
            return Err(format!(
                "unit {id}: p_min {} exceeds p_max {}",
                self.p_min, self.p_max
            ));
        }
        if self.cost_rate < 0.0 {
            return Err(format!(
                "unit {id}: cost_rate {} is negative",
                self.cost_rate
            ));
        }
        if self.min_up < 1 {
            return Err(format!("unit {id}: min_up must be at least 1"));
        }
        if self.min_down < 1 {
            return Err(format!("unit {id}: min_down must be at least 1"));
        }
        if self.initial_duration() < 1 {
            return Err(format!("unit {id}: initial_duration must be at least 1"));
        }
        Ok(())
    }
}

/// A complete unit commitment problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UcInstance {
    pub version: u32,
    /// Declared horizon length; must equal `demand.len()` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<usize>,
    #[serde(default = "default_period_hours")]
    pub period_hours: f64,
    /// Demand per period, MW.
    pub demand: Vec<f64>,
    pub units: Vec<UnitSpec>,
}

fn default_period_hours() -> f64 {
    1.0
}

impl UcInstance {
    /// Builds and validates an instance with one-hour periods.
    pub fn new(units: Vec<UnitSpec>, demand: Vec<f64>) -> Result<Self, InstanceError> {
        let instance = UcInstance {
            version: INSTANCE_FORMAT_VERSION,
            periods: None,
            period_hours: 1.0,
            demand,
            units,
        };
        instance.validate()?;
        Ok(instance.normalized())
    }

    fn normalized(mut self) -> Self {
        self.periods = Some(self.demand.len());
        for unit in &mut self.units {
            unit.initial_duration = Some(unit.initial_duration());
        }
        self
    }

    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    pub fn num_periods(&self) -> usize {
        self.demand.len()
    }

    pub fn total_capacity(&self) -> f64 {
        self.units.iter().map(|u| u.p_max).sum()
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let invalid = |msg: String| Err(InstanceError::Invalid(msg));
        if self.version != INSTANCE_FORMAT_VERSION {
            return invalid(format!(
                "unsupported version {} (expected {INSTANCE_FORMAT_VERSION})",
                self.version
            ));
        }
        if !(self.period_hours.is_finite() && self.period_hours > 0.0) {
            return invalid(format!(
                "period_hours {} must be positive",
                self.period_hours
            ));
        }
        if self.units.is_empty() {
            return invalid("instance has no units".into());
        }
        if self.demand.is_empty() {
            return invalid("instance has no periods".into());
        }
        if let Some(declared) = self.periods {
            if declared != self.demand.len() {
                return invalid(format!(
                    "periods declares T={declared} but demand has {} entries",
                    self.demand.len()
                ));
            }
        }
        for (t, d) in self.demand.iter().enumerate() {
            if !d.is_finite() || *d < 0.0 {
                return invalid(format!("demand[{t}] = {d} must be finite and non-negative"));
            }
        }
        for (pos, unit) in self.units.iter().enumerate() {
            if unit.id != pos {
                return invalid(format!("unit at position {pos} has id {}", unit.id));
            }
            unit.validate().map_err(InstanceError::Invalid)?;
        }
        Ok(())
    }

    /// Parses and validates an instance document. Defaulted fields are made
    /// explicit so a stored copy reloads to an equal value.
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let instance: UcInstance = serde_json::from_str(text)?;
        instance.validate()?;
        Ok(instance.normalized())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Checks that `commitment` is N×T; entries are binary by construction.
    pub fn check_commitment(&self, commitment: &CommitmentMatrix) -> Result<(), CommitmentError> {
        if commitment.num_units() != self.num_units()
            || commitment.num_periods() != self.num_periods()
        {
            return Err(CommitmentError::Shape {
                rows: commitment.num_units(),
                cols: commitment.num_periods(),
                units: self.num_units(),
                periods: self.num_periods(),
            });
        }
        Ok(())
    }
}

/// Current on/off state of a unit and how long it has held, starting from the
/// unit's initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunState {
    pub on: bool,
    pub duration: u32,
}

impl RunState {
    pub fn initial(unit: &UnitSpec) -> Self {
        RunState {
            on: unit.initial_state,
            duration: unit.initial_duration(),
        }
    }

    /// The state the unit is forced to keep, if its current run is still
    /// shorter than the applicable minimum.
    pub fn locked(&self, unit: &UnitSpec) -> Option<bool> {
        (self.duration < unit.min_duration(self.on)).then_some(self.on)
    }

    pub fn advance(&mut self, on: bool) {
        if on == self.on {
            self.duration = self.duration.saturating_add(1);
        } else {
            *self = RunState { on, duration: 1 };
        }
    }
}

/// Reads and validates an instance file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<UcInstance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    UcInstance::from_json(&text)
}

pub fn store_instance(instance: &UcInstance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    std::fs::write(path, instance.to_json()).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Validates a raw integer grid (rows = units) and converts it to a commitment.
pub fn validate_commitment_shape(
    instance: &UcInstance,
    grid: &[Vec<i64>],
) -> Result<CommitmentMatrix, CommitmentError> {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    let shape_err = |cols| CommitmentError::Shape {
        rows,
        cols,
        units: instance.num_units(),
        periods: instance.num_periods(),
    };
    if rows != instance.num_units() {
        return Err(shape_err(cols));
    }
    if let Some(row) = grid.iter().find(|r| r.len() != instance.num_periods()) {
        return Err(shape_err(row.len()));
    }
    for (unit, row) in grid.iter().enumerate() {
        for (period, &value) in row.iter().enumerate() {
            if value != 0 && value != 1 {
                return Err(CommitmentError::NonBinary {
                    unit,
                    period,
                    value,
                });
            }
        }
    }
    let mut out = CommitmentMatrix::all_off(rows, cols);
    for (unit, row) in grid.iter().enumerate() {
        for (period, &value) in row.iter().enumerate() {
            out.set(unit, period, value == 1);
        }
    }
    Ok(out)
}

/// Binary on/off decisions, stored unit-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CommitmentMatrix {
    units: usize,
    periods: usize,
    bits: Vec<bool>,
}

impl CommitmentMatrix {
    pub fn all_off(units: usize, periods: usize) -> Self {
        CommitmentMatrix {
            units,
            periods,
            bits: vec![false; units * periods],
        }
    }

    /// Builds from a unit-major flattened vector of length `units * periods`.
    pub fn from_flat(units: usize, periods: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), units * periods, "flat commitment length");
        CommitmentMatrix {
            units,
            periods,
            bits,
        }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let periods = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == periods),
            "ragged commitment rows"
        );
        CommitmentMatrix {
            units: rows.len(),
            periods,
            bits: rows.concat(),
        }
    }

    pub fn num_units(&self) -> usize {
        self.units
    }

    pub fn num_periods(&self) -> usize {
        self.periods
    }

    #[inline]
    pub fn is_on(&self, unit: usize, period: usize) -> bool {
        self.bits[unit * self.periods + period]
    }

    #[inline]
    pub fn set(&mut self, unit: usize, period: usize, on: bool) {
        self.bits[unit * self.periods + period] = on;
    }

    pub fn row(&self, unit: usize) -> &[bool] {
        &self.bits[unit * self.periods..(unit + 1) * self.periods]
    }

    pub fn as_flat(&self) -> &[bool] {
        &self.bits
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.units)
            .map(|i| self.row(i).iter().map(|&b| b as u8).collect())
            .collect()
    }
}

impl fmt::Debug for CommitmentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CommitmentMatrix {}x{}", self.units, self.periods)?;
        for i in 0..self.units {
            let row: String = self
                .row(i)
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

impl Serialize for CommitmentMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CommitmentMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<u8>> = Vec::deserialize(deserializer)?;
        let periods = rows.first().map_or(0, Vec::len);
        let mut bits = Vec::with_capacity(rows.len() * periods);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != periods {
                return Err(serde::de::Error::custom(format!(
                    "row {i} has wrong length"
                )));
            }
            for (t, &v) in row.iter().enumerate() {
                match v {
                    0 => bits.push(false),
                    1 => bits.push(true),
                    _ => {
                        return Err(serde::de::Error::custom(format!(
                            "non-binary entry {v} at ({i}, {t})"
                        )))
                    }
                }
            }
        }
        Ok(CommitmentMatrix {
            units: rows.len(),
            periods,
            bits,
        })
    }
}
