//! The lazy random clock field.

use std::collections::HashMap;

use crate::rng::{keyed_bits, open_unit, stream_id};

use super::clock::{ClockKey, ClockKind};

/// Source of the i.i.d. randomness behind a trial.
///
/// `uniform` must be a pure function of the key. `exp` defaults to the
/// inverse-CDF transform of `uniform`, so an `Exp(rate)` value equals the
/// unit-rate value divided by `rate` on the same key.
pub trait ClockSource: Sync {
    /// A value in the open interval (0, 1).
    fn uniform(&self, key: &ClockKey) -> f64;

    /// An `Exp(rate)` value; `+inf` when `rate == 0`.
    #[inline]
    fn exp(&self, key: &ClockKey, rate: f64) -> f64 {
        if rate == 0.0 {
            return f64::INFINITY;
        }
        -self.uniform(key).ln() / rate
    }
}

impl<T: ClockSource + ?Sized> ClockSource for &T {
    fn uniform(&self, key: &ClockKey) -> f64 {
        (**self).uniform(key)
    }

    fn exp(&self, key: &ClockKey, rate: f64) -> f64 {
        (**self).exp(key, rate)
    }
}

/// Counter-based field: each value is a keyed hash of
/// `(master_seed, trial_index, kind, location)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomField {
    pub master_seed: u64,
    pub trial_index: u64,
    stream: u64,
}

impl RandomField {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
            stream: stream_id(master_seed, trial_index),
        }
    }

    /// The 64-bit stream identifier all keys of this field are hashed under.
    pub fn stream_id(&self) -> u64 {
        self.stream
    }
}

impl ClockSource for RandomField {
    #[inline]
    fn uniform(&self, key: &ClockKey) -> f64 {
        open_unit(keyed_bits(self.stream, key.kind.tag(), key.loc()))
    }
}

/// A field with hand-set values, for constructing forced trajectories.
///
/// Lookup order: per-key override, per-kind default, base field. Forced
/// `exp` values are returned as is, whatever the rate (except that a zero
/// rate still yields `+inf`).
#[derive(Debug, Clone)]
pub struct ForcedField<F> {
    base: F,
    values: HashMap<ClockKey, f64>,
    defaults: HashMap<ClockKind, f64>,
}

impl<F: ClockSource> ForcedField<F> {
    pub fn new(base: F) -> Self {
        Self {
            base,
            values: HashMap::new(),
            defaults: HashMap::new(),
        }
    }

    pub fn with_default(mut self, kind: ClockKind, value: f64) -> Self {
        self.defaults.insert(kind, value);
        self
    }

    pub fn set(&mut self, key: ClockKey, value: f64) -> &mut Self {
        self.values.insert(key, value);
        self
    }

    fn forced(&self, key: &ClockKey) -> Option<f64> {
        self.values
            .get(key)
            .or_else(|| self.defaults.get(&key.kind))
            .copied()
    }
}

impl<F: ClockSource> ClockSource for ForcedField<F> {
    fn uniform(&self, key: &ClockKey) -> f64 {
        self.forced(key).unwrap_or_else(|| self.base.uniform(key))
    }

    fn exp(&self, key: &ClockKey, rate: f64) -> f64 {
        if rate == 0.0 {
            return f64::INFINITY;
        }
        match self.forced(key) {
            Some(v) => v,
            None => self.base.exp(key, rate),
        }
    }
}
