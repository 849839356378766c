use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    Tree,
    Lattice,
}

/// How type 2 attacks a site that turned type 1 while an attempt was in
/// flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ClockMode {
    /// The original attempt lands at its scheduled time.
    #[default]
    Static,
    /// The attempt is redrawn from the type-1 occupation time with a fresh
    /// `T3` clock. Same law as `Static` by memorylessness. Lattice only.
    Resample,
}

/// Truncated type-1 clocks: on a semi-marked edge a type-1 clock above
/// `cutoff` is replaced by `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub cutoff: f64,
    pub semi_mark_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Tree degree, or lattice dimension.
    pub d: usize,
    /// Rate of type-2 clocks.
    pub lambda: f64,
    /// Rate of conversion clocks; zero disables conversion.
    pub rho: f64,
    pub topology: TopologyKind,
    pub clock_mode: ClockMode,
    pub truncation: Option<Truncation>,
}

impl ModelParams {
    pub fn tree(d: usize, lambda: f64, rho: f64) -> Result<Self> {
        Self {
            d,
            lambda,
            rho,
            topology: TopologyKind::Tree,
            clock_mode: ClockMode::Static,
            truncation: None,
        }
        .validated()
    }

    /// `d = 1` is accepted as a degenerate test case.
    pub fn lattice(d: usize, lambda: f64, rho: f64) -> Result<Self> {
        Self {
            d,
            lambda,
            rho,
            topology: TopologyKind::Lattice,
            clock_mode: ClockMode::Static,
            truncation: None,
        }
        .validated()
    }

    pub fn with_mode(mut self, mode: ClockMode) -> Result<Self> {
        self.clock_mode = mode;
        self.validated()
    }

    pub fn with_truncation(mut self, cutoff: f64, semi_mark_prob: f64) -> Result<Self> {
        self.truncation = Some(Truncation {
            cutoff,
            semi_mark_prob,
        });
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return config(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            ));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return config(format!(
                "rho must be nonnegative and finite, got {}",
                self.rho
            ));
        }
        match self.topology {
            TopologyKind::Tree => {
                if !(3..=255).contains(&self.d) {
                    return config(format!("tree degree must lie in 3..=255, got {}", self.d));
                }
                if self.clock_mode == ClockMode::Resample {
                    return config("Resample clock mode is only defined on the lattice");
                }
            }
            TopologyKind::Lattice => {
                if !(1..=8).contains(&self.d) {
                    return config(format!(
                        "lattice dimension must lie in 1..=8, got {}",
                        self.d
                    ));
                }
            }
        }
        if let Some(t) = self.truncation {
            if !(t.cutoff > 0.0) {
                return config(format!(
                    "truncation cutoff must be positive, got {}",
                    t.cutoff
                ));
            }
            if !(0.0..=1.0).contains(&t.semi_mark_prob) {
                return config(format!(
                    "semi-mark probability must lie in [0, 1], got {}",
                    t.semi_mark_prob
                ));
            }
        }
        Ok(())
    }
}
