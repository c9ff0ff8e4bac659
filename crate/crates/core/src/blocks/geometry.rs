use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rigid cavity of proper length `delta` whose centre has proper
/// acceleration `h / delta`.
///
/// In the accelerated frame's Rindler coordinates the walls sit at
/// `a = δ(1/h - 1/2)` and `b = δ(1/h + 1/2)`. Negative `h` mirrors the
/// cavity into the left wedge, which describes deceleration.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    pub delta: f64,
    pub h: f64,
}

impl CavityGeometry {
    pub fn new(delta: f64, h: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Geometry(format!("cavity length must be positive, got {delta}")));
        }
        if !(h != 0.0 && h.abs() < 2.0) {
            return Err(Error::Geometry(format!("need 0 < |h| < 2 to keep both walls off the horizon, got {h}")));
        }
        Ok(Self { delta, h })
    }

    pub fn inner_wall(&self) -> f64 {
        self.delta * (1.0 / self.h - 0.5)
    }

    pub fn outer_wall(&self) -> f64 {
        self.delta * (1.0 / self.h + 0.5)
    }

    /// `ln(b/a) = 2 atanh(h/2)`, the cavity length in logarithmic coordinates.
    pub fn log_length(&self) -> f64 {
        2.0 * (0.5 * self.h).atanh()
    }

    /// Converts proper time at the centre into the dimensionless duration
    /// `u = hτ / (4δ atanh(h/2))`.
    pub fn proper_time_to_u(&self, tau: f64) -> f64 {
        self.h * tau / (4.0 * self.delta * (0.5 * self.h).atanh())
    }
}
