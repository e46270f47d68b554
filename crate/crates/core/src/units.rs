use serde::{Deserialize, Serialize};

/// Physical scale of `ħ` and the particle mass.
///
/// All computations run with `ħ = m = 1`. Lengths and wavenumbers are
/// unchanged by the mapping; potential heights map as `V' = m V / ħ²` and
/// times as `t' = ħ t / m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units { hbar: 1.0, mass: 1.0 }
    }
}

impl Units {
    pub fn new(hbar: f64, mass: f64) -> Option<Self> {
        (hbar > 0.0 && mass > 0.0 && hbar.is_finite() && mass.is_finite())
            .then_some(Units { hbar, mass })
    }

    pub fn potential_to_internal(&self, v: f64) -> f64 {
        v * self.mass / (self.hbar * self.hbar)
    }

    pub fn time_to_internal(&self, t: f64) -> f64 {
        t * self.hbar / self.mass
    }

    pub fn time_from_internal(&self, t: f64) -> f64 {
        t * self.mass / self.hbar
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_round_trip() {
        let u = Units::new(2.0, 3.0).unwrap();
        let t = 1.75;
        assert!((u.time_from_internal(u.time_to_internal(t)) - t).abs() < 1e-15);
        assert_eq!(u.potential_to_internal(4.0), 3.0);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(Units::new(0.0, 1.0).is_none());
        assert!(Units::new(1.0, -1.0).is_none());
    }
}
