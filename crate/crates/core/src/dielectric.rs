//! Effective permittivity of the wet porous layer and the resulting
//! capacitance.
//!
//! Logarithmic (Lichtenecker) mixing makes the wet/dry capacitance ratio an
//! exact power law in the permittivity ratio, with the porosity as exponent.

use crate::error::{Error, Result};
use crate::hysteresis::{Branch, FilledFraction};
use crate::quantities::{Capacitance, RelHumidity, KAPPA_AIR, KAPPA_WATER};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DielectricParams {
    pub kappa_solid: f64,
    pub kappa_water: f64,
    pub kappa_air: f64,
    /// Geometry factor, pF per unit relative permittivity.
    pub c0_pf: f64,
    pub porosity: f64,
}

impl DielectricParams {
    pub fn new(kappa_solid: f64, c0_pf: f64, porosity: f64) -> Result<Self> {
        let p = DielectricParams {
            kappa_solid,
            kappa_water: KAPPA_WATER,
            kappa_air: KAPPA_AIR,
            c0_pf,
            porosity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_solid.is_finite() && self.kappa_solid >= 1.0) {
            return Err(Error::Precondition(format!(
                "solid permittivity {} must be >= 1",
                self.kappa_solid
            )));
        }
        if !(self.c0_pf.is_finite() && self.c0_pf > 0.0) {
            return Err(Error::Precondition(format!(
                "geometry factor {} pF must be positive",
                self.c0_pf
            )));
        }
        if !(self.porosity.is_finite() && (0.0..1.0).contains(&self.porosity)) {
            return Err(Error::OutOfRange {
                what: "porosity",
                value: self.porosity,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(())
    }
}

impl Default for DielectricParams {
    fn default() -> Self {
        DielectricParams {
            kappa_solid: 9.0,
            kappa_water: KAPPA_WATER,
            kappa_air: KAPPA_AIR,
            // about 15 pF per %RH over 20-90 % RH for the default sensor at 25 °C
            c0_pf: 110.0,
            porosity: 0.30,
        }
    }
}

/// Measured or modeled capacitance versus RH along one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    points: Vec<(RelHumidity, Capacitance)>,
    branch: Branch,
}

impl ResponseCurve {
    /// Points must be strictly increasing in RH.
    pub fn new(points: Vec<(RelHumidity, Capacitance)>, branch: Branch) -> Result<Self> {
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Data(
                "response curve RH values must be strictly increasing".into(),
            ));
        }
        Ok(ResponseCurve { points, branch })
    }

    pub fn points(&self) -> &[(RelHumidity, Capacitance)] {
        &self.points
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Linear interpolation; `None` outside the covered RH range.
    pub fn interpolate(&self, x: RelHumidity) -> Option<f64> {
        let x = x.fraction();
        let i = self.points.partition_point(|p| p.0.fraction() < x);
        if i < self.points.len() && self.points[i].0.fraction() == x {
            return Some(self.points[i].1.pf());
        }
        if i == 0 || i == self.points.len() {
            return None;
        }
        let (x0, c0) = (self.points[i - 1].0.fraction(), self.points[i - 1].1.pf());
        let (x1, c1) = (self.points[i].0.fraction(), self.points[i].1.pf());
        Some(c0 + (c1 - c0) * (x - x0) / (x1 - x0))
    }
}

/// Log-mixing permittivity with an extra water-laden wall fraction.
///
/// `wall_water` is the volume fraction of the skeleton (relative to the
/// whole layer) that holds diffused moisture; it is taken from the solid.
pub fn effective_permittivity_with_wall(
    fill: &FilledFraction,
    wall_water: f64,
    p: &DielectricParams,
) -> f64 {
    let w = fill.wet_fraction().clamp(0.0, 1.0);
    let phi = p.porosity;
    let wall = wall_water.clamp(0.0, 1.0 - phi);
    let ln_k = (1.0 - phi - wall) * p.kappa_solid.ln()
        + (phi * w + wall) * p.kappa_water.ln()
        + phi * (1.0 - w) * p.kappa_air.ln();
    ln_k.exp()
}

/// `ln k_eff = (1-phi) ln k_solid + phi w ln k_water + phi (1-w) ln k_air`.
pub fn effective_permittivity(fill: &FilledFraction, p: &DielectricParams) -> f64 {
    effective_permittivity_with_wall(fill, 0.0, p)
}

pub fn capacitance(kappa_eff: f64, p: &DielectricParams) -> Result<Capacitance> {
    if !(kappa_eff.is_finite() && kappa_eff >= 1.0) {
        return Err(Error::Precondition(format!(
            "effective permittivity {kappa_eff} is below 1"
        )));
    }
    Capacitance::from_pf(p.c0_pf * kappa_eff)
}

/// Exponent `n` in `C_w / C_d = (k_w / k_d)^n`.
pub fn morphology_exponent(
    c_dry: Capacitance,
    c_wet: Capacitance,
    kappa_dry: f64,
    kappa_wet: f64,
) -> Result<f64> {
    if c_dry.pf() <= 0.0 || c_wet.pf() <= 0.0 || kappa_dry <= 0.0 || kappa_wet <= 0.0 {
        return Err(Error::Precondition(
            "morphology exponent needs positive capacitances and permittivities".into(),
        ));
    }
    let denom = (kappa_wet / kappa_dry).ln();
    if denom == 0.0 {
        return Err(Error::Degenerate(
            "dry and wet permittivities are equal".into(),
        ));
    }
    Ok((c_wet.pf() / c_dry.pf()).ln() / denom)
}
