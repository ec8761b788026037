//! Linear-transform BET fit of an adsorption isotherm.

use crate::error::{Error, Result};
use crate::quantities::RelHumidity;
use crate::sorption::bet_linear_point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetFit {
    pub v_m: f64,
    pub c: f64,
    pub r_squared: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Number of isotherm points inside the fitting window.
    pub points_used: usize,
}

impl BetFit {
    /// RH at which the fitted isotherm holds exactly one monolayer,
    /// `x = 1 / (1 + sqrt(c))`.
    pub fn monolayer_point(&self) -> f64 {
        1.0 / (1.0 + self.c.sqrt())
    }
}

/// Default fitting window of the BET transform.
pub const DEFAULT_BET_RANGE: (f64, f64) = (0.05, 0.35);

/// Ordinary least-squares line through the BET transform of the isotherm
/// points `(p/p0, amount)` lying inside `range` (inclusive).
pub fn fit_bet(isotherm: &[(f64, f64)], range: (f64, f64)) -> Result<BetFit> {
    let (lo, hi) = range;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(x, v) in isotherm.iter().filter(|p| p.0 >= lo && p.0 <= hi) {
        let y = bet_linear_point(RelHumidity::new(x)?, v)
            .map_err(|e| Error::Data(format!("isotherm point ({x}, {v}): {e}")))?;
        xs.push(x);
        ys.push(y);
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::Data(format!(
            "{n} isotherm points inside [{lo}, {hi}]; at least 3 are required"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Data("isotherm points share a single p/p0 value".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if intercept.is_nan() || intercept <= 0.0 {
        return Err(Error::NonPhysicalFit(format!(
            "BET intercept {intercept:.3e} is not positive, so c is undefined"
        )));
    }
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(BetFit {
        v_m: 1.0 / (slope + intercept),
        c: slope / intercept + 1.0,
        r_squared,
        slope,
        intercept,
        points_used: n,
    })
}
