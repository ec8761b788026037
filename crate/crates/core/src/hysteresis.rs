//! Independent-pore (Preisach-type) capillary condensation hysteresis.
//!
//! Every pore radius is a two-threshold hysteron: it fills once RH reaches
//! the advancing-angle Kelvin humidity and empties once RH drops below the
//! receding-angle one. Both thresholds grow with radius, so the liquid set
//! is always an initial segment `r <= R` of the radius axis, and `R` follows
//! from folding the memory curve of dominant RH extrema.

use crate::error::{Error, Result};
use crate::pore::{volume_cdf, PoreDistribution};
use crate::quantities::{water_properties, RelHumidity, Temperature};
use crate::sorption::{bet_c, bet_coverage, kelvin_length_nm, BetParams, ContactAngles};

/// Sweep direction of a major-loop branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Ascending,
    Descending,
}

/// Branch label carried by measured data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Ascending,
    Descending,
    Unknown,
}

impl Branch {
    pub fn parse(s: &str) -> Option<Branch> {
        match s.trim() {
            "asc" => Some(Branch::Ascending),
            "desc" => Some(Branch::Descending),
            "unk" => Some(Branch::Unknown),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Ascending => "asc",
            Branch::Descending => "desc",
            Branch::Unknown => "unk",
        }
    }
}

/// Memory curve of dominant RH extrema.
///
/// `points` alternates max, min, max, ... after an implicit dry start at
/// `x = 0`; its last entry is the current RH. Empty means freshly baked.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HysteresisState {
    points: Vec<f64>,
}

impl HysteresisState {
    pub fn baked() -> Self {
        HysteresisState::default()
    }

    /// State after a monotone rise to saturation.
    pub fn saturated() -> Self {
        HysteresisState { points: vec![1.0] }
    }

    /// Dominant extrema, ending with the current RH.
    pub fn extrema(&self) -> &[f64] {
        &self.points
    }

    pub fn current(&self) -> RelHumidity {
        RelHumidity::new(self.points.last().copied().unwrap_or(0.0)).expect("stored RH is valid")
    }

    pub fn is_baked(&self) -> bool {
        self.points.is_empty()
    }

    /// Direction of the excursion that produced the current RH.
    pub fn direction(&self) -> Direction {
        let n = self.points.len();
        let prev = if n >= 2 { self.points[n - 2] } else { 0.0 };
        match self.points.last() {
            Some(&last) if last < prev => Direction::Descending,
            _ => Direction::Ascending,
        }
    }

    /// History with the current excursion removed: the memory as it stood at
    /// the last reversal point.
    pub fn at_last_reversal(&self) -> HysteresisState {
        let mut points = self.points.clone();
        points.pop();
        HysteresisState { points }
    }

    pub fn update(&self, x_new: RelHumidity) -> HysteresisState {
        let mut next = self.clone();
        next.apply(x_new);
        next
    }

    /// In-place form of [`update`](Self::update), applying the wiping-out rule.
    pub fn apply(&mut self, x_new: RelHumidity) {
        let v = x_new.fraction();
        let current = self.points.last().copied().unwrap_or(0.0);
        if v == current {
            return;
        }
        // the current value stops being an extremum when motion continues
        if let Some(&last) = self.points.last() {
            let n = self.points.len();
            let prev = if n >= 2 { self.points[n - 2] } else { 0.0 };
            if (last - prev) * (v - last) > 0.0 {
                self.points.pop();
            }
        }
        let current = self.points.last().copied().unwrap_or(0.0);
        let rising = v > current;
        if !rising && v <= 0.0 {
            self.points.clear();
            return;
        }
        while self.points.len() >= 2 {
            let prev = self.points[self.points.len() - 2];
            let dominated = if rising { v >= prev } else { v <= prev };
            if !dominated {
                break;
            }
            self.points.truncate(self.points.len() - 2);
        }
        self.points.push(v);
    }

    /// Physical radius (nm) below which pores hold condensate.
    pub(crate) fn liquid_radius(&self, thresholds: &Thresholds) -> f64 {
        let mut radius = 0.0f64;
        let mut prev = 0.0;
        for &v in &self.points {
            if v > prev {
                radius = radius.max(thresholds.fill_radius(v));
            } else {
                radius = radius.min(thresholds.empty_radius(v));
            }
            prev = v;
        }
        radius
    }
}

/// Kelvin filling/emptying radii at one temperature, in physical-radius
/// units after dividing out the pore widening factor.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Thresholds {
    fill_scale: f64,
    empty_scale: f64,
}

impl Thresholds {
    pub(crate) fn new(angles: &ContactAngles, t: Temperature, widening: f64) -> Result<Self> {
        let w = water_properties(t)?;
        let length = kelvin_length_nm(t, &w) / widening;
        Ok(Thresholds {
            fill_scale: length * angles.advancing_deg().to_radians().cos(),
            empty_scale: length * angles.receding_deg().to_radians().cos(),
        })
    }

    fn radius(scale: f64, x: f64) -> f64 {
        if x >= 1.0 {
            f64::INFINITY
        } else if x <= 0.0 {
            0.0
        } else {
            -scale / x.ln()
        }
    }

    pub(crate) fn fill_radius(&self, x: f64) -> f64 {
        Self::radius(self.fill_scale, x)
    }

    pub(crate) fn empty_radius(&self, x: f64) -> f64 {
        Self::radius(self.empty_scale, x)
    }
}

/// Volume fractions of pore space taken by condensate and adsorbed film.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilledFraction {
    /// Capillary condensate, fraction of total pore volume.
    pub liquid: f64,
    /// Adsorbed film, fraction of the volume of the unfilled pores.
    pub film: f64,
}

impl FilledFraction {
    pub const EMPTY: FilledFraction = FilledFraction {
        liquid: 0.0,
        film: 0.0,
    };

    /// Total water-occupied fraction of pore volume.
    pub fn wet_fraction(&self) -> f64 {
        self.liquid + self.film * (1.0 - self.liquid)
    }
}

/// Fraction of the unfilled pore volume (pores with `r > cutoff`) covered by
/// a film of thickness `film_nm`, treating pores as cylinders.
fn film_fraction(dist: &PoreDistribution, cutoff: f64, film_nm: f64) -> f64 {
    let unfilled = dist.volume_sf(cutoff);
    if unfilled <= 0.0 || film_nm <= 0.0 {
        return 0.0;
    }
    // pores with radius below the film thickness are flooded by the film
    let split = cutoff.max(film_nm);
    let flooded = dist.partial_moment(0.0, cutoff, split);
    let annular = 2.0 * film_nm * dist.partial_moment(-1.0, split, f64::INFINITY)
        - film_nm * film_nm * dist.partial_moment(-2.0, split, f64::INFINITY);
    ((flooded + annular) / unfilled).clamp(0.0, 1.0)
}

/// Filled fraction for `state`, with pore radii scaled by `widening`.
pub fn filled_fraction_widened(
    state: &HysteresisState,
    dist: &PoreDistribution,
    angles: &ContactAngles,
    bet: &BetParams,
    t: Temperature,
    widening: f64,
) -> Result<FilledFraction> {
    if !(widening.is_finite() && widening >= 1.0) {
        return Err(Error::Precondition(format!(
            "pore widening factor {widening} must be >= 1"
        )));
    }
    let thresholds = Thresholds::new(angles, t, widening)?;
    let cutoff = state.liquid_radius(&thresholds);
    let liquid = volume_cdf(dist, cutoff);
    let x = state.current();
    let film = if x.fraction() >= 1.0 {
        1.0
    } else {
        let layers = bet_coverage(x, bet_c(bet, t))?;
        film_fraction(dist, cutoff, bet.t_mono_nm * layers / widening)
    };
    Ok(FilledFraction { liquid, film })
}

/// Filled fraction of the pore space for the given memory state.
pub fn filled_fraction(
    state: &HysteresisState,
    dist: &PoreDistribution,
    angles: &ContactAngles,
    bet: &BetParams,
    t: Temperature,
) -> Result<FilledFraction> {
    filled_fraction_widened(state, dist, angles, bet, t, 1.0)
}

/// Samples a major-loop branch on an even RH grid.
///
/// Ascending starts from the baked state and sweeps 0 -> 1; descending starts
/// saturated and sweeps 1 -> 0. Output is ordered along the sweep.
pub fn branch_curve(
    dist: &PoreDistribution,
    angles: &ContactAngles,
    bet: &BetParams,
    t: Temperature,
    direction: Direction,
    samples: usize,
) -> Result<Vec<(RelHumidity, FilledFraction)>> {
    if samples < 2 {
        return Err(Error::Usage(format!(
            "branch needs at least 2 samples, got {samples}"
        )));
    }
    let (mut state, grid): (_, Vec<f64>) = match direction {
        Direction::Ascending => (
            HysteresisState::baked(),
            (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect(),
        ),
        Direction::Descending => (
            HysteresisState::saturated(),
            (0..samples)
                .rev()
                .map(|i| i as f64 / (samples - 1) as f64)
                .collect(),
        ),
    };
    grid.into_iter()
        .map(|x| {
            let x = RelHumidity::new(x)?;
            state.apply(x);
            Ok((x, filled_fraction(&state, dist, angles, bet, t)?))
        })
        .collect()
}
