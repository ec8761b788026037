//! Pore-radius distribution of the anodic alumina layer and the Lorentzian
//! small-angle scattering model used to estimate the mean pore radius.

use std::f64::consts::SQRT_2;
use std::io::Read;
use std::path::Path;

use statrs::function::erf::erfc;

use crate::calibration::{least_squares, FitProblem, FitReport};
use crate::error::{Error, Result};

/// Standard normal CDF.
pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// `P(za < Z <= zb)` without cancellation in either tail.
fn normal_interval(za: f64, zb: f64) -> f64 {
    if zb <= za {
        return 0.0;
    }
    if za >= 0.0 {
        normal_cdf(-za) - normal_cdf(-zb)
    } else {
        normal_cdf(zb) - normal_cdf(za)
    }
}

fn log_or_limit(r: f64) -> f64 {
    if r <= 0.0 {
        f64::NEG_INFINITY
    } else {
        r.ln()
    }
}

/// One log-normal population of pore radii, by volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalMode {
    pub weight: f64,
    pub median_radius_nm: f64,
    pub sigma_log: f64,
}

impl LogNormalMode {
    fn z(&self, r: f64) -> f64 {
        (log_or_limit(r) - self.median_radius_nm.ln()) / self.sigma_log
    }

    /// Volume-weighted `E[r^k; a < r <= b]` for this mode alone.
    fn partial_moment(&self, k: f64, a: f64, b: f64) -> f64 {
        let s = self.sigma_log;
        let shift = k * s;
        let scale = (k * self.median_radius_nm.ln() + 0.5 * shift * shift).exp();
        scale * normal_interval(self.z(a) - shift, self.z(b) - shift)
    }
}

/// Mixture of log-normal pore-volume populations plus the layer porosity.
#[derive(Debug, Clone, PartialEq)]
pub struct PoreDistribution {
    modes: Vec<LogNormalMode>,
    porosity: f64,
}

impl PoreDistribution {
    pub fn new(modes: Vec<LogNormalMode>, porosity: f64) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Precondition(
                "pore distribution needs at least one mode".into(),
            ));
        }
        let mut total = 0.0;
        for m in &modes {
            if !(m.weight.is_finite() && m.weight >= 0.0) {
                return Err(Error::Precondition(format!(
                    "mode weight {} must be a finite non-negative fraction",
                    m.weight
                )));
            }
            if !(m.median_radius_nm.is_finite() && m.median_radius_nm > 0.0) {
                return Err(Error::Precondition(format!(
                    "median radius {} nm must be positive",
                    m.median_radius_nm
                )));
            }
            if !(m.sigma_log.is_finite() && m.sigma_log > 0.0) {
                return Err(Error::Precondition(format!(
                    "sigma_log {} must be positive",
                    m.sigma_log
                )));
            }
            total += m.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "mode weights sum to {total}, expected 1"
            )));
        }
        if !(porosity.is_finite() && porosity > 0.0 && porosity < 1.0) {
            return Err(Error::OutOfRange {
                what: "porosity",
                value: porosity,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(PoreDistribution { modes, porosity })
    }

    pub fn modes(&self) -> &[LogNormalMode] {
        &self.modes
    }

    pub fn porosity(&self) -> f64 {
        self.porosity
    }

    pub fn with_porosity(&self, porosity: f64) -> Result<Self> {
        PoreDistribution::new(self.modes.clone(), porosity)
    }

    pub fn with_modes(&self, modes: Vec<LogNormalMode>) -> Result<Self> {
        PoreDistribution::new(modes, self.porosity)
    }

    /// Fraction of pore volume in pores with radius above `r` (nm).
    pub fn volume_sf(&self, r: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| m.weight * normal_cdf(-m.z(r)))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Volume-weighted `E[r^k; a < r <= b]` over the mixture; radii in nm.
    pub fn partial_moment(&self, k: f64, a: f64, b: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| m.weight * m.partial_moment(k, a, b))
            .sum()
    }
}

/// Two-population alumina layer: micropores of radius 0.86 nm and mesopores
/// of radius 4.5 nm (9 nm width), equal volume weights, porosity 0.30.
pub fn default_alumina_distribution() -> PoreDistribution {
    PoreDistribution::new(
        vec![
            LogNormalMode {
                weight: 0.5,
                median_radius_nm: 0.86,
                sigma_log: 0.25,
            },
            LogNormalMode {
                weight: 0.5,
                median_radius_nm: 4.5,
                sigma_log: 0.25,
            },
        ],
        0.30,
    )
    .expect("default distribution is valid")
}

/// Fraction of pore volume held by pores of radius `<= r` nm.
pub fn volume_cdf(dist: &PoreDistribution, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    dist.modes
        .iter()
        .map(|m| m.weight * normal_cdf(m.z(r)))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Background-subtracted scattering intensity versus wave vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringCurve {
    points: Vec<(f64, f64)>,
}

impl ScatteringCurve {
    /// Points are `(q in 1/Angstrom, intensity)`.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(q, intensity)) in points.iter().enumerate() {
            if !(q.is_finite() && q > 0.0) {
                return Err(Error::Format {
                    row: i + 1,
                    message: format!("q = {q} must be positive"),
                });
            }
            if !(intensity.is_finite() && intensity >= 0.0) {
                return Err(Error::Format {
                    row: i + 1,
                    message: format!("intensity = {intensity} must be non-negative"),
                });
            }
            if i > 0 && q <= points[i - 1].0 {
                return Err(Error::Format {
                    row: i + 1,
                    message: "q must be strictly increasing".into(),
                });
            }
        }
        Ok(ScatteringCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reads the `q_inv_angstrom,intensity` CSV format.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let rows = crate::io::read_numeric_csv(reader, &["q_inv_angstrom", "intensity"])?;
        ScatteringCurve::new(rows.into_iter().map(|r| (r[0], r[1])).collect())
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q_inv_angstrom,intensity\n");
        for &(q, i) in &self.points {
            out.push_str(&format!(
                "{},{}\n",
                crate::io::fmt_sig9(q),
                crate::io::fmt_sig9(i)
            ));
        }
        out
    }
}

/// Parameters of `I(q) = I0 / (1 + r^2 q^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianParams {
    pub i0: f64,
    /// Mean pore radius in Angstrom.
    pub r: f64,
}

impl LorentzianParams {
    pub fn new(i0: f64, r: f64) -> Result<Self> {
        if !(i0.is_finite() && i0 > 0.0) {
            return Err(Error::Precondition(format!("I(0) = {i0} must be positive")));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Precondition(format!("radius = {r} must be positive")));
        }
        Ok(LorentzianParams { i0, r })
    }
}

pub fn lorentzian_intensity(p: LorentzianParams, q: f64) -> f64 {
    p.i0 / (1.0 + p.r * p.r * q * q)
}

/// Analytic partial derivatives `(dI/dI0, dI/dr)` at `q`.
pub fn lorentzian_gradient(p: LorentzianParams, q: f64) -> [f64; 2] {
    let d = 1.0 + p.r * p.r * q * q;
    [1.0 / d, -2.0 * p.i0 * p.r * q * q / (d * d)]
}

/// Residuals `model - data` for parameter vector `[i0, r]`.
pub fn lorentzian_residuals(curve: &ScatteringCurve, theta: &[f64]) -> Vec<f64> {
    let p = LorentzianParams {
        i0: theta[0],
        r: theta[1],
    };
    curve
        .points
        .iter()
        .map(|&(q, i)| lorentzian_intensity(p, q) - i)
        .collect()
}

/// Least-squares fit of the Lorentzian to `curve`, starting from `init`.
///
/// A fit whose radius collapses onto the zero boundary is reported as
/// degenerate rather than as a (meaningless) tiny radius.
pub fn fit_lorentzian(curve: &ScatteringCurve, init: LorentzianParams) -> Result<FitReport> {
    if curve.len() < 5 {
        return Err(Error::Data(format!(
            "scattering curve has {} points, at least 5 are required",
            curve.len()
        )));
    }
    LorentzianParams::new(init.i0, init.r)?;
    let problem = FitProblem::new(vec![init.i0, init.r], |theta: &[f64]| {
        Ok(lorentzian_residuals(curve, theta))
    })
    .with_bounds(vec![0.0, 0.0], vec![f64::INFINITY, f64::INFINITY]);
    let report = least_squares(&problem)?;
    if !report.converged {
        return Err(Error::NonConvergence {
            best: report.params.clone(),
            residual_norm: report.residual_norm,
            iterations: report.iterations,
        });
    }
    let q_max = curve.points.last().map(|p| p.0).unwrap_or(1.0);
    // below this radius the curve is flat to 1e-6 over the measured q range
    let r_floor = 1e-3 / q_max;
    if report.params[1] <= r_floor {
        return Err(Error::Degenerate(format!(
            "fitted radius collapsed to the zero boundary (r = {:.3e} A); the curve carries no size information",
            report.params[1]
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Trapezoid integral of the mixture density in log-radius space.
    fn integrate_density(dist: &PoreDistribution, r: f64) -> f64 {
        let lo = (1e-3f64).ln();
        let hi = r.ln();
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let density = |u: f64| -> f64 {
            dist.modes()
                .iter()
                .map(|m| {
                    let z = (u - m.median_radius_nm.ln()) / m.sigma_log;
                    m.weight * (-0.5 * z * z).exp()
                        / (m.sigma_log * (2.0 * std::f64::consts::PI).sqrt())
                })
                .sum()
        };
        let mut acc = 0.5 * (density(lo) + density(hi));
        for i in 1..n {
            acc += density(lo + i as f64 * h);
        }
        acc * h
    }

    #[test]
    fn default_modes() {
        let d = default_alumina_distribution();
        assert_eq!(d.modes()[0].median_radius_nm, 0.86);
        assert_eq!(d.modes()[1].median_radius_nm, 4.5);
        let total: f64 = d.modes().iter().map(|m| m.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(d.porosity(), 0.30);
    }

    #[test]
    fn cdf_limits_and_micropore_median() {
        let d = default_alumina_distribution();
        assert_eq!(volume_cdf(&d, 0.0), 0.0);
        assert_eq!(volume_cdf(&d, 1e9), 1.0);
        let v = volume_cdf(&d, 0.86);
        let oracle = integrate_density(&d, 0.86);
        assert_relative_eq!(oracle, 0.25, max_relative = 1e-6);
        assert_relative_eq!(v, oracle, max_relative = 1e-6);
        assert_relative_eq!(v, 0.25, max_relative = 1e-9);
    }

    #[test]
    fn partial_moments_match_quadrature() {
        let d = default_alumina_distribution();
        for k in [-2.0f64, -1.0, 0.0, 1.0] {
            let (a, b) = (0.5f64, 6.0f64);
            let n = 100_000;
            let (lo, hi) = (a.ln(), b.ln());
            let h = (hi - lo) / n as f64;
            let mut acc = 0.0;
            for i in 0..=n {
                let u = lo + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                let dens: f64 = d
                    .modes()
                    .iter()
                    .map(|m| {
                        let z = (u - m.median_radius_nm.ln()) / m.sigma_log;
                        m.weight * (-0.5 * z * z).exp()
                            / (m.sigma_log * (2.0 * std::f64::consts::PI).sqrt())
                    })
                    .sum();
                acc += w * dens * (k * u).exp();
            }
            assert_relative_eq!(d.partial_moment(k, a, b), acc * h, max_relative = 1e-7);
        }
    }

    #[test]
    fn rejects_bad_distributions() {
        let m = LogNormalMode {
            weight: 0.6,
            median_radius_nm: 1.0,
            sigma_log: 0.2,
        };
        assert!(PoreDistribution::new(vec![m, m], 0.3).is_err());
        assert!(PoreDistribution::new(vec![LogNormalMode { weight: 1.0, ..m }], 1.0).is_err());
        assert!(PoreDistribution::new(
            vec![LogNormalMode {
                weight: 1.0,
                sigma_log: 0.0,
                ..m
            }],
            0.3
        )
        .is_err());
        assert!(PoreDistribution::new(vec![], 0.3).is_err());
    }

    #[test]
    fn lorentzian_reference_points() {
        let p = LorentzianParams::new(100.0, 8.6).unwrap();
        assert_eq!(lorentzian_intensity(p, 0.0), 100.0);
        assert_relative_eq!(lorentzian_intensity(p, 1.0 / 8.6), 50.0, max_relative = 1e-14);
        assert_relative_eq!(lorentzian_intensity(p, 2.0 / 8.6), 20.0, max_relative = 1e-14);
    }

    #[test]
    fn scattering_curve_validation() {
        assert!(ScatteringCurve::new(vec![(0.1, 1.0), (0.1, 2.0)]).is_err());
        assert!(ScatteringCurve::new(vec![(0.0, 1.0)]).is_err());
        assert!(ScatteringCurve::new(vec![(0.1, -1.0)]).is_err());
        let csv = "q_inv_angstrom,intensity\n0.1,5\n0.2,4\n";
        let c = ScatteringCurve::from_csv_reader(csv.as_bytes()).unwrap();
        assert_eq!(c.points(), &[(0.1, 5.0), (0.2, 4.0)]);
        assert!(ScatteringCurve::from_csv_reader("q,i\n0.1,5\n".as_bytes()).is_err());
    }

    #[test]
    fn too_few_points_rejected() {
        let c = ScatteringCurve::new(vec![(0.1, 5.0), (0.2, 4.0)]).unwrap();
        let init = LorentzianParams::new(1.0, 1.0).unwrap();
        assert!(matches!(fit_lorentzian(&c, init), Err(Error::Data(_))));
    }

    proptest! {
        #[test]
        fn cdf_monotone_bounded(a in 0.0f64..60.0, b in 0.0f64..60.0) {
            let d = default_alumina_distribution();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (fa, fb) = (volume_cdf(&d, lo), volume_cdf(&d, hi));
            prop_assert!((0.0..=1.0).contains(&fa) && (0.0..=1.0).contains(&fb));
            prop_assert!(fa <= fb);
            prop_assert!((volume_cdf(&d, hi) + d.volume_sf(hi) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn lorentzian_even_and_decreasing(q in 1e-4f64..5.0, dq in 1e-4f64..1.0) {
            let p = LorentzianParams::new(100.0, 8.6).unwrap();
            prop_assert_eq!(lorentzian_intensity(p, q), lorentzian_intensity(p, -q));
            prop_assert!(lorentzian_intensity(p, q + dq) < lorentzian_intensity(p, q));
        }
    }
}
