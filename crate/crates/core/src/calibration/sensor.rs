//! Full-curve sensor calibration.

use std::io::Read;
use std::path::Path;

use crate::calibration::lsq::{least_squares, FitProblem, FitReport};
use crate::error::{Error, Result};
use crate::hysteresis::{Branch, HysteresisState};
use crate::io::{fmt_sig9, parse_fields};
use crate::pore::LogNormalMode;
use crate::quantities::{Capacitance, RelHumidity, Temperature};
use crate::sorption::ContactAngles;
use crate::twin::SensorParams;

/// Above this RH the two branches differ enough that a label is required.
const UNLABELED_RH_LIMIT: f64 = 0.5;
const MAX_ANGLE_DEG: f64 = 89.0;
const MIN_ANGLE_GAP_DEG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    pub x: RelHumidity,
    pub c: Capacitance,
    pub branch: Branch,
    pub t: Temperature,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetMetadata {
    pub frequency_hz: Option<f64>,
    pub source: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CalibrationDataset {
    pub points: Vec<CalibrationPoint>,
    pub metadata: DatasetMetadata,
}

const CSV_HEADER: &str = "rh_percent,capacitance_pf,branch,temp_c";

impl CalibrationDataset {
    /// Reads `rh_percent,capacitance_pf,branch,temp_c` rows.
    pub fn from_csv_reader<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();
        let header_ok = matches!(
            records.next(),
            Some(Ok(ref h)) if h.iter().collect::<Vec<_>>().join(",") == CSV_HEADER
        );
        if !header_ok {
            return Err(Error::Format {
                row: 0,
                message: format!("expected header `{CSV_HEADER}`"),
            });
        }
        let mut points = Vec::new();
        for (i, rec) in records.enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| Error::Format {
                row,
                message: e.to_string(),
            })?;
            if rec.len() != 4 {
                return Err(Error::Format {
                    row,
                    message: format!("expected 4 fields, found {}", rec.len()),
                });
            }
            let nums = parse_fields(row, [&rec[0], &rec[1], &rec[3]].into_iter())?;
            let branch = Branch::parse(&rec[2]).ok_or_else(|| Error::Format {
                row,
                message: format!("branch `{}` is not asc, desc or unk", &rec[2]),
            })?;
            let wrap = |e: Error| Error::Format {
                row,
                message: e.to_string(),
            };
            points.push(CalibrationPoint {
                x: RelHumidity::from_percent(nums[0]).map_err(wrap)?,
                c: Capacitance::from_pf(nums[1]).map_err(wrap)?,
                branch,
                t: Temperature::from_celsius(nums[2]).map_err(wrap)?,
            });
        }
        Ok(CalibrationDataset {
            points,
            metadata: DatasetMetadata {
                frequency_hz: None,
                source: source.to_string(),
            },
        })
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_sig9(p.x.percent()),
                fmt_sig9(p.c.pf()),
                p.branch.label(),
                fmt_sig9(p.t.celsius())
            ));
        }
        out
    }

    /// Forward-model dataset: one point per `(x, branch)` at temperature `t`.
    pub fn synthesize(
        params: &SensorParams,
        t: Temperature,
        samples: &[(RelHumidity, Branch)],
    ) -> Result<Self> {
        let points = samples
            .iter()
            .map(|&(x, branch)| {
                Ok(CalibrationPoint {
                    x,
                    c: params.static_reading(&branch_state(branch, x), t)?,
                    branch,
                    t,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CalibrationDataset {
            points,
            metadata: DatasetMetadata {
                frequency_hz: None,
                source: "forward model".into(),
            },
        })
    }
}

/// Memory state of a point measured on `branch` at `x`. Unlabeled points
/// are taken as approached from the dry side.
fn branch_state(branch: Branch, x: RelHumidity) -> HysteresisState {
    match branch {
        Branch::Descending => HysteresisState::saturated().update(x),
        Branch::Ascending | Branch::Unknown => HysteresisState::baked().update(x),
    }
}

/// A calibratable sensor parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FitParam {
    GeometryFactor,
    Porosity,
    KappaSolid,
    BetEnergy,
    MicroMedian,
    MesoMedian,
    AdvancingAngle,
    RecedingAngle,
}

impl FitParam {
    pub const ALL: [FitParam; 8] = [
        FitParam::GeometryFactor,
        FitParam::Porosity,
        FitParam::KappaSolid,
        FitParam::BetEnergy,
        FitParam::MicroMedian,
        FitParam::MesoMedian,
        FitParam::AdvancingAngle,
        FitParam::RecedingAngle,
    ];

    /// Configuration key of the parameter.
    pub fn key(self) -> &'static str {
        match self {
            FitParam::GeometryFactor => "diel.c0_pf",
            FitParam::Porosity => "porosity",
            FitParam::KappaSolid => "diel.kappa_solid",
            FitParam::BetEnergy => "bet.e1_minus_el",
            FitParam::MicroMedian => "dist.micro.median_nm",
            FitParam::MesoMedian => "dist.meso.median_nm",
            FitParam::AdvancingAngle => "angles.advancing_deg",
            FitParam::RecedingAngle => "angles.receding_deg",
        }
    }

    pub fn from_key(key: &str) -> Option<FitParam> {
        FitParam::ALL.into_iter().find(|p| p.key() == key)
    }

    /// Parameters that shape the curve but cannot be resolved from a handful
    /// of fixed points.
    fn is_structural(self) -> bool {
        matches!(
            self,
            FitParam::MicroMedian
                | FitParam::MesoMedian
                | FitParam::AdvancingAngle
                | FitParam::RecedingAngle
                | FitParam::KappaSolid
        )
    }
}

/// Set of free parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterMask(Vec<FitParam>);

impl ParameterMask {
    pub fn new(params: impl IntoIterator<Item = FitParam>) -> Self {
        let mut v: Vec<FitParam> = params.into_iter().collect();
        v.sort();
        v.dedup();
        ParameterMask(v)
    }

    /// Geometry factor, porosity, solid permittivity, BET energy, both mode
    /// medians and both contact angles.
    pub fn typical() -> Self {
        Self::new(FitParam::ALL)
    }

    /// Geometry factor, porosity and BET energy.
    pub fn reduced() -> Self {
        Self::new([FitParam::GeometryFactor, FitParam::Porosity, FitParam::BetEnergy])
    }

    /// Parses a comma-separated list of parameter keys.
    pub fn parse(list: &str) -> Result<Self> {
        let mut out = Vec::new();
        for key in list.split(',').map(str::trim).filter(|k| !k.is_empty()) {
            out.push(FitParam::from_key(key).ok_or_else(|| {
                Error::Usage(format!(
                    "unknown fit parameter `{key}`; expected one of {}",
                    FitParam::ALL.map(|p| p.key()).join(", ")
                ))
            })?);
        }
        Ok(Self::new(out))
    }

    pub fn params(&self) -> &[FitParam] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: FitParam) -> bool {
        self.0.contains(&p)
    }
}

/// Result of [`calibrate_sensor`].
#[derive(Debug, Clone)]
pub struct CalibrationOutcome {
    pub params: SensorParams,
    pub report: FitReport,
    /// Mask actually fitted, after any identifiability reduction.
    pub mask: ParameterMask,
    pub warnings: Vec<String>,
}

/// Maps between the sensor parameters and the optimizer's vector.
struct Layout {
    mask: ParameterMask,
    /// Receding angle is stored as `ln(theta_A - theta_R)` when both angles are free.
    gap_coordinate: bool,
}

impl Layout {
    fn new(mask: ParameterMask) -> Self {
        let gap_coordinate =
            mask.contains(FitParam::AdvancingAngle) && mask.contains(FitParam::RecedingAngle);
        Layout {
            mask,
            gap_coordinate,
        }
    }

    fn encode(&self, p: &SensorParams) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let (a, r) = (p.angles.advancing_deg(), p.angles.receding_deg());
        let mut theta = Vec::new();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for &fp in self.mask.params() {
            let (v, l, h) = match fp {
                FitParam::GeometryFactor => (p.diel.c0_pf, 1e-9, f64::INFINITY),
                FitParam::Porosity => (p.diel.porosity, 1e-3, 0.95),
                FitParam::KappaSolid => (p.diel.kappa_solid, 1.0, 1e3),
                FitParam::BetEnergy => (p.bet.e1_minus_el, -2e4, 1e5),
                FitParam::MicroMedian => (mode(p, 0)?.median_radius_nm, 0.05, 1e3),
                FitParam::MesoMedian => (mode(p, 1)?.median_radius_nm, 0.05, 1e3),
                FitParam::AdvancingAngle if self.mask.contains(FitParam::RecedingAngle) => {
                    (a, 0.0, MAX_ANGLE_DEG)
                }
                FitParam::AdvancingAngle => (a, r, MAX_ANGLE_DEG),
                FitParam::RecedingAngle if self.gap_coordinate => (
                    (a - r).max(MIN_ANGLE_GAP_DEG).ln(),
                    MIN_ANGLE_GAP_DEG.ln(),
                    MAX_ANGLE_DEG.ln(),
                ),
                FitParam::RecedingAngle => (r, 0.0, a),
            };
            theta.push(v.clamp(l, h));
            lo.push(l);
            hi.push(h);
        }
        Ok((theta, lo, hi))
    }

    fn decode(&self, base: &SensorParams, theta: &[f64]) -> Result<SensorParams> {
        let mut p = base.clone();
        let mut advancing = p.angles.advancing_deg();
        let mut receding = p.angles.receding_deg();
        let mut modes = p.dist.modes().to_vec();
        for (&fp, &v) in self.mask.params().iter().zip(theta) {
            match fp {
                FitParam::GeometryFactor => p.diel.c0_pf = v,
                FitParam::Porosity => p.set_porosity(v)?,
                FitParam::KappaSolid => p.diel.kappa_solid = v,
                FitParam::BetEnergy => p.bet.e1_minus_el = v,
                FitParam::MicroMedian => modes[0].median_radius_nm = v,
                FitParam::MesoMedian => modes[1].median_radius_nm = v,
                FitParam::AdvancingAngle => advancing = v,
                FitParam::RecedingAngle => receding = v,
            }
        }
        if self.gap_coordinate {
            let gap = receding.exp();
            receding = (advancing - gap).max(0.0);
        }
        p.angles = ContactAngles::new(advancing, receding.min(advancing))?;
        if self.mask.contains(FitParam::MicroMedian) || self.mask.contains(FitParam::MesoMedian) {
            p.dist = p.dist.with_modes(modes)?;
        }
        Ok(p)
    }
}

fn mode(p: &SensorParams, i: usize) -> Result<LogNormalMode> {
    p.dist.modes().get(i).copied().ok_or_else(|| {
        Error::Precondition(format!(
            "pore distribution has {} modes; mode {} is not available",
            p.dist.modes().len(),
            i + 1
        ))
    })
}

/// Fits the masked parameters of `init` to the dataset.
///
/// Residuals are model readings on each point's labeled branch minus the
/// measured capacitance. When there are fewer than two points per free
/// parameter, structural parameters are dropped from the mask with a warning.
pub fn calibrate_sensor(
    data: &CalibrationDataset,
    init: &SensorParams,
    free: &ParameterMask,
) -> Result<CalibrationOutcome> {
    if free.is_empty() {
        return Err(Error::Usage("no free parameters in the calibration mask".into()));
    }
    init.validate()?;
    let unlabeled: Vec<String> = data
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.branch == Branch::Unknown && p.x.fraction() > UNLABELED_RH_LIMIT)
        .map(|(i, _)| (i + 1).to_string())
        .collect();
    if !unlabeled.is_empty() {
        return Err(Error::Data(format!(
            "points above {}% RH need a branch label (asc or desc); unlabeled rows: {}",
            UNLABELED_RH_LIMIT * 100.0,
            unlabeled.join(", ")
        )));
    }

    let mut warnings = Vec::new();
    let mut mask = free.clone();
    let n = data.points.len();
    if n < 2 * mask.len() && mask.params().iter().any(|p| p.is_structural()) {
        let dropped: Vec<&str> = mask
            .params()
            .iter()
            .filter(|p| p.is_structural())
            .map(|p| p.key())
            .collect();
        warnings.push(format!(
            "{n} points cannot identify {} free parameters; fixing {} at their initial values",
            mask.len(),
            dropped.join(", ")
        ));
        mask = ParameterMask::new(mask.params().iter().copied().filter(|p| !p.is_structural()));
        if mask.is_empty() {
            return Err(Error::Data(
                "no identifiable parameters remain after dropping structural ones".into(),
            ));
        }
    }
    if n < mask.len() {
        return Err(Error::Data(format!(
            "{n} points cannot determine {} free parameters",
            mask.len()
        )));
    }

    // canonical order makes the fit independent of row order
    let mut points = data.points.clone();
    points.sort_by(|a, b| {
        (a.x.fraction(), a.branch.label(), a.t.kelvin(), a.c.pf())
            .partial_cmp(&(b.x.fraction(), b.branch.label(), b.t.kelvin(), b.c.pf()))
            .expect("points are finite")
    });
    let states: Vec<HysteresisState> = points.iter().map(|p| branch_state(p.branch, p.x)).collect();

    let layout = Layout::new(mask.clone());
    let (theta0, lo, hi) = layout.encode(init)?;
    let residuals = |theta: &[f64]| -> Result<Vec<f64>> {
        let p = layout.decode(init, theta)?;
        points
            .iter()
            .zip(&states)
            .map(|(pt, s)| Ok(p.static_reading(s, pt.t)?.pf() - pt.c.pf()))
            .collect()
    };
    let problem = FitProblem::new(theta0, residuals).with_bounds(lo, hi);
    let report = least_squares(&problem)?;
    let params = layout.decode(init, &report.params)?;
    Ok(CalibrationOutcome {
        params,
        report,
        mask,
        warnings,
    })
}
