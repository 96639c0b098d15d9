//! The three-plane experiment: aperture at (i), grating at (ii), image at
//! (iii).
//!
//! Lengths on the aperture plane are in internal units (`period` is `T`;
//! SI runs use `T = 1` with `geometry.unit_m` set to the physical period).
//! Wire positions are in metres on the grating plane and reach the state
//! through the far-field map of [`crate::propagation`]. The lens is the
//! parity operation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigenstate::{comb_construct, Coefficients, EnvelopeSpec};
use crate::error::{invalid, Error, Result};
use crate::grid::{fidelity, parity, Grid, Space, Wavefunction};
use crate::propagation::{grating_momentum_set, OpticalGeometry};
use crate::sets::{
    grating_to_set, momentum_comb, project_momentum, project_position, GratingSpec, IntervalSet, Mask, PeriodicSet,
    Region,
};

/// Peaks are connected runs of density above this fraction of the maximum.
pub const PEAK_THRESHOLD: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApertureMode {
    /// One slit centred at `+T/2`.
    Single,
    /// Two slits centred at `-T/2` and `+T/2`.
    Double,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum GratingModel {
    None,
    /// Physical wires on the grating plane, metres.
    Wires(GratingSpec),
    /// The periodic momentum set `Y` with transmitting half-width
    /// `pi / t_prime` around `2 pi n / T + shift`.
    Ideal { t_prime: f64, shift: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Numerics {
    pub n_points: usize,
    /// Grid extent in internal units.
    pub extent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: ApertureMode,
    pub slit_width: f64,
    pub period: f64,
    pub grating: GratingModel,
    pub geometry: OpticalGeometry,
    pub numerics: Numerics,
}

pub const PAPER_PERIOD_M: f64 = 0.25e-3;
pub const PAPER_DISTANCE_M: f64 = 0.55;
pub const PAPER_WIRE_WIDTH_M: f64 = 0.127e-3;
pub const PAPER_WIRE_SPACING_M: f64 = 1.3e-3;
pub const PAPER_WIRE_COUNT: usize = 6;
pub const PAPER_SINGLE_SLIT_SHIFT_M: f64 = 0.25e-3;
/// Pinhole size is not given; 0.04 mm is a typical value for this setup.
pub const DEFAULT_SLIT_WIDTH_M: f64 = 0.04e-3;
/// Grid extent in periods; gives about 25 momentum samples across a paper wire.
pub const DEFAULT_EXTENT: f64 = 256.0;
/// `T / 200` spacing: the default slit edges fall on grid points at this
/// and every doubled resolution.
pub const DEFAULT_N_POINTS: usize = 51_200;

impl ExperimentConfig {
    /// The published geometry with the wavelength inferred from the wire
    /// spacing, in SI mode (`T = 1` internally).
    pub fn paper(mode: ApertureMode) -> Self {
        let lambda = crate::propagation::infer_wavelength(PAPER_DISTANCE_M, PAPER_PERIOD_M, PAPER_WIRE_SPACING_M)
            .expect("paper lengths are positive");
        let shift = match mode {
            ApertureMode::Single => PAPER_SINGLE_SLIT_SHIFT_M,
            ApertureMode::Double => 0.0,
        };
        Self {
            mode,
            slit_width: DEFAULT_SLIT_WIDTH_M / PAPER_PERIOD_M,
            period: 1.0,
            grating: GratingModel::Wires(GratingSpec {
                n_wires: PAPER_WIRE_COUNT,
                wire_width: PAPER_WIRE_WIDTH_M,
                wire_spacing: PAPER_WIRE_SPACING_M,
                lateral_shift: shift,
            }),
            geometry: OpticalGeometry::new(PAPER_DISTANCE_M, lambda, PAPER_PERIOD_M).expect("positive"),
            numerics: Numerics { n_points: DEFAULT_N_POINTS, extent: DEFAULT_EXTENT },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(invalid(format!("period T must be positive, got {}", self.period)));
        }
        if !(self.slit_width.is_finite() && self.slit_width > 0.0) {
            return Err(invalid(format!("slit width a must be positive, got {}", self.slit_width)));
        }
        if self.slit_width >= self.period {
            return Err(Error::SupportViolation(format!(
                "slit width a = {} must be smaller than the period T = {}",
                self.slit_width, self.period
            )));
        }
        let Numerics { n_points, extent } = self.numerics;
        self.grid()?;
        if extent < 2.0 * self.period + self.slit_width {
            return Err(invalid(format!("grid extent {extent} does not hold the aperture")));
        }
        if extent / n_points as f64 > 0.5 * self.slit_width {
            return Err(Error::Resolution(format!(
                "grid spacing {} leaves fewer than two samples across the slit",
                extent / n_points as f64
            )));
        }
        match &self.grating {
            GratingModel::None => {}
            GratingModel::Wires(g) => g.validate()?,
            GratingModel::Ideal { t_prime, shift } => {
                if !(t_prime.is_finite() && *t_prime > self.period) {
                    return Err(invalid(format!("ideal grating needs T' > T, got T' = {t_prime}")));
                }
                if !shift.is_finite() {
                    return Err(invalid("ideal grating shift must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.numerics.extent, self.numerics.n_points)
    }

    fn slit_centres(&self) -> Vec<f64> {
        let h = 0.5 * self.period;
        match self.mode {
            ApertureMode::Single => vec![h],
            ApertureMode::Double => vec![-h, h],
        }
    }

    /// The aperture set `A` on plane (i).
    pub fn aperture(&self) -> Result<IntervalSet> {
        let h = 0.5 * self.slit_width;
        IntervalSet::new(self.slit_centres().into_iter().map(|c| (c - h, c + h)).collect())
    }

    /// Grid samples where the lens images the aperture: the aperture mask
    /// under the grid's parity, so edge samples map exactly.
    pub fn image_target(&self, grid: &Grid) -> Result<Mask> {
        let m = self.aperture()?.realize(grid);
        let n = m.len();
        Ok(Mask((0..n).map(|j| m.0[(n - j) % n]).collect()))
    }

    /// The periodic set `X` the aperture is cut from.
    pub fn periodic_aperture(&self) -> Result<PeriodicSet> {
        PeriodicSet::symmetric(self.period, 0.5 * self.slit_width, 0.5 * self.period, None)
    }

    /// `T'` of the grating's momentum set, if it has one.
    pub fn t_prime(&self) -> Result<Option<f64>> {
        match &self.grating {
            GratingModel::None => Ok(None),
            GratingModel::Ideal { t_prime, .. } => Ok(Some(*t_prime)),
            GratingModel::Wires(g) => t_prime_from_wire_width(self.period, g.wire_width, &self.geometry).map(Some),
        }
    }

    /// The same experiment with the wires replaced by the periodic set they
    /// approximate.
    pub fn idealized(&self) -> Result<Self> {
        let GratingModel::Wires(g) = &self.grating else {
            return Ok(self.clone());
        };
        let t_prime = t_prime_from_wire_width(self.period, g.wire_width, &self.geometry)?;
        let shift = -self.geometry.momentum_scale() * g.lateral_shift;
        Ok(Self { grating: GratingModel::Ideal { t_prime, shift }, ..self.clone() })
    }
}

/// `1/T' = 1/T - sigma w / (2 pi)`: the momentum gap each wire cuts from a
/// cell of width `2 pi / T`.
pub fn t_prime_from_wire_width(period: f64, wire_width_m: f64, geo: &OpticalGeometry) -> Result<f64> {
    let inv = 1.0 / period - geo.momentum_scale() * wire_width_m / (2.0 * PI);
    if inv.is_nan() || inv <= 0.0 {
        return Err(Error::SupportViolation(format!(
            "wire width {wire_width_m} m blocks a whole momentum period"
        )));
    }
    Ok(1.0 / inv)
}

/// Unit-amplitude illumination cut by the aperture, normalised.
pub fn prepare(config: &ExperimentConfig) -> Result<Wavefunction> {
    config.validate()?;
    let grid = config.grid()?;
    let aperture = config.aperture()?;
    let raw = Wavefunction::from_real(grid, Space::Position, |x| if aperture.contains(x) { 1.0 } else { 0.0 });
    raw.normalized()
}

/// State just past the grating, still in aperture coordinates.
#[derive(Clone, Debug)]
pub struct GratingOutcome {
    /// Sub-normalised transmitted state.
    pub state: Wavefunction,
    pub transmitted: f64,
    pub blocked: f64,
}

/// Momentum set the grating transmits, realised on `grid`'s momentum
/// samples, or `None` for no grating.
pub fn transmitting_set(config: &ExperimentConfig, grid: &Grid) -> Result<Option<Box<dyn Region>>> {
    Ok(match &config.grating {
        GratingModel::None => None,
        GratingModel::Ideal { t_prime, shift } => Some(Box::new(momentum_comb(config.period, *t_prime, *shift)?)),
        GratingModel::Wires(g) => {
            let conj = grid.conjugate();
            let sigma = config.geometry.momentum_scale();
            // one sample beyond the momentum grid on both sides
            let reach = (0.5 * conj.extent() + conj.spacing()) / sigma;
            let wires = g.wires()?;
            let window = match wires.hull() {
                Some((lo, hi)) => (lo.min(-reach), hi.max(reach)),
                None => (-reach, reach),
            };
            Some(Box::new(grating_momentum_set(&grating_to_set(g, window)?, &config.geometry)))
        }
    })
}

pub fn apply_grating(psi: &Wavefunction, config: &ExperimentConfig) -> Result<GratingOutcome> {
    let before = psi.norm_sq();
    let state = match transmitting_set(config, psi.grid())? {
        None => psi.clone(),
        Some(set) => project_momentum(psi, set.as_ref())?,
    };
    state.check_finite()?;
    let after = state.norm_sq();
    Ok(GratingOutcome { state, transmitted: after / before, blocked: (before - after) / before })
}

/// The lens: spatial inversion.
pub fn image(psi: &Wavefunction) -> Wavefunction {
    parity(psi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Prepared,
    AfterGrating,
    Imaged,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Prepared => "prepared",
            Stage::AfterGrating => "after_grating",
            Stage::Imaged => "imaged",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub centre: f64,
    pub mass: f64,
    pub first: usize,
    pub last: usize,
}

/// Connected runs of `|psi|^2 > threshold * max`, with integrated mass and
/// centroid.
pub fn find_peaks(psi: &Wavefunction, threshold: f64) -> Vec<Peak> {
    let density = psi.densities();
    let max = density.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Vec::new();
    }
    let cut = threshold * max;
    let grid = psi.grid();
    let mask = Mask(density.iter().map(|&d| d > cut).collect());
    mask.runs()
        .into_iter()
        .map(|(first, last)| {
            let (m, mx) = (first..=last).fold((0.0, 0.0), |(m, mx), j| (m + density[j], mx + density[j] * grid.coord(j)));
            Peak { centre: mx / m, mass: m * grid.spacing(), first, last }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    /// `||psi_stage||^2` relative to the prepared state.
    pub probability: f64,
    /// `||psi_stage - psi_ref||`, with `psi_ref` the prepared state (its
    /// image at the last stage).
    pub distance: f64,
    /// `|<psi_ref|psi_stage>|^2`.
    pub overlap: f64,
    /// Mass outside the target region over the stage's own mass.
    pub leakage: f64,
    /// Mass outside the target region over the prepared mass.
    pub leakage_total: f64,
    pub peaks: Vec<Peak>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub stages: Vec<StageReport>,
    pub transmitted: f64,
    pub blocked: f64,
    pub t_prime: Option<f64>,
    pub wavelength_m: f64,
    /// Far-field indicator for the aperture's outer edge.
    pub fresnel_number: f64,
    /// For double-slit runs with a grating: probability outside the two
    /// central cells of the joint eigenstate built from the same `T'`.
    pub eigenstate_leakage: Option<f64>,
}

impl RunReport {
    pub fn stage(&self, stage: Stage) -> &StageReport {
        self.stages.iter().find(|s| s.stage == stage).expect("every run reports every stage")
    }
}

/// Wavefunctions of a run alongside its report.
#[derive(Clone, Debug)]
pub struct Run {
    pub report: RunReport,
    pub prepared: Wavefunction,
    pub after_grating: Wavefunction,
    pub imaged: Wavefunction,
}

fn stage_report(
    stage: Stage,
    psi: &Wavefunction,
    reference: &Wavefunction,
    target: &Mask,
) -> Result<StageReport> {
    let total = reference.norm_sq();
    let mass = psi.norm_sq();
    let inside = psi.densities().iter().zip(&target.0).filter(|(_, &t)| t).map(|(d, _)| d).sum::<f64>()
        * psi.grid().spacing();
    let f = fidelity(reference, psi)?;
    let outside = (mass - inside).max(0.0);
    Ok(StageReport {
        stage,
        probability: mass / total,
        distance: f.distance,
        overlap: f.overlap,
        leakage: if mass > 0.0 { outside / mass } else { 0.0 },
        leakage_total: outside / total,
        peaks: find_peaks(psi, PEAK_THRESHOLD),
    })
}

/// Mass of the double-slit joint eigenstate outside its two central cells.
pub fn eigenstate_model_leakage(slit_width: f64, period: f64, t_prime: f64) -> Result<f64> {
    let spec = EnvelopeSpec::double_slit(slit_width, period, t_prime)?;
    let grid = Grid::periodic(period, 2048, 4)?;
    let state = comb_construct(&spec, None, &grid, Coefficients::Periodized)?;
    Ok(1.0 - state.central_pair_mass())
}

pub fn simulate(config: &ExperimentConfig) -> Result<Run> {
    let prepared = prepare(config)?;
    let grating = apply_grating(&prepared, config)?;
    let imaged = image(&grating.state);
    let aperture = config.aperture()?.realize(prepared.grid());
    let target = config.image_target(prepared.grid())?;
    let stages = vec![
        stage_report(Stage::Prepared, &prepared, &prepared, &aperture)?,
        stage_report(Stage::AfterGrating, &grating.state, &prepared, &aperture)?,
        stage_report(Stage::Imaged, &imaged, &image(&prepared), &target)?,
    ];
    for s in &stages {
        if !(s.probability.is_finite() && s.probability <= 1.0 + 1e-9) {
            return Err(Error::Numerical(format!("{} stage probability {} out of range", s.stage, s.probability)));
        }
    }
    let t_prime = config.t_prime()?;
    let eigenstate_leakage = match (config.mode, t_prime) {
        // cell masses depend only on the comb weights, not the slit width
        (ApertureMode::Double, Some(tp)) => Some(eigenstate_model_leakage(0.5 * config.period, config.period, tp)?),
        _ => None,
    };
    let half_span = 0.5 * (config.period + config.slit_width);
    let report = RunReport {
        stages,
        transmitted: grating.transmitted,
        blocked: grating.blocked,
        t_prime,
        wavelength_m: config.geometry.wavelength_m,
        fresnel_number: config.geometry.fresnel_number(half_span),
        eigenstate_leakage,
    };
    Ok(Run { report, prepared, after_grating: grating.state, imaged })
}

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    simulate(config).map(|r| r.report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    NWires,
    WireWidth,
    Distance,
    TPrime,
    NPoints,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] =
        [SweepParam::NWires, SweepParam::WireWidth, SweepParam::Distance, SweepParam::TPrime, SweepParam::NPoints];

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::NWires => "n_wires",
            SweepParam::WireWidth => "wire_width",
            SweepParam::Distance => "L",
            SweepParam::TPrime => "tprime",
            SweepParam::NPoints => "n_points",
        }
    }

    /// Unit label for table headers.
    pub fn unit(&self) -> &'static str {
        match self {
            SweepParam::NWires | SweepParam::NPoints => "1",
            SweepParam::WireWidth | SweepParam::Distance => "m",
            SweepParam::TPrime => "T",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownParameter(s.to_string()))
    }
}

fn whole(value: f64, what: &str, min: usize) -> Result<usize> {
    if value.fract() != 0.0 || value < min as f64 || !value.is_finite() {
        return Err(invalid(format!("{what} must be an integer >= {min}, got {value}")));
    }
    Ok(value as usize)
}

/// The configuration with one parameter replaced.
pub fn with_parameter(config: &ExperimentConfig, param: SweepParam, value: f64) -> Result<ExperimentConfig> {
    let mut c = config.clone();
    match (param, &mut c.grating) {
        (SweepParam::NWires, GratingModel::Wires(g)) => g.n_wires = whole(value, "n_wires", 0)?,
        (SweepParam::WireWidth, GratingModel::Wires(g)) => g.wire_width = value,
        (SweepParam::TPrime, GratingModel::Ideal { t_prime, .. }) => *t_prime = value * config.period,
        (SweepParam::Distance, _) => c.geometry = OpticalGeometry::new(value, c.geometry.wavelength_m, c.geometry.unit_m)?,
        (SweepParam::NPoints, _) => c.numerics.n_points = whole(value, "n_points", 2)?,
        (p, _) => {
            return Err(invalid(format!("parameter '{}' does not apply to this grating model", p.name())));
        }
    }
    c.validate()?;
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub transmitted: f64,
    /// Image-plane leakage normalised by transmitted mass.
    pub leakage: f64,
    pub distance: f64,
    pub overlap: f64,
}

/// One run per value, computed in parallel, rows in input order.
pub fn sweep(config: &ExperimentConfig, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(invalid("sweep needs at least one value"));
    }
    let configs = values.iter().map(|&v| with_parameter(config, param, v)).collect::<Result<Vec<_>>>()?;
    configs
        .par_iter()
        .zip(values.par_iter())
        .map(|(c, &value)| {
            let r = run(c)?;
            let imaged = r.stage(Stage::Imaged);
            Ok(SweepRow {
                value,
                transmitted: r.transmitted,
                leakage: imaged.leakage,
                distance: imaged.distance,
                overlap: imaged.overlap,
            })
        })
        .collect()
}

/// `|| chi_Y(P) chi_X(Q) psi - chi_X(Q) chi_Y(P) psi ||` for the periodic
/// aperture set and the ideal grating, and how far one more pass of both
/// projectors moves `chi_Y(P) chi_X(Q) psi`.
pub fn projector_order_check(config: &ExperimentConfig) -> Result<(f64, f64)> {
    let ideal = config.idealized()?;
    let psi = prepare(&ideal)?;
    let x = ideal.periodic_aperture()?;
    let y = transmitting_set(&ideal, psi.grid())?.ok_or_else(|| invalid("order check needs a grating"))?;
    let xy = project_momentum(&project_position(&psi, &x)?, y.as_ref())?;
    let yx = project_position(&project_momentum(&psi, y.as_ref())?, &x)?;
    let again = project_momentum(&project_position(&xy, &x)?, y.as_ref())?;
    Ok((xy.sub(&yx)?.norm(), again.sub(&xy)?.norm()))
}
