//! JSON configuration. Keys carry their units (`_m` metres, `_T` periods);
//! unknown keys are rejected.
//!
//! ```json
//! {
//!   "units": "si",
//!   "mode": "double",
//!   "geometry": {
//!     "L_m": 0.55, "lambda_m": "infer", "T_m": 0.25e-3, "slit_width_m": 0.04e-3,
//!     "grating": { "kind": "wires", "n_wires": 6, "wire_width_m": 0.127e-3, "wire_spacing_m": 1.3e-3 }
//!   },
//!   "numerics": { "n_points": 51200, "extent_T": 256 }
//! }
//! ```
//!
//! With `"units": "natural"` lengths are in periods (`T = 1`), the geometry
//! keys drop their `_m` suffix, and the grating plane is measured in
//! momentum units (screen position `x` carries momentum `-x`).

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::eigenstate::{
    comb_construct, cosine_momentum_window, fourier_series_construct, rect_window, Coefficients, EnvelopeSpec,
    FlatWindow, JointEigenstate, MomentumWindow,
};
use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::pipeline::{
    t_prime_from_wire_width, ApertureMode, ExperimentConfig, GratingModel, Numerics, DEFAULT_EXTENT,
    DEFAULT_N_POINTS, PAPER_SINGLE_SLIT_SHIFT_M, PAPER_WIRE_SPACING_M,
};
use crate::propagation::{infer_wavelength, OpticalGeometry};
use crate::sets::GratingSpec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Si,
    Natural,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Wavelength {
    Metres(f64),
    Keyword(WavelengthKeyword),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WavelengthKeyword {
    Infer,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SiGrating {
    None,
    Wires {
        n_wires: usize,
        wire_width_m: f64,
        wire_spacing_m: f64,
        #[serde(default)]
        lateral_shift_m: Option<f64>,
    },
    Ideal {
        #[serde(default)]
        wire_width_m: Option<f64>,
        #[serde(default, rename = "tprime_T")]
        tprime_t: Option<f64>,
        #[serde(default)]
        lateral_shift_m: Option<f64>,
        /// Only read when the wavelength is inferred.
        #[serde(default)]
        wire_spacing_m: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiGeometry {
    #[serde(rename = "L_m")]
    pub l_m: f64,
    pub lambda_m: Wavelength,
    #[serde(rename = "T_m")]
    pub t_m: f64,
    pub slit_width_m: f64,
    pub grating: SiGrating,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NaturalGrating {
    None,
    Wires {
        n_wires: usize,
        wire_width: f64,
        #[serde(default)]
        wire_spacing: Option<f64>,
        #[serde(default)]
        lateral_shift: Option<f64>,
    },
    Ideal {
        #[serde(default)]
        wire_width: Option<f64>,
        #[serde(default)]
        tprime: Option<f64>,
        #[serde(default)]
        lateral_shift: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaturalGeometry {
    pub slit_width: f64,
    pub grating: NaturalGrating,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    #[serde(default = "default_extent", rename = "extent_T")]
    pub extent_t: f64,
}

fn default_n_points() -> usize {
    DEFAULT_N_POINTS
}

fn default_extent() -> f64 {
    DEFAULT_EXTENT
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self { n_points: DEFAULT_N_POINTS, extent_t: DEFAULT_EXTENT }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Geometry {
    Si(SiGeometry),
    Natural(NaturalGeometry),
}

/// A simulation config as written in the file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub units: Units,
    pub mode: ApertureMode,
    pub geometry: Geometry,
    pub numerics: NumericsConfig,
}

fn strict<T: for<'de> Deserialize<'de>>(value: Value, what: &str) -> Result<T> {
    serde_json::from_value(value).map_err(|e| invalid(format!("{what}: {e}")))
}

fn take_object(value: Value, what: &str) -> Result<serde_json::Map<String, Value>> {
    match value {
        Value::Object(m) => Ok(m),
        _ => Err(invalid(format!("{what} must be a JSON object"))),
    }
}

impl SimulationConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| invalid(format!("config is not valid JSON: {e}")))?;
        let mut top = take_object(value, "config")?;
        let units: Units = match top.remove("units") {
            Some(v) => strict(v, "units")?,
            None => Units::Si,
        };
        let mode: ApertureMode = strict(top.remove("mode").ok_or_else(|| invalid("missing key 'mode'"))?, "mode")?;
        let geometry = top.remove("geometry").ok_or_else(|| invalid("missing key 'geometry'"))?;
        let geometry = match units {
            Units::Si => Geometry::Si(strict(geometry, "geometry")?),
            Units::Natural => Geometry::Natural(strict(geometry, "geometry")?),
        };
        let numerics = match top.remove("numerics") {
            Some(v) => strict(v, "numerics")?,
            None => NumericsConfig::default(),
        };
        if let Some(key) = top.keys().next() {
            return Err(invalid(format!("unknown key '{key}'")));
        }
        Ok(Self { units, mode, geometry, numerics })
    }

    /// Canonical JSON of the config with defaults filled in.
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serialises")
    }

    /// Internal-unit experiment description.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let numerics = Numerics { n_points: self.numerics.n_points, extent: self.numerics.extent_t };
        let default_shift = |spacing: f64| match self.mode {
            ApertureMode::Single => spacing * PAPER_SINGLE_SLIT_SHIFT_M / PAPER_WIRE_SPACING_M,
            ApertureMode::Double => 0.0,
        };
        let config = match self.geometry {
            Geometry::Si(g) => {
                let lambda = match g.lambda_m {
                    Wavelength::Metres(l) => l,
                    Wavelength::Keyword(WavelengthKeyword::Infer) => {
                        let spacing = match g.grating {
                            SiGrating::Wires { wire_spacing_m, .. } => wire_spacing_m,
                            SiGrating::Ideal { wire_spacing_m: Some(s), .. } => s,
                            _ => return Err(invalid("\"lambda_m\": \"infer\" needs the grating's wire spacing")),
                        };
                        infer_wavelength(g.l_m, g.t_m, spacing)?
                    }
                };
                let geometry = OpticalGeometry::new(g.l_m, lambda, g.t_m)?;
                // wires one momentum period apart on this geometry
                let natural_spacing = lambda * g.l_m / g.t_m;
                let grating = match g.grating {
                    SiGrating::None => GratingModel::None,
                    SiGrating::Wires { n_wires, wire_width_m, wire_spacing_m, lateral_shift_m } => {
                        GratingModel::Wires(GratingSpec {
                            n_wires,
                            wire_width: wire_width_m,
                            wire_spacing: wire_spacing_m,
                            lateral_shift: lateral_shift_m.unwrap_or_else(|| default_shift(wire_spacing_m)),
                        })
                    }
                    SiGrating::Ideal { wire_width_m, tprime_t, lateral_shift_m, .. } => {
                        let t_prime = ideal_t_prime(wire_width_m, tprime_t, |w| t_prime_from_wire_width(1.0, w, &geometry))?;
                        let screen_shift = lateral_shift_m.unwrap_or_else(|| default_shift(natural_spacing));
                        GratingModel::Ideal { t_prime, shift: -geometry.momentum_scale() * screen_shift }
                    }
                };
                ExperimentConfig { mode: self.mode, slit_width: g.slit_width_m / g.t_m, period: 1.0, grating, geometry, numerics }
            }
            Geometry::Natural(g) => {
                let geometry = OpticalGeometry::natural();
                let spacing = 2.0 * std::f64::consts::PI;
                let grating = match g.grating {
                    NaturalGrating::None => GratingModel::None,
                    NaturalGrating::Wires { n_wires, wire_width, wire_spacing, lateral_shift } => {
                        let wire_spacing = wire_spacing.unwrap_or(spacing);
                        GratingModel::Wires(GratingSpec {
                            n_wires,
                            wire_width,
                            wire_spacing,
                            lateral_shift: lateral_shift.unwrap_or_else(|| default_shift(wire_spacing)),
                        })
                    }
                    NaturalGrating::Ideal { wire_width, tprime, lateral_shift } => {
                        let t_prime = ideal_t_prime(wire_width, tprime, |w| t_prime_from_wire_width(1.0, w, &geometry))?;
                        GratingModel::Ideal { t_prime, shift: -lateral_shift.unwrap_or_else(|| default_shift(spacing)) }
                    }
                };
                ExperimentConfig { mode: self.mode, slit_width: g.slit_width, period: 1.0, grating, geometry, numerics }
            }
        };
        config.validate()?;
        Ok(config)
    }
}

fn ideal_t_prime(
    wire_width: Option<f64>,
    tprime: Option<f64>,
    from_width: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    match (wire_width, tprime) {
        (Some(w), None) => from_width(w),
        (None, Some(t)) => Ok(t),
        _ => Err(invalid("ideal grating needs exactly one of the wire width and tprime")),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionWindowKind {
    #[default]
    Rect,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumWindowKind {
    #[default]
    Cosine,
    Flat,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    #[default]
    Comb,
    FourierSeries,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientRule {
    #[default]
    Periodized,
    Continuum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenNumerics {
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_samples_per_period")]
    pub samples_per_period: usize,
}

fn default_cells() -> usize {
    64
}

fn default_samples_per_period() -> usize {
    128
}

impl Default for EigenNumerics {
    fn default() -> Self {
        Self { cells: default_cells(), samples_per_period: default_samples_per_period() }
    }
}

/// Joint-eigenstate request, dimensionless (lengths in any fixed unit).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenstateConfig {
    #[serde(default)]
    pub window: PositionWindowKind,
    pub a: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default, rename = "Tprime")]
    pub t_prime: Option<f64>,
    #[serde(default)]
    pub momentum_window: MomentumWindowKind,
    /// Half-width of the flat momentum window.
    #[serde(default)]
    pub flat_half_width: Option<f64>,
    /// Comb offset; defaults to `T/2`.
    #[serde(default)]
    pub shift: Option<f64>,
    /// Keep copies with `|centre| <= n_terms T`; all copies on the grid if absent.
    #[serde(default)]
    pub n_terms: Option<usize>,
    #[serde(default)]
    pub construction: Construction,
    #[serde(default)]
    pub coefficients: CoefficientRule,
    #[serde(default)]
    pub numerics: EigenNumerics,
}

impl EigenstateConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("eigenstate config: {e}")))
    }

    pub fn spec(&self) -> Result<EnvelopeSpec> {
        let position = Arc::new(rect_window(self.a, self.t)?);
        let momentum: Arc<dyn MomentumWindow> = match self.momentum_window {
            MomentumWindowKind::Cosine => {
                let tp = self.t_prime.ok_or_else(|| invalid("cosine momentum window needs 'Tprime'"))?;
                Arc::new(cosine_momentum_window(tp, self.t)?)
            }
            MomentumWindowKind::Flat => {
                let d = self.flat_half_width.ok_or_else(|| invalid("flat momentum window needs 'flat_half_width'"))?;
                Arc::new(FlatWindow::new(d)?)
            }
        };
        EnvelopeSpec::new(position, momentum, self.t, self.shift.unwrap_or(0.5 * self.t))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::periodic(self.t, self.numerics.cells, self.numerics.samples_per_period)
    }

    pub fn build(&self) -> Result<JointEigenstate> {
        let spec = self.spec()?;
        let grid = self.grid()?;
        match self.construction {
            Construction::Comb => {
                let rule = match self.coefficients {
                    CoefficientRule::Periodized => Coefficients::Periodized,
                    CoefficientRule::Continuum => Coefficients::Continuum,
                };
                comb_construct(&spec, self.n_terms, &grid, rule)
            }
            Construction::FourierSeries => {
                let n = self.n_terms.unwrap_or(self.numerics.cells);
                fourier_series_construct(&spec, n, &grid)
            }
        }
    }
}
