//! Free propagation from the aperture plane to the grating plane.
//!
//! Aperture coordinates are in internal units of `unit_m` metres (the slit
//! period in SI runs); screen coordinates are in metres. With
//! `s = 2 pi / (L lambda)` and `sigma = s * unit_m`, the far-field screen
//! amplitude is
//!
//! ```text
//! psi_L(x) = sqrt(sigma / i) exp(i s x^2 / 2) psi~(-sigma x)
//! ```
//!
//! so screen position `x` carries momentum `-sigma x`. The Fresnel oracle
//! keeps the `exp(i s (u xi)^2 / 2)` factor the far-field form drops.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{fourier, Grid, Space, Wavefunction, C64};
use crate::sets::IntervalSet;

/// Samples of the aperture field below this fraction of the peak amplitude
/// are treated as outside its support.
const SUPPORT_RTOL: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalGeometry {
    pub distance_m: f64,
    pub wavelength_m: f64,
    /// Metres per internal length unit on the aperture plane.
    pub unit_m: f64,
}

impl OpticalGeometry {
    pub fn new(distance_m: f64, wavelength_m: f64, unit_m: f64) -> Result<Self> {
        for (name, v) in [("L", distance_m), ("lambda", wavelength_m), ("unit", unit_m)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { distance_m, wavelength_m, unit_m })
    }

    /// Dimensionless geometry with `L lambda = 2 pi` and unit 1, so the
    /// screen coordinate equals minus the momentum.
    pub fn natural() -> Self {
        Self { distance_m: 2.0 * PI, wavelength_m: 1.0, unit_m: 1.0 }
    }

    /// `s = 2 pi / (L lambda)` in 1/m^2.
    pub fn scale(&self) -> f64 {
        2.0 * PI / (self.distance_m * self.wavelength_m)
    }

    /// `sigma = s * unit`: internal momentum per metre of screen.
    pub fn momentum_scale(&self) -> f64 {
        self.scale() * self.unit_m
    }

    /// `rho = pi (half_span * unit)^2 / (L lambda)`; far field needs `rho << 1`.
    pub fn fresnel_number(&self, half_span: f64) -> f64 {
        let h = half_span * self.unit_m;
        PI * h * h / (self.distance_m * self.wavelength_m)
    }
}

/// `lambda = wire_spacing * T / L`: the wavelength for which neighbouring
/// wires sit one momentum period `2 pi / T` apart.
pub fn infer_wavelength(distance_m: f64, period_m: f64, wire_spacing_m: f64) -> Result<f64> {
    for (name, v) in [("L", distance_m), ("T", period_m), ("wire spacing", wire_spacing_m)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(wire_spacing_m * period_m / distance_m)
}

/// Screen interval endpoints (metres) scaled to internal momentum by `sigma`.
pub fn screen_to_momentum(set: &IntervalSet, geo: &OpticalGeometry) -> IntervalSet {
    set.scaled(geo.momentum_scale()).expect("momentum scale is positive")
}

pub fn momentum_to_screen(set: &IntervalSet, geo: &OpticalGeometry) -> IntervalSet {
    set.scaled(1.0 / geo.momentum_scale()).expect("momentum scale is positive")
}

/// The momentum set a grating occupying `screen` acts on: the screen set
/// reflected (screen `x` carries momentum `-sigma x`) and scaled.
pub fn grating_momentum_set(screen: &IntervalSet, geo: &OpticalGeometry) -> IntervalSet {
    screen_to_momentum(&screen.reflected(), geo)
}

/// Screen grid whose points are the aperture grid's momentum samples mapped
/// to metres. Far-field propagation onto it is an exact relabelling of the
/// discrete transform.
pub fn mapped_screen_grid(aperture: &Grid, geo: &OpticalGeometry) -> Grid {
    let conj = aperture.conjugate();
    Grid::new(conj.extent() / geo.momentum_scale(), conj.n_points()).expect("scaled conjugate grid is valid")
}

/// Points of the mapped screen grid with `|sigma x| <= k_max`, as a grid on
/// the same lattice. The full mapped grid reaches the aperture Nyquist
/// momentum, where no sampled kernel is resolved; the Fresnel oracle is
/// evaluated on such a window instead.
pub fn screen_window(aperture: &Grid, geo: &OpticalGeometry, k_max: f64) -> Result<Grid> {
    let full = mapped_screen_grid(aperture, geo);
    let dk = aperture.conjugate().spacing();
    let half = ((k_max / dk).floor() as usize).min(full.n_points() / 2);
    if half == 0 {
        return Err(invalid(format!("screen window |k| <= {k_max} holds no momentum samples")));
    }
    Grid::new(2.0 * half as f64 * full.spacing(), 2 * half)
}

fn support_indices(psi: &Wavefunction) -> Vec<usize> {
    let peak = psi.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cut = SUPPORT_RTOL * peak;
    psi.values().iter().enumerate().filter(|(_, v)| v.norm() > cut && peak > 0.0).map(|(j, _)| j).collect()
}

fn chirp(s: f64, x: f64) -> C64 {
    C64::from_polar(1.0, 0.5 * s * x * x)
}

/// Far-field amplitude on `screen`. Uses the FFT when `screen` is the
/// mapped grid, otherwise a direct sum over the aperture support.
pub fn fraunhofer(psi0: &Wavefunction, geo: &OpticalGeometry, screen: &Grid) -> Result<Wavefunction> {
    psi0.assert_space(Space::Position)?;
    let s = geo.scale();
    let sigma = geo.momentum_scale();
    let pref = C64::from_polar(sigma.sqrt(), -0.25 * PI);
    if screen.matches(&mapped_screen_grid(psi0.grid(), geo)) {
        let phi = fourier(psi0)?;
        let n = screen.n_points();
        let values = (0..n)
            .map(|m| {
                let x = screen.coord(m);
                pref * chirp(s, x) * phi.values()[(n - m) % n]
            })
            .collect();
        return Wavefunction::new(*screen, values, Space::Position);
    }
    let grid = psi0.grid();
    let dxi = grid.spacing();
    let support = support_indices(psi0);
    let values = screen
        .coords()
        .par_iter()
        .map(|&x| {
            let sum: C64 = support
                .iter()
                .map(|&j| psi0.values()[j] * C64::from_polar(1.0, -sigma * x * grid.coord(j)))
                .sum();
            pref * chirp(s, x) * sum * (dxi / (2.0 * PI).sqrt())
        })
        .collect();
    Wavefunction::new(*screen, values, Space::Position)
}

/// Largest phase step of the Fresnel kernel between neighbouring aperture
/// samples, over all screen points and the aperture support.
pub fn fresnel_phase_step(psi0: &Wavefunction, geo: &OpticalGeometry, screen: &Grid) -> f64 {
    let support = support_indices(psi0);
    let (Some(&first), Some(&last)) = (support.first(), support.last()) else {
        return 0.0;
    };
    let u = geo.unit_m;
    let g = psi0.grid();
    let (a_lo, a_hi) = (u * g.coord(first), u * g.coord(last));
    let (s_lo, s_hi) = (screen.origin(), screen.coord(screen.n_points() - 1));
    let span = (s_hi - a_lo).abs().max((s_lo - a_hi).abs());
    geo.scale() * u * span * g.spacing()
}

/// Direct quadrature of the full Fresnel kernel. Requires at least eight
/// aperture samples per kernel oscillation everywhere on `screen`.
pub fn fresnel(psi0: &Wavefunction, geo: &OpticalGeometry, screen: &Grid) -> Result<Wavefunction> {
    psi0.assert_space(Space::Position)?;
    let step = fresnel_phase_step(psi0, geo, screen);
    if step > 0.25 * PI {
        return Err(Error::Resolution(format!(
            "Fresnel kernel phase advances {step:.3} rad per aperture sample (limit pi/4); refine the aperture grid or narrow the screen"
        )));
    }
    let s = geo.scale();
    let u = geo.unit_m;
    let grid = psi0.grid();
    let support = support_indices(psi0);
    let pref = C64::from_polar((geo.momentum_scale() / (2.0 * PI)).sqrt(), -0.25 * PI) * grid.spacing();
    let values = screen
        .coords()
        .par_iter()
        .map(|&x| {
            let sum: C64 = support.iter().map(|&j| psi0.values()[j] * chirp(s, x - u * grid.coord(j))).sum();
            pref * sum
        })
        .collect();
    Wavefunction::new(*screen, values, Space::Position)
}

/// Mismatch between a reference amplitude and an approximation of it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Deviation {
    /// `||b - a|| / ||a||`.
    pub raw: f64,
    /// Same after removing the best global phase from `b`.
    pub phase_aligned: f64,
    /// Relative L2 difference of the intensities.
    pub intensity: f64,
}

pub fn deviation(a: &Wavefunction, b: &Wavefunction) -> Result<Deviation> {
    let na = a.norm();
    if na == 0.0 {
        return Err(invalid("deviation reference has zero norm"));
    }
    let raw = b.sub(a)?.norm() / na;
    let overlap = b.inner(a)?;
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    let aligned = b.map(|v| v * phase);
    let phase_aligned = aligned.sub(a)?.norm() / na;
    let (num, den) = a
        .densities()
        .iter()
        .zip(b.densities())
        .fold((0.0, 0.0), |(n, d), (x, y)| (n + (y - x) * (y - x), d + x * x));
    Ok(Deviation { raw, phase_aligned, intensity: (num / den).sqrt() })
}

/// Probability on `set` for a screen-plane amplitude.
pub fn screen_probability(psi: &Wavefunction, set: &IntervalSet) -> f64 {
    crate::sets::project_position(psi, set).map(|p| p.norm_sq()).unwrap_or(0.0)
}
