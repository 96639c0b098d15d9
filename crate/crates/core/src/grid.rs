//! Sampled one-dimensional wavefunctions and the unitary Fourier transform.
//!
//! A [`Grid`] of `n` points spans `[-extent/2, extent/2)`; sample `j` sits at
//! `-extent/2 + j * spacing`. The transform follows the continuum convention
//!
//! ```text
//! f~(k) = (2 pi)^(-1/2) * integral f(x) exp(+i k x) dx
//! ```
//!
//! evaluated as a Riemann sum on the grid and landing on the conjugate grid
//! (spacing `2 pi / extent`, extent `2 pi / spacing`). With that pairing the
//! discrete transform is exactly unitary and its square is exactly the grid
//! reflection `j -> (n - j) mod n`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Relative tolerance used when deciding whether two grids coincide.
const GRID_MATCH_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
    extent: f64,
}

impl Grid {
    pub fn new(extent: f64, n_points: usize) -> Result<Self> {
        if !(extent.is_finite() && extent > 0.0) {
            return Err(invalid(format!("grid extent must be positive, got {extent}")));
        }
        if n_points < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {n_points}")));
        }
        Ok(Self { n_points, extent })
    }

    /// Grid holding `cells` whole periods of length `period`, each sampled
    /// `samples_per_period` times. Period boundaries land exactly on samples.
    pub fn periodic(period: f64, cells: usize, samples_per_period: usize) -> Result<Self> {
        if cells == 0 || samples_per_period == 0 {
            return Err(invalid("periodic grid needs at least one cell and one sample"));
        }
        Self::new(period * cells as f64, cells * samples_per_period)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.n_points as f64
    }

    pub fn origin(&self) -> f64 {
        -0.5 * self.extent
    }

    pub fn coord(&self, j: usize) -> f64 {
        self.origin() + j as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.coord(j)).collect()
    }

    /// The reciprocal grid the Fourier transform maps onto.
    pub fn conjugate(&self) -> Grid {
        Grid { n_points: self.n_points, extent: 2.0 * PI / self.spacing() }
    }

    pub fn matches(&self, other: &Grid) -> bool {
        self.n_points == other.n_points
            && (self.extent - other.extent).abs() <= GRID_MATCH_RTOL * self.extent.abs().max(other.extent.abs())
    }

    /// Index of the sample nearest to `x`, if `x` lies on the grid's span.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let j = ((x - self.origin()) / self.spacing()).round();
        (j >= 0.0 && j < self.n_points as f64).then_some(j as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    Position,
    Momentum,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Position => f.write_str("position"),
            Space::Momentum => f.write_str("momentum"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Wavefunction {
    grid: Grid,
    values: Vec<C64>,
    space: Space,
}

impl Wavefunction {
    pub fn new(grid: Grid, values: Vec<C64>, space: Space) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(invalid(format!(
                "wavefunction has {} values for a {}-point grid",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, values, space })
    }

    pub fn zeros(grid: Grid, space: Space) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.n_points()], space }
    }

    /// Samples `f` at every grid coordinate.
    pub fn from_fn(grid: Grid, space: Space, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.coords().into_iter().map(f).collect();
        Self { grid, values, space }
    }

    pub fn from_real(grid: Grid, space: Space, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, space, |x| C64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Same samples, reinterpreted as living in `space`.
    pub fn relabel(mut self, space: Space) -> Self {
        self.space = space;
        self
    }

    pub fn with_values(&self, values: Vec<C64>) -> Result<Self> {
        Self::new(self.grid, values, self.space)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect(), space: self.space }
    }

    pub fn densities(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Riemann sum of `|psi|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Numerical(format!("cannot normalise a state of norm {n}")));
        }
        Ok(self.map(|v| v / n))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DomainMismatch { expected: self.space, found: other.space });
        }
        if !self.grid.matches(&other.grid) {
            return Err(invalid(format!("grid mismatch: {:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_compatible(other)?;
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.spacing())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, values, space: self.space })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, values, space: self.space })
    }

    /// Cyclic shift by a whole number of samples (positive moves towards +x).
    pub fn rolled(&self, samples: isize) -> Self {
        let n = self.values.len() as isize;
        let mut values = vec![C64::new(0.0, 0.0); self.values.len()];
        for (j, v) in self.values.iter().enumerate() {
            values[(j as isize + samples).rem_euclid(n) as usize] = *v;
        }
        Self { grid: self.grid, values, space: self.space }
    }

    pub(crate) fn assert_space(&self, expected: Space) -> Result<()> {
        if self.space != expected {
            return Err(Error::DomainMismatch { expected, found: self.space });
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::Numerical("wavefunction contains non-finite samples".into()))
        }
    }
}

pub fn norm_sq(psi: &Wavefunction) -> f64 {
    psi.norm_sq()
}

/// Kernel variants for [`fourier_with`]. Only `Standard` is a correct
/// implementation; `FlippedKernel` exists so the validation suite can prove
/// that it detects a sign error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Convention {
    #[default]
    Standard,
    FlippedKernel,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Clone, Copy)]
enum Direction {
    /// sum_j g_j exp(+2 pi i m j / n)
    Positive,
    /// sum_j g_j exp(-2 pi i m j / n)
    Negative,
}

fn raw_dft(buf: &mut [C64], dir: Direction) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = match dir {
            Direction::Positive => planner.plan_fft_inverse(buf.len()),
            Direction::Negative => planner.plan_fft_forward(buf.len()),
        };
        fft.process(buf);
    });
}

fn alternate(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `exp(i pi n / 2)`, the constant left over from centring both grids.
fn centring_phase(n: usize) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Centred transform: with x_j = (j - n/2) dx and k_m = (m - n/2) dk,
/// exp(+-i k_m x_j) = exp(+-2 pi i m j / n) (-1)^(m+j) exp(+-i pi n / 2).
fn centred_transform(values: &[C64], dir: Direction, scale: f64) -> Vec<C64> {
    let n = values.len();
    let mut buf: Vec<C64> = values.iter().enumerate().map(|(j, v)| v * alternate(j)).collect();
    raw_dft(&mut buf, dir);
    let phase = match dir {
        Direction::Positive => centring_phase(n),
        Direction::Negative => centring_phase(n).conj(),
    } * scale;
    buf.iter_mut().enumerate().for_each(|(m, v)| *v *= phase * alternate(m));
    buf
}

/// Unitary Fourier transform with the `exp(+i k x)` kernel.
pub fn fourier(psi: &Wavefunction) -> Result<Wavefunction> {
    fourier_with(psi, Convention::Standard)
}

pub fn fourier_with(psi: &Wavefunction, convention: Convention) -> Result<Wavefunction> {
    psi.assert_space(Space::Position)?;
    let dir = match convention {
        Convention::Standard => Direction::Positive,
        Convention::FlippedKernel => Direction::Negative,
    };
    let scale = psi.grid.spacing() / (2.0 * PI).sqrt();
    let values = centred_transform(&psi.values, dir, scale);
    Ok(Wavefunction { grid: psi.grid.conjugate(), values, space: Space::Momentum })
}

pub fn inverse_fourier(psi: &Wavefunction) -> Result<Wavefunction> {
    psi.assert_space(Space::Momentum)?;
    let scale = psi.grid.spacing() / (2.0 * PI).sqrt();
    let values = centred_transform(&psi.values, Direction::Negative, scale);
    Ok(Wavefunction { grid: psi.grid.conjugate(), values, space: Space::Position })
}

/// Spatial inversion `x -> -x` on the grid (the `-extent/2` sample maps to itself).
pub fn parity(psi: &Wavefunction) -> Wavefunction {
    let n = psi.values.len();
    let values = (0..n).map(|j| psi.values[(n - j) % n]).collect();
    Wavefunction { grid: psi.grid, values, space: psi.space }
}

/// Closeness of two states: the L2 distance `||psi - phi||` and the
/// overlap `|<psi|phi>|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fidelity {
    pub distance: f64,
    pub overlap: f64,
}

pub fn fidelity(psi: &Wavefunction, phi: &Wavefunction) -> Result<Fidelity> {
    let distance = psi.sub(phi)?.norm();
    let overlap = psi.inner(phi)?.norm_sqr();
    Ok(Fidelity { distance, overlap })
}

pub fn distance(psi: &Wavefunction, phi: &Wavefunction) -> Result<f64> {
    Ok(psi.sub(phi)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: Grid) -> Wavefunction {
        Wavefunction::from_real(grid, Space::Position, |x| (-0.5 * x * x).exp())
    }

    #[test]
    fn grid_coordinates() {
        let g = Grid::new(10.0, 4).unwrap();
        assert_eq!(g.spacing(), 2.5);
        assert_eq!(g.coords(), vec![-5.0, -2.5, 0.0, 2.5]);
    }

    #[test]
    fn conjugate_spacing_of_two_pi_grid_is_one() {
        let g = Grid::new(2.0 * PI, 1 << 10).unwrap();
        assert_eq!(g.conjugate().spacing(), 1.0);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(matches!(Grid::new(0.0, 8), Err(Error::InvalidArgument(_))));
        assert!(matches!(Grid::new(-1.0, 8), Err(Error::InvalidArgument(_))));
        assert!(matches!(Grid::new(1.0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zero_state_has_zero_norm() {
        let g = Grid::new(4.0, 16).unwrap();
        assert_eq!(Wavefunction::zeros(g, Space::Position).norm_sq(), 0.0);
    }

    #[test]
    fn unit_rect_norm_is_its_width() {
        let g = Grid::new(8.0, 4096).unwrap();
        let psi = Wavefunction::from_real(g, Space::Position, |x| if (-0.5..0.5).contains(&x) { 1.0 } else { 0.0 });
        assert!((psi.norm_sq() - 1.0).abs() <= g.spacing());
    }

    #[test]
    fn gaussian_is_fourier_invariant() {
        let g = Grid::new(40.0, 1024).unwrap();
        let ft = fourier(&gaussian(g)).unwrap();
        assert_eq!(ft.space(), Space::Momentum);
        for (k, v) in ft.grid().coords().iter().zip(ft.values()) {
            assert!((v - C64::new((-0.5 * k * k).exp(), 0.0)).norm() < 1e-10, "k = {k}");
        }
        let back = inverse_fourier(&ft).unwrap();
        for (x, v) in back.grid().coords().iter().zip(back.values()) {
            assert!((v - C64::new((-0.5 * x * x).exp(), 0.0)).norm() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn wrong_space_is_rejected() {
        let g = Grid::new(4.0, 16).unwrap();
        let m = Wavefunction::zeros(g, Space::Momentum);
        assert!(matches!(fourier(&m), Err(Error::DomainMismatch { .. })));
        let p = Wavefunction::zeros(g, Space::Position);
        assert!(matches!(inverse_fourier(&p), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn displaced_gaussian_picks_up_plus_ikx_phase() {
        let g = Grid::new(40.0, 1024).unwrap();
        let x0 = 1.25;
        let psi = Wavefunction::from_real(g, Space::Position, |x| (-0.5 * (x - x0) * (x - x0)).exp());
        let ft = fourier(&psi).unwrap();
        for (k, v) in ft.grid().coords().iter().zip(ft.values()) {
            let expected = C64::from_polar((-0.5 * k * k).exp(), k * x0);
            assert!((v - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn parity_reflects_an_off_centre_rect() {
        let g = Grid::new(8.0, 256).unwrap();
        let rect = |c: f64| {
            Wavefunction::from_real(g, Space::Position, move |x| if x >= c - 0.25 && x < c + 0.25 { 1.0 } else { 0.0 })
        };
        // Reflection of a half-open interval is closed on the other side, so
        // compare support counts and centroids rather than raw samples.
        let p = parity(&rect(1.5));
        let centroid = |w: &Wavefunction| {
            let d = w.densities();
            let m: f64 = d.iter().sum();
            g.coords().iter().zip(&d).map(|(x, d)| x * d).sum::<f64>() / m
        };
        assert!((centroid(&p) + centroid(&rect(1.5))).abs() < 1e-12);
        assert!((p.norm_sq() - rect(1.5).norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn parity_leaves_even_functions_unchanged() {
        let g = Grid::new(20.0, 512).unwrap();
        let psi = gaussian(g);
        assert!(distance(&parity(&psi), &psi).unwrap() < 1e-15);
    }

    #[test]
    fn fidelity_extremes() {
        let g = Grid::new(8.0, 64).unwrap();
        let a = Wavefunction::from_real(g, Space::Position, |x| if x < 0.0 { 0.5 } else { 0.0 });
        let b = Wavefunction::from_real(g, Space::Position, |x| if x >= 0.0 { 0.5 } else { 0.0 });
        assert_eq!(fidelity(&a, &a).unwrap().distance, 0.0);
        let f = fidelity(&a, &b).unwrap();
        assert!((f.distance - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(f.overlap, 0.0);
    }

    #[test]
    fn fidelity_requires_matching_grids() {
        let a = Wavefunction::zeros(Grid::new(8.0, 64).unwrap(), Space::Position);
        let b = Wavefunction::zeros(Grid::new(8.0, 32).unwrap(), Space::Position);
        assert!(matches!(fidelity(&a, &b), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn odd_point_counts_stay_unitary() {
        let g = Grid::new(12.0, 243).unwrap();
        let psi = Wavefunction::from_fn(g, Space::Position, |x| C64::new((-x * x).exp(), x.sin() * (-x * x).exp()));
        let ft = fourier(&psi).unwrap();
        assert!((ft.norm_sq() - psi.norm_sq()).abs() < 1e-13);
        let back = inverse_fourier(&ft).unwrap();
        assert!(distance(&back, &psi).unwrap() < 1e-13);
    }
}
