//! Interval unions, periodic sets and the spectral projectors built on them.
//!
//! All intervals are half-open, `[lo, hi)`. Membership tests snap points that
//! sit within a tiny relative distance of an edge onto that edge, so that
//! samples placed on a boundary by construction are classified the same way
//! in every period cell regardless of accumulated rounding.

use std::f64::consts::PI;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{fourier, inverse_fourier, Grid, Space, Wavefunction, C64};

const SNAP_RTOL: f64 = 1e-10;

/// Anything that can answer "is `x` in the set".
pub trait Region: fmt::Debug + Send + Sync {
    fn contains(&self, x: f64) -> bool;

    /// Indicator samples of the set on `grid`.
    fn realize(&self, grid: &Grid) -> Mask {
        Mask(grid.coords().into_iter().map(|x| self.contains(x)).collect())
    }
}

/// 0/1 samples of a set on a grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask(pub Vec<bool>);

impl Mask {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn measure(&self, spacing: f64) -> f64 {
        self.count() as f64 * spacing
    }

    /// Maximal runs of `true` as `(first, last)` index pairs (not cyclic).
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = None;
        for (j, &b) in self.0.iter().enumerate() {
            match (b, start) {
                (true, None) => start = Some(j),
                (false, Some(s)) => {
                    out.push((s, j - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, self.0.len() - 1));
        }
        out
    }

    pub fn complement(&self) -> Mask {
        Mask(self.0.iter().map(|b| !b).collect())
    }

    fn apply(&self, values: &[C64]) -> Vec<C64> {
        values.iter().zip(&self.0).map(|(&v, &keep)| if keep { v } else { C64::new(0.0, 0.0) }).collect()
    }
}

/// A finite union of disjoint half-open intervals, sorted by position.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for IntervalSet {
    type Error = crate::Error;

    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        IntervalSet::new(v)
    }
}

impl From<IntervalSet> for Vec<(f64, f64)> {
    fn from(s: IntervalSet) -> Self {
        s.intervals
    }
}

impl IntervalSet {
    /// Accepts intervals in any order; they must be non-empty and must not overlap.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &intervals {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(invalid(format!("interval [{lo}, {hi}) is empty or not finite")));
            }
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in intervals.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(invalid(format!("intervals [{}, {}) and [{}, {}) overlap", w[0].0, w[0].1, w[1].0, w[1].1)));
            }
        }
        Ok(Self { intervals })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    /// Smallest interval containing the whole set.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    fn scale(&self) -> f64 {
        self.intervals.iter().fold(0.0f64, |m, &(lo, hi)| m.max(lo.abs()).max(hi.abs()).max(hi - lo))
    }

    fn contains_snapped(&self, x: f64, eps: f64) -> bool {
        // First interval whose upper edge lies beyond x.
        let i = self.intervals.partition_point(|&(_, hi)| x >= hi - eps);
        self.intervals.get(i).is_some_and(|&(lo, _)| x >= lo - eps)
    }

    pub fn translate(&self, by: f64) -> Self {
        Self { intervals: self.intervals.iter().map(|&(lo, hi)| (lo + by, hi + by)).collect() }
    }

    /// Multiplies every endpoint by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(invalid(format!("scale factor must be positive, got {factor}")));
        }
        Ok(Self { intervals: self.intervals.iter().map(|&(lo, hi)| (lo * factor, hi * factor)).collect() })
    }

    /// Image under `x -> -x`.
    pub fn reflected(&self) -> Self {
        Self { intervals: self.intervals.iter().rev().map(|&(lo, hi)| (-hi, -lo)).collect() }
    }

    /// `window \ self`. The set must lie inside the window.
    pub fn complement(&self, window: (f64, f64)) -> Result<Self> {
        let (wlo, whi) = window;
        if wlo.is_nan() || whi.is_nan() || wlo >= whi {
            return Err(invalid(format!("complement window [{wlo}, {whi}) is empty")));
        }
        let eps = SNAP_RTOL * wlo.abs().max(whi.abs()).max(whi - wlo);
        if let Some((lo, hi)) = self.hull() {
            if lo < wlo - eps || hi > whi + eps {
                return Err(invalid(format!("set [{lo}, {hi}) exceeds window [{wlo}, {whi})")));
            }
        }
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = wlo;
        for &(lo, hi) in &self.intervals {
            if lo > cursor + eps {
                out.push((cursor, lo));
            }
            cursor = hi;
        }
        if whi > cursor + eps {
            out.push((cursor, whi));
        }
        Ok(Self { intervals: out })
    }
}

impl Region for IntervalSet {
    fn contains(&self, x: f64) -> bool {
        self.contains_snapped(x, SNAP_RTOL * self.scale())
    }
}

/// A set invariant under translation by `period`: copies of `base` placed at
/// `origin + n * period`. `n_cells = None` keeps every copy; `Some(m)` keeps
/// the `m` copies whose centres lie closest to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PeriodicSetFields", into = "PeriodicSetFields")]
pub struct PeriodicSet {
    period: f64,
    base: IntervalSet,
    origin: f64,
    n_cells: Option<usize>,
    kept: Option<(i64, i64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PeriodicSetFields {
    period: f64,
    base: IntervalSet,
    #[serde(default)]
    origin: f64,
    #[serde(default)]
    n_cells: Option<usize>,
}

impl TryFrom<PeriodicSetFields> for PeriodicSet {
    type Error = crate::Error;

    fn try_from(f: PeriodicSetFields) -> Result<Self> {
        PeriodicSet::new(f.period, f.base, f.origin, f.n_cells)
    }
}

impl From<PeriodicSet> for PeriodicSetFields {
    fn from(s: PeriodicSet) -> Self {
        Self { period: s.period, base: s.base, origin: s.origin, n_cells: s.n_cells }
    }
}

impl PeriodicSet {
    pub fn new(period: f64, base: IntervalSet, origin: f64, n_cells: Option<usize>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid(format!("period must be positive, got {period}")));
        }
        if let Some((lo, hi)) = base.hull() {
            if hi - lo > period * (1.0 + SNAP_RTOL) {
                return Err(invalid(format!("base [{lo}, {hi}) does not fit in one period {period}")));
            }
        }
        if !origin.is_finite() {
            return Err(invalid("periodic set origin must be finite"));
        }
        let mut set = Self { period, base, origin, n_cells, kept: None };
        set.kept = set.kept_cells();
        Ok(set)
    }

    /// Copies of `[-half_width, half_width)` every `period`, centred on `origin`.
    pub fn symmetric(period: f64, half_width: f64, origin: f64, n_cells: Option<usize>) -> Result<Self> {
        Self::new(period, IntervalSet::interval(-half_width, half_width)?, origin, n_cells)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn base(&self) -> &IntervalSet {
        &self.base
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn n_cells(&self) -> Option<usize> {
        self.n_cells
    }

    /// Fraction of each period covered by the set.
    pub fn duty_cycle(&self) -> f64 {
        self.base.measure() / self.period
    }

    pub fn with_cells(&self, n_cells: Option<usize>) -> Self {
        Self::new(self.period, self.base.clone(), self.origin, n_cells).expect("already validated")
    }

    fn cell_start(&self) -> f64 {
        self.base.hull().map_or(0.0, |h| h.0)
    }

    fn cell_centre(&self, n: i64) -> f64 {
        let mid = self.base.hull().map_or(0.0, |(lo, hi)| 0.5 * (lo + hi));
        self.origin + n as f64 * self.period + mid
    }

    fn kept_cells(&self) -> Option<(i64, i64)> {
        let m = self.n_cells? as i64;
        if m == 0 {
            return Some((1, 0));
        }
        // Cells nearest zero form a contiguous block; grow it one cell at a time.
        let seed = (-self.cell_centre(0) / self.period).round() as i64;
        let (mut lo, mut hi) = (seed, seed);
        while hi - lo + 1 < m {
            let left = self.cell_centre(lo - 1);
            let right = self.cell_centre(hi + 1);
            if (left.abs(), left) <= (right.abs(), right) {
                lo -= 1;
            } else {
                hi += 1;
            }
        }
        Some((lo, hi))
    }

    /// Range of cell indices kept by the truncation, `None` if untruncated.
    pub fn kept_range(&self) -> Option<RangeInclusive<i64>> {
        self.kept.map(|(lo, hi)| lo..=hi)
    }

    /// Cell index and offset from the cell's origin for `x`.
    pub fn locate(&self, x: f64) -> (i64, f64) {
        let eps = SNAP_RTOL * self.period;
        let start = self.cell_start();
        let t = (x - self.origin - start) / self.period;
        let mut n = t.floor() as i64;
        let mut r = x - self.origin - n as f64 * self.period;
        if r - start >= self.period - eps {
            n += 1;
            r -= self.period;
        } else if r < start - eps {
            n -= 1;
            r += self.period;
        }
        (n, r)
    }

    /// The untruncated indicator evaluated at `x`.
    pub fn contains_untruncated(&self, x: f64) -> bool {
        let (_, r) = self.locate(x);
        self.base.contains_snapped(r, SNAP_RTOL * self.period)
    }

    /// Whether copy `n` survives the truncation.
    pub fn cell_kept(&self, n: i64) -> bool {
        self.kept.is_none_or(|(lo, hi)| (lo..=hi).contains(&n))
    }
}

impl Region for PeriodicSet {
    fn contains(&self, x: f64) -> bool {
        let (n, r) = self.locate(x);
        self.cell_kept(n) && self.base.contains_snapped(r, SNAP_RTOL * self.period)
    }
}

/// Either kind of set, as read from configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Set {
    Intervals(IntervalSet),
    Periodic(PeriodicSet),
}

impl Region for Set {
    fn contains(&self, x: f64) -> bool {
        match self {
            Set::Intervals(s) => s.contains(x),
            Set::Periodic(s) => s.contains(x),
        }
    }
}

impl From<IntervalSet> for Set {
    fn from(s: IntervalSet) -> Self {
        Set::Intervals(s)
    }
}

impl From<PeriodicSet> for Set {
    fn from(s: PeriodicSet) -> Self {
        Set::Periodic(s)
    }
}

pub fn realize<S: Region + ?Sized>(set: &S, grid: &Grid) -> Mask {
    set.realize(grid)
}

pub fn complement(set: &IntervalSet, window: (f64, f64)) -> Result<IntervalSet> {
    set.complement(window)
}

/// A row of absorbing wires, symmetric about `lateral_shift`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GratingSpec {
    pub n_wires: usize,
    pub wire_width: f64,
    /// Centre-to-centre distance between neighbouring wires.
    pub wire_spacing: f64,
    pub lateral_shift: f64,
}

impl GratingSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.wire_width.is_finite() && self.wire_width >= 0.0) {
            return Err(invalid(format!("wire width must be non-negative, got {}", self.wire_width)));
        }
        if !(self.wire_spacing.is_finite() && self.wire_spacing > 0.0) {
            return Err(invalid(format!("wire spacing must be positive, got {}", self.wire_spacing)));
        }
        if self.n_wires > 1 && self.wire_width >= self.wire_spacing {
            return Err(invalid(format!(
                "wires of width {} overlap at spacing {}",
                self.wire_width, self.wire_spacing
            )));
        }
        if !self.lateral_shift.is_finite() {
            return Err(invalid("lateral shift must be finite"));
        }
        Ok(())
    }

    pub fn wire_centres(&self) -> Vec<f64> {
        let mid = 0.5 * (self.n_wires as f64 - 1.0);
        (0..self.n_wires).map(|i| self.lateral_shift + (i as f64 - mid) * self.wire_spacing).collect()
    }

    /// The region occupied by wire material.
    pub fn wires(&self) -> Result<IntervalSet> {
        self.validate()?;
        if self.wire_width == 0.0 {
            return Ok(IntervalSet::empty());
        }
        let h = 0.5 * self.wire_width;
        IntervalSet::new(self.wire_centres().into_iter().map(|c| (c - h, c + h)).collect())
    }
}

/// The transmitting set: `window` minus the wires.
pub fn grating_to_set(g: &GratingSpec, window: (f64, f64)) -> Result<IntervalSet> {
    g.wires()?.complement(window)
}

/// `chi_S(Q)` realised on a fixed grid.
#[derive(Clone, Debug)]
pub struct PositionProjector {
    grid: Grid,
    mask: Mask,
}

impl PositionProjector {
    pub fn new<S: Region + ?Sized>(set: &S, grid: &Grid) -> Self {
        Self { grid: *grid, mask: set.realize(grid) }
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn apply(&self, psi: &Wavefunction) -> Result<Wavefunction> {
        psi.assert_space(Space::Position)?;
        self.check_grid(psi)?;
        psi.with_values(self.mask.apply(psi.values()))
    }

    fn check_grid(&self, psi: &Wavefunction) -> Result<()> {
        if !self.grid.matches(psi.grid()) {
            return Err(invalid("projector and wavefunction live on different grids"));
        }
        Ok(())
    }
}

/// `chi_S(P)` acting on position-space states; `S` is realised on the
/// conjugate grid.
#[derive(Clone, Debug)]
pub struct MomentumProjector {
    grid: Grid,
    mask: Mask,
}

impl MomentumProjector {
    pub fn new<S: Region + ?Sized>(set: &S, grid: &Grid) -> Self {
        Self { grid: *grid, mask: set.realize(&grid.conjugate()) }
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn apply(&self, psi: &Wavefunction) -> Result<Wavefunction> {
        psi.assert_space(Space::Position)?;
        if !self.grid.matches(psi.grid()) {
            return Err(invalid("projector and wavefunction live on different grids"));
        }
        let ft = fourier(psi)?;
        let masked = ft.with_values(self.mask.apply(ft.values()))?;
        let out = inverse_fourier(&masked)?;
        // Keep the caller's grid bit-for-bit.
        Wavefunction::new(*psi.grid(), out.into_values(), Space::Position)
    }
}

/// `chi_S(Q) psi`.
pub fn project_position<S: Region + ?Sized>(psi: &Wavefunction, set: &S) -> Result<Wavefunction> {
    PositionProjector::new(set, psi.grid()).apply(psi)
}

/// `chi_S(P) psi` for a position-space `psi`.
pub fn project_momentum<S: Region + ?Sized>(psi: &Wavefunction, set: &S) -> Result<Wavefunction> {
    MomentumProjector::new(set, psi.grid()).apply(psi)
}

/// `|| chi_X(Q) chi_Y(P) psi - chi_Y(P) chi_X(Q) psi ||`.
pub fn commutator_norm<X, Y>(x_set: &X, y_set: &Y, psi: &Wavefunction) -> Result<f64>
where
    X: Region + ?Sized,
    Y: Region + ?Sized,
{
    let px = PositionProjector::new(x_set, psi.grid());
    let py = MomentumProjector::new(y_set, psi.grid());
    let xy = px.apply(&py.apply(psi)?)?;
    let yx = py.apply(&px.apply(psi)?)?;
    Ok(xy.sub(&yx)?.norm())
}

/// `chi_Y(P) chi_X(Q) psi`.
pub fn joint_project<X, Y>(psi: &Wavefunction, x_set: &X, y_set: &Y) -> Result<Wavefunction>
where
    X: Region + ?Sized,
    Y: Region + ?Sized,
{
    project_momentum(&project_position(psi, x_set)?, y_set)
}

/// The periodic momentum set `Y`: gaps of half-width `pi / t_prime` every
/// `2 pi / t`. Requires `t_prime > t`.
pub fn momentum_comb(t: f64, t_prime: f64, shift: f64) -> Result<PeriodicSet> {
    if !(t > 0.0 && t_prime > t) {
        return Err(invalid(format!("momentum comb needs T' > T > 0, got T = {t}, T' = {t_prime}")));
    }
    PeriodicSet::symmetric(2.0 * PI / t, PI / t_prime, shift, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::periodic(1.0, 16, 128).unwrap()
    }

    #[test]
    fn empty_set_realises_to_zero_mask() {
        assert_eq!(IntervalSet::empty().realize(&grid()).count(), 0);
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(IntervalSet::new(vec![(1.0, 1.0)]).is_err());
        assert!(IntervalSet::new(vec![(0.0, 2.0), (1.0, 3.0)]).is_err());
        // touching half-open intervals are disjoint
        assert!(IntervalSet::new(vec![(1.0, 2.0), (0.0, 1.0)]).is_ok());
    }

    #[test]
    fn half_open_sampling() {
        let g = Grid::new(8.0, 8).unwrap(); // samples at -4..3
        let m = IntervalSet::interval(-1.0, 1.0).unwrap().realize(&g);
        assert_eq!(m.0, vec![false, false, false, true, true, false, false, false]);
    }

    #[test]
    fn double_slit_gives_two_equal_runs() {
        let x = PeriodicSet::symmetric(1.0, 0.125, 0.5, Some(2)).unwrap();
        let runs = x.realize(&grid()).runs();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].1 - runs[0].0, runs[1].1 - runs[1].0);
        assert_eq!(runs[0].1 - runs[0].0 + 1, 32);
        let g = grid();
        let c0 = 0.5 * (g.coord(runs[0].0) + g.coord(runs[0].1));
        let c1 = 0.5 * (g.coord(runs[1].0) + g.coord(runs[1].1));
        assert!((c1 - c0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_keeps_cells_nearest_zero() {
        let x = PeriodicSet::symmetric(1.0, 0.1, 0.0, Some(3)).unwrap();
        assert_eq!(x.kept_range(), Some(-1..=1));
        let x = PeriodicSet::symmetric(1.0, 0.1, 0.5, Some(4)).unwrap();
        assert_eq!(x.kept_range(), Some(-2..=1));
        assert!(x.contains(-1.5) && x.contains(1.5) && !x.contains(2.5));
    }

    #[test]
    fn periodic_set_is_translation_invariant() {
        let y = PeriodicSet::new(2.0, IntervalSet::new(vec![(-0.3, 0.1), (0.4, 0.9)]).unwrap(), 0.37, None).unwrap();
        for i in 0..500 {
            let x = -7.0 + i as f64 * 0.0291;
            assert_eq!(y.contains(x), y.contains(x + 2.0), "x = {x}");
            assert_eq!(y.contains(x), y.contains(x - 6.0), "x = {x}");
        }
    }

    #[test]
    fn momentum_comb_covers_t_over_tprime_of_each_cell() {
        let g = Grid::periodic(1.0, 64, 64).unwrap();
        let k = g.conjugate();
        let y = momentum_comb(1.0, 1.37, 0.0).unwrap();
        let m = y.realize(&k);
        let frac = m.measure(k.spacing()) / k.extent();
        let cells = k.extent() / (2.0 * PI);
        // one sample of slack per boundary, two boundaries per cell
        assert!((frac - 1.0 / 1.37).abs() <= 2.0 * cells * k.spacing() / k.extent());
    }

    #[test]
    fn complement_cases() {
        let w = (-2.0, 2.0);
        assert_eq!(IntervalSet::empty().complement(w).unwrap().intervals(), &[w]);
        let one = IntervalSet::interval(-0.1, 0.1).unwrap().complement(w).unwrap();
        assert_eq!(one.intervals(), &[(-2.0, -0.1), (0.1, 2.0)]);
        assert!(IntervalSet::interval(-3.0, 0.0).unwrap().complement(w).is_err());
    }

    #[test]
    fn paper_grating_geometry() {
        let g = GratingSpec { n_wires: 6, wire_width: 0.127, wire_spacing: 1.3, lateral_shift: 0.0 };
        let window = (-10.0, 10.0);
        let b = grating_to_set(&g, window).unwrap();
        assert_eq!(b.len(), 7);
        assert!((20.0 - b.measure() - 0.762).abs() < 1e-12);
        assert!((g.wire_centres()[3] - 0.65).abs() < 1e-12);

        let shifted = GratingSpec { lateral_shift: 0.25, ..g };
        for (a, b) in g.wire_centres().iter().zip(shifted.wire_centres()) {
            assert!((b - a - 0.25).abs() < 1e-12);
        }
        let none = GratingSpec { n_wires: 0, ..g };
        assert_eq!(grating_to_set(&none, window).unwrap().intervals(), &[window]);
    }

    #[test]
    fn overlapping_wires_are_rejected() {
        let g = GratingSpec { n_wires: 3, wire_width: 1.5, wire_spacing: 1.0, lateral_shift: 0.0 };
        assert!(grating_to_set(&g, (-10.0, 10.0)).is_err());
    }

    #[test]
    fn position_projection_eigenvalues() {
        let g = grid();
        let s = IntervalSet::interval(-1.0, 1.0).unwrap();
        let inside = Wavefunction::from_real(g, Space::Position, |x| if x.abs() < 0.5 { 1.0 } else { 0.0 });
        assert_eq!(project_position(&inside, &s).unwrap(), inside);
        let outside = Wavefunction::from_real(g, Space::Position, |x| if x > 3.0 { 1.0 } else { 0.0 });
        assert_eq!(project_position(&outside, &s).unwrap().norm_sq(), 0.0);
    }

    #[test]
    fn uniform_state_through_double_slit_transmits_a_over_t() {
        let g = grid();
        let a = 0.25;
        let psi = Wavefunction::from_real(g, Space::Position, |x| if (-1.0..1.0).contains(&x) { 1.0 } else { 0.0 })
            .normalized()
            .unwrap();
        let x = PeriodicSet::symmetric(1.0, a / 2.0, 0.5, Some(2)).unwrap();
        let out = project_position(&psi, &x).unwrap();
        assert!((out.norm_sq() - a).abs() < 1e-12);
    }

    #[test]
    fn full_momentum_set_is_identity() {
        let g = grid();
        let psi = Wavefunction::from_real(g, Space::Position, |x| (-x * x).exp());
        let k = g.conjugate();
        let all = IntervalSet::interval(k.origin(), k.origin() + k.extent()).unwrap();
        assert!(project_momentum(&psi, &all).unwrap().sub(&psi).unwrap().norm() < 1e-14);
    }

    #[test]
    fn projectors_reject_momentum_states() {
        let g = grid();
        let m = Wavefunction::zeros(g, Space::Momentum);
        let s = IntervalSet::interval(0.0, 1.0).unwrap();
        assert!(project_position(&m, &s).is_err());
        assert!(project_momentum(&m, &s).is_err());
    }
}
