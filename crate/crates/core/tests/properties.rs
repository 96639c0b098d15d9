use std::f64::consts::PI;

use multislit::sets::{commutator_norm, project_momentum, project_position, IntervalSet, PeriodicSet};
use multislit::{fourier, inverse_fourier, parity, Grid, Space, Wavefunction, C64};
use proptest::prelude::*;

fn state() -> impl Strategy<Value = Wavefunction> {
    (prop::sample::select(vec![32usize, 64, 100, 128, 256]), 4.0f64..64.0).prop_flat_map(|(n, extent)| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |v| {
            let grid = Grid::new(extent, n).unwrap();
            let values = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
            Wavefunction::new(grid, values, Space::Position).unwrap()
        })
    })
}

fn pair() -> impl Strategy<Value = (Wavefunction, Wavefunction)> {
    state().prop_flat_map(|a| {
        let grid = *a.grid();
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), grid.n_points()).prop_map(move |v| {
            let values = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
            (a.clone(), Wavefunction::new(grid, values, Space::Position).unwrap())
        })
    })
}

fn intervals() -> impl Strategy<Value = IntervalSet> {
    prop::collection::vec((-30.0f64..30.0, 0.01f64..5.0), 1..5).prop_map(|raw| {
        let mut picked: Vec<(f64, f64)> = Vec::new();
        for (lo, w) in raw {
            let (lo, hi) = (lo, lo + w);
            if picked.iter().all(|&(a, b)| hi <= a || lo >= b) {
                picked.push((lo, hi));
            }
        }
        IntervalSet::new(picked).unwrap()
    })
}

fn periodic() -> impl Strategy<Value = PeriodicSet> {
    (0.5f64..8.0, 0.05f64..0.45, -1.0f64..1.0)
        .prop_map(|(p, frac, origin)| PeriodicSet::symmetric(p, frac * p, origin, None).unwrap())
}

/// Dense `F[m][j] = dx / sqrt(2 pi) exp(i k_m x_j)`.
fn dense_fourier(grid: &Grid) -> Vec<Vec<C64>> {
    let xs = grid.coords();
    let ks = grid.conjugate().coords();
    let c = grid.spacing() / (2.0 * PI).sqrt();
    ks.iter().map(|&k| xs.iter().map(|&x| C64::from_polar(c, k * x)).collect()).collect()
}

fn apply(m: &[Vec<C64>], v: &[C64]) -> Vec<C64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn apply_adjoint(m: &[Vec<C64>], v: &[C64]) -> Vec<C64> {
    let n = m[0].len();
    (0..n).map(|j| m.iter().zip(v).map(|(row, b)| row[j].conj() * b).sum()).collect()
}

fn in_symmetric(x: f64, period: f64, half_width: f64, origin: f64) -> bool {
    let u = x - origin;
    let u = u - period * (u / period).round();
    // Points within rounding of an edge count as on it: lower edge in, upper out.
    let eps = 1e-9 * period;
    u >= -half_width - eps && u < half_width - eps
}

fn l2(a: &[C64], b: &[C64], dx: f64) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// `||chi_X(Q) chi_Y(P) psi - chi_Y(P) chi_X(Q) psi||` by dense matrices.
fn dense_commutator(psi: &Wavefunction, x: (f64, f64, f64), y: (f64, f64, f64)) -> f64 {
    let grid = *psi.grid();
    let f = dense_fourier(&grid);
    let xm: Vec<bool> = grid.coords().iter().map(|&c| in_symmetric(c, x.0, x.1, x.2)).collect();
    let ym: Vec<bool> = grid.conjugate().coords().iter().map(|&k| in_symmetric(k, y.0, y.1, y.2)).collect();
    let zero = C64::new(0.0, 0.0);
    // With the weighted norms the inverse is (dk / dx) F^H.
    let back = grid.conjugate().spacing() / grid.spacing();
    let px = |v: &[C64]| v.iter().zip(&xm).map(|(a, &m)| if m { *a } else { zero }).collect::<Vec<_>>();
    let py = |v: &[C64]| {
        let spec: Vec<C64> = apply(&f, v).iter().zip(&ym).map(|(a, &m)| if m { *a } else { zero }).collect();
        apply_adjoint(&f, &spec).into_iter().map(|v| v * back).collect::<Vec<_>>()
    };
    let xy = px(&py(psi.values()));
    let yx = py(&px(psi.values()));
    l2(&xy, &yx, grid.spacing())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fourier_matches_dense_matrix(psi in state()) {
        let fast = fourier(&psi).unwrap();
        let slow = apply(&dense_fourier(psi.grid()), psi.values());
        let dk = fast.grid().spacing();
        prop_assert!(l2(fast.values(), &slow, dk) <= 1e-10 * psi.norm().max(1.0));
    }

    #[test]
    fn fourier_is_unitary(psi in state()) {
        let phi = fourier(&psi).unwrap();
        prop_assert!((phi.norm_sq() - psi.norm_sq()).abs() <= 1e-12 * psi.norm_sq().max(1.0));
    }

    #[test]
    fn fourier_round_trips(psi in state()) {
        let back = inverse_fourier(&fourier(&psi).unwrap()).unwrap();
        prop_assert!(back.sub(&psi).unwrap().norm() <= 1e-12 * psi.norm().max(1.0));
    }

    #[test]
    fn fourier_is_linear((a, b) in pair(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let c = C64::new(re, im);
        let lhs = fourier(&a.map(|v| v * c).add(&b).unwrap()).unwrap();
        let rhs = fourier(&a).unwrap().map(|v| v * c).add(&fourier(&b).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-12 * (a.norm() + b.norm()).max(1.0) * 4.0);
    }

    #[test]
    fn fourier_squared_is_parity(psi in state()) {
        let twice = fourier(&fourier(&psi).unwrap().relabel(Space::Position)).unwrap();
        let err: f64 = twice.values().iter().zip(parity(&psi).values()).map(|(a, b)| (a - b).norm_sqr()).sum();
        prop_assert!(err.sqrt() * psi.grid().spacing().sqrt() <= 1e-10 * psi.norm().max(1.0));
    }

    #[test]
    fn shift_becomes_phase(psi in state(), s in -20isize..20) {
        let dx = psi.grid().spacing();
        let shifted = fourier(&psi.rolled(s)).unwrap();
        let expected = fourier(&psi).unwrap();
        let ks = expected.grid().coords();
        let expected: Vec<C64> = expected.values().iter().zip(&ks)
            .map(|(v, &k)| v * C64::from_polar(1.0, k * s as f64 * dx)).collect();
        prop_assert!(l2(shifted.values(), &expected, shifted.grid().spacing()) <= 1e-10 * psi.norm().max(1.0));
    }

    #[test]
    fn position_projection_is_orthogonal((a, b) in pair(), set in intervals()) {
        let pa = project_position(&a, &set).unwrap();
        prop_assert!(project_position(&pa, &set).unwrap().sub(&pa).unwrap().norm() <= 1e-12);
        let lhs = b.inner(&pa).unwrap();
        let rhs = project_position(&b, &set).unwrap().inner(&a).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
        prop_assert!(pa.norm() <= a.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn momentum_projection_is_orthogonal((a, b) in pair(), set in periodic()) {
        let pa = project_momentum(&a, &set).unwrap();
        let scale = a.norm().max(1.0);
        prop_assert!(project_momentum(&pa, &set).unwrap().sub(&pa).unwrap().norm() <= 1e-12 * scale);
        let lhs = b.inner(&pa).unwrap();
        let rhs = project_momentum(&b, &set).unwrap().inner(&a).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale * b.norm().max(1.0));
        prop_assert!(pa.norm() <= a.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn complement_projections_sum_to_identity(psi in state(), set in intervals()) {
        let window = (-1e3, 1e3);
        let rest = set.complement(window).unwrap();
        let sum = project_position(&psi, &set).unwrap().add(&project_position(&psi, &rest).unwrap()).unwrap();
        prop_assert!(sum.sub(&psi).unwrap().norm() <= 1e-15 * psi.norm().max(1.0));
    }

    #[test]
    fn commutator_matches_dense_oracle(
        psi in state(),
        (xp, xf, xo) in (0.5f64..4.0, 0.05f64..0.45, -1.0f64..1.0),
        (yp, yf, yo) in (0.5f64..8.0, 0.05f64..0.45, -1.0f64..1.0),
    ) {
        let x = PeriodicSet::symmetric(xp, xf * xp, xo, None).unwrap();
        let y = PeriodicSet::symmetric(yp, yf * yp, yo, None).unwrap();
        let fast = commutator_norm(&x, &y, &psi).unwrap();
        let slow = dense_commutator(&psi, (xp, xf * xp, xo), (yp, yf * yp, yo));
        prop_assert!((fast - slow).abs() <= 1e-10 * psi.norm().max(1.0), "fast {fast} dense {slow}");
    }

    #[test]
    fn commensurate_pairs_commute(
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 256),
        n in 1usize..=4,
        xf in 0.05f64..0.45,
        yf in 0.05f64..0.45,
    ) {
        // 16 samples per unit period on a grid holding 16 periods.
        let grid = Grid::new(16.0, 256).unwrap();
        let values = raw.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        let psi = Wavefunction::new(grid, values, Space::Position).unwrap();
        let period = 2.0 * PI / n as f64;
        let x = PeriodicSet::symmetric(1.0, xf, 0.0, None).unwrap();
        let y = PeriodicSet::symmetric(period, yf * period, 0.0, None).unwrap();
        let dense = dense_commutator(&psi, (1.0, xf, 0.0), (period, yf * period, 0.0));
        prop_assert!(dense <= 1e-10 * psi.norm());
        prop_assert!(commutator_norm(&x, &y, &psi).unwrap() <= 1e-10 * psi.norm());
    }
}

#[test]
fn incommensurate_pair_does_not_commute_densely() {
    let grid = Grid::new(16.0, 256).unwrap();
    let psi = Wavefunction::from_real(grid, Space::Position, |x| (-x * x / 2.0).exp()).normalized().unwrap();
    let dense = dense_commutator(&psi, (1.0, 0.25, 0.0), (1.9 * PI, 0.475 * PI, 0.0));
    let x = PeriodicSet::symmetric(1.0, 0.25, 0.0, None).unwrap();
    let y = PeriodicSet::symmetric(1.9 * PI, 0.475 * PI, 0.0, None).unwrap();
    assert!(dense >= 1e-3);
    let fast = commutator_norm(&x, &y, &psi).unwrap();
    assert!((fast - dense).abs() < 1e-10, "fast {fast} dense {dense}");
}
