"""Smoke test for the `multislit` Python module.

Build and install first:

    pip install maturin
    maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/multislit-*.whl
"""

import cmath
import json
import math

import multislit as ms


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    return cond


def main():
    results = []

    grid = ms.Grid(16.0, 1024)
    xs = grid.coords()
    psi = [complex(math.exp(-(x - 1.5) ** 2 / 2) * math.pi ** -0.25) for x in xs]
    phi = ms.fourier(grid, psi)
    ks = grid.conjugate().coords()
    exact = [math.pi ** -0.25 * math.exp(-k * k / 2) * cmath.exp(1j * k * 1.5) for k in ks]
    err = max(abs(a - b) for a, b in zip(phi, exact))
    results.append(check(err < 1e-10, f"displaced gaussian transforms with exp(+ikx) ({err:.1e})"))

    back = ms.inverse_fourier(grid, phi)
    results.append(check(max(abs(a - b) for a, b in zip(back, psi)) < 1e-12, "round trip"))

    x = ms.PeriodicSet(1.0, 0.2)
    y = ms.PeriodicSet(2 * math.pi / 3, 0.3 * 2 * math.pi / 3)
    c = ms.commutator_norm(grid, psi, x, y)
    results.append(check(c < 1e-8, f"commensurate projectors commute ({c:.1e})"))
    y_bad = ms.PeriodicSet(1.9 * math.pi, 0.475 * math.pi)
    c = ms.commutator_norm(grid, psi, ms.PeriodicSet(1.0, 0.25), y_bad)
    results.append(check(c > 1e-3, f"incommensurate projectors do not ({c:.3f})"))

    s = ms.double_slit_eigenstate(0.23, 1.0, 1.1)
    results.append(check(s.is_joint_eigenstate(1e-6), "double-slit joint eigenstate is a fixed point"))
    results.append(check(ms.double_slit_eigenstate(0.23, 1.0, 1.001).central_pair_mass() > 0.99, "thin-wire limit"))
    try:
        ms.double_slit_eigenstate(0.23, 1.0, 1.0)
        results.append(check(False, "T' = T rejected"))
    except ValueError:
        results.append(check(True, "T' = T rejected"))

    config = {
        "units": "natural",
        "mode": "double",
        "geometry": {"slit_width": 0.2, "grating": {"kind": "ideal", "tprime": 1.1}},
        "numerics": {"n_points": 4096, "extent_T": 32},
    }
    report = ms.simulate(json.dumps(config))
    books = abs(report["transmitted"] + report["blocked"] - 1)
    results.append(check(books < 1e-9, f"probability bookkeeping ({books:.1e})"))
    results.append(check(len(report["imaged"]) == 4096, "stage densities returned"))
    rows = ms.sweep(json.dumps(config), "tprime", [1.05, 1.1, 1.2])
    results.append(check(len(rows) == 3, "sweep rows"))

    passed, checks = ms.validate(3)
    results.append(check(passed, f"validation suite ({len(checks)} checks)"))

    if not all(results):
        raise SystemExit(1)
    print("all python smoke checks passed")


if __name__ == "__main__":
    main()
