"""Smoke test of the emom_md Python module.

Build and run:
    cargo build --release -p emom-md-python
    cp target/release/libemom_md.so python/emom_md.so
    python3 python/smoke_test.py
or install with maturin (`pip install --no-build-isolation ./crates/python`).
"""

import math

import emom_md


def main():
    cfg = emom_md.Config.benchmark(5.0)
    cfg.time_points = 201
    cfg.quadrature = (60, 60)
    sol = cfg.solve()
    assert len(sol) == 201
    c0 = sol.concentrations[0]
    assert abs(c0[0] - 2.0) < 1e-12 and abs(c0[1] - 2.0) < 1e-12
    c_end = sol.concentrations[-1]
    assert c_end[0] < 2.0 and c_end[1] < 2.0
    assert sol.balance_residual is not None and sol.balance_residual < 1e-12

    # finer time grid converges to the same path
    fine = emom_md.benchmark(5.0, time_points=2001, nodes=60)
    (linf, l2) = sol.error_norms(fine)
    assert max(linf) < 1e-5, linf

    # characteristics and reconstruction
    y = sol.characteristic(0, (0.1, 0.75), 200)
    assert y[0] > 0.1 and 0.0 <= y[1] <= 1.0
    number, mean_radius, _ = sol.moments(200, (120, 120))
    initial = math.pi * 0.05 * 0.25 / 3.0  # integral of the bump
    assert abs(number - initial) < 5e-3 * initial, (number, initial)
    assert mean_radius > 0.1

    radii, fractions = sol.radial_profile((0.05, 0.5))
    assert len(radii) == len(fractions) == 201
    assert all(0.0 <= f <= 1.0 for f in fractions)

    fvm = cfg.solve_fvm((48, 48))
    (linf, _) = fvm.error_norms(fine)
    assert max(linf) < 1e-4, linf

    try:
        emom_md.Config.from_toml("[process]\nx_min = -1\n")
    except ValueError as e:
        assert "configuration error" in str(e)
    else:
        raise AssertionError("invalid config accepted")

    print("emom_md", emom_md.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
