"""Quick end-to-end check of the Python bindings.

Build and install first, e.g. ``pip install ./crates/python`` or
``maturin develop -m crates/python/Cargo.toml``, then run this file.
"""

import math

import projsearch as ps


def main():
    assert "as-qwolfe" in ps.solver_names()
    assert "rosenbrock-box" in ps.problem_names()

    prob = ps.Problem.from_catalog("quad-interior")
    for solver in ps.solver_names():
        rep = ps.solve(prob, solver=solver)
        assert rep.converged, (solver, rep)
    print("catalog:", prob, "->", rep)

    x = [0.0, 0.5, 1.0]
    lo, hi = [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]
    p = [-1.0, 1.0, 1.0]
    assert ps.projected_direction(x, p, lo, hi) == [0.0, 1.0, 0.0]
    assert ps.kink_steps([0.5, 0.5], [1.0, -2.0], [0.0, 0.0], [1.0, 1.0]) == [(0.25, 1), (0.5, 0)]
    assert ps.project([2.0, -1.0, 0.3], lo, hi) == [1.0, 0.0, 0.3]

    # (x - 2)^2 + (y + 1)^2 on [0, 1]^2 has its minimizer at the corner (1, 0).
    custom = ps.Problem.from_functions(
        lambda v: (v[0] - 2.0) ** 2 + (v[1] + 1.0) ** 2,
        lambda v: [2.0 * (v[0] - 2.0), 2.0 * (v[1] + 1.0)],
        [0.0, 0.0],
        [1.0, 1.0],
        [0.5, 0.5],
        hess=lambda v: [2.0, 0.0, 0.0, 2.0],
    )
    grad_err, hess_err = custom.check_derivatives()
    assert grad_err < 1e-5 and hess_err < 1e-4
    for solver in ("as-qwolfe", "ip-pdproj-qwolfe"):
        rep = ps.solve(custom, solver=solver)
        assert rep.converged
        assert all(math.isclose(a, b, abs_tol=1e-4) for a, b in zip(rep.x_final, [1.0, 0.0])), rep.x_final
    print("custom:", rep)

    curves = dict(ps.performance_profile([
        ("a", "s1", 10, True), ("a", "s2", 20, True),
        ("b", "s1", 40, True), ("b", "s2", 10, True),
    ]))
    assert curves["s1"][0] == (0.0, 0.5)
    print("smoke test passed")


if __name__ == "__main__":
    main()
