"""Smoke test for the lyapgrad Python module.

Build and install first, e.g. `pip install --no-build-isolation .` from the
repository root (needs maturin), then run `python python/smoke_test.py`.
"""

import json
import math

import lyapgrad


def close(a, b, tol=1e-12):
    return all(abs(x - y) <= tol for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def main():
    assert close(lyapgrad.psd_projection([[1.0, 0.0], [0.0, -2.0]]), [[1.0, 0.0], [0.0, 0.0]])
    assert math.isclose(lyapgrad.frobenius_norm([[3.0, 0.0], [0.0, 4.0]]), 5.0)
    assert lyapgrad.hurwitz_check([[-1.0, 5.0], [0.0, -2.0]])
    assert not lyapgrad.hurwitz_check([[0.5]])
    assert math.isclose(lyapgrad.residual([[1.0]], [[-1.0]], [[4.0]]), 2.0)
    value, grad = lyapgrad.v_grad([[1.0]], [[-1.0]], [[4.0]])
    assert math.isclose(value, 4.0) and close(grad, [[-8.0]])
    assert len(lyapgrad.vertices([[-1.0, 0.0], [0.0, -1.0]], [[-0.5, 1.0], [0.0, -1.0]])) == 4

    scalar = lyapgrad.Problem.finite([[[-1.0]]], q=[[4.0]])
    out = lyapgrad.solve(scalar)
    assert out.solved and out.corrections == 1 and close(out.p, [[2.5]])

    family = [[[-1.0, 1.0], [0.0, -1.0]], [[-1.0, 0.0], [1.0, -1.0]]]
    problem = lyapgrad.Problem.finite(family)
    out = lyapgrad.solve(problem, functional="lambdamax", variant="projected", trace=True)
    assert out.solved, out
    assert len(out.trace) == out.iterations
    cert = lyapgrad.verify(problem, out.p)
    assert cert.feasible and cert.lambda_min_p > 0 and len(cert.residuals) == 2
    assert json.loads(out.to_json())["status"] == "SOLVED"
    assert not lyapgrad.verify(problem, [[1e-3, 0.0], [0.0, 1e-3]]).feasible

    generated = lyapgrad.Problem.generate(n=4, seed=1, interval_diagonal=True)
    assert generated.is_interval and generated.constraint_count() == 1024
    again = lyapgrad.Problem.from_json(generated.to_json())
    assert again.to_json() == generated.to_json()

    summary = lyapgrad.bench(n=3, trials=2, seed=5)
    assert summary["solved"] == 2

    try:
        lyapgrad.solve(lyapgrad.Problem.finite([[[0.5]]]))
    except ValueError:
        pass
    else:
        raise AssertionError("non-Hurwitz input accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
