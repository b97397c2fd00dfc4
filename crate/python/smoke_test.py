"""Smoke test for the maskridge Python extension.

Build and install first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/maskridge-*.whl
"""

import json
import math

import maskridge


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    # Ridgeless isotropic risk at n = 2d is exactly 2.
    iso = maskridge.CovarianceModel.identity(400)
    pred = maskridge.predict_risk(iso, 800, 1e-8)
    close(pred["gen_error"], 2.0, 1e-4)
    close(pred["train_error"] / pred["gen_error"], (1e-8 / pred["kappa"]) ** 2, 1e-9)

    kappa = maskridge.solve_kappa(iso, 200, 1.0)
    close(kappa["kappa"] * kappa["m_tilde"], 1.0, 1e-10)

    try:
        maskridge.predict_risk(iso, 400, 1e-10)
    except maskridge.DivergentError:
        pass
    else:
        raise AssertionError("n = d should sit on the pole")

    # Fit on a sample and compare the closed form to its risk identities.
    model = maskridge.CovarianceModel.toeplitz(0.5, 30)
    x = model.sample(90, seed=3)
    est = maskridge.fit_ssr(x, 0.1)
    assert all(est.a_hat[i][i] == 0.0 for i in range(est.dim))
    dual = maskridge.fit_ssr(x, 0.1, path="dual")
    close(max(abs(a - b) for ra, rb in zip(est.a_hat, dual.a_hat) for a, b in zip(ra, rb)), 0.0, 1e-8)
    risk = est.population_risk(model)
    assert risk >= maskridge.approximation_error(model) - 1e-12
    close(maskridge.population_risk(est.a_hat, model), risk, 1e-12)
    assert len(est.spectrum()) == 30

    lo, hi = maskridge.universal_support(4.0)
    close(lo, -2.0, 1e-12)
    close(hi, 2.0 / 3.0, 1e-12)
    dens = maskridge.spectral_density(model, 90, 0.1)
    mass = sum(0.5 * (dens["density"][k] + dens["density"][k + 1]) * (dens["grid"][k + 1] - dens["grid"][k])
               for k in range(len(dens["grid"]) - 1))
    close(mass, 1.0, 0.03)

    close(maskridge.bbp(2.0, 1.0)["s1"], 5.0 / 6.0, 1e-12)
    close(maskridge.phase_boundary(0.5), 2.0 * math.atan(math.tan(math.pi / 5.0) / 3.0) / math.pi, 1e-9)

    try:
        maskridge.CovarianceModel.toeplitz(1.5, 10)
    except ValueError:
        pass
    else:
        raise AssertionError("rho outside (-1, 1) should be rejected")

    config = {
        "model": {"kind": "identity"},
        "dim": 40,
        "alphas": [0.5, 2.0],
        "lambda": 0.01,
        "trials": 3,
        "master_seed": 11,
        "comparison": "risk",
    }
    report = maskridge.run_experiment(json.dumps(config))
    again = maskridge.run_experiment(json.dumps(config))
    assert report == again
    assert {r["quantity"] for r in report["records"]} >= {"gen"}

    print(f"maskridge {maskridge.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
