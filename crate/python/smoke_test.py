"""Smoke test for the betagas Python module.

Build and install first:

    pip install --no-build-isolation ./crates/python
    python python/smoke_test.py
"""

import math
import tempfile

import betagas


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    results = []

    mu, el = betagas.solve_field(betagas.Field.gaussian(), 2.0)
    lo, hi = mu.support()
    results.append(check("semicircle support", abs(hi - math.sqrt(2)) < 0.01, f"[{lo:.4f}, {hi:.4f}] el={el:.1e}"))

    h = betagas.Interaction.gaussian(0.5, 1.0)
    ens = betagas.Ensemble(30, 2.0, betagas.Field.gaussian(), h)
    mu_star, residual, iters = betagas.self_consistent(ens)
    results.append(check("self-consistent fixed point", residual <= 1e-4, f"residual {residual:.1e} after {iters}"))
    results.append(check("interaction widens support", mu_star.support()[1] > hi))

    x = [-1.0, -0.3, 0.4, 1.2]
    small = betagas.Ensemble(4, 2.0, betagas.Field.gaussian(), h)
    g = small.gradient(x)
    eps = 1e-6
    xp = list(x)
    xp[1] += eps
    xm = list(x)
    xm[1] -= eps
    fd = (small.hamiltonian(xp) - small.hamiltonian(xm)) / (2 * eps)
    results.append(check("gradient vs finite difference", abs(fd - g[1]) < 1e-4 * max(1.0, abs(fd))))

    samples, acc = betagas.sample_chain(ens, seed=1, n_samples=200, thin=5 * 30)
    m2 = sum(v * v for c in samples for v in c) / (len(samples) * 30)
    results.append(check("metropolis chain", 0.2 < acc < 0.5 and 0.45 < m2 < 0.65, f"acceptance {acc:.3f}, second moment {m2:.4f}"))

    draws = betagas.tridiagonal(200, 2.0, 7, 300)
    value, se = betagas.correlation(draws, mu, k=2)
    sine = betagas.sine_kernel_reference(2)
    results.append(check("pair statistic near sine kernel", abs(value - sine) <= 4 * se, f"{value:.4f} +- {se:.4f} vs {sine:.4f}"))

    gaps = betagas.bulk_gaps(draws, mu)
    results.append(check("unfolded mean gap", abs(sum(gaps) / len(gaps) - 1.0) < 0.02))

    eff, _ = betagas.sample_chain(ens, seed=2, n_samples=100, thin=5 * 30, effective=mu_star)
    d, d_se, ess = betagas.dirichlet(eff, h, mu_star)
    results.append(check("dirichlet estimate", d >= 0 and ess > 10, f"{d:.4f} +- {d_se:.4f}, ess {ess:.0f}"))

    try:
        betagas.sample_chain(betagas.Ensemble(4, 0.5), seed=1, n_samples=10, mala=True)
        results.append(check("mala refuses beta < 1", False))
    except ValueError:
        results.append(check("mala refuses beta < 1", True))

    with tempfile.TemporaryDirectory() as out:
        try:
            betagas.run_stage("compare", out=out)
            results.append(check("compare needs samples", False))
        except FileNotFoundError:
            results.append(check("compare needs samples", True))

    print(f"{sum(results)}/{len(results)} checks passed")
    raise SystemExit(0 if all(results) else 1)


if __name__ == "__main__":
    main()
