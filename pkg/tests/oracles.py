"""Reference implementations used only as test oracles.

They are written directly from the model equations and share no code with the
package: the equilibrium is solved as a 2-D root problem (or a 1-D problem in
labour), never through the reduced consumption condition the package uses.
"""

import json
import math
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, root

GOLDEN = Path(__file__).parent / "data" / "golden_step.json"


def equilibrium_2d(k, G, alpha=1 / 3, rho=7.0, gamma=1.0):
    """Solve {CES market clearing, labour FOC} for (c_tilde, n) with a 2-D root finder."""

    def residual(x):
        lc, ln = x
        ces = lc + math.log(alpha * k ** -rho + (1 - alpha) * math.exp(-rho * ln)) / rho
        foc = ln + lc - math.log(G / (2 * gamma)) - math.log(1 - alpha) - (1 + rho) * (lc - ln)
        return [ces, foc]

    guess = min(k, math.sqrt(G / (2 * gamma)))
    sol = root(residual, [math.log(guess), math.log(guess)], method="hybr", options={"xtol": 1e-15})
    lc, ln = sol.x
    for _ in range(5):  # Newton polish with a finite-difference Jacobian
        f = np.array(residual([lc, ln]))
        h = 1e-7
        jac = np.column_stack([(np.array(residual([lc + h, ln])) - f) / h,
                               (np.array(residual([lc, ln + h])) - f) / h])
        lc, ln = np.array([lc, ln]) - np.linalg.solve(jac, f)
    c, n = math.exp(lc), math.exp(ln)
    w = (1 - alpha) * (c / n) ** (1 + rho)
    q = alpha * (c / k) ** (1 + rho)
    return c, n, w, q


def equilibrium_in_labour(k, G, alpha, rho, gamma):
    """Root in labour: output from CES at (k, n), then the FOC residual n*c - G*w/(2 gamma)."""

    def output(n):
        return (alpha * k ** -rho + (1 - alpha) * n ** -rho) ** (-1 / rho)

    def foc(n):
        c = output(n)
        w = (1 - alpha) * (c / n) ** (1 + rho)
        return n * c - G * w / (2 * gamma)

    n = brentq(foc, 1e-9, 100.0, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    c = output(n)
    return c, n, (1 - alpha) * (c / n) ** (1 + rho), alpha * (c / k) ** (1 + rho)


PARAMS = dict(gamma=1.0, alpha=1 / 3, rho=7.0, z0=0.05, eta=0.5, sigma_z=0.15, delta=0.005,
              r=0.0015, pi=0.001, a=15.0, c0=0.017, theta_c=300.0, g_min=0.05, g_max=0.95,
              lam=0.95, nu=1.0, n_scale=0.25, theta_k=15.0, f_min=0.0, f_max=1.0, sigma_floor=1e-8)


def reference_first_step(eps, u, P=PARAMS):
    """Straight-line version of one period from the documented initial state."""
    a_, rho, gam = P["alpha"], P["rho"], P["gamma"]
    k0 = math.sqrt(P["g_max"] / (2 * gam))
    c_prev = P["z0"] * k0
    _, n0, w0, _ = equilibrium_in_labour(k0, P["g_max"], a_, rho, gam)
    income_prev = P["z0"] * w0 * n0
    b_prev, q_prev, frak_prev = 0.0, 0.0, 0.0
    mu_prev, var_prev, s_prev = P["r"] + P["delta"], P["sigma_floor"] ** 2, 0.0

    frak = P["eta"] * frak_prev + math.sqrt(1 - P["eta"] ** 2) * P["sigma_z"] * eps
    z = P["z0"] * math.exp(frak)
    conf = math.tanh(P["theta_c"] * (c_prev - P["c0"]))
    G = 0.5 * (P["g_min"] + P["g_max"] + (P["g_max"] - P["g_min"]) * conf)
    sigma = P["nu"] * s_prev + (1 - P["nu"]) * conf
    F = 0.5 * (P["f_max"] + P["f_min"] + (P["f_max"] - P["f_min"]) * math.tanh(P["theta_k"] * sigma))

    k = (1 - P["delta"]) * k0 + F * (1 - G) * income_prev
    for _ in range(1000):
        ct, n, wt, qt = equilibrium_in_labour(k, G, a_, rho, gam)
        income = z * wt * n + b_prev / (1 + P["pi"]) + q_prev * k0 / (1 + P["pi"])
        k_new = (1 - P["delta"]) * k0 + F * (1 - G) * income
        if abs(k_new - k) < 1e-15:
            break
        k = k_new
    ct, n, wt, qt = equilibrium_in_labour(k, G, a_, rho, gam)
    income = z * wt * n + b_prev / (1 + P["pi"]) + q_prev * k0 / (1 + P["pi"])

    xi = u ** (1 / P["a"])
    q_star = z * qt
    q = q_star * xi
    mu = P["lam"] * mu_prev + (1 - P["lam"]) * q
    var = P["lam"] * var_prev + (1 - P["lam"]) * (q - mu) ** 2
    S = P["n_scale"] * (mu - P["r"] - P["delta"]) / math.sqrt(var)
    b = (1 + P["r"]) * (1 - F) * (1 - G) * income
    c = z * ct
    return dict(t=1, z=z, frak_z=frak, c=c, n=n, k=k, b=b, w=z * wt, q_star=q_star, q=q, G=G, F=F,
                C=conf, mu_q=mu, var_q=var, S=S, Sigma=sigma, income=income, i_total=(1 - G) * income,
                profit_residual=c - z * wt * n - q_star * k, xi=xi)


def write_golden():
    from reflexcycle.stochastic import ShockStreams

    streams = ShockStreams.from_seed(0)
    eps = float(streams.normals(1)[0])
    u = float(streams.uniforms(1)[0])
    record = {"seed": 0, "eps": eps, "u": u, "state": reference_first_step(eps, u)}
    GOLDEN.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    write_golden()
    print(GOLDEN.read_text())
