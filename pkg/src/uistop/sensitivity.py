"""Comparative statics of q*, b* and v(x) in the wage drift mu and job-loss rate lambda0.

Derivatives come from implicit differentiation of the characteristic
equation F(q) = 0.5 sigma^2 q (q - 1) + mu q - r_tilde:

    dq/dmu      = -q / D,     dq/dlambda0 = 1 / D,     D = sigma^2 (q - 1/2) + mu,

then the chain rule through b* = P q / (beta1 (q - 1)) and
v(x) = P / (q - 1) * (x / b*)^q below the threshold, or beta1 x - P above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DomainError
from .model import ModelParams, characteristic_roots, derive, optimal_threshold, solve

B_STAR = "b_star"
VALUE = "value"


def _require_no_mortality(params: ModelParams, what: str) -> None:
    if params.mortality is not None:
        raise DomainError(f"{what} covers the model without mortality")


@dataclass(frozen=True)
class SensitivityReport:
    dq_dmu: float
    dq_dlambda0: float
    db_dmu: float
    db_dlambda0: float
    dv_dmu: float
    dv_dlambda0: float
    rel_step: float
    increments: dict = field(default_factory=dict)

    def table(self) -> list[tuple[str, str, float, float]]:
        """Rows ``(quantity, parameter, derivative, increment)``."""
        rows = []
        for qty in ("b", "v"):
            for par in ("mu", "lambda0"):
                d = getattr(self, f"d{qty}_d{par}")
                rows.append(("b_star" if qty == "b" else "value", par, d, self.increments[f"{qty}_{par}"]))
        return rows


def derivatives(params: ModelParams, x: float | None = None, rel_step: float = 0.01) -> SensitivityReport:
    """Analytic partial derivatives in mu and lambda0.

    ``rel_step`` sets the increments: each derivative times ``rel_step`` times
    the parameter's current value.
    """
    x = params.x if x is None else float(x)
    d = derive(params)
    q, r_tilde, beta1 = d.q_star, d.r_tilde, d.beta1
    P, mu, lam, s2 = params.premium, params.mu, params.lambda0, params.sigma ** 2
    b = optimal_threshold(d, P)

    D = s2 * (q - 0.5) + mu
    dq = {"mu": -q / D, "lambda0": 1.0 / D}

    beta_eff = beta1 * (r_tilde - mu) / lam
    dbeta_eff = 0.0
    if params.mortality is not None:
        m = params.mortality
        dbeta_eff = -m.lambda2 * m.a_dag / (params.r + lam) ** 2
    dlog_beta1 = {
        "mu": 1.0 / (r_tilde - mu),
        "lambda0": 1.0 / lam - 1.0 / (r_tilde - mu) + dbeta_eff / beta_eff,
    }

    out = {}
    for par in ("mu", "lambda0"):
        dlog_b = -dq[par] / (q * (q - 1.0)) - dlog_beta1[par]
        out[f"b_{par}"] = b * dlog_b
        if x < b:
            v = P / (q - 1.0) * math.exp(q * math.log(x / b)) if x > 0 else 0.0
            dlog_v = -dq[par] / (q - 1.0) + dq[par] * math.log(x / b) - q * dlog_b if x > 0 else 0.0
            out[f"v_{par}"] = v * dlog_v
        else:
            out[f"v_{par}"] = x * beta1 * dlog_beta1[par]

    steps = {"mu": rel_step * mu, "lambda0": rel_step * lam}
    increments = {f"{k}": out[k] * steps[k.split("_", 1)[1]] for k in out}
    return SensitivityReport(
        dq_dmu=dq["mu"],
        dq_dlambda0=dq["lambda0"],
        db_dmu=out["b_mu"],
        db_dlambda0=out["b_lambda0"],
        dv_dmu=out["v_mu"],
        dv_dlambda0=out["v_lambda0"],
        rel_step=rel_step,
        increments=increments,
    )


def _qbv(params: ModelParams, x: float) -> tuple[float, float, float]:
    sol = solve(params)
    return sol.derived.q_star, sol.b_star, float(sol.value(x))


@dataclass(frozen=True)
class LimitEntry:
    """Edge behaviour of one quantity as one parameter approaches an edge.

    ``limit`` is ``inf`` for divergent quantities.  ``approach`` holds
    ``(parameter value, quantity)`` pairs moving toward the edge, and
    ``monotone`` says whether they close in on the limit monotonically.
    """

    parameter: str
    edge: str
    quantity: str
    limit: float
    approach: tuple[tuple[float, float], ...]
    monotone: bool


def _entry(parameter, edge, quantity, limit, pts):
    vals = [v for _, v in pts]
    if math.isinf(limit):
        mono = all(b > a for a, b in zip(vals, vals[1:]))
    else:
        gaps = [abs(v - limit) for v in vals]
        mono = all(b <= a for a, b in zip(gaps, gaps[1:]))
    return LimitEntry(parameter, edge, quantity, float(limit), tuple(pts), mono)


def limits(params: ModelParams, x: float | None = None) -> list[LimitEntry]:
    """Limiting values of q*, b* and v(x) at the edges of the mu and lambda0 ranges."""
    _require_no_mortality(params, "limits")
    x = params.x if x is None else float(x)
    r, lam, mu, beta, P = params.r, params.lambda0, params.mu, params.beta, params.premium
    half_s2 = 0.5 * params.sigma ** 2
    offsets = [1e-3, 1e-4, 1e-5, 1e-6]
    big = [1.0, 10.0, 100.0, 1000.0]

    def sweep(name, values):
        pts = {"q_star": [], "b_star": [], "value": []}
        for p in values:
            q, b, v = _qbv(params.replace(**{name: p}), x)
            pts["q_star"].append((p, q))
            pts["b_star"].append((p, b))
            pts["value"].append((p, v))
        return pts

    out = []
    r_tilde = r + lam

    pts = sweep("mu", [-m for m in [1e-3, 1e-2, 1e-1, 1.0]])
    out += [_entry("mu", "-inf", "q_star", math.inf, pts["q_star"]),
            _entry("mu", "-inf", "b_star", math.inf, pts["b_star"]),
            _entry("mu", "-inf", "value", 0.0, pts["value"])]

    pts = sweep("mu", [r_tilde - e for e in offsets])
    out += [_entry("mu", "r_tilde-", "q_star", 1.0, pts["q_star"]),
            _entry("mu", "r_tilde-", "b_star", P * (half_s2 + r_tilde) / (beta * lam), pts["b_star"]),
            _entry("mu", "r_tilde-", "value", math.inf, pts["value"])]

    pts = sweep("lambda0", big)
    out += [_entry("lambda0", "inf", "q_star", math.inf, pts["q_star"]),
            _entry("lambda0", "inf", "b_star", P / beta, pts["b_star"]),
            _entry("lambda0", "inf", "value", max(beta * x - P, 0.0), pts["value"])]

    if math.isclose(mu, r, rel_tol=1e-12, abs_tol=1e-15):
        pts = sweep("lambda0", offsets)
        out += [_entry("lambda0", "0+", "q_star", 1.0, pts["q_star"]),
                _entry("lambda0", "0+", "b_star", math.inf, pts["b_star"]),
                _entry("lambda0", "0+", "value", beta * x, pts["value"])]
    elif mu < r:
        q0, _ = characteristic_roots(mu, params.sigma, r)
        pts = sweep("lambda0", offsets)
        out += [_entry("lambda0", "0+", "q_star", q0, pts["q_star"]),
                _entry("lambda0", "0+", "b_star", math.inf, pts["b_star"]),
                _entry("lambda0", "0+", "value", 0.0, pts["value"])]
    else:
        edge = mu - r
        pts = sweep("lambda0", [edge + e for e in offsets])
        out += [_entry("lambda0", "(mu-r)+", "q_star", 1.0, pts["q_star"]),
                _entry("lambda0", "(mu-r)+", "b_star", P * (half_s2 + mu) / (beta * edge), pts["b_star"]),
                _entry("lambda0", "(mu-r)+", "value", math.inf, pts["value"])]
    return out


def lambda_star(params: ModelParams, x: float | None = None) -> float:
    """Job-loss rate at which the optimal threshold equals the wage ``x``.

    For ``lambda0`` above it, buying immediately is optimal.  When ``mu = r``
    the threshold condition fixes q* = beta x / (beta x - P), and the
    characteristic equation then gives lambda0 directly.  Other drifts are
    handled by root finding, using that b* decreases in lambda0.
    Returns ``inf`` when ``x <= P / beta``.
    """
    _require_no_mortality(params, "lambda_star")
    x = params.x if x is None else float(x)
    beta, P, r, mu = params.beta, params.premium, params.r, params.mu
    if x <= P / beta:
        return math.inf
    if math.isclose(mu, r, rel_tol=1e-12, abs_tol=1e-15):
        q = beta * x / (beta * x - P)
        return (q - 1.0) * (0.5 * params.sigma ** 2 * q + r)

    lower = max(0.0, mu - r)

    def gap(lam):
        return optimal_threshold(derive(params.replace(lambda0=lam)), P) - x

    lo = lower + max(1e-3, lower)
    for _ in range(200):
        if gap(lo) > 0.0:
            break
        lo = lower + (lo - lower) / 10.0
        if lo == lower:
            return lower
    else:
        return lower
    hi = max(2.0 * lo, 1e-2)
    while gap(hi) > 0.0:
        hi *= 2.0
    return optimize.brentq(gap, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def surface(params: ModelParams, lambda0, mu, target: str) -> np.ndarray:
    """b* or v(x) over arrays of (lambda0, mu); NaN where mu >= r + lambda0."""
    _require_no_mortality(params, "surface")
    lam, mu = np.broadcast_arrays(np.asarray(lambda0, dtype=float), np.asarray(mu, dtype=float))
    r, s2, P, x = params.r, params.sigma ** 2, params.premium, params.x
    if s2 == 0.0:
        raise DomainError("surfaces need sigma > 0")
    rt = r + lam
    ok = (mu < rt) & (lam > 0.0)
    a = mu - 0.5 * s2
    disc = np.sqrt(a * a + 2.0 * rt * s2)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(a > 0.0, 2.0 * rt / (a + disc), (disc - a) / s2)
        beta1 = params.beta * lam / (rt - mu)
        b = P * q / (beta1 * (q - 1.0))
        if target == B_STAR:
            out = b
        elif target == VALUE:
            out = np.where(x < b, (beta1 * b - P) * np.exp(q * np.log(x / b)), beta1 * x - P)
        else:
            raise DomainError(f"target must be '{B_STAR}' or '{VALUE}', got {target!r}")
    return np.where(ok, out, np.nan)


def isolines(
    params: ModelParams,
    level: float,
    target: str,
    lambda0_range: tuple[float, float],
    mu_range: tuple[float, float],
    n: int = 400,
) -> np.ndarray:
    """Points (lambda0, mu) where ``target`` equals ``level``.

    Marches down each lambda0 column of an n-by-n grid, brackets every sign
    change in mu and polishes it with Brent's method.  Returns an array of
    shape (k, 2) ordered by lambda0; k may be zero.
    """
    if not level > 0.0:
        raise DomainError(f"level must be > 0, got {level}")
    if lambda0_range[0] >= lambda0_range[1] or mu_range[0] >= mu_range[1] or n < 2:
        raise DomainError("degenerate isoline window")
    lams = np.linspace(*lambda0_range, n)
    mus = np.linspace(*mu_range, n)
    grid = surface(params, lams[:, None], mus[None, :], target) - level

    points = []
    for i, lam in enumerate(lams):
        col = grid[i]
        for j in range(n - 1):
            f0, f1 = col[j], col[j + 1]
            if not (np.isfinite(f0) and np.isfinite(f1)):
                continue
            if f0 == 0.0:
                points.append((lam, mus[j]))
            elif f0 * f1 < 0.0:
                root = optimize.brentq(
                    lambda m: float(surface(params, lam, m, target)) - level,
                    mus[j], mus[j + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps,
                )
                points.append((lam, root))
        if np.isfinite(col[-1]) and col[-1] == 0.0:
            points.append((lam, mus[-1]))
    return np.array(points, dtype=float).reshape(-1, 2)


def count_sign_changes(values) -> int:
    """Sign changes in a sequence, ignoring exact zeros."""
    s = np.sign(np.asarray(values, dtype=float))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def value_slope_sign_changes(params: ModelParams, lambda0_grid) -> int:
    """How often the finite-difference slope of lambda0 -> v(x) changes sign on a grid."""
    lam = np.asarray(lambda0_grid, dtype=float)
    v = surface(params, lam, params.mu, VALUE)
    return count_sign_changes(np.diff(v))
