"""Evaluation math: overhead and loss metrics, Fieller intervals for a ratio
of means, and the 2^2 r full factorial design with allocation of variation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DegenerateInputError, DesignError, InputError, InvalidIntervalError


def runtime_overhead(t_total: float, t_bench: float) -> float:
    if t_bench <= 0:
        raise InputError(f"benchmark time must be positive, got {t_bench}")
    return (t_total - t_bench) / t_bench


def data_loss(d_discarded: float, d_total: float) -> float:
    if d_total <= 0:
        raise InputError("no data generated")
    if not 0 <= d_discarded <= d_total:
        raise InputError("discarded volume must lie in [0, total]")
    return d_discarded / d_total


def t_quantile(confidence: float, df: int) -> float:
    """Two-sided Student-t critical value."""
    if not 0 < confidence < 1:
        raise InputError("confidence must be in (0, 1)")
    return float(stats.t.ppf(0.5 + confidence / 2, df))


@dataclass(frozen=True)
class RatioCI:
    rho: float
    lo: float
    hi: float
    confidence: float
    n: int

    @property
    def half_width(self) -> float:
        return (self.hi - self.lo) / 2

    def __contains__(self, value) -> bool:
        return self.lo <= value <= self.hi


def fieller_ci(xs, ys, confidence: float = 0.90) -> RatioCI:
    """Approximate Fieller interval for ``mean(xs) / mean(ys)``.

    ``rho +- rho * t * sqrt((sX/muX)^2 + (sY/muY)^2 - 2 cov/(muX muY))`` where
    sX, sY and cov are the standard errors and covariance of the two sample
    means (n-1 divisor) and t has n-1 degrees of freedom.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("xs and ys must be paired 1-D samples")
    n = x.size
    if n < 2:
        raise InputError("need at least two paired observations")
    mx, my = x.mean(), y.mean()
    if my == 0:
        raise DegenerateInputError("mean of the denominator sample is zero")
    if mx == 0:
        raise DegenerateInputError("mean of the numerator sample is zero")
    cov = np.cov(x, y, ddof=1) / n
    terms = (cov[0, 0] / mx**2, cov[1, 1] / my**2, 2 * cov[0, 1] / (mx * my))
    radicand = terms[0] + terms[1] - terms[2]
    if radicand < 0:
        # rounding noise around an exact zero (e.g. identical samples)
        if -radicand <= 1e-12 * (terms[0] + terms[1]):
            radicand = 0.0
        else:
            raise InvalidIntervalError(f"negative radicand {radicand:.3g}: interval is not bounded")
    rho = mx / my
    half = abs(rho) * t_quantile(confidence, n - 1) * math.sqrt(radicand)
    return RatioCI(rho, rho - half, rho + half, confidence, n)


@dataclass(frozen=True)
class FactorialFit:
    q0: float
    qs: float
    qb: float
    qi: float
    f_s: float
    f_b: float
    f_i: float
    f_e: float
    s_e: float
    r: int

    def predict(self, x_s: int, x_b: int) -> float:
        return self.q0 + self.qs * x_s + self.qb * x_b + self.qi * x_s * x_b

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


LEVELS = (-1, 1)


def factorial_fit(observations) -> FactorialFit:
    """Fit ``y = Q0 + Qs xs + Qb xb + Qi xs xb`` to a 2x2 design with r replicates.

    ``observations[a][b]`` holds the r replicate measurements of the cell with
    ``x_s = LEVELS[a]`` and ``x_b = LEVELS[b]``.
    """
    try:
        cells = [[np.asarray(observations[a][b], dtype=float).ravel() for b in (0, 1)] for a in (0, 1)]
    except (IndexError, KeyError, TypeError):
        raise DesignError("observations must cover all four (x_s, x_b) cells") from None
    sizes = {c.size for row in cells for c in row}
    if 0 in sizes:
        raise DesignError("a design cell has no observations")
    if len(sizes) != 1:
        raise DesignError(f"unequal replication across cells: {sorted(sizes)}")
    r = sizes.pop()
    means = np.array([[c.mean() for c in row] for row in cells])
    xs = np.array(LEVELS, dtype=float)
    sign_s = xs[:, None] * np.ones(2)
    sign_b = np.ones(2)[:, None] * xs
    q0 = means.sum() / 4
    qs = (sign_s * means).sum() / 4
    qb = (sign_b * means).sum() / 4
    qi = (sign_s * sign_b * means).sum() / 4
    resid = [cells[a][b] - means[a, b] for a in (0, 1) for b in (0, 1)]
    s_e = float(sum((e**2).sum() for e in resid))
    # fractions are scale free; normalising first keeps tiny inputs out of subnormals
    m = max(abs(qs), abs(qb), abs(qi), max(float(np.abs(e).max()) for e in resid))
    if m == 0:
        f_s = f_b = f_i = 0.0
    else:
        ns, nb, ni = qs / m, qb / m, qi / m
        denom = sum(((e / m) ** 2).sum() for e in resid) / (4 * r) + ns**2 + nb**2 + ni**2
        f_s, f_b, f_i = ns**2 / denom, nb**2 / denom, ni**2 / denom
    return FactorialFit(float(q0), float(qs), float(qb), float(qi),
                        float(f_s), float(f_b), float(f_i), float(1 - (f_s + f_b + f_i)), s_e, r)


def factorial_from_rows(rows) -> FactorialFit:
    """Build the design from ``(x_s, x_b, y)`` rows with levels in {-1, +1}."""
    cells = [[[], []], [[], []]]
    for x_s, x_b, y in rows:
        try:
            cells[LEVELS.index(int(x_s))][LEVELS.index(int(x_b))].append(float(y))
        except ValueError:
            raise DesignError(f"factor levels must be -1 or +1, got ({x_s}, {x_b})") from None
    return factorial_fit(cells)
