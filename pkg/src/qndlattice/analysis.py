"""Decay-law fits and spectrum comparisons for engineered correlations.

Fits are two-stage.  First an asymptotic offset ``C_inf`` is estimated,
then ``log|C - C_inf|`` is regressed on ``dr`` (exponential) or ``log dr``
(algebraic).  Two offset estimators are available:

``"fit"``
    ``C_inf`` from a least-squares fit of ``A * shape(dr) + C_inf`` over the
    fit window, profiling the decay parameter (linear solve for ``A`` and
    ``C_inf`` at each trial value).
``"tail"``
    Mean of ``C`` over the trailing 20% of the supplied separations.

A float may be passed to use a known offset.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats
from scipy.optimize import minimize_scalar

TAIL_FRACTION = 0.2
LOW_K_EXCLUDE = 0.1

_SHAPES = {
    "exponential": (lambda dr, xi: np.exp(-dr / xi), (1e-2, 1e4)),
    "algebraic": (lambda dr, zeta: dr ** -zeta, (1e-3, 20.0)),
}


@dataclass
class FitResult:
    law: str
    parameter: float
    amplitude: float
    offset: float
    r_squared: float
    fit_range: tuple[int, int]
    offset_method: str = "fit"
    flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags and math.isfinite(self.parameter)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["fit_range"] = list(self.fit_range)
        return out


def _as_series(correlation, delta_r):
    y = np.asarray(correlation, dtype=float)
    x = np.arange(y.size, dtype=float) if delta_r is None else np.asarray(delta_r, dtype=float)
    if x.shape != y.shape:
        raise ValueError("delta_r and correlation differ in length")
    return x, y


def tail_offset(correlation, fraction: float = TAIL_FRACTION) -> float:
    y = np.asarray(correlation, dtype=float)
    ntail = max(1, int(round(fraction * y.size)))
    return float(y[-ntail:].mean())


def _profile_offset(law, x, y):
    shape, (lo, hi) = _SHAPES[law]

    def sse(log_theta):
        basis = np.column_stack([shape(x, math.exp(log_theta)), np.ones_like(x)])
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        resid = y - basis @ coef
        return float(resid @ resid), coef

    grid = np.linspace(math.log(lo), math.log(hi), 241)
    costs = [sse(t)[0] for t in grid]
    i = int(np.argmin(costs))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    best = minimize_scalar(lambda t: sse(t)[0], bounds=(a, b), method="bounded",
                           options={"xatol": 1e-12})
    return float(sse(best.x)[1][1])


def _fit(law, correlation, fit_range, offset, delta_r):
    x_all, y_all = _as_series(correlation, delta_r)
    lo, hi = fit_range
    sel = (x_all >= lo) & (x_all <= hi)
    x, y = x_all[sel], y_all[sel]
    if x.size < 4:
        raise ValueError(f"fit range {fit_range} holds {x.size} points; need >= 4")
    if law == "algebraic" and x.min() <= 0:
        raise ValueError("algebraic fit needs dr > 0")

    if isinstance(offset, str) and offset not in ("fit", "tail"):
        raise ValueError(f"unknown offset method {offset!r}")
    flags: list[str] = []
    if np.ptp(y) == 0.0:
        return FitResult(law, math.nan, 0.0, float(y[0]), 0.0, (lo, hi),
                         str(offset) if not isinstance(offset, str) else offset, ["no_decay"])

    if isinstance(offset, str):
        c_inf = _profile_offset(law, x, y) if offset == "fit" else tail_offset(y_all)
        method = offset
    else:
        c_inf, method = float(offset), "given"

    dev = y - c_inf
    sign = np.sign(dev[np.argmax(np.abs(dev))])
    if np.any(np.sign(dev) != sign):
        flags.append("nonpositive_residual")
    keep = dev != 0.0
    xs = x[keep] if law == "exponential" else np.log(x[keep])
    ls = np.log(np.abs(dev[keep]))
    reg = stats.linregress(xs, ls)
    slope = reg.slope
    if not slope < 0:
        flags.append("no_decay")
        param = math.nan
    else:
        param = -1.0 / slope if law == "exponential" else -slope
    return FitResult(
        law=law,
        parameter=float(param),
        amplitude=float(sign * math.exp(reg.intercept)),
        offset=float(c_inf),
        r_squared=float(reg.rvalue**2),
        fit_range=(int(lo), int(hi)),
        offset_method=method,
        flags=flags,
    )


def fit_exponential(correlation, fit_range=(1, 15), offset="fit", delta_r=None) -> FitResult:
    """Fit ``|C(dr) - C_inf| ~ A exp(-dr / xi)``; ``parameter`` is ``xi``."""
    return _fit("exponential", correlation, fit_range, offset, delta_r)


def fit_algebraic(correlation, fit_range=(2, 33), offset="fit", delta_r=None) -> FitResult:
    """Fit ``|C(dr) - C_inf| ~ A dr^(-zeta)``; ``parameter`` is ``zeta``."""
    return _fit("algebraic", correlation, fit_range, offset, delta_r)


def decades(correlation, result: FitResult, delta_r=None) -> float:
    """Dynamic range, in decades, of ``|C - C_inf|`` across the fit window."""
    x, y = _as_series(correlation, delta_r)
    lo, hi = result.fit_range
    dev = np.abs(y[(x >= lo) & (x <= hi)] - result.offset)
    dev = dev[dev > 0]
    return float(np.log10(dev.max() / dev.min())) if dev.size else 0.0


def _low_k_cut(n_s: int) -> int:
    return int(math.ceil(LOW_K_EXCLUDE * (n_s // 2)))


def spectrum_match(spectrum, design, n_s: int) -> float:
    """Pearson correlation between the summed k-spectrum and ``1 - f_p / 4``.

    Compared over ``p = ceil(0.1 n_s/2)..n_s/2``; the lowest 10% of ``k`` is
    excluded.  Raises ``ValueError`` if either side has zero variance.
    """
    spectrum = np.asarray(spectrum, dtype=float)
    half = n_s // 2
    p = np.arange(_low_k_cut(n_s), half + 1)
    measured = spectrum[p]
    target = np.asarray(design.target_profile, dtype=float)[p]
    if np.ptp(measured) == 0.0 or np.ptp(target) == 0.0:
        raise ValueError("spectrum match undefined: zero variance")
    return float(np.corrcoef(measured, target)[0, 1])


def spectrum_extremum(spectrum, n_s: int) -> tuple[int, float]:
    """Mode index and wavevector of the deepest dip of the spectrum, ``k != 0``.

    The uniform mode is skipped: every pulse's standing wave has a uniform
    component, so ``k = 0`` collects squeezing from the whole sequence.
    """
    spectrum = np.asarray(spectrum, dtype=float)
    p = np.arange(1, n_s // 2 + 1)
    m = int(p[np.argmin(spectrum[p])])
    return m, 2 * np.pi * m / n_s
