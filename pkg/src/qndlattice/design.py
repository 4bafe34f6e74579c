"""Inverse design: target correlation shape -> squeezing fractions -> couplings.

A pulse at mode ``p`` with squeezing fraction ``f_p`` lowers ``Gamma(k_p, -k_p)``
to ``Gamma0 (1 - f_p / 4)``, which adds ``-(Gamma0 / 4 n_s) f_p cos(k_p dr)`` to
the real-space correlations.  The fractions are therefore a cosine transform
of the target shape; a single global scale then fixes the strongest coupling
to ``c_max``.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .lattice import EnsembleConfig, gamma0
from .pulse import LIGHT_VARIANCE_IN, standing_wave_weights

log = logging.getLogger(__name__)

KINDS = ("exponential", "algebraic", "modulated_algebraic", "tabulated")
TAIL_FRACTION = 0.1
CLIPPED_MASS_WARN = 0.05


class InfeasibleTargetError(ValueError):
    """The requested target cannot be realised (degenerate shape, unphysical coupling)."""


@dataclass(frozen=True)
class TargetSpec:
    kind: str
    xi: float | None = None
    zeta: float | None = None
    period: int | None = None
    samples: dict[int, float] | None = None
    c_max: float = 0.95

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"target kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "exponential":
            _require_positive("xi", self.xi)
        elif self.kind == "algebraic":
            _require_positive("zeta", self.zeta)
        elif self.kind == "modulated_algebraic":
            _require_positive("zeta", self.zeta)
            if self.period is None or int(self.period) != self.period or self.period < 1:
                raise ValueError(f"period must be a positive integer, got {self.period}")
        elif not self.samples:
            raise ValueError("tabulated target needs samples")
        if not (math.isfinite(self.c_max) and self.c_max > 0):
            raise ValueError(f"c_max must be positive and finite, got {self.c_max}")

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "c_max": self.c_max}
        for key in ("xi", "zeta", "period"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out


def _require_positive(name, value):
    if value is None or not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive number, got {value}")


@dataclass
class DesignResult:
    """Per-mode fractions and couplings for ``p = 0..n_s/2``."""

    fractions: np.ndarray
    couplings: np.ndarray
    raw_fractions: np.ndarray
    clipped_mass: float
    scale: float
    samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def target_profile(self) -> np.ndarray:
        """Expected ``Gamma(k_p, -k_p) / Gamma0`` after the pulses, per component."""
        return 1.0 - self.fractions / 4.0

    def to_dict(self) -> dict:
        return {
            "fractions": self.fractions.tolist(),
            "couplings": self.couplings.tolist(),
            "clipped_mass": self.clipped_mass,
            "scale": self.scale,
        }


def load_target_file(path: str | Path) -> dict[int, float]:
    """Read ``dr value`` rows (whitespace or comma separated, ``#`` comments)."""
    samples: dict[int, float] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [t for t in re.split(r"[,\s]+", line) if t]
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
        dr, value = float(parts[0]), float(parts[1])
        if not dr.is_integer():
            raise ValueError(f"{path}:{lineno}: separation must be an integer, got {parts[0]}")
        samples[int(dr)] = value
    return samples


def sample_target(spec: TargetSpec, n_s: int) -> np.ndarray:
    """Target shape on ``dr = 1..n_s/2`` with the tail mean subtracted.

    The subtracted offset is the mean over the last 10% of separations.
    """
    dr = np.arange(1, n_s // 2 + 1, dtype=float)
    if spec.kind == "exponential":
        vals = np.exp(-dr / spec.xi)
    elif spec.kind == "algebraic":
        vals = dr ** -spec.zeta
    elif spec.kind == "modulated_algebraic":
        vals = np.cos(2 * np.pi * dr / spec.period) * dr ** -spec.zeta
    else:
        missing = [int(x) for x in dr if int(x) not in spec.samples]
        if missing:
            raise ValueError(
                f"tabulated target must cover dr = 1..{n_s // 2}; missing {missing[:5]}"
                + (" ..." if len(missing) > 5 else "")
            )
        vals = np.array([spec.samples[int(x)] for x in dr], dtype=float)
    ntail = max(1, int(round(TAIL_FRACTION * len(dr))))
    return vals - vals[-ntail:].mean()


def target_to_fractions(
    samples: np.ndarray, config: EnsembleConfig, complete: bool = True
) -> tuple[np.ndarray, float]:
    """Cosine transform of ``4 * samples / Gamma0`` onto ``p = 0..n_s/2``.

    The sum runs over ``dr = 1..n_s/2`` (half weight at ``n_s/2``), so it
    carries no zero-separation term and its mean over the zone vanishes.
    With ``complete`` a uniform fraction is added, the smallest one that makes
    every entry non-negative; it only changes the target's ``dr = 0`` value,
    which is a variance rather than a correlation.  Without it, negative
    entries are clipped to zero.

    Returns the fractions and the clipped share of the absolute transform
    mass (always 0 when ``complete``).
    """
    n = config.n_s
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (n // 2,):
        raise ValueError(f"expected {n // 2} samples for dr = 1..{n // 2}, got {samples.shape}")
    dr = np.arange(1, n // 2 + 1)
    w = np.ones(n // 2)
    w[-1] = 0.5
    p = np.arange(n // 2 + 1)
    kernel = np.cos(2 * np.pi * np.outer(p, dr) / n)
    raw = (2.0 / n) * kernel @ (w * 4.0 * samples / gamma0(config))
    if complete and raw.min() < 0:
        raw = raw - raw.min()
    total = np.abs(raw).sum()
    clipped = float(-raw[raw < 0].sum() / total) if total > 0 and raw.min() < 0 else 0.0
    return np.clip(raw, 0.0, None), clipped


def _overlap(p: int, n_s: int) -> float:
    c = standing_wave_weights(p, n_s)
    return float(c @ c) / n_s


def fraction_pole(p: int, n_s: int) -> float:
    """Supremum of achievable fractions at mode ``p`` on the mixed state."""
    return 1.0 / (4.0 * _overlap(p, n_s))


def mixed_state_fraction(coupling: float, p: int, config: EnsembleConfig) -> float:
    """Fraction realised by a pulse of given coupling on the completely mixed state."""
    c = standing_wave_weights(p, config.n_s)
    g0 = gamma0(config)
    gamma22 = LIGHT_VARIANCE_IN + coupling**2 * g0 * float(c @ c) / (config.n_s * config.j)
    return g0 * coupling**2 / (4.0 * config.j * gamma22)


def coupling_closed_form(fraction: float, p: int, config: EnsembleConfig) -> float:
    """``C = sqrt(j/Gamma0 * 4 G22_in f / (1 - 4 q f))`` with ``q = c.c / n_s``."""
    q = _overlap(p, config.n_s)
    if fraction < 0 or fraction * 4.0 * q >= 1.0:
        raise ValueError(f"fraction {fraction} outside [0, {1 / (4 * q)}) for p={p}")
    x = 4.0 * LIGHT_VARIANCE_IN * fraction / (1.0 - 4.0 * q * fraction)
    return math.sqrt(config.j * x / gamma0(config))


def solve_coupling(fraction: float, p: int, config: EnsembleConfig) -> float:
    """Numerically invert :func:`mixed_state_fraction` for the coupling."""
    pole = fraction_pole(p, config.n_s)
    if fraction < 0 or fraction >= pole:
        raise ValueError(f"fraction {fraction} outside [0, {pole}) for p={p}")
    if fraction == 0.0:
        return 0.0
    hi = 1.0
    while mixed_state_fraction(hi, p, config) < fraction:
        hi *= 2.0
    return brentq(lambda c: mixed_state_fraction(c, p, config) - fraction, 0.0, hi,
                  xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def fractions_to_couplings(raw: np.ndarray, config: EnsembleConfig, c_max: float = 0.95) -> DesignResult:
    """Scale ``raw`` fractions so the strongest coupling equals ``c_max``."""
    raw = np.asarray(raw, dtype=float)
    n = config.n_s
    if raw.shape != (n // 2 + 1,):
        raise ValueError(f"expected {n // 2 + 1} fractions, got {raw.shape}")
    if np.any(raw < 0) or not np.all(np.isfinite(raw)):
        raise ValueError("raw fractions must be finite and non-negative")
    if not (math.isfinite(c_max) and c_max > 0):
        raise ValueError(f"c_max must be positive and finite, got {c_max}")
    active = np.flatnonzero(raw > 0)
    if active.size == 0:
        raise InfeasibleTargetError("degenerate target: every squeezing fraction is zero")

    poles = np.array([fraction_pole(p, n) for p in range(n // 2 + 1)])
    s_pole = float(np.min(poles[active] / raw[active]))

    def max_coupling(s):
        return max(coupling_closed_form(min(s * raw[p], poles[p] * (1 - 1e-15)), p, config) for p in active)

    # max_coupling is continuous, increasing and diverges at the pole, so a root exists.
    s_hi = s_pole * (1 - 1e-14)
    if max_coupling(s_hi) <= c_max:
        raise InfeasibleTargetError(
            f"c_max={c_max} unreachable below the fraction pole; "
            f"max achievable {max_coupling(s_hi):.6g}"
        )
    scale = brentq(lambda s: max_coupling(s) - c_max, 0.0, s_hi, xtol=1e-300, rtol=1e-15, maxiter=1000)

    fractions = scale * raw
    couplings = np.zeros_like(raw)
    for p in active:
        couplings[p] = solve_coupling(fractions[p], p, config)
    return DesignResult(fractions=fractions, couplings=couplings, raw_fractions=raw,
                        clipped_mass=0.0, scale=scale)


def design_sequence(spec: TargetSpec, config: EnsembleConfig, complete: bool = True) -> DesignResult:
    """Target shape to couplings: sample, transform, scale to ``spec.c_max``."""
    samples = sample_target(spec, config.n_s)
    raw, clipped = target_to_fractions(samples, config, complete)
    if clipped >= CLIPPED_MASS_WARN:
        log.warning("%.1f%% of the transform mass was negative and clipped", 100 * clipped)
    result = fractions_to_couplings(raw, config, spec.c_max)
    result.clipped_mass = clipped
    result.samples = samples
    return result
