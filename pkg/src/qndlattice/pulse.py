"""One standing-wave QND pulse: interaction, homodyne measurement, decoherence.

The probe couples to the weighted collective spin ``sum_i c_i J_{a,i}`` with
``c_i = (1 + cos(2 k_p r_i)) / 2``.  In real space the measurement is a
rank-one Schur-complement downdate of the measured component's covariance,
exactly like a scalar Kalman update::

    v        = G c
    G22_out  = G22_in + g^2 c.v
    G       <- G - (g^2 / G22_out) v v^T

with ``g^2 = C_p^2 / (n_s j)`` and shot-noise normalised light, ``G22_in = 1/2``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .lattice import CovarianceState, EnsembleConfig, axis_index

log = logging.getLogger(__name__)

LIGHT_VARIANCE_IN = 0.5


@dataclass(frozen=True)
class Pulse:
    """A single probe pulse.

    ``p`` indexes the probe wavevector ``k_p = pi p / n_s``; the squeezed
    collective mode sits at ``2 k_p = 2 pi p / n_s``, i.e. grid mode ``p``.
    """

    p: int
    component: str
    coupling: float
    eta: float = 0.0

    def __post_init__(self):
        axis_index(self.component)
        if not math.isfinite(self.coupling) or self.coupling < 0:
            raise ValueError(f"coupling must be finite and >= 0, got {self.coupling}")
        if not (0.0 <= self.eta <= 0.5):
            raise ValueError(f"eta must lie in [0, 1/2], got {self.eta}")


@dataclass(frozen=True)
class PulseDiagnostics:
    p: int
    component: str
    coupling: float
    eta: float
    gamma22_out: float
    achieved_fraction: float
    variance_before: float
    variance_after: float

    def to_dict(self) -> dict:
        return asdict(self)


def standing_wave_weights(p: int, n_s: int) -> np.ndarray:
    """Intensity profile ``(1 + cos(2 pi p i / n_s)) / 2`` on sites ``i = 0..n_s-1``."""
    if int(p) != p or not (0 <= p <= n_s // 2):
        raise ValueError(f"mode index p must be an integer in [0, {n_s // 2}], got {p}")
    i = np.arange(n_s)
    return 0.5 * (1.0 + np.cos(2 * np.pi * p * i / n_s))


def _mode_variance(g: np.ndarray, p: int) -> float:
    # Gamma(k, -k) at k = 2 pi p / n_s, without transforming the whole matrix.
    n = g.shape[0]
    phase = 2 * np.pi * p * np.arange(n) / n
    cos, sin = np.cos(phase), np.sin(phase)
    return float(cos @ g @ cos + sin @ g @ sin) / n


def apply_decoherence(state: CovarianceState, config: EnsembleConfig, eta: float) -> None:
    """Spontaneous-emission channel: ``g <- (1 - 2 eta) g + 2 eta Gamma0 I`` on all axes."""
    if not (0.0 <= eta <= 0.5):
        raise ValueError(f"eta must lie in [0, 1/2], got {eta}")
    if eta == 0.0:
        return
    g = state.g
    g *= 1.0 - 2.0 * eta
    idx = np.arange(config.n_s)
    g[:, idx, idx] += 2.0 * eta * state.gamma0


def zero_means(state: CovarianceState) -> None:
    """Feedback that zeroes the collective spin means.

    Means are identically zero in this covariance-only model, so the
    covariances are untouched; only the event is counted.
    """
    state.feedback_events += 1


def apply_pulse(state: CovarianceState, config: EnsembleConfig, pulse: Pulse) -> PulseDiagnostics:
    """Apply interaction + measurement of ``S_2`` + decoherence to ``state`` in place."""
    n = config.n_s
    if state.n_s != n:
        raise ValueError(f"state has {state.n_s} sites, config has {n}")
    if not math.isfinite(pulse.coupling):
        raise ValueError("non-finite coupling")
    a = axis_index(pulse.component)
    c = standing_wave_weights(pulse.p, n)
    g = state.g[a]
    g0 = state.gamma0

    before = _mode_variance(g, pulse.p)
    g2 = pulse.coupling**2 / (n * config.j)
    v = g @ c
    gamma22_out = LIGHT_VARIANCE_IN + g2 * float(c @ v)
    if g2 > 0.0:
        g -= (g2 / gamma22_out) * np.outer(v, v)
        state.g[a] = 0.5 * (g + g.T)
    after = _mode_variance(state.g[a], pulse.p)
    fraction = g0 * pulse.coupling**2 / (4.0 * config.j * gamma22_out)

    apply_decoherence(state, config, pulse.eta)
    return PulseDiagnostics(
        p=pulse.p,
        component=pulse.component,
        coupling=pulse.coupling,
        eta=pulse.eta,
        gamma22_out=gamma22_out,
        achieved_fraction=fraction,
        variance_before=before,
        variance_after=after,
    )
