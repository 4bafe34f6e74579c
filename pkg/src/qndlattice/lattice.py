"""Ensemble configuration, covariance state and real/k-space views.

The state is kept in real space: one symmetric ``n_s x n_s`` covariance
matrix per spin component, ``G_a(r_i, r_j)`` with sites ``r_i = i``.
Cross-component covariances start at zero and are never populated by the
pulse model, so they are not stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

AXES = ("x", "y", "z")
_AXIS_INDEX = {name: i for i, name in enumerate(AXES)}

PSD_TOL = 1e-9
IMAG_TOL = 1e-10


class InvariantViolation(RuntimeError):
    """A covariance state left its physical domain (asymmetric, not PSD, ...)."""


def axis_index(component: str) -> int:
    try:
        return _AXIS_INDEX[component]
    except KeyError:
        raise ValueError(f"component must be one of {AXES}, got {component!r}") from None


@dataclass(frozen=True)
class EnsembleConfig:
    """Lattice and spin parameters.

    Parameters
    ----------
    n_s : int
        Number of lattice sites (bins); even and at least 8.
    n_a : int
        Atoms per bin.
    j : float
        Spin length, a positive half-integer.
    d : float
        On-resonance optical depth, ``math.inf`` for no decoherence.
    """

    n_s: int = 200
    n_a: int = 10
    j: float = 1.0
    d: float = math.inf

    def __post_init__(self):
        if int(self.n_s) != self.n_s or self.n_s < 8 or self.n_s % 2:
            raise ValueError(f"n_s must be an even integer >= 8, got {self.n_s}")
        if int(self.n_a) != self.n_a or self.n_a < 1:
            raise ValueError(f"n_a must be a positive integer, got {self.n_a}")
        if not (self.j > 0 and float(2 * self.j).is_integer()):
            raise ValueError(f"j must be a positive half-integer, got {self.j}")
        if math.isnan(self.d) or self.d <= 0:
            raise ValueError(f"optical depth d must be positive or inf, got {self.d}")
        object.__setattr__(self, "n_s", int(self.n_s))
        object.__setattr__(self, "n_a", int(self.n_a))
        object.__setattr__(self, "j", float(self.j))
        object.__setattr__(self, "d", float(self.d))

    @property
    def gamma0(self) -> float:
        return gamma0(self)

    @property
    def n_atoms(self) -> int:
        return self.n_s * self.n_a

    def to_dict(self) -> dict:
        return {
            "n_s": self.n_s,
            "n_a": self.n_a,
            "j": self.j,
            "d": "inf" if math.isinf(self.d) else self.d,
        }


def gamma0(config: EnsembleConfig) -> float:
    """Per-bin, per-component variance of the completely mixed state."""
    return config.n_a * config.j * (config.j + 1) / 3


@dataclass
class CovarianceState:
    """Real-space covariances ``g[a, i, j]`` for a in (x, y, z)."""

    g: np.ndarray
    gamma0: float
    feedback_events: int = field(default=0)

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        if self.g.ndim != 3 or self.g.shape[0] != 3 or self.g.shape[1] != self.g.shape[2]:
            raise ValueError(f"expected shape (3, n, n), got {self.g.shape}")

    @property
    def n_s(self) -> int:
        return self.g.shape[1]

    @property
    def g_x(self) -> np.ndarray:
        return self.g[0]

    @property
    def g_y(self) -> np.ndarray:
        return self.g[1]

    @property
    def g_z(self) -> np.ndarray:
        return self.g[2]

    def component(self, component: str) -> np.ndarray:
        return self.g[axis_index(component)]

    def copy(self) -> "CovarianceState":
        return CovarianceState(self.g.copy(), self.gamma0, self.feedback_events)

    def symmetrize(self) -> None:
        self.g = 0.5 * (self.g + self.g.transpose(0, 2, 1))


def new_mixed_state(config: EnsembleConfig) -> CovarianceState:
    """Completely mixed state: ``Gamma0 * I`` for every component."""
    g0 = gamma0(config)
    g = np.broadcast_to(g0 * np.eye(config.n_s), (3, config.n_s, config.n_s)).copy()
    return CovarianceState(g, g0)


def check_invariants(state: CovarianceState, *, bounded_diagonal: bool = True) -> None:
    """Raise :class:`InvariantViolation` unless the state is symmetric and PSD.

    ``bounded_diagonal`` additionally requires ``0 <= G_aa(r, r) <= Gamma0``,
    which holds for every state the protocol can reach from the mixed state.
    """
    g0 = state.gamma0
    for a, name in enumerate(AXES):
        m = state.g[a]
        if not np.all(np.isfinite(m)):
            raise InvariantViolation(f"g_{name} has non-finite entries")
        if not np.array_equal(m, m.T):
            raise InvariantViolation(f"g_{name} is not exactly symmetric")
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -PSD_TOL * g0:
            raise InvariantViolation(f"g_{name} not PSD: min eigenvalue {lo:.3e}")
        if bounded_diagonal:
            diag = np.diag(m)
            if diag.min() < 0 or diag.max() > g0 * (1 + PSD_TOL):
                raise InvariantViolation(
                    f"g_{name} diagonal outside [0, Gamma0]: "
                    f"[{diag.min():.6g}, {diag.max():.6g}]"
                )


def _select(state: CovarianceState, component: str) -> np.ndarray:
    if component == "sum":
        return state.g.sum(axis=0)
    return state.component(component)


def k_spectrum(state: CovarianceState, component: str = "sum") -> np.ndarray:
    """``Gamma(k_m, -k_m)`` for ``m = 0..n_s-1`` with ``k_m = 2 pi m / n_s``.

    ``component`` is one of ``"x"``, ``"y"``, ``"z"`` or ``"sum"``.
    """
    g = _select(state, component)
    n = g.shape[0]
    # values[m] = (1/n) sum_ij exp(-i k r_i) G_ij exp(+i k r_j)
    t = np.fft.fft(np.fft.ifft(g, axis=1), axis=0)
    vals = np.diagonal(t)
    scale = max(state.gamma0, float(np.max(np.abs(vals.real), initial=0.0)))
    if np.max(np.abs(vals.imag), initial=0.0) > IMAG_TOL * scale:
        raise InvariantViolation("k-spectrum has a non-negligible imaginary part")
    return vals.real.copy()


def k_spectrum_direct(state: CovarianceState, component: str = "sum") -> np.ndarray:
    """Direct double-sum evaluation of :func:`k_spectrum`; O(n_s^3)."""
    g = _select(state, component)
    n = g.shape[0]
    r = np.arange(n)
    out = np.empty(n)
    for m in range(n):
        cosm = np.cos(2 * np.pi * m * np.subtract.outer(r, r) / n)
        out[m] = np.sum(cosm * g) / n
    return out


def real_correlation(state: CovarianceState, config: EnsembleConfig) -> np.ndarray:
    """Normalised real-space correlation ``C(dr)`` for ``dr = 0..n_s/2``.

    Averages ``sum_a G_aa(r_i, r_i + dr) / Gamma0`` over start sites
    ``i = 0..n_s/4 - 1``; the window never wraps around the lattice.
    """
    n = config.n_s
    total = state.g.sum(axis=0)
    starts = np.arange(n // 4)
    shifts = np.arange(n // 2 + 1)
    vals = total[starts[:, None], starts[:, None] + shifts[None, :]]
    return vals.mean(axis=0) / state.gamma0
