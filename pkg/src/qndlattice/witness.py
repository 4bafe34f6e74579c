"""Multimode spatial entanglement witness ``W = S / n_a - 1``.

``S = sum_a sum_ij <J_{a,i} J_{a,j}> f*(r_i) f(r_j)`` for a normalised bin
function ``f`` that is ``1`` on one set of bins and ``exp(i phi)`` on another.
``W < 0`` certifies entanglement.  Spin means vanish in this model, so the
second moments are the covariances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import CovarianceState, EnsembleConfig

DEFAULT_PHI_POINTS = 64


@dataclass(frozen=True)
class WitnessQuery:
    s_bins: tuple[int, ...]
    w_bins: tuple[int, ...]
    phi: float = 0.0

    def validate(self, n_s: int) -> None:
        s, w = set(self.s_bins), set(self.w_bins)
        if not s or not w:
            raise ValueError("both bin sets must be non-empty")
        if len(s) != len(self.s_bins) or len(w) != len(self.w_bins):
            raise ValueError("bin sets contain duplicates")
        if s & w:
            raise ValueError(f"bin sets overlap at {sorted(s & w)[:5]}")
        bad = [i for i in s | w if not 0 <= i < n_s]
        if bad:
            raise ValueError(f"bins outside [0, {n_s}): {sorted(bad)[:5]}")


def bin_function(query: WitnessQuery, n_s: int) -> np.ndarray:
    """``f`` normalised to ``sum |f|^2 = 1``."""
    query.validate(n_s)
    f = np.zeros(n_s, dtype=complex)
    f[list(query.s_bins)] = 1.0
    f[list(query.w_bins)] = np.exp(1j * query.phi)
    return f / np.sqrt(len(query.s_bins) + len(query.w_bins))


def witness_value(state: CovarianceState, config: EnsembleConfig, query: WitnessQuery) -> float:
    f = bin_function(query, config.n_s)
    total = state.g.sum(axis=0)
    s = f.conj() @ total @ f
    if abs(s.imag) > 1e-12 * max(1.0, abs(s.real)):
        raise ArithmeticError(f"witness quadratic form not real: {s}")
    return float(s.real) / config.n_a - 1.0


@dataclass
class WitnessScan:
    delta_r: np.ndarray
    phi: np.ndarray
    values: np.ndarray  # shape (len(delta_r), len(phi))

    @property
    def min_over_phi(self) -> np.ndarray:
        return self.values.min(axis=1)

    @property
    def argmin_phi(self) -> np.ndarray:
        return self.phi[self.values.argmin(axis=1)]

    def at_phi_zero(self) -> np.ndarray:
        idx = int(np.argmin(np.abs(np.angle(np.exp(1j * self.phi)))))
        return self.values[:, idx]


def _geometry(anchor, start, m, n, dr):
    """Half-open ranges ``(s0, s1), (w0, w1)`` of the single-side and chain bins."""
    if anchor == "chain":
        w0 = start
        s0 = start + n - 1 + dr
    else:
        s0 = start
        w0 = start + m - 1 + dr
    return (s0, s0 + m), (w0, w0 + n)


def witness_scan(
    state: CovarianceState,
    config: EnsembleConfig,
    m: int = 1,
    n: int = 106,
    delta_r=None,
    phi=None,
    start: int = 0,
    anchor: str = "chain",
) -> WitnessScan:
    """Scan ``W(dr, phi)`` between ``m`` single bins and a chain of ``n`` bins.

    ``dr`` is the gap between the nearest bins of the two sets.  With
    ``anchor="chain"`` the chain occupies ``start..start+n-1`` and the single
    bins sit ``dr`` beyond its end; with ``anchor="single"`` the single bins
    start at ``start`` and the chain begins ``dr`` after them.  The standing
    waves make the state inhomogeneous, so a sliding chain mixes the chain's
    own position dependence into ``W(dr)``.

    The quadratic form is assembled from block sums, which makes the phase
    scan free: ``f^H G f = (S_ss + S_ww + 2 cos(phi) S_sw) / (m + n)``.
    """
    if anchor not in ("chain", "single"):
        raise ValueError(f"anchor must be 'chain' or 'single', got {anchor!r}")
    if m < 1 or n < 1 or start < 0:
        raise ValueError("need m >= 1, n >= 1 and start >= 0")
    n_s = config.n_s
    if delta_r is None:
        delta_r = np.arange(1, n_s - start - m - n + 2)
    delta_r = np.asarray(delta_r, dtype=int)
    if phi is None:
        phi = np.linspace(0.0, 2 * np.pi, DEFAULT_PHI_POINTS, endpoint=False)
    phi = np.asarray(phi, dtype=float)
    if delta_r.size == 0 or delta_r.min() < 1:
        raise ValueError("separations must be >= 1")
    (s0, s1), (w0, w1) = _geometry(anchor, start, m, n, int(delta_r.max()))
    if max(s1, w1) > n_s:
        raise ValueError(
            f"geometry overflow: {m} + {n} bins at dr={delta_r.max()} from site {start} "
            f"exceed {n_s} sites"
        )

    total = state.g.sum(axis=0)

    def block(a, b):
        return float(total[a[0]:a[1], b[0]:b[1]].sum())

    values = np.empty((delta_r.size, phi.size))
    for row, dr in enumerate(delta_r):
        single, chain = _geometry(anchor, start, m, n, int(dr))
        quad = (block(single, single) + block(chain, chain)
                + 2.0 * np.cos(phi) * block(single, chain)) / (m + n)
        values[row] = quad / config.n_a - 1.0
    return WitnessScan(delta_r=delta_r, phi=phi, values=values)
