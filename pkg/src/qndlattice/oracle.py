"""Brute-force reference for the pulse engine on small lattices.

Keeps the full covariance of ``{J_x(k), J_y(k), J_z(k)} + {s_2, s_3}`` in an
orthonormal real (cosine/sine) mode basis, applies the small-angle
interaction as a congruence transform and conditions on ``s_2`` with the
Moore-Penrose projection ``G - G P (P G P)^+ P G``.  Shares no code path with
:mod:`qndlattice.pulse` beyond the standing-wave weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import AXES, CovarianceState, EnsembleConfig, axis_index
from .pulse import LIGHT_VARIANCE_IN, Pulse, standing_wave_weights

MAX_SITES = 32
PINV_RCOND = 1e-12


def real_mode_basis(n_s: int) -> tuple[np.ndarray, list[str]]:
    """Rows form an orthonormal real Fourier basis on ``n_s`` sites."""
    r = np.arange(n_s)
    rows, labels = [], []
    for m in range(n_s // 2 + 1):
        norm = 1.0 / np.sqrt(n_s) if m in (0, n_s // 2) else np.sqrt(2.0 / n_s)
        rows.append(norm * np.cos(2 * np.pi * m * r / n_s))
        labels.append(f"cos{m}")
    for m in range(1, n_s // 2):
        rows.append(np.sqrt(2.0 / n_s) * np.sin(2 * np.pi * m * r / n_s))
        labels.append(f"sin{m}")
    return np.array(rows), labels


@dataclass
class ExtendedCovariance:
    matrix: np.ndarray
    mode_labels: list[str]
    basis: np.ndarray
    gamma0: float

    @property
    def n_s(self) -> int:
        return self.basis.shape[0]

    @property
    def s2(self) -> int:
        return 3 * self.n_s

    def atomic_block(self, component: str) -> np.ndarray:
        a = axis_index(component)
        sl = slice(a * self.n_s, (a + 1) * self.n_s)
        return self.matrix[sl, sl]

    def real_space(self, component: str) -> np.ndarray:
        u = self.basis
        return u.T @ self.atomic_block(component) @ u


def from_state(state: CovarianceState) -> ExtendedCovariance:
    """Embed a real-space state; light starts at shot noise, uncorrelated."""
    n = state.n_s
    if n > MAX_SITES:
        raise ValueError(f"oracle limited to n_s <= {MAX_SITES}, got {n}")
    u, names = real_mode_basis(n)
    dim = 3 * n + 2
    mat = np.zeros((dim, dim))
    labels = []
    for a, ax in enumerate(AXES):
        sl = slice(a * n, (a + 1) * n)
        mat[sl, sl] = u @ state.g[a] @ u.T
        labels += [f"J{ax}:{s}" for s in names]
    mat[3 * n:, 3 * n:] = LIGHT_VARIANCE_IN * np.eye(2)
    labels += ["s2", "s3"]
    return ExtendedCovariance(mat, labels, u, state.gamma0)


def oracle_apply_pulse(ext: ExtendedCovariance, config: EnsembleConfig, pulse: Pulse) -> ExtendedCovariance:
    n = ext.n_s
    if n > MAX_SITES or n != config.n_s:
        raise ValueError(f"oracle needs n_s <= {MAX_SITES} matching the config")
    dim = ext.matrix.shape[0]
    z = axis_index(pulse.component)

    # s_2 -> s_2 + g sum_i c_i J_{a,i}, written in the mode basis
    coupling = pulse.coupling / np.sqrt(n * config.j)
    m = np.eye(dim)
    m[ext.s2, z * n:(z + 1) * n] = coupling * (ext.basis @ standing_wave_weights(pulse.p, n))
    out = m @ ext.matrix @ m.T

    proj = np.zeros((dim, dim))
    proj[ext.s2, ext.s2] = 1.0
    measured = out - out @ proj @ np.linalg.pinv(proj @ out @ proj, rcond=PINV_RCOND) @ proj @ out

    eta = pulse.eta
    idx = np.arange(3 * n)
    atoms = measured[:3 * n, :3 * n] * (1.0 - 2.0 * eta)
    atoms[idx, idx] += 2.0 * eta * ext.gamma0

    new = np.zeros_like(measured)
    new[:3 * n, :3 * n] = 0.5 * (atoms + atoms.T)
    new[3 * n:, 3 * n:] = LIGHT_VARIANCE_IN * np.eye(2)
    return ExtendedCovariance(new, ext.mode_labels, ext.basis, ext.gamma0)


def compare_states(a: CovarianceState, b: ExtendedCovariance) -> float:
    """Largest elementwise difference between real-space covariances of ``a`` and ``b``."""
    if a.n_s != b.n_s:
        raise ValueError(f"shape mismatch: {a.n_s} vs {b.n_s} sites")
    return max(float(np.max(np.abs(a.g[i] - b.real_space(ax)))) for i, ax in enumerate(AXES))


def cross_component_max(ext: ExtendedCovariance) -> float:
    """Largest |covariance| between different spin components (should stay 0)."""
    n = ext.n_s
    worst = 0.0
    for a in range(3):
        for b in range(3):
            if a != b:
                blk = ext.matrix[a * n:(a + 1) * n, b * n:(b + 1) * n]
                worst = max(worst, float(np.max(np.abs(blk))))
    return worst
