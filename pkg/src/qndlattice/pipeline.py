"""Run configuration, presets and the design -> protocol -> analysis pipeline."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .analysis import (
    FitResult,
    decades,
    fit_algebraic,
    fit_exponential,
    spectrum_extremum,
    spectrum_match,
)
from .design import DesignResult, TargetSpec, design_sequence, load_target_file
from .lattice import CovarianceState, EnsembleConfig, check_invariants
from .protocol import ORDER_POLICIES, PulsePlan, RunReport, build_plan, run
from .witness import WitnessScan, witness_scan


@dataclass(frozen=True)
class RunConfig:
    n_s: int = 200
    n_a: int = 10
    j: float = 1.0
    d: float = math.inf
    target: str = "exponential"
    xi: float | None = 5.0
    zeta: float | None = None
    period: int | None = None
    target_file: str | None = None
    c_max: float = 0.95
    order_policy: str = "ascending_p"
    witness_m: int = 1
    witness_n: int = 106
    witness_anchor: str = "chain"
    phi_points: int = 64
    fit_law: str | None = None
    fit_min: int | None = None
    fit_max: int | None = None
    offset: str = "fit"
    out: str = "out"

    def __post_init__(self):
        if self.order_policy not in ORDER_POLICIES:
            raise ValueError(f"order_policy must be one of {ORDER_POLICIES}, got {self.order_policy!r}")
        if self.offset not in ("fit", "tail"):
            raise ValueError(f"offset must be 'fit' or 'tail', got {self.offset!r}")
        if self.fit_law not in (None, "exponential", "algebraic", "none"):
            raise ValueError(f"fit_law must be exponential, algebraic or none, got {self.fit_law!r}")
        if self.phi_points < 1:
            raise ValueError("phi_points must be >= 1")
        # validates n_s, n_a, j, d
        self.ensemble()
        if self.witness_m < 1 or self.witness_n < 1 or self.witness_m + self.witness_n > self.n_s - 1:
            raise ValueError(f"witness bins m={self.witness_m}, n={self.witness_n} do not fit {self.n_s} sites")

    def ensemble(self) -> EnsembleConfig:
        return EnsembleConfig(self.n_s, self.n_a, self.j, self.d)

    def target_spec(self) -> TargetSpec:
        samples = None
        if self.target == "tabulated":
            if not self.target_file:
                raise ValueError("tabulated target needs target_file")
            samples = load_target_file(self.target_file)
        return TargetSpec(self.target, xi=self.xi, zeta=self.zeta, period=self.period,
                          samples=samples, c_max=self.c_max)

    @property
    def law(self) -> str | None:
        if self.fit_law == "none":
            return None
        if self.fit_law:
            return self.fit_law
        return self.target if self.target in ("exponential", "algebraic") else None

    @property
    def fit_range(self) -> tuple[int, int]:
        if self.law == "exponential":
            lo, hi = 1, min(int(round(6 * (self.xi or 5.0))), self.n_s // 2)
        else:
            lo, hi = 2, self.n_s // 6
        return (self.fit_min if self.fit_min is not None else lo,
                self.fit_max if self.fit_max is not None else hi)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["d"] = "inf" if math.isinf(self.d) else self.d
        return out

    def hash(self) -> str:
        payload = {k: v for k, v in self.to_dict().items() if k != "out"}
        if self.target_file:
            payload["target_file"] = hashlib.sha256(Path(self.target_file).read_bytes()).hexdigest()
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


PRESETS = {
    "paper-a": RunConfig(target="exponential", xi=5.0),
    "paper-b": RunConfig(target="algebraic", xi=None, zeta=0.7),
    "paper-critical": RunConfig(target="modulated_algebraic", xi=None, zeta=0.7, period=3),
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_value(key: str, text: str):
    if key not in _FIELD_TYPES:
        raise ValueError(f"unknown config key {key!r}")
    text = text.strip()
    kind = _FIELD_TYPES[key]
    if text.lower() in ("", "none", "null") and "None" in kind:
        return None
    try:
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)  # accepts "inf"
    except ValueError:
        raise ValueError(f"config key {key!r}: cannot parse {text!r}") from None
    return text


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Read ``key = value`` lines; ``#`` starts a comment; ``preset = NAME`` seeds defaults."""
    values: dict = {}
    preset = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, text = (s.strip() for s in line.split("=", 1))
        if key == "preset":
            preset = text
            continue
        values[key] = parse_value(key, text)
    cfg = base or RunConfig()
    if preset is not None:
        cfg = get_preset(preset)
    return replace(cfg, **values)


def get_preset(name: str) -> RunConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass
class PipelineResult:
    config: RunConfig
    design: DesignResult
    plan: PulsePlan
    state: CovarianceState
    report: RunReport
    witness: WitnessScan
    fit: FitResult | None = None
    witness_fit: FitResult | None = None
    summary: dict = field(default_factory=dict)


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def run_pipeline(cfg: RunConfig, check: bool = True) -> PipelineResult:
    ens = cfg.ensemble()
    design = design_sequence(cfg.target_spec(), ens)
    plan = build_plan(design, ens, cfg.order_policy)
    state, report = run(plan, ens)
    if check:
        check_invariants(state)

    phi = np.linspace(0.0, 2 * np.pi, cfg.phi_points, endpoint=False)
    scan = witness_scan(state, ens, m=cfg.witness_m, n=cfg.witness_n, phi=phi, anchor=cfg.witness_anchor)

    fit = wfit = None
    law = cfg.law
    if law is not None:
        fitter = fit_exponential if law == "exponential" else fit_algebraic
        fit = fitter(report.correlation, cfg.fit_range, cfg.offset)
        wfit = fitter(-scan.at_phi_zero(), cfg.fit_range, cfg.offset, delta_r=scan.delta_r)

    try:
        match = spectrum_match(report.spectra["sum"], design, ens.n_s)
    except ValueError:
        match = math.nan
    m_ext, k_ext = spectrum_extremum(report.spectra["sum"], ens.n_s)
    summary = {
        "config_hash": cfg.hash(),
        "config": {k: v for k, v in cfg.to_dict().items() if k != "out"},
        "pulses": len(plan),
        "active_modes": int(np.count_nonzero(design.couplings)),
        "max_coupling": float(design.couplings.max()),
        "clipped_mass": design.clipped_mass,
        "total_eta": plan.total_eta,
        "spectrum_match": match,
        "spectrum_extremum": {"m": m_ext, "k": k_ext},
        "correlation_fit": fit.to_dict() if fit else None,
        "correlation_decades": decades(report.correlation, fit) if fit else None,
        "witness_fit": wfit.to_dict() if wfit else None,
        "witness_min_phi0": float(scan.at_phi_zero().min()),
        "witness_argmin_phi_all_zero": bool(np.all(np.abs(np.sin(scan.argmin_phi / 2)) < 1e-12)),
    }
    return PipelineResult(cfg, design, plan, state, report, scan, fit, wfit, _clean(summary))


def _csv(path: Path, cfg_hash: str, cfg: RunConfig, header: list[str], rows) -> None:
    buf = io.StringIO()
    buf.write("# qndlattice output\n")
    buf.write(f"# config_hash: {cfg_hash}\n")
    for key, value in cfg.to_dict().items():
        if key != "out":
            buf.write(f"# {key} = {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    path.write_text(buf.getvalue())


def write_outputs(result: PipelineResult, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    h = result.summary["config_hash"]
    g0 = result.state.gamma0
    corr = result.report.correlation
    offset = result.fit.offset if result.fit else 0.0
    _csv(out / "correlation.csv", h, cfg, ["delta_r", "C", "abs_C_minus_Cinf"],
         ((dr, c, abs(c - offset)) for dr, c in enumerate(corr)))

    n = cfg.n_s
    spectra = result.report.spectra
    profile = result.design.target_profile
    rows = []
    for m in range(n):
        p = m if m <= n // 2 else n - m
        rows.append((m, 2 * np.pi * m / n, spectra["x"][m] / g0, spectra["y"][m] / g0,
                     spectra["z"][m] / g0, spectra["sum"][m] / g0, profile[p]))
    _csv(out / "spectrum.csv", h, cfg, ["m", "k", "x", "y", "z", "sum", "target_profile"], rows)

    scan = result.witness
    _csv(out / "witness.csv", h, cfg, ["delta_r", "phi", "W"],
         ((int(dr), ph, w) for i, dr in enumerate(scan.delta_r) for ph, w in zip(scan.phi, scan.values[i])))
    _csv(out / "witness_min.csv", h, cfg, ["delta_r", "phi_min", "W_min"],
         zip(scan.delta_r.tolist(), scan.argmin_phi, scan.min_over_phi))

    (out / "fits.json").write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    trace = _clean(result.report.to_dict())
    trace["config_hash"] = h
    (out / "trace.json").write_text(json.dumps(trace, indent=2, sort_keys=True) + "\n")
    return out
