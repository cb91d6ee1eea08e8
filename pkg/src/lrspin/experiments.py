"""Figure-level runs: fidelity traces, N sweeps, eigenvector and on-site dumps."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .chain import ChainSpec, build_single_excitation_hamiltonian, onsite_energies
from .errors import LRSpinError, ValidationError
from .spectral import eigendecompose, gap_delta12, projections
from .transfer import (
    DEFAULT_COARSE_STEPS,
    fidelity,
    find_transfer_event,
    ideal_transfer_time,
    transfer_probability,
)

log = logging.getLogger(__name__)

COMPLETE = "complete"
DOUBLE_HOLE = "dh"
CUSTOM = "custom"
VARIANTS = (COMPLETE, DOUBLE_HOLE, CUSTOM)
DEFAULT_WINDOW_FACTOR = 3.5


def resolve_holes(tokens: Sequence[int], n_sites: int) -> frozenset:
    """Hole sites for a chain of ``n_sites``; negative tokens count from the end (-2 -> N-1)."""
    out = set()
    for k in tokens:
        k = int(k)
        if k == 0:
            raise ValidationError("holes", "site 0 does not exist (sites are 1-based)")
        out.add(k if k > 0 else n_sites + 1 + k)
    return frozenset(out)


def make_spec(n_sites: int, nu: float, variant: str = COMPLETE, holes: Sequence[int] = ()) -> ChainSpec:
    if variant == COMPLETE:
        if holes:
            raise ValidationError("holes", "hole list only allowed with the custom variant")
        return ChainSpec.complete(n_sites, nu)
    if variant == DOUBLE_HOLE:
        if holes:
            raise ValidationError("holes", "hole list only allowed with the custom variant")
        return ChainSpec.double_hole(n_sites, nu)
    if variant == CUSTOM:
        return ChainSpec(n_sites, nu, holes=resolve_holes(holes, n_sites))
    raise ValidationError("variant", f"unknown variant {variant!r}; expected one of {VARIANTS}")


@dataclass(frozen=True)
class FidelityTrace:
    times: np.ndarray
    f_abs: np.ndarray
    fidelity: np.ndarray
    f_m: float
    spec: ChainSpec


def run_fidelity_trace(spec: ChainSpec, t_max: float, samples: int) -> FidelityTrace:
    """F(t) on a uniform grid of ``samples`` points over ``[0, t_max]``."""
    if samples < 2:
        raise ValidationError("samples", f"need at least 2 samples, got {samples}")
    if not t_max > 0:
        raise ValidationError("t_max", "must be positive")
    sd = eigendecompose(build_single_excitation_hamiltonian(spec))
    times = np.linspace(0.0, t_max, samples)
    f_abs = np.sqrt(transfer_probability(sd, spec.sender, spec.receiver, times))
    F = fidelity(f_abs)  # rejects |f| beyond the rounding allowance
    ps = projections(sd, spec.sender, spec.receiver)
    f_m = float(np.sum((ps.sigma_abs * ps.rho_abs) ** 2))
    return FidelityTrace(times, np.minimum(f_abs, 1.0), F, f_m, spec)


@dataclass(frozen=True)
class SweepRequest:
    n_values: tuple
    nu: float
    variants: tuple = (DOUBLE_HOLE,)
    holes: tuple = ()  # custom variant only, see resolve_holes
    window_factor: float = DEFAULT_WINDOW_FACTOR
    coarse_steps: int = DEFAULT_COARSE_STEPS

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "variants", tuple(self.variants))
        if not self.n_values:
            raise ValidationError("n_values", "empty")
        for v in self.variants:
            if v not in VARIANTS:
                raise ValidationError("variant", f"unknown variant {v!r}")
        if self.holes and CUSTOM not in self.variants:
            raise ValidationError("holes", "hole list only allowed with the custom variant")
        if DOUBLE_HOLE in self.variants and min(self.n_values) < 5:
            raise ValidationError("n_values", "double-hole chains need N >= 5")
        if min(self.n_values) < 2:
            raise ValidationError("n_values", "chains need N >= 2")
        if not self.window_factor > 0:
            raise ValidationError("window_factor", "must be positive")
        if self.coarse_steps < 1000:
            raise ValidationError("coarse_steps", "need >= 1000")


@dataclass(frozen=True)
class SweepRow:
    n: int
    variant: str
    fidelity_max: float = math.nan
    t_measured: float = math.nan
    t_ideal: float = math.nan
    t_estimate: float = math.nan
    ratio: float = math.nan
    delta12: float = math.nan
    f_m: float = math.nan
    gamma1_sq: float = math.nan
    gamma2_sq: float = math.nan
    error: Optional[str] = None  # "<exit code>" for failed rows


@dataclass
class SweepResult:
    request: SweepRequest
    rows: list = field(default_factory=list)

    def row(self, n: int, variant: str) -> SweepRow:
        for r in self.rows:
            if r.n == n and r.variant == variant:
                return r
        raise KeyError((n, variant))

    def column(self, name: str, variant: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows if r.variant == variant])


def analyze_chain(
    spec: ChainSpec,
    window_factor: float = DEFAULT_WINDOW_FACTOR,
    coarse_steps: int = DEFAULT_COARSE_STEPS,
    variant: str = CUSTOM,
    **peak_options,
) -> SweepRow:
    """All sweep quantities for one chain; the search window is ``[0, window_factor * t_ideal]``.

    ``peak_options`` (``threshold``, ``floor``) go to :func:`find_transfer_event`.
    """
    sd = eigendecompose(build_single_excitation_hamiltonian(spec))
    t_id = ideal_transfer_time(spec.distance, spec.nu)
    rep = find_transfer_event(
        sd, spec.sender, spec.receiver, (0.0, window_factor * t_id), nu=spec.nu, coarse_steps=coarse_steps,
        **peak_options,
    )
    ps = projections(sd, spec.sender, spec.receiver)
    return SweepRow(
        n=spec.n_sites,
        variant=variant,
        fidelity_max=rep.fidelity_max,
        t_measured=rep.t_measured,
        t_ideal=rep.t_ideal,
        t_estimate=rep.t_estimate,
        ratio=rep.ratio_ideal_over_measured,
        delta12=gap_delta12(sd),
        f_m=float(np.sum((ps.sigma_abs * ps.rho_abs) ** 2)),
        gamma1_sq=float(ps.gamma_sq[0]),
        gamma2_sq=float(ps.gamma_sq[1]) if sd.dim > 1 else math.nan,
    )


def _sweep_row(args) -> SweepRow:
    n, variant, req = args
    try:
        spec = make_spec(n, req.nu, variant, req.holes)
        return analyze_chain(spec, req.window_factor, req.coarse_steps, variant)
    except LRSpinError as exc:
        log.warning("sweep row N=%d %s failed: %s", n, variant, exc)
        return SweepRow(n=n, variant=variant, error=str(exc.exit_code))


def run_sweep(req: SweepRequest, max_workers: Optional[int] = None) -> SweepResult:
    """One row per (N, variant), sorted; failing rows carry ``error`` and the sweep goes on."""
    jobs = [(n, v, req) for n in req.n_values for v in req.variants]
    if max_workers and max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    rows.sort(key=lambda r: (r.n, r.variant))
    return SweepResult(req, rows)


def dump_eigenvector_components(spec: ChainSpec, j_list: Sequence[int]) -> list:
    """Rows ``{"site": i, j: <lambda_j|i>, ...}`` for every chain site; holes give None.

    ``j`` is 1-based in ascending energy order.
    """
    sd = eigendecompose(build_single_excitation_hamiltonian(spec))
    for j in j_list:
        if not 1 <= j <= sd.dim:
            raise ValidationError("j", f"eigenvector index {j} outside [1, {sd.dim}]")
    rows = []
    for site in range(1, spec.n_sites + 1):
        row = {"site": site}
        for j in j_list:
            row[j] = None if site in spec.holes else float(sd.amplitudes(site)[j - 1])
        rows.append(row)
    return rows


def dump_onsite_energies(spec: ChainSpec, shifted: bool = False) -> dict:
    """Occupied site -> diagonal element ``<i|H|i>`` (minimum moved to 0 when ``shifted``)."""
    return onsite_energies(spec, shifted=shifted)
