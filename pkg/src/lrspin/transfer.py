"""Propagator, fidelity and transfer times in the spectral representation.

Everything here works from :class:`~lrspin.spectral.SpectralData`; the
time evolution operator is never formed explicitly, so evaluation stays
accurate at the very long times (~1e7) that weakly coupled chains need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, FlatChannelError, ValidationError
from .spectral import ProjectionSet, SpectralData, gap_delta12

#: |f| may exceed 1 by this much from rounding before it is an error.
CLAMP_TOL = 1e-12
DEGENERACY_TOL = 1e-13
#: Peak search defaults (see find_transfer_event).
PEAK_THRESHOLD = 0.98
LOBE_FLOOR = 0.5
DEFAULT_COARSE_STEPS = 20000
PEAK_RTOL = 1e-6

_CHUNK = 4096
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TransferReport:
    t_ideal: float
    t_estimate: float
    t_measured: float
    f_max: float
    fidelity_max: float
    window: tuple = (0.0, 0.0)

    @property
    def ratio_ideal_over_measured(self) -> float:
        return self.t_ideal / self.t_measured


def _times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t", "times must be non-negative")
    return t


def _phase_sum(E: np.ndarray, weights: np.ndarray, t: np.ndarray) -> np.ndarray:
    """sum_j weights[..., j] * exp(-i E_j t) for every t, evaluated in chunks."""
    flat = t.ravel()
    out = np.empty(flat.shape + weights.shape[:-1], dtype=complex)
    for k in range(0, flat.size, _CHUNK):
        tt = flat[k : k + _CHUNK]
        out[k : k + _CHUNK] = np.exp(-1j * np.multiply.outer(tt, E)) @ weights.T
    return out.reshape(t.shape + weights.shape[:-1])


def propagator_amplitude(sd: SpectralData, s: int, r: int, t):
    """``<r|exp(-iHt)|s>`` for scalar or array ``t``."""
    t = _times(t)
    c = sd.amplitudes(r) * sd.amplitudes(s)
    E = np.asarray(sd.eigenvalues)
    e0 = E[0]
    # shift by the lowest level to keep phases small; restore the global phase after
    amp = _phase_sum(E - e0, c, t) * np.exp(-1j * e0 * t)
    return complex(amp) if amp.ndim == 0 else amp


def evolve_excitation(sd: SpectralData, s: int, t) -> np.ndarray:
    """Amplitudes on every basis site at time ``t`` after starting on ``s``.

    Shape is ``t.shape + (dim,)``, columns ordered like ``sd.basis_sites``.
    """
    t = _times(t)
    V = np.asarray(sd.eigenvectors)
    weights = V * sd.amplitudes(s)[None, :]  # row i: <i|l_j><l_j|s>
    E = np.asarray(sd.eigenvalues)
    return _phase_sum(E - E[0], weights, t) * np.exp(-1j * E[0] * t)[..., None]


def transfer_probability(sd: SpectralData, s: int, r: int, t) -> np.ndarray:
    """|f(t)|^2, computed with eigenvalues shifted to start at 0."""
    t = _times(t)
    c = sd.amplitudes(r) * sd.amplitudes(s)
    E = np.asarray(sd.eigenvalues)
    return np.abs(_phase_sum(E - E[0], c, t)) ** 2


def fidelity(f_abs):
    """Bloch-sphere averaged fidelity ``|f|^2/6 + |f|/3 + 1/2``."""
    f = np.asarray(f_abs, dtype=float)
    if np.any(~np.isfinite(f)) or np.any(f < 0) or np.any(f > 1 + CLAMP_TOL):
        bad = f[(~np.isfinite(f)) | (f < 0) | (f > 1 + CLAMP_TOL)].ravel()[0]
        raise ValidationError("f_abs", f"|f| = {bad!r} outside [0, 1]")
    f = np.minimum(f, 1.0)
    F = f * f / 6.0 + f / 3.0 + 0.5
    return float(F) if F.ndim == 0 else F


def decompose_fm_ft(ps: ProjectionSet, evals, t):
    """Split |f(t)|^2 into its mean part f_m and oscillating part f_t.

    ``f_t = 2 sum_{k<l} |s_k||s_l||r_k||r_l| cos(D_kl t + xi_kl)`` with
    ``D_kl = E_k - E_l`` and ``xi_kl = phi_k - phi_l - psi_k + psi_l``.
    Returns ``(f_m, f_t)``; ``f_t`` has the shape of ``t``.
    """
    t = np.asarray(t, dtype=float)
    E = np.asarray(evals, dtype=float)
    E = E - E[0]
    w = ps.sigma_abs * ps.rho_abs
    f_m = float(np.sum(w**2))
    k, l = np.triu_indices(len(E), 1)
    amp = 2.0 * w[k] * w[l]
    xi = ps.sigma_phase[k] - ps.sigma_phase[l] - ps.rho_phase[k] + ps.rho_phase[l]
    rot = np.exp(1j * xi)
    flat = t.ravel()
    f_t = np.empty(flat.shape)
    for c in range(0, flat.size, 256):
        # cos(D_kl t + xi) = Re[conj(z_k) z_l e^{i xi}] with z_j = exp(-i E_j t); sharing the
        # rounded phases with the propagator keeps f_m + f_t = |f|^2 to rounding at large t
        z = np.exp(-1j * np.multiply.outer(flat[c : c + 256], E))
        f_t[c : c + 256] = (np.conj(z[:, k]) * z[:, l] * rot).real @ amp
    f_t = f_t.reshape(t.shape)
    return f_m, (float(f_t) if f_t.ndim == 0 else f_t)


def ideal_transfer_time(distance_units: int, nu: float) -> float:
    """``(pi/2) d^nu``: perfect transfer time of an isolated sender-receiver pair."""
    if distance_units < 1:
        raise ValidationError("distance_units", f"must be >= 1, got {distance_units}")
    return 0.5 * math.pi * float(distance_units) ** nu


def estimate_transfer_time(sd: SpectralData) -> float:
    """``pi / Delta_12`` from the two lowest levels."""
    gap = gap_delta12(sd)
    if gap <= DEGENERACY_TOL:
        raise DegeneracyError(f"two lowest eigenvalues degenerate (Delta12 = {gap:.3e})")
    return math.pi / gap


def golden_section_max(func, a: float, b: float, rtol: float = PEAK_RTOL, max_iter: int = 200):
    """Maximise a scalar function on ``[a, b]``; returns ``(x, func(x))``."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if (b - a) <= rtol * max(abs(a), abs(b), 1e-300):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = func(d)
    x = 0.5 * (a + b)
    return x, func(x)


def first_lobe_peak(f: np.ndarray, threshold: float = PEAK_THRESHOLD, floor: float = LOBE_FLOOR) -> int:
    """Grid index of the first near-maximal peak of a sampled |f|^2.

    The lobe starts at the first sample reaching ``threshold * max(f)`` and
    runs until the trace drops below ``floor * max(f)``; the highest sample
    inside it is returned.  The floor keeps fast small ripples riding on a
    broad peak from ending the lobe early.
    """
    g = f.max()
    i0 = int(np.argmax(f >= threshold * g))
    below = np.flatnonzero(f[i0:] < floor * g)
    i1 = i0 + int(below[0]) if below.size else f.size
    return i0 + int(np.argmax(f[i0:i1]))


def find_transfer_event(
    sd: SpectralData,
    s: int,
    r: int,
    window,
    *,
    nu: float,
    coarse_steps: int = DEFAULT_COARSE_STEPS,
    threshold: float = PEAK_THRESHOLD,
    floor: float = LOBE_FLOOR,
) -> TransferReport:
    """Locate the transfer peak of |f(t)|^2 inside ``window = (0, T)``.

    Coarse uniform scan with ``coarse_steps`` intervals, :func:`first_lobe_peak`
    on the samples, then golden-section refinement between the neighbouring
    grid points.
    """
    t0, T = float(window[0]), float(window[1])
    if not (T > t0 >= 0):
        raise ValidationError("window", f"need 0 <= start < end, got {window!r}")
    if coarse_steps < 1000:
        raise ValidationError("coarse_steps", f"need >= 1000, got {coarse_steps}")
    grid = np.linspace(t0, T, coarse_steps + 1)
    f = transfer_probability(sd, s, r, grid)
    if f.max() < 1e-6:
        raise FlatChannelError(f"max |f|^2 = {f.max():.3e} over window; no transfer peak")

    i = first_lobe_peak(f, threshold, floor)
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    x, fx = golden_section_max(lambda x: float(transfer_probability(sd, s, r, x)), lo, hi)
    if f[i] > fx:
        x, fx = grid[i], float(f[i])
    f_max = min(fx, 1.0)
    return TransferReport(
        t_ideal=ideal_transfer_time(abs(r - s), nu),
        t_estimate=estimate_transfer_time(sd),
        t_measured=float(x),
        f_max=f_max,
        fidelity_max=fidelity(math.sqrt(f_max)),
        window=(t0, T),
    )
