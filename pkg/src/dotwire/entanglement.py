"""Post-selected two-emitter entanglement derived from scattering amplitudes.

Conditioned on the photon having been absorbed, the emitter pair is left in
(xi1*|eg> + xi2*|ge>)/norm. Its concurrence and relative phase follow from
the amplitude ratio alone:

    C     = 2*|xi1|*|xi2| / (|xi1|^2 + |xi2|^2)
    theta = arg(xi2 / xi1),  theta in (-pi, pi]

C = 1 exactly on the kd = n*pi verticals (the ratio has unit modulus there)
and stays high along the curve

    delta(kd) = -(1 + gamma_prime) * tan(kd) / 2

which inverts, per branch, to kd(delta) = n*pi + arctan(-2*delta /
(1 + gamma_prime)) with n even ("even" policy, around kd = 2*pi) or odd
("odd" policy, around kd = pi). The lossless curve passes through the
decoupled-dark-state point (kd = n*pi, delta = 0), where theta is assigned
its limit along the curve: pi on the even branch, 0 on the odd one. Any
loss resolves the point and swaps the two values — the phase jump the scan
is designed to expose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyProjection, SingularSystem, TangentPole
from .model import ModelParams, ScatteringSolution, solve_two_dot

__all__ = [
    "ProjectedState",
    "ConcurrenceCell",
    "PhasePoint",
    "project_state",
    "high_c_curve",
    "concurrence_map",
    "phase_scan",
]

_PROJECTION_FLOOR = 1e-30
_POLE_TOL = 1e-6


@dataclass(frozen=True)
class ProjectedState:
    """Normalized post-selected emitter-pair state."""

    amp_eg: complex
    amp_ge: complex
    norm: float  # pre-normalization weight |xi1|^2 + |xi2|^2
    concurrence: float
    theta: float


@dataclass(frozen=True)
class ConcurrenceCell:
    """One cell of a (kd, delta) concurrence map; NaN marks a point where
    the scattering system is singular."""

    kd: float
    delta: float
    concurrence: float
    theta: float


@dataclass(frozen=True)
class PhasePoint:
    """One point of a relative-phase scan along a constant-concurrence
    branch."""

    delta: float
    kd: float
    theta: float
    concurrence: float


def project_state(sol: ScatteringSolution) -> ProjectedState:
    """Project a scattering solution onto the single-excitation emitter pair.

    Raises EmptyProjection when both emitter amplitudes vanish (nothing was
    absorbed, so there is no post-selected state to normalize).
    """
    norm = abs(sol.xi1) ** 2 + abs(sol.xi2) ** 2
    if norm <= _PROJECTION_FLOOR:
        raise EmptyProjection(
            f"emitter amplitudes vanish (weight {norm:.3e}); no "
            f"post-selected state exists"
        )
    amp_eg = sol.xi1 / math.sqrt(norm)
    amp_ge = sol.xi2 / math.sqrt(norm)
    theta = math.atan2((sol.xi2 * sol.xi1.conjugate()).imag,
                       (sol.xi2 * sol.xi1.conjugate()).real)
    if theta == -math.pi:
        theta = math.pi
    return ProjectedState(
        amp_eg=amp_eg,
        amp_ge=amp_ge,
        norm=norm,
        concurrence=2.0 * abs(amp_eg) * abs(amp_ge),
        theta=theta,
    )


def high_c_curve(kd_values, gamma_prime: float) -> list[tuple[float, float]]:
    """The detuning that keeps the post-selected concurrence high at each kd:

        delta(kd) = -(1 + gamma_prime) * tan(kd) / 2

    Raises TangentPole if any kd sits within 1e-6 of an odd multiple of
    pi/2, where the curve runs off to infinite detuning.
    """
    if gamma_prime < 0:
        raise ValueError(f"gamma_prime must be >= 0, got {gamma_prime}")
    out = []
    for kd in kd_values:
        kd = float(kd)
        folded = abs(math.remainder(kd, math.pi))
        if abs(folded - math.pi / 2) < _POLE_TOL:
            raise TangentPole(
                f"kd={kd!r} is within {_POLE_TOL} of an odd multiple of "
                f"pi/2; the constant-concurrence curve diverges there"
            )
        out.append((kd, -(1.0 + gamma_prime) * math.tan(kd) / 2.0))
    return out


def concurrence_map(
    kd_values,
    delta_values,
    params_base: ModelParams,
) -> list[ConcurrenceCell]:
    """Concurrence and relative phase over a (kd, delta) grid, row-major in
    kd. Singular grid points become NaN cells rather than holes."""
    cells = []
    for kd in kd_values:
        kd = float(kd)
        params = ModelParams(
            kd=kd,
            gamma0=params_base.gamma0,
            gamma_nr=params_base.gamma_nr,
            k0d=params_base.k0d,
            include_superradiance=params_base.include_superradiance,
        )
        for delta in delta_values:
            delta = float(delta)
            try:
                state = project_state(solve_two_dot(params.at_delta(delta)))
            except (SingularSystem, EmptyProjection):
                cells.append(ConcurrenceCell(kd, delta, math.nan, math.nan))
            else:
                cells.append(
                    ConcurrenceCell(kd, delta, state.concurrence, state.theta)
                )
    return cells


def _branch_kd(delta: float, gamma_prime: float, kd_policy: str) -> float:
    base = 2.0 * math.pi if kd_policy == "even" else math.pi
    return base + math.atan(-2.0 * delta / (1.0 + gamma_prime))


def phase_scan(
    delta_values,
    gamma_prime: float,
    kd_policy: str = "even",
) -> list[PhasePoint]:
    """Relative phase theta(delta) along one constant-concurrence branch.

    kd_policy selects the branch: "even" follows the curve around kd = 2*pi,
    "odd" around kd = pi. At gamma_prime = 0 the branch passes through the
    decoupled point at delta = 0, where theta is assigned its limit along
    the curve (pi on the even branch, 0 on the odd one) with C = 1.
    """
    if kd_policy not in ("even", "odd"):
        raise ValueError(f"kd_policy must be 'even' or 'odd', got {kd_policy!r}")
    if gamma_prime < 0:
        raise ValueError(f"gamma_prime must be >= 0, got {gamma_prime}")
    points = []
    for delta in delta_values:
        delta = float(delta)
        kd = _branch_kd(delta, gamma_prime, kd_policy)
        if gamma_prime == 0.0 and delta == 0.0:
            limit = math.pi if kd_policy == "even" else 0.0
            points.append(PhasePoint(delta, kd, limit, 1.0))
            continue
        params = ModelParams(kd=kd, delta=delta, gamma_nr=gamma_prime)
        state = project_state(solve_two_dot(params))
        points.append(PhasePoint(delta, kd, state.theta, state.concurrence))
    return points
