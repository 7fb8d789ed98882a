"""Exact single-excitation scattering by two emitters on a 1D waveguide.

Unit frame: hbar = 1, group velocity v_g = 1, and the guided decay rate
GAMMA_PL = 1 sets the rate unit, which fixes the emitter-waveguide coupling
g = sqrt(GAMMA_PL * v_g) / 2 = 1/2. All detunings and rates are therefore
dimensionless (units of the guided decay rate); kd and k0d are phases in
radians.

The scatterer is a pair of two-level emitters separated by distance d. An
incident right-moving excitation of detuning ``delta`` produces transmitted
(t) and reflected (r) amplitudes, inter-emitter right/left movers (a, b) and
emitter excitation amplitudes (xi1, xi2). The five coefficient relations
close into a 2x2 complex linear system in (xi1, xi2), solved exactly here.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

from .errors import SingularSystem

__all__ = [
    "GAMMA_PL",
    "V_G",
    "G_COUPLING",
    "ModelParams",
    "ScatteringSolution",
    "superradiant_rate",
    "solve_two_dot",
    "solve_single_dot",
    "probabilities",
    "relation_residual",
]

GAMMA_PL = 1.0
V_G = 1.0
G_COUPLING = 0.5  # g = sqrt(GAMMA_PL * V_G) / 2

_DET_FLOOR = 1e-14
_SINC_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Physical dials of one scattering configuration.

    kd:    phase k*d accumulated by the incident excitation between emitters
    delta: detuning of the incident excitation from the emitter resonance
    gamma0:   free-space radiative rate of each emitter
    gamma_nr: non-radiative (Ohmic) loss rate of each emitter
    k0d:   phase k0*d at the emitter resonance (drives the collective
           radiative coupling); defaults to kd when omitted
    include_superradiance: whether the collective free-space term enters
    """

    kd: float
    delta: float = 0.0
    gamma0: float = 0.0
    gamma_nr: float = 0.0
    k0d: float | None = None
    include_superradiance: bool = False

    def __post_init__(self) -> None:
        if self.gamma0 < 0:
            raise ValueError(f"gamma0 must be >= 0, got {self.gamma0}")
        if self.gamma_nr < 0:
            raise ValueError(f"gamma_nr must be >= 0, got {self.gamma_nr}")
        if self.include_superradiance and self.resonant_phase <= 0:
            raise ValueError(
                "include_superradiance requires k0d > 0 "
                f"(got k0d={self.resonant_phase})"
            )

    @property
    def gamma_prime(self) -> float:
        """Total parasitic dissipation per emitter."""
        return self.gamma0 + self.gamma_nr

    @property
    def resonant_phase(self) -> float:
        """k0d, defaulting to kd."""
        return self.kd if self.k0d is None else self.k0d

    def at_delta(self, delta: float) -> "ModelParams":
        """Copy of these parameters at a different detuning."""
        return replace(self, delta=delta)


@dataclass(frozen=True)
class ScatteringSolution:
    """All amplitudes of one scattering solution plus derived probabilities.

    t, r:       transmission / reflection amplitudes
    a, b:       right-/left-moving amplitudes between the emitters
    xi1, xi2:   excitation amplitudes of emitter 1 (at x=0) and 2 (at x=d)
    T, R, Loss: |t|^2, |r|^2, 1 - T - R
    residual:   worst relative residual of the coefficient relations
    """

    t: complex
    r: complex
    a: complex
    b: complex
    xi1: complex
    xi2: complex
    T: float = field(init=False)
    R: float = field(init=False)
    Loss: float = field(init=False)
    residual: float = 0.0

    def __post_init__(self) -> None:
        T = abs(self.t) ** 2
        R = abs(self.r) ** 2
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "Loss", 1.0 - T - R)


def superradiant_rate(k0d: float, gamma0: float) -> float:
    """Collective radiative rate Gamma_SR = gamma0 * sin(k0d) / (k0d).

    This is the separation-dependent part of the cooperative decay: the
    symmetric/antisymmetric pair states decay at gamma0 +- Gamma_SR, and it
    enters effective Hamiltonians as i*Gamma_SR/2, exactly parallel to the
    guided i*GAMMA_PL/2. The removable singularity at k0d -> 0 is evaluated
    by series below 1e-8, giving the fully collective limit gamma0.
    """
    if gamma0 < 0:
        raise ValueError(f"gamma0 must be >= 0, got {gamma0}")
    if abs(k0d) < _SINC_SERIES_CUTOFF:
        sinc = 1.0 - k0d * k0d / 6.0
    else:
        sinc = math.sin(k0d) / k0d
    return gamma0 * sinc


def solve_two_dot(params: ModelParams) -> ScatteringSolution:
    """Exact solution of the two-emitter scattering relations.

    Substituting the a, b, t, r relations into the two excitation-amplitude
    equations closes them into the 2x2 system

        w*xi1 + Delta*xi2 = 2*g*e
        Delta*xi1 + w*xi2 = 2*g

    with e = exp(i*kd), Delta = delta + i*(gamma_prime + GAMMA_PL)/2, and
    w = i*(GAMMA_PL*e + Gamma_SR)/2. Back-substitution fills every amplitude.

    Raises SingularSystem when |det| = |(w-Delta)(w+Delta)| < 1e-14.
    """
    g = G_COUPLING
    gp = params.gamma_prime
    e = cmath.exp(1j * params.kd)
    s_sr = (
        0.5j * superradiant_rate(params.resonant_phase, params.gamma0)
        if params.include_superradiance
        else 0.0j
    )
    big_delta = params.delta + 0.5j * (gp + GAMMA_PL)
    w = 0.5j * GAMMA_PL * e + s_sr
    # factored determinant avoids cancellation near the singular set
    det = (w - big_delta) * (w + big_delta)
    if abs(det) < _DET_FLOOR:
        raise SingularSystem(
            f"2x2 amplitude system is singular (|det|={abs(det):.3e}) at "
            f"kd={params.kd}, delta={params.delta}, gamma_prime={gp}"
        )
    xi1 = 2 * g * (e * w - big_delta) / det
    xi2 = 2 * g * (w - e * big_delta) / det

    g_over_iv = g / (1j * V_G)
    a = 1.0 + g_over_iv * xi1
    b = g_over_iv * xi2 * e
    t = 1.0 + g_over_iv * (xi1 + xi2 / e)
    r = g_over_iv * (xi1 + xi2 * e)

    residual = relation_residual(params, t, r, a, b, xi1, xi2)
    return ScatteringSolution(t=t, r=r, a=a, b=b, xi1=xi1, xi2=xi2,
                              residual=residual)


def relation_residual(
    params: ModelParams,
    t: complex,
    r: complex,
    a: complex,
    b: complex,
    xi1: complex,
    xi2: complex,
) -> float:
    """Worst relative residual of the coefficient relations.

    Each relation is evaluated as written; its residual |lhs - rhs| is
    normalized backward-error style by the magnitude of the quantities the
    relation is built from, max(1, |lhs|, |rhs|, |xi1|, |xi2|), so the
    figure stays meaningful next to near-singular points where the emitter
    amplitudes are large and the relation terms cancel. The maximum over
    the relations is returned.
    """
    g = G_COUPLING
    gp = params.gamma_prime
    e = cmath.exp(1j * params.kd)
    s_sr = (
        0.5j * superradiant_rate(params.resonant_phase, params.gamma0)
        if params.include_superradiance
        else 0.0j
    )
    d_loss = params.delta + 0.5j * gp
    g_over_iv = g / (1j * V_G)

    pairs = (
        # emitter-2 equation: field drive at x=d minus collective term
        (g * (2 * a * e + 2 * b / e) - s_sr * xi1, d_loss * xi2),
        # emitter-1 equation: field drive at x=0 minus collective term
        (g * (1 + a + r + b) - s_sr * xi2, d_loss * xi1),
        (a, 1.0 + g_over_iv * xi1),
        (b, g_over_iv * xi2 * e),
        (t, 1.0 + g_over_iv * (xi1 + xi2 / e)),
        (r, g_over_iv * (xi1 + xi2 * e)),
    )
    amp_scale = max(1.0, abs(xi1), abs(xi2))
    worst = 0.0
    for lhs, rhs in pairs:
        scale = max(amp_scale, abs(lhs), abs(rhs))
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def solve_single_dot(gamma_prime: float, delta: float) -> ScatteringSolution:
    """Closed-form single-emitter amplitudes (one emitter at the origin).

    t = (delta + i*gamma_prime/2) / (delta + i*(gamma_prime + GAMMA_PL)/2),
    r = t - 1. On resonance with gamma_prime = 0 the emitter is a perfect
    mirror; far detuned it is transparent.
    """
    if gamma_prime < 0:
        raise ValueError(f"gamma_prime must be >= 0, got {gamma_prime}")
    denom = delta + 0.5j * (gamma_prime + GAMMA_PL)
    xi = 2 * G_COUPLING / denom
    g_over_iv = G_COUPLING / (1j * V_G)
    r = g_over_iv * xi
    t = 1.0 + r
    # Right of the emitter only the transmitted wave exists; no left mover.
    eq_residual = abs((denom * xi) - 2 * G_COUPLING) / max(1.0, abs(denom * xi))
    return ScatteringSolution(t=t, r=r, a=t, b=0.0j, xi1=xi, xi2=0.0j,
                              residual=eq_residual)


def probabilities(sol: ScatteringSolution) -> tuple[float, float, float]:
    """(T, R, Loss) of a solution."""
    return sol.T, sol.R, sol.Loss
