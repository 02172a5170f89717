"""Exact linear propagator and continuous-frequency decay measurements.

The linearization around ``N x2`` damps each mode by
``exp(-N k1^2 / |k|^2 t)``.  On the torus the mean mode decays like
``exp(-N t)`` (the mean of ``u2`` equals the mean of ``theta``); on the strip
the ``p = 0`` modes are untouched.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RefinementError
from .fields import PlaneQuadrature, TorusField
from .operators import horizontal_fraction


@dataclass(frozen=True)
class WitnessSpec:
    """Parameters of the anisotropically singular test density."""

    eps: float = 0.05
    s: float = 3.0
    j: int = 0
    xi_max: float = 2048.0

    def __post_init__(self):
        if not (0 < self.eps <= 0.125):
            raise ParameterError("eps must lie in (0, 1/8]")
        if self.s < 1:
            raise ParameterError("s must be at least 1")
        if self.j < 0 or int(self.j) != self.j:
            raise ParameterError("j must be a nonnegative integer")


@dataclass
class DecayCurve:
    """Samples ``(t, N t, value)`` of one norm along an evolution."""

    t: np.ndarray
    Nt: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.Nt = np.asarray(self.Nt, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not (self.t.shape == self.Nt.shape == self.values.shape):
            raise ParameterError("curve arrays must have equal length")
        if np.any(np.diff(self.t) <= 0):
            raise ParameterError("curve times must be strictly increasing")
        if np.any(self.values < 0):
            raise ParameterError("curve values must be nonnegative")

    def __len__(self):
        return len(self.t)


def _check_time(N, t):
    if np.any(np.asarray(t) < 0):
        raise ParameterError("time must be nonnegative")
    if N < 0:
        raise ParameterError("buoyancy frequency must be nonnegative")


def damping_rates(field):
    """Per-mode rate ``lambda`` with linear factor ``exp(-N lambda t)``."""
    rates = horizontal_fraction(field)
    if isinstance(field, TorusField):
        rates[field.grid.K1, field.grid.K2] = 1.0
    return rates


def semigroup_apply(field, N, t):
    """Exact solution of the linearized problem at time ``t``."""
    _check_time(N, t)
    return field.with_coeffs(field.coeffs * np.exp(-N * t * damping_rates(field)))


def duhamel_source_apply(source, N, t_elapsed):
    """Source term propagated over ``t_elapsed`` (one Duhamel integrand)."""
    return semigroup_apply(source, N, t_elapsed)


def evolve_curves(field, N, times, observables):
    """Norm curves of the linear evolution of ``field``.

    ``observables`` maps labels to callables ``field -> float``.  Returns a
    dict of :class:`DecayCurve`.
    """
    times = np.asarray(times, dtype=float)
    _check_time(N, times)
    rates = damping_rates(field)
    values = {label: [] for label in observables}
    for t in times:
        state = field.with_coeffs(field.coeffs * np.exp(-N * t * rates))
        for label, fn in observables.items():
            values[label].append(fn(state))
    return {label: DecayCurve(times, N * times, v, label) for label, v in values.items()}


# ---------------------------------------------------------------------------
# plane (continuous frequency) quadrature
# ---------------------------------------------------------------------------


def sharpness_witness(spec=WitnessSpec()):
    """Density ``|xi1|^{-1/2 + 2 eps} (1 + |xi|^2)^{-s/2 - 1/4 - 2 eps}``."""
    a = -0.5 + 2 * spec.eps
    b = -spec.s / 2 - 0.25 - 2 * spec.eps

    def density(xi1, xi2):
        return np.abs(xi1) ** a * (1.0 + xi1**2 + xi2**2) ** b

    return density


def gaussian_density(width=1.0):
    """Isotropic Gaussian ``exp(-pi w^2 |xi|^2)`` (transform of a Gaussian bump)."""

    def density(xi1, xi2):
        return np.exp(-np.pi * width**2 * (xi1**2 + xi2**2))

    return density


class _PlaneIntegrand:
    """Cached node data for repeated time evaluations of one density."""

    def __init__(self, density, quad, kind, j):
        if kind not in ("L1", "L2"):
            raise ParameterError("plane norm kind must be 'L1' or 'L2'")
        xi1, xi2, w = quad.mesh()
        r2 = xi1**2 + xi2**2
        self.frac = xi1**2 / r2
        f = np.abs(density(xi1, xi2))
        angular = self.frac ** (j / 2)
        if kind == "L1":
            self.base = w * angular * f
            self.power = 1.0
        else:
            self.base = w * (angular * f) ** 2
            self.power = 2.0

    def __call__(self, Nt):
        total = float(np.sum(self.base * np.exp(-self.power * Nt * self.frac)))
        return total if self.power == 1.0 else np.sqrt(total)


def plane_norm_quadrature(density, N, t, kind="L1", j=0, quad=None, rtol=1e-6):
    """``int (|xi1|/|xi|)^j exp(-N xi1^2/|xi|^2 t) |f(xi)| dxi`` (or the L2 analogue).

    The truncation of the frequency box is validated by doubling ``xi_max``;
    a relative change above ``rtol`` raises :class:`RefinementError`.
    """
    return plane_decay_curve(density, N, [t], kind, j, quad, rtol).values[0]


def plane_decay_curve(density, N, times, kind="L1", j=0, quad=None, rtol=1e-6):
    """Vectorized :func:`plane_norm_quadrature` over a time list."""
    times = np.asarray(times, dtype=float)
    _check_time(N, times)
    quad = PlaneQuadrature() if quad is None else quad
    coarse = _PlaneIntegrand(density, quad, kind, j)
    values = np.array([coarse(N * t) for t in times])
    wide = _PlaneIntegrand(density, quad.doubled(), kind, j)
    for idx in {0, len(times) - 1}:
        ref = wide(N * times[idx])
        err = abs(ref - values[idx])
        if err > rtol * abs(ref):
            raise RefinementError(
                f"frequency truncation not converged at Nt={N * times[idx]:g} "
                f"(relative change {err / abs(ref):.2e} under doubling)",
                estimate=ref,
                error=err,
            )
    label = f"{kind}_j{j}"
    return DecayCurve(times, N * times, values, label)


def plane_sobolev_norm(density, s, quad=None):
    """``(int (1 + |xi|^2)^s |f|^2 dxi)^{1/2}`` by quadrature."""
    quad = PlaneQuadrature() if quad is None else quad
    return np.sqrt(quad.integrate(lambda a, b: (1 + a**2 + b**2) ** s * np.abs(density(a, b)) ** 2))


def kernel_decay_ratio(density, N, times, s=2.0, quad=None):
    """Curve of ``(1+Nt)^{1/4} int exp(-N xi1^2/|xi|^2 t)|f| dxi / ||f||_{H^s}``."""
    if s <= 1:
        raise ParameterError("kernel bound needs s > 1")
    quad = PlaneQuadrature() if quad is None else quad
    curve = plane_decay_curve(density, N, times, "L1", 0, quad)
    hs = plane_sobolev_norm(density, s, quad)
    values = (1 + curve.Nt) ** 0.25 * curve.values / hs
    return DecayCurve(curve.t, curve.Nt, values, "kernel_ratio")
