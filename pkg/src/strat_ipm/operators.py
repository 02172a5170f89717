"""Fourier multipliers, Biot-Savart law, derivatives and norms.

Frequency conventions follow each domain:

* torus / periodic box of side ``L``: ``xi = n / L``, derivative ``2 pi i xi``,
  Sobolev weight ``(1 + |xi|^2)^{s/2}``;
* strip: frequencies ``k = (2 pi p, pi q / 2)``, Sobolev weight ``(1 + |k|^2)^{s/2}``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import ParameterError, ShapeError
from .fields import StripFieldX, StripFieldY, TorusField, evaluate, vertical_norms

NORM_KINDS = ("sobolev", "homogeneous", "l1", "aniso", "L2", "Linf_proxy")


@dataclass(frozen=True)
class NormSpec:
    """A discrete norm.

    ``sobolev``: ``H^s`` with inhomogeneous weight; ``homogeneous``: ``|xi|^s``;
    ``l1``: weighted spectral ``l^1`` sum; ``aniso``: ``L^1_{xi2} L^2_{xi1}`` with
    the inhomogeneous weight; ``L2``: plain ``L^2``; ``Linf_proxy``: weighted
    ``l^1`` sum, an upper bound for ``W^{s, inf}``.
    """

    kind: str = "sobolev"
    s: float = 0.0

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise ParameterError(f"unknown norm kind {self.kind!r}; choose from {NORM_KINDS}")
        if not np.isfinite(self.s) or self.s < 0:
            raise ParameterError("norm order must be finite and nonnegative")

    @property
    def label(self):
        return {
            "sobolev": f"H{self.s:g}",
            "homogeneous": f"Hdot{self.s:g}",
            "l1": f"l1w{self.s:g}",
            "aniso": f"aniso{self.s:g}",
            "L2": "L2",
            "Linf_proxy": f"Winf{self.s:g}",
        }[self.kind]


@dataclass
class Velocity:
    """Velocity components; on the strip ``u1`` is Y-type and ``u2`` is X-type."""

    u1: object
    u2: object


# ---------------------------------------------------------------------------
# frequency helpers
# ---------------------------------------------------------------------------


def frequencies(field):
    """Angular-free frequency pair and squared modulus used by multipliers.

    Returns ``(k1, k2, k_sq)`` where ``k`` is ``xi`` on the torus and
    ``(2 pi p, pi q / 2)`` on the strip.
    """
    if isinstance(field, TorusField):
        g = field.grid
        return g.xi1, g.xi2, g.xi_sq
    k1, k2 = field.grid.frequencies(field.kind)
    return k1, k2, k1**2 + k2**2


def _safe_ratio(num, den):
    out = np.zeros(np.broadcast(num, den).shape)
    nz = np.broadcast_to(den, out.shape) != 0
    out[nz] = (np.broadcast_to(num, out.shape)[nz]) / np.broadcast_to(den, out.shape)[nz]
    return out


def horizontal_fraction(field):
    """``k1^2 / |k|^2`` on every mode (0 where ``k = 0``)."""
    k1, k2, k_sq = frequencies(field)
    return _safe_ratio(k1**2 + 0 * k2, k_sq)


# ---------------------------------------------------------------------------
# multipliers
# ---------------------------------------------------------------------------


def riesz1(field):
    """First Riesz transform ``-i k1 / |k|``; zero wherever ``k1 = 0``."""
    k1, k2, k_sq = frequencies(field)
    mult = -1j * _safe_ratio(k1 + 0 * k2, np.sqrt(k_sq))
    return field.with_coeffs(field.coeffs * mult)


def biot_savart(theta):
    """Velocity generated by a density perturbation.

    Torus/box: ``u2 = xi1^2/|xi|^2 theta`` and ``u1 = -xi1 xi2/|xi|^2 theta`` for
    ``xi != 0`` with ``u2`` carrying the mean of ``theta``.  Strip: ``u2`` on the
    ``B`` basis with multiplier ``(2 pi p)^2 / |k|^2`` and ``u1`` on the ``C`` basis
    with ``i pi^2 p q / |k|^2``, which makes ``div u = 0`` and ``u`` horizontally
    mean-free.
    """
    if isinstance(theta, TorusField):
        g = theta.grid
        c = theta.coeffs
        u2 = _safe_ratio(g.xi1**2 + 0 * g.xi2, g.xi_sq) * c
        u1 = -_safe_ratio(g.xi1 * g.xi2, g.xi_sq) * c
        u2[g.K1, g.K2] = c[g.K1, g.K2]
        return Velocity(theta.with_coeffs(u1), theta.with_coeffs(u2))
    if not isinstance(theta, StripFieldX):
        raise ShapeError("strip density must be an X-type field")
    g = theta.grid
    k1, k2 = g.frequencies("X")
    k_sq = k1**2 + k2**2
    u2 = theta.with_coeffs(k1**2 / k_sq * theta.coeffs)
    u1 = np.zeros(g.shape("Y"), dtype=complex)
    u1[:, 1:] = 1j * (np.pi**2) * g.p * g.q("X") / k_sq * theta.coeffs
    return Velocity(StripFieldY(g, u1, theta.real), u2)


def derivative(field, axis):
    """Spectral partial derivative along ``axis`` (0 = x1, 1 = x2).

    On the strip ``d/dx2`` maps X to Y and Y to X:
    ``d2 B_{p,q} = (pi q / 2) C_{p,q}`` and ``d2 C_{p,q} = -(pi q / 2) B_{p,q}``.
    """
    if axis not in (0, 1):
        raise ParameterError("axis must be 0 or 1")
    if isinstance(field, TorusField):
        g = field.grid
        xi = g.xi1 if axis == 0 else g.xi2
        return field.with_coeffs(2j * np.pi * xi * field.coeffs)
    g = field.grid
    if axis == 0:
        return field.with_coeffs(2j * np.pi * g.p * field.coeffs)
    half = 0.5 * np.pi * np.arange(1, g.Q + 1)[None, :]
    if field.kind == "X":
        out = np.zeros(g.shape("Y"), dtype=complex)
        out[:, 1:] = half * field.coeffs
        return StripFieldY(g, out, field.real)
    return StripFieldX(g, -half * field.coeffs[:, 1:], field.real)


def divergence(velocity):
    """``d1 u1 + d2 u2`` as a field (Y-type on the strip)."""
    return derivative(velocity.u1, 0) + derivative(velocity.u2, 1)


def inverse_laplacian(field):
    """``(-Delta)^{-1}`` with the zero mode sent to zero."""
    k1, k2, k_sq = frequencies(field)
    symbol = (2 * np.pi) ** 2 * k_sq if isinstance(field, TorusField) else k_sq
    return field.with_coeffs(field.coeffs * _safe_ratio(np.ones_like(symbol), symbol))


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def _weights(field, spec):
    k1, k2, k_sq = frequencies(field)
    if spec.kind in ("sobolev", "l1", "aniso", "Linf_proxy"):
        return (1.0 + k_sq) ** (spec.s / 2)
    if spec.kind == "homogeneous":
        if spec.s == 0:
            return np.ones_like(k_sq)
        return k_sq ** (spec.s / 2)
    return np.ones_like(k_sq)


def _mass(field):
    """Per-mode weight converting ``sum |c|^2`` into the physical squared L2 norm."""
    if isinstance(field, TorusField):
        return field.grid.area
    return vertical_norms(field.kind, field.grid.Q)[None, :]


def norm(field, spec=NormSpec()):
    """Discrete norm of ``field``.

    ``L2``/``sobolev``/``homogeneous`` norms are normalized so that the ``L2``
    norm equals the physical one (Parseval).  Spectral ``l1`` sums use the
    transform values ``hat f(xi)`` integrated against the mode spacing, which
    on the periodic box reduces to ``sum w |c_n|``.
    """
    if isinstance(spec, str):
        spec = parse_norm(spec)
    w = _weights(field, spec)
    c = np.abs(field.coeffs)
    if spec.kind in ("sobolev", "homogeneous", "L2"):
        return float(np.sqrt(np.sum(_mass(field) * (w * c) ** 2)))
    if spec.kind in ("l1", "Linf_proxy"):
        return float(np.sum(w * c))
    # L^1 in xi2 of the L^2 norm in xi1
    inner = np.sqrt(np.sum((w * c) ** 2, axis=0))
    scale = np.sqrt(field.grid.length) if isinstance(field, TorusField) else 1.0
    return float(scale * np.sum(inner))


def parse_norm(text):
    """Parse labels such as ``L2``, ``H4``, ``Hdot3``, ``l1w1``, ``aniso2``, ``Winf1``."""
    text = text.strip()
    if text == "L2":
        return NormSpec("L2", 0.0)
    for prefix, kind in (("Hdot", "homogeneous"), ("H", "sobolev"), ("l1w", "l1"),
                         ("aniso", "aniso"), ("Winf", "Linf_proxy")):
        if text.startswith(prefix):
            try:
                return NormSpec(kind, float(text[len(prefix):]))
            except ValueError:
                break
    raise ParameterError(f"cannot parse norm label {text!r}")


def grid_max(field):
    """True maximum of ``|f|`` over the collocation grid (logged next to the proxy)."""
    return float(np.max(np.abs(evaluate(field))))


# ---------------------------------------------------------------------------
# convolution inequality
# ---------------------------------------------------------------------------


@dataclass
class ConvolutionReport:
    lhs: float
    rhs: float

    @property
    def ratio(self):
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else np.inf
        return self.lhs / self.rhs


def _check_young(p, q, r):
    for e in (p, q, r):
        if not (e >= 1):
            raise ParameterError("Young exponents must lie in [1, inf]")
    if not np.isclose(1 / q + 1 / r, 1 + 1 / p, rtol=0, atol=1e-12):
        raise ParameterError(f"exponents violate 1/q + 1/r = 1 + 1/p (p={p}, q={q}, r={r})")


def _lp(values, p):
    values = np.abs(values).ravel()
    if np.isinf(p):
        return float(values.max(initial=0.0))
    return float(np.sum(values**p) ** (1 / p))


def _sobolev_weight(n1, n2, s):
    return (1.0 + n1**2 + n2**2) ** (s / 2)


def product_spectrum(fa, fb):
    """Exact coefficients of ``f g`` (all modes ``|n_i| <= 2 K_i``) from centered spectra."""
    return fftconvolve(fa, fb, mode="full")


def convolution_bound_check(f, g, s, p=1, q=1, r=1):
    """Weighted Young-type bound for the spectrum of a product on the torus.

    ``lhs = ||(1+|n|^2)^{s/2} F(fg)||_{l^p}`` and
    ``rhs = ||(1+|n|^2)^{s/2} F f||_{l^q} ||(1+|n|^2)^{s/2} F g||_{l^r}``;
    the product spectrum is formed exactly (no truncation).
    """
    _check_young(p, q, r)
    if not (isinstance(f, TorusField) and isinstance(g, TorusField)) or f.grid != g.grid:
        raise ShapeError("convolution check needs two torus fields on one grid")
    K1, K2 = f.grid.K1, f.grid.K2
    prod = product_spectrum(f.coeffs, g.coeffs)
    m1 = np.arange(-2 * K1, 2 * K1 + 1)[:, None]
    m2 = np.arange(-2 * K2, 2 * K2 + 1)[None, :]
    w = _sobolev_weight(f.grid.n1, f.grid.n2, s)
    lhs = _lp(_sobolev_weight(m1, m2, s) * prod, p)
    rhs = _lp(w * f.coeffs, q) * _lp(w * g.coeffs, r)
    return ConvolutionReport(lhs, rhs)


def anisotropic_convolution_check(f, sigma_coeffs, s, p=1, q=1, r=1):
    """Bound for the product with a function of ``x2`` alone.

    ``lhs = ||w F(f sigma)||_{l^p}``,
    ``rhs = || ||w F f||_{l^p_{n1}} ||_{l^q_{n2}} ||(1+n2^2)^{s/2} sigma_hat||_{l^r}``.
    """
    _check_young(p, q, r)
    sigma_coeffs = np.asarray(sigma_coeffs)
    K1, K2 = f.grid.K1, f.grid.K2
    Ks = (len(sigma_coeffs) - 1) // 2
    prod = fftconvolve(f.coeffs, sigma_coeffs[None, :], mode="full")
    m1 = np.arange(-K1, K1 + 1)[:, None]
    m2 = np.arange(-K2 - Ks, K2 + Ks + 1)[None, :]
    lhs = _lp(_sobolev_weight(m1, m2, s) * prod, p)
    wf = np.abs(_sobolev_weight(f.grid.n1, f.grid.n2, s) * f.coeffs)
    inner = np.array([_lp(wf[:, j], p) for j in range(wf.shape[1])])
    ns = np.arange(-Ks, Ks + 1)
    rhs = _lp(inner, q) * _lp((1.0 + ns**2) ** (s / 2) * sigma_coeffs, r)
    return ConvolutionReport(lhs, rhs)
