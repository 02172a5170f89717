"""Nonlinear time integration with exact linear damping (ETDRK4).

The perturbation ``theta`` of the stratified density obeys

    d_t theta + u . grad theta = -u2 (N + sigma(x2)),

with ``u`` given by the Biot-Savart law of the domain.  The ``-N u2`` part is
diagonal in the spectral basis and is applied exactly; transport and the
``sigma`` coupling are advanced with fourth-order exponential Runge-Kutta
stages.
"""
from __future__ import annotations

import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BlowUpError, ParameterError
from .fields import (
    StripFieldX,
    StripGrid,
    TorusField,
    TorusGrid,
    bump_profile,
    gaussian_profile,
    hermitian_part,
    sample_profile,
    strip_eval,
    strip_project,
    torus_eval_real,
    torus_project_real,
)
from .operators import NormSpec, biot_savart, derivative, norm, riesz1
from .propagator import DecayCurve, damping_rates

DOMAINS = ("torus", "strip", "plane_box")
INITIAL_KINDS = ("band", "algebraic", "profile", "zero")
STANDARD_OBSERVABLES = ("theta:L2", "theta:Hm", "u:L2", "u2:L2", "u:Hm", "grad_u2:Hm-1", "R1theta:Hm", "u2:Winf1")


@dataclass
class InitialData:
    """Recipe for ``theta_0``.

    ``band``: random smooth data on ``|n_i| <= band``.  ``algebraic``: spectrum
    ``(1 + |k|^2)^{-tail/2}`` with random phases on horizontal modes
    ``horizontal_min <= |n1| <= horizontal`` and every resolved vertical mode (default
    ``tail = m + 1/2``, which saturates the ``H^m`` decay rates).  ``profile``:
    a random function of ``x2`` alone.  The non-mean part is scaled so that its
    ``H^m`` norm equals ``amplitude``; ``mean`` sets the torus mean coefficient.
    """

    kind: str = "band"
    amplitude: float = 1.0
    band: int = 4
    tail: float | None = None
    horizontal: int = 4
    horizontal_min: int = 1
    zero_horizontal_mean: bool = True
    mean: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ParameterError(f"initial data kind must be one of {INITIAL_KINDS}")
        if self.amplitude < 0:
            raise ParameterError("amplitude must be nonnegative")


@dataclass
class SigmaSpec:
    """Compact background profile on the periodized plane box."""

    shape: str = "bump"
    amplitude: float = 0.0
    width: float = 4.0

    def profile(self):
        if self.shape == "bump":
            return bump_profile(self.amplitude, self.width)
        if self.shape == "gaussian":
            return gaussian_profile(self.amplitude, self.width)
        raise ParameterError(f"unknown sigma shape {self.shape!r}")


@dataclass
class SolverConfig:
    domain: str = "torus"
    N: float = 1.0
    N_ratio: float | None = None
    modes: tuple = (16, 16)
    points: tuple | None = None
    length: float | None = None
    sigma: SigmaSpec | None = None
    initial: InitialData = field(default_factory=InitialData)
    m: int = 4
    dt: float | None = None
    cfl_safety: float = 0.5
    dt_max: float | None = None
    ndt_max: float = 0.1
    T: float | None = None
    Nt_final: float = 1000.0
    snapshots: object = 40
    dealias: bool = True
    nonlinear: bool = True
    blowup_factor: float = 1e3
    store_fields: bool = False

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ParameterError(f"domain must be one of {DOMAINS}")
        if np.ndim(self.modes) == 0:
            self.modes = (int(self.modes), int(self.modes))
        self.modes = tuple(int(k) for k in self.modes)
        if self.points is not None:
            self.points = tuple(int(k) for k in self.points)
        if self.N < 0 or (self.N_ratio is not None and self.N_ratio <= 0):
            raise ParameterError("N must be nonnegative (N_ratio positive)")
        if self.dt is not None and self.dt <= 0:
            raise ParameterError("dt must be positive")
        if self.T is not None and self.T < 0:
            raise ParameterError("T must be nonnegative")
        if self.sigma is not None and self.sigma.amplitude != 0 and self.domain != "plane_box":
            raise ParameterError("a background profile sigma is only supported on domain plane_box")
        if self.m < 0:
            raise ParameterError("m must be nonnegative")

    @property
    def box_length(self):
        if self.domain == "plane_box":
            return 32.0 if self.length is None else float(self.length)
        return 1.0


@dataclass
class Ledger:
    """Running energy bookkeeping of one run."""

    norm0_sq: float
    sup_hm_sq: float = 0.0
    int_r1: float = 0.0
    int_u2: float = 0.0
    violation_time: float | None = None

    @property
    def total(self):
        return self.sup_hm_sq + self.int_r1

    @property
    def bound(self):
        return 4.0 * self.norm0_sq


@dataclass
class SimState:
    t: float
    theta: object
    ledger: Ledger | None = None


@dataclass
class Trajectory:
    config: SolverConfig
    N: float
    status: str
    status_time: float | None
    times: np.ndarray
    curves: dict
    ledger: Ledger
    ledger_history: dict
    means: np.ndarray
    u1_hmean: np.ndarray
    hmeans: list
    flux_history: list
    hmean0: np.ndarray
    theta0: object
    final: object
    steps: int
    profile_flag: bool = False
    fields: list = field(default_factory=list)

    @property
    def completed(self):
        return self.status in ("completed", "ledger_violation")


# ---------------------------------------------------------------------------
# phi functions and ETDRK4 coefficients
# ---------------------------------------------------------------------------


def phi_functions(z, terms=30):
    """``phi_1, phi_2, phi_3`` for real ``z`` (Taylor series where ``|z| < 1``)."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1.0
    phis = []
    zs = np.where(small, 1.0, z)
    ez = np.exp(zs)
    direct = [(ez - 1) / zs, (ez - 1 - zs) / zs**2, (ez - 1 - zs - zs**2 / 2) / zs**3]
    for k in (1, 2, 3):
        series = np.zeros_like(z)
        zt = np.where(small, z, 0.0)
        for j in range(terms - 1, -1, -1):
            series = series * zt + 1.0 / math.factorial(j + k)
        phis.append(np.where(small, series, direct[k - 1]))
    return phis


class ETDCoefficients:
    """ETDRK4 (Cox-Matthews) weights for the diagonal linear rate ``L``."""

    def __init__(self, L, h):
        z = h * L
        self.E = np.exp(z)
        self.E2 = np.exp(z / 2)
        p1h, _, _ = phi_functions(z / 2)
        self.Q = 0.5 * h * p1h
        p1, p2, p3 = phi_functions(z)
        self.f1 = h * (p1 - 3 * p2 + 4 * p3)
        self.f2 = h * (p2 - 2 * p3)
        self.f3 = h * (-p2 + 4 * p3)


# ---------------------------------------------------------------------------
# domain adapters
# ---------------------------------------------------------------------------


class _Domain:
    def observables(self, m):
        """Standard norm observables on the current density."""
        hm = NormSpec("sobolev", m)
        hm1 = NormSpec("sobolev", max(m - 1, 0))
        l2 = NormSpec("L2")

        def pair(vel, spec):
            return math.hypot(norm(vel.u1, spec), norm(vel.u2, spec))

        def compute(theta):
            vel = biot_savart(theta)
            du2 = (derivative(vel.u2, 0), derivative(vel.u2, 1))
            return {
                "theta:L2": norm(theta, l2),
                "theta:Hm": norm(theta, hm),
                "u:L2": pair(vel, l2),
                "u2:L2": norm(vel.u2, l2),
                "u:Hm": pair(vel, hm),
                "grad_u2:Hm-1": math.hypot(norm(du2[0], hm1), norm(du2[1], hm1)),
                "R1theta:Hm": norm(riesz1(theta), hm),
                "u2:Winf1": norm(vel.u2, NormSpec("Linf_proxy", 1)),
            }

        return compute


class _TorusDomain(_Domain):
    def __init__(self, config):
        K1, K2 = config.modes
        self.length = config.box_length
        self.grid = TorusGrid((K1, K2), config.points, self.length)
        self.pad = self.grid.padded_points() if config.dealias else self.grid.points
        self.sigma_pad = None
        self.profile = None
        if config.sigma is not None and config.sigma.amplitude != 0:
            self.profile = sample_profile(config.sigma.profile(), self.grid)
            sig = np.zeros(self.grid.shape, dtype=complex)
            sig[self.grid.K1, :] = self.profile.coeffs
            self.sigma_pad = torus_eval_real(sig, self.grid, self.pad)
        self.rates = damping_rates(TorusField.zeros(self.grid))
        self.spacing = (self.length / self.pad[0], self.length / self.pad[1])

    def zeros(self):
        return TorusField.zeros(self.grid)

    def nonlinear(self, theta):
        """``-u . grad theta - u2 sigma`` and the padded-grid velocity maxima."""
        g, pad = self.grid, self.pad
        c = theta.coeffs
        u1 = -_ratio(g.xi1 * g.xi2, g.xi_sq) * c
        u2 = _ratio(g.xi1**2 + 0 * g.xi2, g.xi_sq) * c
        u2[g.K1, g.K2] = c[g.K1, g.K2]
        ev = [torus_eval_real(a, g, pad) for a in (u1, u2, 2j * np.pi * g.xi1 * c, 2j * np.pi * g.xi2 * c)]
        prod = ev[0] * ev[2] + ev[1] * ev[3]
        if self.sigma_pad is not None:
            prod = prod + ev[1] * self.sigma_pad
        out = -torus_project_real(prod, g)
        return out, (np.max(np.abs(ev[0])), np.max(np.abs(ev[1])))

    def mean(self, theta):
        g = self.grid
        return float(theta.coeffs[g.K1, g.K2].real * g.area)

    def hmean(self, coeffs):
        """Spectrum of the horizontal average (the ``n1 = 0`` column)."""
        return coeffs[self.grid.K1, :].copy()

    def u1_hmean(self, theta):
        vel = biot_savart(theta)
        return float(np.sum(np.abs(vel.u1.coeffs[self.grid.K1, :])) * self.length)

    def flux_correction(self, theta, N):
        """Linear part of the horizontal-mean flux ``N * hmean(u2)``."""
        out = np.zeros(2 * self.grid.K2 + 1, dtype=complex)
        out[self.grid.K2] = N * theta.coeffs[self.grid.K1, self.grid.K2]
        return out

    def initial(self, spec, m):
        g = self.grid
        rng = np.random.default_rng(spec.seed)
        n1, n2 = np.broadcast_arrays(g.n1, g.n2)
        k_sq = g.xi_sq
        if spec.kind == "zero":
            return self.zeros()
        if spec.kind == "band":
            mask = (np.abs(n1) <= spec.band) & (np.abs(n2) <= spec.band)
            weight = np.where(mask, (1.0 + k_sq) ** (-1.0), 0.0)
        elif spec.kind == "algebraic":
            tail = m + 0.5 if spec.tail is None else spec.tail
            mask = (np.abs(n1) >= spec.horizontal_min) & (np.abs(n1) <= spec.horizontal)
            weight = np.where(mask, (1.0 + k_sq) ** (-tail / 2), 0.0)
        else:
            mask = (n1 == 0) & (np.abs(n2) <= spec.band)
            weight = np.where(mask, (1.0 + k_sq) ** (-1.0), 0.0)
        if spec.kind == "band" and spec.zero_horizontal_mean:
            weight = np.where(n1 == 0, 0.0, weight)
        weight[g.K1, g.K2] = 0.0
        coeffs = weight * _random_phases(rng, g.shape, axes=(0, 1))
        field0 = _normalize(TorusField(g, coeffs), spec.amplitude, m)
        field0.coeffs[g.K1, g.K2] = spec.mean / g.area
        return field0


class _StripDomain(_Domain):
    def __init__(self, config):
        P, Q = config.modes
        M1, J = config.points if config.points is not None else (None, None)
        self.grid = StripGrid(P, Q, M1, J)
        self.pad = self.grid.padded_points() if config.dealias else (self.grid.M1, self.grid.J)
        self.profile = None
        self.rates = damping_rates(StripFieldX.zeros(self.grid))
        self.spacing = (1.0 / self.pad[0], 2.0 / self.pad[1])
        q = np.arange(1, Q + 1)
        self.b_integrals = np.where(q % 2 == 1, 4.0 / (np.pi * q) * np.sin(0.5 * np.pi * q), 0.0)

    def zeros(self):
        return StripFieldX.zeros(self.grid)

    def nonlinear(self, theta):
        g, pad = self.grid, self.pad
        vel = biot_savart(theta)
        th1 = derivative(theta, 0)
        th2 = derivative(theta, 1)
        ev_u1 = strip_eval(vel.u1.coeffs, "Y", g.P, g.Q, *pad).real
        ev_u2 = strip_eval(vel.u2.coeffs, "X", g.P, g.Q, *pad).real
        ev_t1 = strip_eval(th1.coeffs, "X", g.P, g.Q, *pad).real
        ev_t2 = strip_eval(th2.coeffs, "Y", g.P, g.Q, *pad).real
        prod = ev_u1 * ev_t1 + ev_u2 * ev_t2
        out = -hermitian_part(strip_project(prod, "X", g.P, g.Q), axes=(0,))
        return out, (np.max(np.abs(ev_u1)), np.max(np.abs(ev_u2)))

    def mean(self, theta):
        return float(np.sum(theta.coeffs[self.grid.P, :].real * self.b_integrals))

    def hmean(self, coeffs):
        return coeffs[self.grid.P, :].copy()

    def u1_hmean(self, theta):
        vel = biot_savart(theta)
        return float(np.sum(np.abs(vel.u1.coeffs[self.grid.P, :])) + np.sum(np.abs(vel.u2.coeffs[self.grid.P, :])))

    def flux_correction(self, theta, N):
        return np.zeros(self.grid.Q, dtype=complex)

    def initial(self, spec, m):
        g = self.grid
        rng = np.random.default_rng(spec.seed)
        p, q = np.broadcast_arrays(g.p, g.q("X"))
        k_sq = g.k_sq("X")
        if spec.kind == "zero":
            return self.zeros()
        if spec.kind == "band":
            mask = (np.abs(p) <= spec.band) & (q <= spec.band)
            if spec.zero_horizontal_mean:
                mask &= p != 0
            weight = np.where(mask, (1.0 + k_sq) ** (-1.0), 0.0)
        elif spec.kind == "algebraic":
            tail = m + 0.5 if spec.tail is None else spec.tail
            mask = (np.abs(p) >= spec.horizontal_min) & (np.abs(p) <= spec.horizontal)
            weight = np.where(mask, (1.0 + k_sq) ** (-tail / 2), 0.0)
        else:
            weight = np.where((p == 0) & (q <= spec.band), (1.0 + k_sq) ** (-1.0), 0.0)
        coeffs = weight * _random_phases(rng, g.shape("X"), axes=(0,))
        return _normalize(StripFieldX(g, coeffs), spec.amplitude, m)


def _ratio(num, den):
    out = np.zeros(np.broadcast(num, den).shape)
    nz = np.broadcast_to(den, out.shape) != 0
    out[nz] = np.broadcast_to(num, out.shape)[nz] / np.broadcast_to(den, out.shape)[nz]
    return out


def _random_phases(rng, shape, axes):
    """Unit-modulus Hermitian array (antisymmetric phases)."""
    phi = rng.uniform(0, 2 * np.pi, shape)
    flipped = phi
    for ax in axes:
        flipped = np.flip(flipped, axis=ax)
    return np.exp(0.5j * (phi - flipped))


def _normalize(field0, amplitude, m):
    size = norm(field0, NormSpec("sobolev", m))
    if size == 0:
        return field0
    return field0 * (amplitude / size)


def make_domain(config):
    if config.domain == "strip":
        return _StripDomain(config)
    return _TorusDomain(config)


# ---------------------------------------------------------------------------
# public stepping API
# ---------------------------------------------------------------------------


def nonlinear_term(theta, config, domain=None):
    """``-u . grad theta - u2 sigma(x2)`` as a field of the density's type."""
    domain = make_domain(config) if domain is None else domain
    coeffs, _ = domain.nonlinear(theta)
    return theta.with_coeffs(coeffs, True)


class Stepper:
    """ETDRK4 integrator bound to one configuration (caches weights per step size)."""

    def __init__(self, config, N, domain=None):
        self.config = config
        self.N = N
        self.domain = make_domain(config) if domain is None else domain
        self.L = -N * self.domain.rates
        self._cache = OrderedDict()

    def coefficients(self, h):
        key = float(h)
        if key not in self._cache:
            self._cache[key] = ETDCoefficients(self.L, h)
            if len(self._cache) > 8:
                self._cache.popitem(last=False)
        return self._cache[key]

    def rhs(self, coeffs, template):
        if not self.config.nonlinear:
            return np.zeros_like(coeffs), (0.0, 0.0)
        return self.domain.nonlinear(template.with_coeffs(coeffs))

    def advance(self, theta, h, nl0=None):
        """One ETDRK4 step from ``theta``; ``nl0`` may carry the stage-0 term."""
        c = self.coefficients(h)
        u = theta.coeffs
        Nu = self.rhs(u, theta)[0] if nl0 is None else nl0
        if not self.config.nonlinear:
            return theta.with_coeffs(c.E * u)
        a = c.E2 * u + c.Q * Nu
        Na = self.rhs(a, theta)[0]
        b = c.E2 * u + c.Q * Na
        Nb = self.rhs(b, theta)[0]
        cc = c.E2 * a + c.Q * (2 * Nb - Nu)
        Nc = self.rhs(cc, theta)[0]
        new = c.E * u + c.f1 * Nu + 2 * c.f2 * (Na + Nb) + c.f3 * Nc
        return theta.with_coeffs(new)


def step(state, dt, config, N=None):
    """Advance a :class:`SimState` by one ETDRK4 step of size ``dt``."""
    N = config.N if N is None else N
    stepper = Stepper(config, N)
    with np.errstate(invalid="ignore", over="ignore"):
        theta = stepper.advance(state.theta, dt)
    if not np.all(np.isfinite(theta.coeffs)):
        raise BlowUpError("non-finite state", last_good_time=state.t)
    return SimState(state.t + dt, theta, state.ledger)


def cfl_dt(state_or_umax, config, spacing=None, N=None):
    """``safety * min(dx / max|u1|, dy / max|u2|)`` capped by ``dt_max``.

    Accepts a state (velocity evaluated on the collocation grid) or a pair of
    precomputed velocity maxima together with the grid ``spacing``.
    """
    dt_max = _dt_cap(config, config.N if N is None else N)
    if isinstance(state_or_umax, SimState):
        domain = make_domain(config)
        _, umax = domain.nonlinear(state_or_umax.theta)
        spacing = domain.spacing
    else:
        umax = state_or_umax
    limits = [dx / um for dx, um in zip(spacing, umax) if um > 0]
    if not limits:
        return dt_max
    return min(config.cfl_safety * min(limits), dt_max)


def _dt_cap(config, N):
    caps = []
    if config.dt_max is not None:
        caps.append(config.dt_max)
    if N > 0:
        caps.append(config.ndt_max / N)
    return min(caps) if caps else 0.01


def _snapshot_times(config, N, T):
    snaps = config.snapshots
    if np.ndim(snaps) == 0:
        count = int(snaps)
        if N > 0 and T > 0:
            times = (np.geomspace(1.0, 1.0 + N * T, count) - 1.0) / N
        else:
            times = np.linspace(0.0, T, count)
    else:
        times = np.asarray(snaps, dtype=float)
    times = np.unique(np.concatenate([[0.0], times[(times > 0) & (times < T)], [T]]))
    return times


def run(config, theta0=None):
    """Integrate to the final time and collect snapshots, curves and the ledger."""
    domain = make_domain(config)
    m = config.m
    theta = domain.initial(config.initial, m) if theta0 is None else theta0.copy()
    hm = NormSpec("sobolev", m)
    norm0 = norm(theta, hm)
    N = config.N if config.N_ratio is None else config.N_ratio * norm0
    if config.N_ratio is not None and norm0 == 0:
        raise ParameterError("N_ratio needs nonzero initial data")
    T = config.T if config.T is not None else (config.Nt_final / N if N > 0 else 1.0)
    profile_flag = bool(domain.profile is not None and np.max(np.abs(domain.profile.values)) > N / 2)
    if profile_flag:
        warnings.warn("max |sigma| exceeds N/2", RuntimeWarning, stacklevel=2)
    stepper = Stepper(config, N, domain)
    observe = domain.observables(m)
    snaps = _snapshot_times(config, N, T)
    labels = STANDARD_OBSERVABLES
    series = {label: [] for label in labels}
    ledger = Ledger(norm0**2)
    history = {"sup_hm_sq": [], "int_r1": [], "int_u2": [], "total": []}
    means, u1_hmean, hmeans, fluxes, stored = [], [], [], [], []
    status, status_time = "completed", None
    bound_scale = config.blowup_factor * norm0

    def integrands(th):
        vel_u2 = _u2_field(th)
        return norm(riesz1(th), hm) ** 2, norm(vel_u2, NormSpec("l1", 1))

    def record(t, th):
        values = observe(th)
        for label in labels:
            series[label].append(values[label])
        history["sup_hm_sq"].append(ledger.sup_hm_sq)
        history["int_r1"].append(ledger.int_r1)
        history["int_u2"].append(ledger.int_u2)
        history["total"].append(ledger.total)
        means.append(domain.mean(th))
        u1_hmean.append(domain.u1_hmean(th))
        hmeans.append(domain.hmean(th.coeffs))
        fluxes.append(flux_int.copy())
        if config.store_fields:
            stored.append((t, th.copy()))

    t = 0.0
    steps = 0
    nl, umax = stepper.rhs(theta.coeffs, theta)
    r1_prev, u2_prev = integrands(theta)
    ledger.sup_hm_sq = norm0**2
    flux_prev = -domain.hmean(nl) + domain.flux_correction(theta, N)
    flux_int = np.zeros_like(flux_prev)
    hmean0 = domain.hmean(theta.coeffs)
    record(0.0, theta)
    theta_init = theta.copy()
    for target in snaps[1:]:
        while t < target * (1 - 1e-14) and target - t > 1e-15:
            if config.dt is not None:
                h = config.dt
            elif config.nonlinear:
                h = cfl_dt(umax, config, domain.spacing, N)
            else:
                h = _dt_cap(config, N)
            h = min(h, target - t)
            new = stepper.advance(theta, h, nl)
            t_new = t + h
            if not np.all(np.isfinite(new.coeffs)):
                status, status_time = "blow_up", t
                break
            size = norm(new, hm)
            if norm0 > 0 and size > bound_scale:
                status, status_time = "blow_up", t
                break
            nl, umax = stepper.rhs(new.coeffs, new)
            r1_new, u2_new = integrands(new)
            ledger.int_r1 += 0.5 * N * h * (r1_prev + r1_new)
            ledger.int_u2 += 0.5 * N * h * (u2_prev + u2_new)
            ledger.sup_hm_sq = max(ledger.sup_hm_sq, size**2)
            flux_new = -domain.hmean(nl) + domain.flux_correction(new, N)
            flux_int = flux_int + 0.5 * h * (flux_prev + flux_new)
            if ledger.violation_time is None and ledger.total > ledger.bound * (1 + 1e-12):
                ledger.violation_time = t_new
            theta, t = new, t_new
            r1_prev, u2_prev, flux_prev = r1_new, u2_new, flux_new
            steps += 1
        if status == "blow_up":
            break
        record(t, theta)
    if status != "blow_up" and ledger.violation_time is not None:
        status, status_time = "ledger_violation", ledger.violation_time
    times = np.asarray(snaps[: len(series[labels[0]])])
    curves = {label: DecayCurve(times, N * times, np.asarray(series[label]), label) for label in labels}
    return Trajectory(
        config=config,
        N=N,
        status=status,
        status_time=status_time,
        times=times,
        curves=curves,
        ledger=ledger,
        ledger_history={k: np.asarray(v) for k, v in history.items()},
        means=np.asarray(means),
        u1_hmean=np.asarray(u1_hmean),
        hmeans=hmeans,
        flux_history=fluxes,
        hmean0=hmean0,
        theta0=theta_init,
        final=theta,
        steps=steps,
        profile_flag=profile_flag,
        fields=stored,
    )


def _u2_field(theta):
    return biot_savart(theta).u2


def with_overrides(config, **kwargs):
    return replace(config, **kwargs)
