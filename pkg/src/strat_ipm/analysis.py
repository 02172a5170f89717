"""Rate fitting, profile extraction, mean-law audits and inequality ensembles."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .fields import TorusField, TorusGrid, physical_product, vertical_norms
from .operators import NormSpec, convolution_bound_check, anisotropic_convolution_check, norm
from .propagator import DecayCurve, evolve_curves

MIN_FIT_SAMPLES = 8


# ---------------------------------------------------------------------------
# rate fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatePrediction:
    """Predicted exponent ``alpha`` in ``value ~ (1 + N t)^alpha``.

    ``kind = "equal"`` requires ``|fit - alpha| <= tol``; ``kind = "upper"``
    treats ``alpha`` as an upper bound on the decay exponent and requires
    ``fit <= alpha + tol``.
    """

    observable: str
    exponent: float
    tol: float = 0.15
    kind: str = "equal"
    claim: str = ""

    def __post_init__(self):
        if not self.tol > 0:
            raise ParameterError("tolerance must be positive")
        if self.kind not in ("equal", "upper"):
            raise ParameterError("prediction kind must be 'equal' or 'upper'")

    def accepts(self, exponent):
        if self.kind == "equal":
            return abs(exponent - self.exponent) <= self.tol
        return exponent <= self.exponent + self.tol


@dataclass
class FitResult:
    exponent: float
    stderr: float
    residual: float
    window: tuple
    samples: int


def valid_window(n2_max, n1_max=1, lo=10.0, hi=1e3):
    """Fit window ``[lo, min(hi, 0.1 (n2_max / n1_max)^2)]`` in units of ``N t``."""
    return lo, min(hi, 0.1 * (n2_max / n1_max) ** 2)


def fit_decay_exponent(curve, window=(10.0, 1e3)):
    """Least-squares slope of ``log(value)`` against ``log(1 + N t)`` inside ``window``."""
    lo, hi = window
    Nt = np.asarray(curve.Nt)
    values = np.asarray(curve.values)
    inside = (Nt >= lo * (1 - 1e-12)) & (Nt <= hi * (1 + 1e-12))
    if inside.sum() < MIN_FIT_SAMPLES:
        raise ParameterError(f"only {inside.sum()} samples in window {window}; need {MIN_FIT_SAMPLES}")
    y = values[inside]
    if np.any(y <= 0):
        raise ParameterError("curve values must be positive inside the fit window")
    x = np.log1p(Nt[inside])
    y = np.log(y)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = max(len(x) - 2, 1)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(A.T @ A)
    return FitResult(float(coef[0]), float(np.sqrt(cov[0, 0])), float(np.sqrt(np.mean(resid**2))),
                     (lo, hi), int(len(x)))


@dataclass
class RateCheck:
    prediction: RatePrediction
    fit: FitResult | None
    passed: bool
    note: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        p = self.prediction
        measured = "nan" if self.fit is None else f"{self.fit.exponent:.4f}"
        rel = "=" if p.kind == "equal" else "<="
        text = f"{tag} {p.observable}: measured {measured}, predicted {rel} {p.exponent:+.3f} (tol {p.tol})"
        if p.claim:
            text += f" [{p.claim}]"
        if self.note:
            text += f" ({self.note})"
        return text


@dataclass
class DecayReport:
    checks: list = field(default_factory=list)
    sweep: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def lines(self):
        return [c.line() for c in self.checks]


def check_predictions(curves, predictions, window):
    checks = []
    for pred in predictions:
        curve = curves.get(pred.observable)
        if curve is None:
            checks.append(RateCheck(pred, None, False, "observable not recorded"))
            continue
        try:
            fit = fit_decay_exponent(curve, window)
        except ParameterError as exc:
            checks.append(RateCheck(pred, None, False, str(exc)))
            continue
        checks.append(RateCheck(pred, fit, pred.accepts(fit.exponent)))
    return checks


def sobolev_sweep(theta0, N, times, m, window):
    """Linear decay exponents of ``||theta(t)||_{H^s}`` for ``s = 0..m``.

    Data with no horizontally averaged part have zero asymptotic profile, so
    this measures the rate of ``theta - sigma``; the prediction is ``-(m - s)/2``.
    """
    observables = {f"theta:H{s}": (lambda f, s=s: norm(f, NormSpec("sobolev", s))) for s in range(m + 1)}
    curves = evolve_curves(theta0, N, times, observables)
    return {s: fit_decay_exponent(curves[f"theta:H{s}"], window).exponent for s in range(m + 1)}


def build_report(trajectory, predictions, window=None, sweep=False):
    """Fit every predicted observable of a run and attach the optional ``H^s`` sweep."""
    if not trajectory.completed:
        raise ParameterError("run did not complete")
    curves = dict(trajectory.curves)
    m = trajectory.config.m
    if window is None:
        window = valid_window(trajectory.config.modes[1])
    report = DecayReport(check_predictions(curves, predictions, window))
    if sweep:
        times = trajectory.times[trajectory.times > 0]
        report.sweep = sobolev_sweep(trajectory.theta0, trajectory.N, times, m, window)
    return report


# ---------------------------------------------------------------------------
# asymptotic profile
# ---------------------------------------------------------------------------


@dataclass
class ProfileResult:
    """Horizontal-mean profile computed from the final state and from the flux integral."""

    sigma_final: np.ndarray
    sigma_flux: np.ndarray
    relative_difference: float
    curve: DecayCurve
    cauchy: np.ndarray


def _profile_norm(trajectory, coeffs):
    cfg = trajectory.config
    if cfg.domain == "strip":
        return float(np.sqrt(np.sum(np.abs(coeffs) ** 2 * vertical_norms("X", cfg.modes[1]))))
    area = cfg.box_length**2
    return float(np.sqrt(area * np.sum(np.abs(coeffs) ** 2)))


def extract_profile(trajectory):
    """Asymptotic profile by two routes and the convergence curve of the horizontal mean.

    Route (i) is the horizontal mean at the final time; route (ii) subtracts
    the trapezoid time integral of the horizontal mean of
    ``u . grad theta + N u2`` from the initial horizontal mean.
    """
    if not trajectory.completed:
        raise ParameterError("profile extraction needs a completed run")
    final = trajectory.hmeans[-1]
    flux = trajectory.hmean0 - trajectory.flux_history[-1]
    scale = _profile_norm(trajectory, final)
    diff = _profile_norm(trajectory, final - flux)
    rel = diff / scale if scale > 0 else diff
    values = np.array([_profile_norm(trajectory, h - final) for h in trajectory.hmeans])
    curve = DecayCurve(trajectory.times, trajectory.N * trajectory.times, values, "hmean-profile")
    cauchy = np.array([_profile_norm(trajectory, trajectory.hmeans[k] - (trajectory.hmean0 - trajectory.flux_history[k]))
                       for k in range(len(trajectory.hmeans))])
    return ProfileResult(final, flux, rel, curve, cauchy)


# ---------------------------------------------------------------------------
# mean laws
# ---------------------------------------------------------------------------


@dataclass
class MeanLawReport:
    domain: str
    mean_violation: float
    horizontal_velocity_mean: float
    predicted: np.ndarray
    measured: np.ndarray


def audit_mean_laws(trajectory):
    """Relative deviation of the domain mean from its law, and ``max |int_T u1 dx1|``.

    Torus/box: ``int theta(t) = exp(-N t) int theta_0``; strip: conserved.
    """
    measured = trajectory.means
    m0 = measured[0]
    if trajectory.config.domain == "strip":
        predicted = np.full_like(measured, m0)
    else:
        predicted = m0 * np.exp(-trajectory.N * trajectory.times)
    denom = np.abs(predicted)
    err = np.abs(measured - predicted)
    rel = np.where(denom > 0, err / np.where(denom > 0, denom, 1.0), err)
    return MeanLawReport(trajectory.config.domain, float(rel.max()), float(np.max(trajectory.u1_hmean)),
                         predicted, measured)


# ---------------------------------------------------------------------------
# inequality ensembles
# ---------------------------------------------------------------------------


@dataclass
class InequalityReport:
    name: str
    ensemble_size: int
    ratios: np.ndarray
    max_ratio: float
    drift: float | None = None
    violations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def finite(self):
        return bool(np.all(np.isfinite(self.ratios)) and np.all(self.ratios >= 0))


def random_spectrum(grid, rng, decay=2.0, keep_n1_zero=True):
    """Hermitian random spectrum with envelope ``(1 + |n|^2)^{-decay/2}``."""
    n1, n2 = np.broadcast_arrays(grid.n1, grid.n2)
    raw = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    coeffs = 0.5 * (raw + np.conj(raw[::-1, ::-1])) * (1.0 + n1**2 + n2**2) ** (-decay / 2)
    if not keep_n1_zero:
        coeffs[n1 == 0] = 0
    return coeffs


def _nested_ensemble(K, samples, seed, decay):
    """Spectra generated at resolution ``2K`` (restricted to ``K`` on demand) so doubling compares like with like."""
    rng = np.random.default_rng(seed)
    grid = TorusGrid(2 * K)
    return [random_spectrum(grid, rng, decay) for _ in range(samples)]


def _restrict(coeffs, K):
    K2 = (coeffs.shape[0] - 1) // 2
    return coeffs[K2 - K: K2 + K + 1, K2 - K: K2 + K + 1]


def balancing_terms(coeffs, M, m):
    """Both sides of ``(1/M)||d1 R1 th||^2 - ||d1 R1^2 th||^2 <= (1/M^2)||R1 th||^2`` (homogeneous norms).

    Frequencies are integer mode indices: ``d -> i n``, ``|D| -> |n|``.
    """
    K1 = (coeffs.shape[0] - 1) // 2
    K2 = (coeffs.shape[1] - 1) // 2
    n1 = np.arange(-K1, K1 + 1, dtype=float)[:, None]
    n2 = np.arange(-K2, K2 + 1, dtype=float)[None, :]
    r2 = n1**2 + n2**2
    r2[K1, K2] = 1.0
    a = n1**2 / r2
    a[K1, K2] = 0.0
    power = np.abs(coeffs) ** 2
    w_m1 = r2 ** (m - 1)
    d1r1 = np.sum(w_m1 * n1**2 * a * power)
    d1r1sq = np.sum(w_m1 * n1**2 * a**2 * power)
    r1 = np.sum(r2**m * a * power)
    return d1r1 / M - d1r1sq, r1 / M**2, d1r1 / M + d1r1sq


def verify_balancing(spectra, M_list, m, slack=1e-12):
    """Check the balancing inequality on every spectrum and every ``M``."""
    ratios, violations = [], 0
    for coeffs in spectra:
        if not np.any(coeffs):
            raise ParameterError("spectra must be nonzero")
        for M in M_list:
            lhs, rhs, size = balancing_terms(np.asarray(coeffs), M, m)
            if lhs - rhs > slack * max(size + rhs, 1e-300):
                violations += 1
            ratios.append(max(lhs, 0.0) / rhs if rhs > 0 else 0.0)
    ratios = np.asarray(ratios)
    return InequalityReport("balancing", len(spectra), ratios, float(ratios.max(initial=0.0)), None, violations)


def commutator_terms(coeffs, s):
    """Commutator integral and its bound for ``u2 = -d1^2 (-Delta)^{-1} theta`` on the torus.

    ``lhs = |int (L^{s-2} d2^2 (u2 d2 th) - u2 L^{s-2} d2^3 th) L^{s-2} d2^2 th|`` with
    ``L = |D|``; ``rhs = || |n| F u2 ||_{l1} ||th||_{H^s}^2 + ||R1 th||_{H^s}^2 ||th||_{H^s}``.
    Products are formed on a padded grid, exact on the retained modes.
    """
    K = (coeffs.shape[0] - 1) // 2
    grid = TorusGrid(K)
    n1, n2 = grid.n1, grid.n2
    r2 = n1**2 + n2**2
    r = np.sqrt(r2)
    safe = np.where(r2 == 0, 1.0, r2)
    a = np.where(r2 == 0, 0.0, n1**2 / safe)
    lam = np.where(r2 == 0, 0.0, r ** (s - 2)) if s != 2 else np.ones_like(r)
    d2 = 1j * n2
    u2 = a * coeffs
    field = lambda c: TorusField(grid, c)
    prod1 = physical_product(field(u2), field(d2 * coeffs)).coeffs
    prod2 = physical_product(field(u2), field(lam * d2**3 * coeffs)).coeffs
    comm = lam * d2**2 * prod1 - prod2
    test = lam * d2**2 * coeffs
    lhs = abs(np.sum(comm * np.conj(test)).real)
    w = (1.0 + r2) ** (s / 2)
    hs = np.sqrt(np.sum((w * np.abs(coeffs)) ** 2))
    r1hs_sq = np.sum(a * (w * np.abs(coeffs)) ** 2)
    rhs = np.sum(r * np.abs(u2)) * hs**2 + r1hs_sq * hs
    return float(lhs), float(rhs)


def _drift(c_lo, c_hi):
    return abs(c_hi - c_lo) / c_lo if c_lo > 0 else (0.0 if c_hi == 0 else np.inf)


def verify_commutator(K=32, samples=100, s=3.0, seed=0, decay=None):
    """Empirical constant of the commutator bound at ``K`` and ``2K`` and its drift."""
    if s <= 2:
        raise ParameterError("commutator estimate needs s > 2")
    # envelope |n|^{-(s+2)} keeps ||theta||_{H^s} and the commutator integral
    # convergent, so the K -> 2K comparison measures truncation only
    decay = s + 2 if decay is None else decay
    ensemble = _nested_ensemble(K, samples, seed, decay)
    lo = np.array([np.divide(*commutator_terms(_restrict(c, K), s)) for c in ensemble])
    hi = np.array([np.divide(*commutator_terms(c, s)) for c in ensemble])
    c_lo, c_hi = lo.max(), hi.max()
    return InequalityReport("commutator", samples, hi, float(c_hi), float(_drift(c_lo, c_hi)),
                            extra={"constant_K": float(c_lo), "constant_2K": float(c_hi), "ratios_K": lo})


def verify_convolution(K=32, samples=100, s=2.0, exponents=(1, 1, 1), seed=0, decay=None, anisotropic=False):
    """Empirical constant of the weighted Young bound at ``K`` and ``2K``.

    With ``anisotropic`` the second factor is a function of ``x2`` alone.
    """
    p, q, r = exponents
    decay = s + 3 if decay is None else decay
    ens_f = _nested_ensemble(K, samples, seed, decay)
    ens_g = _nested_ensemble(K, samples, seed + 1, decay)

    def ratio(cf, cg, k):
        grid = TorusGrid(k)
        f = TorusField(grid, _restrict(cf, k))
        if anisotropic:
            sigma = _restrict(cg, k)[k, :]
            return anisotropic_convolution_check(f, sigma, s, p, q, r).ratio
        return convolution_bound_check(f, TorusField(grid, _restrict(cg, k)), s, p, q, r).ratio

    lo = np.array([ratio(cf, cg, K) for cf, cg in zip(ens_f, ens_g)])
    hi = np.array([ratio(cf, cg, 2 * K) for cf, cg in zip(ens_f, ens_g)])
    c_lo, c_hi = lo.max(), hi.max()
    name = "convolution-anisotropic" if anisotropic else "convolution"
    return InequalityReport(name, samples, hi, float(c_hi), float(_drift(c_lo, c_hi)),
                            extra={"constant_K": float(c_lo), "constant_2K": float(c_hi), "ratios_K": lo})
