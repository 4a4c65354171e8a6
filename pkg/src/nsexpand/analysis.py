"""Measurement side: norm series along trajectories, tail rate fits, and
decay certificates.

Rates are fitted by least squares on (t, ln value). Values below a relative
floor (1e-13 of the series peak) are treated as numerically zero and excluded
from fits; a series that is entirely at the floor yields a flagged non-fit
rather than a meaningless slope. The tolerance convention used throughout:
a claim "slope <= -r" passes when the fitted slope is <= -r + 0.05 with rms
residual <= 0.1, which absorbs polynomial-in-t corrections on top of clean
exponentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expansion import ForceExpansion, level_source
from .fieldpoly import FieldPolynomial, assemble, resolvent_solve
from .galerkin import Trajectory, evaluate_force
from .spectral import (
    NormSpec,
    SpectralField,
    eigenspace_project,
    eigenvalues_up_to,
    norm,
)

__all__ = [
    "FLOOR_FACTOR",
    "FitError",
    "NormSeries",
    "RateFit",
    "ResonantConstantFit",
    "DecayCertificate",
    "CertificateReport",
    "tail_window",
    "norm_series",
    "remainder_series",
    "fit_rate",
    "rate_claim_passes",
    "fit_resonant_constant",
    "certificate_check",
]

FLOOR_FACTOR = 1e-13
RATE_SLACK = 0.05
RMS_MAX = 0.1


class FitError(ValueError):
    """Window unusable for a fit (too few samples above the floor)."""


@dataclass(frozen=True)
class NormSeries:
    times: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values length mismatch")

    def __len__(self):
        return len(self.times)

    def peak(self) -> float:
        return float(np.max(self.values)) if len(self.values) else 0.0


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    rms_residual: float
    window: tuple[float, float]
    n_samples: int
    floor_dominated: bool = False


@dataclass(frozen=True)
class ResonantConstantFit:
    """Estimated free constant of one resonant level, with fit quality.

    `constant` is the estimate (mean of the compensated series over the
    window); `stddev` its scatter in the unweighted norm; `drift` the fitted
    linear trend across the window relative to the constant's size. Drift
    above 10% marks the window as contaminated (too early: higher levels
    still visible; or too late: amplified simulation error).
    """

    constant: SpectralField
    stddev: float
    drift: float
    contaminated: bool
    window: tuple[float, float]
    n_samples: int


def tail_window(t_end: float, lo: float = 0.6, hi: float = 0.95) -> tuple[float, float]:
    """Default fitting window: the [lo, hi] fraction of the horizon."""
    return (lo * t_end, hi * t_end)


def norm_series(traj: Trajectory, spec: NormSpec, label: str = "") -> NormSeries:
    values = np.array([norm(s, spec) for s in traj.states])
    return NormSeries(traj.times.copy(), values, label)


def remainder_series(traj, terms, spec: NormSpec, label: str = "") -> NormSeries:
    """|u(t_i) - sum_n q_n(t_i) e^{-n t_i}| in the given norm; empty terms = plain norm."""
    terms = tuple(terms)
    values = np.array(
        [
            norm(s - assemble(terms, float(t)), spec)
            for t, s in zip(traj.times, traj.states)
        ]
    )
    return NormSeries(traj.times.copy(), values, label)


def fit_rate(series: NormSeries, window: tuple[float, float] | None = None) -> RateFit:
    """Least-squares slope of ln(value) over the window, floor-aware.

    Excludes samples below FLOOR_FACTOR x (series peak); if the whole window
    sits at the floor the result is flagged floor_dominated with NaN slope
    (no meaningful rate exists). Fewer than 8 usable samples is an error.
    """
    if window is None:
        window = tail_window(float(series.times[-1]))
    a, b = float(window[0]), float(window[1])
    if not (a < b):
        raise ValueError(f"empty window {window}")
    t, v = series.times, series.values
    in_win = (t >= a - 1e-12) & (t <= b + 1e-12)
    peak = series.peak()
    floor = FLOOR_FACTOR * peak
    usable = in_win & (v > floor)
    m = int(np.count_nonzero(usable))
    if m == 0 or peak == 0.0:
        return RateFit(math.nan, math.nan, math.nan, (a, b), 0, floor_dominated=True)
    if m < 8:
        raise FitError(
            f"only {m} usable samples in window [{a:.4g}, {b:.4g}]; need >= 8"
        )
    x = t[usable]
    y = np.log(v[usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    return RateFit(float(slope), float(intercept), rms, (a, b), m)


def rate_claim_passes(fit: RateFit, rate: float) -> bool:
    """Tolerance convention for 'decays at least like e^{-rate t}'."""
    if fit.floor_dominated:
        return False
    return fit.slope <= -rate + RATE_SLACK and fit.rms_residual <= RMS_MAX


def fit_resonant_constant(
    traj: Trajectory,
    terms_below,
    force: ForceExpansion,
    n: int,
    window: tuple[float, float] | None = None,
) -> ResonantConstantFit:
    """Estimate the free constant of resonant level n from a trajectory.

    Compensates the simulated flow by the already-built levels below n,
    rescales by e^{n t}, projects on the |k|^2 = n eigenspace and subtracts
    the known particular part of level n (the zero-constant solve). What
    remains is constant for the underlying solution up to faster-decaying
    levels, so its windowed mean estimates the constant and its linear trend
    measures contamination.
    """
    spectrum = set(eigenvalues_up_to(int(n)))
    if int(n) not in spectrum:
        raise ValueError(
            f"{n} is not a Stokes eigenvalue (not a sum of three squares); "
            "no resonant constant exists at this level"
        )
    n = int(n)
    terms_below = tuple(terms_below)
    if any(term.n >= n for term in terms_below):
        raise ValueError("terms_below must only contain levels < n")
    if window is None:
        window = tail_window(traj.t_end, 0.8, 0.95)
    a, b = float(window[0]), float(window[1])
    p = level_source(terms_below, force, n)
    pn = p.map_coeffs(lambda c: eigenspace_project(c, n))
    particular = resolvent_solve(pn, 0.0, SpectralField.zero())

    idx = np.nonzero((traj.times >= a - 1e-12) & (traj.times <= b + 1e-12))[0]
    if len(idx) < 2:
        raise FitError(f"window [{a:.4g}, {b:.4g}] holds fewer than 2 samples")
    samples = []
    times = []
    for i in idx:
        t = float(traj.times[i])
        w = eigenspace_project(traj.states[i] - assemble(terms_below, t), n)
        w = w * math.exp(n * t) - particular(t)
        samples.append(w)
        times.append(t)

    m = len(samples)
    mean = SpectralField.zero()
    for w in samples:
        mean = mean + w
    mean = mean * (1.0 / m)
    stddev = math.sqrt(math.fsum(norm(w - mean) ** 2 for w in samples) / m)

    # per-coefficient linear trend; drift = |trend x window length| / |constant|
    support = sorted(set().union(*(w.support() for w in samples)) | set(mean.support()))
    tarr = np.array(times)
    tc = tarr - tarr.mean()
    var = float(tc @ tc)
    drift_norm = 0.0
    if support and var > 0:
        stacked = np.array([[w.coeff(k) for k in support] for w in samples])
        slopes = np.einsum("s,skc->kc", tc, stacked) / var
        drift_field = SpectralField(
            {k: slopes[j] * (b - a) for j, k in enumerate(support)}
        )
        drift_norm = norm(drift_field)
    base = norm(mean)
    drift = drift_norm / base if base > 0 else (math.inf if drift_norm > 0 else 0.0)
    return ResonantConstantFit(mean, stddev, drift, drift > 0.1, (a, b), m)


@dataclass(frozen=True)
class DecayCertificate:
    """Smallness certificate: checked hypotheses imply quantified decay.

    With initial data |A^alpha u0| <= C0 and force |f(t)|_{alpha-1/2, sigma}
    <= C1 e^{-lam t}, the flow obeys
        |u(t)|_{alpha, sigma} <= sqrt(2) C0 e^{-(1-delta) t}     for t >= t_star
        int_t^{t+1} |u|^2_{alpha+1/2, sigma} <= 3 C0^2 / (2(1-delta)) e^{-2(1-delta) t}.
    C0, C1 are determined by (alpha, delta, lam, sigma) and the advection
    constant K; sigma > 0 costs a startup time t_star = 6 sigma / delta.
    """

    alpha: float
    delta: float
    lam: float
    sigma: float = 0.0
    K: float = 2.0

    def __post_init__(self):
        if not (0 < self.delta < 1):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not (1 - self.delta < self.lam <= 1):
            raise ValueError(
                f"lam must lie in (1 - delta, 1] = ({1 - self.delta}, 1], got {self.lam}"
            )
        if not (self.alpha >= 0.5):
            raise ValueError(f"alpha must be >= 1/2, got {self.alpha}")
        if not (self.sigma >= 0):
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not (self.K > 1):
            raise ValueError(f"K must exceed 1, got {self.K}")

    @property
    def C0(self) -> float:
        if self.sigma > 0:
            return self.delta / (6.0 * self.K**self.alpha)
        return self.delta / (4.0 * self.K**self.alpha)

    @property
    def C1(self) -> float:
        gap = self.delta * (self.lam - 1.0 + self.delta)
        if self.sigma > 0:
            return (2.0 / math.sqrt(3.0)) * math.sqrt(gap) * self.C0
        return math.sqrt(2.0) * math.sqrt(gap) * self.C0

    @property
    def t_star(self) -> float:
        return 6.0 * self.sigma / self.delta


@dataclass(frozen=True)
class CertificateReport:
    certificate: DecayCertificate
    hypothesis_failures: tuple[str, ...]
    pointwise_times: np.ndarray
    pointwise_margins: np.ndarray
    integral_times: np.ndarray
    integral_margins: np.ndarray

    @property
    def applicable(self) -> bool:
        return not self.hypothesis_failures

    @property
    def conclusions_hold(self) -> bool:
        return bool(
            np.all(self.pointwise_margins >= 0) and np.all(self.integral_margins >= 0)
        )

    @property
    def verdict(self) -> str:
        if not self.applicable:
            return "inapplicable"
        return "verified" if self.conclusions_hold else "violated"

    def min_margin(self) -> float:
        vals = np.concatenate([self.pointwise_margins, self.integral_margins])
        return float(np.min(vals)) if len(vals) else math.inf


def certificate_check(
    traj: Trajectory, cert: DecayCertificate, force: ForceExpansion
) -> CertificateReport:
    """Gate the hypotheses on the actual data, then measure the conclusions.

    Hypothesis failure yields verdict "inapplicable" (the certificate says
    nothing); margins are still computed for inspection. Conclusions are
    checked at every sample past t_star, the integral one on unit windows
    anchored at samples (sample spacing must divide 1).
    """
    c0, c1, t_star = cert.C0, cert.C1, cert.t_star
    failures = []
    u0 = traj.states[0]
    lhs = norm(u0, NormSpec(cert.alpha, 0.0))
    if lhs > c0 * (1 + 1e-12):
        failures.append(
            f"initial data: |A^alpha u0| = {lhs:.6e} exceeds C0 = {c0:.6e}"
        )
    fspec = NormSpec(cert.alpha - 0.5, cert.sigma)
    for t in traj.times:
        fval = norm(evaluate_force(force, float(t)), fspec)
        bound = c1 * math.exp(-cert.lam * float(t))
        if fval > bound * (1 + 1e-12) + 1e-300:
            failures.append(
                f"force at t = {float(t):.6g}: |f|_(alpha-1/2, sigma) = {fval:.6e} "
                f"exceeds C1 e^(-lam t) = {bound:.6e}"
            )
            break

    uspec = NormSpec(cert.alpha, cert.sigma)
    rate = 1.0 - cert.delta
    pw_t, pw_m = [], []
    for t, s in zip(traj.times, traj.states):
        t = float(t)
        if t < t_star - 1e-12:
            continue
        bound = math.sqrt(2.0) * c0 * math.exp(-rate * t)
        pw_t.append(t)
        pw_m.append(bound - norm(s, uspec))

    spacing = traj.spacing
    steps = int(round(1.0 / spacing))
    it_t, it_m = [], []
    if steps >= 1 and abs(steps * spacing - 1.0) <= 1e-6:
        vals = np.array([norm(s, NormSpec(cert.alpha + 0.5, cert.sigma)) ** 2 for s in traj.states])
        coef = 3.0 * c0 * c0 / (2.0 * rate)
        for i in range(len(traj) - steps):
            t = float(traj.times[i])
            if t < t_star - 1e-12:
                continue
            integral = float(np.trapezoid(vals[i : i + steps + 1], dx=spacing))
            it_t.append(t)
            it_m.append(coef * math.exp(-2.0 * rate * t) - integral)
    return CertificateReport(
        cert,
        tuple(failures),
        np.array(pw_t),
        np.array(pw_m),
        np.array(it_t),
        np.array(it_m),
    )
