"""Spectral Galerkin simulation of the forced flow on a mode ball |k|^2 <= M.

The truncated system du/dt + A u + P_M B(u, u) = P_M F(t) is advanced with an
integrating-factor Runge-Kutta scheme: over each step the substitution
w(s) = e^{(s - t) A} u(s) removes the stiff Stokes term exactly, and classical
RK4 advances w. All exponential factors that appear are decaying, so the
scheme is stable for any step; accuracy is the usual O(h^4).

The convolution here is the same exact finite-support sum as
`spectral.bilinear`, evaluated through a precomputed interaction table over a
fixed representative basis (one entry per conjugate pair, so realness stays
structural). No FFT, no dealiasing, no truncation beyond the mode ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expansion import ForceExpansion
from .spectral import NormSpec, SpectralField, eigenvalue, inner, is_representative, norm

__all__ = [
    "SolverConfig",
    "Trajectory",
    "BlowupError",
    "ModeTable",
    "mode_table",
    "evaluate_force",
    "integrate",
    "energy_ledger",
]

BLOWUP_NORM = 1e6


class BlowupError(RuntimeError):
    """Trajectory norm crossed the blow-up guard; carries the time it happened."""

    def __init__(self, t: float, value: float):
        super().__init__(f"solution norm {value:.3e} exceeded {BLOWUP_NORM:.0e} at t = {t:.6g}")
        self.t = t
        self.value = value


@dataclass(frozen=True)
class SolverConfig:
    mode_cutoff: int
    step: float
    t_end: float
    sample_stride: int = 1

    def __post_init__(self):
        if self.mode_cutoff < 1 or self.mode_cutoff != int(self.mode_cutoff):
            raise ValueError(f"mode_cutoff must be a positive integer, got {self.mode_cutoff}")
        if not (0 < self.step <= 0.5):
            raise ValueError(f"step must lie in (0, 0.5], got {self.step}")
        if not (self.t_end > 0):
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.sample_stride < 1 or self.sample_stride != int(self.sample_stride):
            raise ValueError(f"sample_stride must be a positive integer, got {self.sample_stride}")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled states: times[i] = i * step * sample_stride."""

    times: np.ndarray
    states: tuple[SpectralField, ...]
    config: SolverConfig

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states length mismatch")

    def __len__(self):
        return len(self.states)

    @property
    def spacing(self) -> float:
        return self.config.step * self.config.sample_stride

    @property
    def t_end(self) -> float:
        return float(self.times[-1])


class ModeTable:
    """Dense workspace over the representatives with |k|^2 <= cutoff.

    Rows follow lexicographic order of the representative wavevectors. The
    interaction table lists every ordered pair of full modes (both halves)
    whose sum is a stored representative, grouped by output row so `convolve`
    can reduce each group with one contiguous segmented sum; summation order
    is fixed at construction, so runs are reproducible.
    """

    def __init__(self, cutoff: int):
        cutoff = int(cutoff)
        reps = []
        r = math.isqrt(cutoff)
        for a in range(-r, r + 1):
            for b in range(-r, r + 1):
                for c in range(-r, r + 1):
                    k = (a, b, c)
                    if is_representative(k) and eigenvalue(k) <= cutoff:
                        reps.append(k)
        reps.sort()
        self.cutoff = cutoff
        self.reps: list[tuple[int, int, int]] = reps
        self.index = {k: i for i, k in enumerate(reps)}
        self.size = len(reps)
        self.kvec = np.array(reps, dtype=float)            # (R, 3)
        self.lam = np.einsum("rc,rc->r", self.kvec, self.kvec)
        full = reps + [(-a, -b, -c) for (a, b, c) in reps]
        self._full_k = full
        pi, pj, po = [], [], []
        for i, m in enumerate(full):
            for j, l in enumerate(full):
                k = (m[0] + l[0], m[1] + l[1], m[2] + l[2])
                out = self.index.get(k)
                if out is not None:
                    pi.append(i)
                    pj.append(j)
                    po.append(out)
        order = np.argsort(np.array(po, dtype=np.intp), kind="stable")
        self._pi = np.array(pi, dtype=np.intp)[order]
        self._pj = np.array(pj, dtype=np.intp)[order]
        self._lj = np.array([full[j] for j in pj], dtype=float)[order]   # (P, 3)
        po_sorted = np.array(po, dtype=np.intp)[order]
        self._targets, self._starts = np.unique(po_sorted, return_index=True)

    def densify(self, u: SpectralField, *, strict: bool = True) -> np.ndarray:
        out = np.zeros((self.size, 3), dtype=np.complex128)
        for k, c in u.modes():
            i = self.index.get(k)
            if i is None:
                if strict:
                    raise ValueError(
                        f"mode {k} (|k|^2 = {eigenvalue(k)}) lies outside cutoff {self.cutoff}"
                    )
                continue
            out[i] = c
        return out

    def to_field(self, coeffs: np.ndarray) -> SpectralField:
        live = np.nonzero(np.any(coeffs != 0, axis=1))[0]
        return SpectralField({self.reps[i]: coeffs[i] for i in live})

    def convolve(self, u: np.ndarray, v: np.ndarray | None = None) -> np.ndarray:
        """Projected advection B(u, v) of dense coefficient arrays (v defaults to u)."""
        if v is None:
            v = u
        fu = np.concatenate([u, np.conj(u)], axis=0)
        fv = fu if v is u else np.concatenate([v, np.conj(v)], axis=0)
        dots = 1j * np.einsum("pc,pc->p", fu[self._pi], self._lj)
        contrib = dots[:, None] * fv[self._pj]
        out = np.zeros((self.size, 3), dtype=np.complex128)
        out[self._targets] = np.add.reduceat(contrib, self._starts, axis=0)
        proj = np.einsum("rc,rc->r", out, self.kvec) / self.lam
        out -= proj[:, None] * self.kvec
        return out

    def h_norm(self, coeffs: np.ndarray) -> float:
        return math.sqrt(2.0 * float(np.vdot(coeffs, coeffs).real))


_TABLES: dict[int, ModeTable] = {}


def mode_table(cutoff: int) -> ModeTable:
    table = _TABLES.get(cutoff)
    if table is None:
        table = _TABLES[cutoff] = ModeTable(cutoff)
    return table


def evaluate_force(force: ForceExpansion, t: float) -> SpectralField:
    """Total force at time t: sum_n f_n(t) e^{-n t}, plus the unexpanded tail if any."""
    acc = SpectralField.zero()
    for n, poly in force.terms:
        acc = acc + poly(t) * math.exp(-n * t)
    if force.remainder is not None:
        acc = acc + force.remainder(t)
    return acc


def integrate(u0: SpectralField, force: ForceExpansion, config: SolverConfig) -> Trajectory:
    """March the truncated system from u0 and return uniformly sampled states.

    u0 must be divergence-free and supported inside the cutoff; the expanded
    force levels must fit inside the cutoff too (otherwise the truncation
    would silently drop driven modes). A remainder force is truncated to the
    ball, which is exactly what the Galerkin right side prescribes.
    """
    table = mode_table(config.mode_cutoff)
    u0.require_divergence_free(1e-10)
    fmax = force.max_support_eigenvalue()
    if fmax > config.mode_cutoff:
        raise ValueError(
            f"force reaches eigenvalue {fmax} beyond mode_cutoff {config.mode_cutoff}"
        )
    u = table.densify(u0, strict=True)

    # densified force levels: per level, Horner-ready list of (R,3) arrays
    dense_levels = [
        (n, [table.densify(c, strict=True) for c in poly.coeffs()])
        for n, poly in force.terms
    ]
    remainder = force.remainder

    def dense_force(t: float) -> np.ndarray:
        out = np.zeros((table.size, 3), dtype=np.complex128)
        for n, coeffs in dense_levels:
            if not coeffs:
                continue
            acc = coeffs[-1]
            for c in coeffs[-2::-1]:
                acc = acc * t + c
            out += acc * math.exp(-n * t)
        if remainder is not None:
            out += table.densify(remainder(t), strict=False)
        return out

    h = config.step
    nsteps = int(round(config.t_end / h))
    if nsteps < 1:
        raise ValueError("t_end shorter than one step")
    stride = config.sample_stride
    half = np.exp(-(h / 2.0) * table.lam)[:, None]
    full = np.exp(-h * table.lam)[:, None]

    times = [0.0]
    states = [table.to_field(u)]
    for step in range(1, nsteps + 1):
        t = (step - 1) * h
        n1 = dense_force(t) - table.convolve(u)
        a2 = half * (u + (h / 2.0) * n1)
        n2 = dense_force(t + h / 2.0) - table.convolve(a2)
        a3 = half * u + (h / 2.0) * n2
        n3 = dense_force(t + h / 2.0) - table.convolve(a3)
        a4 = full * u + h * (half * n3)
        n4 = dense_force(t + h) - table.convolve(a4)
        u = full * u + (h / 6.0) * (full * n1 + 2.0 * (half * (n2 + n3)) + n4)
        value = table.h_norm(u)
        if not (value <= BLOWUP_NORM):
            raise BlowupError(step * h, value)
        if step % stride == 0:
            times.append(step * h)
            states.append(table.to_field(u))
    return Trajectory(np.array(times), tuple(states), config)


def energy_ledger(traj: Trajectory, force: ForceExpansion) -> np.ndarray:
    """Per-interval defect of the energy balance on the sample grid.

    Interval i reports
        1/2|u_{i+1}|^2 - 1/2|u_i|^2 + int ||u||^2 - int <F, u>
    with both integrals by the trapezoid rule, so the defect of an exact
    trajectory is pure quadrature error: O(spacing^2) per unit time.
    """
    half_h1 = NormSpec(0.5, 0.0)
    t = traj.times
    energy = np.array([0.5 * norm(s) ** 2 for s in traj.states])
    enstrophy = np.array([norm(s, half_h1) ** 2 for s in traj.states])
    work = np.array(
        [inner(evaluate_force(force, float(ti)), s) for ti, s in zip(t, traj.states)]
    )
    dt = np.diff(t)
    defects = (
        energy[1:]
        - energy[:-1]
        + 0.5 * dt * (enstrophy[1:] + enstrophy[:-1])
        - 0.5 * dt * (work[1:] + work[:-1])
    )
    return defects
