"""Level-by-level construction of slow-decay expansions.

For a force F(t) = sum_n f_n(t) e^{-n t} with field-polynomial coefficients,
the flow admits an expansion u(t) ~ sum_n q_n(t) e^{-n t} whose levels
decouple once the exponential weight is factored out: level n must satisfy

    q_n' + (A - n) q_n = p_n,    p_n = f_n - sum_{k+m=n} B~(q_k, q_m),

with B~ the polynomial advection product and A the Stokes operator. On the
eigenspace |k|^2 = lam the left side is d/dt + (lam - n), inverted exactly by
the coefficient back-substitution in `resolvent_solve`. At lam = n the
inversion has a one-dimensional kernel per mode: the constant term is a free
parameter of the expansion (different choices track different solutions with
the same force), supplied externally and defaulting to zero.

Everything here is exact linear algebra on finite mode sets; residuals of the
level equations are rounding-level by construction and are re-checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .fieldpoly import (
    ExpansionTerm,
    FieldPolynomial,
    MissingResonantDataError,
    poly_bilinear,
    resolvent_solve,
)
from .spectral import SpectralField, eigenspace_project, eigenvalue

__all__ = [
    "ForceExpansion",
    "ExpansionResult",
    "check_resonant_data",
    "level_source",
    "solve_level",
    "build_expansion",
    "expansion_residual",
    "finite_approximation_plan",
]

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ForceExpansion:
    """Force given as decay levels f_n(t) e^{-n t}, plus an optional unexpanded tail.

    `terms` maps strictly increasing level indices n >= 1 to field
    polynomials with divergence-free coefficients. `remainder`, when present,
    is an arbitrary evaluable force t -> SpectralField that the simulator
    adds on top; the expansion machinery never sees it.
    """

    terms: tuple[tuple[int, FieldPolynomial], ...]
    remainder: Callable[[float], SpectralField] | None = None

    def __post_init__(self):
        seen = -1
        for n, poly in self.terms:
            if n != int(n) or n < 1:
                raise ValueError(f"force level must be a positive integer, got {n}")
            if n <= seen:
                raise ValueError("force levels must be strictly increasing")
            seen = n
            for c in poly.coeffs():
                c.require_divergence_free(1e-10)

    @classmethod
    def from_levels(cls, levels, remainder=None) -> "ForceExpansion":
        """Build from any iterable/mapping of n -> polynomial; levels get sorted."""
        items = levels.items() if hasattr(levels, "items") else levels
        pairs = sorted(((int(n), p) for n, p in items), key=lambda np_: np_[0])
        return cls(tuple(pairs), remainder)

    def level(self, n: int) -> FieldPolynomial:
        for m, poly in self.terms:
            if m == n:
                return poly
        return FieldPolynomial.zero()

    def max_level(self) -> int:
        return max((n for n, _ in self.terms), default=0)

    def max_support_eigenvalue(self) -> int:
        best = 0
        for _, poly in self.terms:
            for c in poly.coeffs():
                best = max(best, c.max_eigenvalue())
        return best


@dataclass(frozen=True)
class ExpansionResult:
    """Computed levels plus the exactness bookkeeping.

    residuals[n] is the max relative coefficient defect of the level-n
    equation; resonance_log lists (level, eigenvalue) for every solve that
    went through the free-constant branch.
    """

    terms: tuple[ExpansionTerm, ...]
    residuals: dict[int, float] = field(default_factory=dict)
    resonance_log: tuple[tuple[int, int], ...] = ()

    def polynomial(self, n: int) -> FieldPolynomial:
        for term in self.terms:
            if term.n == n:
                return term.poly
        return FieldPolynomial.zero()

    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def check_resonant_data(resonant) -> dict[int, SpectralField]:
    """Validate a mapping n -> free constant: each field must live on |k|^2 = n exactly."""
    out: dict[int, SpectralField] = {}
    if not resonant:
        return out
    for n, f in resonant.items():
        n = int(n)
        if n < 1:
            raise ValueError(f"resonant level must be a positive integer, got {n}")
        if not isinstance(f, SpectralField):
            raise TypeError("resonant constants must be SpectralField values")
        bad = [k for k in f.support() if eigenvalue(k) != n]
        if bad:
            raise ValueError(
                f"resonant constant for level {n} has support off the eigenspace: "
                f"mode {bad[0]} has |k|^2 = {eigenvalue(bad[0])}"
            )
        f.require_divergence_free(1e-10)
        out[n] = f
    return out


def level_source(prior_terms, force: ForceExpansion, n: int) -> FieldPolynomial:
    """Driving polynomial p_n = f_n - sum_{k+m=n} B~(q_k, q_m) from already-built levels."""
    qmap = {term.n: term.poly for term in prior_terms}
    p = force.level(n)
    for k in range(1, n):
        m = n - k
        qk, qm = qmap.get(k), qmap.get(m)
        if qk is None or qm is None or qk.is_zero or qm.is_zero:
            continue
        p = p - poly_bilinear(qk, qm)
    return p


def solve_level(
    p: FieldPolynomial, n: int, xi: SpectralField | None = None
) -> tuple[FieldPolynomial, bool]:
    """Solve q' + (A - n) q = p eigenspace by eigenspace.

    Blocks are enumerated from the support of p, plus the lam = n block when
    a nonzero free constant is supplied (the constant enters the solution
    even if nothing drives that eigenspace). Returns the level polynomial
    and whether the free-constant branch ran.
    """
    lams: set[int] = set()
    for c in p.coeffs():
        lams.update(eigenvalue(k) for k in c.support())
    if xi is not None and not xi.is_zero:
        lams.add(n)
    q = FieldPolynomial.zero()
    hit = False
    for lam in sorted(lams):
        block = p.map_coeffs(lambda c, lam=lam: eigenspace_project(c, lam))
        if lam == n:
            q = q + resolvent_solve(block, 0.0, xi if xi is not None else SpectralField.zero())
            hit = True
        else:
            q = q + resolvent_solve(block, float(lam - n))
    return q, hit


def build_expansion(
    force: ForceExpansion, levels: int, resonant=None
) -> ExpansionResult:
    """Construct expansion levels 1..levels for the given force.

    Levels are built in order; each one only needs the earlier ones through
    the quadratic interaction. Free constants for resonant levels come from
    `resonant` (mapping n -> field on the |k|^2 = n eigenspace), defaulting
    to zero. The result's level equations are re-checked independently and
    must hold to RESIDUAL_TOL relative.
    """
    levels = int(levels)
    if levels < 0:
        raise ValueError("levels must be >= 0")
    res = check_resonant_data(resonant)
    terms: list[ExpansionTerm] = []
    log: list[tuple[int, int]] = []
    for n in range(1, levels + 1):
        p = level_source(terms, force, n)
        q, hit = solve_level(p, n, res.get(n))
        if hit:
            log.append((n, n))
        terms.append(ExpansionTerm(n, q))
    residuals = {
        n: expansion_residual(terms, force, n) for n in range(1, levels + 1)
    }
    worst = max(residuals.values(), default=0.0)
    if worst > RESIDUAL_TOL:
        raise RuntimeError(
            f"level equations violated: max relative residual {worst:.3e} "
            f"(construction should be exact; this indicates a bug)"
        )
    return ExpansionResult(tuple(terms), residuals, tuple(log))


def _stokes_shift(c: SpectralField, n: int) -> SpectralField:
    """(A - n) applied to one coefficient field."""
    return SpectralField({k: v * float(eigenvalue(k) - n) for k, v in c.modes()})


def expansion_residual(terms, force: ForceExpansion, n: int) -> float:
    """Max relative coefficient defect of level n's equation, checked from scratch.

    Forms q_n' + (A - n) q_n + sum_{k+m=n} B~(q_k, q_m) - f_n and compares
    its largest coefficient against the largest coefficient of the operands,
    so an exactly-solved level reports rounding-level numbers regardless of
    the force's scale.
    """
    qmap = {term.n: term.poly for term in terms}
    qn = qmap.get(n, FieldPolynomial.zero())
    fn = force.level(n)
    interaction = FieldPolynomial.zero()
    for k in range(1, n):
        m = n - k
        qk, qm = qmap.get(k), qmap.get(m)
        if qk is None or qm is None or qk.is_zero or qm.is_zero:
            continue
        interaction = interaction + poly_bilinear(qk, qm)
    shifted = qn.map_coeffs(lambda c: _stokes_shift(c, n))
    r = qn.derivative() + shifted + interaction - fn
    scale = max(
        qn.derivative().max_abs(), shifted.max_abs(), interaction.max_abs(), fn.max_abs()
    )
    if scale == 0.0:
        return 0.0
    return r.max_abs() / scale


def finite_approximation_plan(
    alpha_star: float, mu_star: float, n_levels: int
) -> list[tuple[int, float, float]]:
    """Per-level regularity budget (n, alpha_n, mu_n) for an n_levels expansion.

    Each level costs half an order of smoothness in both indices:
    alpha_n = alpha_* - (n-1)/2 and mu_n = mu_* - (n-1)/2. Admissibility
    requires mu_* >= alpha_* >= n_levels / 2, so that even the deepest level
    retains a positive budget.
    """
    n_levels = int(n_levels)
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    if not (mu_star >= alpha_star):
        raise ValueError(
            f"inadmissible plan: need mu_* >= alpha_*, got mu_*={mu_star}, alpha_*={alpha_star}"
        )
    if not (alpha_star >= n_levels / 2):
        raise ValueError(
            f"inadmissible plan: need alpha_* >= n_levels/2 = {n_levels / 2}, "
            f"got alpha_*={alpha_star}; reduce the level count or raise the regularity"
        )
    return [
        (n, alpha_star - (n - 1) / 2, mu_star - (n - 1) / 2)
        for n in range(1, n_levels + 1)
    ]
