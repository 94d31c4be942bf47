"""Optimal dynamic-pricing policy value and large-market competition complexity.

The dynamic-programming value sequence G_0 = 0, G_{n+1} = E max(X, G_n) is
extended through its tail-integral form G_{n+1} = G_n + int_{G_n}^{omega_1}
(1 - F(u)) du, one quadrature per step.  The empirical competition complexity
of a distribution at market size n is the least m with G_m >= E max of n
draws, reported as m/n next to the closed-form constant
(1 - gamma) * Gamma(1 - gamma)^(1/gamma).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .distributions import DistributionModel, EvtFamily
from .errors import ConvergenceError, DivergenceError, DomainError
from .kernel import Interval, integrate

__all__ = [
    "PolicySequence",
    "CompetitionRecord",
    "extend_policy",
    "expected_max",
    "empirical_competition_complexity",
    "theoretical_cc",
    "cc_family_bounds",
    "quantile_policy_approx",
    "expected_max_approx",
    "competition_to_csv",
]

EULER_MASCHERONI = float(np.euler_gamma)

#: Below this tail mass at G_n the per-step quadrature tightens to 1e-12:
#: late increments are tiny and 1e-10 noise would swamp them.
_TIGHT_TAIL = 1e-6
_STEP_TOL = 1e-10
_STEP_TOL_TIGHT = 1e-12


@dataclass
class PolicySequence:
    """Append-only dynamic-programming values G_0..G_N for one model.

    Single writer: extension mutates the list in place; reading an already
    computed prefix from other threads is safe.
    """

    model: DistributionModel
    values: list[float] = field(default_factory=lambda: [0.0])

    def __post_init__(self):
        if self.model.evt_index().gamma >= 1:
            raise DivergenceError(
                "policy sequence diverges: the model has an infinite mean")
        if not self.values or self.values[0] != 0.0:
            raise DomainError("policy sequence must start at G_0 = 0")

    def value(self, n: int) -> float:
        """G_n, extending the sequence as needed."""
        extend_policy(self, n)
        return self.values[n]


def _policy_step(d: DistributionModel, g: float) -> float:
    """One increment int_g^{omega_1} (1 - F(u)) du."""
    hi = d.support.hi
    tail_mass = float(d.sf(g))
    if tail_mass <= 0.0 or g >= hi:
        return 0.0
    tol = _STEP_TOL_TIGHT if tail_mass < _TIGHT_TAIL else _STEP_TOL
    try:
        return integrate(lambda u: float(d.sf(u)), Interval(g, hi), tol=tol)
    except ConvergenceError as exc:
        # Power tails with shape below 2 cannot always meet an absolute
        # target in doubles; accept when negligible against the value itself.
        if exc.estimated_error <= 1e-9 * max(1.0, abs(g)):
            return exc.best_estimate
        raise


def extend_policy(seq: PolicySequence, up_to: int) -> PolicySequence:
    """Fill the value sequence through index up_to; returns the same object."""
    if up_to < 0:
        raise DomainError(f"extend_policy requires up_to >= 0, got {up_to}")
    while len(seq.values) <= up_to:
        g = seq.values[-1]
        seq.values.append(g + _policy_step(seq.model, g))
    return seq


def _survival_power(d: DistributionModel, t: float, n: int) -> float:
    """1 - F(t)^n without cancellation."""
    s = float(d.sf(t))
    if s >= 1.0:
        return 1.0
    if s <= 0.0:
        return 0.0
    return -math.expm1(n * math.log1p(-s))


def expected_max(d: DistributionModel, n: int, tol: float | None = None) -> float:
    """E max of n i.i.d. draws, as int over t >= 0 of (1 - F(t)^n)."""
    if n < 1:
        raise DomainError(f"expected_max requires n >= 1, got {n}")
    gamma = d.evt_index().gamma
    if gamma >= 1:
        raise DivergenceError(f"E(max) diverges for gamma={gamma:.4g}")
    dom = Interval(0.0, d.support.hi)
    if tol is not None:
        return integrate(lambda t: _survival_power(d, t, n), dom, tol=tol)
    try:
        return integrate(lambda t: _survival_power(d, t, n), dom, tol=1e-10)
    except ConvergenceError as exc:
        if exc.estimated_error <= 1e-7 * abs(exc.best_estimate):
            return exc.best_estimate
        raise


@dataclass(frozen=True)
class CompetitionRecord:
    """Empirical and theoretical competition complexity at one market size."""

    n: int
    m_star: int
    empirical_ratio: float
    theoretical: float
    gamma: float


def theoretical_cc(gamma: float) -> float:
    """Closed-form large-market competition complexity for index gamma < 1.

    At gamma = 0 the formula is taken in the limit: exp of the
    Euler-Mascheroni constant, about 1.781.
    """
    if gamma >= 1:
        raise DomainError(f"competition complexity requires gamma < 1, got {gamma}")
    if abs(gamma) <= 1e-8:
        return math.exp(EULER_MASCHERONI)
    return (1.0 - gamma) * math.exp(math.lgamma(1.0 - gamma) / gamma)


def empirical_competition_complexity(d: DistributionModel, n: int,
                                     seq: PolicySequence | None = None,
                                     ) -> CompetitionRecord:
    """Least m with G_m >= E(max of n draws), as a CompetitionRecord.

    Pass a PolicySequence to amortize the dynamic-programming extension
    across calls with increasing n; it must belong to the same model.
    """
    if n < 1:
        raise DomainError(f"requires n >= 1, got {n}")
    gamma = d.evt_index().gamma
    if gamma >= 1:
        raise DivergenceError(f"competition complexity needs gamma < 1, got {gamma}")
    if seq is None:
        seq = PolicySequence(d)
    elif seq.model != d:
        raise DomainError("policy sequence belongs to a different model")
    target = expected_max(d, n)
    theoretical = theoretical_cc(gamma)
    cap = int(math.ceil(10.0 * n * theoretical))
    m = 1
    while seq.value(m) < target:
        m += 1
        if m > cap:
            raise ConvergenceError(
                f"policy sequence failed to reach E(max of {n}) within {cap} steps",
                seq.values[-1], target - seq.values[-1])
    return CompetitionRecord(n, m, m / n, theoretical, gamma)


def cc_family_bounds(family: EvtFamily) -> tuple[float, float]:
    """Range of the competition complexity over one extreme-value family."""
    e_gamma = math.exp(EULER_MASCHERONI)
    if family is EvtFamily.FRECHET:
        return 1.0, e_gamma
    if family is EvtFamily.GUMBEL:
        return e_gamma, e_gamma
    return e_gamma, math.e


def quantile_policy_approx(d: DistributionModel, n: int) -> float:
    """Quantile approximation F^{-1}(1 - (1 - gamma)/(n + 1)) of G_n."""
    gamma = d.evt_index().gamma
    if gamma >= 1:
        raise DomainError(f"approximation requires gamma < 1, got {gamma}")
    return float(d.quantile(1.0 - (1.0 - gamma) / (n + 1.0)))


def expected_max_approx(d: DistributionModel, n: int) -> float:
    """Family-specific closed approximation of E(max of n draws)."""
    ev = d.evt_index()
    gamma = ev.gamma
    if gamma >= 1:
        raise DomainError(f"approximation requires gamma < 1, got {gamma}")
    if ev.family is EvtFamily.FRECHET:
        return math.gamma(1.0 - gamma) * float(d.quantile(1.0 - 1.0 / n))
    if ev.family is EvtFamily.GUMBEL:
        return float(d.quantile(1.0 - math.exp(-EULER_MASCHERONI) / n))
    hi = d.support.hi
    return hi - math.gamma(1.0 - gamma) * (hi - float(d.quantile(1.0 - 1.0 / n)))


def competition_to_csv(records: Iterable[CompetitionRecord]) -> str:
    out = io.StringIO()
    out.write("n,m_star,empirical_ratio,theoretical,gamma\n")
    for r in records:
        out.write(f"{r.n},{r.m_star},{r.empirical_ratio:.12g},"
                  f"{r.theoretical:.12g},{r.gamma:.12g}\n")
    return out.getvalue()
