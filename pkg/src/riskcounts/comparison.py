"""Exact comparison of two independent count distributions.

Translates per-person relative risk into population-level statements: the
probability one arm produces more cases than the other, the ratio of
at-least-one-case probabilities ("effective" relative risk), counterfactual
all-low totals, and the bounds on how many cases removing an exposure could
possibly avert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import (
    DEFAULT_EPS,
    CountDistribution,
    CredibleInterval,
    DomainError,
    _check_count,
    _check_eps,
    _check_probability,
    binomial_distribution,
    central_interval,
    convolve,
    mode,
)

__all__ = [
    "MAX_POPULATION",
    "ExposureScenario",
    "BoundedProbability",
    "ComparisonSummary",
    "SplitComparison",
    "LivesSavedBounds",
    "prob_greater",
    "prob_equal",
    "prob_less",
    "summarize",
    "counterfactual_all_low",
    "split_vs_counterfactual",
    "lives_saved_bounds",
    "observed_comparison",
    "more_in_high",
    "times_as_many",
]

#: Populations are plain machine integers; this covers national scale.
MAX_POPULATION = 2**32 - 1

#: Comparison summaries promise their three probabilities sum to 1 +- 1e-8,
#: which requires the arm truncations to stay below that.
_SUMMARY_MAX_EPS = 1e-9


@dataclass(frozen=True)
class ExposureScenario:
    """Two-arm population: sizes and per-person disease probabilities."""

    n_exposed: int
    n_unexposed: int
    p_exposed: float
    p_unexposed: float

    def __post_init__(self) -> None:
        for name in ("n_exposed", "n_unexposed"):
            v = _check_count(getattr(self, name), name, minimum=1)
            if v > MAX_POPULATION:
                raise DomainError(f"{name} exceeds the {MAX_POPULATION} cap")
            object.__setattr__(self, name, v)
        for name in ("p_exposed", "p_unexposed"):
            object.__setattr__(self, name, _check_probability(getattr(self, name), name))


@dataclass(frozen=True)
class BoundedProbability:
    """A probability together with an explicit truncation error bound."""

    value: float
    error_bound: float

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class ComparisonSummary:
    """Population-level comparison of the two arms of a scenario.

    ``per_person_rr`` and ``effective_rr`` are None when their ratios are
    0/0 — the distinction between "equal risks" and "no risk at all" is
    kept visible rather than defined away.
    """

    p_exposed_more: float
    p_equal: float
    p_unexposed_more: float
    per_person_rr: float | None
    effective_rr: float | None
    p_nobody_exposed: float
    p_nobody_unexposed: float
    error_bound: float

    def __post_init__(self) -> None:
        total = self.p_exposed_more + self.p_equal + self.p_unexposed_more
        if abs(total - 1.0) > 1e-8:
            raise DomainError(f"comparison triple sums to {total!r}, not 1")

    @property
    def effective_rr_defined(self) -> bool:
        return self.effective_rr is not None


# ---------------------------------------------------------------------------
# exceedance probabilities
# ---------------------------------------------------------------------------


def _below_lookup(d: CountDistribution, counts: np.ndarray) -> np.ndarray:
    """Stored P(D < k) for an integer array of counts."""
    cdf = d._cdf
    idx = counts - d.support_lo  # P(D < k) = cdf[k - lo - 1]
    out = np.zeros(len(counts), dtype=np.float64)
    inside = idx >= 1
    out[inside] = cdf[np.minimum(idx[inside], len(cdf)) - 1]
    return out


def _above_lookup(d: CountDistribution, counts: np.ndarray) -> np.ndarray:
    """Stored P(D > k), using a suffix sum so small tails keep precision."""
    suffix = np.cumsum(d.masses[::-1])[::-1]  # suffix[i] = P(D >= lo + i)
    idx = counts - d.support_lo + 1  # P(D > k) = suffix[k - lo + 1]
    out = np.zeros(len(counts), dtype=np.float64)
    below_window = idx < 0
    out[below_window] = suffix[0]
    inside = (idx >= 0) & (idx < len(suffix))
    out[inside] = suffix[idx[inside]]
    return out


def prob_greater(x: CountDistribution, y: CountDistribution) -> BoundedProbability:
    """P(X > Y) for independent X, Y, with its truncation error bound.

    The sum runs over the smaller support and uses prefix/suffix CDFs of
    the other distribution, so cost is linear in the two window sizes.
    """
    bound = x.truncated_mass + y.truncated_mass
    nx = x.support_hi - x.support_lo + 1
    ny = y.support_hi - y.support_lo + 1
    if nx <= ny:
        ks = np.arange(x.support_lo, x.support_hi + 1)
        value = float(np.dot(x.masses, _below_lookup(y, ks)))
    else:
        ks = np.arange(y.support_lo, y.support_hi + 1)
        value = float(np.dot(y.masses, _above_lookup(x, ks)))
    return BoundedProbability(value=value, error_bound=bound)


def prob_equal(x: CountDistribution, y: CountDistribution) -> BoundedProbability:
    bound = x.truncated_mass + y.truncated_mass
    lo = max(x.support_lo, y.support_lo)
    hi = min(x.support_hi, y.support_hi)
    if lo > hi:
        return BoundedProbability(value=0.0, error_bound=bound)
    xs = x.masses[lo - x.support_lo : hi - x.support_lo + 1]
    ys = y.masses[lo - y.support_lo : hi - y.support_lo + 1]
    return BoundedProbability(value=float(np.dot(xs, ys)), error_bound=bound)


def prob_less(x: CountDistribution, y: CountDistribution) -> BoundedProbability:
    return prob_greater(y, x)


# ---------------------------------------------------------------------------
# scenario-level summaries
# ---------------------------------------------------------------------------


def _p_at_least_one(n: int, p: float) -> float:
    """1 - (1-p)^n, exact at the extremes and stable for tiny p."""
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    return -math.expm1(n * math.log1p(-p))


def _p_nobody(n: int, p: float) -> float:
    """(1-p)^n computed in log space, so huge-n cases underflow gracefully
    to a subnormal instead of cancelling against 1."""
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    return math.exp(n * math.log1p(-p))


def _ratio_or_none(num: float, den: float) -> float | None:
    if num == 0.0 and den == 0.0:
        return None
    if den == 0.0:
        return math.inf
    return num / den


def summarize(s: ExposureScenario, eps: float = DEFAULT_EPS) -> ComparisonSummary:
    """Build both arm distributions and fill every summary field.

    ``eps`` is capped at 1e-9 here (tighter than the general constructor
    limit) so the triple's sum-to-one promise survives truncation.
    """
    eps = _check_eps(eps)
    if eps > _SUMMARY_MAX_EPS:
        raise DomainError(
            f"summaries require eps <= {_SUMMARY_MAX_EPS} to meet their "
            f"sum-to-one contract, got {eps!r}"
        )
    x = binomial_distribution(s.n_exposed, s.p_exposed, eps)
    y = binomial_distribution(s.n_unexposed, s.p_unexposed, eps)
    greater = prob_greater(x, y)
    equal = prob_equal(x, y)
    less = prob_less(x, y)
    some_e = _p_at_least_one(s.n_exposed, s.p_exposed)
    some_u = _p_at_least_one(s.n_unexposed, s.p_unexposed)
    return ComparisonSummary(
        p_exposed_more=greater.value,
        p_equal=equal.value,
        p_unexposed_more=less.value,
        per_person_rr=_ratio_or_none(s.p_exposed, s.p_unexposed),
        effective_rr=_ratio_or_none(some_e, some_u),
        p_nobody_exposed=_p_nobody(s.n_exposed, s.p_exposed),
        p_nobody_unexposed=_p_nobody(s.n_unexposed, s.p_unexposed),
        error_bound=greater.error_bound,
    )


def counterfactual_all_low(s: ExposureScenario, eps: float = DEFAULT_EPS) -> CountDistribution:
    """Total-case distribution if the whole population had the unexposed risk."""
    return binomial_distribution(s.n_exposed + s.n_unexposed, s.p_unexposed, eps)


@dataclass(frozen=True)
class SplitComparison:
    """Split-exposure total versus the all-low counterfactual total."""

    p_split_more: float
    p_equal: float
    p_all_low_more: float
    error_bound: float
    mode_split: int
    mode_all_low: int
    split: CountDistribution
    all_low: CountDistribution


def split_vs_counterfactual(s: ExposureScenario, eps: float = DEFAULT_EPS) -> SplitComparison:
    eps = _check_eps(eps)
    if eps > _SUMMARY_MAX_EPS:
        raise DomainError(
            f"summaries require eps <= {_SUMMARY_MAX_EPS} to meet their "
            f"sum-to-one contract, got {eps!r}"
        )
    arm_e = binomial_distribution(s.n_exposed, s.p_exposed, eps / 4.0)
    arm_u = binomial_distribution(s.n_unexposed, s.p_unexposed, eps / 4.0)
    split = convolve(arm_e, arm_u, eps / 4.0)
    all_low = counterfactual_all_low(s, eps)
    return _split_comparison(split, all_low)


def _split_comparison(split: CountDistribution, all_low: CountDistribution) -> SplitComparison:
    greater = prob_greater(split, all_low)
    equal = prob_equal(split, all_low)
    less = prob_less(split, all_low)
    return SplitComparison(
        p_split_more=greater.value,
        p_equal=equal.value,
        p_all_low_more=less.value,
        error_bound=greater.error_bound,
        mode_split=mode(split),
        mode_all_low=mode(all_low),
        split=split,
        all_low=all_low,
    )


@dataclass(frozen=True)
class LivesSavedBounds:
    """Cap on the cases avertable by eliminating the exposure.

    ``best_case`` spans the extreme ends of the two coverage intervals —
    the split total's upper end minus the all-low total's lower end — and
    ``tail_prob_best_case`` reports how unlikely that upper end even is.
    A negative ``most_likely`` means harm rather than saving and is
    reported as-is.
    """

    best_case: int
    most_likely: int
    tail_prob_best_case: float
    split_interval: CredibleInterval
    all_low_interval: CredibleInterval


def lives_saved_bounds(
    s: ExposureScenario, coverage: float, eps: float = DEFAULT_EPS
) -> LivesSavedBounds:
    comp = split_vs_counterfactual(s, eps)
    split_iv = central_interval(comp.split, coverage)
    low_iv = central_interval(comp.all_low, coverage)
    suffix = np.cumsum(comp.split.masses[::-1])[::-1]
    tail = float(suffix[split_iv.hi - comp.split.support_lo])
    return LivesSavedBounds(
        best_case=split_iv.hi - low_iv.lo,
        most_likely=comp.mode_split - comp.mode_all_low,
        tail_prob_best_case=tail,
        split_interval=split_iv,
        all_low_interval=low_iv,
    )


# ---------------------------------------------------------------------------
# observed data
# ---------------------------------------------------------------------------


def more_in_high(high_cases: int, low_cases: int) -> bool:
    return high_cases > low_cases


def times_as_many(factor: float) -> Callable[[int, int], bool]:
    """Predicate: the high count is at least ``factor`` times the low one."""

    def predicate(high_cases: int, low_cases: int) -> bool:
        return high_cases >= factor * low_cases

    return predicate


def observed_comparison(
    high_cases: int, low_cases: int, predicate: Callable[[int, int], bool]
) -> float:
    """Probability that an already-observed comparison holds: exactly 0 or 1.

    Once both counts are known there is nothing left to be uncertain about,
    so no probability model is consulted and no intermediate value is ever
    returned.
    """
    high_cases = _check_count(high_cases, "high_cases")
    low_cases = _check_count(low_cases, "low_cases")
    return 1.0 if predicate(high_cases, low_cases) else 0.0
