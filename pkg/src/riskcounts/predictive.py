"""Parameter uncertainty via conjugate beta updating.

Replaces each arm's plug-in binomial with the closed-form posterior
predictive (beta-binomial) law, measures how much the high-coverage spread
grows, and calibrates a prior's concentration to hit a requested spread
ratio.  No sampling or quadrature is involved anywhere on the main path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .distributions import (
    DEFAULT_EPS,
    BetaParams,
    CountDistribution,
    DomainError,
    _check_count,
    _check_eps,
    _check_probability,
    beta_binomial_distribution,
    binomial_distribution,
    central_interval,
    convolve,
)
from .comparison import (
    MAX_POPULATION,
    ExposureScenario,
    SplitComparison,
    _split_comparison,
)

__all__ = [
    "CONCENTRATION_BOUNDS",
    "CalibrationError",
    "UncertainScenario",
    "SpreadReport",
    "posterior_update",
    "predictive_arms",
    "spread_report",
    "spread_reports",
    "calibrate_prior",
    "calibrated_scenario",
    "split_vs_counterfactual",
]

#: Concentration range searched by ``calibrate_prior``.
CONCENTRATION_BOUNDS = (10.0, 1e12)

#: Spread-ratio tolerance; interval widths are integer counts, so finer
#: targets would be meaningless.
_RATIO_TOL = 0.01

_MAX_BISECTIONS = 200


class CalibrationError(ValueError):
    """The requested spread ratio is unreachable within the concentration bounds."""


@dataclass(frozen=True)
class UncertainScenario:
    """Two-arm scenario with beta uncertainty on each per-person probability."""

    n_exposed: int
    n_unexposed: int
    prior_exposed: BetaParams
    prior_unexposed: BetaParams

    def __post_init__(self) -> None:
        for name in ("n_exposed", "n_unexposed"):
            v = _check_count(getattr(self, name), name, minimum=1)
            if v > MAX_POPULATION:
                raise DomainError(f"{name} exceeds the {MAX_POPULATION} cap")
            object.__setattr__(self, name, v)
        for name in ("prior_exposed", "prior_unexposed"):
            if not isinstance(getattr(self, name), BetaParams):
                raise DomainError(f"{name} must be a BetaParams instance")


@dataclass(frozen=True)
class SpreadReport:
    """Predictive versus plug-in interval width at one coverage level.

    ``ratio`` is None (flagged) when the plug-in width is zero.
    """

    width_predictive: int
    width_plugin: int
    ratio: float | None


def posterior_update(prior: BetaParams, successes: int, trials: int) -> BetaParams:
    """Conjugate update: add observed successes/failures as pseudo-counts."""
    successes = _check_count(successes, "successes")
    trials = _check_count(trials, "trials")
    if successes > trials:
        raise DomainError(f"successes {successes} exceed trials {trials}")
    return BetaParams(prior.alpha + successes, prior.beta + trials - successes)


def predictive_arms(
    u: UncertainScenario, eps: float = DEFAULT_EPS
) -> tuple[CountDistribution, CountDistribution]:
    """Posterior predictive count law for each arm (exposed, unexposed)."""
    return (
        beta_binomial_distribution(u.n_exposed, u.prior_exposed, eps),
        beta_binomial_distribution(u.n_unexposed, u.prior_unexposed, eps),
    )


def spread_report(
    n: int, prior: BetaParams, coverage: float = 0.9999, eps: float = DEFAULT_EPS
) -> SpreadReport:
    """Interval-width ratio of the predictive law over the plug-in binomial.

    The plug-in law is the binomial evaluated at the prior mean; both widths
    are measured at the same equal-tail coverage.
    """
    predictive = beta_binomial_distribution(n, prior, eps)
    plugin = binomial_distribution(n, prior.mean, eps)
    w_pred = central_interval(predictive, coverage).width
    w_plug = central_interval(plugin, coverage).width
    ratio = w_pred / w_plug if w_plug > 0 else None
    return SpreadReport(width_predictive=w_pred, width_plugin=w_plug, ratio=ratio)


def spread_reports(
    u: UncertainScenario, coverage: float = 0.9999, eps: float = DEFAULT_EPS
) -> tuple[SpreadReport, SpreadReport]:
    """Per-arm spread reports for a scenario (exposed, unexposed)."""
    return (
        spread_report(u.n_exposed, u.prior_exposed, coverage, eps),
        spread_report(u.n_unexposed, u.prior_unexposed, coverage, eps),
    )


def calibrate_prior(
    n: int,
    p_mean: float,
    target_ratio: float,
    coverage: float = 0.9999,
    eps: float = DEFAULT_EPS,
) -> BetaParams:
    """Find the beta prior with mean ``p_mean`` whose predictive spread is
    ``target_ratio`` times the plug-in spread.

    The prior mean is held fixed and the concentration alpha+beta is found
    by bisection in log-space; the spread ratio is monotone nonincreasing
    in concentration, and the search is fully deterministic.  Because the
    widths are integer counts the ratio moves in steps; if no step lands
    within 0.01 of the target inside the concentration bounds, calibration
    fails explicitly rather than returning a silently-off prior.
    """
    n = _check_count(n, "n", minimum=1)
    p_mean = _check_probability(p_mean, "p_mean")
    if not (0.0 < p_mean < 1.0):
        raise DomainError("p_mean must be strictly inside (0, 1) to calibrate")
    target_ratio = float(target_ratio)
    if not (target_ratio >= 1.0 and math.isfinite(target_ratio)):
        raise DomainError(f"target_ratio must be >= 1, got {target_ratio!r}")
    eps = _check_eps(eps)

    lo_c, hi_c = CONCENTRATION_BOUNDS
    if target_ratio == 1.0:
        warnings.warn(
            "target_ratio 1 is the no-uncertainty limit; returning the "
            "concentration cap",
            UserWarning,
            stacklevel=2,
        )
        return BetaParams(hi_c * p_mean, hi_c * (1.0 - p_mean))

    w_plug = central_interval(binomial_distribution(n, p_mean, eps), coverage).width
    if w_plug == 0:
        raise DomainError("plug-in interval width is zero; no ratio to target")

    def ratio_at(c: float) -> float:
        prior = BetaParams(c * p_mean, c * (1.0 - p_mean))
        w = central_interval(beta_binomial_distribution(n, prior, eps), coverage).width
        return w / w_plug

    best_c, best_r = lo_c, ratio_at(lo_c)
    if target_ratio > best_r + _RATIO_TOL:
        raise CalibrationError(
            f"target ratio {target_ratio} exceeds the maximum {best_r:.4g} "
            f"reachable at concentration {lo_c}"
        )
    lo, hi = lo_c, hi_c
    for _ in range(_MAX_BISECTIONS):
        if abs(best_r - target_ratio) <= _RATIO_TOL:
            return BetaParams(best_c * p_mean, best_c * (1.0 - p_mean))
        mid = math.sqrt(lo * hi)
        r = ratio_at(mid)
        if abs(r - target_ratio) < abs(best_r - target_ratio):
            best_c, best_r = mid, r
        if r > target_ratio:
            lo = mid
        else:
            hi = mid
    if abs(best_r - target_ratio) <= _RATIO_TOL:
        return BetaParams(best_c * p_mean, best_c * (1.0 - p_mean))
    raise CalibrationError(
        f"no concentration in [{lo_c:g}, {hi_c:g}] reaches spread ratio "
        f"{target_ratio} +- {_RATIO_TOL} (closest: {best_r:.4g} at "
        f"concentration {best_c:.6g})"
    )


def calibrated_scenario(
    s: ExposureScenario,
    target_ratio: float,
    coverage: float = 0.9999,
    eps: float = DEFAULT_EPS,
) -> UncertainScenario:
    """Lift a certain-parameter scenario by calibrating each arm's prior
    independently to the same spread-ratio target."""
    return UncertainScenario(
        n_exposed=s.n_exposed,
        n_unexposed=s.n_unexposed,
        prior_exposed=calibrate_prior(s.n_exposed, s.p_exposed, target_ratio, coverage, eps),
        prior_unexposed=calibrate_prior(
            s.n_unexposed, s.p_unexposed, target_ratio, coverage, eps
        ),
    )


def split_vs_counterfactual(u: UncertainScenario, eps: float = DEFAULT_EPS) -> SplitComparison:
    """Predictive split-exposure total versus the predictive all-low total.

    The all-low counterfactual applies the unexposed arm's uncertain
    per-person probability to the whole population.
    """
    eps = _check_eps(eps)
    arm_e = beta_binomial_distribution(u.n_exposed, u.prior_exposed, eps / 4.0)
    arm_u = beta_binomial_distribution(u.n_unexposed, u.prior_unexposed, eps / 4.0)
    split = convolve(arm_e, arm_u, eps / 4.0)
    all_low = beta_binomial_distribution(
        u.n_exposed + u.n_unexposed, u.prior_unexposed, eps
    )
    return _split_comparison(split, all_low)
