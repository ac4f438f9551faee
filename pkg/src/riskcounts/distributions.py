"""Truncated discrete count distributions, stored in log-space.

Binomial, Poisson, and beta-binomial laws over populations up to ~1e8 are
represented on a finite support window.  Whatever probability falls outside
the window is carried explicitly in ``truncated_mass`` instead of being
renormalised away, so every downstream probability comes with an honest
error bound.

Numerical approach
------------------
Filling a window of log-probabilities naively from a log-gamma identity
loses absolute precision once the arguments reach 1e6-1e9 (the log-pmf is a
small difference of terms of magnitude ~1e7).  Instead, each window is
filled from a single high-precision anchor value at (or near) the mode,
extended over the window by cumulative sums of per-step log ratios

    log pmf(k+1) - log pmf(k) = log r(k),

where each ``r(k)`` is formed as one double-precision quotient before the
log is taken.  Each step then contributes ~1 ulp of absolute log error and
the window total stays accurate to ~1e-13 even for windows of 1e5+ points,
comfortably inside the 1e-9 mass-identity contract enforced below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np

__all__ = [
    "DEFAULT_EPS",
    "MAX_EPS",
    "DomainError",
    "BetaParams",
    "CountDistribution",
    "CredibleInterval",
    "binomial_log_pmf",
    "binomial_distribution",
    "poisson_distribution",
    "beta_binomial_distribution",
    "convolve",
    "mode",
    "quantile",
    "central_interval",
]

#: Default omitted-tail budget.  Reports quote 99.99% intervals and ~1e-5
#: tail events, so the stored mass must resolve 1e-5 with guard digits.
DEFAULT_EPS = 1e-12

#: Coarsest truncation any constructor accepts.
MAX_EPS = 1e-6

#: Tolerance of the mass identity  sum(exp(log_mass)) + truncated_mass = 1.
MASS_IDENTITY_TOL = 1e-9

#: Decimal digits used for the anchor log-pmf evaluation.
_ANCHOR_DPS = 40

#: Half-width of the initial support bracket, in standard deviations.
_BRACKET_SIGMAS = 12.0

#: Hard cap on stored support points (desk-scale memory).
_MAX_SUPPORT_POINTS = 20_000_000


class DomainError(ValueError):
    """An argument lies outside the operation's documented domain."""


# ---------------------------------------------------------------------------
# validation helpers
# ---------------------------------------------------------------------------


def _check_probability(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):  # also rejects NaN
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def _check_count(value: int, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return value


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not (0.0 < eps <= MAX_EPS):
        raise DomainError(f"eps must lie in (0, {MAX_EPS}], got {eps!r}")
    return eps


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaParams:
    """Pseudo-count parameters of a beta law on a per-person probability."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            v = float(getattr(self, name))
            if not (v > 0.0 and math.isfinite(v)):
                raise DomainError(f"{name} must be finite and > 0, got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def concentration(self) -> float:
        return self.alpha + self.beta


_KINDS = ("binomial", "poisson", "beta-binomial", "convolution")


@dataclass(frozen=True)
class CountDistribution:
    """A law over case counts on the window ``support_lo..support_hi``.

    ``log_mass[i]`` is the log-probability of count ``support_lo + i``.  The
    mass identity  ``sum(exp(log_mass)) + truncated_mass == 1``  holds to
    within 1e-9 and is enforced at construction time.
    """

    kind: str
    support_lo: int
    support_hi: int
    log_mass: np.ndarray
    truncated_mass: float

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise DomainError(f"unknown distribution kind {self.kind!r}")
        lo = _check_count(self.support_lo, "support_lo")
        hi = _check_count(self.support_hi, "support_hi")
        if lo > hi:
            raise DomainError(f"support_lo {lo} exceeds support_hi {hi}")
        arr = np.asarray(self.log_mass, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] != hi - lo + 1:
            raise DomainError("log_mass length must equal the support size")
        if not np.all(np.isfinite(arr)):
            raise DomainError("every stored log_mass must be finite")
        trunc = float(self.truncated_mass)
        if not (0.0 <= trunc <= 1.0):
            raise DomainError(f"truncated_mass must lie in [0, 1], got {trunc!r}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "support_lo", lo)
        object.__setattr__(self, "support_hi", hi)
        object.__setattr__(self, "log_mass", arr)
        object.__setattr__(self, "truncated_mass", trunc)
        total = math.fsum(np.exp(arr)) + trunc
        if abs(total - 1.0) > MASS_IDENTITY_TOL:
            raise DomainError(
                f"mass identity violated: stored+truncated = {total!r}"
            )

    # -- derived views ------------------------------------------------

    @cached_property
    def masses(self) -> np.ndarray:
        """Linear-space masses over the support window (read-only)."""
        m = np.exp(self.log_mass)
        m.setflags(write=False)
        return m

    @cached_property
    def _cdf(self) -> np.ndarray:
        c = np.cumsum(self.masses)
        c.setflags(write=False)
        return c

    @property
    def stored_mass(self) -> float:
        return float(self._cdf[-1])

    def pmf(self, k: int) -> float:
        if self.support_lo <= k <= self.support_hi:
            return float(self.masses[k - self.support_lo])
        return 0.0

    def log_pmf(self, k: int) -> float:
        if self.support_lo <= k <= self.support_hi:
            return float(self.log_mass[k - self.support_lo])
        return -math.inf

    def cdf(self, k: int) -> float:
        """Stored mass at counts <= k (true CDF differs by <= truncated_mass)."""
        if k < self.support_lo:
            return 0.0
        if k >= self.support_hi:
            return self.stored_mass
        return float(self._cdf[k - self.support_lo])

    def mean(self) -> float:
        ks = np.arange(self.support_lo, self.support_hi + 1, dtype=np.float64)
        return float(np.dot(ks, self.masses))

    def variance(self) -> float:
        ks = np.arange(self.support_lo, self.support_hi + 1, dtype=np.float64)
        mu = self.mean()
        return float(np.dot((ks - mu) ** 2, self.masses))


@dataclass(frozen=True)
class CredibleInterval:
    """A count interval with requested and actually-achieved coverage."""

    lo: int
    hi: int
    coverage: float
    achieved: float

    @property
    def width(self) -> int:
        return self.hi - self.lo


# ---------------------------------------------------------------------------
# pointwise log-pmf
# ---------------------------------------------------------------------------


def binomial_log_pmf(n: int, p: float, k: int) -> float:
    """log P(K = k) for K ~ Binomial(n, p).

    Degenerate probabilities are handled exactly: p == 0 puts certainty at
    k == 0 (symmetrically p == 1 at k == n), never a NaN.
    """
    n = _check_count(n, "n")
    k = _check_count(k, "k")
    p = _check_probability(p, "p")
    if k > n:
        raise DomainError(f"k must satisfy k <= n, got k={k}, n={n}")
    if p == 0.0:
        return 0.0 if k == 0 else -math.inf
    if p == 1.0:
        return 0.0 if k == n else -math.inf
    choose = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    return choose + k * math.log(p) + (n - k) * math.log1p(-p)


# ---------------------------------------------------------------------------
# window construction machinery
# ---------------------------------------------------------------------------


def _point_mass(kind: str, k: int) -> CountDistribution:
    return CountDistribution(
        kind=kind,
        support_lo=k,
        support_hi=k,
        log_mass=np.zeros(1),
        truncated_mass=0.0,
    )


def _fill_window(lo: int, hi: int, anchor_k: int, anchor_log: float, log_ratio) -> np.ndarray:
    """Fill log-pmf on lo..hi from one anchor value and the step ratios.

    ``log_ratio(ks)`` must return log(pmf(k+1)/pmf(k)) for an integer array.
    """
    out = np.empty(hi - lo + 1, dtype=np.float64)
    idx = anchor_k - lo
    out[idx] = anchor_log
    if hi > anchor_k:
        steps = log_ratio(np.arange(anchor_k, hi, dtype=np.float64))
        out[idx + 1 :] = anchor_log + np.cumsum(steps)
    if anchor_k > lo:
        steps = log_ratio(np.arange(anchor_k - 1, lo - 1, -1, dtype=np.float64))
        out[idx - 1 :: -1] = anchor_log - np.cumsum(steps)
    return out


def _geometric_tail_bound(edge_log_mass: float, log_r: float) -> float:
    """Upper bound on the tail mass beyond a window edge.

    Valid when the pmf step ratios beyond the edge never exceed ``r``; the
    tail is then dominated by edge_mass * (r + r^2 + ...) = edge_mass *
    r / (1 - r) for r < 1.
    """
    if log_r >= 0.0:
        return math.inf
    r = math.exp(log_r)
    return math.exp(edge_log_mass) * r / (1.0 - r)


def _build_windowed(
    kind: str,
    mean: float,
    sd: float,
    n_max: int | None,
    log_ratio,
    anchor_fn,
    anchor_at: int,
    eps: float,
    monotone_lo: bool = True,
    monotone_hi: bool = True,
) -> CountDistribution:
    """Shared bracket-fill-verify-widen loop for all window constructors.

    ``monotone_lo`` / ``monotone_hi`` declare that the step ratios are
    nonincreasing past the respective edge (log-concave pmf), which is what
    makes the geometric tail bound rigorous.  A side without that guarantee
    is extended to its domain edge outright.
    """
    top = n_max if n_max is not None else None
    spread = max(_BRACKET_SIGMAS * sd, 8.0)
    lo = max(0, math.floor(mean - spread) - 2)
    hi = math.ceil(mean + spread) + 2
    if top is not None:
        hi = min(hi, top)
    if not monotone_lo:
        lo = 0
    if not monotone_hi:
        if top is None:
            raise DomainError("unbounded support requires monotone tail ratios")
        hi = top

    per_side = eps / 4.0
    step = max(64, math.ceil(4.0 * sd))
    for _ in range(128):
        if hi - lo + 1 > _MAX_SUPPORT_POINTS:
            raise DomainError(
                f"support window of {hi - lo + 1} points exceeds the "
                f"{_MAX_SUPPORT_POINTS}-point cap; the eps contract cannot be "
                "met at desk scale for these parameters"
            )
        anchor_k = min(max(anchor_at, lo), hi)
        log_mass = _fill_window(lo, hi, anchor_k, anchor_fn(anchor_k), log_ratio)

        ok_lo = lo == 0
        if not ok_lo:
            down = -float(log_ratio(np.array([lo - 1.0]))[0])
            ok_lo = _geometric_tail_bound(float(log_mass[0]), down) <= per_side
        ok_hi = top is not None and hi == top
        if not ok_hi:
            up = float(log_ratio(np.array([float(hi)]))[0])
            ok_hi = _geometric_tail_bound(float(log_mass[-1]), up) <= per_side
        if ok_lo and ok_hi:
            break
        if not ok_lo:
            lo = max(0, lo - step)
        if not ok_hi:
            hi = hi + step if top is None else min(top, hi + step)
        step *= 2
    else:  # pragma: no cover - the widening loop reaches a domain edge first
        raise DomainError("support bracketing failed to satisfy the eps contract")

    stored = math.fsum(np.exp(log_mass))
    truncated = min(max(1.0 - stored, 0.0), eps)
    return CountDistribution(
        kind=kind,
        support_lo=lo,
        support_hi=hi,
        log_mass=log_mass,
        truncated_mass=truncated,
    )


# The anchor evaluations are the one place extended precision is needed:
# a double-precision log-gamma difference at arguments ~1e6-1e9 carries an
# absolute error far above what the mass identity tolerates.


def _binomial_anchor(n: int, p: float):
    def anchor(k: int) -> float:
        with mpmath.workdps(_ANCHOR_DPS):
            x = mpmath.mpf(p)
            v = (
                mpmath.loggamma(n + 1)
                - mpmath.loggamma(k + 1)
                - mpmath.loggamma(n - k + 1)
                + k * mpmath.log(x)
                + (n - k) * mpmath.log(1 - x)
            )
            return float(v)

    return anchor


def _poisson_anchor(lam: float):
    def anchor(k: int) -> float:
        with mpmath.workdps(_ANCHOR_DPS):
            x = mpmath.mpf(lam)
            return float(-x + k * mpmath.log(x) - mpmath.loggamma(k + 1))

    return anchor


def _beta_binomial_anchor(n: int, a: float, b: float):
    def anchor(k: int) -> float:
        with mpmath.workdps(_ANCHOR_DPS):
            aa = mpmath.mpf(a)
            bb = mpmath.mpf(b)
            v = (
                mpmath.loggamma(n + 1)
                - mpmath.loggamma(k + 1)
                - mpmath.loggamma(n - k + 1)
                + _log_beta(k + aa, n - k + bb)
                - _log_beta(aa, bb)
            )
            return float(v)

    return anchor


def _log_beta(x, y):
    return mpmath.loggamma(x) + mpmath.loggamma(y) - mpmath.loggamma(x + y)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def binomial_distribution(n: int, p: float, eps: float = DEFAULT_EPS) -> CountDistribution:
    """Binomial(n, p) on a window whose omitted two-sided tail is <= eps."""
    n = _check_count(n, "n")
    p = _check_probability(p, "p")
    eps = _check_eps(eps)
    if n == 0 or p == 0.0:
        return _point_mass("binomial", 0)
    if p == 1.0:
        return _point_mass("binomial", n)

    q = 1.0 - p

    def log_ratio(ks: np.ndarray) -> np.ndarray:
        return np.log((n - ks) * p / ((ks + 1.0) * q))

    return _build_windowed(
        kind="binomial",
        mean=n * p,
        sd=math.sqrt(n * p * q),
        n_max=n,
        log_ratio=log_ratio,
        anchor_fn=_binomial_anchor(n, p),
        anchor_at=min(int((n + 1) * p), n),
        eps=eps,
    )


def poisson_distribution(lam: float, eps: float = DEFAULT_EPS) -> CountDistribution:
    """Poisson(lam) on a window whose omitted tail mass is <= eps."""
    lam = float(lam)
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be finite and >= 0, got {lam!r}")
    eps = _check_eps(eps)
    if lam == 0.0:
        return _point_mass("poisson", 0)

    def log_ratio(ks: np.ndarray) -> np.ndarray:
        return np.log(lam / (ks + 1.0))

    return _build_windowed(
        kind="poisson",
        mean=lam,
        sd=math.sqrt(lam),
        n_max=None,
        log_ratio=log_ratio,
        anchor_fn=_poisson_anchor(lam),
        anchor_at=int(lam),
        eps=eps,
    )


def beta_binomial_distribution(
    n: int, prior: BetaParams, eps: float = DEFAULT_EPS
) -> CountDistribution:
    """Beta-binomial: a binomial whose p is integrated over ``prior``.

    pmf(k) = C(n,k) * B(k+alpha, n-k+beta) / B(alpha, beta), evaluated in
    log-space.  For alpha < 1 (resp. beta < 1) the pmf can turn upward near
    the lower (upper) domain edge, so the geometric tail bound does not
    apply there and the window is extended to that edge instead.
    """
    n = _check_count(n, "n")
    if not isinstance(prior, BetaParams):
        raise DomainError("prior must be a BetaParams instance")
    eps = _check_eps(eps)
    if n == 0:
        return _point_mass("beta-binomial", 0)
    a, b = prior.alpha, prior.beta

    def log_ratio(ks: np.ndarray) -> np.ndarray:
        return np.log((n - ks) * (ks + a) / ((ks + 1.0) * (n - ks - 1.0 + b)))

    c = a + b
    mean = n * a / c
    var = n * a * b * (c + n) / (c * c * (c + 1.0))
    return _build_windowed(
        kind="beta-binomial",
        mean=mean,
        sd=math.sqrt(var),
        n_max=n,
        log_ratio=log_ratio,
        anchor_fn=_beta_binomial_anchor(n, a, b),
        anchor_at=int(round(mean)),
        eps=eps,
        monotone_lo=a >= 1.0,
        monotone_hi=b >= 1.0,
    )


def convolve(
    a: CountDistribution, b: CountDistribution, eps: float = DEFAULT_EPS
) -> CountDistribution:
    """Distribution of the sum of two independent counts.

    Direct convolution of the stored linear-space masses; the output window
    is trimmed so the extra omitted mass stays <= eps, and the result's
    truncated_mass is <= a.truncated_mass + b.truncated_mass + eps.
    """
    eps = _check_eps(eps)
    full = np.convolve(a.masses, b.masses)
    lo = a.support_lo + b.support_lo

    # Trim each tail while it holds at most eps/4, then drop any remaining
    # zero-mass edge cells (an all-finite log_mass is part of the contract).
    budget = eps / 4.0
    csum = np.cumsum(full)
    start = int(np.searchsorted(csum, budget, side="right"))
    rsum = np.cumsum(full[::-1])
    stop = len(full) - int(np.searchsorted(rsum, budget, side="right"))
    peak = int(np.argmax(full))
    start = min(start, peak)
    stop = max(stop, peak + 1)
    kept = full[start:stop]
    nz = np.nonzero(kept)[0]
    kept = kept[nz[0] : nz[-1] + 1]
    lo = lo + start + int(nz[0])

    # Interior cells can underflow to exactly zero only when the inputs are
    # strongly bimodal; floor them at the smallest normal double (an
    # overstatement of at most ~1e-300 mass) to keep the logs finite.
    kept = np.maximum(kept, np.finfo(np.float64).tiny)

    stored = math.fsum(kept)
    cap = a.truncated_mass + b.truncated_mass + eps
    truncated = min(max(1.0 - stored, 0.0), cap)
    return CountDistribution(
        kind="convolution",
        support_lo=lo,
        support_hi=lo + len(kept) - 1,
        log_mass=np.log(kept),
        truncated_mass=truncated,
    )


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------


def mode(d: CountDistribution) -> int:
    """Count with the largest stored mass; ties break to the smallest count."""
    return d.support_lo + int(np.argmax(d.log_mass))


def quantile(d: CountDistribution, q: float) -> int:
    """Smallest count whose stored CDF is >= q.

    Quantiles are taken against the stored mass; a q within truncated_mass
    of 1 clamps to the top of the window.
    """
    q = float(q)
    if not (0.0 < q < 1.0):
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    cdf = d._cdf
    idx = int(np.searchsorted(cdf, q, side="left"))
    if idx >= len(cdf):
        return d.support_hi
    return d.support_lo + idx


def central_interval(d: CountDistribution, coverage: float) -> CredibleInterval:
    """Equal-tail interval [quantile((1-c)/2), quantile(1-(1-c)/2)].

    The reported ``achieved`` coverage is the stored mass inside the
    interval, which by construction is >= the request; a request within the
    truncation budget of 1 cannot be certified and raises instead.
    """
    coverage = float(coverage)
    if not (0.0 < coverage < 1.0):
        raise DomainError(f"coverage must lie in (0, 1), got {coverage!r}")
    tail = (1.0 - coverage) / 2.0
    lo = quantile(d, tail)
    hi = quantile(d, 1.0 - tail)
    cdf = d._cdf
    below = float(cdf[lo - d.support_lo - 1]) if lo > d.support_lo else 0.0
    achieved = float(cdf[hi - d.support_lo]) - below
    if achieved < coverage - 1e-12:
        raise DomainError(
            f"achieved coverage {achieved!r} falls short of {coverage!r}; "
            "rebuild the distribution with a smaller eps"
        )
    return CredibleInterval(lo=lo, hi=hi, coverage=coverage, achieved=achieved)
