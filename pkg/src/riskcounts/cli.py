"""Command-line surface: scenario files in, reports and CSV tables out.

Subcommands::

    summarize   population-level comparison of a two-arm risk scenario
    figure      plot-ready CSV table (ids 1-4) for a scenario
    pvalue      classical two-proportion test on observed counts
    simulate    replication study over a synthetic-cohort spec
    calibrate   fit beta priors so predictive spread hits a target ratio

Every command is deterministic given its inputs and the declared seed; file
outputs go through an atomic write so a partial file is never left behind.
Option precedence is command line > scenario-file control > built-in
default.  Probabilities print with six significant digits, a two-digit
approximation, and the truncation error bound where one applies.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .classical import TestResult, TwoByTwo, relative_risk_estimate, two_proportion_test
from .cohort import CausalSpec, ReplicationReport, replication_study
from .comparison import (
    ExposureScenario,
    SplitComparison,
    lives_saved_bounds,
    prob_equal,
    prob_greater,
    prob_less,
    summarize,
)
from .comparison import split_vs_counterfactual as _fixed_split
from .distributions import (
    DEFAULT_EPS,
    CountDistribution,
    DomainError,
    binomial_distribution,
    central_interval,
    mode,
)
from .predictive import (
    CalibrationError,
    UncertainScenario,
    calibrate_prior,
    calibrated_scenario,
    predictive_arms,
    spread_report,
)
from .predictive import split_vs_counterfactual as _predictive_split
from .figures import (
    FIGURE_IDS,
    build_figure,
    read_metadata,
    render_figure_csv,
    write_text_atomic,
)
from .scenarios import (
    ScenarioError,
    ScenarioFile,
    compact_json,
    load_scenario,
    parse_scenario,
    scenario_document,
)

__all__ = ["main", "replay_text"]

_DEFAULT_COVERAGE = 0.9999
_DEFAULT_ALPHA = 0.05
_DEFAULT_SEED = 0
_DEFAULT_REPLICATIONS = 1000

_CAUTION_NOTE = """\
caution: the p-value measures surprise under a no-difference model.  It does
not say why the arms differ.  Relabel the same two columns of counts with any
trait that separates the groups - measured or not - and the identical
statistic and p-value follow, so rejection alone is never evidence that the
named exposure causes the outcome."""


# ---------------------------------------------------------------------------
# formatting helpers
# ---------------------------------------------------------------------------


def _prob(value: float) -> str:
    """Six significant digits plus a rough two-digit reading."""
    return f"{value:#.6g} (~ {value:.2g})"


def _pick(cli_value, file_value, default):
    """Option precedence: command line beats file control beats default."""
    if cli_value is not None:
        return cli_value
    if file_value is not None:
        return file_value
    return default


def _pct(coverage: float) -> str:
    return f"{coverage * 100:g}%"


def _interval_line(d: CountDistribution, coverage: float) -> str:
    iv = central_interval(d, coverage)
    return (
        f"mode {mode(d)}, {_pct(coverage)} interval [{iv.lo}, {iv.hi}] "
        f"(achieved {iv.achieved:#.6g})"
    )


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------


def _print_fixed_summary(s: ExposureScenario, coverage: float, eps: float) -> None:
    summary = summarize(s, eps)
    comp = _fixed_split(s, eps)
    lives = lives_saved_bounds(s, coverage, eps)
    arm_e = binomial_distribution(s.n_exposed, s.p_exposed, eps)
    arm_u = binomial_distribution(s.n_unexposed, s.p_unexposed, eps)

    print("two-arm risk scenario (fixed per-person risks)")
    print(f"  exposed arm:   n={s.n_exposed}  p={s.p_exposed!r}")
    print(f"  unexposed arm: n={s.n_unexposed}  p={s.p_unexposed!r}")
    _print_comparison_block(summary, arm_e, arm_u, comp, lives, coverage)


def _print_predictive_summary(u: UncertainScenario, coverage: float, eps: float) -> None:
    arm_e, arm_u = predictive_arms(u, eps)
    gt, eq, lt = prob_greater(arm_e, arm_u), prob_equal(arm_e, arm_u), prob_less(arm_e, arm_u)
    nobody_e = arm_e.pmf(0)
    nobody_u = arm_u.pmf(0)
    rr = u.prior_exposed.mean / u.prior_unexposed.mean
    eff = (1.0 - nobody_e) / (1.0 - nobody_u) if nobody_u < 1.0 else None
    comp = _predictive_split(u, eps)

    print("two-arm risk scenario (beta-uncertain per-person risks)")
    print(
        f"  exposed arm:   n={u.n_exposed}  "
        f"prior alpha={u.prior_exposed.alpha!r} beta={u.prior_exposed.beta!r}"
    )
    print(
        f"  unexposed arm: n={u.n_unexposed}  "
        f"prior alpha={u.prior_unexposed.alpha!r} beta={u.prior_unexposed.beta!r}"
    )
    print(f"per-person relative risk (prior means): {rr:#.6g}")
    if eff is None:
        print("effective relative risk: undefined (no mass on zero cases)")
    else:
        print(f"effective relative risk: {eff:#.6g} (~ {eff:.2g})")
    print(f"P(no cases in exposed arm):   {_prob(nobody_e)}")
    print(f"P(no cases in unexposed arm): {_prob(nobody_u)}")
    bound = max(r.error_bound for r in (gt, eq, lt))
    print(f"arm-versus-arm comparison (error bound <= {bound:.2e}):")
    print(f"  P(exposed arm counts more):   {_prob(gt.value)}")
    print(f"  P(arms count exactly equal):  {_prob(eq.value)}")
    print(f"  P(unexposed arm counts more): {_prob(lt.value)}")
    print("arm count summaries:")
    print(f"  exposed:   {_interval_line(arm_e, coverage)}")
    print(f"  unexposed: {_interval_line(arm_u, coverage)}")
    _print_split_block(comp, coverage)


def _print_comparison_block(
    summary,
    arm_e: CountDistribution,
    arm_u: CountDistribution,
    comp: SplitComparison,
    lives,
    coverage: float,
) -> None:
    if summary.per_person_rr is None:
        print("per-person relative risk: undefined (both risks are zero)")
    else:
        print(f"per-person relative risk: {summary.per_person_rr:#.6g}")
    if summary.effective_rr is None:
        print("effective relative risk: undefined (neither arm can see a case)")
    else:
        print(
            f"effective relative risk: {summary.effective_rr:#.6g} "
            f"(~ {summary.effective_rr:.2g})"
        )
    print(f"P(no cases in exposed arm):   {_prob(summary.p_nobody_exposed)}")
    print(f"P(no cases in unexposed arm): {_prob(summary.p_nobody_unexposed)}")
    print(f"arm-versus-arm comparison (error bound <= {summary.error_bound:.2e}):")
    print(f"  P(exposed arm counts more):   {_prob(summary.p_exposed_more)}")
    print(f"  P(arms count exactly equal):  {_prob(summary.p_equal)}")
    print(f"  P(unexposed arm counts more): {_prob(summary.p_unexposed_more)}")
    print("arm count summaries:")
    print(f"  exposed:   {_interval_line(arm_e, coverage)}")
    print(f"  unexposed: {_interval_line(arm_u, coverage)}")
    _print_split_block(comp, coverage)
    print("cases avertable by eliminating exposure:")
    print(f"  best case (interval extremes): {lives.best_case}")
    print(f"  most likely (mode difference): {lives.most_likely}")
    print(
        "  P(split total >= its interval top): "
        f"{lives.tail_prob_best_case:.4e}"
    )


def _print_split_block(comp: SplitComparison, coverage: float) -> None:
    print("split total vs all-low counterfactual:")
    print(f"  split total: {_interval_line(comp.split, coverage)}")
    print(f"  all-low:     {_interval_line(comp.all_low, coverage)}")
    print(f"  P(split total larger):   {_prob(comp.p_split_more)}")
    print(f"  P(exactly equal totals): {_prob(comp.p_equal)}")
    print(f"  P(all-low total larger): {_prob(comp.p_all_low_more)}")


def cmd_summarize(args: argparse.Namespace) -> int:
    sf = load_scenario(args.scenario)
    coverage = _pick(args.coverage, sf.coverage, _DEFAULT_COVERAGE)
    eps = _pick(args.eps, sf.eps, DEFAULT_EPS)
    payload = sf.payload
    if isinstance(payload, ExposureScenario):
        _print_fixed_summary(payload, coverage, eps)
    elif isinstance(payload, UncertainScenario):
        _print_predictive_summary(payload, coverage, eps)
    else:
        return _fail(
            "summarize needs a risk scenario (exposure_scenario or "
            "uncertain_scenario); this file holds a causal_spec"
        )
    return 0


# ---------------------------------------------------------------------------
# figure
# ---------------------------------------------------------------------------


def cmd_figure(args: argparse.Namespace) -> int:
    sf = load_scenario(args.scenario)
    coverage = _pick(args.coverage, sf.coverage, _DEFAULT_COVERAGE)
    eps = _pick(args.eps, sf.eps, DEFAULT_EPS)
    payload = sf.payload
    extra: tuple[tuple[str, str], ...] = ()

    if isinstance(payload, CausalSpec):
        return _fail("figures need a risk scenario, not a causal_spec")
    if args.id in (2, 4) and isinstance(payload, ExposureScenario):
        if args.calibrate_ratio is None:
            return _fail(
                f"figure {args.id} needs per-person risk priors: supply an "
                "uncertain_scenario file or pass --calibrate-ratio to fit "
                "priors to this fixed-risk scenario"
            )
        source_doc = compact_json(scenario_document(payload))
        payload = calibrated_scenario(payload, args.calibrate_ratio, coverage, eps)
        extra = (
            ("calibrated_from", source_doc),
            ("calibrate_ratio", repr(args.calibrate_ratio)),
            ("calibrate_coverage", repr(coverage)),
        )
    if args.id in (1, 3) and isinstance(payload, UncertainScenario):
        return _fail(
            f"figure {args.id} shows fixed-risk counts; this file holds an "
            "uncertain_scenario (use figure 2 or 4)"
        )

    table = build_figure(args.id, payload, eps, extra)
    text = render_figure_csv(table)
    write_text_atomic(args.out, text)
    print(f"wrote figure {args.id} ({len(text.splitlines())} lines) to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# pvalue
# ---------------------------------------------------------------------------


def _print_test(t: TwoByTwo, result: TestResult, continuity: bool) -> None:
    label = "with" if continuity else "without"
    print(f"two-proportion score test ({label} continuity correction)")
    print(f"  arm A: {t.cases_a} cases of {t.n_a}  (proportion {t.cases_a / t.n_a:#.6g})")
    print(f"  arm B: {t.cases_b} cases of {t.n_b}  (proportion {t.cases_b / t.n_b:#.6g})")
    print(f"  statistic: {result.statistic:#.6g}")
    print(f"  p-value:   {_prob(result.p_value)}")
    verdict = "rejected" if result.reject else "not rejected"
    print(f"  no-difference hypothesis at alpha={result.alpha:g}: {verdict}")
    try:
        rr = relative_risk_estimate(t)
    except DomainError:
        rr = None
    if rr is not None:
        print(f"  relative-risk estimate: {rr:#.6g}")
    print(_CAUTION_NOTE)


def cmd_pvalue(args: argparse.Namespace) -> int:
    t = TwoByTwo(args.cases_a, args.n_a, args.cases_b, args.n_b)
    alpha = args.alpha if args.alpha is not None else _DEFAULT_ALPHA
    result = two_proportion_test(t, continuity_correction=args.continuity, alpha=alpha)
    _print_test(t, result, args.continuity)
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def render_replication_csv(
    spec: CausalSpec,
    report: ReplicationReport,
    seed: int,
    continuity: bool,
) -> str:
    buf = io.StringIO()
    meta = (
        ("riskcounts_csv", "1"),
        ("kind", "replication-report"),
        ("tool_version", "0.1.0"),
        ("scenario", compact_json(scenario_document(spec))),
        ("replications", str(report.replications)),
        ("alpha", repr(report.alpha)),
        ("seed", str(seed)),
        ("continuity_correction", str(continuity).lower()),
    )
    for key, value in meta:
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("variant", "rejection_rate", "mean_p"))
    for row in report.rows:
        writer.writerow((row.variant, repr(row.rejection_rate), repr(row.mean_p_value)))
    return buf.getvalue()


def cmd_simulate(args: argparse.Namespace) -> int:
    sf = load_scenario(args.scenario)
    payload = sf.payload
    if not isinstance(payload, CausalSpec):
        return _fail("simulate needs a causal_spec scenario file")
    replications = _pick(args.replications, sf.replications, _DEFAULT_REPLICATIONS)
    if replications <= 0:
        return _fail(f"replications must be positive, got {replications}")
    alpha = _pick(args.alpha, sf.alpha, _DEFAULT_ALPHA)
    seed = _pick(args.seed, sf.seed, _DEFAULT_SEED)
    report = replication_study(
        payload,
        replications,
        alpha=alpha,
        seed=seed,
        continuity_correction=args.continuity,
    )
    text = render_replication_csv(payload, report, seed, args.continuity)
    if args.out is None:
        sys.stdout.write(text)
    else:
        write_text_atomic(args.out, text)
        print(f"wrote replication report ({len(report.rows)} variants) to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# calibrate
# ---------------------------------------------------------------------------


def cmd_calibrate(args: argparse.Namespace) -> int:
    sf = load_scenario(args.scenario)
    payload = sf.payload
    if not isinstance(payload, ExposureScenario):
        return _fail(
            "calibrate needs an exposure_scenario with fixed risks; priors "
            "are then fitted to the target spread ratio"
        )
    coverage = _pick(args.coverage, sf.coverage, _DEFAULT_COVERAGE)
    eps = _pick(args.eps, sf.eps, DEFAULT_EPS)
    target = args.target_ratio

    print(
        f"calibrating beta priors to spread ratio {target:g} at "
        f"{_pct(coverage)} coverage"
    )
    for label, n, p in (
        ("exposed", payload.n_exposed, payload.p_exposed),
        ("unexposed", payload.n_unexposed, payload.p_unexposed),
    ):
        prior = calibrate_prior(n, p, target, coverage, eps)
        rep = spread_report(n, prior, coverage, eps)
        print(f"{label} arm (n={n}, risk mean {p!r}):")
        print(f"  alpha: {prior.alpha!r}")
        print(f"  beta:  {prior.beta!r}")
        print(f"  concentration (alpha+beta): {prior.concentration!r}")
        ratio = "undefined" if rep.ratio is None else f"{rep.ratio:#.6g}"
        print(
            f"  interval widths: predictive {rep.width_predictive}, "
            f"plug-in {rep.width_plugin}, ratio {ratio}"
        )
    return 0


# ---------------------------------------------------------------------------
# metadata replay
# ---------------------------------------------------------------------------


def replay_text(text: str) -> str:
    """Regenerate a CSV's full text from its own metadata header.

    The scenario echo in the header is parsed back through the ordinary
    scenario-file path and the command is re-run in-process.  The result is
    byte-identical to the original file; this is the executable form of the
    "metadata echo is lossless" guarantee, and the round trip makes a good
    integrity check for archived tables.
    """
    meta = read_metadata(text)
    try:
        kind = meta["kind"]
        doc = json.loads(meta["scenario"])
    except KeyError as exc:
        raise ScenarioError(f"metadata block is missing the {exc.args[0]!r} line") from None
    sf = parse_scenario(doc, source="<metadata>")

    if kind == "figure":
        figure_id = int(meta["figure_id"])
        eps = float(meta["eps"])
        generated = {
            "riskcounts_csv",
            "kind",
            "tool_version",
            "figure_id",
            "eps",
            "scenario",
        }
        extra = tuple(
            (key, value)
            for key, value in _metadata_pairs(text)
            if key not in generated
            and not key.startswith("support_")
            and not key.startswith("truncated_mass_")
        )
        table = build_figure(figure_id, sf.payload, eps, extra)
        return render_figure_csv(table)

    if kind == "replication-report":
        payload = sf.payload
        if not isinstance(payload, CausalSpec):
            raise ScenarioError("replication-report metadata must carry a causal_spec")
        replications = int(meta["replications"])
        alpha = float(meta["alpha"])
        seed = int(meta["seed"])
        continuity = meta["continuity_correction"] == "true"
        report = replication_study(
            payload, replications, alpha=alpha, seed=seed,
            continuity_correction=continuity,
        )
        return render_replication_csv(payload, report, seed, continuity)

    raise ScenarioError(f"unknown CSV kind {kind!r} in metadata")


def _metadata_pairs(text: str) -> list[tuple[str, str]]:
    pairs = []
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        key, sep, value = line[1:].strip().partition(":")
        if sep:
            pairs.append((key.strip(), value.strip()))
    return pairs


def replay_file(path: str | Path) -> str:
    return replay_text(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskcounts",
        description="Population-scale risk accounting for two-arm exposure questions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, *, coverage=False, eps=False,
                   seed=False, alpha=False, replications=False, out=False,
                   continuity=False) -> None:
        if coverage:
            p.add_argument("--coverage", type=float, default=None,
                           help="interval coverage level (default 0.9999)")
        if eps:
            p.add_argument("--eps", type=float, default=None,
                           help="total truncated-mass budget per distribution")
        if seed:
            p.add_argument("--seed", type=int, default=None,
                           help="master seed for the replication stream")
        if alpha:
            p.add_argument("--alpha", type=float, default=None,
                           help="test size (default 0.05)")
        if replications:
            p.add_argument("--replications", type=int, default=None,
                           help="number of synthetic cohorts to draw")
        if out:
            p.add_argument("--out", type=Path, default=None,
                           help="output CSV path (atomic write)")
        if continuity:
            p.add_argument("--no-continuity", dest="continuity",
                           action="store_false",
                           help="drop the continuity correction")

    p_sum = sub.add_parser("summarize", help="arm-versus-arm comparison report")
    p_sum.add_argument("scenario", type=Path, help="scenario JSON file")
    add_common(p_sum, coverage=True, eps=True)
    p_sum.set_defaults(func=cmd_summarize)

    p_fig = sub.add_parser("figure", help="write one figure's data table as CSV")
    p_fig.add_argument("scenario", type=Path, help="scenario JSON file")
    p_fig.add_argument("--id", type=int, required=True, choices=FIGURE_IDS,
                       help="figure number")
    add_common(p_fig, coverage=True, eps=True)
    p_fig.add_argument("--out", type=Path, required=True,
                       help="output CSV path (atomic write)")
    p_fig.add_argument("--calibrate-ratio", type=float, default=None,
                       help="fit priors to this spread ratio when the file "
                            "has fixed risks (figures 2 and 4)")
    p_fig.set_defaults(func=cmd_figure)

    p_pv = sub.add_parser("pvalue", help="two-proportion test on observed counts")
    p_pv.add_argument("cases_a", type=int)
    p_pv.add_argument("n_a", type=int)
    p_pv.add_argument("cases_b", type=int)
    p_pv.add_argument("n_b", type=int)
    add_common(p_pv, alpha=True, continuity=True)
    p_pv.set_defaults(func=cmd_pvalue)

    p_sim = sub.add_parser("simulate", help="replication study on a causal spec")
    p_sim.add_argument("scenario", type=Path, help="scenario JSON file")
    add_common(p_sim, seed=True, alpha=True, replications=True, out=True,
               continuity=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_cal = sub.add_parser("calibrate", help="fit beta priors to a spread-ratio target")
    p_cal.add_argument("scenario", type=Path, help="exposure scenario JSON file")
    p_cal.add_argument("target_ratio", type=float,
                       help="desired predictive/plug-in interval width ratio")
    add_common(p_cal, coverage=True, eps=True)
    p_cal.set_defaults(func=cmd_calibrate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        return _fail(str(exc))
    except (DomainError, CalibrationError) as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
