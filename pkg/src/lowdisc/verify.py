"""Self-checks for one discriminant.

Run with: lowdisc verify --disc -163
Or: python -m lowdisc verify --disc -163

Checks the moment identity against the Hurwitz-zeta reference, the sum
rule, the g(0) bound against the direct partial sum, and lambda against
its first-order estimate -gamma_1^2 / 2.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import mpmath

from .discriminant import FundamentalDiscriminant, KroneckerCharacter
from .errors import LowdiscError, ReferenceUnavailableError
from .models import RunConfig
from .newman import LowReport, analyze, g_partial, naive_lambda
from .specfun import gamma_real, reference_L_half

logger = logging.getLogger(__name__)

# Relative agreement required between Xi(0) and the reference value.
MOMENT_TOLERANCE = "1e-15"


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    skipped: bool = False

    def line(self) -> str:
        mark = "-" if self.skipped else ("✓" if self.ok else "✗")
        return f"{mark} {self.name}: {self.detail}"


def check_moment_identity(report: LowReport, config: RunConfig) -> CheckResult:
    """|Xi(0) - (D/pi)^{3/4} Gamma(3/4) L(1/2)| / |Xi(0)| below MOMENT_TOLERANCE."""
    name = "moment identity"
    if report.moment_pair is None:
        return CheckResult(name, False, "no moments available")
    xi0 = report.xi0
    ctx = xi0.context
    chi = KroneckerCharacter(report.disc, config.chi_table_limit)
    try:
        ref = reference_L_half(chi, ctx, config.reference_ceiling)
    except ReferenceUnavailableError as e:
        return CheckResult(name, True, str(e), skipped=True)
    predicted = (ctx.mpf(report.disc.d) / ctx.pi) ** (ctx.mpf(3) / 4) * gamma_real(ctx, ctx.mpf(3) / 4) * ref
    rel = abs(xi0 - predicted) / abs(xi0)
    return CheckResult(name, rel < ctx.mpf(MOMENT_TOLERANCE), f"relative difference {mpmath.nstr(rel, 3)}")


def check_sum_rule(report: LowReport) -> CheckResult:
    """Residual -xi2/(2 xi0) - sum gamma_j^-2 stays positive and shrinks as zeros are added."""
    name = "sum rule"
    zl, mp = report.zero_list, report.moment_pair
    if zl is None or mp is None or not zl.gammas:
        return CheckResult(name, False, "no zero list available")
    ctx = mp.xi0.context
    total = -mp.xi2 / (2 * mp.xi0)
    counts = sorted({n for n in (len(zl) // 4, len(zl) // 2, len(zl)) if n > 0})
    residuals = [total - zl.truncated(n).square_sum(ctx) for n in counts]
    positive = all(r > -mp.ratio_err for r in residuals)
    decreasing = all(a > b for a, b in zip(residuals, residuals[1:]))
    shown = ", ".join(f"N={n}: {mpmath.nstr(r, 6)}" for n, r in zip(counts, residuals))
    return CheckResult(name, positive and decreasing, shown)


def check_g0_bound(report: LowReport) -> CheckResult:
    """The certified g(0) bound dominates the direct partial sum over the found zeros."""
    name = "g(0) bound"
    if report.g0_bound is None:
        return CheckResult(name, False, "no g(0) bound (see report error)")
    direct = g_partial(report.zero_list.gammas)
    ok = report.g0_bound >= direct
    return CheckResult(name, ok, f"bound {mpmath.nstr(report.g0_bound, 8)} vs partial sum {mpmath.nstr(direct, 8)}")


def check_lambda(report: LowReport) -> CheckResult:
    """lambda / (-gamma_1^2 / 2) lies in [1, 5/4]."""
    name = "lambda estimate"
    if report.lambda_value is None:
        return CheckResult(name, False, "no lambda (Lowdef not satisfied)")
    ratio = report.lambda_value / naive_lambda(report.gamma1)
    ok = 1 <= ratio <= ratio.context.mpf(5) / 4
    return CheckResult(name, ok, f"lambda {mpmath.nstr(report.lambda_value, 8)}, ratio to -gamma_1^2/2 "
                                 f"{mpmath.nstr(ratio, 6)}")


def run_checks(disc: FundamentalDiscriminant, config: Optional[RunConfig] = None,
               out: Callable[[str], None] = print) -> bool:
    """Run every check for disc, reporting one line per check through out.

    Returns:
        True when no check failed (skipped checks count as passed)
    """
    config = config or RunConfig()
    out("=" * 60)
    out(f"LOWDISC SELF-CHECK D={disc.d}")
    out("=" * 60)
    report = analyze(disc, config)
    if report.error is not None:
        out(f"  pipeline stopped at {report.error.stage}: {report.error.message}")

    checks: List[Tuple[str, Callable[[], CheckResult]]] = [
        ("moment identity", lambda: check_moment_identity(report, config)),
        ("sum rule", lambda: check_sum_rule(report)),
        ("g(0) bound", lambda: check_g0_bound(report)),
        ("lambda estimate", lambda: check_lambda(report)),
    ]
    results = []
    for name, check in checks:
        try:
            result = check()
        except LowdiscError as e:
            logger.error("self-check %s raised: %s", name, e, exc_info=True)
            result = CheckResult(name, False, str(e))
        results.append(result)
        out(result.line())

    passed = sum(r.ok and not r.skipped for r in results)
    failed = sum(not r.ok for r in results)
    out("=" * 60)
    out(f"Results: {passed} passed, {failed} failed")
    out("=" * 60)
    return failed == 0
