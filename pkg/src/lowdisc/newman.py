"""Lower bounds on the de Bruijn-Newman constant from a low-lying zero.

For a discriminant whose first zero gamma_1 is small against the rest of
the spectrum, g(0) = sum_{j>=2} 2[(gamma_j + gamma_1)^-2 + (gamma_j - gamma_1)^-2]
is bounded from the zero list and the sum rule. When u = 5 gamma_1^2 g(0) < 1,

    lambda = ((1 - u)^{4/5} - 1) / (8 g(0))

is a lower bound for the constant of that discriminant. The generalized
bound lambda_c takes any decay constant c > 0 in g' > -c g^2 and reduces
to lambda at c = 8.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple

import mpmath

from .discriminant import FundamentalDiscriminant, KroneckerCharacter
from .errors import (
    DomainError,
    EmptyResultError,
    IncompleteZeroListError,
    LowdefFailure,
    LowdiscError,
    NumericalFailure,
    PreconditionError,
)
from .models import LowReportPayload, RunConfig, StageError
from .quadrature import QuadratureSpec
from .specfun import DEFAULT_PRECISION, coerce, make_context, to_decimal_string, trigamma_quarter
from .theta import PhiEvaluator
from .xi import MomentPair, XiEvaluator, gamma_scale, log_l_second_from_moments, log_z_second, moments
from .zeros import ZeroList, certify, classify_origin, find_zeros, target_height

logger = logging.getLogger(__name__)


def _context(*values: Any) -> mpmath.MPContext:
    for v in values:
        owner = getattr(v, "context", None)
        if owner is not None:
            return owner
    return make_context(DEFAULT_PRECISION)


def _log_scale(ctx: mpmath.MPContext, d: int):
    """log(D / 2pi), the symplectic normalization of zero heights."""
    return ctx.log(ctx.mpf(d) / (2 * ctx.pi))


def first_index_above_one(gammas: Sequence[Any]) -> Optional[int]:
    """1-based index of the first ordinate exceeding 1."""
    for j, g in enumerate(gammas, 1):
        if g > 1:
            return j
    return None


# ============ g(0) bounds ============

def g0_bound(zl: ZeroList, mp: MomentPair):
    """Upper bound for g(0): explicit pairs below index N plus a sum-rule tail.

    N is the first index with gamma_N > 1. The tail
    -(1 + g1^2)/(1 - g1^2)^2 (2 xi2/xi0 + 4 sum_{j<N} gamma_j^-2)
    covers every zero from N on.

    Raises:
        PreconditionError: If gamma_1 >= 1, no zero exceeds 1, or the list is flagged
    """
    if not zl.gammas:
        raise PreconditionError("g0_bound needs at least one zero")
    if zl.flagged:
        raise PreconditionError(f"zero list for D={zl.disc.d} failed the sum-rule check")
    ctx = _context(mp.xi0)
    g1 = zl.gammas[0]
    if g1 >= 1:
        raise PreconditionError(f"g0_bound needs gamma_1 < 1, got {mpmath.nstr(g1, 10)}")
    n = first_index_above_one(zl.gammas)
    if n is None:
        raise PreconditionError(f"no zero above 1 among {len(zl.gammas)} zeros for D={zl.disc.d}")
    head = zl.gammas[:n - 1]
    pairs = ctx.fsum(2 / (g + g1) ** 2 + 2 / (g - g1) ** 2 for g in head[1:])
    inverse_squares = ctx.fsum(1 / (g * g) for g in head)
    factor = (1 + g1 ** 2) / (1 - g1 ** 2) ** 2
    tail = -factor * (2 * mp.xi2 / mp.xi0 + 4 * inverse_squares)
    return pairs + tail


def g_partial(gammas: Sequence[Any], ctx: Optional[mpmath.MPContext] = None):
    """Direct partial sum of g(0) over the given zeros (gamma_1 excluded from the sum)."""
    ctx = ctx or _context(*gammas)
    g1 = gammas[0]
    return ctx.fsum(2 / (g + g1) ** 2 + 2 / (g - g1) ** 2 for g in gammas[1:])


def rmt_g0_bound(zero_square_sum: Any, gamma1_tilde: Any):
    """4 (1 + y^2) / (1 - y^2)^2 sum_{j>=2} gamma_j^-2 with y = normalized gamma_1.

    Valid when the second normalized zero is at least 1.

    Raises:
        PreconditionError: If gamma1_tilde >= 1
    """
    ctx = _context(zero_square_sum, gamma1_tilde)
    y = coerce(ctx, gamma1_tilde)
    if y >= 1:
        raise PreconditionError(f"rmt_g0_bound needs normalized gamma_1 < 1, got {mpmath.nstr(y, 10)}")
    return 4 * (1 + y ** 2) / (1 - y ** 2) ** 2 * coerce(ctx, zero_square_sum)


# ============ Lambda ============

def lambda_bound(gamma1: Any, g0: Any):
    """((1 - 5 gamma_1^2 g0)^{4/5} - 1) / (8 g0).

    Raises:
        LowdefFailure: If g0 <= 0 or 5 gamma_1^2 g0 >= 1
    """
    ctx = _context(gamma1, g0)
    gamma1 = coerce(ctx, gamma1)
    g0 = coerce(ctx, g0)
    if g0 <= 0:
        raise LowdefFailure(f"lambda needs g0 > 0, got {mpmath.nstr(g0, 10)}")
    u = 5 * gamma1 ** 2 * g0
    if u >= 1:
        raise LowdefFailure(f"Lowdef fails: 5 gamma_1^2 g0 = {mpmath.nstr(u, 10)} >= 1")
    return ((1 - u) ** (ctx.mpf(8) / 10) - 1) / (8 * g0)


def lambda_c(gamma1: Any, f0: Any, c: Any):
    """((1 - (c+2)/2 gamma_1^2 f0)^{c/(c+2)} - 1) / (c f0) for decay constant c > 0.

    Raises:
        DomainError: If c <= 0
        LowdefFailure: If f0 <= 0 or (c+2)/2 gamma_1^2 f0 >= 1
    """
    ctx = _context(gamma1, f0, c)
    gamma1 = coerce(ctx, gamma1)
    f0 = coerce(ctx, f0)
    c = coerce(ctx, c)
    if c <= 0:
        raise DomainError(f"lambda_c needs c > 0, got {c}")
    if f0 <= 0:
        raise LowdefFailure(f"lambda_c needs f0 > 0, got {mpmath.nstr(f0, 10)}")
    coeff = (c + 2) / 2
    u = coeff * gamma1 ** 2 * f0
    if u >= 1:
        raise LowdefFailure(f"condition fails: (c+2)/2 gamma_1^2 f0 = {mpmath.nstr(u, 10)} >= 1")
    return ((1 - u) ** (c / (c + 2)) - 1) / (c * f0)


def lambda_series(gamma1: Any, f0: Any, c: Any = 8):
    """Expansion -gamma_1^2/2 (1 + w/2 + (1/3 + c/12) w^2) with w = gamma_1^2 f0."""
    ctx = _context(gamma1, f0, c)
    gamma1, f0, c = (coerce(ctx, v) for v in (gamma1, f0, c))
    w = gamma1 ** 2 * f0
    return -gamma1 ** 2 / 2 * (1 + w / 2 + (ctx.mpf(1) / 3 + c / 12) * w ** 2)


def naive_lambda(gamma1: Any):
    """-gamma_1^2 / 2, the first-order estimate."""
    ctx = _context(gamma1)
    return -coerce(ctx, gamma1) ** 2 / 2


def lambda_ratio(u: Any):
    """(5/16)((1 - u)^{4/5} - 1)/u, decreasing from -1/4 to -5/16 on (0, 1).

    Equals lambda / (2 gamma_1^2) at u = 5 gamma_1^2 g0.
    """
    ctx = _context(u)
    u = coerce(ctx, u)
    if not 0 < u < 1:
        raise DomainError(f"lambda_ratio needs 0 < u < 1, got {u}")
    return 5 * ((1 - u) ** (ctx.mpf(8) / 10) - 1) / (16 * u)


def lambda_sensitivity(gamma1: Any, g0: Any):
    """d lambda / d g0, negative on the admissible range."""
    ctx = _context(gamma1, g0)
    gamma1, g0 = coerce(ctx, gamma1), coerce(ctx, g0)
    u = 5 * gamma1 ** 2 * g0
    if g0 <= 0 or u >= 1:
        raise LowdefFailure(f"lambda_sensitivity outside the admissible range (u = {mpmath.nstr(u, 8)})")
    four_fifths = ctx.mpf(8) / 10
    return (1 - (1 - u) ** four_fifths - four_fifths * u * (1 - u) ** (-ctx.mpf(2) / 10)) / (8 * g0 ** 2)


def lambda_ceiling(g0: Any):
    """-1/(8 g0), the floor every admissible lambda stays above."""
    ctx = _context(g0)
    return -1 / (8 * coerce(ctx, g0))


# ============ Low discriminants ============

@dataclass(frozen=True)
class Low3Result:
    lhs: Any
    rhs: Any
    is_low: bool


def low3_classify(mp: MomentPair, gamma1: Any, gamma2: Any, d: int) -> Low3Result:
    """-(1/2)(log L)''(0) against (21/20) gamma_1^-2 - (1/5) log(D/2pi)^2.

    The discriminant is Low when the second normalized zero is at least 1 and
    the left side is smaller.
    """
    ctx = _context(mp.xi0)
    scale = _log_scale(ctx, d)
    lhs = -log_l_second_from_moments(mp, ctx) / 2
    rhs = ctx.mpf(21) / 20 / gamma1 ** 2 - scale ** 2 / 5
    return Low3Result(lhs, rhs, bool(gamma2 * scale >= 1 and lhs < rhs))


def low3_intermediate(mp: MomentPair, gamma1: Any, d: int) -> Tuple[Any, Any]:
    """-(1/2) xi2/xi0 against (21/20) gamma_1^-2 - (3/20) log(D/2pi)^2."""
    ctx = _context(mp.xi0)
    scale = _log_scale(ctx, d)
    return -mp.xi2 / (2 * mp.xi0), ctx.mpf(21) / 20 / gamma1 ** 2 - 3 * scale ** 2 / 20


def digamma_slack_ok(d: int, ctx: Optional[mpmath.MPContext] = None) -> bool:
    """(1/20) log(D/2pi)^2 > (1/8) psi'(3/4)."""
    ctx = ctx or make_context(DEFAULT_PRECISION)
    return bool(_log_scale(ctx, d) ** 2 / 20 > trigamma_quarter(ctx) / 2)


# ============ Report ============

@dataclass
class LowReport:
    """Everything the pipeline learned about one discriminant."""

    disc: FundamentalDiscriminant
    precision: int
    config_hash: str = ""
    zeros_used: int = 0
    zeros_used_in_bound: Optional[int] = None
    xi0: Any = None
    xi2: Any = None
    z0: Any = None
    log_z_second: Any = None
    origin: Optional[str] = None
    gamma1: Any = None
    gamma2: Any = None
    gamma1_tilde: Any = None
    gamma2_tilde: Any = None
    certify_residual: Any = None
    certify_flagged: bool = False
    g0_bound: Any = None
    rmt_g0_bound: Any = None
    lowdef_u: Any = None
    satisfies_lowdef: bool = False
    lambda_value: Any = None
    lambda_naive: Any = None
    low3_lhs: Any = None
    low3_rhs: Any = None
    low3_intermediate_lhs: Any = None
    low3_intermediate_rhs: Any = None
    is_low: bool = False
    error: Optional[StageError] = None
    zero_list: Optional[ZeroList] = field(default=None, repr=False, compare=False)
    moment_pair: Optional[MomentPair] = field(default=None, repr=False, compare=False)

    def to_payload(self) -> LowReportPayload:
        digits = self.precision

        def text(x):
            return None if x is None else to_decimal_string(x, digits)

        return LowReportPayload(
            disc=self.disc.neg_d, d=self.disc.d, precision=self.precision, config_hash=self.config_hash,
            zeros_used=self.zeros_used, zeros_used_in_bound=self.zeros_used_in_bound,
            xi0=text(self.xi0), xi2=text(self.xi2), z0=text(self.z0), log_z_second=text(self.log_z_second),
            origin=self.origin, gamma1=text(self.gamma1), gamma2=text(self.gamma2),
            gamma1_tilde=text(self.gamma1_tilde), gamma2_tilde=text(self.gamma2_tilde),
            certify_residual=text(self.certify_residual), certify_flagged=self.certify_flagged,
            g0_bound=text(self.g0_bound), rmt_g0_bound=text(self.rmt_g0_bound), lowdef_u=text(self.lowdef_u),
            satisfies_lowdef=self.satisfies_lowdef, lambda_value=text(self.lambda_value),
            lambda_naive=text(self.lambda_naive), low3_lhs=text(self.low3_lhs), low3_rhs=text(self.low3_rhs),
            low3_intermediate_lhs=text(self.low3_intermediate_lhs),
            low3_intermediate_rhs=text(self.low3_intermediate_rhs),
            is_low=self.is_low, error=self.error,
        )

    def to_json(self) -> str:
        """Stable JSON text: sorted keys, two-space indent."""
        return json.dumps(self.to_payload().model_dump(by_alias=True), sort_keys=True, indent=2)


def _check_lambda(report: LowReport) -> None:
    lam, g0, g1 = report.lambda_value, report.g0_bound, report.gamma1
    ctx = _context(lam)
    if not lambda_ceiling(g0) < lam < 0:
        raise NumericalFailure(f"lambda {mpmath.nstr(lam, 8)} outside (-1/(8 g0), 0)", residual=lam)
    half_ratio = lam / (2 * g1 ** 2)
    if not -ctx.mpf(5) / 16 <= half_ratio <= -ctx.mpf(1) / 4:
        raise NumericalFailure(f"lambda / (2 gamma_1^2) = {mpmath.nstr(half_ratio, 8)} outside [-5/16, -1/4]",
                               residual=half_ratio)


def build_evaluator(disc: FundamentalDiscriminant, config: RunConfig, max_x: Any = 0, t: Any = 0) -> XiEvaluator:
    """Xi evaluator for a discriminant under the given settings."""
    ctx = make_context(config.precision)
    quad = QuadratureSpec(config.quad_panels, config.quad_degree, config.quad_max_refinements)
    chi = KroneckerCharacter(disc, config.chi_table_limit)
    return XiEvaluator(PhiEvaluator(chi, ctx, config.eps), quad, t, max_x)


def analyze(disc: Any, config: Optional[RunConfig] = None) -> LowReport:
    """Run moments, zeros, certify, g0 bound, lambda and the Low criterion.

    Numerical failures are recorded in ``report.error`` with the stage name;
    a failed Lowdef condition is a result, not an error.

    Raises:
        DomainError: If disc is not a negative fundamental discriminant
    """
    config = config or RunConfig()
    if not isinstance(disc, FundamentalDiscriminant):
        disc = FundamentalDiscriminant(int(disc))
    ctx = make_context(config.precision)
    report = LowReport(disc=disc, precision=config.precision, config_hash=config.config_hash())
    stage = "moments"
    try:
        if config.zero_height is not None:
            height = ctx.mpf(config.zero_height)
        else:
            height = target_height(disc.d, config.zero_count, ctx)
        xi = build_evaluator(disc, config, max_x=height)
        mp = moments(xi)
        report.moment_pair = mp
        report.xi0, report.xi2 = mp.xi0, mp.xi2
        report.z0 = mp.xi0 / gamma_scale(xi, 0)
        report.log_z_second = log_z_second(xi, mp)
        report.origin = classify_origin(xi, mp).value
        logger.info("moments for D=%d: Z(0)=%s", disc.d, mpmath.nstr(report.z0, 10))

        stage = "zeros"
        zl = find_zeros(xi, count=config.zero_count, height=config.zero_height, tol=config.tol)
        report.zero_list = zl
        report.zeros_used = len(zl.gammas)
        if not zl.gammas:
            raise IncompleteZeroListError(f"no zeros found for D={disc.d}")
        scale = _log_scale(ctx, disc.d)
        report.gamma1 = zl.gammas[0]
        report.gamma1_tilde = report.gamma1 * scale
        report.lambda_naive = naive_lambda(report.gamma1)
        if len(zl.gammas) > 1:
            report.gamma2 = zl.gammas[1]
            report.gamma2_tilde = report.gamma2 * scale

        stage = "certify"
        report.certify_residual = certify(zl, mp, config.tail_factor)
        report.certify_flagged = zl.flagged
        if zl.residual < -2 * mp.ratio_err:
            raise IncompleteZeroListError(
                f"sum-rule residual {mpmath.nstr(zl.residual, 6)} is negative: a zero is missing",
                residual=zl.residual,
            )

        stage = "g0_bound"
        report.g0_bound = g0_bound(zl, mp)
        report.zeros_used_in_bound = first_index_above_one(zl.gammas)
        report.lowdef_u = 5 * report.gamma1 ** 2 * report.g0_bound
        if report.gamma1_tilde < 1:
            rest = -mp.xi2 / (2 * mp.xi0) - 1 / report.gamma1 ** 2
            report.rmt_g0_bound = rmt_g0_bound(rest, report.gamma1_tilde)

        stage = "lambda"
        try:
            report.lambda_value = lambda_bound(report.gamma1, report.g0_bound)
            report.satisfies_lowdef = True
            _check_lambda(report)
        except LowdefFailure as e:
            logger.warning("D=%d: %s", disc.d, e)
            report.satisfies_lowdef = False

        stage = "low3"
        if report.gamma2 is None:
            raise PreconditionError("the Low criterion needs two zeros")
        low3 = low3_classify(mp, report.gamma1, report.gamma2, disc.d)
        report.low3_lhs, report.low3_rhs, report.is_low = low3.lhs, low3.rhs, low3.is_low
        report.low3_intermediate_lhs, report.low3_intermediate_rhs = low3_intermediate(mp, report.gamma1, disc.d)
    except LowdiscError as e:
        logger.error("analysis of D=%d failed at stage %s: %s", disc.d, stage, e)
        report.error = StageError(stage=stage, message=str(e))
    logger.info("report for D=%d assembled (lambda=%s, low=%s)", disc.d,
                mpmath.nstr(report.lambda_value, 8) if report.lambda_value is not None else "none", report.is_low)
    return report


def best_bound(reports: Sequence[LowReport]):
    """Largest lambda over the reports, the strongest lower bound.

    Raises:
        EmptyResultError: If no report carries a lambda
    """
    values: List[Any] = [r.lambda_value for r in reports if r.lambda_value is not None]
    if not values:
        raise EmptyResultError("no report satisfies the Lowdef condition")
    return max(values)
