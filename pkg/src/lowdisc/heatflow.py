"""Motion of the zeros of Xi_t under the backward heat flow.

The positive zeros x_1 < ... < x_m (with mirror images -x_k) obey

    x_k' = 1/x_k + sum_{j != k} [2/(x_k - x_j) + 2/(x_k + x_j)]

truncated to |j| <= m. The system is integrated by an embedded
Runge-Kutta 5(4) pair with PI step control; the repulsive 1/gap terms are
handled by capping the step at a fraction of min_gap^2.
"""

import csv
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, List, Optional, Sequence, TextIO, Tuple

import mpmath
import numpy as np

from .discriminant import FundamentalDiscriminant
from .errors import DomainError, NumericalFailure, SingularConfigurationError, StiffnessError
from .models import OracleGap, RunConfig
from .newman import build_evaluator
from .specfun import coerce, make_context, to_decimal_string
from .xi import XiEvaluator, xi_t_derivative
from .zeros import ZeroList, find_zeros, scan_step

logger = logging.getLogger(__name__)

# Dormand-Prince 5(4) tableau in autonomous form (no c_i).
_DP_A = (
    (),
    (Fraction(1, 5),),
    (Fraction(3, 40), Fraction(9, 40)),
    (Fraction(44, 45), Fraction(-56, 15), Fraction(32, 9)),
    (Fraction(19372, 6561), Fraction(-25360, 2187), Fraction(64448, 6561), Fraction(-212, 729)),
    (Fraction(9017, 3168), Fraction(-355, 33), Fraction(46732, 5247), Fraction(49, 176), Fraction(-5103, 18656)),
    (Fraction(35, 384), Fraction(0), Fraction(500, 1113), Fraction(125, 192), Fraction(-2187, 6784),
     Fraction(11, 84)),
)
_DP_B = _DP_A[6] + (Fraction(0),)
_DP_B_STAR = (Fraction(5179, 57600), Fraction(0), Fraction(7571, 16695), Fraction(393, 640),
              Fraction(-92097, 339200), Fraction(187, 2100), Fraction(1, 40))

SAFETY = Fraction(9, 10)
PI_ALPHA = Fraction(7, 50)
PI_BETA = Fraction(2, 25)
MIN_FACTOR = Fraction(1, 5)
MAX_FACTOR = 5
GAP_STEP_FRACTION = Fraction(1, 20)
MAX_STEPS = 200000


class FlowStatus(str, Enum):
    COMPLETED = "completed"
    COLLISION = "collision"


class CollisionClass(str, Enum):
    """Behaviour of a near-double root under the heat flow."""

    COMPLEXIFY = "complexify"
    TWO_REAL_ROOTS = "two-real-roots"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FlowState:
    """Heat time and the positive zero positions x_1 < ... < x_m."""

    t: Any
    x: Tuple[Any, ...]

    def __post_init__(self):
        if not self.x:
            raise DomainError("a flow state needs at least one position")
        if not self.x[0] > 0 or any(not b > a for a, b in zip(self.x, self.x[1:])):
            raise DomainError("flow positions must be positive and strictly increasing")

    @property
    def m(self) -> int:
        return len(self.x)

    @property
    def min_gap(self):
        """min(2 x_1, min_j (x_{j+1} - x_j))."""
        return min([2 * self.x[0]] + [b - a for a, b in zip(self.x, self.x[1:])])

    @classmethod
    def from_zeros(cls, zl: ZeroList, m: int) -> "FlowState":
        """Initial state at t = 0 from the first m ordinates."""
        if len(zl.gammas) < m:
            raise DomainError(f"need {m} zeros to seed the flow, have {len(zl.gammas)}")
        ctx = zl.gammas[0].context
        return cls(ctx.mpf(0), tuple(zl.gammas[:m]))


@dataclass(frozen=True)
class FlowDiagnostics:
    t: Any
    f: Any
    g: Any
    g_prime_fd: Any
    slack: Any
    growth_bound_ok: bool


@dataclass
class FlowResult:
    """End state of an integration with its sampled trajectory."""

    final: FlowState
    samples: List[FlowState] = field(default_factory=list)
    status: FlowStatus = FlowStatus.COMPLETED
    stop_time: Any = None
    accepted: int = 0
    rejected: int = 0


def _ctx_of(state: FlowState) -> mpmath.MPContext:
    return state.x[0].context


def _rational(ctx: mpmath.MPContext, v: Fraction):
    return ctx.mpf(v.numerator) / v.denominator


def _rates(ctx: mpmath.MPContext, x: Sequence[Any]) -> List[Any]:
    pos = np.array(x, dtype=object)
    m = len(pos)
    diff = pos[:, None] - pos[None, :]
    total = pos[:, None] + pos[None, :]
    off_diagonal = ~np.eye(m, dtype=bool)
    if any(v == 0 for v in diff[off_diagonal]) or any(v == 0 for v in total.ravel()):
        raise SingularConfigurationError("two zero positions coincide; the flow field is singular")
    np.fill_diagonal(diff, 1)
    pull = 2 / diff
    np.fill_diagonal(pull, 0)
    # The j = k entry of 2/(x_k + x_j) is the mirror term 1/x_k.
    field_terms = pull + 2 / total
    return [ctx.fsum(row) for row in field_terms]


def derivative(s: FlowState) -> Tuple[Any, ...]:
    """x_k' for every k, including the mirror contribution 1/x_k.

    Raises:
        SingularConfigurationError: If two positions coincide
    """
    return tuple(_rates(_ctx_of(s), s.x))


def f_and_g(s: FlowState) -> Tuple[Any, Any]:
    """f = sum_{j>=2} 4/(x_j^2 - x_1^2) and g = sum_{j>=2} 2[(x_j + x_1)^-2 + (x_j - x_1)^-2]."""
    ctx = _ctx_of(s)
    x1 = s.x[0]
    f = ctx.fsum(4 / (xj * xj - x1 * x1) for xj in s.x[1:])
    g = ctx.fsum(2 / (xj + x1) ** 2 + 2 / (xj - x1) ** 2 for xj in s.x[1:])
    return f, g


def _ordered(x: Sequence[Any]) -> bool:
    return x[0] > 0 and all(b > a for a, b in zip(x, x[1:]))


def integrate(s0: FlowState, t_end: Any, tol: Any, sample_times: Optional[Sequence[Any]] = None,
              collision_tol: Any = None, h0: Any = None) -> FlowResult:
    """Integrate from s0.t to t_end, forward or backward.

    Every accepted step keeps the positions positive and strictly increasing
    and has estimated local error at most tol. Steps land exactly on the
    requested sample times. Integration stops early when min_gap falls
    below collision_tol (default 10 tol).

    Raises:
        StiffnessError: If the step size underflows
    """
    ctx = _ctx_of(s0)
    t_end = coerce(ctx, t_end)
    tol = coerce(ctx, tol)
    if tol < ctx.mpf(10) ** (3 - ctx.dps):
        raise DomainError(f"tol must be at least 1e{3 - ctx.dps} at {ctx.dps} digits")
    collision_tol = coerce(ctx, collision_tol) if collision_tol is not None else 10 * tol
    direction = 1 if t_end >= s0.t else -1
    times = sorted({coerce(ctx, t) for t in (sample_times or [])} | {t_end}, reverse=direction < 0)
    times = [t for t in times if (t - s0.t) * direction >= 0]

    a = [[_rational(ctx, v) for v in row] for row in _DP_A]
    e = [_rational(ctx, v) - _rational(ctx, w) for v, w in zip(_DP_B, _DP_B_STAR)]
    floor = ctx.mpf(10) ** (4 - ctx.dps)
    safety, alpha, beta, min_factor, gap_fraction = (
        _rational(ctx, v) for v in (SAFETY, PI_ALPHA, PI_BETA, MIN_FACTOR, GAP_STEP_FRACTION)
    )

    result = FlowResult(final=s0)
    t, x = s0.t, list(s0.x)
    if times and times[0] == s0.t:
        result.samples.append(s0)
        times = times[1:]
    k1 = _rates(ctx, x)
    gap = s0.min_gap
    proposal = coerce(ctx, h0) if h0 is not None else min(tol ** (ctx.mpf(1) / 5), gap ** 2 / 40)
    previous_err = ctx.mpf(1)

    while times:
        if result.accepted + result.rejected > MAX_STEPS:
            raise StiffnessError(f"step budget exhausted at t = {mpmath.nstr(t, 10)}")
        target = times[0]
        remaining = abs(target - t)
        if remaining <= floor * max(1, abs(t)):
            t = target
            state = FlowState(t, tuple(x))
            result.final = state
            result.samples.append(state)
            times = times[1:]
            continue
        proposal = min(abs(proposal), gap_fraction * gap ** 2)
        if proposal < floor * max(1, abs(t)):
            raise StiffnessError(f"step size underflow at t = {mpmath.nstr(t, 10)}", residual=proposal)
        h = min(proposal, remaining)
        step = h * direction
        stages = [k1]
        try:
            for i in range(1, 7):
                y = [xn + step * ctx.fsum(a[i][j] * stages[j][n] for j in range(i)) for n, xn in enumerate(x)]
                stages.append(_rates(ctx, y))
        except SingularConfigurationError:
            result.rejected += 1
            proposal = h / 2
            continue
        # The last stage row equals the fifth-order weights, so y is the new solution.
        error = max(abs(step * ctx.fsum(e[j] * stages[j][n] for j in range(7))) for n in range(len(x)))
        err_ratio = error / tol
        if not _ordered(y):
            result.rejected += 1
            proposal = h / 2
            logger.debug("rejected step %s at t=%s: ordering lost", mpmath.nstr(step, 5), mpmath.nstr(t, 8))
            continue
        if err_ratio > 1:
            result.rejected += 1
            proposal = h * max(min_factor, safety * err_ratio ** (-ctx.mpf(1) / 5))
            logger.debug("rejected step %s at t=%s (error ratio %s)", mpmath.nstr(step, 5),
                         mpmath.nstr(t, 8), mpmath.nstr(err_ratio, 5))
            continue

        result.accepted += 1
        t = target if h == remaining else t + step
        x = y
        k1 = stages[6]
        state = FlowState(t, tuple(x))
        gap = state.min_gap
        result.final = state
        if t == target:
            result.samples.append(state)
            times = times[1:]
        if gap < collision_tol:
            result.status = FlowStatus.COLLISION
            result.stop_time = t
            logger.warning("zeros collide near t = %s (min gap %s)", mpmath.nstr(t, 10), mpmath.nstr(gap, 5))
            break
        err_ratio = max(err_ratio, ctx.mpf(10) ** -10)
        factor = safety * err_ratio ** (-alpha) * previous_err ** beta
        proposal = h * min(max(factor, min_factor), MAX_FACTOR)
        previous_err = err_ratio

    logger.info("flow reached t=%s after %d accepted and %d rejected steps",
                mpmath.nstr(result.final.t, 8), result.accepted, result.rejected)
    return result


def diagnostics(s: FlowState, h: Any = None, tol: Any = None) -> FlowDiagnostics:
    """f, g, a centered-difference g' and the check g' >= -8 g^2 - slack.

    The derivative uses two short integrations of length h; the slack
    allows for the difference error and the integrator tolerance.
    """
    ctx = _ctx_of(s)
    f, g = f_and_g(s)
    if s.m == 1:
        zero = ctx.mpf(0)
        return FlowDiagnostics(s.t, f, g, zero, zero, True)
    tol = coerce(ctx, tol) if tol is not None else ctx.mpf(10) ** (6 - ctx.dps)
    h = coerce(ctx, h) if h is not None else tol ** (ctx.mpf(1) / 3)
    ahead = integrate(s, s.t + h, tol / 10, collision_tol=0)
    behind = integrate(s, s.t - h, tol / 10, collision_tol=0)
    g_plus = f_and_g(ahead.final)[1]
    g_minus = f_and_g(behind.final)[1]
    g_prime = (g_plus - g_minus) / (2 * h)
    slack = abs(g_plus - 2 * g + g_minus) / h + 8 * tol * max(g, 1) ** (ctx.mpf(3) / 2) / h
    ok = bool(g_prime >= -8 * g * g - slack)
    return FlowDiagnostics(s.t, f, g, g_prime, slack, ok)


def g_upper_bound(g0: Any, t: Any):
    """g0 / (1 + 8 g0 t), the bound on g(t) for -1/(8 g0) < t <= 0 implied by g' > -8 g^2."""
    ctx = g0.context if hasattr(g0, "context") else mpmath.mp
    t = coerce(ctx, t)
    if t > 0 or 1 + 8 * g0 * t <= 0:
        raise DomainError(f"g_upper_bound needs -1/(8 g0) < t <= 0, got t = {t}")
    return g0 / (1 + 8 * g0 * t)


def drift_allowance(s0: FlowState, tail_sum: Any, next_gamma: Any, dt: Any) -> Tuple[Any, ...]:
    """First-order bound on the drift of each x_k caused by dropping zeros beyond m.

    Omitted terms contribute at most 4 x_k R / (1 - x_k^2 / gamma_{m+1}^2) per unit
    time, R being the sum of gamma_j^-2 over the dropped zeros.
    """
    ctx = _ctx_of(s0)
    dt = abs(coerce(ctx, dt))
    tail_sum = coerce(ctx, tail_sum)
    next_gamma = coerce(ctx, next_gamma)
    out = []
    for xk in s0.x:
        shrink = 1 - xk * xk / (next_gamma * next_gamma)
        out.append(4 * xk * tail_sum / shrink * dt if shrink > 0 else ctx.inf)
    return tuple(out)


def mirror_pair_identity(samples: Sequence[FlowState]) -> List[Any]:
    """Relative gap between x_1(t)^2 and its integrating-factor solution.

    With F(t) = 2 int_0^t f, x_1^2 = e^{-F} (2 int_0^t e^F + x_1(0)^2). Both
    integrals use the trapezoid rule on the samples.
    """
    if not samples:
        return []
    ctx = _ctx_of(samples[0])
    fs = [f_and_g(s)[0] for s in samples]
    big_f = [ctx.mpf(0)]
    growth = [ctx.mpf(0)]
    for i in range(1, len(samples)):
        dt = samples[i].t - samples[i - 1].t
        big_f.append(big_f[-1] + dt * (fs[i] + fs[i - 1]))
        growth.append(growth[-1] + dt * (ctx.exp(big_f[i]) + ctx.exp(big_f[i - 1])))
    x0_sq = samples[0].x[0] ** 2
    gaps = []
    for s, bf, gr in zip(samples, big_f, growth):
        predicted = ctx.exp(-bf) * (gr + x0_sq)
        actual = s.x[0] ** 2
        gaps.append(abs(predicted - actual) / actual)
    return gaps


def taylor_discriminant(d2: Any, d3: Any, d4: Any, delta: Any, forward: bool):
    """Discriminant in eps of the quadratic model of Xi_{t0 +- delta^2}(x0 + eps).

    +-2 delta^2 Xi''^2 + delta^4 (Xi'''^2 - Xi'' Xi''''), with + for forward time.
    """
    sign = 1 if forward else -1
    return sign * 2 * delta ** 2 * d2 ** 2 + delta ** 4 * (d3 ** 2 - d2 * d4)


def taylor_model(d2: Any, d3: Any, d4: Any, delta: Any, eps: Any, forward: bool):
    """Second-order model of Xi_{t0 +- delta^2}(x0 + eps) at a double root."""
    sign = 1 if forward else -1
    return d2 * (eps ** 2 / 2 - sign * delta ** 2) - sign * d3 * delta ** 2 * eps + d4 * delta ** 4 / 2


@dataclass(frozen=True)
class CollisionResult:
    """Taylor discriminants at a suspected double root, backward first."""

    value: Any
    classification: CollisionClass
    forward_value: Any
    forward_classification: CollisionClass


def _collision_class(value: Any, resolved: bool) -> CollisionClass:
    if not resolved or value == 0:
        return CollisionClass.INCONCLUSIVE
    return CollisionClass.COMPLEXIFY if value < 0 else CollisionClass.TWO_REAL_ROOTS


def collision_discriminant(disc: Any, t0: Any, x0: Any, h: Any, config: Optional[RunConfig] = None,
                           xi: Optional[XiEvaluator] = None) -> CollisionResult:
    """Taylor discriminant of Xi_{t0 -+ h^2} near a suspected double root x0.

    ``value`` belongs to backward time, where a negative discriminant means
    the pair leaves the real line. In forward time a positive discriminant
    means two simple real roots. Both directions are inconclusive while
    Xi''(x0) is within its error bound.

    Args:
        disc: Negative fundamental discriminant
        t0: Heat time with |t0| <= 1/2
        x0: Location of the suspected double root
        h: Time offset scale; the model is taken at t0 -+ h^2
        config: Settings for the evaluator built here
        xi: Evaluator for disc to reuse instead of building one

    Raises:
        DomainError: If |t0| > 1/2, x0 is above the evaluator height, or xi
            belongs to another discriminant
    """
    config = config or RunConfig()
    if not isinstance(disc, FundamentalDiscriminant):
        disc = FundamentalDiscriminant(int(disc))
    if xi is None:
        ctx = make_context(config.precision)
        t0, x0 = coerce(ctx, t0), coerce(ctx, x0)
        xi = build_evaluator(disc, config, max_x=abs(x0), t=t0)
    else:
        if xi.d != disc.d:
            raise DomainError(f"evaluator is for D={xi.d}, not D={disc.d}")
        ctx = xi.ctx
        t0, x0 = coerce(ctx, t0), coerce(ctx, x0)
        if xi.t != t0:
            xi = xi.with_time(t0)
    h = coerce(ctx, h)
    d2, d3, d4 = (xi_t_derivative(xi, x0, k) for k in (2, 3, 4))
    backward = taylor_discriminant(d2, d3, d4, h, forward=False)
    forward = taylor_discriminant(d2, d3, d4, h, forward=True)
    resolved = abs(d2) > xi.err * xi.phi.U ** 2
    result = CollisionResult(backward, _collision_class(backward, resolved),
                             forward, _collision_class(forward, resolved))
    logger.debug("collision model for D=%d at t=%s, x=%s: backward %s, forward %s", disc.d,
                 mpmath.nstr(t0, 8), mpmath.nstr(x0, 8), result.classification.value,
                 result.forward_classification.value)
    return result


def oracle_gaps(xi: XiEvaluator, samples: Sequence[FlowState], drift_rates: Sequence[Any] = (),
                tol: Any = "1e-10") -> List[OracleGap]:
    """Compare ODE positions with quadrature roots of Xi_t at each sampled time.

    Samples outside 0 < t <= 1/2 are skipped. Roots are matched by index; the
    allowance for x_k at time t is max(1e-6, drift_rates[k] * t).
    """
    ctx = xi.ctx
    usable = [s for s in samples if 0 < s.t <= ctx.mpf(1) / 2]
    if not usable:
        return []
    step = scan_step(xi.d, ctx)
    height = max(s.x[-1] for s in usable) + 4 * step
    base = xi.with_time(max(s.t for s in usable)).with_height(height)
    floor = ctx.mpf("1e-6")
    gaps: List[OracleGap] = []
    for s in usable:
        roots = find_zeros(base.with_time(s.t), height=height, tol=tol).gammas
        for k, xk in enumerate(s.x):
            allowance = max(floor, drift_rates[k] * s.t) if k < len(drift_rates) else floor
            digits = ctx.dps
            if k < len(roots):
                gap = abs(roots[k] - xk)
                gaps.append(OracleGap(t=to_decimal_string(s.t, digits), index=k + 1,
                                      ode=to_decimal_string(xk, digits),
                                      quadrature=to_decimal_string(roots[k], digits),
                                      gap=to_decimal_string(gap, 6),
                                      allowance=to_decimal_string(allowance, 6), ok=bool(gap <= allowance)))
            else:
                gaps.append(OracleGap(t=to_decimal_string(s.t, digits), index=k + 1,
                                      ode=to_decimal_string(xk, digits),
                                      allowance=to_decimal_string(allowance, 6), ok=False))
    bad = sum(not g.ok for g in gaps)
    if bad:
        logger.warning("%d of %d ODE positions miss their quadrature root", bad, len(gaps))
    return gaps


def write_trajectory_csv(samples: Sequence[FlowState], stream: TextIO, digits: int) -> None:
    """Header t, x_1, ..., x_m and one row per sample."""
    if not samples:
        raise NumericalFailure("no trajectory samples to write")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["t"] + [f"x_{k}" for k in range(1, samples[0].m + 1)])
    for s in samples:
        writer.writerow([to_decimal_string(s.t, digits)] + [to_decimal_string(v, digits) for v in s.x])
