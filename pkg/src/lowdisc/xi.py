"""The completed function Xi_t(x, chi) by quadrature of the theta kernel.

Xi_t(x) = int_0^U exp(t u^2) Phi(u) cos(u x) du. For t = 0 this is
Xi(x, chi) = (D/pi)^{3/4} |Gamma(3/4 + i x/2)| Z(x, chi), and the moments
Xi(0) and Xi''(0) follow from the same nodes.

The quadrature grid is sized for a maximum height and a maximum time; it is
refined until the zeroth moment, the second moment and Xi_t at the top of
the height range all settle. Evaluators at other times reuse a grid that
covers them.
"""

import logging
from dataclasses import dataclass
from typing import Any, Iterator, List, Optional, Tuple

import mpmath

from .discriminant import DEFAULT_TABLE_LIMIT, FundamentalDiscriminant, KroneckerCharacter
from .errors import DomainError
from .quadrature import QuadratureSpec, refine
from .specfun import GUARD_DIGITS, abs_gamma_on_line, coerce, make_context, trigamma_quarter
from .theta import DEFAULT_EPS, PhiEvaluator

logger = logging.getLogger(__name__)

# Rotation recurrences are reseeded with direct cos/sin this often.
RESEED_INTERVAL = 128


@dataclass(frozen=True)
class MomentPair:
    """Xi(0), Xi''(0) and a bound on both absolute errors."""

    xi0: Any
    xi2: Any
    err: Any

    @property
    def ratio(self):
        """xi2 / xi0."""
        return self.xi2 / self.xi0

    @property
    def ratio_err(self):
        """Propagated error bound on -xi2 / (2 xi0)."""
        x0 = abs(self.xi0)
        return (self.err / x0 + abs(self.xi2) * self.err / (x0 * x0)) / 2


@dataclass
class XiGrid:
    """Converged quadrature nodes for heights up to max_x and times up to max_t."""

    nodes: List[Any]
    weights: List[Any]
    max_x: Any
    max_t: Any
    panels: int
    delta: Any

    def covers(self, max_x, t) -> bool:
        return max_x <= self.max_x and t <= self.max_t


def build_grid(phi: PhiEvaluator, quad: QuadratureSpec, max_x: Any, t: Any) -> XiGrid:
    """Refine composite Gauss-Legendre panels on [0, U] for the given height and time.

    Raises:
        NumericalFailure: If the refinement schedule is exhausted
    """
    ctx = phi.ctx

    def functionals(nodes, weights):
        kernel = [w * ctx.exp(t * u * u) * phi(u) for u, w in zip(nodes, weights)]
        out = [ctx.fsum(kernel), ctx.fdot(kernel, [u * u for u in nodes])]
        if max_x:
            out.append(ctx.fdot(kernel, [ctx.cos(u * max_x) for u in nodes]))
        return out

    result = refine(ctx, quad, ctx.mpf(0), phi.U, functionals, phi.eps)
    logger.info("quadrature grid for D=%d: %d panels, height %s, time %s",
                phi.d, result.panels, mpmath.nstr(max_x, 6), mpmath.nstr(t, 6))
    return XiGrid(result.nodes, result.weights, max_x, max(t, ctx.mpf(0)), result.panels, result.delta)


class XiEvaluator:
    """Xi_t(x, chi) at a fixed deformation time t with |t| <= 1/2.

    Attributes:
        phi: Theta kernel evaluator
        quad: Quadrature schedule
        t: Deformation time
        max_x: Largest height the grid is certified for
        err: Absolute error bound on every value produced
    """

    def __init__(self, phi: PhiEvaluator, quad: Optional[QuadratureSpec] = None, t: Any = 0,
                 max_x: Any = 0, grid: Optional[XiGrid] = None):
        ctx = phi.ctx
        self.phi = phi
        self.ctx = ctx
        self.quad = quad or QuadratureSpec()
        self.t = coerce(ctx, t)
        if abs(self.t) > ctx.mpf(1) / 2:
            raise DomainError(f"deformation time must satisfy |t| <= 1/2, got {self.t}")
        max_x = abs(coerce(ctx, max_x))
        if grid is None or not grid.covers(max_x, self.t):
            grid = build_grid(phi, self.quad, max_x, self.t)
        self.grid = grid
        self.max_x = grid.max_x
        with ctx.extradps(GUARD_DIGITS):
            self._nodes = grid.nodes
            self._coeffs = [w * ctx.exp(self.t * u * u) * phi(u) for u, w in zip(grid.nodes, grid.weights)]
            # Phi is only non-negligible below u_eff, where exp(t u^2) amplifies its truncation error.
            u_eff = ctx.log(phi.d * ctx.log(phi.d / phi.eps)) / 2
            self.trunc = phi.eps * (1 + phi.U ** 2) * ctx.exp(max(self.t, 0) * u_eff ** 2)
        self.err = +(self.trunc + grid.delta)

    @classmethod
    def for_discriminant(cls, disc: FundamentalDiscriminant, precision: int = 30, eps: Any = DEFAULT_EPS,
                         quad: Optional[QuadratureSpec] = None, t: Any = 0, max_x: Any = 0,
                         table_limit: int = DEFAULT_TABLE_LIMIT) -> "XiEvaluator":
        ctx = make_context(precision)
        phi = PhiEvaluator(KroneckerCharacter(disc, table_limit), ctx, eps)
        return cls(phi, quad, t, max_x)

    @property
    def d(self) -> int:
        return self.phi.d

    @property
    def disc(self) -> FundamentalDiscriminant:
        return self.phi.chi.disc

    def with_time(self, t: Any) -> "XiEvaluator":
        """Evaluator at another deformation time, sharing the grid when it covers t."""
        return XiEvaluator(self.phi, self.quad, t, self.max_x, self.grid)

    def with_height(self, max_x: Any) -> "XiEvaluator":
        """Evaluator certified up to a larger height."""
        return XiEvaluator(self.phi, self.quad, self.t, max_x, self.grid)

    def __call__(self, x: Any):
        return xi_t(self, x)

    def iter_grid(self, start: Any, step: Any, count: int) -> Iterator[Tuple[Any, Any]]:
        """Yield (x, Xi_t(x)) at x = start + k*step for k < count.

        Uses the angle-addition recurrence on every node, reseeded
        periodically from direct evaluation.
        """
        ctx = self.ctx
        start = coerce(ctx, start)
        step = coerce(ctx, step)
        top = max(abs(start), abs(start + (count - 1) * step)) if count else 0
        self._check_height(top)
        nodes = self._nodes
        with ctx.extradps(GUARD_DIGITS):
            rot_c = [ctx.cos(u * step) for u in nodes]
            rot_s = [ctx.sin(u * step) for u in nodes]
        cs: List[Any] = []
        sn: List[Any] = []
        for k in range(count):
            # Guard digits around the arithmetic only, never across a yield.
            with ctx.extradps(GUARD_DIGITS):
                x = start + k * step
                if k % RESEED_INTERVAL == 0:
                    cs = [ctx.cos(u * x) for u in nodes]
                    sn = [ctx.sin(u * x) for u in nodes]
                else:
                    cs, sn = (
                        [c * rc - s * rs for c, s, rc, rs in zip(cs, sn, rot_c, rot_s)],
                        [s * rc + c * rs for c, s, rc, rs in zip(cs, sn, rot_c, rot_s)],
                    )
                value = ctx.fdot(self._coeffs, cs)
            yield +x, +value

    def _check_height(self, x) -> None:
        if abs(x) > self.max_x:
            raise DomainError(
                f"|x| = {mpmath.nstr(abs(x), 8)} exceeds the certified height {mpmath.nstr(self.max_x, 8)}"
            )


def xi_t(e: XiEvaluator, x: Any):
    """Xi_t(x, chi) with absolute error at most e.err; even in x."""
    ctx = e.ctx
    x = coerce(ctx, x)
    e._check_height(x)
    with ctx.extradps(GUARD_DIGITS):
        value = ctx.fdot(e._coeffs, [ctx.cos(u * x) for u in e._nodes])
    return +value


def xi_t_derivative(e: XiEvaluator, x: Any, order: int):
    """d^k/dx^k Xi_t(x) by differentiating under the integral."""
    if order < 0:
        raise DomainError(f"derivative order must be nonnegative, got {order}")
    ctx = e.ctx
    x = coerce(ctx, x)
    e._check_height(x)
    with ctx.extradps(GUARD_DIGITS):
        # d^k/dx^k cos(ux) = u^k cos(ux + k pi/2)
        phase = ctx.pi * order / 2
        basis = [u ** order * ctx.cos(u * x + phase) for u in e._nodes]
        value = ctx.fdot(e._coeffs, basis)
    return +value


def _require_undeformed(e: XiEvaluator, what: str) -> None:
    if e.t != 0:
        raise DomainError(f"{what} requires the undeformed evaluator (t = 0), got t = {e.t}")


def gamma_scale(e: XiEvaluator, t_ord: Any):
    """(D/pi)^{3/4} |Gamma(3/4 + i t/2)|, the factor between Xi and Z."""
    ctx = e.ctx
    with ctx.extradps(GUARD_DIGITS):
        value = (e.d / ctx.pi) ** (ctx.mpf(3) / 4) * abs_gamma_on_line(ctx, t_ord)
    return +value


def z_value(e: XiEvaluator, t_ord: Any):
    """Z(t, chi) = Xi(t) / ((D/pi)^{3/4} |Gamma(3/4 + i t/2)|)."""
    _require_undeformed(e, "z_value")
    t_ord = coerce(e.ctx, t_ord)
    return xi_t(e, t_ord) / gamma_scale(e, t_ord)


def moments(e: XiEvaluator) -> MomentPair:
    """Xi(0) and Xi''(0) = -int u^2 Phi(u) du from the grid nodes."""
    _require_undeformed(e, "moments")
    ctx = e.ctx
    with ctx.extradps(GUARD_DIGITS):
        xi0 = ctx.fsum(e._coeffs)
        xi2 = -ctx.fdot(e._coeffs, [u * u for u in e._nodes])
        err = e.phi.eps * (2 + e.phi.U ** 2) + e.grid.delta
    logger.debug("moments for D=%d: xi0=%s xi2=%s", e.d, mpmath.nstr(xi0, 12), mpmath.nstr(xi2, 12))
    return MomentPair(+xi0, +xi2, +err)


def log_z_second(e: XiEvaluator, mp: Optional[MomentPair] = None):
    """(log Z)''(0) = xi2/xi0 + (1/4) psi'(3/4).

    Xi''(0)/Xi(0) = -2 sum_j gamma_j^-2 over the positive ordinates, that is
    the sum over all zeros +-gamma_j.
    """
    mp = mp or moments(e)
    return mp.xi2 / mp.xi0 + trigamma_quarter(e.ctx)


def log_l_second_from_moments(mp: MomentPair, ctx: mpmath.MPContext):
    """(log L)''(0) = xi2/xi0 - (1/4) psi'(3/4) from a moment pair."""
    return mp.xi2 / mp.xi0 - trigamma_quarter(ctx)


def log_l_second(e: XiEvaluator, mp: Optional[MomentPair] = None):
    """(log L)''(0) in the sign convention of the Low criterion.

    The Gamma factor enters with the opposite sign to (log Z)''(0), so
    -(1/2) log_l_second = sum_j gamma_j^-2 + (1/8) psi'(3/4).
    """
    mp = mp or moments(e)
    return log_l_second_from_moments(mp, e.ctx)
