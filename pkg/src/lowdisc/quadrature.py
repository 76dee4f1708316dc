"""Composite Gauss-Legendre quadrature with panel refinement.

Nodes on [-1, 1] come from mpmath's Gauss-Legendre rule (3 * 2^(degree-1)
points) and are mapped affinely onto equal panels. Refinement multiplies
the panel count until consecutive estimates agree.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, List, Sequence, Tuple

import mpmath
from mpmath.calculus.quadrature import GaussLegendre

from .errors import ConfigurationError, NumericalFailure
from .specfun import GUARD_DIGITS

logger = logging.getLogger(__name__)

Nodes = Tuple[List[Any], List[Any]]


@dataclass(frozen=True)
class QuadratureSpec:
    """Panel layout and refinement schedule.

    Attributes:
        panels: Initial panel count
        degree: Gauss-Legendre degree index; each panel gets 3 * 2^(degree-1) nodes
        max_refinements: Refinement rounds before giving up
        factor: Panel multiplier per round
    """

    panels: int = 8
    degree: int = 5
    max_refinements: int = 5
    factor: int = 2

    def __post_init__(self):
        if self.panels < 1:
            raise ConfigurationError(f"panel count must be positive, got {self.panels}")
        if not 1 <= self.degree <= 10:
            raise ConfigurationError(f"quadrature degree must be in [1, 10], got {self.degree}")
        if self.max_refinements < 1:
            raise ConfigurationError(f"max_refinements must be positive, got {self.max_refinements}")
        if self.factor < 2:
            raise ConfigurationError(f"refinement factor must be >= 2, got {self.factor}")

    @property
    def nodes_per_panel(self) -> int:
        return 3 * 2 ** (self.degree - 1)


@dataclass
class Refinement:
    """Outcome of a converged refinement.

    ``values`` holds the functionals at the finest level and ``deltas`` their
    change from the previous level.
    """

    nodes: List[Any]
    weights: List[Any]
    values: List[Any]
    deltas: List[Any]
    panels: int
    rounds: int

    @property
    def delta(self):
        return max(self.deltas)


@lru_cache(maxsize=None)
def standard_nodes(ctx: mpmath.MPContext, degree: int, prec: int) -> Tuple[Tuple[Any, Any], ...]:
    """Gauss-Legendre (node, weight) pairs on [-1, 1], sorted by node."""
    rule = GaussLegendre(ctx)
    pairs = rule.get_nodes(-1, 1, degree, prec)
    return tuple(sorted(((ctx.mpf(x), ctx.mpf(w)) for x, w in pairs), key=lambda p: p[0]))


def composite_nodes(ctx: mpmath.MPContext, a: Any, b: Any, panels: int, degree: int) -> Nodes:
    """Nodes and weights of the composite rule on [a, b] with equal panels."""
    base = standard_nodes(ctx, degree, ctx.prec)
    width = (b - a) / panels
    half = width / 2
    nodes: List[Any] = []
    weights: List[Any] = []
    for i in range(panels):
        mid = a + (i + ctx.mpf(1) / 2) * width
        for x, w in base:
            nodes.append(mid + half * x)
            weights.append(half * w)
    return nodes, weights


def refine(ctx: mpmath.MPContext, quad: QuadratureSpec, a: Any, b: Any,
           functionals: Callable[[Sequence[Any], Sequence[Any]], Sequence[Any]], eps: Any) -> Refinement:
    """Refine the panel count until every functional settles.

    ``functionals(nodes, weights)`` returns the estimates at one level.
    Convergence requires each change to be at most eps * max(1, |value|).

    Raises:
        NumericalFailure: If max_refinements rounds do not converge
    """
    panels = quad.panels
    with ctx.extradps(GUARD_DIGITS):
        nodes, weights = composite_nodes(ctx, a, b, panels, quad.degree)
        previous = list(functionals(nodes, weights))
    deltas: List[Any] = []
    for rounds in range(1, quad.max_refinements + 1):
        panels *= quad.factor
        with ctx.extradps(GUARD_DIGITS):
            nodes, weights = composite_nodes(ctx, a, b, panels, quad.degree)
            current = list(functionals(nodes, weights))
        deltas = [abs(c - p) for c, p in zip(current, previous)]
        logger.debug("quadrature round %d: %d panels, max delta %s",
                     rounds, panels, mpmath.nstr(max(deltas), 5))
        if all(dv <= eps * max(1, abs(c)) for dv, c in zip(deltas, current)):
            return Refinement(nodes, weights, current, deltas, panels, rounds)
        previous = current
    raise NumericalFailure(
        f"quadrature did not converge after {quad.max_refinements} refinements "
        f"({panels} panels on [{mpmath.nstr(a, 6)}, {mpmath.nstr(b, 6)}])",
        residual=max(deltas),
    )


def integrate(ctx: mpmath.MPContext, f: Callable[[Any], Any], a: Any, b: Any,
              quad: QuadratureSpec = QuadratureSpec(), eps: Any = None) -> Tuple[Any, Any]:
    """Integral of f over [a, b] and the last refinement delta."""
    eps = eps if eps is not None else ctx.mpf(10) ** (3 - ctx.dps)

    def single(nodes, weights):
        return [ctx.fdot(weights, [f(u) for u in nodes])]

    result = refine(ctx, quad, ctx.convert(a), ctx.convert(b), single, eps)
    return +result.values[0], result.delta
