"""The theta kernel Phi(u, chi) and its certified truncation.

Phi(u, chi) = 4 sum_{n>=1} chi(n) n exp(3u/2 - n^2 pi exp(2u) / D).

The integration cutoff U and the per-point series length N(u) come from
explicit tail estimates with scale constant 1/eps (2e15 at eps = 5e-16).
"""

import functools
import logging
from typing import Any, Callable, Tuple

import mpmath

from .discriminant import KroneckerCharacter
from .errors import ConfigurationError, DomainError
from .specfun import GUARD_DIGITS, coerce

logger = logging.getLogger(__name__)

DEFAULT_EPS = "5e-16"
# Longer series than this read chi from the full period table.
FORCE_TABLE_TERMS = 10**4
PHI_CACHE_SIZE = 8192


def _check_eps(ctx: mpmath.MPContext, eps) -> None:
    if not 0 < eps < 1:
        raise ConfigurationError(f"eps must lie in (0, 1), got {eps}")
    floor = ctx.mpf(10) ** (3 - ctx.dps)
    if eps < floor:
        raise ConfigurationError(
            f"eps = {mpmath.nstr(eps, 5)} is too small for {ctx.dps}-digit precision "
            f"(needs eps >= 1e{3 - ctx.dps})"
        )


def truncation_params(d: int, eps: Any, ctx: mpmath.MPContext) -> Tuple[Any, Callable[[Any], int]]:
    """Integration cutoff U and the series-length function N(u).

    Args:
        d: The discriminant magnitude D >= 3
        eps: Target absolute accuracy in (0, 1)
        ctx: Arithmetic context

    Returns:
        (U, N) with N nonincreasing in u

    Raises:
        DomainError: If d < 3
        ConfigurationError: If eps is outside (0, 1) or below 10^(3-P)
    """
    if d < 3:
        raise DomainError(f"discriminant magnitude must be >= 3, got {d}")
    eps = coerce(ctx, eps)
    _check_eps(ctx, eps)
    scale = 1 / eps
    with ctx.extradps(GUARD_DIGITS):
        cutoff = ctx.log(d * ctx.log(scale * d * d))
        # One extra factor of D inside the logarithm absorbs the exp(3u/2) growth.
        width = ctx.sqrt(d) * ctx.sqrt(ctx.log(scale * d * d * cutoff))

    def series_length(u) -> int:
        with ctx.extradps(GUARD_DIGITS):
            return max(1, int(ctx.ceil(width * ctx.exp(-u))))

    return +cutoff, series_length


class PhiEvaluator:
    """Evaluates Phi(u, chi) to absolute accuracy eps / U.

    Attributes:
        chi: Kronecker character of the discriminant
        ctx: Arithmetic context shared by every value produced
        eps: Target absolute accuracy
        U: Integration cutoff
        scale_const: 1/eps, the generalized tail constant
    """

    def __init__(self, chi: KroneckerCharacter, ctx: mpmath.MPContext, eps: Any = DEFAULT_EPS):
        self.chi = chi
        self.ctx = ctx
        self.d = chi.period
        self.eps = coerce(ctx, eps)
        self.U, self._length = truncation_params(self.d, self.eps, ctx)
        self.scale_const = 1 / self.eps
        self.max_terms = self._length(ctx.mpf(0))
        if self.max_terms > FORCE_TABLE_TERMS:
            chi.ensure_table()
        self._chi_values = chi.values_upto(self.max_terms)
        self._cached = functools.lru_cache(maxsize=PHI_CACHE_SIZE)(self._evaluate)
        with ctx.extradps(GUARD_DIGITS):
            self._pi_over_d = ctx.pi / self.d
        logger.debug("Phi for D=%d: U=%s, N(0)=%d", self.d, mpmath.nstr(self.U, 8), self.max_terms)

    def series_length(self, u: Any) -> int:
        """N(u), the number of series terms used at u."""
        return self._length(coerce(self.ctx, u))

    def __call__(self, u: Any):
        return phi(self, u)

    def tail_bound(self, u: Any):
        """D exp(-exp(2u)/D), an upper bound for |Phi(u)|."""
        ctx = self.ctx
        u = coerce(ctx, u)
        return self.d * ctx.exp(-ctx.exp(2 * u) / self.d)

    def _evaluate(self, u):
        ctx = self.ctx
        n_max = self._length(u)
        with ctx.extradps(GUARD_DIGITS):
            q = self._pi_over_d * ctx.exp(2 * u)
            growth = 4 * ctx.exp(3 * u / 2)
            weight = ctx.exp(-q)
            ratio = ctx.exp(-3 * q)
            step = ctx.exp(-2 * q)
            cutoff = self.eps / (self.U * n_max)
            peak = ctx.sqrt(1 / (2 * q))
            values = self._chi_values
            terms = []
            for n in range(1, n_max + 1):
                c = values[n]
                if c:
                    terms.append(c * n * weight)
                # Past the peak the terms only shrink.
                if n > peak and growth * n * weight < cutoff:
                    break
                weight *= ratio
                ratio *= step
            value = growth * ctx.fsum(terms)
        return +value


def phi(e: PhiEvaluator, u: Any):
    """Phi(u, chi) for u >= 0.

    Raises:
        DomainError: If u < 0
    """
    u = coerce(e.ctx, u)
    if u < 0:
        raise DomainError(f"phi is defined here for u >= 0 only, got {u}")
    return e._cached(u)
