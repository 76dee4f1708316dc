"""Precision contexts and the special-function values used by the pipeline.

Every BigReal in lowdisc is an ``mpf`` owned by one ``mpmath.MPContext``.
Contexts are memoised per digit count, so evaluators built at the same
precision share a context and can exchange values freely; values from a
different context are rejected by :func:`coerce`.
"""

import logging
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from typing import Any, Optional, Tuple

import mpmath

from .errors import ConfigurationError, DomainError, PrecisionMismatchError, ReferenceUnavailableError

logger = logging.getLogger(__name__)

MIN_PRECISION = 17
MAX_PRECISION = 200
DEFAULT_PRECISION = 30
GUARD_DIGITS = 10
DEFAULT_REFERENCE_CEILING = 2000


@lru_cache(maxsize=None)
def make_context(digits: int) -> mpmath.MPContext:
    """Return the shared arithmetic context for ``digits`` decimal digits.

    Raises:
        ConfigurationError: If digits is outside [17, 200]
    """
    if isinstance(digits, bool) or not isinstance(digits, int):
        raise ConfigurationError(f"precision must be an integer, got {digits!r}")
    if not MIN_PRECISION <= digits <= MAX_PRECISION:
        raise ConfigurationError(
            f"precision must be between {MIN_PRECISION} and {MAX_PRECISION} digits, got {digits}"
        )
    ctx = mpmath.MPContext()
    ctx.dps = digits
    return ctx


def coerce(ctx: mpmath.MPContext, value: Any):
    """Convert ``value`` to an mpf of ``ctx``.

    Accepts int, str, Decimal, Fraction, float and mpf values. An mpf that
    belongs to another context raises PrecisionMismatchError.
    """
    owner = getattr(value, "context", None)
    if owner is not None:
        if owner is not ctx:
            raise PrecisionMismatchError(
                f"value {value} belongs to a {owner.dps}-digit context, expected {ctx.dps} digits"
            )
        return value
    if isinstance(value, Decimal):
        return ctx.mpf(str(value))
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / value.denominator
    if isinstance(value, bool):
        raise DomainError(f"cannot convert boolean {value!r} to a real number")
    if isinstance(value, (int, float, str)):
        try:
            return ctx.mpf(value)
        except ValueError as e:
            raise DomainError(f"cannot parse {value!r} as a real number") from e
    raise DomainError(f"unsupported numeric type {type(value).__name__}")


def to_decimal_string(x: Any, digits: int) -> str:
    """Render ``x`` with ``digits`` significant digits, trailing zeros kept."""
    return mpmath.nstr(x, digits, strip_zeros=False)


def gamma_real(ctx: mpmath.MPContext, x: Any):
    """Gamma function on the positive reals.

    Raises:
        DomainError: If x <= 0
    """
    x = coerce(ctx, x)
    if x <= 0:
        raise DomainError(f"gamma_real requires x > 0, got {x}")
    with ctx.extradps(GUARD_DIGITS):
        value = ctx.gamma(x)
    return +value


def trigamma_quarter(ctx: mpmath.MPContext):
    """(1/4) psi'(3/4), the archimedean constant in the log Z identity."""
    with ctx.extradps(GUARD_DIGITS):
        value = ctx.psi(1, ctx.mpf(3) / 4) / 4
    return +value


def abs_gamma_on_line(ctx: mpmath.MPContext, t: Any):
    """|Gamma(3/4 + i t/2)|, even in t."""
    t = coerce(ctx, t)
    with ctx.extradps(GUARD_DIGITS):
        value = abs(ctx.gamma(ctx.mpc(ctx.mpf(3) / 4, abs(t) / 2)))
    return +value


def hurwitz_zeta_em(ctx: mpmath.MPContext, s: Any, a: Any, terms: int, order: int):
    """Hurwitz zeta by Euler-Maclaurin summation.

    Sums ``terms`` leading terms directly and corrects with ``order``
    Bernoulli terms. Valid for real s != 1 and a > 0.
    """
    s = coerce(ctx, s)
    a = coerce(ctx, a)
    if a <= 0:
        raise DomainError(f"hurwitz_zeta_em requires a > 0, got {a}")
    if s == 1:
        raise DomainError("hurwitz_zeta_em has a pole at s = 1")
    head = ctx.fsum((k + a) ** (-s) for k in range(terms))
    shift = terms + a
    tail = shift ** (1 - s) / (s - 1) + shift ** (-s) / 2
    corrections = []
    for j in range(1, order + 1):
        coeff = ctx.bernoulli(2 * j) / ctx.factorial(2 * j) * ctx.rf(s, 2 * j - 1)
        corrections.append(coeff * shift ** (-s - 2 * j + 1))
    return head + tail + ctx.fsum(corrections)


def default_em_parameters(ctx: mpmath.MPContext) -> Tuple[int, int]:
    """Direct-term count and correction order that reach working precision."""
    digits = ctx.dps
    return digits, max(digits // 2, 4)


def reference_L_half(chi: Any, ctx: mpmath.MPContext, ceiling: int = DEFAULT_REFERENCE_CEILING,
                     em: Optional[Tuple[int, int]] = None):
    """L(1/2, chi) from the Hurwitz decomposition, independent of the theta kernel.

    L(s, chi) = D^{-s} sum_{a=1}^{D-1} chi(a) zeta(s, a/D), each Hurwitz zeta
    evaluated by Euler-Maclaurin.

    Args:
        chi: KroneckerCharacter
        ctx: Arithmetic context
        ceiling: Largest D accepted
        em: (terms, order) pair for the Euler-Maclaurin evaluation

    Raises:
        ReferenceUnavailableError: If D exceeds ceiling
    """
    d = chi.period
    if d > ceiling:
        raise ReferenceUnavailableError(
            f"reference L(1/2) unavailable at this size: D = {d} exceeds ceiling {ceiling}"
        )
    terms, order = em if em is not None else default_em_parameters(ctx)
    values = chi.values_upto(d - 1)
    with ctx.extradps(GUARD_DIGITS):
        half = ctx.mpf(1) / 2
        parts = [
            values[a] * hurwitz_zeta_em(ctx, half, ctx.mpf(a) / d, terms, order)
            for a in range(1, d)
            if values[a]
        ]
        value = ctx.fsum(parts) / ctx.sqrt(d)
    logger.debug("reference L(1/2) for D=%d with EM terms=%d order=%d", d, terms, order)
    return +value

