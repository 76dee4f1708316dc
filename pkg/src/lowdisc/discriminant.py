"""Negative fundamental discriminants and their Kronecker characters."""

import logging
from dataclasses import dataclass, field
from math import gcd, isqrt
from typing import List, Optional, Tuple

from .errors import DomainError

logger = logging.getLogger(__name__)

# Above this period the character is evaluated symbol by symbol.
DEFAULT_TABLE_LIMIT = 10**6


def _is_squarefree(n: int) -> bool:
    """Squarefree test by trial division up to the cube root plus a square check."""
    n = abs(n)
    if n == 0:
        return False
    p = 2
    while p * p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return False
        p += 1 if p == 2 else 2
    # What remains has at most two prime factors, so it is squarefree unless it is a square.
    if n > 1:
        r = isqrt(n)
        if r * r == n:
            return False
    return True


def is_fundamental(n: int) -> bool:
    """True iff ``n`` is a negative fundamental discriminant."""
    if n >= -2:
        return False
    if n % 4 == 1:
        return _is_squarefree(n)
    if n % 4 == 0:
        m = n // 4
        return m % 4 in (2, 3) and _is_squarefree(m)
    return False


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise DomainError(f"Jacobi symbol needs an odd positive modulus, got {n}")
    sign = 1
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a, n = n % a, a
    return sign if n == 1 else 0


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n >= 0, with (a/0) taken as 0 for |a| > 1."""
    if n < 0:
        raise DomainError(f"Kronecker symbol is evaluated at n >= 0 only, got {n}")
    if n == 0:
        return 1 if abs(a) == 1 else 0
    sign = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            sign = -sign
    return sign * jacobi(a, n) if n > 1 else sign


@dataclass(frozen=True)
class FundamentalDiscriminant:
    """A validated negative fundamental discriminant -D."""

    neg_d: int
    d: int = field(init=False)

    def __post_init__(self):
        if not is_fundamental(self.neg_d):
            raise DomainError(f"{self.neg_d} is not a negative fundamental discriminant")
        object.__setattr__(self, "d", -self.neg_d)

    @classmethod
    def of(cls, value: int) -> "FundamentalDiscriminant":
        """Accept either -D or D."""
        return cls(-abs(int(value)))

    def __str__(self) -> str:
        return str(self.neg_d)


class KroneckerCharacter:
    """The real character (-D/.) with period D.

    The full period is tabulated when D is at most ``table_limit``; larger
    periods fall back to symbol evaluation.
    """

    def __init__(self, disc: FundamentalDiscriminant, table_limit: int = DEFAULT_TABLE_LIMIT):
        self.disc = disc
        self.period = disc.d
        self._table: Optional[Tuple[int, ...]] = None
        if self.period <= table_limit:
            self._table = tuple(kronecker(disc.neg_d, n) for n in range(self.period))
            logger.debug("tabulated character of period %d", self.period)

    @property
    def tabulated(self) -> bool:
        return self._table is not None

    def __call__(self, n: int) -> int:
        return chi(self, n)

    def values_upto(self, limit: int) -> Tuple[int, ...]:
        """chi(0), ..., chi(limit) as a tuple."""
        if self._table is not None:
            q, r = divmod(limit + 1, self.period)
            return self._table * q + self._table[:r]
        return tuple(kronecker(self.disc.neg_d, n) for n in range(limit + 1))

    def ensure_table(self) -> None:
        """Tabulate the full period if it is not tabulated yet."""
        if self._table is None:
            self._table = tuple(kronecker(self.disc.neg_d, n) for n in range(self.period))
            logger.debug("tabulated character of period %d on demand", self.period)

    def __repr__(self) -> str:
        return f"KroneckerCharacter({self.disc.neg_d})"


def chi(c: KroneckerCharacter, n: int) -> int:
    """Value of the character at n >= 0; chi(0) = 0."""
    if n < 0:
        raise DomainError(f"chi is evaluated at n >= 0 only, got {n}")
    if c._table is not None:
        return c._table[n % c.period]
    if gcd(n, c.period) > 1:
        return 0
    return kronecker(c.disc.neg_d, n)


def enumerate_fundamental(lo: int, hi: int) -> List[FundamentalDiscriminant]:
    """All fundamental -D with lo <= -D <= hi, ascending in D.

    Raises:
        DomainError: If hi is not negative
    """
    if hi >= 0 and lo <= hi:
        raise DomainError(f"range upper end must be negative, got {hi}")
    if lo > hi:
        return []
    return [FundamentalDiscriminant(n) for n in range(hi, lo - 1, -1) if is_fundamental(n)]
