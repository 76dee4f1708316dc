"""Low-lying zeros of Xi(x, chi) on the real axis.

Zeros are located by scanning Xi on a uniform grid for sign changes and
refining each bracket by alternating secant and bisection steps. Dips of
|Xi| without a sign change are subdivided; one that sinks below the error
budget raises IncompleteZeroListError. Completeness is then certified
against the sum rule -Xi''(0) / (2 Xi(0)) = sum_j gamma_j^-2.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple, Union

import mpmath

from .discriminant import FundamentalDiscriminant
from .errors import ConfigurationError, DomainError, IncompleteZeroListError, NumericalFailure
from .specfun import coerce, trigamma_quarter
from .xi import MomentPair, XiEvaluator, gamma_scale, moments, xi_t

logger = logging.getLogger(__name__)

DEFAULT_TOL = "1e-12"
DEFAULT_TAIL_FACTOR = 2
HEIGHT_MARGIN = "1.15"
MAX_EXTENSIONS = 4
DIP_DEPTH = 5
DIP_SUBDIVISIONS = 8
# Xi must exceed its error bound by this factor at the top of the scan.
RESOLUTION_FACTOR = 10


class OriginClass(str, Enum):
    """Nature of the critical point of Z at t = 0."""

    POSITIVE_LOCAL_MAX = "positive-local-max"
    POSITIVE_LOCAL_MIN = "positive-local-min"
    NEGATIVE_LOCAL_MAX = "negative-local-max"
    NEGATIVE_LOCAL_MIN = "negative-local-min"
    ZERO = "zero"


@dataclass
class ZeroList:
    """Positive ordinates 0 < gamma_1 < gamma_2 < ... with their brackets.

    Attributes:
        disc: Discriminant the zeros belong to
        gammas: Strictly increasing ordinates
        brackets: Interval [a, b] around each ordinate with a sign change of Xi
        tol: Refinement tolerance (bracket width bound)
        residual: Sum-rule leftover, set by certify
        flagged: True when certify found an anomaly
        height: Largest height scanned
    """

    disc: FundamentalDiscriminant
    gammas: List[Any] = field(default_factory=list)
    brackets: List[Tuple[Any, Any]] = field(default_factory=list)
    tol: Any = None
    residual: Any = None
    flagged: bool = False
    height: Any = None

    def __len__(self) -> int:
        return len(self.gammas)

    def truncated(self, count: int) -> "ZeroList":
        """The first ``count`` zeros as a fresh, uncertified list."""
        return ZeroList(self.disc, self.gammas[:count], self.brackets[:count], self.tol,
                        height=self.gammas[count - 1] if count else self.height)

    def square_sum(self, ctx: mpmath.MPContext):
        """sum_j gamma_j^-2."""
        return ctx.fsum(1 / (g * g) for g in self.gammas)


def estimate_height(d: int, count: int, ctx: Optional[mpmath.MPContext] = None):
    """Height below which about ``count`` positive zeros are expected.

    Inverts the main term (X / 2pi) log(D X / (2 pi e)) of the zero count.
    """
    if count < 1:
        raise DomainError(f"zero count must be positive, got {count}")
    ctx = ctx or mpmath.mp
    two_pi = 2 * ctx.pi

    def excess(x):
        return x / two_pi * ctx.log(d * x / (two_pi * ctx.e)) - count

    lo = two_pi * ctx.e / d * ctx.e
    hi = lo + two_pi * count + 10
    while excess(hi) < 0:
        hi *= 2
    return ctx.findroot(excess, (lo, hi), solver="anderson")


def scan_step(d: int, ctx: mpmath.MPContext):
    """Grid spacing: one eighth of the mean lowest-zero scale 1 / log(D / 2pi)."""
    return 1 / (8 * max(ctx.log(ctx.mpf(d) / (2 * ctx.pi)), 1))


def target_height(d: int, count: int, ctx: mpmath.MPContext):
    """Scan height for a count target: the estimate with a margin of two grid steps."""
    return estimate_height(d, count, ctx) * ctx.mpf(HEIGHT_MARGIN) + 2 * scan_step(d, ctx)


def _check_resolvable(xi: XiEvaluator, height) -> None:
    if xi.t != 0:
        return
    floor = RESOLUTION_FACTOR * xi.err
    if floor >= gamma_scale(xi, height):
        raise ConfigurationError(
            f"Xi is not resolvable at height {mpmath.nstr(height, 6)} for D={xi.d}: "
            f"error bound {mpmath.nstr(xi.err, 3)} exceeds the signal; raise the precision and lower eps"
        )


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _refine(xi: XiEvaluator, a, b, fa, fb, tol) -> Tuple[Any, Any]:
    """Shrink a sign-change bracket to width <= tol."""
    secant = True
    while b - a > tol:
        width = b - a
        if secant and fb != fa:
            m = b - fb * width / (fb - fa)
            guard = width / 16
            m = min(max(m, a + guard), b - guard)
        else:
            m = (a + b) / 2
        fm = xi_t(xi, m)
        if fm == 0:
            return m, m
        if _sign(fm) == _sign(fa):
            a, fa = m, fm
        else:
            b, fb = m, fm
        if secant and b - a > tol:
            # Probe just past the secant estimate to collapse the bracket.
            probe = m + tol / 2 if a == m else m - tol / 2
            if a < probe < b:
                fp = xi_t(xi, probe)
                if _sign(fp) == _sign(fa):
                    a, fa = probe, fp
                else:
                    b, fb = probe, fp
        secant = not secant
    logger.debug("refined zero bracket [%s, %s]", mpmath.nstr(a, 20), mpmath.nstr(b, 20))
    return a, b


def _scan_dip(xi: XiEvaluator, lo, hi, depth: int) -> List[Tuple[Any, Any, Any, Any]]:
    """Look for a hidden pair of sign changes inside a dip of |Xi|."""
    step = (hi - lo) / DIP_SUBDIVISIONS
    points = [lo + k * step for k in range(DIP_SUBDIVISIONS + 1)]
    values = [xi_t(xi, x) for x in points]
    brackets = [
        (points[k], points[k + 1], values[k], values[k + 1])
        for k in range(DIP_SUBDIVISIONS)
        if _sign(values[k]) != _sign(values[k + 1])
    ]
    if brackets:
        return brackets
    k = min(range(len(values)), key=lambda i: abs(values[i]))
    if abs(values[k]) <= xi.err:
        raise IncompleteZeroListError(
            f"|Xi| dips below its error bound near x = {mpmath.nstr(points[k], 12)} for D={xi.d}",
            interval=(lo, hi), residual=values[k],
        )
    if depth <= 0 or k in (0, DIP_SUBDIVISIONS):
        return []
    return _scan_dip(xi, points[k - 1], points[k + 1], depth - 1)


def _scan(xi: XiEvaluator, start, step, count: int, previous: Sequence[Tuple[Any, Any]] = ()):
    """Sign-change brackets on a grid segment, plus its last two samples.

    ``previous`` is the tail returned for the segment before, so the dip test
    also covers the sample at the boundary.
    """
    brackets = []
    carried = list(previous)
    samples = carried + list(xi.iter_grid(start, step, count))
    for i in range(1, len(samples)):
        (xa, va), (xb, vb) = samples[i - 1], samples[i]
        if _sign(va) != _sign(vb):
            # Pairs inside the carried tail were bracketed by the previous call.
            if i >= len(carried):
                brackets.append((xa, xb, va, vb))
            continue
        if i + 1 < len(samples):
            vc = samples[i + 1][1]
            is_dip = abs(vb) < abs(va) and abs(vb) < abs(vc) and _sign(vb) == _sign(vc)
            if is_dip:
                brackets.extend(_scan_dip(xi, xa, samples[i + 1][0], DIP_DEPTH))
    # Xi is even, so the origin is a dip when |Xi(0)| < |Xi(step)|.
    if not carried and len(samples) > 1 and abs(samples[0][1]) < abs(samples[1][1]):
        if _sign(samples[0][1]) == _sign(samples[1][1]):
            brackets.extend(_scan_dip(xi, samples[0][0], samples[1][0], DIP_DEPTH))
    return brackets, samples[-2:]


def find_zeros(xi: XiEvaluator, count: Optional[int] = None, height: Any = None, tol: Any = DEFAULT_TOL,
               moments_pair: Optional[MomentPair] = None, tail_factor: Any = DEFAULT_TAIL_FACTOR) -> ZeroList:
    """Positive zeros of Xi_t up to a count or a height.

    Args:
        xi: Evaluator; its grid is extended when the target lies above it
        count: Number of zeros wanted
        height: Scan [0, height] instead of a count
        tol: Bracket width for every returned zero, at least 10^(2-P)
        moments_pair: When given, the list is certified and a flagged
            residual raises IncompleteZeroListError
        tail_factor: Passed to certify

    Raises:
        DomainError: If neither or both of count and height are given
        ConfigurationError: If tol is below 10^(2-P) or Xi cannot be resolved at the target height
        IncompleteZeroListError: If a zero may have been missed
    """
    ctx = xi.ctx
    if (count is None) == (height is None):
        raise DomainError("find_zeros needs exactly one of count and height")
    tol = coerce(ctx, tol)
    if tol < ctx.mpf(10) ** (2 - ctx.dps) or tol <= 0:
        raise ConfigurationError(f"tol = {mpmath.nstr(tol, 5)} is below 1e{2 - ctx.dps} for {ctx.dps} digits")

    step = scan_step(xi.d, ctx)
    if height is not None:
        target = abs(coerce(ctx, height))
    else:
        if count < 1:
            raise DomainError(f"zero count must be positive, got {count}")
        target = target_height(xi.d, count, ctx)

    zl = ZeroList(xi.disc, tol=tol)
    scanned = 0
    previous: Sequence[Tuple[Any, Any]] = ()
    for extension in range(MAX_EXTENSIONS + 1):
        points = int(ctx.floor(target / step))
        top = points * step
        if top > xi.max_x:
            xi = xi.with_height(top + step)
        _check_resolvable(xi, top)
        brackets, previous = _scan(xi, scanned * step, step, points + 1 - scanned, previous)
        scanned = points + 1
        for a, b, fa, fb in brackets:
            lo, hi = _refine(xi, a, b, fa, fb, tol)
            zl.brackets.append((lo, hi))
            zl.gammas.append((lo + hi) / 2)
        zl.height = top
        logger.debug("scanned D=%d up to %s: %d zeros", xi.d, mpmath.nstr(top, 6), len(zl.gammas))
        if count is None or len(zl.gammas) >= count:
            break
        target = target * ctx.mpf(HEIGHT_MARGIN) + 8 * step
    else:
        raise IncompleteZeroListError(
            f"found only {len(zl.gammas)} of {count} zeros below height {mpmath.nstr(zl.height, 6)} for D={xi.d}",
            interval=(ctx.mpf(0), zl.height),
        )

    order = sorted(range(len(zl.gammas)), key=lambda i: zl.gammas[i])
    zl.gammas = [zl.gammas[i] for i in order]
    zl.brackets = [zl.brackets[i] for i in order]
    if count is not None:
        zl.gammas = zl.gammas[:count]
        zl.brackets = zl.brackets[:count]
    logger.info("found %d zeros for D=%d, gamma_1 = %s", len(zl.gammas), xi.d,
                mpmath.nstr(zl.gammas[0], 12) if zl.gammas else "none")

    if moments_pair is not None and zl.gammas:
        certify(zl, moments_pair, tail_factor)
        if zl.flagged:
            problem = "is negative" if zl.residual < 0 else "exceeds the tail allowance"
            raise IncompleteZeroListError(
                f"sum-rule residual {mpmath.nstr(zl.residual, 6)} {problem} for D={xi.d}",
                interval=(ctx.mpf(0), zl.height), residual=zl.residual,
            )
    return zl


def certify(zl: ZeroList, mp: MomentPair, tail_factor: Any = DEFAULT_TAIL_FACTOR):
    """Sum-rule residual -xi2/(2 xi0) - sum gamma_j^-2, stored in ``zl``.

    The list is flagged when the residual is negative beyond twice the
    moment error, or larger than tail_factor * count / gamma_last^2.

    Raises:
        DomainError: If the list is empty
    """
    if not zl.gammas:
        raise DomainError("certify needs a nonempty zero list")
    ctx = mp.xi0.context
    residual = -mp.xi2 / (2 * mp.xi0) - zl.square_sum(ctx)
    allowance = coerce(ctx, tail_factor) * len(zl.gammas) / zl.gammas[-1] ** 2
    zl.residual = residual
    zl.flagged = bool(residual < -2 * mp.ratio_err or residual > allowance)
    if zl.flagged:
        logger.warning("sum-rule check flagged D=%d: residual %s, allowance %s",
                       zl.disc.d, mpmath.nstr(residual, 6), mpmath.nstr(allowance, 6))
    return residual


def origin_curvature(mp: MomentPair, ctx: mpmath.MPContext):
    """(1/4) psi'(3/4) - sum_{j>=1} gamma_j^-2, the sign test at the origin.

    The zero sum runs over the positive ordinates only. A positive value
    marks a local minimum of |Z| at t = 0.
    """
    return mp.xi2 / (2 * mp.xi0) + trigamma_quarter(ctx)


def classify_origin(xi: XiEvaluator, mp: Optional[MomentPair] = None) -> OriginClass:
    """Classify t = 0 as a local maximum or minimum of Z, with its sign.

    The curvature is origin_curvature, which is negative at a maximum of |Z|.
    """
    mp = mp or moments(xi)
    if abs(mp.xi0) <= mp.err:
        return OriginClass.ZERO
    curvature = origin_curvature(mp, xi.ctx)
    if mp.xi0 > 0:
        return OriginClass.POSITIVE_LOCAL_MAX if curvature < 0 else OriginClass.POSITIVE_LOCAL_MIN
    return OriginClass.NEGATIVE_LOCAL_MIN if curvature < 0 else OriginClass.NEGATIVE_LOCAL_MAX


def load_zero_list(path: Union[str, Path], disc: FundamentalDiscriminant, ctx: mpmath.MPContext,
                   tol: Any = 0) -> ZeroList:
    """Read external ordinates, one per line, '#' starting a comment.

    Raises:
        NumericalFailure: If the ordinates are not positive and strictly increasing
    """
    gammas = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            gammas.append(ctx.mpf(text))
        except ValueError as e:
            raise ConfigurationError(f"{path}:{lineno}: cannot parse ordinate {text!r}") from e
    for a, b in zip([ctx.mpf(0)] + gammas, gammas):
        if not b > a:
            raise NumericalFailure(f"{path}: ordinates must be positive and strictly increasing near {b}")
    tol = coerce(ctx, tol)
    brackets = [(g - tol / 2, g + tol / 2) for g in gammas]
    logger.info("loaded %d external zeros for D=%d from %s", len(gammas), disc.d, path)
    return ZeroList(disc, gammas, brackets, tol, height=gammas[-1] if gammas else None)
