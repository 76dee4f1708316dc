"""Tests for zero location, certification and origin classification."""
import pytest
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from lowdisc import zeros
from lowdisc.discriminant import FundamentalDiscriminant, KroneckerCharacter
from lowdisc.errors import ConfigurationError, DomainError, IncompleteZeroListError, NumericalFailure
from lowdisc.specfun import make_context
from lowdisc.theta import PhiEvaluator
from lowdisc.xi import MomentPair, XiEvaluator, log_z_second, moments, xi_t
from lowdisc.zeros import (
    OriginClass,
    ZeroList,
    _scan,
    certify,
    classify_origin,
    estimate_height,
    find_zeros,
    load_zero_list,
    origin_curvature,
    scan_step,
    target_height,
)


@pytest.mark.unit
class TestHeights:
    """Test the zero-count height estimates."""

    def test_estimate_grows_with_count(self, ctx30):
        heights = [estimate_height(163, n, ctx30) for n in (5, 10, 20, 40)]
        assert all(a < b for a, b in zip(heights, heights[1:]))

    def test_estimate_inverts_main_term(self, ctx30):
        """(X / 2pi) log(D X / (2 pi e)) = count at the estimate."""
        x = estimate_height(1411, 25, ctx30)
        count = x / (2 * ctx30.pi) * ctx30.log(1411 * x / (2 * ctx30.pi * ctx30.e))
        assert abs(count - 25) < ctx30.mpf(10) ** -20

    def test_estimate_invalid_count(self, ctx30):
        with pytest.raises(DomainError):
            estimate_height(163, 0, ctx30)

    def test_target_above_estimate(self, ctx30):
        assert target_height(163, 20, ctx30) > estimate_height(163, 20, ctx30)

    def test_step_shrinks_with_d(self, ctx30):
        assert scan_step(115147, ctx30) < scan_step(163, ctx30)


@pytest.mark.unit
class TestFindZeros:
    """Test zero location for -163."""

    def test_first_zero(self, zeros_163):
        """gamma_1(-163) = 0.202901."""
        assert abs(float(zeros_163.gammas[0]) - 0.202901) < 5e-7

    def test_count_and_order(self, zeros_163):
        assert len(zeros_163) == 40
        gammas = zeros_163.gammas
        assert gammas[0] > 0
        assert all(a < b for a, b in zip(gammas, gammas[1:]))

    def test_brackets_change_sign(self, zeros_163, xi_163):
        """Each bracket is narrower than tol and Xi changes sign across it."""
        for lo, hi in zeros_163.brackets[:10]:
            assert hi - lo <= zeros_163.tol
            if hi > lo:
                assert xi_t(xi_163, lo) * xi_t(xi_163, hi) <= 0

    def test_height_mode_matches_count_mode(self, xi_163, zeros_163):
        """Scanning to a height finds the same leading zeros."""
        zl = find_zeros(xi_163, height=5)
        assert len(zl) > 0
        assert all(g <= 5 for g in zl.gammas)
        for a, b in zip(zl.gammas, zeros_163.gammas):
            assert abs(a - b) < 2 * zeros_163.tol

    def test_needs_exactly_one_target(self, xi_163):
        with pytest.raises(DomainError, match="exactly one"):
            find_zeros(xi_163)
        with pytest.raises(DomainError):
            find_zeros(xi_163, count=3, height=2)

    def test_tolerance_floor(self, xi_163):
        """tol below 10^(2-P) is a configuration error."""
        with pytest.raises(ConfigurationError):
            find_zeros(xi_163, count=3, tol="1e-40")

    def test_unresolvable_height(self, disc_163, ctx30):
        """With a loose eps Xi drowns in its error bound well before x = 40."""
        phi = PhiEvaluator(KroneckerCharacter(disc_163), ctx30, eps="1e-10")
        xi = XiEvaluator(phi, max_x=40)
        with pytest.raises(ConfigurationError, match="not resolvable"):
            find_zeros(xi, height=40)

    def test_certified_search(self, xi_163, moments_163):
        """With moments supplied the list is certified on the way out."""
        zl = find_zeros(xi_163, count=10, moments_pair=moments_163)
        assert zl.residual is not None
        assert zl.residual > 0
        assert not zl.flagged

    def test_certified_search_rejects_large_residual(self, xi_163, moments_163):
        """A residual above the tail allowance means zeros are unaccounted for."""
        with pytest.raises(IncompleteZeroListError, match="exceeds the tail allowance") as info:
            find_zeros(xi_163, count=10, moments_pair=moments_163, tail_factor="1e-6")
        assert info.value.residual > 0
        assert info.value.interval[0] == 0



class CloseRootsGrid:
    """Samples of (x - 1.042)^2 - 1e-4, roots 1.032 and 1.052 between grid points."""

    d = 163

    def __init__(self, ctx):
        self.ctx = ctx
        self.err = ctx.mpf("1e-20")

    def value(self, x):
        return (x - self.ctx.mpf("1.042")) ** 2 - self.ctx.mpf("1e-4")

    def iter_grid(self, start, step, count):
        for k in range(count):
            x = start + k * step
            yield x, self.value(x)


@pytest.mark.unit
class TestSegmentBoundary:
    """Test dips that fall on the last sample of a scan segment."""

    def test_dip_on_boundary_sample(self, ctx30, monkeypatch):
        monkeypatch.setattr(zeros, "xi_t", lambda e, x: e.value(x))
        grid = CloseRootsGrid(ctx30)
        step = ctx30.mpf("0.1")
        first, tail = _scan(grid, 0, step, 11)
        assert first == []
        assert len(tail) == 2
        assert abs(tail[-1][0] - 1) < ctx30.mpf(10) ** -25
        second, _ = _scan(grid, 11 * step, step, 5, tail)
        assert len(second) == 2
        (a1, b1, _, _), (a2, b2, _, _) = second
        assert a1 < ctx30.mpf("1.032") < b1
        assert a2 < ctx30.mpf("1.052") < b2

    def test_carried_sign_change_is_not_repeated(self, ctx30, monkeypatch):
        monkeypatch.setattr(zeros, "xi_t", lambda e, x: e.value(x))
        grid = CloseRootsGrid(ctx30)
        step = ctx30.mpf("0.02")
        first, tail = _scan(grid, 0, step, 54)
        second, _ = _scan(grid, 54 * step, step, 10, tail)
        assert len(first) == 2
        assert second == []


@pytest.mark.unit
class TestCertify:
    """Test the sum-rule certificate."""

    def test_residual_positive_and_decreasing(self, zeros_163, moments_163):
        """Adding zeros shrinks the positive leftover of the sum rule."""
        residuals = []
        for n in (10, 20, 40):
            zl = zeros_163.truncated(n)
            residuals.append(certify(zl, moments_163))
            assert not zl.flagged
        assert residuals[0] > residuals[1] > residuals[2] > 0

    def test_missing_zero_flags(self, zeros_163, moments_163):
        """Dropping gamma_1 from the list makes the residual too large."""
        zl = ZeroList(zeros_163.disc, zeros_163.gammas[1:20], tol=zeros_163.tol)
        certify(zl, moments_163)
        assert zl.flagged

    def test_spurious_zero_flags(self, zeros_163, moments_163, ctx30):
        """An extra tiny ordinate drives the residual negative."""
        zl = ZeroList(zeros_163.disc, [ctx30.mpf("0.05")] + zeros_163.gammas[:20], tol=zeros_163.tol)
        residual = certify(zl, moments_163)
        assert residual < 0
        assert zl.flagged

    def test_empty_list_raises(self, zeros_163, moments_163):
        with pytest.raises(DomainError):
            certify(ZeroList(zeros_163.disc), moments_163)

    def test_zero_sum_approaches_curvature(self, zeros_163, moments_163, xi_163, ctx30):
        """(log Z)''(0) + 2 sum gamma_j^-2 rises towards psi'(3/4)/4 = 0.635467."""
        gap = log_z_second(xi_163, moments_163) + 2 * zeros_163.square_sum(ctx30)
        tail = 4 * 40 / zeros_163.gammas[-1] ** 2
        assert 0.635467 - float(tail) < float(gap) < 0.635468


@pytest.mark.unit
class TestClassifyOrigin:
    """Test the critical point classification at t = 0."""

    def test_163_positive_local_max(self, xi_163, moments_163):
        assert classify_origin(xi_163, moments_163) is OriginClass.POSITIVE_LOCAL_MAX

    def test_curvature_uses_positive_ordinates(self, moments_163, zeros_163, ctx30):
        """psi'(3/4)/4 - sum_{j>=1} gamma_j^-2 is about -24.08 for D = 163."""
        curvature = origin_curvature(moments_163, ctx30)
        assert float(curvature) == pytest.approx(-24.0835, rel=1e-4)
        assert curvature < 0.635467 - zeros_163.square_sum(ctx30)

    @pytest.mark.parametrize("xi0,xi2,expected", [
        ("1", "-10", OriginClass.POSITIVE_LOCAL_MAX),
        ("1", "10", OriginClass.POSITIVE_LOCAL_MIN),
        ("-1", "10", OriginClass.NEGATIVE_LOCAL_MIN),
        ("-1", "-10", OriginClass.NEGATIVE_LOCAL_MAX),
        ("1e-20", "-10", OriginClass.ZERO),
        # One-sided zero sums on either side of (1/4) psi'(3/4) = 0.635467
        ("1", "-1.26", OriginClass.POSITIVE_LOCAL_MIN),
        ("1", "-1.28", OriginClass.POSITIVE_LOCAL_MAX),
    ])
    def test_synthetic_moments(self, xi_163, ctx30, xi0, xi2, expected):
        mp = MomentPair(ctx30.mpf(xi0), ctx30.mpf(xi2), ctx30.mpf("1e-15"))
        assert classify_origin(xi_163, mp) is expected

    def test_enum_values(self):
        assert OriginClass.POSITIVE_LOCAL_MIN.value == "positive-local-min"


@pytest.mark.unit
class TestLoadZeroList:
    """Test reading external ordinates."""

    def test_load(self, tmp_path, disc_163, ctx30):
        path = tmp_path / "zeros.txt"
        path.write_text("# external zeros\n0.202901\n\n1.5  # comment\n2.25\n", encoding="utf-8")
        zl = load_zero_list(path, disc_163, ctx30, tol="1e-6")
        assert zl.gammas == [ctx30.mpf("0.202901"), ctx30.mpf("1.5"), ctx30.mpf("2.25")]
        assert zl.height == ctx30.mpf("2.25")
        assert zl.brackets[0][1] - zl.brackets[0][0] == ctx30.mpf("1e-6")

    def test_unordered_raises(self, tmp_path, disc_163, ctx30):
        path = tmp_path / "zeros.txt"
        path.write_text("1.5\n0.5\n", encoding="utf-8")
        with pytest.raises(NumericalFailure, match="strictly increasing"):
            load_zero_list(path, disc_163, ctx30)

    def test_unparseable_raises(self, tmp_path, disc_163, ctx30):
        path = tmp_path / "zeros.txt"
        path.write_text("0.5\nnot-a-number\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match=":2:"):
            load_zero_list(path, disc_163, ctx30)


@pytest.mark.slow
class TestZeroListSums:
    """Sum-rule monotonicity at larger counts."""

    @pytest.mark.parametrize("disc", [-163, -1411])
    def test_residual_decreasing_to_100(self, disc):
        height = target_height(-disc, 100, make_context(50))
        xi = XiEvaluator.for_discriminant(FundamentalDiscriminant(disc), precision=50, eps="1e-40", max_x=height)
        mp = moments(xi)
        full = find_zeros(xi, count=100)
        residuals = [certify(full.truncated(n), mp) for n in (10, 20, 50, 100)]
        assert all(r > 0 for r in residuals)
        assert all(a > b for a, b in zip(residuals, residuals[1:]))

    def test_incomplete_list_error_carries_interval(self):
        """The error type reports where a zero may be hiding."""
        err = IncompleteZeroListError("missed", interval=(1, 2), residual=-1)
        assert err.interval == (1, 2)
        assert err.residual == -1
