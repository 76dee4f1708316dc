"""Unit tests for Xi_t evaluation and the moments at the origin."""
import pytest
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from lowdisc.discriminant import FundamentalDiscriminant, KroneckerCharacter
from lowdisc.errors import DomainError
from lowdisc.specfun import gamma_real, reference_L_half
from lowdisc.xi import (
    XiEvaluator,
    gamma_scale,
    log_l_second,
    log_z_second,
    moments,
    xi_t,
    xi_t_derivative,
    z_value,
)


@pytest.mark.unit
class TestXiValues:
    """Test Xi(x) on the real line."""

    def test_even(self, xi_163):
        """Xi(-x) = Xi(x)."""
        for x in ("0.3", "2", "7.5"):
            assert abs(xi_t(xi_163, x) - xi_t(xi_163, "-" + x)) <= xi_163.err

    def test_callable(self, xi_163):
        assert xi_163("1.5") == xi_t(xi_163, "1.5")

    def test_height_is_enforced(self, xi_163):
        """Heights above the certified grid raise DomainError."""
        with pytest.raises(DomainError, match="certified height"):
            xi_t(xi_163, xi_163.max_x + 1)

    def test_xi0_matches_reference(self, xi_163, ctx30, disc_163):
        """Xi(0) = (D/pi)^{3/4} Gamma(3/4) L(1/2, chi)."""
        ref = reference_L_half(KroneckerCharacter(disc_163), ctx30)
        predicted = (ctx30.mpf(163) / ctx30.pi) ** (ctx30.mpf(3) / 4) * gamma_real(ctx30, "0.75") * ref
        assert abs(xi_t(xi_163, 0) - predicted) / abs(predicted) < ctx30.mpf(10) ** -12

    def test_z_value_at_origin(self, xi_163, ctx30, disc_163):
        """Z(0) is L(1/2, chi)."""
        ref = reference_L_half(KroneckerCharacter(disc_163), ctx30)
        assert abs(z_value(xi_163, 0) - ref) < ctx30.mpf(10) ** -12

    def test_z_value_rescales_xi(self, xi_163):
        """Z(x) * (D/pi)^{3/4} |Gamma(3/4 + ix/2)| = Xi(x)."""
        x = "3.25"
        assert abs(z_value(xi_163, x) * gamma_scale(xi_163, x) - xi_163(x)) <= xi_163.err

    def test_iter_grid_matches_direct(self, xi_163, ctx30):
        """The rotation recurrence reproduces direct evaluation."""
        samples = list(xi_163.iter_grid(0, "0.125", 40))
        assert len(samples) == 40
        for x, value in samples[::7]:
            assert abs(value - xi_t(xi_163, x)) < ctx30.mpf(10) ** -20 * max(1, abs(value))

    def test_iter_grid_height_check(self, xi_163):
        """A grid that runs past the certified height is rejected up front."""
        with pytest.raises(DomainError):
            list(xi_163.iter_grid(0, xi_163.max_x, 3))


@pytest.mark.unit
class TestDerivatives:
    """Test differentiation under the integral."""

    def test_order_zero_is_value(self, xi_163):
        assert abs(xi_t_derivative(xi_163, "1.2", 0) - xi_163("1.2")) <= xi_163.err

    def test_first_derivative_finite_difference(self, xi_163, ctx30):
        """Central differences agree with the exact first derivative."""
        x = ctx30.mpf("2.3")
        h = ctx30.mpf(10) ** -8
        fd = (xi_163(x + h) - xi_163(x - h)) / (2 * h)
        exact = xi_t_derivative(xi_163, x, 1)
        assert abs(fd - exact) < ctx30.mpf(10) ** -10 * max(1, abs(exact))

    def test_first_derivative_vanishes_at_origin(self, xi_163):
        """Xi is even, so Xi'(0) = 0."""
        assert abs(xi_t_derivative(xi_163, 0, 1)) <= xi_163.err

    def test_second_derivative_is_moment(self, xi_163, moments_163):
        """Xi''(0) equals the second moment."""
        assert abs(xi_t_derivative(xi_163, 0, 2) - moments_163.xi2) <= 2 * moments_163.err

    def test_negative_order_raises(self, xi_163):
        with pytest.raises(DomainError):
            xi_t_derivative(xi_163, 0, -1)


@pytest.mark.unit
class TestMoments:
    """Test the moment pair and the curvature of log Z."""

    def test_signs(self, moments_163):
        """Xi(0) > 0 and Xi''(0) < 0 for D = 163."""
        assert moments_163.xi0 > 0
        assert moments_163.xi2 < 0
        assert moments_163.err > 0

    def test_ratio(self, moments_163):
        """xi2 / xi0 is about -49.438 for D = 163."""
        assert float(moments_163.ratio) == pytest.approx(-49.4380, rel=1e-4)

    def test_ratio_err_small(self, moments_163):
        assert moments_163.ratio_err < 1e-10

    def test_log_z_second(self, xi_163, moments_163, ctx30):
        """(log Z)''(0) = xi2/xi0 + psi'(3/4)/4."""
        expected = moments_163.ratio + ctx30.psi(1, ctx30.mpf(3) / 4) / 4
        assert abs(log_z_second(xi_163, moments_163) - expected) < ctx30.mpf(10) ** -20

    def test_log_l_second_sign(self, xi_163, moments_163, ctx30):
        """(log L)''(0) carries the Gamma correction with the opposite sign."""
        expected = moments_163.ratio - ctx30.psi(1, ctx30.mpf(3) / 4) / 4
        assert abs(log_l_second(xi_163, moments_163) - expected) < ctx30.mpf(10) ** -20
        gap = log_z_second(xi_163, moments_163) - log_l_second(xi_163, moments_163)
        assert float(gap) == pytest.approx(2 * 0.635467, rel=1e-5)

    def test_low_criterion_side_for_163(self, xi_163, moments_163):
        """-(1/2)(log L)''(0) is 25.0367 for D = 163."""
        assert float(-log_l_second(xi_163, moments_163) / 2) == pytest.approx(25.0367, rel=1e-4)

    def test_moments_need_t_zero(self, xi_163):
        """Moments and Z are only defined for the undeformed function."""
        deformed = xi_163.with_time("-0.1")
        with pytest.raises(DomainError, match="t = 0"):
            moments(deformed)
        with pytest.raises(DomainError):
            z_value(deformed, 1)


@pytest.mark.unit
class TestDeformation:
    """Test evaluators at other times."""

    def test_time_bound(self, xi_163):
        """|t| <= 1/2."""
        with pytest.raises(DomainError, match="1/2"):
            xi_163.with_time("0.6")

    def test_negative_time_shares_grid(self, xi_163):
        """A grid built for t = 0 covers every t <= 0."""
        assert xi_163.with_time("-0.2").grid is xi_163.grid

    def test_for_discriminant(self):
        """Stand-alone construction with its own context."""
        xi = XiEvaluator.for_discriminant(FundamentalDiscriminant(-7), precision=25, eps="1e-18", max_x=2)
        assert xi.d == 7
        assert xi.disc.neg_d == -7
        assert xi.ctx.dps == 25
        assert xi.max_x >= 2
