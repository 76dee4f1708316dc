"""Unit tests for precision contexts and special functions."""
import pytest
import sys
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import mpmath

from lowdisc.discriminant import FundamentalDiscriminant, KroneckerCharacter
from lowdisc.errors import ConfigurationError, PrecisionMismatchError, ReferenceUnavailableError
from lowdisc.specfun import (
    abs_gamma_on_line,
    coerce,
    default_em_parameters,
    gamma_real,
    hurwitz_zeta_em,
    make_context,
    reference_L_half,
    to_decimal_string,
    trigamma_quarter,
)


@pytest.mark.unit
class TestContexts:
    """Test precision contexts and conversion."""

    def test_context_is_shared(self):
        """The same digit count returns the same context."""
        assert make_context(30) is make_context(30)
        assert make_context(30).dps == 30

    def test_precision_bounds(self):
        """Precision outside [17, 200] is rejected."""
        with pytest.raises(ConfigurationError, match="between 17 and 200"):
            make_context(16)
        with pytest.raises(ConfigurationError):
            make_context(201)

    def test_coerce_exact_inputs(self, ctx30):
        """Strings, Decimals and Fractions convert without binary rounding."""
        assert coerce(ctx30, "0.1") == ctx30.mpf(1) / 10
        assert coerce(ctx30, Decimal("0.1")) == ctx30.mpf(1) / 10
        assert coerce(ctx30, Fraction(1, 10)) == ctx30.mpf(1) / 10
        assert coerce(ctx30, 3) == 3

    def test_coerce_rejects_foreign_context(self, ctx30):
        """An mpf from another precision is not silently truncated."""
        other = make_context(40).mpf(1) / 3
        with pytest.raises(PrecisionMismatchError, match="40-digit"):
            coerce(ctx30, other)

    def test_coerce_rejects_bool(self, ctx30):
        """Booleans are not numbers here."""
        with pytest.raises(ValueError):
            coerce(ctx30, True)

    def test_to_decimal_string_keeps_digits(self, ctx30):
        """Fixed significant digits, trailing zeros kept."""
        assert to_decimal_string(ctx30.mpf("0.5"), 5) == "0.50000"


@pytest.mark.unit
class TestSpecialValues:
    """Test Gamma, trigamma and Hurwitz zeta values."""

    def test_gamma_half(self, ctx30):
        """Gamma(1/2) = sqrt(pi)."""
        assert abs(gamma_real(ctx30, "0.5") - ctx30.sqrt(ctx30.pi)) < ctx30.mpf(10) ** -28

    def test_gamma_nonpositive_raises(self, ctx30):
        """Gamma is only offered on the positive reals."""
        with pytest.raises(ValueError, match="x > 0"):
            gamma_real(ctx30, 0)

    def test_trigamma_quarter(self, ctx30):
        """(1/4) psi'(3/4) = (pi^2 - 8 G) / 4 = 0.635467..."""
        expected = (ctx30.pi ** 2 - 8 * ctx30.catalan) / 4
        assert abs(trigamma_quarter(ctx30) - expected) < ctx30.mpf(10) ** -27
        assert mpmath.nstr(trigamma_quarter(ctx30), 6) == "0.635467"

    def test_abs_gamma_on_line_even(self, ctx30):
        """|Gamma(3/4 + it/2)| is even in t and equals Gamma(3/4) at 0."""
        assert abs_gamma_on_line(ctx30, 2) == abs_gamma_on_line(ctx30, -2)
        assert abs(abs_gamma_on_line(ctx30, 0) - gamma_real(ctx30, "0.75")) < ctx30.mpf(10) ** -28

    def test_hurwitz_zeta_matches_mpmath(self, ctx30):
        """Euler-Maclaurin agrees with mpmath's Hurwitz zeta."""
        terms, order = default_em_parameters(ctx30)
        for a in ("0.1", "0.5", "0.9"):
            ours = hurwitz_zeta_em(ctx30, "0.5", a, terms, order)
            ref = ctx30.zeta(ctx30.mpf("0.5"), ctx30.mpf(a))
            assert abs(ours - ref) < ctx30.mpf(10) ** -26

    def test_hurwitz_zeta_pole_raises(self, ctx30):
        """s = 1 is a pole."""
        with pytest.raises(ValueError, match="pole"):
            hurwitz_zeta_em(ctx30, 1, "0.5", 10, 5)


@pytest.mark.unit
class TestReferenceL:
    """Test the Hurwitz-zeta reference for L(1/2, chi)."""

    def test_matches_mpmath_dirichlet(self, ctx30):
        """Agreement with mpmath.dirichlet on a small modulus."""
        c = KroneckerCharacter(FundamentalDiscriminant(-163))
        ours = reference_L_half(c, ctx30)
        with mpmath.workdps(30):
            ref = mpmath.dirichlet(mpmath.mpf("0.5"), c.values_upto(c.period - 1))
            assert abs(float(ours) - float(ref)) < 1e-12

    def test_two_orders_agree(self, ctx30):
        """Doubling the Euler-Maclaurin order leaves the value unchanged."""
        c = KroneckerCharacter(FundamentalDiscriminant(-43))
        terms, order = default_em_parameters(ctx30)
        low = reference_L_half(c, ctx30, em=(terms, order))
        high = reference_L_half(c, ctx30, em=(2 * terms, 2 * order))
        assert abs(low - high) < ctx30.mpf(10) ** -26

    def test_ceiling(self, ctx30):
        """D above the ceiling has no reference."""
        c = KroneckerCharacter(FundamentalDiscriminant(-1411))
        with pytest.raises(ReferenceUnavailableError, match="unavailable at this size"):
            reference_L_half(c, ctx30, ceiling=1000)
