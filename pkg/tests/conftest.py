"""Pytest configuration and shared fixtures."""
import pytest
import sys
from pathlib import Path

# Add src to path for all tests
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))


@pytest.fixture(autouse=True)
def reset_global_config(tmp_path, monkeypatch):
    """Isolate global config and cache state from the user's home directory."""
    from lowdisc.config import reset_config

    monkeypatch.setenv("HOME", str(tmp_path / "home"))
    monkeypatch.delenv("LOWDISC_CACHE_DIR", raising=False)
    reset_config()
    yield
    reset_config()


@pytest.fixture(scope="session")
def ctx30():
    """Shared 30-digit arithmetic context."""
    from lowdisc.specfun import make_context
    return make_context(30)


@pytest.fixture(scope="session")
def disc_163():
    from lowdisc.discriminant import FundamentalDiscriminant
    return FundamentalDiscriminant(-163)


@pytest.fixture(scope="session")
def phi_163(ctx30, disc_163):
    """Theta kernel for -163, accurate enough to resolve Xi up to 40 zeros."""
    from lowdisc.discriminant import KroneckerCharacter
    from lowdisc.theta import PhiEvaluator
    return PhiEvaluator(KroneckerCharacter(disc_163), ctx30, eps="1e-24")


@pytest.fixture(scope="session")
def xi_163(phi_163, ctx30):
    """Xi evaluator for -163 certified up to the height of 40 zeros."""
    from lowdisc.xi import XiEvaluator
    from lowdisc.zeros import target_height
    return XiEvaluator(phi_163, max_x=target_height(163, 40, ctx30))


@pytest.fixture(scope="session")
def moments_163(xi_163):
    from lowdisc.xi import moments
    return moments(xi_163)


@pytest.fixture(scope="session")
def zeros_163(xi_163):
    """The first 40 zeros of Xi for -163."""
    from lowdisc.zeros import find_zeros
    return find_zeros(xi_163, count=40)


@pytest.fixture
def temp_config(tmp_path):
    """LowdiscConfig backed by a file in a temporary directory."""
    from lowdisc.config import LowdiscConfig
    return LowdiscConfig(config_file=tmp_path / "config.json")


@pytest.fixture
def temp_cache(tmp_path):
    """ResultCache in a temporary directory."""
    from lowdisc.cache import ResultCache
    return ResultCache(tmp_path / "cache")
