"""Tests for the scan worker pool and summaries."""
import pytest
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from lowdisc.discriminant import enumerate_fundamental
from lowdisc.models import RunConfig
from lowdisc.runtime import ScanRuntime, scan_job, summarize

ORIGINS = {"positive-local-max", "positive-local-min", "negative-local-max", "negative-local-min", "zero"}


def entry(disc, origin=None, lam=None, error=None):
    return {"entry": {"disc": disc, "origin": origin, "lambda_value": lam, "error": error}, "report": None}


@pytest.mark.unit
class TestScanRuntime:
    """Test pool lifecycle."""

    def test_inline_has_no_pool(self):
        runtime = ScanRuntime(workers=1)
        runtime.start()
        assert runtime._executor is None
        runtime.stop()

    def test_default_worker_count(self):
        assert ScanRuntime().workers >= 1

    def test_pool_lifecycle(self):
        with ScanRuntime(workers=2) as runtime:
            assert runtime._executor is not None
        assert runtime._executor is None

    def test_empty_run(self):
        with ScanRuntime(workers=1) as runtime:
            assert runtime.run([], RunConfig()) == []


@pytest.mark.unit
class TestScanJob:
    """Test the per-discriminant job."""

    def test_classifies_origin(self):
        result = scan_job(-163, RunConfig().model_dump())
        assert result["report"] is None
        assert result["entry"]["disc"] == -163
        assert result["entry"]["origin"] == "positive-local-max"
        assert float(result["entry"]["log_z_second"]) < 0
        assert float(result["entry"]["z0"]) > 0

    def test_failure_is_recorded(self):
        """A quadrature that cannot converge becomes an error entry."""
        config = RunConfig(quad_panels=1, quad_degree=1, quad_max_refinements=1, eps="1e-25")
        result = scan_job(-163, config.model_dump())
        assert "did not converge" in result["entry"]["error"]
        assert result["entry"].get("origin") is None


@pytest.mark.integration
class TestInlineScan:
    """Test an inline scan over a small range."""

    def test_results_follow_input_order(self):
        discs = [d.neg_d for d in enumerate_fundamental(-40, -3)]
        with ScanRuntime(workers=1) as runtime:
            results = runtime.run(discs, RunConfig())
        assert [r["entry"]["disc"] for r in results] == discs
        summary = summarize(-40, -3, results)
        assert summary.total == len(discs)
        assert sum(summary.counts.values()) + len(summary.failures) == len(discs)
        assert set(summary.counts) <= ORIGINS


@pytest.mark.unit
class TestSummarize:
    """Test folding results into a summary."""

    def test_counts_sorted(self):
        results = [entry(-3, "positive-local-min"), entry(-4, "positive-local-max"),
                   entry(-7, "positive-local-max")]
        summary = summarize(-7, -3, results)
        assert summary.counts == {"positive-local-max": 2, "positive-local-min": 1}
        assert list(summary.counts) == sorted(summary.counts)
        assert summary.positive_local_min == [-3]

    def test_failures_listed(self):
        summary = summarize(-8, -3, [entry(-3, "positive-local-max"), entry(-8, error="quadrature failed")])
        assert summary.failures == [-8]
        assert summary.counts == {"positive-local-max": 1}

    def test_best_lambda_is_maximum(self):
        """Decimal comparison picks the weakest-magnitude (largest) bound."""
        results = [entry(-163, "positive-local-max", "-0.0215787"),
                   entry(-1411, "positive-local-max", "-0.00307533"),
                   entry(-7, "positive-local-max")]
        assert summarize(-1411, -7, results).best_lambda == "-0.00307533"

    def test_no_lambda(self):
        assert summarize(-7, -3, [entry(-3, "positive-local-max")]).best_lambda is None


# Every positive local minimum of Z at the origin for -119 <= -D <= -3
LOCAL_MINIMA = [-3, -4, -7, -8, -11, -15, -19, -20, -23, -24, -31, -35, -39, -47, -55, -56, -71, -95, -119]


@pytest.mark.slow
@pytest.mark.integration
class TestLocalMinimaScan:
    """Test the origin classification over the small discriminants."""

    def test_nineteen_minima_up_to_119(self):
        discs = [d.neg_d for d in enumerate_fundamental(-119, -3)]
        with ScanRuntime(workers=2) as runtime:
            summary = summarize(-119, -3, runtime.run(discs, RunConfig()))
        assert summary.failures == []
        assert sorted(summary.positive_local_min) == sorted(LOCAL_MINIMA)
        assert summary.counts["positive-local-min"] == 19

    def test_no_minima_past_119(self):
        """Every seventh fundamental discriminant in [-2000, -120]."""
        discs = [d.neg_d for d in enumerate_fundamental(-2000, -120)][::7]
        with ScanRuntime(workers=2) as runtime:
            summary = summarize(-2000, -120, runtime.run(discs, RunConfig()))
        assert summary.failures == []
        assert summary.positive_local_min == []
