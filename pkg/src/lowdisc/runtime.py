"""Worker pool for discriminant scans.

Each fundamental discriminant is an independent job. ScanRuntime fans the
jobs out over a process pool through asyncio and gathers the results back
in submission order, so the assembled summary does not depend on which
worker finished first.
"""

import asyncio
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from decimal import Decimal
from typing import Any, Dict, List, Optional, Sequence

from .discriminant import FundamentalDiscriminant
from .errors import LowdiscError
from .models import RunConfig, ScanEntry, ScanSummary
from .newman import analyze, build_evaluator
from .specfun import to_decimal_string
from .xi import gamma_scale, log_z_second, moments
from .zeros import classify_origin

logger = logging.getLogger(__name__)


def scan_job(neg_d: int, config_data: Dict[str, Any]) -> Dict[str, Any]:
    """Classify the origin for one discriminant, optionally running analyze.

    Top-level so a process pool can pickle it. Returns the ScanEntry fields
    under "entry" and, when the full pipeline ran, its JSON under "report".
    """
    config = RunConfig(**config_data)
    disc = FundamentalDiscriminant(neg_d)
    digits = config.precision
    result: Dict[str, Any] = {"entry": {"disc": neg_d}, "report": None}
    try:
        if config.scan_analyze:
            report = analyze(disc, config)
            result["report"] = report.to_json()
            entry = report.to_payload()
            result["entry"].update(
                origin=entry.origin, z0=entry.z0, log_z_second=entry.log_z_second,
                lambda_value=entry.lambda_value, is_low=entry.is_low,
                error=f"{entry.error.stage}: {entry.error.message}" if entry.error else None,
            )
        else:
            xi = build_evaluator(disc, config)
            mp = moments(xi)
            result["entry"].update(
                origin=classify_origin(xi, mp).value,
                z0=to_decimal_string(mp.xi0 / gamma_scale(xi, 0), digits),
                log_z_second=to_decimal_string(log_z_second(xi, mp), digits),
            )
    except LowdiscError as e:
        logger.error("scan job for D=%d failed: %s", -neg_d, e)
        result["entry"]["error"] = str(e)
    return result


class ScanRuntime:
    """Process pool lifecycle plus ordered fan-out of scan jobs.

    Attributes:
        workers: Pool size; 1 runs every job inline in this process
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers or os.cpu_count() or 1
        self._executor: Optional[ProcessPoolExecutor] = None

    def start(self) -> None:
        """Create the process pool (no-op when running inline)."""
        if self.workers > 1 and self._executor is None:
            self._executor = ProcessPoolExecutor(max_workers=self.workers)
            logger.info("scan pool started with %d workers", self.workers)

    def stop(self) -> None:
        """Shut the pool down, waiting for running jobs."""
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None
            logger.info("scan pool stopped")

    def __enter__(self) -> "ScanRuntime":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()

    async def _gather(self, discs: Sequence[int], config_data: Dict[str, Any]) -> List[Dict[str, Any]]:
        loop = asyncio.get_running_loop()
        futures = [loop.run_in_executor(self._executor, scan_job, d, config_data) for d in discs]
        return list(await asyncio.gather(*futures))

    def run(self, discs: Sequence[int], config: RunConfig) -> List[Dict[str, Any]]:
        """Run scan_job for every discriminant; results follow the input order."""
        config_data = config.model_dump()
        logger.info("scanning %d discriminants", len(discs))
        if self._executor is None:
            results = []
            for k, d in enumerate(discs, 1):
                results.append(scan_job(d, config_data))
                if k % 100 == 0:
                    logger.info("scan progress: %d/%d", k, len(discs))
            return results
        return asyncio.run(self._gather(discs, config_data))


def summarize(lo: int, hi: int, results: Sequence[Dict[str, Any]]):
    """Fold job results into a ScanSummary in discriminant order."""
    entries = [ScanEntry(**r["entry"]) for r in results]
    counts: Dict[str, int] = {}
    for e in entries:
        if e.origin is not None:
            counts[e.origin] = counts.get(e.origin, 0) + 1
    lambdas = [e for e in entries if e.lambda_value is not None]
    best = max(lambdas, key=lambda e: Decimal(e.lambda_value)).lambda_value if lambdas else None
    return ScanSummary(
        lo=lo, hi=hi, total=len(entries), counts=dict(sorted(counts.items())),
        positive_local_min=[e.disc for e in entries if e.origin == "positive-local-min"],
        failures=[e.disc for e in entries if e.error is not None],
        best_lambda=best, entries=entries,
    )
