"""Default configuration values for lowdisc.

These apply when no configuration file exists or a key is missing from one,
and sit below config-file values and command-line flags in precedence.
"""

from typing import Any, Dict

from .discriminant import DEFAULT_TABLE_LIMIT as DEFAULT_CHI_TABLE_LIMIT
from .specfun import DEFAULT_PRECISION, DEFAULT_REFERENCE_CEILING
from .theta import DEFAULT_EPS
from .zeros import DEFAULT_TOL

DEFAULT_ZERO_COUNT = 20
DEFAULT_TAIL_FACTOR = "2"

# Quadrature schedule
DEFAULT_QUAD_PANELS = 8
DEFAULT_QUAD_DEGREE = 5
DEFAULT_QUAD_MAX_REFINEMENTS = 5

# Heat flow
DEFAULT_FLOW_M = 32
DEFAULT_T_END = "1"
DEFAULT_SAMPLES = 11
DEFAULT_FLOW_TOL = "1e-12"

DEFAULT_FORMAT = "json"

CACHE_DIR_ENV = "LOWDISC_CACHE_DIR"

DEFAULTS: Dict[str, Any] = {
    "precision": DEFAULT_PRECISION,
    "eps": DEFAULT_EPS,
    "zero_count": DEFAULT_ZERO_COUNT,
    "zero_height": None,
    "tol": DEFAULT_TOL,
    "quad_panels": DEFAULT_QUAD_PANELS,
    "quad_degree": DEFAULT_QUAD_DEGREE,
    "quad_max_refinements": DEFAULT_QUAD_MAX_REFINEMENTS,
    "tail_factor": DEFAULT_TAIL_FACTOR,
    "reference_ceiling": DEFAULT_REFERENCE_CEILING,
    "chi_table_limit": DEFAULT_CHI_TABLE_LIMIT,
    "flow_m": DEFAULT_FLOW_M,
    "t_end": DEFAULT_T_END,
    "samples": DEFAULT_SAMPLES,
    "flow_tol": DEFAULT_FLOW_TOL,
    "format": DEFAULT_FORMAT,
    "cache_dir": None,  # None: $LOWDISC_CACHE_DIR, else ~/.lowdisc/cache
    "workers": None,  # None: os.cpu_count()
    "scan_analyze": False,
}
