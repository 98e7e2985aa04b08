"""Grid-based parallel exact and approximate Euclidean DBSCAN."""
import os as _os

# Must precede the first numba import so --threads N is honoured on small hosts.
_os.environ.setdefault("NUMBA_NUM_THREADS", str(max(8, _os.cpu_count() or 1)))
_os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

from .core import (  # noqa: E402
    Clustering,
    Dataset,
    Params,
    UsageError,
    compute_cell_key,
    normalize_labels,
    squared_distance,
)
from .engine import MethodConfig, RunStats, run_dbscan  # noqa: E402
from .oracle import check_approx_valid, clustering_equal, dbscan_bruteforce  # noqa: E402

__all__ = [
    "Clustering",
    "Dataset",
    "MethodConfig",
    "Params",
    "RunStats",
    "UsageError",
    "check_approx_valid",
    "clustering_equal",
    "compute_cell_key",
    "dbscan_bruteforce",
    "normalize_labels",
    "run_dbscan",
    "squared_distance",
]
