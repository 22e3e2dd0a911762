"""Property testing for group homomorphisms under online erasures."""

from .engine import HAVE_EXT, BatchResult, run_batch
from .functions import FunctionTable, Homomorphism, gen_instance, random_hom
from .groups import GroupSpec, parse_spec
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    run_experiment,
    wilson_interval,
)
from .oracle import Oracle, make_strategy
from .rng import Stream, derive_seed, stream
from .testers import TESTER_NAMES, TesterParams, Verdict, run_named

__version__ = "0.1.0"

__all__ = [
    "BatchResult",
    "ExperimentConfig",
    "ExperimentReport",
    "FunctionTable",
    "GroupSpec",
    "HAVE_EXT",
    "Homomorphism",
    "Oracle",
    "Stream",
    "TESTER_NAMES",
    "TesterParams",
    "Verdict",
    "derive_seed",
    "gen_instance",
    "make_strategy",
    "parse_spec",
    "random_hom",
    "run_batch",
    "run_experiment",
    "run_named",
    "stream",
    "wilson_interval",
]
