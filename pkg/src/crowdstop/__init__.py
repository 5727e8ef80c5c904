"""Adaptive stopping rules for collecting crowd labels, with a simulation harness."""

from .core import CONTINUE, Decision, HitSpec, QualityClass, RuleParams, Tally
from .curves import compare_curves, lies_below
from .harness import ConfigError, ExperimentResult, SweepSpec, emit_csv, run_gold_comparison, run_sweep
from .rng import RNG_VERSION
from .routing import Policy, WorkerPool, WorkerStats, index, pick_worker, process_gold_hit
from .stopping import decide, decide_unweighted, observe, run_batch, run_hit, threshold
from .weights import PRESETS, WeightScheme, preset, weight_for

__version__ = "0.1.0"

__all__ = [
    "CONTINUE", "ConfigError", "Decision", "ExperimentResult", "HitSpec", "PRESETS", "Policy",
    "QualityClass", "RNG_VERSION", "RuleParams", "SweepSpec", "Tally", "WeightScheme", "WorkerPool",
    "WorkerStats", "compare_curves", "decide", "decide_unweighted", "emit_csv", "index", "lies_below",
    "observe", "pick_worker", "preset", "process_gold_hit", "run_batch", "run_gold_comparison",
    "run_hit", "run_sweep", "threshold", "weight_for",
]
