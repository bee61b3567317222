from .runner import AggregateRow, RunRow, emit_csv, run_experiment
from .spec import ExperimentSpec, SpecValidationError, load_spec, validate_spec

__all__ = [
    "AggregateRow",
    "ExperimentSpec",
    "RunRow",
    "SpecValidationError",
    "emit_csv",
    "load_spec",
    "run_experiment",
    "validate_spec",
]
