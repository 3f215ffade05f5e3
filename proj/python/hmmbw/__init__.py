"""Hidden Markov model training (Baum-Welch) and inference."""

from ._core import (
    EmissionKind,
    Error,
    FitConfig,
    FitResult,
    HmmParameters,
    InferenceError,
    IoError,
    ObservationSequence,
    OracleError,
    ValidationError,
    __version__,
    baum_welch_step,
    fit,
    forward,
    load_model,
    load_sequences,
    log_likelihood,
    oracle,
    parse_model,
    parse_sequences,
    posteriors,
    random_init,
    render_model,
    render_sequences,
    sample,
    save_model,
    validate,
    viterbi,
)

__all__ = [
    "EmissionKind",
    "Error",
    "FitConfig",
    "FitResult",
    "HmmParameters",
    "InferenceError",
    "IoError",
    "ObservationSequence",
    "OracleError",
    "ValidationError",
    "__version__",
    "baum_welch_step",
    "fit",
    "forward",
    "load_model",
    "load_sequences",
    "log_likelihood",
    "oracle",
    "parse_model",
    "parse_sequences",
    "posteriors",
    "random_init",
    "render_model",
    "render_sequences",
    "sample",
    "save_model",
    "validate",
    "viterbi",
]
