"""Modulo ADC simulation with blind adaptive unfolding."""

from ._modadc import (
    AdcConfig,
    ConfigError,
    DesignError,
    DomainError,
    Error,
    IoError,
    NumericError,
    StateError,
    center_shift,
    distortion_bound,
    fold_quantize,
    gen_ma_gaussian,
    lmmse_filter,
    mod_reduce,
    overload_bound,
    predict_asymptotics,
    q_function,
    run_codec,
    run_experiment1,
    run_experiment2,
    theoretical_autocorr_ma,
)

__all__ = [
    "AdcConfig",
    "ConfigError",
    "DesignError",
    "DomainError",
    "Error",
    "IoError",
    "NumericError",
    "StateError",
    "center_shift",
    "distortion_bound",
    "fold_quantize",
    "gen_ma_gaussian",
    "lmmse_filter",
    "mod_reduce",
    "overload_bound",
    "predict_asymptotics",
    "q_function",
    "run_codec",
    "run_experiment1",
    "run_experiment2",
    "theoretical_autocorr_ma",
]
