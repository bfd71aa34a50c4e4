"""Josephson junction solvers: finite differences, Green series, Picard iteration."""

from ._jjlab import (
    ConfigError,
    DivergenceError,
    DomainError,
    KernelParams,
    MappedKernel,
    NonContractionError,
    RegimeError,
    RunFailure,
    SeriesTruncationError,
    K_bound,
    asymptotic_profile,
    config_keys,
    esjj_to_integro,
    eval_G,
    eval_K,
    eval_K_x,
    eval_theta,
    normalize_config,
    psge_to_integro,
    run,
    solve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
