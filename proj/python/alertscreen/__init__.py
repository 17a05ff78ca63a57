"""Python access to the alertscreen streaming simulator."""

from ._alertscreen import (
    Adwin,
    ConfigError,
    DataError,
    bayes_projection,
    config_keys,
    focal_derivatives,
    format_projection,
    fp_burden,
    read_endpoints,
    run,
    select_query_batch,
    summarize,
    synth,
    write_synth,
)

__all__ = [
    "Adwin",
    "ConfigError",
    "DataError",
    "bayes_projection",
    "config_keys",
    "focal_derivatives",
    "format_projection",
    "fp_burden",
    "read_endpoints",
    "run",
    "select_query_batch",
    "summarize",
    "synth",
    "write_synth",
]
