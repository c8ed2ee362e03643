"""Bayesian-network model compiler and data-parallel MCMC runtime."""

try:
    from bnmc._core import (  # type: ignore[attr-defined]
        Model,
        generate,
        generate_lda,
        infer,
        log_predictive_probability,
        parse,
        rmse,
    )
except ImportError:  # development builds expose the extension at top level
    from _core import (  # type: ignore[no-redef]
        Model,
        generate,
        generate_lda,
        infer,
        log_predictive_probability,
        parse,
        rmse,
    )

__all__ = [
    "Model",
    "generate",
    "generate_lda",
    "infer",
    "log_predictive_probability",
    "parse",
    "rmse",
]


def parse_file(path, name=None):
    """Parse a .bn model file."""
    import os

    with open(path, "r", encoding="utf-8") as f:
        source = f.read()
    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    return parse(source, name)
