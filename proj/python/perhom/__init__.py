"""Homogenised limits of periodic Levy-type processes.

    >>> import perhom
    >>> law = perhom.solve(perhom.builtin_model("harmonic"), resolution=[256])
    >>> round(float(law["sigma"][0, 0]), 4)
    1.7321
"""

from ._perhom import (
    Model,
    PerhomError,
    __version__,
    builtin_model,
    builtin_model_names,
    load_model,
    parse_model,
    simulate,
    solve,
    verify,
)

__all__ = [
    "Model",
    "PerhomError",
    "__version__",
    "builtin_model",
    "builtin_model_names",
    "load_model",
    "parse_model",
    "simulate",
    "solve",
    "verify",
]
