"""Tucker decomposition by regularized local search."""

import json

import numpy as np

from . import _core
from ._core import (
    DimensionError,
    ScheduleError,
    default_lambda,
    generate,
    grad,
    hosvd,
    multilinear_transform,
    objective,
    reconstruct,
)

__all__ = [
    "DimensionError",
    "ScheduleError",
    "default_lambda",
    "generate",
    "grad",
    "hosvd",
    "multilinear_transform",
    "objective",
    "reconstruct",
    "run",
    "verify",
]


def run(T, r, **kwargs):
    """Run the search on T at rank r. Trace records are returned as dicts."""
    out = _core.run(np.asarray(T, dtype=np.float64), r, **kwargs)
    out["trace"] = [json.loads(line) for line in out["trace"]]
    return out


def verify(suites=(), seed=0):
    """Run the named property checks (all of them by default) and return the report."""
    return json.loads(_core.verify(list(suites), seed))
