"""Standard normal distribution function."""

import numpy as np
from scipy import special


def normal_cdf(y):
    """Standard normal CDF, accurate to double precision.

    Accepts scalars or arrays; scalars come back as ``float``.
    """
    out = special.ndtr(np.asarray(y, dtype=float))
    return float(out) if out.ndim == 0 else out


def normal_logcdf(y):
    out = special.log_ndtr(np.asarray(y, dtype=float))
    return float(out) if out.ndim == 0 else out
