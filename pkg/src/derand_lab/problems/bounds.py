"""Upper bounds on -log2 of the sampling probability, per family."""
from __future__ import annotations

import math

from ..errors import ConfigError, InfeasibleOccurrenceBound
from .graphs import component_count
from .ksat import occurrence_cap


def success_probability_bounds(family: str, **params) -> float:
    """Bits of -log(delta) for a problem family.

    cycles: 2n/k^2;  ksat: 2e m 2^-k;  balance: -log2(1 - 2 n^-7).
    """
    if family == "cycles":
        n, k = params["n"], params["k"]
        component_count(k)
        return 2 * n / k**2
    if family == "ksat":
        m, k = params["m"], params["k"]
        if occurrence_cap(k) < 1:
            raise InfeasibleOccurrenceBound(f"k = {k}: occurrence cap below 1")
        return 2 * math.e * m * 2.0**-k
    if family == "balance":
        n = params["n"]
        return -math.log1p(-2 * float(n) ** -7) / math.log(2)
    raise ConfigError(f"unknown family {family!r}")
