"""Central tolerance record.

Every numerical threshold used by the engines lives here so that the
``RODEO_NUMERIC_POLICY`` environment variable can swap the whole profile.
"""

from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    atol: float = 1e-12
    herm_tol: float = 1e-10
    norm_tol: float = 1e-9
    trace_drift: float = 1e-8
    rate_tol: float = 1e-12
    self_jump_fidelity: float = 1e-10
    match_tol: float = 1e-8
    violation_mu: float = 1e-9
    max_event_prob: float = 0.1
    jacobi_sweeps: int = 100
    jacobi_rel_threshold: float = 1e-14


PROFILES = {
    "default": NumericPolicy(),
    "strict": NumericPolicy(
        atol=1e-13,
        herm_tol=1e-12,
        norm_tol=1e-11,
        trace_drift=1e-10,
        rate_tol=1e-13,
        match_tol=1e-10,
        violation_mu=1e-10,
    ),
}


def current_policy() -> NumericPolicy:
    name = os.environ.get("RODEO_NUMERIC_POLICY", "default").strip().lower() or "default"
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(
            f"RODEO_NUMERIC_POLICY must be one of {sorted(PROFILES)}, got {name!r}"
        ) from None
