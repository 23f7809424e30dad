"""Tolerance policy shared across the package.

Three tiers, two orders of magnitude apart: storage invariants are kept at
``representation``, derived residuals at ``residual``, and yes/no decisions
(meet vs. disjoint, equal vs. distinct) at ``decision``.  All three can be
overridden through environment variables.
"""

import os
from dataclasses import dataclass

_ENV_PREFIX = "PG3FLOWS"


@dataclass(frozen=True)
class Tolerances:
    representation: float = 1e-12
    residual: float = 1e-10
    decision: float = 1e-8

    @classmethod
    def from_env(cls):
        """Build tolerances, honouring PG3FLOWS_*_TOL environment overrides."""
        kwargs = {}
        for field in ("representation", "residual", "decision"):
            raw = os.environ.get(f"{_ENV_PREFIX}_{field.upper()}_TOL")
            if raw is not None:
                kwargs[field] = float(raw)
        return cls(**kwargs)


TOL = Tolerances.from_env()
