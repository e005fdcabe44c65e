"""Single tolerance record shared across the library.

The defaults sit one order of magnitude looser than the 10-decimal fixtures
they are calibrated against, and every operation takes the record explicitly
so callers can tighten or loosen the whole stack at once.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    rowsum: float = 1e-9          # row-sum deviation for Markov/rate inputs
    spectral_class: float = 1e-9  # spectral-class membership guards
    recompose: float = 1e-9       # relative eigendecomposition round-trip
    inverse: float = 1e-10        # max-norm residual of a*inv(a) - I
    singular: float = 1e-12       # determinant threshold, relative to norm^4
    entry: float = 1e-12          # negativity slack for Markov/rate entries
    real: float = 1e-9            # imaginary residue allowed in real logs
    pattern: float = 1e-9         # strand-symmetric layout deviation
    variety: float = 1e-9         # quadric membership residual
    margin: float = 1e-6          # witness margin floor
    y_guard: float = 1e-8         # |delta6 + delta9| recovery guard

    def with_entry(self, entry: float) -> "Tolerances":
        return replace(self, entry=entry)


DEFAULT_TOL = Tolerances()


def tolerances_from_env() -> Tolerances:
    """Default record, with EMBEDLOG_TOL (a float) overriding `entry`."""
    raw = os.environ.get("EMBEDLOG_TOL")
    if not raw:
        return DEFAULT_TOL
    try:
        return DEFAULT_TOL.with_entry(float(raw))
    except ValueError:
        raise ValueError(f"EMBEDLOG_TOL={raw!r} is not a float")
