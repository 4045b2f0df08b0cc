"""Monte-Carlo check of the maximal-stretch tail bound.

For a monotone absolutely continuous ``g`` on the circle and ``X`` uniform,

    Pr(Dbar[g(X)] > a) <= 9 E|g'(X)| / a.

The maximal stretch is estimated by the maximum over a finite width grid,
which can only under-estimate it, so a pass on the estimate is a valid
one-sided check.  If ``g`` is Lipschitz with constant ``L`` the left side
is exactly zero for ``a >= L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..kernel import MonotoneMap, dyadic_grid, max_stretch
from ..streams import RandomStream


@dataclass
class TailRow:
    a: float
    prob: float
    stderr: float
    bound: float
    ok: bool
    lipschitz_zero: bool | None = None


@dataclass
class TailReport:
    name: str
    mean_abs_derivative: float
    n_samples: int
    rows: list[TailRow] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


def hl_tail_test(g: MonotoneMap, a_list: Sequence[float], n_samples: int,
                 lam_grid: Sequence[float] | None = None, rng: RandomStream | None = None,
                 name: str = "g", sigmas: float = 3.0) -> TailReport:
    """Estimate ``Pr(max_stretch > a)`` for each ``a`` and compare with ``9 E|g'| / a``.

    A row passes when the estimate is at most the bound plus ``sigmas``
    binomial standard errors; when ``g`` carries a Lipschitz constant and
    ``a`` exceeds it, the row additionally requires an empirical
    probability of exactly zero.
    """
    if not a_list or min(a_list) <= 0:
        raise ValueError("a_list must hold positive thresholds")
    rng = rng or RandomStream(0, "hl")
    grid = dyadic_grid() if lam_grid is None else list(lam_grid)
    xs = np.array(rng.uniforms(n_samples))
    stretch = np.asarray(max_stretch(g, xs, grid))
    tv = g.total_variation()
    report = TailReport(name, tv, n_samples)
    for a in a_list:
        p = float(np.mean(stretch > a))
        se = math.sqrt(p * (1 - p) / n_samples)
        bound = 9.0 * tv / a
        ok = p <= bound + sigmas * se
        lz = None
        if g.lipschitz is not None and a >= g.lipschitz:
            lz = p == 0.0
            ok = ok and lz
        report.rows.append(TailRow(float(a), p, se, bound, ok, lz))
    return report


def square_map() -> MonotoneMap:
    """g(x) = x^2 with its exact derivative and Lipschitz constant 2."""
    return MonotoneMap(lambda x: np.asarray(x) ** 2,
                       diff=lambda a, b: (np.asarray(b) - np.asarray(a)) * (np.asarray(b) + np.asarray(a)),
                       derivative=lambda x: 2 * np.asarray(x), lipschitz=2.0)


def identity_map() -> MonotoneMap:
    return MonotoneMap(lambda x: np.asarray(x, dtype=float),
                       derivative=lambda x: np.ones_like(np.asarray(x, dtype=float)),
                       lipschitz=1.0)
