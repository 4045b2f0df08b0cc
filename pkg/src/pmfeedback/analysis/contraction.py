"""The smoothed contraction variable and its mean as a function of width.

For a width ``lam`` the contraction variable is

    L(lam) = -log2 D_lam[F^{-1}(V | Y)],   Y ~ P_Y, V ~ Unif[0, 1) independent,

the log-shrinkage of an arc of length ``lam`` at a uniformly random
position pulled back through the inverse kernel.  Its mean goes from 0 at
``lam -> 1`` to I(X;Y) at ``lam -> 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..kernel import KernelError, PmKernel, log_smoothed_derivative, trend_test
from ..streams import RandomStream


@dataclass(frozen=True)
class ContractionSample:
    lam: float
    value: float
    y: float
    v: float


def _check_width(lam: float):
    if not 0 < lam < 1:
        raise KernelError(f"width must lie in (0, 1), got {lam}")


def draw_pairs(k: PmKernel, n_samples: int, rng: RandomStream):
    """Independent (Y, V) draws with Y ~ P_Y and V uniform."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    ys = k.sample_outputs(n_samples, rng)
    vs = np.array(rng.uniforms(n_samples))
    return ys, vs


def contraction_values(k: PmKernel, lam: float, ys, vs) -> np.ndarray:
    _check_width(lam)
    return -log_smoothed_derivative(k, lam, ys, vs)


def sample_contraction(k: PmKernel, lam: float, n_samples: int,
                       rng: RandomStream) -> list[ContractionSample]:
    _check_width(lam)
    ys, vs = draw_pairs(k, n_samples, rng)
    vals = contraction_values(k, lam, ys, vs)
    return [ContractionSample(lam, float(a), y.item(), float(v))
            for a, y, v in zip(vals, ys, vs)]


@dataclass
class LambdaCurve:
    grid: list[float]
    means: list[float]
    stderrs: list[float]
    moments: list[float]
    order: float
    moment_stderrs: list[float]

    def continuity(self, factor: float = 5.0) -> list[tuple[float, float, float, float, bool]]:
        """Adjacent-point comparison ``|m_i - m_{i+1}| < factor (se_i + se_{i+1})``.

        Returns ``(lam_i, lam_{i+1}, gap, allowed, ok)`` per adjacent pair.
        """
        rows = []
        for i in range(len(self.grid) - 1):
            gap = abs(self.means[i] - self.means[i + 1])
            allowed = factor * (self.stderrs[i] + self.stderrs[i + 1])
            rows.append((self.grid[i], self.grid[i + 1], gap, allowed, gap < allowed))
        return rows

    def moment_trend(self, tail: int = 5) -> tuple[float, float]:
        """Slope and one-sided p-value of the moment over the ``tail`` smallest widths."""
        return trend_test(self.grid[-tail:], self.moments[-tail:],
                          self.moment_stderrs[-tail:])


def lambda_curve(k: PmKernel, grid: Sequence[float], delta: float, n_samples: int,
                 rng: RandomStream) -> LambdaCurve:
    """Mean, standard error and (2+delta)-th absolute moment of L(lam) per width.

    Each width gets its own independent sample of ``n_samples`` pairs.
    """
    grid = [float(g) for g in grid]
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly decreasing")
    for lam in grid:
        _check_width(lam)
    order = 2.0 + delta
    means, errs, moments, moment_errs = [], [], [], []
    for lam in grid:
        ys, vs = draw_pairs(k, n_samples, rng)
        vals = contraction_values(k, lam, ys, vs)
        means.append(float(vals.mean()))
        se = float(vals.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else math.inf
        errs.append(max(se, np.finfo(float).tiny))
        m = np.abs(vals) ** order
        moments.append(float(m.mean()))
        moment_errs.append(max(float(m.std(ddof=1) / math.sqrt(n_samples))
                               if n_samples > 1 else math.inf, np.finfo(float).tiny))
    return LambdaCurve(grid, means, errs, moments, order, moment_errs)
