"""Dense Newton iteration shared by the scattering and main-equation solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


@dataclass
class NewtonResult:
    x: np.ndarray
    converged: bool
    iterations: int
    residual_norm: float
    step_norms: list = field(default_factory=list)
    message: str = ""


def newton_solve(residual: Callable, jacobian: Callable, x0: np.ndarray, *,
                 tol: float = 1e-11, max_iter: int = 40,
                 step_scale: Optional[Callable] = None,
                 guard: Optional[Callable] = None) -> NewtonResult:
    """Plain Newton iteration, terminating on the scaled step sup-norm.

    ``step_scale(x, dx)`` maps a raw step to the dimensionless step whose
    sup-norm is compared to ``tol``; ``guard(x, dx)`` may return a step
    multiplier (used to halve once when a step overshoots physical bounds).
    """
    x = np.array(x0, dtype=float)
    steps: list = []
    for it in range(1, max_iter + 1):
        r = residual(x)
        if not np.all(np.isfinite(r)):
            return NewtonResult(x, False, it, np.inf, steps,
                                "non-finite residual")
        j = jacobian(x)
        try:
            dx = np.linalg.solve(j, -r)
        except np.linalg.LinAlgError:
            return NewtonResult(x, False, it, float(np.max(np.abs(r))), steps,
                                "singular jacobian")
        if guard is not None:
            dx = guard(x, dx) * dx
        x = x + dx
        scaled = step_scale(x, dx) if step_scale is not None else dx
        step = float(np.max(np.abs(scaled)))
        steps.append(step)
        if step < tol:
            r = residual(x)
            return NewtonResult(x, True, it, float(np.max(np.abs(r))), steps)
    r = residual(x)
    return NewtonResult(x, False, max_iter, float(np.max(np.abs(r))), steps,
                        "maximum iterations reached")
