"""Repulsive pair potentials and the zero-energy scattering problem.

The catalog holds radial potentials with closed-form Fourier transforms.
The scattering solution phi solves -lap(phi) = (1-phi) v with phi -> 0 at
infinity; the scattering length is a = (1/4 pi) int dx (1-phi(x)) v(x).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import gridcore as gcore
from ._newton import newton_solve


@dataclass(frozen=True)
class Potential:
    """Radial pair interaction with analytic transform and norms.

    ``profile`` maps r to v(r) >= 0, ``hat`` maps k to its transform;
    ``support`` is the edge radius for compactly supported shapes (used by
    quadratures to place a panel boundary exactly on the discontinuity).
    """

    name: str
    coupling: float
    profile: Callable
    hat: Callable
    l1norm: float
    l2norm: float
    second_moment: float
    support: Optional[float] = None

    @property
    def is_zero(self) -> bool:
        return self.l1norm == 0.0


def _exp_potential(a0: float) -> Potential:
    return Potential(
        name="exp", coupling=a0,
        profile=lambda r: a0 * np.exp(-np.asarray(r, dtype=float)),
        hat=lambda k: 8.0 * np.pi * a0 / (1.0 + np.asarray(k, dtype=float) ** 2) ** 2,
        l1norm=8.0 * np.pi * a0,
        l2norm=a0 * np.sqrt(np.pi),
        second_moment=96.0 * np.pi * a0,
    )


def _gauss_potential(a0: float) -> Potential:
    return Potential(
        name="gauss", coupling=a0,
        profile=lambda r: a0 * np.exp(-np.asarray(r, dtype=float) ** 2),
        hat=lambda k: a0 * np.pi ** 1.5 * np.exp(-np.asarray(k, dtype=float) ** 2 / 4.0),
        l1norm=a0 * np.pi ** 1.5,
        l2norm=a0 * (np.pi / 2.0) ** 0.75,
        second_moment=1.5 * a0 * np.pi ** 1.5,
    )


def _yukawa_potential(a0: float) -> Potential:
    def profile(r):
        r = np.asarray(r, dtype=float)
        return a0 * np.exp(-r) / r

    return Potential(
        name="yukawa", coupling=a0,
        profile=profile,
        hat=lambda k: 4.0 * np.pi * a0 / (1.0 + np.asarray(k, dtype=float) ** 2),
        l1norm=4.0 * np.pi * a0,
        l2norm=a0 * np.sqrt(2.0 * np.pi),
        second_moment=24.0 * np.pi * a0,
    )


def _well_potential(a0: float) -> Potential:
    def hat(k):
        k = np.asarray(k, dtype=float)
        out = 4.0 * np.pi * a0 * (np.sin(k) - k * np.cos(k)) / np.maximum(k, 1e-300) ** 3
        return np.where(k < 1e-4, 4.0 * np.pi * a0 / 3.0 * (1.0 - k**2 / 10.0), out)

    return Potential(
        name="well", coupling=a0,
        profile=lambda r: a0 * (np.asarray(r, dtype=float) < 1.0).astype(float),
        hat=hat,
        l1norm=4.0 * np.pi * a0 / 3.0,
        l2norm=a0 * np.sqrt(4.0 * np.pi / 3.0),
        second_moment=4.0 * np.pi * a0 / 5.0,
        support=1.0,
    )


_CATALOG = {
    "exp": _exp_potential,
    "gauss": _gauss_potential,
    "yukawa": _yukawa_potential,
    "well": _well_potential,
}


def catalog(name: str, coupling: float = 1.0) -> Potential:
    """Built-in potential by name; coupling multiplies the shape.

    Zero coupling is allowed and gives the trivial (free) potential.
    """
    if name not in _CATALOG:
        valid = ", ".join(sorted(_CATALOG))
        raise ValueError(f"unknown potential {name!r}; valid names: {valid}")
    if coupling < 0:
        raise ValueError("coupling must be >= 0 (repulsive interactions only)")
    return _CATALOG[name](float(coupling))


def from_table(path: str, name: str = "custom") -> Potential:
    """Potential from a two-column text file (r, v(r)); '#' starts a comment.

    The transform and norms are computed numerically from the tabulated
    profile, interpolated linearly and treated as zero beyond the last r.
    """
    rows = []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{ln}: expected two columns, got {len(parts)}")
            rows.append((float(parts[0]), float(parts[1])))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    r_tab = np.array([p[0] for p in rows])
    v_tab = np.array([p[1] for p in rows])
    if np.any(np.diff(r_tab) <= 0):
        raise ValueError(f"{path}: radii must be strictly increasing")
    if np.any(v_tab < 0):
        raise ValueError(f"{path}: potential values must be >= 0")

    r_max = float(r_tab[-1])

    def profile(r):
        r = np.asarray(r, dtype=float)
        return np.interp(r, r_tab, v_tab, left=v_tab[0], right=0.0)

    grid = gcore.make_grid(200, gcore.POSITION, 1.0)
    vfn = gcore.RadialFn.from_callable(grid, profile)
    l1 = gcore.integrate_3d(vfn)
    l2 = np.sqrt(gcore.integrate_3d(gcore.RadialFn(grid, vfn.values**2)))
    mom2 = gcore.integrate_3d(gcore.RadialFn(grid, grid.nodes**2 * vfn.values))

    def hat(k):
        k = np.asarray(k, dtype=float)
        scalar = k.ndim == 0
        m = gcore.forward_matrix(grid, np.atleast_1d(k), x_cut=r_max * 1.0001,
                                 tail=False, support_edge=r_max)
        out = m @ vfn.values
        return out[0] if scalar else out

    return Potential(name=name, coupling=1.0, profile=profile, hat=hat,
                     l1norm=float(l1), l2norm=float(l2),
                     second_moment=float(mom2), support=r_max)


@dataclass
class ScatteringData:
    """Zero-energy scattering solution and its length."""

    phi: gcore.RadialFn
    phi_hat: gcore.RadialFn
    a: float
    converged: bool
    iterations: int
    residual_norm: float


def scattering_solve(v: Potential, grid: gcore.RadialGrid, cfg=None,
                     pos_grid: Optional[gcore.RadialGrid] = None) -> ScatteringData:
    """Solve k^2 phihat(k) = FT[(1-phi) v](k) collocated at momentum nodes.

    ``cfg`` may be any object with ``tolerance``/``max_iter``/``r_scale``
    attributes (the solver configuration of the equations module fits).
    """
    if grid.space != gcore.MOMENTUM:
        raise ValueError("scattering_solve expects a momentum grid")
    tol = getattr(cfg, "tolerance", 1e-12)
    max_iter = getattr(cfg, "max_iter", 25)
    r_scale = getattr(cfg, "r_scale", 1.0)
    if pos_grid is None:
        pos_grid = gcore.make_grid(grid.order, gcore.POSITION, r_scale)

    if v.is_zero:
        zero = np.zeros(grid.order)
        return ScatteringData(gcore.RadialFn(pos_grid, zero),
                              gcore.RadialFn(grid, zero.copy()),
                              0.0, True, 0, 0.0)

    k2 = grid.nodes**2
    v_hat = v.hat(grid.nodes)
    x_cut = _potential_cut(v, pos_grid)
    mv = gcore.forward_matrix(pos_grid, grid.nodes, x_cut=x_cut, tail=False,
                              weight_fn=v.profile, support_edge=v.support)
    ginv = gcore.inverse_matrix(grid, pos_grid.nodes)
    mvk = mv @ ginv  # multiply-by-v in position space, seen from momentum

    def residual(phi_hat):
        return k2 * phi_hat - v_hat + mvk @ phi_hat

    def jac(phi_hat):
        return np.diag(k2) + mvk

    # Born term as the starting point; the problem is linear so one Newton
    # step lands on the solution and the second certifies it
    res = newton_solve(residual, jac, v_hat / k2, tol=tol, max_iter=max_iter)
    phi_hat = res.x
    phi = ginv @ phi_hat
    q_v = gcore.weighted_integral_row(pos_grid, v.profile, power=2,
                                      x_cut=x_cut, support_edge=v.support)
    a = (v.l1norm - float(q_v @ phi)) / (4.0 * np.pi)
    return ScatteringData(gcore.RadialFn(pos_grid, phi),
                          gcore.RadialFn(grid, phi_hat),
                          a, res.converged, res.iterations, res.residual_norm)


def scattering_length(sd: ScatteringData, v: Potential) -> float:
    """a = (1/4 pi) int dx (1-phi) v, recomputed from the stored profile."""
    pos = sd.phi.grid
    q_v = gcore.weighted_integral_row(pos, v.profile, power=2,
                                      x_cut=_potential_cut(v, pos),
                                      support_edge=v.support)
    return (v.l1norm - float(q_v @ sd.phi.values)) / (4.0 * np.pi)


def scattering_length_from_cusp(sd: ScatteringData) -> float:
    """a from the momentum-side limit k^2 phihat(k) -> 4 pi a as k -> 0.

    k^2 phihat is even and analytic in k, so a quadratic fit in k^2 through
    the smallest nodes extrapolates cleanly.
    """
    k = sd.phi_hat.grid.nodes[:3]
    y = k**2 * sd.phi_hat.values[:3]
    coef = np.polynomial.polynomial.polyfit(k**2, y, 2)
    return float(coef[0]) / (4.0 * np.pi)


def _potential_cut(v: Potential, pos_grid: gcore.RadialGrid) -> float:
    """Radius beyond which r^2 v(r) is negligible, from the analytic profile."""
    if v.support is not None:
        return min(v.support * 1.0001, float(pos_grid.nodes[-1]))
    r = pos_grid.nodes
    amp = r**2 * v.profile(r)
    peak = float(np.max(amp))
    if peak == 0.0:
        return float(r[0])
    alive = np.nonzero(amp > 1e-14 * peak)[0]
    return float(r[min(int(alive[-1]) + 1, pos_grid.order - 1)])
