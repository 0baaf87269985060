"""Radial grids, quadrature, Fourier-sine transforms and piecewise-Chebyshev splines.

Rotation-invariant functions on R^3 are represented by their samples on a
compactified half-line grid.  Conventions used throughout the package:

* Compactification: a Gauss-Legendre node s in (-1, 1) maps to the radius
  r = scale*(1-s)/(1+s).  The quadrature weights absorb the Jacobian
  2*scale/(1+s)^2, so ``sum(w * f(r))`` approximates ``int_0^inf f(r) dr``.
* 3d integrals of radial functions: int dx f(|x|) = 4*pi int_0^inf r^2 f dr.
* Fourier transform (no 2*pi in the forward exponent):

      fhat(k) = int dx e^{-i k.x} f(|x|) = (4*pi/k) int_0^inf dr r sin(kr) f(r)
      f(r)    = (2*pi)^-3 int dk e^{i k.x} fhat = (1/(2*pi^2 r)) int_0^inf dk k sin(kr) fhat(k)

  With this pairing a convolution of radial functions is a plain pointwise
  product of their transforms, and a pointwise product picks up (2*pi)^-3
  (i.e. a momentum-side convolution) instead.

The transform kernels sin(k*r) oscillate far faster than the fixed node set
at large k*r, so transforms are *not* computed with the grid's own weights.
Instead the samples define a barycentric interpolant in the compactified
coordinate, and that interpolant is integrated against the oscillatory
kernel either with half-period composite panels (moderate k*r) or along a
45-degree complex ray where the kernel decays (large k*r).  Both routes are
linear in the samples, so transforms are still dense matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev as ncheb

POSITION = "position"
MOMENTUM = "momentum"

# panel quadrature used by every composite rule below
_PANEL_X, _PANEL_W = np.polynomial.legendre.leggauss(8)


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on (-1, 1)."""
    if n < 1:
        raise ValueError(f"quadrature order must be >= 1, got {n}")
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True)
class RadialGrid:
    """Quadrature grid on the half line, in position or momentum space.

    ``nodes`` are radii in increasing order; ``compact`` holds the matching
    Gauss-Legendre coordinates s = (scale - r)/(scale + r).  ``weights`` are
    for plain dr integrals (no 4*pi*r^2 measure).
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    space: str
    scale: float
    compact: np.ndarray

    def __post_init__(self):
        for arr in (self.nodes, self.weights, self.compact):
            arr.setflags(write=False)

    def quad(self, values: np.ndarray) -> float:
        """Plain half-line integral sum(w_i * values_i)."""
        return float(self.weights @ values)

    @property
    def reliable_rmax(self) -> float:
        """Radius up to which fixed-node evaluation resolves the dual space."""
        return self.order / (8.0 * self.scale)


def make_grid(order: int, space: str, scale: float = 1.0) -> RadialGrid:
    """Compactified Gauss-Legendre grid covering (0, inf)."""
    if space not in (POSITION, MOMENTUM):
        raise ValueError(f"space must be {POSITION!r} or {MOMENTUM!r}, got {space!r}")
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    s, w = gauss_legendre(order)
    # descending s <-> ascending radius
    s = s[::-1].copy()
    w = w[::-1].copy()
    nodes = scale * (1.0 - s) / (1.0 + s)
    weights = w * 2.0 * scale / (1.0 + s) ** 2
    return RadialGrid(order=order, nodes=nodes, weights=weights, space=space,
                      scale=scale, compact=s)


@dataclass
class RadialFn:
    """Samples of a rotation-invariant function on a RadialGrid."""

    grid: RadialGrid
    values: np.ndarray
    interpolant: Optional["ChebSpline"] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.order,):
            raise ValueError("values length does not match grid order")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite values in RadialFn")

    @classmethod
    def from_callable(cls, grid: RadialGrid, fn: Callable) -> "RadialFn":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))


def integrate_3d(f: RadialFn) -> float:
    """Full-space integral 4*pi int r^2 f(r) dr of a position-space function."""
    if f.grid.space != POSITION:
        raise ValueError("integrate_3d expects a position-space function")
    g = f.grid
    return float(4.0 * np.pi * np.sum(g.weights * g.nodes**2 * f.values))


# ---------------------------------------------------------------------------
# barycentric interpolation in the compactified coordinate

def barycentric_weights(x: np.ndarray) -> np.ndarray:
    """Barycentric weights for distinct nodes, stable up to a few hundred points."""
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    logs = np.sum(np.log(np.abs(d)), axis=1)
    signs = np.prod(np.sign(d), axis=1)
    logs -= logs.mean()  # overall scale is irrelevant
    return signs * np.exp(-logs)


def cardinal_matrix(s_nodes: np.ndarray, bary_w: np.ndarray, s_eval: np.ndarray) -> np.ndarray:
    """Matrix taking node values to interpolant values at ``s_eval``.

    ``s_eval`` may be complex (used by the contour branch of the transforms).
    """
    diff = s_eval[:, None] - s_nodes[None, :]
    hit = np.abs(diff) < 1e-300
    diff = np.where(hit, 1.0, diff)
    c = bary_w[None, :] / diff
    m = c / c.sum(axis=1)[:, None]
    rows = np.nonzero(hit.any(axis=1))[0]
    for i in rows:
        m[i] = 0.0
        m[i, np.argmax(hit[i])] = 1.0
    return m


def _compact_of(r, scale):
    return (scale - r) / (scale + r)


def _panelize(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss points/weights for the panels delimited by ``edges``."""
    a = edges[:-1]
    h = np.diff(edges)
    pts = (0.5 * h[:, None] * (_PANEL_X[None, :] + 1.0) + a[:, None]).ravel()
    wts = (0.5 * h[:, None] * _PANEL_W[None, :]).ravel()
    return pts, wts


def _real_axis_edges(grid: RadialGrid, t: float, x_cut: float,
                     cap: Optional[int] = None) -> np.ndarray:
    """Panel edges on [0, x_cut]: grid structure joined with half periods of sin(t x)."""
    edges = [0.0, x_cut]
    edges.extend(grid.nodes[grid.nodes < x_cut])
    n_osc = int(np.floor(t * x_cut / np.pi))
    if cap is not None and n_osc > cap:
        # unresolved oscillation: bounded work, junk suppressed downstream
        edges.extend(np.linspace(0.0, x_cut, cap))
    elif n_osc >= 1:
        edges.extend(np.arange(1, n_osc + 1) * np.pi / t)
    return np.unique(np.asarray(edges))


_CONTOUR_UMAX = 45.0
_CONTOUR_PANELS = 64
_U_PTS, _U_WTS = _panelize(np.linspace(0.0, _CONTOUR_UMAX, _CONTOUR_PANELS + 1))


def sine_transform_rows(grid: RadialGrid, targets: np.ndarray,
                        x_cut: Optional[float] = None,
                        tail: bool = True,
                        weight_fn: Optional[Callable] = None,
                        support_edge: Optional[float] = None,
                        budget: int = 3000) -> np.ndarray:
    """Rows R with (R @ samples)[i] ~ int_0^inf w(x) h(x) sin(t_i x) dx.

    ``h`` is the barycentric interpolant of x*f(x) through the samples of f
    on ``grid``; ``w`` is an optional exact weight evaluated inside the
    quadrature (so e.g. a discontinuous potential never passes through the
    interpolant).  Moderately oscillatory targets use half-period composite
    panels on [0, x_cut], plus (for slowly decaying data, ``tail=True``) the
    exact tail of the interpolant along the upward ray x_cut + i*tau where
    e^{itx} decays.  Targets whose oscillation count t*x_cut/pi exceeds
    ``budget`` are integrated along the ray x = e^{i pi/4}*tau instead.

    The complex routes evaluate the interpolant off the real axis, which is
    only trustworthy where the interpolated data is analytic; they therefore
    use the interpolant restricted to the nodes below x_cut (polynomial
    interpolants of functions with endpoint singularities in the compact
    coordinate diverge off-axis as the order grows).
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    if x_cut is None:
        x_cut = float(grid.nodes[-1])
    s_nodes = grid.compact
    bw = barycentric_weights(s_nodes)
    x_last = float(grid.nodes[-1])
    # evaluating the degree-N interpolant off the real axis amplifies data
    # rounding like rho^N; the 45-degree ray is safe only for targets large
    # enough that the damping confines it next to the origin endpoint
    t_contour = grid.order**2 / (28.0 * grid.scale)
    rows = np.zeros((targets.size, grid.order))

    contour = []
    for i, t in enumerate(targets):
        x_span = x_last if tail else x_cut
        use_tail = tail
        if weight_fn is None and t * x_span / np.pi > budget:
            if t >= t_contour:
                contour.append(i)
                continue
            x_span = budget * np.pi / t
            use_tail = True  # live structure remains beyond the capped cut
        edges = _real_axis_edges(grid, t, x_span,
                                 cap=400 if weight_fn is not None else None)
        if support_edge is not None and 0.0 < support_edge < x_span:
            edges = np.unique(np.append(edges, support_edge))
        pts, wts = _panelize(edges)
        w = wts * np.sin(t * pts)
        if weight_fn is not None:
            w = w * weight_fn(pts)
        row = w @ cardinal_matrix(s_nodes, bw, _compact_of(pts, grid.scale))
        if weight_fn is None and use_tail:
            row = row + _tail_row(grid, t, x_span)
        rows[i] = row

    if contour:
        # the ray x = e^{i pi/4} tau stays within O(1/t) of the origin end,
        # where the node set is dense and off-axis evaluation is safe
        phase = np.exp((1j - 1.0) * _U_PTS)
        root = np.exp(1j * np.pi / 4.0)
        tc = targets[np.asarray(contour)]
        z = root * np.sqrt(2.0) * _U_PTS[None, :] / tc[:, None]
        s_z = _compact_of(z.ravel(), grid.scale)
        card = cardinal_matrix(s_nodes, bw, s_z).reshape(
            len(contour), _U_PTS.size, -1)
        block = np.einsum("q,tqj->tj", _U_WTS * phase, card)
        rows[np.asarray(contour)] = np.imag(root * np.sqrt(2.0) / tc[:, None] * block)
    return rows * grid.nodes[None, :]


def _tail_row(grid: RadialGrid, t: float, x_start: float) -> np.ndarray:
    """Coefficients of int_{x_start}^inf h(x) sin(t x) dx along the upward ray.

    Uses a low-order interpolant through the nodes bracketing x_start: the
    ray needs analytic continuation, and a local model is immune to the
    rho^N rounding amplification of the global one.  Algebraically decaying
    data is a low-degree polynomial in the compact coordinate near its far
    end, which such a window captures essentially exactly.
    """
    i0 = int(np.searchsorted(grid.nodes, x_start))
    lo = max(0, min(i0 - 6, grid.order - 16))
    hi = min(grid.order, lo + 16)
    idx = np.arange(lo, hi)
    s_w = grid.compact[idx]
    bw_w = barycentric_weights(s_w)
    z = x_start + 1j * _U_PTS / t
    card = cardinal_matrix(s_w, bw_w, _compact_of(z, grid.scale))
    vals = np.real((np.exp(1j * t * x_start) / t)
                   * ((_U_WTS * np.exp(-_U_PTS)) @ card))
    row = np.zeros(grid.order)
    row[idx] = vals
    return row


def envelope_plan(grid: RadialGrid, samples: np.ndarray,
                  floor: float = 1e-10) -> tuple[float, bool]:
    """Truncation radius and tail policy for transforming the given samples.

    Returns the radius where |x*f| first drops below ``floor`` times its
    peak, and whether the analytic tail integral should be added there
    (slowly, e.g. algebraically, decaying data needs it; steeply decaying
    data is already below quadrature accuracy at the cut).
    """
    amp = np.abs(grid.nodes * samples)
    peak_idx = int(np.argmax(amp))
    peak = amp[peak_idx]
    if peak == 0.0:
        return float(grid.nodes[0]), False
    below = np.nonzero(amp[peak_idx:] < floor * peak)[0]
    if below.size == 0:
        return float(grid.nodes[-1]), True
    j = min(peak_idx + int(below[0]), grid.order - 1)
    j0 = max(peak_idx, j - 3)
    if j0 == j:
        return float(grid.nodes[j]), True
    a = np.maximum(amp[[j0, j]], 1e-300)
    slope = np.log(a[1] / a[0]) / np.log(grid.nodes[j] / grid.nodes[j0])
    return float(grid.nodes[j]), bool(slope > -8.0)


def forward_matrix(pos: RadialGrid, mom_targets: np.ndarray,
                   x_cut: Optional[float] = None, tail: bool = True,
                   weight_fn: Optional[Callable] = None,
                   support_edge: Optional[float] = None) -> np.ndarray:
    """Dense matrix taking position samples to fhat at the target momenta."""
    k = np.atleast_1d(np.asarray(mom_targets, dtype=float))
    rows = sine_transform_rows(pos, k, x_cut=x_cut, tail=tail,
                               weight_fn=weight_fn, support_edge=support_edge)
    return 4.0 * np.pi / k[:, None] * rows


def inverse_matrix(mom: RadialGrid, pos_targets: np.ndarray,
                   x_cut: Optional[float] = None, tail: bool = True) -> np.ndarray:
    """Dense matrix taking momentum samples to g at the target radii."""
    r = np.atleast_1d(np.asarray(pos_targets, dtype=float))
    rows = sine_transform_rows(mom, r, x_cut=x_cut, tail=tail)
    return rows / (2.0 * np.pi**2 * r[:, None])


def weighted_integral_row(grid: RadialGrid, weight_fn: Callable, power: int = 2,
                          x_cut: Optional[float] = None,
                          support_edge: Optional[float] = None,
                          prefactor: float = 4.0 * np.pi) -> np.ndarray:
    """Row q with q @ samples ~ prefactor * int x^power w(x) f(x) dx.

    Used for potential-weighted integrals, with the (possibly discontinuous)
    weight evaluated exactly inside the panels.
    """
    if x_cut is None:
        x_cut = float(grid.nodes[-1])
    edges = [0.0, x_cut]
    edges.extend(grid.nodes[grid.nodes < x_cut])
    if support_edge is not None and 0.0 < support_edge < x_cut:
        edges.append(support_edge)
    pts, wts = _panelize(np.unique(np.asarray(edges)))
    bw = barycentric_weights(grid.compact)
    # the interpolant carries x*f, so one power of x moves into the data
    w = prefactor * wts * pts ** (power - 1) * weight_fn(pts)
    row = w @ cardinal_matrix(grid.compact, bw, _compact_of(pts, grid.scale))
    return row * grid.nodes


def fourier_forward(f: RadialFn, target: RadialGrid) -> RadialFn:
    """Radial Fourier transform of a position-space function."""
    if f.grid.space != POSITION or target.space != MOMENTUM:
        raise ValueError("fourier_forward maps position -> momentum")
    x_cut, tail = envelope_plan(f.grid, f.values)
    m = forward_matrix(f.grid, target.nodes, x_cut=x_cut, tail=tail)
    return RadialFn(target, m @ f.values)


def fourier_inverse(g: RadialFn, target: RadialGrid) -> RadialFn:
    """Inverse transform of a momentum-space function (carries the (2 pi)^-3)."""
    if g.grid.space != MOMENTUM or target.space != POSITION:
        raise ValueError("fourier_inverse maps momentum -> position")
    x_cut, tail = envelope_plan(g.grid, g.values)
    m = inverse_matrix(g.grid, target.nodes, x_cut=x_cut, tail=tail)
    return RadialFn(target, m @ g.values)


def dual_grid(grid: RadialGrid) -> RadialGrid:
    """Companion grid in the conjugate space, with reciprocal scale."""
    other = MOMENTUM if grid.space == POSITION else POSITION
    return make_grid(grid.order, other, 1.0 / grid.scale)


def convolve(f: RadialFn, g: RadialFn, dual: Optional[RadialGrid] = None) -> RadialFn:
    """Convolution int dy f(|x-y|) g(|y|), via a product in the conjugate space.

    Works for a pair of position- or a pair of momentum-space functions on a
    shared grid; a momentum-side convolution picks up the (2*pi)^3 of the
    inverse-transform pairing.
    """
    same = (f.grid is g.grid) or (
        f.grid.space == g.grid.space
        and f.grid.order == g.grid.order
        and f.grid.scale == g.grid.scale
    )
    if not same:
        raise ValueError("convolve requires both functions on the same grid")
    if dual is None:
        dual = dual_grid(f.grid)
    if f.grid.space == POSITION:
        fh = fourier_forward(f, dual)
        gh = fourier_forward(g, dual)
        prod = RadialFn(dual, fh.values * gh.values)
        x_cut, tail = envelope_plan(dual, prod.values)
        m = inverse_matrix(dual, f.grid.nodes, x_cut=x_cut, tail=tail)
        return RadialFn(f.grid, m @ prod.values)
    fp = fourier_inverse(f, dual)
    gp = fourier_inverse(g, dual)
    prod = RadialFn(dual, fp.values * gp.values)
    x_cut, tail = envelope_plan(dual, prod.values)
    m = forward_matrix(dual, f.grid.nodes, x_cut=x_cut, tail=tail)
    return RadialFn(f.grid, (2.0 * np.pi) ** 3 * (m @ prod.values))


def convolve_bipolar(f: Callable, g: Callable, radii, outer_order: int = 150,
                     inner_order: int = 64) -> np.ndarray:
    """Reference convolution through two-center bipolar coordinates.

    (f*g)(r) = (2*pi/r) int_0^inf ds s f(s) int_{|r-s|}^{r+s} dt t g(t),
    with both factors given as callables.  Slow; cross-checks the
    Fourier-product path.
    """
    sgrid = make_grid(outer_order, POSITION, 1.0)
    xi, wi = gauss_legendre(inner_order)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    out = np.empty_like(radii)
    for m, r in enumerate(radii):
        s = sgrid.nodes
        lo = np.abs(r - s)
        hi = r + s
        t = 0.5 * (hi - lo)[:, None] * (xi[None, :] + 1.0) + lo[:, None]
        inner = 0.5 * (hi - lo) * np.sum(wi[None, :] * t * g(t), axis=1)
        out[m] = 2.0 * np.pi / r * np.sum(sgrid.weights * s * f(s) * inner)
    return out


# ---------------------------------------------------------------------------
# piecewise Chebyshev splines in the compactified coordinate

@dataclass
class ChebSpline:
    """Piecewise Chebyshev fit in the compactified coordinate.

    ``breakpoints`` partition [-1, 1]; block p of ``coeffs`` holds the
    Chebyshev coefficients on [breakpoints[p], breakpoints[p+1]].  ``scale``
    fixes the map s = (scale - r)/(scale + r) used at evaluation time.
    """

    breakpoints: np.ndarray
    coeffs: np.ndarray  # shape (intervals, degree + 1)
    scale: float
    space: str = POSITION

    def __call__(self, r) -> np.ndarray:
        return spline_eval(self, r)

    @property
    def intervals(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1


def spline_fit(f: RadialFn, intervals: int, degree: int) -> ChebSpline:
    """Fit a piecewise-Chebyshev interpolant through the grid samples of f.

    The node samples define a barycentric interpolant in the compactified
    coordinate, which is resampled at Chebyshev-Lobatto points on each
    interval (shared endpoints make the fit continuous across breakpoints).
    """
    if intervals < 1 or degree < 1:
        raise ValueError("need intervals >= 1 and degree >= 1")
    bw = barycentric_weights(f.grid.compact)
    breakpoints = np.linspace(-1.0, 1.0, intervals + 1)
    xi = np.cos(np.pi * np.arange(degree + 1) / degree)
    local = 0.5 * np.diff(breakpoints)[:, None] * (xi[None, :] + 1.0) + breakpoints[:-1, None]
    vals = cardinal_matrix(f.grid.compact, bw, local.ravel()) @ f.values
    vals = vals.reshape(intervals, degree + 1)
    coeffs = np.empty_like(vals)
    for p in range(intervals):
        coeffs[p] = ncheb.chebfit(xi, vals[p], degree)
    return ChebSpline(breakpoints=breakpoints, coeffs=coeffs,
                      scale=f.grid.scale, space=f.grid.space)


def spline_eval(sp: ChebSpline, r) -> np.ndarray:
    """Evaluate a ChebSpline at radii r >= 0."""
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    if not np.all(np.isfinite(r)) or np.any(r < 0):
        raise ValueError("spline evaluation needs finite radii >= 0")
    s = (sp.scale - r) / (sp.scale + r)
    idx = np.clip(np.searchsorted(sp.breakpoints, s, side="right") - 1,
                  0, sp.intervals - 1)
    out = np.empty_like(s)
    for p in range(sp.intervals):
        mask = idx == p
        if not np.any(mask):
            continue
        a, b = sp.breakpoints[p], sp.breakpoints[p + 1]
        local = 2.0 * (s[mask] - a) / (b - a) - 1.0
        out[mask] = ncheb.chebval(local, sp.coeffs[p])
    return out[0] if scalar else out


def attach_interpolant(f: RadialFn, intervals: int = 8, degree: int = 12) -> RadialFn:
    """Return f with a ChebSpline interpolant fitted to its samples."""
    f.interpolant = spline_fit(f, intervals, degree)
    return f
