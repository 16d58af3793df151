"""Spherical Fourier analysis of radial functions on the Heisenberg group H_n.

A radial function ``f(z, s)`` depends on ``r = |z|`` and the central variable
``s``.  Its spherical transform lives on pairs ``(m, lam)`` with ``m >= 0`` a
Laguerre mode and ``lam != 0``.  The inversion used throughout is

    f(r, s) = c_n * sum_m C(m+n-1, m) * int fhat(m, lam) w_{m,-lam}(r, s) |lam|^n dlam,

with ``c_n = 2**(n-1) / pi**(n+1)``.  Because the spherical function carries the
factor ``1 / C(m+n-1, m)`` the binomials cancel, and for each fixed ``lam`` the
mode sum collapses to a Laguerre series in ``y = 2|lam| r^2``.  The inverse
transform therefore runs with ``lam`` on the outside (a midpoint grid that never
touches ``lam = 0``) and the modes on the inside; the number of active modes at
a node is read off the symbol's support, so no artificial mode cut is needed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit
from scipy import fft as sfft
from scipy import integrate
from scipy.special import comb

from .errors import GridTooCoarse, UnboundedSupport

ValueFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
ModeLimitFn = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# group data and measures


@dataclass(frozen=True)
class GroupParams:
    """Index ``n`` of H_n; ``N = 2n + 2`` is the homogeneous dimension."""

    n: int = 1

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def N(self) -> int:
        return 2 * self.n + 2

    @property
    def alpha(self) -> float:
        """Laguerre type used by the spherical functions."""
        return float(self.n - 1)

    def to_dict(self) -> dict:
        return {"n": self.n, "N": self.N}


def plancherel_constant(n: int) -> float:
    return 2.0 ** (n - 1) / math.pi ** (n + 1)


def haar_constant(n: int) -> float:
    """Area of the unit sphere in C^n = R^{2n}, i.e. 2 pi^n / (n-1)!."""
    return 2.0 * math.pi**n / math.factorial(n - 1)


def mode_multiplicity(m, n: int):
    """C(m+n-1, m): the weight of mode ``m`` in the Plancherel measure."""
    return comb(np.asarray(m) + n - 1, n - 1)


@dataclass(frozen=True)
class SpectrumPoint:
    m: int
    lam: float

    def __post_init__(self) -> None:
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"mode index must be a nonnegative integer, got {self.m!r}")
        if not np.isfinite(self.lam) or self.lam == 0.0:
            raise ValueError("lam must be finite and nonzero")


# ---------------------------------------------------------------------------
# Laguerre polynomials


def laguerre(m: int, alpha: float, tau):
    """Generalized Laguerre polynomial L_m^(alpha)(tau) by the upward recurrence."""
    tau = np.asarray(tau, dtype=float)
    prev = np.ones_like(tau)
    if m == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - tau
    for k in range(2, m + 1):
        prev, cur = cur, ((2 * k - 1 + alpha - tau) * cur - (k - 1 + alpha) * prev) / k
    return cur if cur.ndim else float(cur)


_RESCALE = 1e100
_LOG_RESCALE = math.log(1e100)


@njit(cache=True)
def _laguerre_function_table(m_max, alpha, y):
    # rows: modes 0..m_max, columns: points; values L_m(y) exp(-y/2)
    out = np.zeros((m_max + 1, y.shape[0]))
    for i in range(y.shape[0]):
        yy = y[i]
        log_scale = -0.5 * yy
        l0 = 1.0
        out[0, i] = math.exp(log_scale)
        if m_max == 0:
            continue
        l1 = 1.0 + alpha - yy
        out[1, i] = l1 * math.exp(log_scale)
        for k in range(2, m_max + 1):
            l2 = ((2 * k - 1 + alpha - yy) * l1 - (k - 1 + alpha) * l0) / k
            l0 = l1
            l1 = l2
            if abs(l1) > 1e100:
                l0 *= 1e-100
                l1 *= 1e-100
                log_scale += 230.25850929940458
            out[k, i] = l1 * math.exp(log_scale)
    return out


@njit(cache=True)
def _laguerre_series(coef_re, coef_im, offsets, lam_abs, r, alpha):
    """For node l: sum_k coef[offsets[l] + k] * L_k(2 lam_l r^2) exp(-lam_l r^2)."""
    n_lam = lam_abs.shape[0]
    n_r = r.shape[0]
    out = np.zeros((n_lam, n_r), np.complex128)
    for l in range(n_lam):
        start = offsets[l]
        count = offsets[l + 1] - start
        if count <= 0:
            continue
        for i in range(n_r):
            yy = 2.0 * lam_abs[l] * r[i] * r[i]
            log_scale = -0.5 * yy
            l0 = 1.0
            acc_re = coef_re[start]
            acc_im = coef_im[start]
            if count > 1:
                l1 = 1.0 + alpha - yy
                acc_re += coef_re[start + 1] * l1
                acc_im += coef_im[start + 1] * l1
                for k in range(2, count):
                    l2 = ((2 * k - 1 + alpha - yy) * l1 - (k - 1 + alpha) * l0) / k
                    l0 = l1
                    l1 = l2
                    acc_re += coef_re[start + k] * l2
                    acc_im += coef_im[start + k] * l2
                    if abs(l1) > 1e100:
                        l0 *= 1e-100
                        l1 *= 1e-100
                        acc_re *= 1e-100
                        acc_im *= 1e-100
                        log_scale += 230.25850929940458
            scale = math.exp(log_scale)
            out[l, i] = complex(acc_re * scale, acc_im * scale)
    return out


def laguerre_function(m: int, alpha: float, tau):
    """L_m^(alpha)(tau) * exp(-tau/2), safe against overflow for large m and tau."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    return _laguerre_function_table(int(m), float(alpha), tau)[m]


def laguerre_function_table(m_max: int, alpha: float, tau) -> np.ndarray:
    tau = np.ascontiguousarray(np.ravel(np.asarray(tau, dtype=float)))
    return _laguerre_function_table(int(m_max), float(alpha), tau)


def spherical_function(pt: SpectrumPoint, r, s, params: GroupParams):
    """omega_{m,lam}(r, s) = e^{i lam s} e^{-|lam| r^2} L_m(2|lam| r^2) / C(m+n-1, m)."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    y = 2.0 * abs(pt.lam) * r**2
    radial = laguerre_function(pt.m, params.alpha, y).reshape(y.shape) / mode_multiplicity(pt.m, params.n)
    out = np.exp(1j * pt.lam * s) * radial
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# symbols


def _interval_intersection(a, b):
    if a is None or b is None:
        return None
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo < hi else None


@dataclass(frozen=True)
class SpectralSymbol:
    """A function of ``(m, lam)`` with known support.

    ``mode_limit(|lam|)`` gives the largest mode that can be nonzero at that
    frequency (``-1`` when none), ``lam_max`` bounds ``|lam|`` on the support and
    ``lambda_support(m)`` is the ``|lam|``-interval carrying mode ``m``.  When
    ``positive_only`` is set the symbol vanishes for ``lam < 0``.  ``m_max`` is
    ``None`` when modes accumulate as ``lam -> 0`` (Kohn-type symbols); the
    inverse transform never needs a hard cut because ``mode_limit`` is finite on
    every grid node.
    """

    params: GroupParams
    value_fn: ValueFn
    mode_limit: ModeLimitFn
    lam_max: float
    support_fn: Callable[[int], tuple[float, float] | None]
    m_max: int | None = None
    positive_only: bool = False
    label: str = "symbol"
    meta: dict = field(default_factory=dict, compare=False)

    def value(self, m, lam) -> np.ndarray:
        m = np.asarray(m)
        lam = np.asarray(lam, dtype=float)
        m, lam = np.broadcast_arrays(m, lam)
        out = np.asarray(self.value_fn(m, lam), dtype=complex)
        out = np.broadcast_to(out, m.shape).copy()
        mask = lam != 0.0
        if self.positive_only:
            mask &= lam > 0
        if self.m_max is not None:
            mask &= m <= self.m_max
        out[~mask] = 0.0
        return out

    def __call__(self, pt: SpectrumPoint) -> complex:
        return complex(self.value(pt.m, pt.lam))

    def lambda_support(self, m: int) -> tuple[float, float] | None:
        if self.m_max is not None and m > self.m_max:
            return None
        return self.support_fn(m)

    @property
    def bounded(self) -> bool:
        return bool(np.isfinite(self.lam_max))

    # algebra --------------------------------------------------------------

    def scale(self, c: complex) -> "SpectralSymbol":
        fn = self.value_fn
        return SpectralSymbol(self.params, lambda m, lam: c * fn(m, lam), self.mode_limit, self.lam_max,
                              self.support_fn, self.m_max, self.positive_only, f"{c}*{self.label}", dict(self.meta))

    def multiply(self, other: "SpectralSymbol") -> "SpectralSymbol":
        """Pointwise product: the symbol of the convolution of the two functions."""
        f, g = self.value_fn, other.value_fn
        lim_a, lim_b = self.mode_limit, other.mode_limit
        supp_a, supp_b = self.lambda_support, other.lambda_support
        m_max = _min_optional(self.m_max, other.m_max)
        return SpectralSymbol(
            self.params,
            lambda m, lam: f(m, lam) * g(m, lam),
            lambda a: np.minimum(lim_a(a), lim_b(a)),
            min(self.lam_max, other.lam_max),
            lambda m: _interval_intersection(supp_a(m), supp_b(m)),
            m_max,
            self.positive_only or other.positive_only,
            f"({self.label})*({other.label})",
        )

    def add(self, other: "SpectralSymbol", c: complex = 1.0) -> "SpectralSymbol":
        """``self + c * other``; supports are merged into their hull."""
        f, g = self.value_fn, other.value_fn
        lim_a, lim_b = self.mode_limit, other.mode_limit
        supp_a, supp_b = self.lambda_support, other.lambda_support
        pos_a, pos_b = self.positive_only, other.positive_only

        def value(m, lam):
            va = f(m, lam) if not pos_a else np.where(lam > 0, f(m, lam), 0.0)
            vb = g(m, lam) if not pos_b else np.where(lam > 0, g(m, lam), 0.0)
            return va + c * vb

        def support(m):
            sa, sb = supp_a(m), supp_b(m)
            if sa is None:
                return sb
            if sb is None:
                return sa
            return (min(sa[0], sb[0]), max(sa[1], sb[1]))

        m_max = None if self.m_max is None or other.m_max is None else max(self.m_max, other.m_max)
        return SpectralSymbol(self.params, value, lambda a: np.maximum(lim_a(a), lim_b(a)),
                              max(self.lam_max, other.lam_max), support, m_max, pos_a and pos_b,
                              f"{self.label}+{c}*{other.label}")

    def apply(self, h: Callable[[np.ndarray], np.ndarray], label: str = "h") -> "SpectralSymbol":
        """Multiply by ``h(xi)`` with ``xi = 4(2m+n)|lam| + lam^2``, the full Laplacian."""
        f, n = self.value_fn, self.params.n

        def value(m, lam):
            xi = 4.0 * (2 * m + n) * np.abs(lam) + lam * lam
            return f(m, lam) * h(xi)

        return SpectralSymbol(self.params, value, self.mode_limit, self.lam_max, self.lambda_support,
                              self.m_max, self.positive_only, f"{label}(L){self.label}", dict(self.meta))

    def apply_kohn(self, h: Callable[[np.ndarray], np.ndarray], label: str = "h") -> "SpectralSymbol":
        """Multiply by ``h(4(2m+n)|lam|)``, a function of the sub-Laplacian."""
        f, n = self.value_fn, self.params.n

        def value(m, lam):
            return f(m, lam) * h(4.0 * (2 * m + n) * np.abs(lam))

        return SpectralSymbol(self.params, value, self.mode_limit, self.lam_max, self.lambda_support,
                              self.m_max, self.positive_only, f"{label}(D){self.label}", dict(self.meta))

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, params: GroupParams) -> "SpectralSymbol":
        return cls(params, lambda m, lam: np.zeros(np.shape(lam)), lambda a: np.full(np.shape(a), -1),
                   0.0, lambda m: None, 0, False, "0")

    @classmethod
    def tabulated(cls, params: GroupParams, lam_grid: np.ndarray, table: np.ndarray,
                  label: str = "table") -> "SpectralSymbol":
        """Symbol known on modes ``0..table.shape[0]-1`` and a sorted ``lam`` grid.

        Values in between grid nodes are interpolated linearly in ``lam``.
        """
        lam_grid = np.asarray(lam_grid, dtype=float)
        order = np.argsort(lam_grid)
        lam_grid = lam_grid[order]
        table = np.asarray(table, dtype=complex)[:, order]
        m_top = table.shape[0] - 1
        lam_lo, lam_hi = float(lam_grid[0]), float(lam_grid[-1])
        abs_hi = float(np.max(np.abs(lam_grid)))
        abs_lo = float(np.min(np.abs(lam_grid)))

        def value(m, lam):
            out = np.zeros(np.shape(lam), dtype=complex)
            for k in np.unique(m):
                if k > m_top:
                    continue
                sel = m == k
                x = lam[sel]
                inside = (x >= lam_lo) & (x <= lam_hi)
                re = np.interp(x, lam_grid, table[k].real)
                im = np.interp(x, lam_grid, table[k].imag)
                out[sel] = np.where(inside, re + 1j * im, 0.0)
            return out

        def limit(a):
            a = np.asarray(a)
            return np.where((a >= abs_lo) & (a <= abs_hi), m_top, -1)

        sym = cls(params, value, limit, abs_hi, lambda m: (abs_lo, abs_hi) if m <= m_top else None,
                  m_top, bool(lam_lo > 0), label, {"lam_grid": lam_grid, "table": table})
        return sym

    def to_json(self, lam_grid: Sequence[float], m_values: Sequence[int] | None = None) -> str:
        """Tabulate on ``m_values x lam_grid`` and return the JSON envelope."""
        lam_grid = np.asarray(lam_grid, dtype=float)
        if m_values is None:
            top = self.m_max if self.m_max is not None else int(np.max(self.mode_limit(np.abs(lam_grid))))
            m_values = range(max(top, 0) + 1)
        m_values = np.asarray(list(m_values), dtype=int)
        table = self.value(m_values[:, None], lam_grid[None, :])
        return json.dumps({
            "kind": "SpectralSymbol",
            "label": self.label,
            "params": self.params.to_dict(),
            "grids": {"m": m_values.tolist(), "lam": lam_grid.tolist()},
            "shape": [len(m_values), len(lam_grid)],
            "data": _pairs(table),
        })

    @classmethod
    def from_json(cls, text: str) -> "SpectralSymbol":
        doc = json.loads(text)
        shape = doc["shape"]
        table = _unpairs(doc["data"]).reshape(shape)
        m_values = doc["grids"]["m"]
        if list(m_values) != list(range(len(m_values))):
            raise ValueError("only contiguous mode ranges starting at 0 can be reloaded")
        return cls.tabulated(GroupParams(doc["params"]["n"]), np.asarray(doc["grids"]["lam"]), table,
                             doc.get("label", "table"))


def _min_optional(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _pairs(values: np.ndarray) -> list:
    flat = np.ravel(values)
    return np.stack([flat.real, flat.imag], axis=1).tolist()


def _unpairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
    return arr[:, 0] + 1j * arr[:, 1]


# ---------------------------------------------------------------------------
# quadrature grids and space-side functions


def radial_grid(r_max: float, panels: int, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0, r_max]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, r_max, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def central_grid(period: float, points: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform grid on [-period/2, period/2) with trapezoid (periodic) weights."""
    h = period / points
    s = -0.5 * period + h * np.arange(points)
    return s, np.full(points, h)


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    if x.size == 1:
        return np.ones(1)
    d = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


@dataclass
class RadialFunction:
    """Samples ``samples[i, k] = f(r_grid[i], s_grid[k])`` with optional quadrature weights."""

    params: GroupParams
    r_grid: np.ndarray
    s_grid: np.ndarray
    samples: np.ndarray
    r_weights: np.ndarray | None = None
    s_weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.r_grid = np.asarray(self.r_grid, dtype=float)
        self.s_grid = np.asarray(self.s_grid, dtype=float)
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.r_grid.ndim != 1 or self.s_grid.ndim != 1:
            raise ValueError("grids must be one-dimensional")
        if np.any(np.diff(self.r_grid) <= 0) or np.any(np.diff(self.s_grid) <= 0):
            raise ValueError("grids must be strictly increasing")
        if self.r_grid.size and self.r_grid[0] < 0:
            raise ValueError("r_grid must be nonnegative")
        if self.samples.shape != (self.r_grid.size, self.s_grid.size):
            raise ValueError(f"samples have shape {self.samples.shape}, expected "
                             f"{(self.r_grid.size, self.s_grid.size)}")
        if self.r_weights is None:
            self.r_weights = _trapezoid_weights(self.r_grid)
        if self.s_weights is None:
            self.s_weights = _trapezoid_weights(self.s_grid)
        self.r_weights = np.asarray(self.r_weights, dtype=float)
        self.s_weights = np.asarray(self.s_weights, dtype=float)

    def _cell_weights(self) -> np.ndarray:
        n = self.params.n
        radial = haar_constant(n) * self.r_weights * self.r_grid ** (2 * n - 1)
        return radial[:, None] * self.s_weights[None, :]

    def norm(self, p: float = 2.0) -> float:
        """L^p norm with respect to Haar measure; ``p = inf`` is the grid maximum."""
        mag = np.abs(self.samples)
        if np.isinf(p):
            return float(mag.max(initial=0.0))
        return float(np.sum(self._cell_weights() * mag**p) ** (1.0 / p))

    def integral(self) -> complex:
        return complex(np.sum(self._cell_weights() * self.samples))

    def with_samples(self, samples: np.ndarray) -> "RadialFunction":
        return RadialFunction(self.params, self.r_grid, self.s_grid, samples, self.r_weights,
                              self.s_weights, dict(self.meta))

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        return self.with_samples(self.samples + other.samples)

    def __mul__(self, c: complex) -> "RadialFunction":
        return self.with_samples(c * self.samples)

    __rmul__ = __mul__

    def to_json(self) -> str:
        return json.dumps({
            "kind": "RadialFunction",
            "params": self.params.to_dict(),
            "grids": {"r": self.r_grid.tolist(), "s": self.s_grid.tolist()},
            "weights": {"r": self.r_weights.tolist(), "s": self.s_weights.tolist()},
            "shape": list(self.samples.shape),
            "data": _pairs(self.samples),
            "meta": self.meta,
        })

    @classmethod
    def from_json(cls, text: str) -> "RadialFunction":
        doc = json.loads(text)
        shape = tuple(doc["shape"])
        weights = doc.get("weights", {})
        return cls(GroupParams(doc["params"]["n"]), np.asarray(doc["grids"]["r"]),
                   np.asarray(doc["grids"]["s"]), _unpairs(doc["data"]).reshape(shape),
                   weights.get("r"), weights.get("s"), doc.get("meta", {}))

    def write_csv(self, path, *, r_index: int | None = None, s_index: int | None = None) -> None:
        """Write one slice: fixed ``r`` (a row in ``s``) or fixed ``s`` (a column in ``r``)."""
        if (r_index is None) == (s_index is None):
            raise ValueError("give exactly one of r_index, s_index")
        if r_index is not None:
            coord, vals, name = self.s_grid, self.samples[r_index], "s"
        else:
            coord, vals, name = self.r_grid, self.samples[:, s_index], "r"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([name, "re", "im"])
            for x, v in zip(coord, vals):
                w.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])


# ---------------------------------------------------------------------------
# inversion


def _require_bounded(sym: SpectralSymbol) -> None:
    if not sym.bounded:
        raise UnboundedSupport(f"symbol {sym.label!r} has no finite lambda support")


def lambda_nodes(sym: SpectralSymbol, dlam: float) -> np.ndarray:
    """Midpoint nodes (l + 1/2) dlam covering (0, lam_max]; lam = 0 is never a node."""
    _require_bounded(sym)
    count = int(math.ceil(sym.lam_max / dlam)) if sym.lam_max > 0 else 0
    return (np.arange(count) + 0.5) * dlam


def mode_profiles(sym: SpectralSymbol, lam: np.ndarray, r: np.ndarray, sign: int = 1,
                  *, chunk_terms: int = 4_000_000) -> np.ndarray:
    """F[l, i] = c_n |lam_l|^n sum_m fhat(m, sign*lam_l) L_m(2 lam_l r_i^2) e^{-lam_l r_i^2}.

    ``lam`` holds positive magnitudes.  Integrating ``e^{-i sign lam s} F`` over
    ``lam > 0`` gives the ``sign`` half of the inversion integral.  Nodes are
    processed in blocks of at most ``chunk_terms`` (node, mode) pairs.
    """
    params = sym.params
    lam = np.ascontiguousarray(lam, dtype=float)
    r = np.ascontiguousarray(r, dtype=float)
    out = np.zeros((lam.size, r.size), dtype=complex)
    if lam.size == 0 or (sign < 0 and sym.positive_only):
        return out
    limits = np.asarray(sym.mode_limit(lam)).astype(np.int64)
    if sym.m_max is not None:
        limits = np.minimum(limits, sym.m_max)
    counts = np.maximum(limits + 1, 0)
    cumulative = np.cumsum(counts)
    start = 0
    while start < lam.size:
        base = cumulative[start - 1] if start else 0
        stop = int(np.searchsorted(cumulative, base + chunk_terms, side="right"))
        stop = max(stop, start + 1)
        block = slice(start, stop)
        c = counts[block]
        offsets = np.zeros(c.size + 1, dtype=np.int64)
        np.cumsum(c, out=offsets[1:])
        total = int(offsets[-1])
        if total:
            node = np.repeat(np.arange(c.size), c)
            m_flat = np.arange(total) - offsets[node]
            coef = sym.value(m_flat, sign * lam[block][node])
            out[block] = _laguerre_series(np.ascontiguousarray(coef.real), np.ascontiguousarray(coef.imag),
                                          offsets, lam[block], r, params.alpha)
        start = stop
    return plancherel_constant(params.n) * (lam**params.n)[:, None] * out


def default_dlam(sym: SpectralSymbol, s_extent: float = 0.0, nodes: int = 2048) -> float:
    """Frequency step: ``nodes`` midpoints across the support, fine enough to resolve ``s_extent``."""
    _require_bounded(sym)
    step = sym.lam_max / nodes if sym.lam_max > 0 else 1.0
    if s_extent > 0:
        step = min(step, 2 * math.pi / (3.0 * s_extent))
    return step


def synthesize(lam: np.ndarray, f_plus: np.ndarray, f_minus: np.ndarray | None, s, dlam: float) -> np.ndarray:
    """Midpoint-rule inverse Fourier integral in ``lam`` evaluated at arbitrary ``s``; rows follow F."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    phase = np.exp(-1j * np.outer(s, lam))
    out = phase @ f_plus
    if f_minus is not None:
        out += phase.conj() @ f_minus
    return dlam * out.T


def _is_uniform(s: np.ndarray) -> bool:
    if s.size < 3:
        return False
    d = np.diff(s)
    return bool(np.max(np.abs(d - d[0])) <= 1e-9 * abs(d[0]))


def inverse_transform(sym: SpectralSymbol, r_grid, s_grid, *, dlam: float | None = None,
                      r_weights=None, s_weights=None) -> RadialFunction:
    """Space-side samples of the function whose symbol is ``sym``.

    A uniform ``s_grid`` with Nyquist spacing is synthesized by FFT; the period
    of the transform is then a multiple of the grid spacing at least as large as
    ``2*pi/dlam``.  Other grids use a direct sum.
    """
    _require_bounded(sym)
    params = sym.params
    r_grid = np.asarray(r_grid, dtype=float)
    s_grid = np.asarray(s_grid, dtype=float)
    if sym.lam_max <= 0:
        return RadialFunction(params, r_grid, s_grid, np.zeros((r_grid.size, s_grid.size)),
                              r_weights, s_weights)
    span = float(np.max(np.abs(s_grid))) if s_grid.size else 0.0
    if dlam is None:
        dlam = default_dlam(sym, 2.0 * span)

    uniform = _is_uniform(s_grid) and s_grid.size > 64
    if uniform:
        h = s_grid[1] - s_grid[0]
        if h * sym.lam_max >= math.pi:
            uniform = False
    if not uniform:
        lam = lambda_nodes(sym, dlam)
        fp = mode_profiles(sym, lam, r_grid, +1)
        fm = None if sym.positive_only else mode_profiles(sym, lam, r_grid, -1)
        samples = synthesize(lam, fp, fm, s_grid, dlam)
        return RadialFunction(params, r_grid, s_grid, samples, r_weights, s_weights)

    size = sfft.next_fast_len(max(int(math.ceil(2 * math.pi / (h * dlam))), s_grid.size))
    dlam = 2 * math.pi / (size * h)
    lam = lambda_nodes(sym, dlam)
    if 2 * lam.size > size:
        raise GridTooCoarse("s spacing does not resolve the frequency support")
    k = np.arange(s_grid.size)
    s0 = s_grid[0]
    twist = np.exp(-1j * np.pi * k / size)

    fp = mode_profiles(sym, lam, r_grid, +1) * np.exp(-1j * lam * s0)[:, None]
    spec = sfft.fft(fp, n=size, axis=0)[: s_grid.size]
    samples = twist[:, None] * spec
    if not sym.positive_only:
        fm = mode_profiles(sym, lam, r_grid, -1) * np.exp(1j * lam * s0)[:, None]
        spec = sfft.ifft(fm, n=size, axis=0)[: s_grid.size] * size
        samples = samples + twist.conj()[:, None] * spec
    return RadialFunction(params, r_grid, s_grid, dlam * samples.T, r_weights, s_weights)


def evaluate(sym: SpectralSymbol, r, s, *, dlam: float | None = None) -> np.ndarray:
    """Pointwise inverse transform at matching arrays ``r`` and ``s`` (broadcast)."""
    r, s = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(s, dtype=float))
    flat_r, flat_s = r.ravel(), s.ravel()
    if dlam is None:
        dlam = default_dlam(sym, 2.0 * float(np.max(np.abs(flat_s), initial=0.0)))
    lam = lambda_nodes(sym, dlam)
    ur, inv = np.unique(flat_r, return_inverse=True)
    fp = mode_profiles(sym, lam, ur, +1)[:, inv]
    phase = np.exp(-1j * lam[:, None] * flat_s[None, :])
    out = np.sum(phase * fp, axis=0)
    if not sym.positive_only:
        fm = mode_profiles(sym, lam, ur, -1)[:, inv]
        out = out + np.sum(phase.conj() * fm, axis=0)
    return (dlam * out).reshape(r.shape)


# ---------------------------------------------------------------------------
# forward transform and Plancherel


def forward_transform(f: RadialFunction, m_max: int, lam_grid, *, tol: float = 1e-5,
                      edge_fraction: float = 0.05) -> SpectralSymbol:
    """Tensor quadrature of f * omega_{m,lam} against Haar measure.

    The quadrature error is dominated by truncation of the grid, so it is
    estimated by the share of the result carried by the outer ``edge_fraction``
    of the grid in each direction.  ``GridTooCoarse`` is raised when that share
    exceeds ``tol`` relative to the largest computed coefficient.
    """
    params = f.params
    lam_grid = np.asarray(lam_grid, dtype=float)
    if np.any(lam_grid == 0):
        raise ValueError("lam = 0 is not part of the spectrum")
    table = _forward_table(f, f.samples, m_max, lam_grid)

    r_cut = f.r_grid[-1] * (1 - edge_fraction)
    s_lo = f.s_grid[0] + edge_fraction * (f.s_grid[-1] - f.s_grid[0])
    s_hi = f.s_grid[-1] - edge_fraction * (f.s_grid[-1] - f.s_grid[0])
    edge = (f.r_grid[:, None] > r_cut) | (f.s_grid[None, :] < s_lo) | (f.s_grid[None, :] > s_hi)
    edge_table = _forward_table(f, np.where(edge, f.samples, 0.0), m_max, lam_grid)
    scale = np.max(np.abs(table), initial=0.0)
    if scale > 0 and np.max(np.abs(edge_table)) > tol * scale:
        raise GridTooCoarse(f"grid edge carries {np.max(np.abs(edge_table)) / scale:.2e} of the transform")
    return SpectralSymbol.tabulated(params, lam_grid, table, label="forward")


def _forward_table(f: RadialFunction, samples: np.ndarray, m_max: int, lam_grid: np.ndarray) -> np.ndarray:
    n = f.params.n
    phase = np.exp(1j * np.outer(lam_grid, f.s_grid)) * f.s_weights[None, :]
    slices = phase @ samples.T  # (lam, r)
    radial_w = haar_constant(n) * f.r_weights * f.r_grid ** (2 * n - 1)
    y = 2.0 * np.abs(lam_grid)[:, None] * f.r_grid[None, :] ** 2
    lag = laguerre_function_table(m_max, f.params.alpha, y).reshape(m_max + 1, *y.shape)
    table = np.einsum("mlr,lr->ml", lag, slices * radial_w[None, :])
    return table / mode_multiplicity(np.arange(m_max + 1), n)[:, None]


def mode_energy(sym: SpectralSymbol, lam_abs: float) -> float:
    """sum_m C(m+n-1, m) (|fhat(m, lam)|^2 + |fhat(m, -lam)|^2) at one |lam|."""
    top = int(np.asarray(sym.mode_limit(np.array([lam_abs])))[0])
    if sym.m_max is not None:
        top = min(top, sym.m_max)
    if top < 0:
        return 0.0
    m = np.arange(top + 1)
    mult = mode_multiplicity(m, sym.params.n)
    total = np.sum(mult * np.abs(sym.value(m, np.full(m.size, lam_abs))) ** 2)
    if not sym.positive_only:
        total += np.sum(mult * np.abs(sym.value(m, np.full(m.size, -lam_abs))) ** 2)
    return float(total)


def plancherel_norm(sym: SpectralSymbol, *, rel_tol: float = 1e-11) -> float:
    """L^2 norm over the spectrum, by adaptive Gauss-Kronrod integration in |lam|."""
    _require_bounded(sym)
    if sym.lam_max <= 0:
        return 0.0
    n = sym.params.n
    grid = sym.meta.get("lam_grid")
    if grid is not None:
        nodes = np.unique(np.abs(grid))
        vals = np.array([mode_energy(sym, x) * x**n for x in nodes])
        return math.sqrt(max(plancherel_constant(n) * integrate.trapezoid(vals, nodes), 0.0))
    total, _ = integrate.quad(lambda x: mode_energy(sym, x) * x**n, 0.0, sym.lam_max,
                              epsabs=0.0, epsrel=rel_tol, limit=400)
    return math.sqrt(max(plancherel_constant(n) * total, 0.0))


def plancherel_inner(a: SpectralSymbol, b: SpectralSymbol) -> complex:
    """<a, b> over the spectrum, using the same quadrature as ``plancherel_norm``."""
    prod = a.multiply(SpectralSymbol(b.params, lambda m, lam: np.conj(b.value_fn(m, lam)), b.mode_limit,
                                     b.lam_max, b.lambda_support, b.m_max, b.positive_only))
    n = a.params.n

    def density(x, part):
        top = int(np.asarray(prod.mode_limit(np.array([x])))[0])
        if prod.m_max is not None:
            top = min(top, prod.m_max)
        if top < 0:
            return 0.0
        m = np.arange(top + 1)
        mult = mode_multiplicity(m, n)
        v = np.sum(mult * prod.value(m, np.full(m.size, x)))
        if not prod.positive_only:
            v += np.sum(mult * prod.value(m, np.full(m.size, -x)))
        return float(getattr(v, part)) * x**n

    if prod.lam_max <= 0:
        return 0j
    re, _ = integrate.quad(density, 0.0, prod.lam_max, args=("real",), epsabs=0.0, epsrel=1e-11, limit=400)
    im, _ = integrate.quad(density, 0.0, prod.lam_max, args=("imag",), epsabs=0.0, epsrel=1e-11, limit=400)
    return plancherel_constant(n) * complex(re, im)
