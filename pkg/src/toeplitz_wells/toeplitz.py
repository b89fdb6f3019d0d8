"""Toeplitz compressions ``T_{f,p} = P f P`` onto the low cluster and their diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .torus import LowSpectrum
from .trigpoly import TrigPolynomial, periodic_distance

Symbol = Union[TrigPolynomial, Callable, np.ndarray, float, int]


def _grid_coords(n: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.arange(n) / n
    return np.meshgrid(x, x, indexing="ij")


def sample_symbol(f: Symbol, n: int) -> np.ndarray:
    """Values of ``f`` on the ``n x n`` grid, indexed ``[i, k]`` at ``(i/n, k/n)``."""
    if isinstance(f, TrigPolynomial):
        return f.on_grid(n)
    if isinstance(f, (int, float, complex, np.number)):
        return np.full((n, n), f)
    if callable(f):
        X1, X2 = _grid_coords(n)
        return np.broadcast_to(np.asarray(f(X1, X2)), (n, n))
    arr = np.asarray(f)
    if arr.shape != (n, n):
        raise ValueError(f"symbol samples have shape {arr.shape}, basis grid is {(n, n)}")
    return arr


@dataclass
class ToeplitzMatrix:
    p: int
    symbol: np.ndarray
    entries: np.ndarray
    basis: LowSpectrum = dc_field(repr=False)
    description: str = ""

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def hermitian_defect(self) -> float:
        return float(np.abs(self.entries - self.entries.conj().T).max())

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.entries + self.entries.conj().T))

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))


def toeplitz_matrix(f: Symbol, basis: LowSpectrum) -> ToeplitzMatrix:
    """``M_ij = <u_i, f u_j>`` by grid quadrature over the cluster basis."""
    V = basis.cluster_basis()
    n = basis.grid_n
    if V.shape[0] != n * n:
        raise ValueError(f"basis vectors have length {V.shape[0]}, expected {n * n}")
    vals = sample_symbol(f, n)
    M = (V.conj().T @ (vals.reshape(-1)[:, None] * V)) * basis.cell_area
    return ToeplitzMatrix(basis.p, vals, M, basis, repr(f) if isinstance(f, (int, float)) else type(f).__name__)


def poisson_bracket_on_grid(f: TrigPolynomial, g: TrigPolynomial, b: TrigPolynomial, n: int) -> np.ndarray:
    """``{f, g} = (d1 f d2 g - d2 f d1 g) / b`` sampled on the grid."""
    f1, f2 = f.derivative(1, 0).on_grid(n), f.derivative(0, 1).on_grid(n)
    g1, g2 = g.derivative(1, 0).on_grid(n), g.derivative(0, 1).on_grid(n)
    return (f1 * g2 - f2 * g1) / b.on_grid(n)


@dataclass(frozen=True)
class ProductDefect:
    p: int
    norm_fg: float
    norm_comm: float
    chosen_sign: int


def product_defect(f: TrigPolynomial, g: TrigPolynomial, basis: LowSpectrum, b: TrigPolynomial) -> ProductDefect:
    """Operator-norm defects of the product and commutator expansions.

    ``norm_fg = ||T_f T_g - T_{fg}||`` and
    ``norm_comm = min_s ||p [T_f, T_g] - s i T_{{f,g}}||`` over ``s = +1, -1``;
    the minimising sign is returned as ``chosen_sign``.
    """
    n = basis.grid_n
    Tf = toeplitz_matrix(f.on_grid(n), basis).entries
    Tg = toeplitz_matrix(g.on_grid(n), basis).entries
    Tfg = toeplitz_matrix(f.on_grid(n) * g.on_grid(n), basis).entries
    Tpb = toeplitz_matrix(poisson_bracket_on_grid(f, g, b, n), basis).entries
    norm_fg = float(np.linalg.norm(Tf @ Tg - Tfg, 2))
    comm = basis.p * (Tf @ Tg - Tg @ Tf)
    cands = {s: float(np.linalg.norm(comm - s * 1j * Tpb, 2)) for s in (1, -1)}
    sign = min(cands, key=lambda s: (cands[s], -s))
    return ProductDefect(basis.p, norm_fg, cands[sign], sign)


@dataclass
class ToeplitzEigen:
    values: np.ndarray
    coefficients: np.ndarray
    sections: np.ndarray
    """Grid sections (columns), unit norm under grid quadrature."""
    matrix: ToeplitzMatrix = dc_field(repr=False)

    def section(self, m: int) -> np.ndarray:
        n = self.matrix.basis.grid_n
        return self.sections[:, m].reshape(n, n)


def toeplitz_low_spectrum(h: Symbol, basis: LowSpectrum, count: int) -> ToeplitzEigen:
    """Lowest ``count`` eigenpairs of ``T_{h,p}`` with sections rebuilt on the grid."""
    T = toeplitz_matrix(h, basis)
    vals, vecs = np.linalg.eigh(0.5 * (T.entries + T.entries.conj().T))
    vals, vecs = vals[:count], vecs[:, :count]
    return ToeplitzEigen(vals, vecs, basis.cluster_basis() @ vecs, T)


# ---------------------------------------------------------------------------
# localisation


def distance_to_points(n: int, points: Sequence[Sequence[float]]) -> np.ndarray:
    """Periodic distance from every grid point to the nearest of ``points``."""
    X1, X2 = _grid_coords(n)
    X = np.stack([X1, X2], axis=-1)
    d = np.full((n, n), np.inf)
    for q in points:
        d = np.minimum(d, periodic_distance(X, np.asarray(q, dtype=float)))
    return d


def distance_to_sublevel(h: Symbol, level: float, n: int, reference: int = 512) -> np.ndarray:
    """Periodic distance from the ``n x n`` grid to ``{h <= level}`` resolved on a reference grid."""
    ref = sample_symbol(h, reference).real
    mask = ref <= level
    if not mask.any():
        raise ValueError(f"sublevel set {{h <= {level}}} is empty on the reference grid")
    pts = np.argwhere(mask) / reference
    tree = cKDTree(pts, boxsize=1.0)
    X1, X2 = _grid_coords(n)
    # boxsize requires coordinates in [0, 1)
    d, _ = tree.query(np.stack([X1.ravel(), X2.ravel()], axis=1) % 1.0)
    return d.reshape(n, n)


def distance_to_well_set(h: Symbol, level: float, n: int) -> np.ndarray:
    """Distance to ``{h <= level}``; the zero set of a trig polynomial is taken from its minima."""
    if isinstance(h, TrigPolynomial) and level <= 0:
        return distance_to_points(n, h.global_minima())
    return distance_to_sublevel(h, level, n)


@dataclass
class LocalizationReport:
    p: int
    index: int
    mass_outside: dict[float, float]
    moments: dict[int, float]
    exp_weight: dict[float, float]
    degenerate_weight: dict[float, float] | None = None

    def rows(self) -> list[dict]:
        out = []
        for delta, mass in self.mass_outside.items():
            out.append({"p": self.p, "delta": delta, "mass_outside": mass})
        for k, mom in self.moments.items():
            out.append({"p": self.p, "k": k, "moment": mom})
        for alpha, val in self.exp_weight.items():
            out.append({"p": self.p, "alpha": alpha, "exp_integral": val})
        return out


def localization_report(
    u: np.ndarray,
    h: Symbol,
    p: int,
    deltas: Sequence[float] = (0.2,),
    alphas: Sequence[float] = (),
    h0: float = 0.0,
    moment_orders: Sequence[int] = (1, 2, 3),
    index: int = 0,
    distance: np.ndarray | None = None,
) -> LocalizationReport:
    """Mass, moments and exponentially weighted integrals of one section.

    ``u`` is a grid section (``n x n``) of unit norm.  Distances are to the
    set ``{h <= h0}``; ``distance`` may be passed to reuse a precomputed map.
    """
    u = np.asarray(u)
    n = u.shape[0]
    if u.shape != (n, n):
        raise ValueError("section must be an n x n grid array")
    dens = np.abs(u) ** 2 / n**2
    if distance is None:
        distance = distance_to_well_set(h, h0, n)
    hv = sample_symbol(h, n).real
    mass = {float(dl): float(dens[distance > dl].sum()) for dl in deltas}
    moments = {int(k): float(np.sum(hv**k * dens)) for k in moment_orders}
    weights = {float(a): float(np.sum(np.exp(2 * a * math.sqrt(p) * distance) * dens)) for a in alphas}
    return LocalizationReport(p, index, mass, moments, weights)


@dataclass(frozen=True)
class DegenerateReport:
    p: int
    k: int
    eigenvalue: float | None
    applicable: bool | None
    integrals: dict[float, float]


def degenerate_well_report(
    u: np.ndarray,
    h: Symbol,
    p: int,
    k: int,
    c_list: Sequence[float],
    eigenvalue: float | None = None,
    C0: float | None = None,
    distance: np.ndarray | None = None,
) -> DegenerateReport:
    """Weighted integrals ``int exp(2 c p^{1/(2k+1)} d(x, U0)) |u|^2`` for a well of order ``2k``.

    When both ``eigenvalue`` and ``C0`` are supplied the precondition
    ``eigenvalue < C0 p^{-2k/(2k+1)}`` is evaluated; a violated precondition
    marks the report as not applicable.
    """
    u = np.asarray(u)
    n = u.shape[0]
    dens = np.abs(u) ** 2 / n**2
    if distance is None:
        distance = distance_to_well_set(h, 0.0, n)
    scale = p ** (1.0 / (2 * k + 1))
    integrals = {float(c): float(np.sum(np.exp(2 * c * scale * distance) * dens)) for c in c_list}
    applicable = None
    if eigenvalue is not None and C0 is not None:
        applicable = bool(eigenvalue < C0 * p ** (-2 * k / (2 * k + 1)))
    return DegenerateReport(p, k, eigenvalue, applicable, integrals)


# ---------------------------------------------------------------------------
# kernel decay


@dataclass(frozen=True)
class DecayFit:
    p: int
    rate: float
    intercept: float
    gaussian_rate: float
    """Rate of the alternative fit ``log|K| ~ c - r (sqrt(p) d)^2``."""
    trace: float
    n_pairs: int


def offdiag_decay(
    operator: LowSpectrum | ToeplitzMatrix,
    n_pairs: int = 400,
    d_range: tuple[float, float] = (0.1, 0.5),
    seed: int = 0,
    floor: float = 1e-12,
) -> DecayFit:
    """Fit ``log|K(x, x')|`` against ``sqrt(p) d(x, x')`` for the position-space kernel.

    ``K(x, y) = sum_ij u_i(x) M_ij conj(u_j(y))`` with ``M`` the identity for a
    cluster basis (the projector) or the Toeplitz matrix.  Pairs whose kernel
    magnitude falls below ``floor`` times the largest diagonal value are dropped.
    """
    if isinstance(operator, ToeplitzMatrix):
        basis, M = operator.basis, operator.entries
    else:
        basis, M = operator, None
    V = basis.cluster_basis()
    n, p = basis.grid_n, basis.p
    U = V.reshape(n, n, -1)
    W = U if M is None else (V @ M).reshape(n, n, -1)
    diag = np.einsum("ikj,ikj->ik", W, U.conj()).real
    trace = float(diag.sum() * basis.cell_area)
    rng = np.random.default_rng(seed)
    s_list, logk = [], []
    kfloor = floor * np.abs(diag).max()
    tries = 0
    while len(s_list) < n_pairs and tries < 50 * n_pairs:
        tries += 1
        i, k = rng.integers(0, n, 2)
        di, dk = rng.integers(-n // 2, n // 2 + 1, 2)
        d = math.hypot(di, dk) / n
        if not d_range[0] <= d <= d_range[1]:
            continue
        K = abs(np.dot(W[(i + di) % n, (k + dk) % n], U[i, k].conj()))
        if K < kfloor:
            continue
        s_list.append(math.sqrt(p) * d)
        logk.append(math.log(K))
    if len(s_list) < 3:
        raise ValueError("too few kernel samples above the floor for a fit")
    s = np.asarray(s_list)
    y = np.asarray(logk)
    slope, intercept = np.polyfit(s, y, 1)
    gslope, _ = np.polyfit(s * s, y, 1)
    return DecayFit(p, float(-slope), float(intercept), float(-gslope), trace, len(s))
