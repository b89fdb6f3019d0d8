"""Magnetic Laplacians on the flat unit 2-torus.

The field ``b(x) dx1 ^ dx2`` has integer flux ``m``, so its mean is
``bbar = 2 pi m``.  The connection form is split into a Landau part
``(-bbar x2, 0)`` and a periodic corrector ``a = (-d2 phi, d1 phi)`` with
``Lap phi = b - bbar``.  Sections of ``L^p`` are represented by grid functions
obeying the twisted boundary condition

    psi(x1, x2 + 1) = exp(-i p bbar x1) psi(x1, x2),

and the covariant second differences use link factors
``exp(-i p int_link A)`` evaluated exactly (the corrector is a trigonometric
polynomial, so its line integrals have closed forms).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Mapping

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .trigpoly import TWO_PI, TrigPolynomial, double_well_symbol, well_symbol

# central second-derivative weights w_s for offsets s = 1, 2, ...
# (f'' ~ sum_s w_s (f(x + s h) - 2 f(x) + f(x - s h)) / h^2)
STENCILS = {
    2: ((1, 1.0),),
    4: ((1, 4 / 3), (2, -1 / 12)),
    6: ((1, 3 / 2), (2, -3 / 20), (3, 1 / 90)),
    8: ((1, 8 / 5), (2, -1 / 5), (3, 8 / 315), (4, -1 / 560)),
}


class FieldError(ValueError):
    """Invalid magnetic field specification."""


class ResolutionError(ValueError):
    """The grid does not resolve the magnetic length."""

    def __init__(self, message: str, required: int):
        super().__init__(message)
        self.required = required


class EigenSolverError(RuntimeError):
    """Eigenpairs failed the residual test; ``residuals`` holds the best ones found."""

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class ClusterError(RuntimeError):
    pass


class NoGapError(ClusterError):
    """No spectral gap was visible in the computed eigenvalues."""


class DimensionMismatchError(ClusterError):
    """The low cluster does not have the Riemann-Roch dimension ``p m``."""


# ---------------------------------------------------------------------------
# field


@dataclass(frozen=True)
class TorusField:
    """Positive magnetic field with flux ``m`` on the unit torus."""

    m: int
    b: TrigPolynomial
    check_grid: int = 256

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise FieldError(f"flux m must be a positive integer, got {self.m!r}")
        c00 = self.b.coeff((0, 0))
        if abs(c00 - TWO_PI * self.m) > 1e-12 * TWO_PI * self.m:
            raise FieldError(f"mean of b is {c00}, expected 2 pi m = {TWO_PI * self.m}")
        if not self.b.is_real():
            raise FieldError("Fourier coefficients are not conjugate-symmetric (field must be real)")
        vals = self.b.on_grid(self.check_grid)
        i, k = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[i, k] <= 0:
            x = (i / self.check_grid, k / self.check_grid)
            raise FieldError(f"field is not positive: b{x} = {vals[i, k]:.6g}")

    @property
    def coeffs(self) -> dict[tuple[int, int], complex]:
        return self.b.coeffs

    @property
    def bbar(self) -> float:
        return TWO_PI * self.m

    @property
    def is_constant(self) -> bool:
        return all(k == (0, 0) for k, _ in self.b.terms)

    @cached_property
    def minima(self) -> list[np.ndarray]:
        """Global minimisers of ``b`` (empty for a constant field)."""
        if self.is_constant:
            return []
        return self.b.global_minima()

    @property
    def b0(self) -> float:
        if self.is_constant:
            return self.bbar
        return float(self.b(*self.minima[0]))

    @property
    def mu0(self) -> float:
        return self.b0

    def tau(self, x1, x2):
        return self.b(x1, x2)

    def hessians(self) -> list[np.ndarray]:
        return [self.b.hessian(x) for x in self.minima]

    def translated(self, shift) -> "TorusField":
        return TorusField(self.m, self.b.translated(shift), self.check_grid)


FAMILIES = ("constant", "single_well", "double_well", "custom")


def build_field(
    family: str,
    m: int = 1,
    epsilon: float = 0.1,
    coefficients: Mapping[tuple[int, int], complex] | None = None,
) -> TorusField:
    """Closed-form field families normalised to flux ``m``.

    ``single_well``
        ``c (1 + eps (2 - cos 2 pi x1 - cos 2 pi x2))``, ``c = 2 pi m / (1 + 2 eps)``;
        unique minimum at the origin with ``b0 = c``.
    ``double_well``
        ``c (1 + eps (1 - cos 2 pi x1 cos 2 pi x2))``, ``c = 2 pi m / (1 + eps)``;
        minima at ``(0, 0)`` and ``(1/2, 1/2)`` with equal Hessians ``4 pi^2 c eps I``.
    ``custom``
        Fourier coefficients of the shape; rescaled so the mean equals ``2 pi m``.
    """
    if family not in FAMILIES:
        raise FieldError(f"unknown field family {family!r}; expected one of {FAMILIES}")
    if family != "custom" and coefficients is not None:
        raise FieldError("closed-form family and raw coefficients are mutually exclusive")
    if epsilon < 0:
        raise FieldError(f"epsilon must be nonnegative, got {epsilon}")
    bbar = TWO_PI * m
    if family == "constant":
        b = TrigPolynomial.constant(bbar)
    elif family == "single_well":
        c = bbar / (1 + 2 * epsilon)
        b = (1.0 + well_symbol().scale(epsilon)).scale(c)
    elif family == "double_well":
        c = bbar / (1 + epsilon)
        b = (1.0 + double_well_symbol().scale(epsilon)).scale(c)
    else:
        if not coefficients:
            raise FieldError("custom field needs Fourier coefficients")
        shape = TrigPolynomial.from_dict(coefficients)
        mean = shape.coeff((0, 0))
        if abs(mean.imag) > 0 or mean.real <= 0:
            raise FieldError(f"coefficient (0, 0) must be real and positive, got {mean}")
        b = shape.scale(bbar / mean.real)
    # pin the mean exactly (scaling may leave rounding in the last bit)
    coeffs = b.coeffs
    coeffs[(0, 0)] = complex(bbar)
    return TorusField(int(m), TrigPolynomial.from_dict(coeffs))


# ---------------------------------------------------------------------------
# gauge


def _line_factor(k: int, length: float) -> complex:
    """``int_0^length exp(2 pi i k t) dt``."""
    if k == 0:
        return complex(length)
    return (np.exp(2j * np.pi * k * length) - 1) / (2j * np.pi * k)


@dataclass(frozen=True)
class Corrector:
    """Periodic potential ``phi`` with ``Lap phi = b - bbar`` and its 1-form ``a``."""

    phi: TrigPolynomial

    @property
    def a1(self) -> TrigPolynomial:
        return -self.phi.derivative(0, 1)

    @property
    def a2(self) -> TrigPolynomial:
        return self.phi.derivative(1, 0)

    def line_integral(self, direction: int, length: float, x1, x2) -> np.ndarray:
        """``int_0^length a_dir(x + t e_dir) dt`` evaluated at the points ``(x1, x2)``."""
        comp = self.a1 if direction == 0 else self.a2
        out = np.zeros(np.broadcast(np.asarray(x1), np.asarray(x2)).shape, dtype=complex)
        for k, v in comp.terms:
            f = _line_factor(k[direction], length)
            out = out + v * f * np.exp(2j * np.pi * (k[0] * x1 + k[1] * x2))
        return out.real


def solve_gauge(field: TorusField) -> Corrector:
    """Spectral Poisson solve on the frequency support of ``b``: ``phi_k = -c_k / (4 pi^2 |k|^2)``."""
    out = {}
    for k, v in field.b.terms:
        if k == (0, 0):
            continue
        out[k] = -v / (4 * np.pi**2 * (k[0] ** 2 + k[1] ** 2))
    return Corrector(TrigPolynomial.from_dict(out))


# ---------------------------------------------------------------------------
# discrete problem


def grid_rule(p: int, bbar: float) -> int:
    """Smallest power of two with spacing at most a magnetic length over 8."""
    need = 8 * math.sqrt(p * bbar)
    return 1 << max(2, math.ceil(math.log2(need)))


@dataclass(frozen=True)
class LandauProblem:
    field: TorusField
    p: int
    grid_n: int | None = None
    order: int = 4
    enforce_resolution: bool = True
    corrector: Corrector = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")
        if self.order not in STENCILS:
            raise ValueError(f"stencil order must be one of {sorted(STENCILS)}")
        if self.grid_n is None:
            object.__setattr__(self, "grid_n", grid_rule(self.p, self.field.bbar))
        required = math.ceil(8 * math.sqrt(self.p * self.field.bbar))
        if self.enforce_resolution and self.grid_n < required:
            raise ResolutionError(
                f"grid_n = {self.grid_n} under-resolves the magnetic length; need grid_n >= {required}",
                required,
            )
        if self.grid_n < 2 * len(STENCILS[self.order]) + 1:
            raise ValueError("grid too small for the stencil width")
        object.__setattr__(self, "corrector", solve_gauge(self.field))

    @property
    def h(self) -> float:
        return 1.0 / self.grid_n

    @property
    def magnetic_length(self) -> float:
        return 1.0 / math.sqrt(self.p * self.field.bbar)

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.grid_n) * self.h
        return np.meshgrid(x, x, indexing="ij")

    def link_factors(self, direction: int, s: int) -> np.ndarray:
        """Unit-modulus factors ``U[i, k]`` for the link ``x -> x + s h e_dir``.

        The twist ``exp(-i p bbar x1)`` is folded into x2-links that cross
        the boundary.
        """
        X1, X2 = self.coordinates()
        L = s * self.h
        p, bbar = self.p, self.field.bbar
        if direction == 0:
            integral = -bbar * X2 * L + self.corrector.line_integral(0, L, X1, X2)
            return np.exp(-1j * p * integral)
        integral = self.corrector.line_integral(1, L, X1, X2)
        wraps = (np.arange(self.grid_n)[None, :] + s) // self.grid_n
        return np.exp(-1j * p * integral) * np.exp(-1j * p * bbar * X1 * wraps)

    def plaquette_phases(self) -> np.ndarray:
        """Holonomy around each elementary plaquette, counter-clockwise."""
        U1 = self.link_factors(0, 1)
        U2 = self.link_factors(1, 1)
        return U1 * np.roll(U2, -1, axis=0) * np.conj(np.roll(U1, -1, axis=1)) * np.conj(U2)

    def total_flux(self) -> float:
        """``-sum arg(plaquette)``; equals ``2 pi p m`` when every plaquette is resolved."""
        return float(-np.sum(np.angle(self.plaquette_phases())))

    def tau_on_grid(self) -> np.ndarray:
        return self.field.b.on_grid(self.grid_n)


BOCHNER, RENORMALIZED = "bochner", "renormalized"


def assemble_laplacian(prob: LandauProblem, which: str = BOCHNER) -> sp.csc_matrix:
    """Covariant finite-difference Laplacian ``-sum_dir D_dir^2`` as a sparse Hermitian matrix.

    Only forward links are assembled; the matrix is ``diag + F + F^H``, so it
    is Hermitian by construction.  ``which='renormalized'`` subtracts
    ``p b(x)`` on the diagonal.
    """
    if which not in (BOCHNER, RENORMALIZED):
        raise ValueError(f"which must be {BOCHNER!r} or {RENORMALIZED!r}")
    n = prob.grid_n
    h2 = prob.h**2
    idx = np.arange(n * n).reshape(n, n)
    weights = STENCILS[prob.order]
    rows, cols, vals = [], [], []
    for s, w in weights:
        for direction in (0, 1):
            U = prob.link_factors(direction, s)
            target = np.roll(idx, -s, axis=direction)
            rows.append(idx.ravel())
            cols.append(target.ravel())
            vals.append((-w / h2 * U).ravel())
    F = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n * n, n * n)
    ).tocsr()
    diag = np.full(n * n, 4 * sum(w for _, w in weights) / h2)
    if which == RENORMALIZED:
        diag = diag - prob.p * prob.tau_on_grid().ravel()
    H = sp.diags(diag) + F + F.conj().T
    return H.tocsc()


# ---------------------------------------------------------------------------
# eigenpairs


@dataclass
class LowSpectrum:
    """Lowest eigenpairs of a discretised operator.

    ``eigenvectors[:, j]`` is normalised so that ``sum |u|^2 * cell_area = 1``
    (grid quadrature).  Cluster fields are filled by :func:`detect_cluster`.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    cell_area: float = 1.0
    which: str | None = None
    p: int | None = None
    grid_n: int | None = None
    d_p: int | None = None
    C_L: float | None = None
    gap_edge: float | None = None

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    def orthonormality_defect(self) -> float:
        V = self.eigenvectors
        G = (V.conj().T @ V) * self.cell_area
        return float(np.abs(G - np.eye(G.shape[0])).max()) if G.size else 0.0

    def section(self, j: int) -> np.ndarray:
        """Eigensection ``j`` reshaped to the ``grid_n x grid_n`` grid."""
        return self.eigenvectors[:, j].reshape(self.grid_n, self.grid_n)

    def cluster_basis(self) -> np.ndarray:
        if self.d_p is None:
            raise ClusterError("cluster not detected; call detect_cluster first")
        return self.eigenvectors[:, : self.d_p]

    def to_csv(self, path, extra: Mapping[str, object] | None = None) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            keys = list(extra or {})
            w.writerow(keys + ["j", "lambda", "residual"])
            for j, (lam, r) in enumerate(zip(self.eigenvalues, self.residuals)):
                w.writerow([extra[k] for k in keys] + [j, repr(float(lam)), repr(float(r))])


def _rayleigh_ritz(H, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # ARPACK vectors inside near-degenerate clusters are not orthogonal to
    # working precision; re-diagonalise on their span.
    Q, _ = np.linalg.qr(V)
    Hs = Q.conj().T @ (H @ Q)
    vals, Y = np.linalg.eigh(0.5 * (Hs + Hs.conj().T))
    return vals, Q @ Y


def _norm_bound(H) -> float:
    return float(abs(H).sum(axis=1).max()) if sp.issparse(H) else float(np.abs(H).sum(axis=1).max())


def low_spectrum(
    matrix,
    count: int,
    mode: str = "auto",
    sigma: float | None = None,
    cell_area: float = 1.0,
    seed: int = 0,
    rtol: float = 1e-8,
    maxiter: int | None = None,
) -> LowSpectrum:
    """The ``count`` smallest eigenpairs of a Hermitian matrix.

    Parameters
    ----------
    mode : {'auto', 'lanczos', 'dense'}
        ``lanczos`` uses implicitly restarted Lanczos in shift-invert mode
        around ``sigma`` (which should lie below the wanted eigenvalues);
        ``auto`` goes dense for matrices of dimension at most 1024.
    cell_area : float
        Quadrature weight per grid point; eigenvectors are scaled to unit
        norm under it.
    seed : int
        Seeds the Lanczos start vector.
    """
    H = matrix
    dim = H.shape[0]
    if count < 0 or count > dim:
        raise ValueError(f"count must lie in [0, {dim}], got {count}")
    if mode == "auto":
        mode = "dense" if dim <= 1024 or count >= dim - 1 else "lanczos"
    if mode not in ("dense", "lanczos"):
        raise ValueError(f"unknown mode {mode!r}")
    if count == 0:
        return LowSpectrum(np.zeros(0), np.zeros((dim, 0), complex), np.zeros(0), cell_area)
    if mode == "dense":
        A = H.toarray() if sp.issparse(H) else np.asarray(H)
        vals, vecs = np.linalg.eigh(A)
        vals, vecs = vals[:count], vecs[:, :count]
    else:
        if count >= dim - 1:
            raise ValueError("Lanczos needs count < dim - 1; use mode='dense'")
        if sigma is None:
            sigma = 0.0
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        lu = sla.splu(sp.csc_matrix(H - sigma * sp.identity(dim, format="csc")), permc_spec="MMD_AT_PLUS_A")
        OPinv = sla.LinearOperator((dim, dim), matvec=lu.solve, dtype=complex)
        try:
            _, vecs = sla.eigsh(H, k=count, sigma=sigma, which="LM", OPinv=OPinv, v0=v0, maxiter=maxiter)
        except sla.ArpackNoConvergence as exc:
            raise EigenSolverError(f"Lanczos did not converge: {exc}", None) from exc
        vals, vecs = _rayleigh_ritz(H, vecs)
    resid = np.linalg.norm(H @ vecs - vecs * vals, axis=0)
    bound = rtol * _norm_bound(H)
    if np.any(resid > bound):
        raise EigenSolverError(
            f"residuals up to {resid.max():.3g} exceed {bound:.3g}", resid
        )
    return LowSpectrum(np.asarray(vals, float), vecs / math.sqrt(cell_area), resid, cell_area)


def problem_spectrum(prob: LandauProblem, which: str, count: int, seed: int = 0, mode: str = "auto") -> LowSpectrum:
    """Assemble and diagonalise; shift chosen below the expected low cluster."""
    H = assemble_laplacian(prob, which)
    if which == RENORMALIZED:
        sigma = -1.0
    else:
        sigma = prob.p * prob.field.b0 - 0.5 * prob.p * prob.field.b0
    spec = low_spectrum(H, count, mode=mode, sigma=sigma, cell_area=prob.h**2, seed=seed)
    spec.which, spec.p, spec.grid_n = which, prob.p, prob.grid_n
    return spec


def detect_cluster(spec: LowSpectrum, p: int, field: TorusField, check_dimension: bool = True) -> LowSpectrum:
    """Locate the low cluster of a renormalised spectrum.

    The cluster is everything below the first eigenvalue exceeding
    ``p mu0`` (the gap edge); all cluster eigenvalues must lie within
    ``p mu0 / 2`` of zero.  Sets ``d_p``, ``C_L`` (observed half-width) and
    ``gap_edge`` on ``spec`` and returns it.
    """
    if spec.which not in (None, RENORMALIZED):
        raise ValueError("cluster detection works on the renormalized operator")
    lam = np.asarray(spec.eigenvalues)
    threshold = p * field.mu0
    above = np.nonzero(lam > threshold)[0]
    if above.size == 0:
        raise NoGapError(
            f"no eigenvalue above p mu0 = {threshold:.4g} among {lam.size} computed; "
            "request more eigenvalues or refine the grid"
        )
    d = int(above[0])
    cluster = lam[:d]
    if d == 0 or np.max(np.abs(cluster)) > 0.5 * threshold:
        raise NoGapError(
            f"eigenvalues {cluster[np.abs(cluster) > 0.5 * threshold][:5]} fall inside the gap "
            f"(0.5 p mu0 = {0.5 * threshold:.4g}); grid too coarse or p too small"
        )
    spec.d_p = d
    spec.C_L = float(np.max(np.abs(cluster)))
    spec.gap_edge = float(lam[d])
    if check_dimension and d != p * field.m:
        raise DimensionMismatchError(f"cluster dimension {d} differs from p m = {p * field.m}")
    return spec


def cluster_basis(field: TorusField, p: int, grid_n: int | None = None, order: int = 4,
                  seed: int = 0, extra: int = 4) -> LowSpectrum:
    """Orthonormal basis of the low cluster of the renormalised Laplacian."""
    prob = LandauProblem(field, p, grid_n, order)
    spec = problem_spectrum(prob, RENORMALIZED, p * field.m + extra, seed=seed)
    return detect_cluster(spec, p, field)


def bochner_low_eigs(prob: LandauProblem, j_max: int, seed: int = 0) -> np.ndarray:
    """Lowest ``j_max`` eigenvalues of the Bochner Laplacian, ascending."""
    if j_max <= 0:
        return np.zeros(0)
    return problem_spectrum(prob, BOCHNER, j_max, seed=seed).eigenvalues


def dump_sections_csv(spec: LowSpectrum, modes, path) -> None:
    """Portable eigenvector dump: one row per (mode, ix, iy)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mode", "ix", "iy", "re", "im"])
        for j in modes:
            u = spec.section(j)
            for (ix, iy), v in np.ndenumerate(u):
                w.writerow([j, ix, iy, repr(float(v.real)), repr(float(v.imag))])
