"""Bargmann-Fock model computations.

Conventions
-----------
Complex coordinates ``z_j = Z_{2j-1} + i Z_{2j}`` on ``R^{2n}``.  The Fock space
pairing is ``<F, G> = int F conj(G) exp(-|z|^2) dZ`` so that the monomials
``z^k / sqrt(pi^n k!)`` are orthonormal and the projection onto holomorphic
functions has kernel ``pi^{-n} exp(z . conj(z'))``.

The model Landau operator with weights ``a_j`` is ``sum_j b_j b_j^+`` with

    b_j   = -2 d/dz_j    + (a_j / 2) conj(z_j)
    b_j^+ =  2 d/dzbar_j + (a_j / 2) z_j

and its kernel is spanned by holomorphic functions times the ground Gaussian
``exp(-sum_j a_j |z_j|^2 / 4)``.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from numpy.polynomial import hermite as H
from scipy.special import gammaln

MultiIndex = tuple[int, ...]


class TruncationError(ValueError):
    """A multi-index or polynomial degree exceeds the Fock truncation."""


class ConvergenceError(RuntimeError):
    """The truncation rule hit its cap before the spectrum settled."""

    def __init__(self, message: str, values=None, N: int | None = None):
        super().__init__(message)
        self.values = values
        self.N = N


def _multi_indices(n: int, max_degree: int) -> list[MultiIndex]:
    out: list[MultiIndex] = []
    for d in range(max_degree + 1):
        # lexicographically descending inside each degree
        for k in itertools.product(range(d, -1, -1), repeat=n):
            if sum(k) == d:
                out.append(tuple(k))
    return out


@dataclass(frozen=True)
class FockTruncation:
    """Monomial basis ``{z^k : |k| <= N}`` of the n-dimensional Fock space.

    ``a`` are the weights of the model Landau operator (eigenvalues of the
    curvature endomorphism at the base point); they enter the Gaussian
    ``exp(-sum a_j |z_j|^2 / 4)`` of the kernel picture but not the
    normalised monomial basis itself.
    """

    N: int
    a: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        object.__setattr__(self, "a", a)
        if self.N < 0:
            raise ValueError(f"N must be >= 0, got {self.N}")
        if not a or any(x <= 0 for x in a):
            raise ValueError(f"weights a must be positive, got {a}")

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def basis(self) -> list[MultiIndex]:
        return _multi_indices(self.n, self.N)

    @property
    def dim(self) -> int:
        return math.comb(self.N + self.n, self.n)

    def index(self) -> dict[MultiIndex, int]:
        return {k: i for i, k in enumerate(self.basis)}


def _log_factorial(k: Iterable[int]) -> float:
    return float(sum(gammaln(np.asarray(list(k), dtype=float) + 1.0)))


def monomial_norm(k: Sequence[int], trunc: FockTruncation) -> float:
    """Norm of ``z^k`` under the weight ``exp(-|z|^2)``: ``sqrt(pi^n k!)``."""
    k = tuple(int(x) for x in k)
    if len(k) != trunc.n:
        raise ValueError(f"multi-index {k} does not match dimension n={trunc.n}")
    if any(x < 0 for x in k):
        raise ValueError(f"negative multi-index {k}")
    if sum(k) > trunc.N:
        raise TruncationError(f"|k| = {sum(k)} exceeds truncation N = {trunc.N}")
    return math.exp(0.5 * (trunc.n * math.log(math.pi) + _log_factorial(k)))


def _complex_coords(Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    return Z[..., 0::2] + 1j * Z[..., 1::2]


def model_bergman_kernel(Z, Zp, trunc: FockTruncation) -> complex | np.ndarray:
    """Kernel of the projection onto ``ker sum_j b_j b_j^+`` in ``L^2(R^{2n}, dZ)``.

    ``P(Z, Z') = (2 pi)^{-n} prod a_j exp(-1/4 sum a_k (|z_k|^2 + |z'_k|^2 - 2 z_k conj(z'_k)))``.
    Broadcasts over leading axes of ``Z`` and ``Zp`` (last axis has length 2n).
    """
    a = np.asarray(trunc.a)
    z = _complex_coords(Z)
    zp = _complex_coords(Zp)
    if z.shape[-1] != trunc.n or zp.shape[-1] != trunc.n:
        raise ValueError("points must have 2n real coordinates")
    expo = -0.25 * np.sum(a * (np.abs(z) ** 2 + np.abs(zp) ** 2 - 2 * z * np.conj(zp)), axis=-1)
    return np.prod(a) / (2 * np.pi) ** trunc.n * np.exp(expo)


def reproducing_defect(Z, Zp, trunc: FockTruncation, radius: float = 8.0, nodes: int = 160) -> np.ndarray:
    """``|int P(Z, W) P(W, Z') dW - P(Z, Z')|`` by polar quadrature over a disc (``n = 1``).

    Gauss-Legendre in the radius and the trapezoidal rule in the angle (exact
    for the periodic angular integrand up to aliasing).  ``Z`` and ``Zp`` are
    arrays of shape ``(m, 2)``.
    """
    if trunc.n != 1:
        raise ValueError("reproducing_defect is implemented for n = 1")
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    Zp = np.atleast_2d(np.asarray(Zp, dtype=float))
    r, wr = np.polynomial.legendre.leggauss(nodes)
    r = 0.5 * radius * (r + 1)
    wr = 0.5 * radius * wr * r
    theta = np.linspace(0.0, 2 * np.pi, 2 * nodes, endpoint=False)
    R, T = np.meshgrid(r, theta, indexing="ij")
    W = np.stack([R * np.cos(T), R * np.sin(T)], axis=-1).reshape(-1, 2)
    weights = np.repeat(wr, theta.size) * (2 * np.pi / theta.size)
    out = np.empty(len(Z))
    for i, (z, zp) in enumerate(zip(Z, Zp)):
        integral = np.sum(model_bergman_kernel(z, W, trunc) * model_bergman_kernel(W, zp, trunc) * weights)
        out[i] = abs(integral - model_bergman_kernel(z, zp, trunc))
    return out


def scaling_constant(a: Sequence[float]) -> float:
    """Prefactor making ``S u(z) = c exp(-sum a|z|^2/4) u(phi(z))`` an isometry.

    ``phi(z)_j = sqrt(a_j / 2) z_j``; the change of variables gives
    ``c = prod sqrt(a_j / 2)``.
    """
    return float(np.prod(np.sqrt(np.asarray(a, dtype=float) / 2.0)))


def apply_scaling(u, a: Sequence[float]):
    """Return the function ``S u`` (callable on complex ``z`` of shape (..., n))."""
    a_arr = np.asarray(a, dtype=float)
    c = scaling_constant(a_arr)

    def Su(z):
        z = np.asarray(z, dtype=complex)
        return c * np.exp(-0.25 * np.sum(a_arr * np.abs(z) ** 2, axis=-1)) * u(np.sqrt(a_arr / 2) * z)

    return Su


# ---------------------------------------------------------------------------
# Polynomial-times-Gaussian functions and the ladder operators


@dataclass(frozen=True)
class PolyGaussian:
    """``P(z, conj z) * exp(-sum_j a_j |z_j|^2 / 4)`` with exact polynomial part.

    ``coeffs`` maps ``(alpha, beta)`` to the coefficient of ``z^alpha conj(z)^beta``.
    """

    a: tuple[float, ...]
    coeffs: Mapping[tuple[MultiIndex, MultiIndex], complex] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.a)

    @classmethod
    def monomial(cls, a, alpha, beta, coeff: complex = 1.0) -> "PolyGaussian":
        return cls(tuple(a), {(tuple(alpha), tuple(beta)): complex(coeff)})

    def _clean(self, d) -> "PolyGaussian":
        return PolyGaussian(self.a, {k: v for k, v in d.items() if v != 0})

    def __add__(self, other: "PolyGaussian") -> "PolyGaussian":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0j) + v
        return self._clean(out)

    def __sub__(self, other: "PolyGaussian") -> "PolyGaussian":
        return self + other.scale(-1)

    def scale(self, s: complex) -> "PolyGaussian":
        return self._clean({k: s * v for k, v in self.coeffs.items()})

    def max_abs_coeff(self) -> float:
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def _shift(self, alpha, j, d):
        return alpha[:j] + (alpha[j] + d,) + alpha[j + 1:]

    def dz(self, j: int) -> "PolyGaussian":
        """d/dz_j of the full function (Gaussian included)."""
        out: dict = {}
        aj = self.a[j]
        for (al, be), c in self.coeffs.items():
            if al[j] > 0:
                k = (self._shift(al, j, -1), be)
                out[k] = out.get(k, 0j) + c * al[j]
            k = (al, self._shift(be, j, 1))
            out[k] = out.get(k, 0j) - 0.25 * aj * c
        return self._clean(out)

    def dzbar(self, j: int) -> "PolyGaussian":
        out: dict = {}
        aj = self.a[j]
        for (al, be), c in self.coeffs.items():
            if be[j] > 0:
                k = (al, self._shift(be, j, -1))
                out[k] = out.get(k, 0j) + c * be[j]
            k = (self._shift(al, j, 1), be)
            out[k] = out.get(k, 0j) - 0.25 * aj * c
        return self._clean(out)

    def mul_z(self, j: int) -> "PolyGaussian":
        return self._clean({(self._shift(al, j, 1), be): c for (al, be), c in self.coeffs.items()})

    def mul_zbar(self, j: int) -> "PolyGaussian":
        return self._clean({(al, self._shift(be, j, 1)): c for (al, be), c in self.coeffs.items()})

    def __call__(self, Z) -> np.ndarray:
        z = _complex_coords(Z)
        a = np.asarray(self.a)
        out = np.zeros(z.shape[:-1], dtype=complex)
        for (al, be), c in self.coeffs.items():
            out = out + c * np.prod(z ** np.array(al) * np.conj(z) ** np.array(be), axis=-1)
        return out * np.exp(-0.25 * np.sum(a * np.abs(z) ** 2, axis=-1))


def fock_symbols(n: int):
    """Sympy symbols ``(z, zb)`` used by the symbolic branch of ``ladder_apply``.

    ``z_j`` and ``zb_j`` are treated as independent variables (Wirtinger calculus).
    """
    import sympy

    z = sympy.symbols(f"z1:{n + 1}")
    zb = sympy.symbols(f"zb1:{n + 1}")
    return z, zb


def ladder_apply(which: str, j: int, f, a: Sequence[float] | None = None):
    """Apply ``b_j`` (``which='b'``) or ``b_j^+`` (``which='b_plus'``).

    ``f`` is either a :class:`PolyGaussian` or a sympy expression in the symbols
    from :func:`fock_symbols`; in the latter case ``a`` must be given.  The
    result has the same representation as the input.
    """
    if which not in ("b", "b_plus"):
        raise ValueError(f"unknown ladder operator {which!r}")
    if isinstance(f, PolyGaussian):
        if which == "b":
            return f.dz(j).scale(-2.0) + f.mul_zbar(j).scale(0.5 * f.a[j])
        return f.dzbar(j).scale(2.0) + f.mul_z(j).scale(0.5 * f.a[j])
    import sympy

    if a is None:
        raise ValueError("weights a are required for symbolic input")
    z, zb = fock_symbols(len(a))
    half_a = sympy.nsimplify(a[j]) / 2
    if which == "b":
        return -2 * sympy.diff(f, z[j]) + half_a * zb[j] * f
    return 2 * sympy.diff(f, zb[j]) + half_a * z[j] * f


def model_laplacian(f, a: Sequence[float] | None = None):
    """``sum_j b_j b_j^+ f`` in the representation of ``f``."""
    n = f.n if isinstance(f, PolyGaussian) else len(a)
    out = None
    for j in range(n):
        term = ladder_apply("b", j, ladder_apply("b_plus", j, f, a), a)
        out = term if out is None else out + term
    return out


def model_laplacian_spectrum(trunc: FockTruncation, levels: int) -> np.ndarray:
    """Lowest ``levels`` eigenvalues of ``sum_j b_j b_j^+`` (with multiplicity per level index).

    The operator preserves the span of ``conj(z)^beta * Gaussian``, one vector
    per Landau level index ``beta``; its matrix there is assembled by applying
    the ladder operators and diagonalised.  ``N`` is raised automatically when
    the requested levels are not all below the truncation threshold.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    a = trunc.a
    N = trunc.N
    while True:
        basis = _multi_indices(len(a), N)
        idx = {b: i for i, b in enumerate(basis)}
        zero = (0,) * len(a)
        M = np.zeros((len(basis), len(basis)), dtype=complex)
        for beta in basis:
            img = model_laplacian(PolyGaussian.monomial(a, zero, beta))
            for (al, be), c in img.coeffs.items():
                if al != zero or be not in idx:
                    raise RuntimeError("ladder image left the antiholomorphic span")
                M[idx[be], idx[beta]] += c
        vals = np.sort(np.linalg.eigvals(M).real)
        # levels with |beta| > N start at 2 min(a) (N + 1)
        if len(vals) >= levels and vals[levels - 1] < 2 * min(a) * (N + 1) - 1e-12:
            return vals[:levels]
        N += 4


# ---------------------------------------------------------------------------
# Anti-Wick polynomials


@dataclass(frozen=True)
class AntiWickPolynomial:
    """``P(conj z, z) = sum A_{k;l} conj(z)^k z^l`` acting on Fock space as ``sum A d^k z^l``."""

    n: int
    coeffs: Mapping[tuple[MultiIndex, MultiIndex], complex]

    def __post_init__(self):
        clean = {}
        for (k, l), v in self.coeffs.items():
            k, l = tuple(int(x) for x in k), tuple(int(x) for x in l)
            if len(k) != self.n or len(l) != self.n:
                raise ValueError(f"multi-index length mismatch for n={self.n}: {(k, l)}")
            if v != 0:
                clean[(k, l)] = clean.get((k, l), 0j) + complex(v)
        object.__setattr__(self, "coeffs", clean)

    @property
    def degree(self) -> int:
        return max((sum(k) + sum(l) for k, l in self.coeffs), default=0)

    def is_self_adjoint(self, tol: float = 1e-12) -> bool:
        for (k, l), v in self.coeffs.items():
            if abs(self.coeffs.get((l, k), 0j) - np.conj(v)) > tol * max(1.0, abs(v)):
                return False
        return True

    def is_homogeneous_quadratic(self) -> bool:
        return all(sum(k) + sum(l) == 2 for k, l in self.coeffs)

    def __add__(self, other: "AntiWickPolynomial") -> "AntiWickPolynomial":
        out = dict(self.coeffs)
        for key, v in other.coeffs.items():
            out[key] = out.get(key, 0j) + v
        return AntiWickPolynomial(self.n, out)

    def scale(self, s: complex) -> "AntiWickPolynomial":
        return AntiWickPolynomial(self.n, {key: s * v for key, v in self.coeffs.items()})

    @classmethod
    def constant(cls, n: int, value: complex) -> "AntiWickPolynomial":
        zero = (0,) * n
        return cls(n, {(zero, zero): value})

    @classmethod
    def from_real_quadratic(cls, Q: np.ndarray) -> "AntiWickPolynomial":
        """Anti-Wick polynomial of ``Z^T Q Z`` with ``z_j = Z_{2j-1} + i Z_{2j}``.

        ``Z_{2j-1} = (z_j + conj z_j)/2`` and ``Z_{2j} = (z_j - conj z_j)/(2i)``.
        """
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] % 2:
            raise ValueError(f"Q must be a square 2n x 2n matrix, got shape {Q.shape}")
        n = Q.shape[0] // 2
        # each real coordinate as (coefficient of z_j, coefficient of conj z_j, j)
        lin = []
        for j in range(n):
            lin.append((0.5, 0.5, j))
            lin.append((-0.5j, 0.5j, j))
        out: dict = {}
        for r in range(2 * n):
            for s in range(2 * n):
                if Q[r, s] == 0:
                    continue
                cz_r, czb_r, jr = lin[r]
                cz_s, czb_s, js = lin[s]
                for (c1, hol1), (c2, hol2) in itertools.product(
                    ((cz_r, True), (czb_r, False)), ((cz_s, True), (czb_s, False))
                ):
                    k = [0] * n
                    l = [0] * n
                    (l if hol1 else k)[jr] += 1
                    (l if hol2 else k)[js] += 1
                    key = (tuple(k), tuple(l))
                    out[key] = out.get(key, 0j) + Q[r, s] * c1 * c2
        return cls(n, {key: v for key, v in out.items() if abs(v) > 1e-15 * max(1.0, np.abs(Q).max())})


@dataclass(frozen=True)
class AntiWickMatrix:
    matrix: np.ndarray
    trunc: FockTruncation
    truncation_warning: bool
    """True when ``N`` is smaller than the degree of the symbol."""


def _falling(hi: tuple[int, ...], lo: tuple[int, ...]) -> int:
    """``prod_j hi_j! / lo_j!`` for ``lo <= hi`` componentwise, as an exact integer."""
    return math.prod(math.prod(range(b + 1, a + 1)) for a, b in zip(hi, lo))


def _entry(m, ml, mp, logfact) -> float:
    # d^k z^{m+l} = (m+l)!/(m+l-k)! z^{m'}  and  ||z^{m'}|| / ||z^m|| = sqrt(m'!/m!)
    try:
        num = _falling(ml, mp)
        if all(a >= b for a, b in zip(mp, m)):
            return float(num) * math.sqrt(float(_falling(mp, m)))
        if all(a <= b for a, b in zip(mp, m)):
            return float(num) / math.sqrt(float(_falling(m, mp)))
    except OverflowError:
        pass
    logc = logfact(ml) - logfact(mp) + 0.5 * (logfact(mp) - logfact(m))
    return math.exp(logc)


def antiwick_matrix(P: AntiWickPolynomial, trunc: FockTruncation) -> AntiWickMatrix:
    """Matrix of ``sum A_{k;l} d^k z^l`` on the normalised monomials ``|k| <= N``.

    Column ``m`` holds the image of ``z^m / ||z^m||``.  Factorial ratios are
    formed in exact integer arithmetic and rounded once; ratios too large
    for a float fall back to log-gamma.
    """
    if P.n != trunc.n:
        raise ValueError("polynomial and truncation dimensions differ")
    basis = trunc.basis
    idx = trunc.index()
    M = np.zeros((len(basis), len(basis)), dtype=complex)
    lf = {}

    def logfact(m):
        if m not in lf:
            lf[m] = _log_factorial(m)
        return lf[m]

    for m in basis:
        for (k, l), A in P.coeffs.items():
            ml = tuple(x + y for x, y in zip(m, l))
            mp = tuple(x - y for x, y in zip(ml, k))
            if any(x < 0 for x in mp) or mp not in idx:
                continue
            M[idx[mp], idx[m]] += A * _entry(m, ml, mp, logfact)
    return AntiWickMatrix(M, trunc, truncation_warning=trunc.N < P.degree)


def antiwick_spectrum(
    P: AntiWickPolynomial,
    levels: int,
    N0: int | None = None,
    step: int = 4,
    tol: float = 1e-10,
    cap: int | None = None,
) -> tuple[np.ndarray, int]:
    """Lowest ``levels`` eigenvalues of a self-adjoint anti-Wick operator.

    Truncation is raised by ``step`` until the lowest levels move by less than
    ``tol`` between successive truncations.  Returns ``(values, N)``; raises
    :class:`ConvergenceError` at the cap.
    """
    if not P.is_self_adjoint():
        raise ValueError("spectral use requires a self-adjoint symbol")
    n = P.n
    if cap is None:
        # dense diagonalisation; keep the basis below a few thousand vectors
        cap = 200 if n == 1 else max(N for N in range(8, 200) if math.comb(N + n, n) <= 3000)
    N = max(N0 if N0 is not None else 2 * levels + 4, P.degree)
    a_dummy = FockTruncation(N, (1.0,) * n)
    prev = None
    while True:
        M = antiwick_matrix(P, FockTruncation(N, a_dummy.a)).matrix
        vals = np.linalg.eigvalsh(0.5 * (M + M.conj().T))[:levels]
        if len(vals) >= levels and prev is not None and np.max(np.abs(vals - prev)) < tol:
            return vals, N
        prev = vals if len(vals) >= levels else None
        if N + step > cap:
            raise ConvergenceError(f"truncation cap N={cap} reached before convergence", vals, N)
        N += step


@dataclass(frozen=True)
class WeylQuadratic:
    """Weyl symbol ``v^T M v`` on phase space ``v = (x, xi)`` plus the scalar ``tr(M)/2``."""

    M: np.ndarray
    trace_correction: float

    @property
    def n(self) -> int:
        return self.M.shape[0] // 2


def antiwick_to_weyl_quadratic(P: AntiWickPolynomial) -> WeylQuadratic:
    """Weyl form of a quadratic anti-Wick symbol via ``z_k = (x_k - i xi_k)/sqrt 2``."""
    if not P.is_homogeneous_quadratic():
        raise ValueError(f"unsupported degree: expected a homogeneous quadratic, got degree {P.degree}")
    if not P.is_self_adjoint():
        raise ValueError("symbol is not self-adjoint")
    n = P.n
    dim = 2 * n

    def z_form(j, conj):
        v = np.zeros(dim, dtype=complex)
        v[j] = 1 / math.sqrt(2)
        v[n + j] = (1j if conj else -1j) / math.sqrt(2)
        return v

    M = np.zeros((dim, dim), dtype=complex)
    for (k, l), A in P.coeffs.items():
        forms = [z_form(j, True) for j in range(n) for _ in range(k[j])]
        forms += [z_form(j, False) for j in range(n) for _ in range(l[j])]
        u, v = forms
        M += A * 0.5 * (np.outer(u, v) + np.outer(v, u))
    if np.abs(M.imag).max() > 1e-12 * max(1.0, np.abs(M).max()):
        raise ValueError("self-adjoint quadratic produced a non-real Weyl form")
    M = M.real
    return WeylQuadratic(M, 0.5 * float(np.trace(M)))


def weyl_to_antiwick(W: WeylQuadratic) -> AntiWickPolynomial:
    """Inverse substitution ``x = (z + conj z)/sqrt 2``, ``xi = i (z - conj z)/sqrt 2``."""
    n = W.n
    lin = []  # (coef of z_j, coef of conj z_j, j) for x_1..x_n, xi_1..xi_n
    for j in range(n):
        lin.append((1 / math.sqrt(2), 1 / math.sqrt(2), j))
    for j in range(n):
        lin.append((1j / math.sqrt(2), -1j / math.sqrt(2), j))
    out: dict = {}
    for r in range(2 * n):
        for s in range(2 * n):
            if W.M[r, s] == 0:
                continue
            for (c1, h1), (c2, h2) in itertools.product(
                ((lin[r][0], True), (lin[r][1], False)), ((lin[s][0], True), (lin[s][1], False))
            ):
                k = [0] * n
                l = [0] * n
                (l if h1 else k)[lin[r][2]] += 1
                (l if h2 else k)[lin[s][2]] += 1
                key = (tuple(k), tuple(l))
                out[key] = out.get(key, 0j) + W.M[r, s] * c1 * c2
    return AntiWickPolynomial(n, {k: v for k, v in out.items() if abs(v) > 1e-15})


def weyl_quadratic_spectrum(W: WeylQuadratic, levels: int) -> np.ndarray:
    """Eigenvalues of ``Op_w(v^T M v) + tr(M)/2``.

    For ``n = 1`` the harmonic-oscillator formula ``2 sqrt(det M)(j + 1/2) + tr(M)/2``
    is exact.  For ``n > 1`` the symbol is mapped back to anti-Wick form and the
    truncated Fock diagonalisation is used instead.
    """
    M = np.asarray(W.M, dtype=float)
    if not np.allclose(M, M.T, atol=1e-14):
        raise ValueError("Weyl matrix must be symmetric")
    ev = np.linalg.eigvalsh(M)
    if ev.min() <= 0:
        raise ValueError(f"Weyl form is not positive definite (smallest eigenvalue {ev.min():.3g})")
    if W.n > 1:
        vals, _ = antiwick_spectrum(weyl_to_antiwick(W), levels)
        return vals
    j = np.arange(levels)
    return 2 * math.sqrt(np.linalg.det(M)) * (j + 0.5) + 0.5 * np.trace(M)


# ---------------------------------------------------------------------------
# Bargmann transform


def hermite_function(j: int, x: np.ndarray) -> np.ndarray:
    c = np.zeros(j + 1)
    c[j] = 1.0
    norm = math.exp(-0.5 * (j * math.log(2) + math.lgamma(j + 1) + 0.5 * math.log(math.pi)))
    return norm * H.hermval(x, c) * np.exp(-0.5 * x * x)


def _raised_hermite(j: int, x: np.ndarray) -> np.ndarray:
    """``a^* h_j = (x h_j - h_j') / sqrt 2``, using the Hermite series derivative."""
    c = np.zeros(j + 1)
    c[j] = 1.0
    norm = math.exp(-0.5 * (j * math.log(2) + math.lgamma(j + 1) + 0.5 * math.log(math.pi)))
    poly = H.hermval(x, c)
    dpoly = H.hermval(x, H.hermder(c)) if j > 0 else np.zeros_like(x)
    hj = norm * poly * np.exp(-0.5 * x * x)
    dhj = norm * (dpoly - x * poly) * np.exp(-0.5 * x * x)
    return (x * hj - dhj) / math.sqrt(2)


def bargmann_transform(fvals: np.ndarray, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``B f(z) = pi^{-1/4} int exp(-(z^2/2 + x^2/2 - sqrt2 z x)) f(x) dx`` by the trapezoid rule."""
    z = np.asarray(z, dtype=complex)[..., None]
    kern = np.exp(-(0.5 * z * z + 0.5 * x * x - math.sqrt(2) * z * x))
    dx = x[1] - x[0]
    return np.pi ** -0.25 * np.sum(kern * fvals, axis=-1) * dx


@dataclass(frozen=True)
class BargmannCheck:
    j: int
    normalization: complex
    constant_residual: float
    residual: float
    ladder_residual: float
    converged: bool


def bargmann_hermite_check(
    j: int,
    grid: tuple[float, int] = (12.0, 2001),
    samples: np.ndarray | None = None,
    tol: float = 1e-8,
) -> BargmannCheck:
    """Compare ``B h_j`` with ``c z^j / sqrt(j!)`` and check ``B a^* = z B``.

    ``c`` is fixed from ``B h_0``, which should be a constant function.  All
    residuals are relative sup-norms over ``samples`` (default: 10 points in
    the disc of radius 2).
    """
    L, npts = grid
    x = np.linspace(-L, L, int(npts))
    if samples is None:
        rng = np.random.default_rng(12345)
        r = 2 * np.sqrt(rng.random(10))
        samples = r * np.exp(2j * np.pi * rng.random(10))
    samples = np.asarray(samples, dtype=complex)
    B0 = bargmann_transform(hermite_function(0, x), x, samples)
    c = B0.mean()
    constant_residual = float(np.max(np.abs(B0 - c)) / abs(c))
    Bj = bargmann_transform(hermite_function(j, x), x, samples)
    target = c * samples ** j / math.sqrt(math.factorial(j))
    residual = float(np.max(np.abs(Bj - target)) / max(np.max(np.abs(target)), 1e-300))
    lhs = bargmann_transform(_raised_hermite(j, x), x, samples)
    rhs = samples * Bj
    ladder = float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(rhs)), 1e-300))
    ok = max(constant_residual, residual, ladder) < tol
    return BargmannCheck(j, complex(c), constant_residual, residual, ladder, ok)


def dump_matrix_csv(M: np.ndarray, path) -> None:
    """Write nonzero entries as ``row, col, re, im``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "re", "im"])
        for (r, c), v in np.ndenumerate(M):
            if v != 0:
                w.writerow([r, c, repr(float(np.real(v))), repr(float(np.imag(v)))])
