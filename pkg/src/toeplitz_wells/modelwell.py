"""Quadratic model wells and the reference spectra ``mu_m``.

A well is described by its Landau weights ``a_j``, the quadratic form
``q(Z) = Z^T Q Z`` (``Q`` = half the Hessian of the symbol at the well) and a
scalar shift.  The model operator is the compression of ``q + shift`` to the
kernel of the model Landau operator; after the rescaling ``phi`` it becomes an
anti-Wick operator on Fock space, which :mod:`toeplitz_wells.fockspace`
diagonalises.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fockspace import AntiWickPolynomial, FockTruncation, antiwick_spectrum


class DegenerateWellError(ValueError):
    """The requested point is not a non-degenerate minimum."""


@dataclass(frozen=True)
class QuadraticWell:
    n: int
    a: tuple[float, ...]
    Q: np.ndarray
    shift: float = 0.0
    label: str = "x0"

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        if Q.shape != (2 * self.n, 2 * self.n):
            raise ValueError(f"Q must be {2 * self.n}x{2 * self.n}, got {Q.shape}")
        if not np.allclose(Q, Q.T, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise ValueError("Q must be symmetric")
        if len(self.a) != self.n or any(x <= 0 for x in self.a):
            raise ValueError(f"need {self.n} positive weights, got {self.a}")
        ev = np.linalg.eigvalsh(Q)
        if ev.min() <= 0:
            raise DegenerateWellError(f"Q is not positive definite (eigenvalues {ev})")

    @property
    def D(self) -> float:
        return float(np.linalg.det(self.Q))

    @property
    def A(self) -> float:
        """Trace of the positive square root of ``Q``."""
        return float(np.sum(np.sqrt(np.linalg.eigvalsh(self.Q))))

    def rescaled_symbol(self) -> AntiWickPolynomial:
        """``q o phi^{-1}`` as an anti-Wick polynomial (no shift)."""
        scale = np.repeat(np.sqrt(2.0 / np.asarray(self.a)), 2)
        return AntiWickPolynomial.from_real_quadratic(scale[:, None] * self.Q * scale[None, :])


@dataclass
class ModelSpectrum:
    """Ascending model eigenvalues with the well each one came from."""

    values: np.ndarray
    wells: list[str] = field(default_factory=list)
    exact: list[bool] = field(default_factory=list)
    D: list[float] = field(default_factory=list)
    A: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.values)

    def to_rows(self) -> list[dict]:
        return [
            {"index": i, "value": float(v), "well_label": w, "exactness": "exact" if e else "truncated"}
            for i, (v, w, e) in enumerate(zip(self.values, self.wells, self.exact))
        ]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["index", "value", "well_label", "exactness"])
            w.writeheader()
            for row in self.to_rows():
                w.writerow({**row, "value": repr(row["value"])})


def well_spectrum_exact(well: QuadraticWell, levels: int) -> ModelSpectrum:
    """``mu_j = (2 sqrt(D)/a_1) j + A^2/(2 a_1) + shift`` for a one-dimensional well.

    Wells with ``n > 1`` are passed to :func:`well_spectrum_truncated`.
    """
    if well.n != 1:
        return well_spectrum_truncated(well, None, levels)
    a1 = well.a[0]
    D, A = well.D, well.A
    j = np.arange(levels, dtype=float)
    vals = 2 * math.sqrt(D) / a1 * j + A * A / (2 * a1) + well.shift
    return ModelSpectrum(vals, [well.label] * levels, [True] * levels, [D], [A])


def well_spectrum_truncated(well: QuadraticWell, trunc: FockTruncation | None, levels: int) -> ModelSpectrum:
    """Diagonalise the rescaled anti-Wick symbol in a growing monomial basis.

    ``trunc.N`` (if given) is only the starting truncation; the convergence
    rule raises it as needed and a :class:`~toeplitz_wells.fockspace.ConvergenceError`
    is raised at the cap.
    """
    if trunc is not None and tuple(trunc.a) != tuple(well.a):
        raise ValueError("truncation weights differ from the well weights")
    N0 = trunc.N if trunc is not None else None
    vals, _ = antiwick_spectrum(well.rescaled_symbol(), levels, N0=N0)
    vals = vals + well.shift
    return ModelSpectrum(vals, [well.label] * levels, [False] * levels, [well.D], [well.A])


def multiwell_spectrum(wells: Sequence[QuadraticWell], levels: int) -> ModelSpectrum:
    """Merged spectrum of the direct sum over wells (ties broken by well order)."""
    if not wells:
        raise ValueError("at least one well is required")
    entries = []
    D, A = [], []
    for i, w in enumerate(wells):
        s = well_spectrum_exact(w, levels)
        D += s.D
        A += s.A
        entries += [(v, i, w.label, e) for v, e in zip(s.values, s.exact)]
    entries.sort(key=lambda t: (t[0], t[1]))
    entries = entries[:levels]
    return ModelSpectrum(
        np.array([e[0] for e in entries]),
        [e[2] for e in entries],
        [e[3] for e in entries],
        D,
        A,
    )


def _well_label(x0) -> str:
    return f"({x0[0]:.6g}, {x0[1]:.6g})"


def magnetic_well_from_field(field, minimum) -> QuadraticWell:
    """Model well of the Bochner Laplacian at a non-degenerate minimum of ``b``.

    ``a_1 = b(x0)``, ``Q = Hess b(x0) / 2`` and the shift vanishes on the flat
    torus.  ``field`` is a :class:`~toeplitz_wells.torus.TorusField`.
    """
    b = field.b
    x0 = np.asarray(minimum, dtype=float)
    bmax = float(np.max(np.abs(b.on_grid(64))))
    g = b.gradient(x0)
    if np.linalg.norm(g) > 1e-10 * bmax:
        raise DegenerateWellError(f"gradient {g} at {x0} is not zero; not a critical point")
    Hs = b.hessian(x0)
    ev = np.linalg.eigvalsh(Hs)
    if ev.min() < 1e-8:
        raise DegenerateWellError(
            f"Hessian eigenvalues {ev} at {x0}: minimum is degenerate "
            "(use the degenerate-well diagnostics instead)"
        )
    return QuadraticWell(1, (float(b(*x0)),), 0.5 * Hs, 0.0, _well_label(x0))


def toeplitz_well_from_symbol(h, x0, b_at_x0: float, shift: float = 0.0) -> QuadraticWell:
    """Model well for ``T_{h,p}`` at a zero ``x0`` of ``h``; ``a_1`` is the field value there."""
    x0 = np.asarray(x0, dtype=float)
    Hs = h.hessian(x0)
    ev = np.linalg.eigvalsh(Hs)
    if ev.min() < 1e-8:
        raise DegenerateWellError(f"Hessian of the symbol at {x0} has eigenvalues {ev}")
    return QuadraticWell(1, (float(b_at_x0),), 0.5 * Hs, shift, _well_label(x0))


def predict_toeplitz_eigs(spec: ModelSpectrum, p: int) -> np.ndarray:
    """Leading-order predictions ``mu_m / p``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return np.asarray(spec.values, dtype=float) / p


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])

