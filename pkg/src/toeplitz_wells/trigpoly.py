"""Real trigonometric polynomials on the unit 2-torus.

A ``TrigPolynomial`` stores Fourier coefficients ``c[(k1, k2)]`` of

    f(x) = sum_k c_k exp(2 pi i (k1 x1 + k2 x2)),

and is shared by the magnetic field and the Toeplitz symbols.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

TWO_PI = 2.0 * np.pi


def periodic_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Flat-torus distance between points ``x`` and ``y`` (last axis = 2)."""
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) % 1.0
    d = np.minimum(d, 1.0 - d)
    return np.sqrt(np.sum(d * d, axis=-1))


@dataclass(frozen=True)
class TrigPolynomial:
    """Finite Fourier series on the unit torus.

    Coefficients are kept as a sorted tuple of ``((k1, k2), complex)`` pairs so
    that instances are hashable and compare by value.
    """

    terms: tuple[tuple[tuple[int, int], complex], ...]

    @classmethod
    def from_dict(cls, coeffs: Mapping[tuple[int, int], complex], tol: float = 0.0) -> "TrigPolynomial":
        items = []
        for k, c in coeffs.items():
            k = (int(k[0]), int(k[1]))
            c = complex(c)
            if abs(c) > tol:
                items.append((k, c))
        return cls(tuple(sorted(items)))

    @classmethod
    def constant(cls, value: float) -> "TrigPolynomial":
        return cls.from_dict({(0, 0): value})

    @property
    def coeffs(self) -> dict[tuple[int, int], complex]:
        return dict(self.terms)

    def coeff(self, k: tuple[int, int]) -> complex:
        return self.coeffs.get((int(k[0]), int(k[1])), 0j)

    @property
    def mean(self) -> float:
        return self.coeff((0, 0)).real

    @property
    def max_frequency(self) -> int:
        return max((max(abs(k[0]), abs(k[1])) for k, _ in self.terms), default=0)

    def is_real(self, tol: float = 1e-12) -> bool:
        c = self.coeffs
        scale = max((abs(v) for v in c.values()), default=1.0)
        for k, v in c.items():
            if abs(v - np.conj(c.get((-k[0], -k[1]), 0j))) > tol * max(scale, 1.0):
                return False
        return True

    # -- algebra ---------------------------------------------------------
    def __add__(self, other: "TrigPolynomial | float") -> "TrigPolynomial":
        if not isinstance(other, TrigPolynomial):
            other = TrigPolynomial.constant(other)
        out = self.coeffs
        for k, v in other.terms:
            out[k] = out.get(k, 0j) + v
        return TrigPolynomial.from_dict(out)

    __radd__ = __add__

    def __neg__(self) -> "TrigPolynomial":
        return self.scale(-1.0)

    def __sub__(self, other: "TrigPolynomial | float") -> "TrigPolynomial":
        if not isinstance(other, TrigPolynomial):
            other = TrigPolynomial.constant(other)
        return self + (-other)

    def __rsub__(self, other: float) -> "TrigPolynomial":
        return TrigPolynomial.constant(other) - self

    def scale(self, s: complex) -> "TrigPolynomial":
        return TrigPolynomial.from_dict({k: s * v for k, v in self.terms})

    def __mul__(self, other: "TrigPolynomial | float") -> "TrigPolynomial":
        if not isinstance(other, TrigPolynomial):
            return self.scale(other)
        out: dict[tuple[int, int], complex] = {}
        for k, u in self.terms:
            for l, v in other.terms:
                kl = (k[0] + l[0], k[1] + l[1])
                out[kl] = out.get(kl, 0j) + u * v
        return TrigPolynomial.from_dict(out, tol=1e-300)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "TrigPolynomial":
        out = TrigPolynomial.constant(1.0)
        for _ in range(int(n)):
            out = out * self
        return out

    def derivative(self, i: int, j: int = 0) -> "TrigPolynomial":
        """Partial derivative d^i/dx1^i d^j/dx2^j."""
        return TrigPolynomial.from_dict(
            {k: v * (2j * np.pi * k[0]) ** i * (2j * np.pi * k[1]) ** j for k, v in self.terms}
        )

    def translated(self, shift) -> "TrigPolynomial":
        """Return ``x -> f(x - shift)``."""
        s1, s2 = float(shift[0]), float(shift[1])
        return TrigPolynomial.from_dict(
            {k: v * np.exp(-2j * np.pi * (k[0] * s1 + k[1] * s2)) for k, v in self.terms}
        )

    # -- evaluation ------------------------------------------------------
    def __call__(self, x1, x2) -> np.ndarray:
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(np.broadcast(x1, x2).shape, dtype=complex)
        for k, v in self.terms:
            out = out + v * np.exp(2j * np.pi * (k[0] * x1 + k[1] * x2))
        return out.real if self.is_real() else out

    def on_grid(self, n: int) -> np.ndarray:
        """Values on the ``n x n`` grid ``x = (i/n, k/n)``, indexed ``[i, k]``."""
        x = np.arange(n) / n
        return self(x[:, None], x[None, :])

    def gradient(self, x) -> np.ndarray:
        return np.array([self.derivative(1, 0)(*x), self.derivative(0, 1)(*x)], dtype=float)

    def hessian(self, x) -> np.ndarray:
        h11 = float(self.derivative(2, 0)(*x))
        h12 = float(self.derivative(1, 1)(*x))
        h22 = float(self.derivative(0, 2)(*x))
        return np.array([[h11, h12], [h12, h22]])

    def global_minima(self, scan: int = 256, rel_tol: float = 1e-9, newton_steps: int = 50) -> list[np.ndarray]:
        """Global minimisers, located by a grid scan then refined by Newton.

        Only points whose refined value is within ``rel_tol`` (relative to the
        oscillation of ``f``) of the smallest value found are returned.
        """
        vals = self.on_grid(scan)
        nbrs = [np.roll(np.roll(vals, a, 0), b, 1) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a, b) != (0, 0)]
        is_min = np.all([vals <= v for v in nbrs], axis=0)
        cands = np.argwhere(is_min) / scan
        refined: list[tuple[float, np.ndarray]] = []
        for x in cands:
            x = x.astype(float)
            for _ in range(newton_steps):
                g = self.gradient(x)
                H = self.hessian(x)
                try:
                    step = np.linalg.solve(H, g)
                except np.linalg.LinAlgError:
                    break
                if np.linalg.norm(step) > 0.5 / scan:
                    step *= 0.5 / scan / np.linalg.norm(step)
                x = x - step
                if np.linalg.norm(step) < 1e-15:
                    break
            x = x % 1.0
            refined.append((float(self(*x)), x))
        if not refined:
            return []
        fmin = min(v for v, _ in refined)
        spread = float(vals.max() - vals.min()) or 1.0
        out: list[np.ndarray] = []
        for v, x in sorted(refined, key=lambda t: (t[0], tuple(t[1]))):
            if v - fmin > rel_tol * spread:
                continue
            if any(periodic_distance(x, y) < 1e-6 for y in out):
                continue
            out.append(x)
        return sorted(out, key=lambda x: (round(x[0], 9), round(x[1], 9)))

    # -- named families ------------------------------------------------
    @classmethod
    def cosine(cls, k1: int, k2: int, amplitude: float = 1.0) -> "TrigPolynomial":
        """``amplitude * cos(2 pi (k1 x1 + k2 x2))``."""
        return cls.from_dict({(k1, k2): amplitude / 2, (-k1, -k2): amplitude / 2})


def well_symbol() -> TrigPolynomial:
    """``2 - cos 2 pi x1 - cos 2 pi x2``: a single non-degenerate zero at the origin."""
    return 2.0 - TrigPolynomial.cosine(1, 0) - TrigPolynomial.cosine(0, 1)


def double_well_symbol() -> TrigPolynomial:
    """``1 - cos 2 pi x1 cos 2 pi x2``: zeros at (0, 0) and (1/2, 1/2)."""
    return 1.0 - TrigPolynomial.cosine(1, 0) * TrigPolynomial.cosine(0, 1)


NAMED_SYMBOLS = {
    "well": well_symbol,
    "double_well": double_well_symbol,
    "quartic_well": lambda: well_symbol() ** 2,
    "cos_x1": lambda: TrigPolynomial.cosine(1, 0),
    "cos_x2": lambda: TrigPolynomial.cosine(0, 1),
    "one": lambda: TrigPolynomial.constant(1.0),
}
