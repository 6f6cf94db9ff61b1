"""Position-space eigenfunctions and metric inner products by quadrature.

The single-mode eigenfunctions are Hermite functions of the complex
coordinate ``X = x + iA`` carrying an extra ``exp(B X)`` factor.  The metric
inner product is the integral along the shifted line ``Im X = A``; parity
sends the real integration variable ``x`` to ``-x`` and ``V`` acts on the
degree-``m`` eigenfunction as the sign ``(-1)**m``.  These integrals give an
independent route to the Gram matrix that :mod:`pseudoherm.model` computes
from the truncated metric.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InsufficientQuadratureError, ParameterError

MAX_DEGREE = 60
MIN_NODES = 200
PANEL_ORDER = 20
CONVERGENCE_TOL = 1e-10


def hermite(n: int, z):
    """Physicists' Hermite polynomial ``H_n(z)`` by three-term recurrence.

    Accepts scalar or array ``z``, real or complex.
    """
    if n < 0 or n > MAX_DEGREE:
        raise ParameterError(f"Hermite degree must lie in [0, {MAX_DEGREE}], got {n}")
    z = np.asarray(z, dtype=complex)
    h_prev = np.ones_like(z)
    if n == 0:
        return h_prev if h_prev.ndim else complex(h_prev)
    h = 2 * z
    for k in range(1, n):
        h_prev, h = h, 2 * z * h - 2 * k * h_prev
    return h if h.ndim else complex(h)


def _hermite_functions(n: int, z: np.ndarray) -> np.ndarray:
    # H_n(z) / sqrt(2^n n!) via the normalized recurrence, avoids overflow
    psi_prev = np.ones_like(z)
    if n == 0:
        return psi_prev
    psi = np.sqrt(2.0) * z
    for k in range(1, n):
        psi_prev, psi = psi, np.sqrt(2.0 / (k + 1)) * z * psi - np.sqrt(k / (k + 1)) * psi_prev
    return psi


@dataclass(frozen=True)
class Wavefunction:
    """Eigenfunction of degree ``n`` on the line ``X = x + iA``.

    ``phi_n(X) = pi^(-1/4) (2^n n!)^(-1/2) exp(-X^2/2 + B X) H_n(X)``
    """

    n: int
    A: float
    B: float

    def __post_init__(self):
        if self.n < 0 or self.n > MAX_DEGREE:
            raise ParameterError(f"degree must lie in [0, {MAX_DEGREE}], got {self.n}")

    def at(self, X):
        X = np.asarray(X, dtype=complex)
        # combine exponent and polynomial in log space so a huge Gaussian
        # factor and a tiny polynomial do not meet as inf * 0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            log_poly = np.log(_hermite_functions(self.n, X))
            out = np.pi**-0.25 * np.exp(-X * X / 2 + self.B * X + log_poly)
        return out if out.ndim else complex(out)

    def __call__(self, x):
        """Evaluate at the contour point ``x + iA`` for real ``x``."""
        return self.at(np.asarray(x, dtype=float) + 1j * self.A)


def eval_wavefunction(w: Wavefunction, x):
    return w(x)


class Rule(Enum):
    GAUSS_LEGENDRE = "GaussLegendreComposite"
    TRAPEZOID = "Trapezoid"


def required_half_width(n_max: int, A: float, B: float) -> float:
    return 8 + abs(A) + abs(B) + math.sqrt(2 * n_max + 1)


@dataclass(frozen=True)
class QuadratureScheme:
    half_width: float
    node_count: int = 400
    rule: Rule = Rule.GAUSS_LEGENDRE

    @classmethod
    def for_problem(cls, n_max: int, A: float, B: float, node_count: int = 400, rule=Rule.GAUSS_LEGENDRE):
        return cls(required_half_width(n_max, A, B), node_count, rule)

    def validate(self, n_max: int, A: float, B: float):
        if self.node_count < MIN_NODES:
            raise ParameterError(f"node_count must be >= {MIN_NODES}, got {self.node_count}")
        need = required_half_width(n_max, A, B)
        if self.half_width < need:
            raise ParameterError(f"half_width {self.half_width} below required {need:.4g}")

    def doubled(self) -> "QuadratureScheme":
        return QuadratureScheme(self.half_width, 2 * self.node_count, self.rule)

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        L = self.half_width
        if self.rule is Rule.TRAPEZOID:
            x = np.linspace(-L, L, self.node_count)
            w = np.full_like(x, x[1] - x[0])
            w[[0, -1]] /= 2
            return x, w
        panels = max(1, self.node_count // PANEL_ORDER)
        t, wt = np.polynomial.legendre.leggauss(PANEL_ORDER)
        edges = np.linspace(-L, L, panels + 1)
        half = np.diff(edges) / 2
        mid = (edges[:-1] + edges[1:]) / 2
        x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
        w = (half[:, None] * wt[None, :]).ravel()
        return x, w


def _integrand(n: int, m: int, A: float, B: float, x: np.ndarray) -> np.ndarray:
    phi_n = Wavefunction(n, A, B)(x)
    phi_m_reflected = Wavefunction(m, A, B)(-x)
    return np.conj(phi_n) * (-1) ** m * phi_m_reflected


def _integrate(n, m, A, B, scheme: QuadratureScheme) -> complex:
    x, w = scheme.nodes_weights()
    return complex(np.sum(w * _integrand(n, m, A, B, x)))


def contour_inner_product(n: int, m: int, A: float, B: float, scheme: QuadratureScheme) -> complex:
    """``<n| parity V |m>`` along the line ``Im X = A``.

    Raises
    ------
    InsufficientQuadratureError
        If doubling the node count changes the value by more than 1e-10.
    """
    scheme.validate(max(n, m), A, B)
    value = _integrate(n, m, A, B, scheme)
    refined = _integrate(n, m, A, B, scheme.doubled())
    if abs(refined - value) > CONVERGENCE_TOL:
        raise InsufficientQuadratureError(
            f"<{n}|{m}> changed by {abs(refined - value):.3e} under node doubling"
        )
    return value


def tail_ratio(n: int, m: int, A: float, B: float, half_width: float) -> float:
    """Integrand magnitude at ``|x| = half_width`` relative to its peak."""
    grid = np.linspace(-half_width, half_width, 4001)
    mag = np.abs(_integrand(n, m, A, B, grid))
    return float(max(mag[0], mag[-1]) / mag.max())


@dataclass(frozen=True)
class GramResult:
    matrix: np.ndarray
    max_deviation: float

    def to_json(self) -> str:
        m = self.matrix
        entries = [[float(z.real), float(z.imag)] for z in m.ravel()]
        return json.dumps({"dim": m.shape[0], "basis_tag": {"kind": "SingleMode", "cutoff": m.shape[0]},
                           "entries": entries})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "m", "re", "im", "abs_dev"])
        for (n, m), z in np.ndenumerate(self.matrix):
            w.writerow([n, m, repr(float(z.real)), repr(float(z.imag)), repr(float(abs(z - (n == m))))])
        return buf.getvalue()


def gram_matrix(n_max: int, A: float, B: float, scheme: QuadratureScheme | None = None) -> GramResult:
    """All inner products for degrees ``0..n_max``; ideally the identity."""
    if scheme is None:
        scheme = QuadratureScheme.for_problem(n_max, A, B)
    size = n_max + 1
    G = np.empty((size, size), dtype=complex)
    for n in range(size):
        for m in range(size):
            G[n, m] = contour_inner_product(n, m, A, B, scheme)
    return GramResult(G, float(np.abs(G - np.eye(size)).max()))
