"""Dense operator algebra on truncated Fock spaces.

Every operator is a :class:`ComplexOperator`: a read-only complex matrix
tagged with the basis it acts on.  A single mode with cutoff ``n`` has
dimension ``n``; the two-mode tensor basis has dimension ``n**2`` with the
mode-1 index running slow.

Truncated ladder matrices violate ``[b, b^dagger] = 1`` in the last row and
column, so identities are compared on an interior block of low Fock indices
(see :func:`interior_block`).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    BasisMismatchError,
    InvalidTruncationError,
    NearDefectiveMatrixError,
    ScalingFailureError,
    SpectrumNotIntegerError,
)

__all__ = [
    "Basis",
    "ComplexOperator",
    "SpectralDecomposition",
    "MetricBundle",
    "annihilation_matrix",
    "position_momentum",
    "identity",
    "kron",
    "commutator",
    "eig_general",
    "sorted_eigenvalues",
    "matrix_power_of_minus_one",
    "pseudo_adjoint",
    "interior_block",
    "interior_deviation",
    "default_keep",
    "sandwich_keep",
    "expm",
    "identity_metric",
]

# eigenvector matrices conditioned worse than this are treated as defective
DEFECTIVE_CONDITION = 1e8
PAIR_TOL = 1e-10
BIORTHOGONAL_TOL = 1e-8
INTEGER_TOL = 0.1


@dataclass(frozen=True)
class Basis:
    """Truncated Fock basis: one mode or the two-mode tensor product."""

    modes: int
    cutoff: int

    def __post_init__(self):
        if self.modes not in (1, 2):
            raise InvalidTruncationError(f"modes must be 1 or 2, got {self.modes}")
        if self.cutoff < 1:
            raise InvalidTruncationError(f"cutoff must be positive, got {self.cutoff}")

    @property
    def dim(self) -> int:
        return self.cutoff**self.modes

    def to_dict(self) -> dict:
        kind = "SingleMode" if self.modes == 1 else "TwoMode"
        return {"kind": kind, "cutoff": self.cutoff}

    @classmethod
    def from_dict(cls, d: dict) -> "Basis":
        return cls(1 if d["kind"] == "SingleMode" else 2, int(d["cutoff"]))


def SingleMode(cutoff: int) -> Basis:
    return Basis(1, cutoff)


def TwoMode(cutoff: int) -> Basis:
    return Basis(2, cutoff)


class ComplexOperator:
    """Immutable dense complex matrix on a truncated Fock basis.

    Supports ``+``, ``-``, ``@`` between operators on the same basis and
    multiplication by scalars.  ``op.dag`` is the conjugate transpose and
    ``op.matrix`` a read-only view of the entries.
    """

    __slots__ = ("_m", "basis")

    def __init__(self, matrix, basis: Basis):
        m = np.array(matrix, dtype=complex)
        if m.shape != (basis.dim, basis.dim):
            raise InvalidTruncationError(
                f"matrix shape {m.shape} does not match basis dim {basis.dim}"
            )
        if not np.all(np.isfinite(m)):
            raise ScalingFailureError("operator has non-finite entries")
        m.setflags(write=False)
        self._m = m
        self.basis = basis

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def dag(self) -> "ComplexOperator":
        return ComplexOperator(self._m.conj().T, self.basis)

    def _check(self, other: "ComplexOperator"):
        if not isinstance(other, ComplexOperator):
            return NotImplemented
        if other.basis != self.basis:
            raise BasisMismatchError(f"{self.basis} vs {other.basis}")
        return other

    def __matmul__(self, other):
        if isinstance(other, np.ndarray) and other.ndim == 1:
            return self._m @ other
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ComplexOperator(self._m @ other._m, self.basis)

    def __add__(self, other):
        if np.isscalar(other):
            return ComplexOperator(self._m + other * np.eye(self.dim), self.basis)
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ComplexOperator(self._m + other._m, self.basis)

    __radd__ = __add__

    def __sub__(self, other):
        if np.isscalar(other):
            return ComplexOperator(self._m - other * np.eye(self.dim), self.basis)
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ComplexOperator(self._m - other._m, self.basis)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return ComplexOperator(scalar * self._m, self.basis)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return ComplexOperator(self._m / scalar, self.basis)

    def __neg__(self):
        return ComplexOperator(-self._m, self.basis)

    def __repr__(self):
        return f"ComplexOperator(dim={self.dim}, basis={self.basis})"

    def max_abs(self) -> float:
        return float(np.abs(self._m).max())

    def to_json(self) -> str:
        """Row-major ``[re, im]`` dump used for test fixtures."""
        entries = [[float(z.real), float(z.imag)] for z in self._m.ravel()]
        return json.dumps(
            {"dim": self.dim, "basis_tag": self.basis.to_dict(), "entries": entries}
        )

    @classmethod
    def from_json(cls, text: str) -> "ComplexOperator":
        d = json.loads(text)
        basis = Basis.from_dict(d["basis_tag"])
        flat = np.array([complex(re, im) for re, im in d["entries"]])
        return cls(flat.reshape(d["dim"], d["dim"]), basis)


def identity(basis: Basis) -> ComplexOperator:
    return ComplexOperator(np.eye(basis.dim), basis)


def annihilation_matrix(cutoff: int) -> ComplexOperator:
    """Truncated annihilation operator with ``sqrt(n)`` on the superdiagonal."""
    if cutoff < 2:
        raise InvalidTruncationError(f"cutoff must be >= 2, got {cutoff}")
    b = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1)
    return ComplexOperator(b, SingleMode(cutoff))


def position_momentum(cutoff: int) -> tuple[ComplexOperator, ComplexOperator]:
    """Hermitian ``x = (b + b^dagger)/sqrt(2)`` and ``p = i(b^dagger - b)/sqrt(2)``."""
    b = annihilation_matrix(cutoff)
    bd = b.dag
    x = (b + bd) / np.sqrt(2)
    p = 1j * (bd - b) / np.sqrt(2)
    return x, p


def kron(a: ComplexOperator, b: ComplexOperator) -> ComplexOperator:
    """Two-mode tensor product, mode-1 index slow."""
    if a.basis.modes != 1 or b.basis.modes != 1:
        raise BasisMismatchError("kron expects two single-mode operators")
    if a.basis.cutoff != b.basis.cutoff:
        raise BasisMismatchError(
            f"cutoffs differ: {a.basis.cutoff} vs {b.basis.cutoff}"
        )
    return ComplexOperator(np.kron(a.matrix, b.matrix), TwoMode(a.basis.cutoff))


def commutator(a: ComplexOperator, b: ComplexOperator) -> ComplexOperator:
    return a @ b - b @ a


def default_keep(cutoff: int) -> int:
    """Interior size for identities among banded (ladder-built) operators."""
    return cutoff // 2


def sandwich_keep(cutoff: int) -> int:
    """Interior size for identities conjugated by the metric.

    The metric is a dense operator whose truncation error spreads far
    further into the low-index block than that of banded ladder matrices.
    """
    return cutoff // 3


def interior_block(m: ComplexOperator, keep: int) -> np.ndarray:
    """Sub-matrix over basis states whose every mode index is below ``keep``."""
    n = m.basis.cutoff
    if keep < 1 or keep >= n:
        raise InvalidTruncationError(f"keep must lie in [1, {n}), got {keep}")
    if m.basis.modes == 1:
        idx = np.arange(keep)
    else:
        i, j = np.meshgrid(np.arange(keep), np.arange(keep), indexing="ij")
        idx = (i * n + j).ravel()
    return m.matrix[np.ix_(idx, idx)]


def interior_indices(basis: Basis, keep: int) -> np.ndarray:
    n = basis.cutoff
    if basis.modes == 1:
        return np.arange(keep)
    i, j = np.meshgrid(np.arange(keep), np.arange(keep), indexing="ij")
    return (i * n + j).ravel()


def interior_deviation(m: ComplexOperator, keep: int) -> float:
    """Largest absolute entry of the interior block."""
    return float(np.abs(interior_block(m, keep)).max())


@dataclass(frozen=True)
class SpectralDecomposition:
    """Biorthonormal eigendecomposition ``M = right @ diag(eigenvalues) @ left``."""

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    condition: float

    def reconstruct(self) -> np.ndarray:
        return (self.right_vectors * self.eigenvalues) @ self.left_vectors

    def apply(self, f) -> np.ndarray:
        """Spectral calculus: ``right @ diag(f(eigenvalues)) @ left``."""
        return (self.right_vectors * f(self.eigenvalues)) @ self.left_vectors


def _spectral_order(w: np.ndarray) -> np.ndarray:
    # real part first, imaginary part breaks ties; the real key is rounded
    # so that conjugate pairs are not ordered by round-off
    return np.lexsort((w.imag, np.round(w.real, 9)))


def sorted_eigenvalues(m: ComplexOperator) -> np.ndarray:
    """Eigenvalues only, in the same order :func:`eig_general` uses."""
    w = scipy.linalg.eigvals(m.matrix)
    return w[_spectral_order(w)]


def _pair_residual(a, w, vr) -> float:
    scale = max(float(np.abs(a).max()), np.finfo(float).tiny)
    return float(np.abs(a @ vr - vr * w).max() / scale)


def eig_general(m: ComplexOperator) -> SpectralDecomposition:
    """Eigendecomposition of a possibly non-normal matrix.

    The left vectors are the rows of the inverse of the right-vector matrix,
    which makes them biorthonormal to the right vectors even inside
    degenerate eigenspaces.

    Raises
    ------
    NearDefectiveMatrixError
        If the right-vector matrix has condition number above 1e8, the
        biorthogonality residual exceeds 1e-8, or no solver returns
        eigenpairs with relative residual below 1e-10.
    """
    a = m.matrix
    w, vr = scipy.linalg.eig(a)
    if _pair_residual(a, w, vr) > PAIR_TOL:
        # balancing can go wrong when entries span many decades; QZ does not balance
        w, vr = scipy.linalg.eig(a, np.eye(len(a)))
        vr = vr / np.linalg.norm(vr, axis=0)
        if not np.all(np.isfinite(w)) or _pair_residual(a, w, vr) > PAIR_TOL:
            raise NearDefectiveMatrixError("eigenpair residual too large", condition=np.inf)
    order = _spectral_order(w)
    w, vr = w[order], vr[:, order]
    cond = float(np.linalg.cond(vr))
    if not np.isfinite(cond) or cond > DEFECTIVE_CONDITION:
        raise NearDefectiveMatrixError(
            f"eigenvector matrix condition {cond:.3e} exceeds {DEFECTIVE_CONDITION:.0e}",
            condition=cond,
        )
    left = np.linalg.solve(vr, np.eye(len(w)))
    resid = np.abs(left @ vr - np.eye(len(w))).max()
    if resid >= BIORTHOGONAL_TOL:
        raise NearDefectiveMatrixError(
            f"biorthogonal normalization residual {resid:.3e}", condition=cond
        )
    return SpectralDecomposition(w, vr, left, cond)


def matrix_power_of_minus_one(
    m: ComplexOperator, shift: float, *, checked: int | None = None
) -> ComplexOperator:
    """Evaluate ``(-1)**(M - shift)`` on a spectrum of integers.

    Each eigenvalue ``lam`` of ``M - shift`` contributes the sign
    ``(-1)**round(lam.real)``.  The lowest ``checked`` eigenvalues (all of
    them by default) must lie within 0.1 of an integer; truncated operators
    pass ``checked`` to exempt the spurious eigenvalues living at the
    truncation edge.
    """
    dec = eig_general(m)
    lam = dec.eigenvalues - shift
    n_checked = len(lam) if checked is None else min(checked, len(lam))
    head = lam[:n_checked]
    off = np.abs(head - np.round(head.real))
    if n_checked and off.max() >= INTEGER_TOL:
        k = int(np.argmax(off))
        raise SpectrumNotIntegerError(
            f"eigenvalue {head[k]:.6g} (index {k}) is {off[k]:.3g} from an integer",
            worst=complex(head[k]),
        )
    signs = np.where(np.round(lam.real).astype(np.int64) % 2 == 0, 1.0, -1.0)
    return ComplexOperator(dec.apply(lambda _: signs), m.basis)


def expm(m: ComplexOperator) -> ComplexOperator:
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = scipy.linalg.expm(m.matrix)
        except FloatingPointError as exc:
            raise ScalingFailureError(f"matrix exponential overflowed: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise ScalingFailureError("matrix exponential produced non-finite entries")
    return ComplexOperator(out, m.basis)


@dataclass(frozen=True)
class MetricBundle:
    """Metric ``eta_plus = parity @ v_op`` with diagnostics on an interior block."""

    parity: ComplexOperator
    v_op: ComplexOperator
    eta_plus: ComplexOperator
    eta_inverse: ComplexOperator
    herm_deviation: float
    min_metric_eig: float
    condition: float
    keep: int
    _lu: tuple = field(repr=False, compare=False, default=None)

    @classmethod
    def from_parts(
        cls, parity: ComplexOperator, v_op: ComplexOperator, keep: int | None = None
    ) -> "MetricBundle":
        eta = parity @ v_op
        if keep is None:
            keep = default_keep(eta.basis.cutoff)
        lu = scipy.linalg.lu_factor(eta.matrix)
        inv = scipy.linalg.lu_solve(lu, np.eye(eta.dim))
        block = interior_block(eta, keep)
        herm = float(np.abs(block - block.conj().T).max())
        ev = np.linalg.eigvalsh((block + block.conj().T) / 2)
        cond = float(ev[-1] / ev[0]) if ev[0] > 0 else float("inf")
        return cls(
            parity,
            v_op,
            eta,
            ComplexOperator(inv, eta.basis),
            herm,
            float(ev[0]),
            cond,
            keep,
            lu,
        )

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Apply ``eta_plus^{-1}`` by LU back-substitution."""
        return scipy.linalg.lu_solve(self._lu, rhs)

    def inner(self, phi: np.ndarray, psi: np.ndarray) -> complex:
        """Generalized inner product ``<phi| eta_plus |psi>``."""
        return complex(np.vdot(phi, self.eta_plus.matrix @ psi))


def identity_metric(basis: Basis) -> MetricBundle:
    one = identity(basis)
    keep = max(1, default_keep(basis.cutoff))
    return MetricBundle.from_parts(one, one, keep)


def pseudo_adjoint(a: ComplexOperator, eta: MetricBundle) -> ComplexOperator:
    """Metric adjoint ``eta^{-1} a^dagger eta``.

    The inverse is applied through the stored LU factors rather than by
    multiplying with ``eta_inverse``; the metric has entries spanning many
    orders of magnitude and the explicit product loses digits.
    """
    if a.basis != eta.eta_plus.basis:
        raise BasisMismatchError(f"{a.basis} vs metric on {eta.eta_plus.basis}")
    rhs = a.matrix.conj().T @ eta.eta_plus.matrix
    return ComplexOperator(eta.solve(rhs), a.basis)
