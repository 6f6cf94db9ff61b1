"""Parity-pseudo-Hermitian two-mode oscillator.

The Hamiltonian

    H = (p1^2 + x1^2)/2 + (p2^2 + x2^2)/2 + i[A(x1 + x2) + B(p1 + p2)]

is rewritten with the complex-shifted variables ``X_j = x_j + iA`` and
``P_j = p_j + iB`` as ``H = H1 + H2 + (A^2 + B^2)``.  The metric
``eta_plus = parity @ V`` with ``V = (-1)**(H1 + H2 - 1)`` makes ``H``
self-adjoint; ``a_j = (X_j + iP_j)/sqrt(2)`` and its metric adjoint
``(X_j - iP_j)/sqrt(2)`` are the ladder operators.

All operators are truncated at ``cutoff`` states per mode.  Because H is a
Kronecker sum of single-mode pieces, ``V``, the ground state and the
propagator are assembled from single-mode factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import opalg
from .errors import (
    AnnihilationResidualError,
    InvalidTruncationError,
    MetricNotPositiveError,
    ParameterError,
)
from .opalg import ComplexOperator, MetricBundle, SingleMode, kron
from .reports import Check, SpectrumRow, SpectrumTable

__all__ = [
    "ModelParams",
    "ModelOperators",
    "FockState",
    "build_model",
    "build_metric",
    "single_mode_parity",
    "spectrum_analytic",
    "spectrum_numeric",
    "pair_levels",
    "ground_state",
    "n_particle_state",
    "verify_ladder",
    "verify_model",
    "evolve",
    "evolve_check",
    "v_similarity_check",
]

MIN_CUTOFF = 8
CONSTRUCTION_TOL = 1e-12
ANNIHILATION_ABORT = 1e-4


@dataclass(frozen=True)
class ModelParams:
    A: float
    B: float
    cutoff: int = 30

    def __post_init__(self):
        if not (np.isfinite(self.A) and np.isfinite(self.B)):
            raise ParameterError("A and B must be finite")
        if int(self.cutoff) != self.cutoff or self.cutoff < MIN_CUTOFF:
            raise InvalidTruncationError(
                f"cutoff must be an integer >= {MIN_CUTOFF}, got {self.cutoff}"
            )

    @property
    def shift(self) -> float:
        return self.A**2 + self.B**2


@dataclass(frozen=True, eq=False)
class ModelOperators:
    """Matrices of the commutative model on the two-mode basis.

    ``h_modes`` holds the single-mode ``(P^2 + X^2)/2`` factors; ``H1`` and
    ``H2`` are their embeddings.  ``H_direct`` is the Hamiltonian assembled
    directly from ``x`` and ``p``; ``construction_deviation`` records its
    largest elementwise difference from ``H``.
    """

    params: ModelParams
    x: tuple[ComplexOperator, ComplexOperator]
    p: tuple[ComplexOperator, ComplexOperator]
    X: tuple[ComplexOperator, ComplexOperator]
    P_mom: tuple[ComplexOperator, ComplexOperator]
    H: ComplexOperator
    H1: ComplexOperator
    H2: ComplexOperator
    H_direct: ComplexOperator
    construction_deviation: float
    parity: ComplexOperator
    metric: MetricBundle
    a: tuple[ComplexOperator, ComplexOperator]
    a_ddag: tuple[ComplexOperator, ComplexOperator]
    N: tuple[ComplexOperator, ComplexOperator]
    h_modes: tuple[ComplexOperator, ComplexOperator]

    @property
    def cutoff(self) -> int:
        return self.params.cutoff

    @property
    def V(self) -> ComplexOperator:
        return self.metric.v_op

    @property
    def eta(self) -> ComplexOperator:
        return self.metric.eta_plus


@dataclass(frozen=True)
class FockState:
    amplitudes: np.ndarray
    eta_norm: float
    n1: int = 0
    n2: int = 0


def embed(op: ComplexOperator, mode: int) -> ComplexOperator:
    """Lift a single-mode operator to act on ``mode`` (0 or 1) of two."""
    one = opalg.identity(op.basis)
    return kron(op, one) if mode == 0 else kron(one, op)


def single_mode_parity(cutoff: int) -> ComplexOperator:
    return ComplexOperator(np.diag((-1.0) ** np.arange(cutoff)), SingleMode(cutoff))


def shifted_oscillator(cutoff: int, a_shift: float, b_shift: float) -> ComplexOperator:
    """Single-mode ``(P^2 + X^2)/2`` with ``X = x + i a_shift``, ``P = p + i b_shift``."""
    x, p = opalg.position_momentum(cutoff)
    X = x + 1j * a_shift
    P = p + 1j * b_shift
    return (P @ P + X @ X) / 2


def build_metric(
    h_modes: tuple[ComplexOperator, ComplexOperator], keep: int | None = None
) -> MetricBundle:
    """Metric ``parity @ (-1)**(H1 + H2 - 1)`` from the single-mode pieces.

    ``H1`` and ``H2`` act on different tensor factors and commute, so
    ``(-1)**(H1 + H2 - 1) = (-1)**(H1 - 1/2) (-1)**(H2 - 1/2)`` and each
    factor comes from a well-conditioned single-mode decomposition.  The
    lowest ``cutoff // 2`` single-mode eigenvalues must sit on ``n + 1/2``.

    Raises
    ------
    SpectrumNotIntegerError
        If an interior eigenvalue of ``H_j - 1/2`` is not an integer.
    MetricNotPositiveError
        If the Hermitized interior block of the metric is not positive.
    """
    cutoff = h_modes[0].basis.cutoff
    checked = opalg.default_keep(cutoff)
    v1, v2 = (opalg.matrix_power_of_minus_one(h, 0.5, checked=checked) for h in h_modes)
    par = single_mode_parity(cutoff)
    bundle = MetricBundle.from_parts(kron(par, par), kron(v1, v2), keep)
    if not bundle.min_metric_eig > 0:
        raise MetricNotPositiveError(
            f"interior metric eigenvalue {bundle.min_metric_eig:.3e} is not positive"
        )
    return bundle


def hamiltonian_routes(params: ModelParams):
    """Build H twice: from ``x, p`` directly and from the shifted ``X, P``.

    Returns ``(x, p, X, P, H1, H2, H, H_direct)``; the two Hamiltonians
    should agree to rounding at every cutoff.
    """
    n = params.cutoff
    A, B = params.A, params.B
    xs, ps = opalg.position_momentum(n)
    x = (embed(xs, 0), embed(xs, 1))
    p = (embed(ps, 0), embed(ps, 1))

    H_direct = (
        (p[0] @ p[0] + x[0] @ x[0]) / 2
        + (p[1] @ p[1] + x[1] @ x[1]) / 2
        + 1j * (A * (x[0] + x[1]) + B * (p[0] + p[1]))
    )
    X = tuple(xj + 1j * A for xj in x)
    P = tuple(pj + 1j * B for pj in p)
    H1 = (P[0] @ P[0] + X[0] @ X[0]) / 2
    H2 = (P[1] @ P[1] + X[1] @ X[1]) / 2
    H = H1 + H2 + params.shift
    return x, p, X, P, H1, H2, H, H_direct


def build_model(params: ModelParams) -> ModelOperators:
    n = params.cutoff
    A, B = params.A, params.B
    x, p, X, P, H1, H2, H, H_direct = hamiltonian_routes(params)
    dev = float(np.abs(H.matrix - H_direct.matrix).max())

    h_modes = (shifted_oscillator(n, A, B), shifted_oscillator(n, A, B))
    metric = build_metric(h_modes)

    a = tuple((Xj + 1j * Pj) / np.sqrt(2) for Xj, Pj in zip(X, P))
    a_ddag = tuple((Xj - 1j * Pj) / np.sqrt(2) for Xj, Pj in zip(X, P))
    N = tuple(ad @ aj for ad, aj in zip(a_ddag, a))
    return ModelOperators(
        params=params,
        x=x,
        p=p,
        X=X,
        P_mom=P,
        H=H,
        H1=H1,
        H2=H2,
        H_direct=H_direct,
        construction_deviation=dev,
        parity=metric.parity,
        metric=metric,
        a=a,
        a_ddag=a_ddag,
        N=N,
        h_modes=h_modes,
    )


def spectrum_analytic(n1: int, n2: int, params: ModelParams) -> float:
    return (n1 + n2 + 1) + params.shift


def pair_levels(eigs: np.ndarray, labels, energy) -> tuple[SpectrumRow, ...]:
    """Zip sorted eigenvalues with levels sorted by energy, then label."""
    keyed = sorted(labels, key=lambda nn: (energy(*nn), nn))
    return tuple(
        SpectrumRow(n1, n2, float(energy(n1, n2)), complex(z))
        for (n1, n2), z in zip(keyed, eigs)
    )


def _labels_up_to(count: int):
    # every level with n1 + n2 <= k, k large enough to cover `count` states
    k = 0
    while (k + 1) * (k + 2) // 2 < count:
        k += 1
    k += 1
    return [(n1, s - n1) for s in range(k + 1) for n1 in range(s + 1)]


def _check_count(count: int, cutoff: int):
    if count < 1 or count > cutoff**2 // 4:
        raise InvalidTruncationError(
            f"count must lie in [1, {cutoff**2 // 4}] at cutoff {cutoff}, got {count}"
        )


def spectrum_numeric(ops: ModelOperators, count: int) -> SpectrumTable:
    """Lowest ``count`` eigenvalues of the truncated H against the closed form."""
    _check_count(count, ops.cutoff)
    eigs = opalg.sorted_eigenvalues(ops.H)[:count]
    labels = _labels_up_to(count)
    rows = pair_levels(eigs, labels, lambda n1, n2: spectrum_analytic(n1, n2, ops.params))
    return SpectrumTable(rows[:count])


def _normalize(psi: np.ndarray, metric: MetricBundle) -> tuple[np.ndarray, float]:
    norm = metric.inner(psi, psi)
    if not norm.real > 0:
        raise MetricNotPositiveError(f"state has metric norm {norm:.3e}")
    psi = psi / np.sqrt(norm.real)
    k = int(np.argmax(np.abs(psi)))
    psi = psi * (abs(psi[k]) / psi[k])
    return psi, metric.inner(psi, psi).real


def ground_state(ops: ModelOperators) -> FockState:
    """Metric-normalized lowest eigenvector of H.

    H is the Kronecker sum of its single-mode pieces, so the product of the
    single-mode lowest eigenvectors is an exact eigenvector of the
    truncated H.
    """
    g = [opalg.eig_general(h).right_vectors[:, 0] for h in ops.h_modes]
    psi, norm = _normalize(np.kron(g[0], g[1]), ops.metric)
    for j, aj in enumerate(ops.a):
        r = np.linalg.norm(aj @ psi)
        if r >= ANNIHILATION_ABORT:
            raise AnnihilationResidualError(
                f"|a_{j + 1} psi0| = {r:.3e}; increase the cutoff"
            )
    return FockState(psi, norm, 0, 0)


def n_particle_state(
    ops: ModelOperators, n1: int, n2: int, ground: FockState | None = None
) -> FockState:
    """``(a1'')**n1 (a2'')**n2 |0> / sqrt(n1! n2!)`` with ``''`` the metric adjoint."""
    if n1 < 0 or n2 < 0:
        raise ValueError("occupation numbers must be non-negative")
    if n1 + n2 > ops.cutoff // 2:
        raise InvalidTruncationError(
            f"n1 + n2 = {n1 + n2} exceeds cutoff/2 = {ops.cutoff // 2}"
        )
    if ground is None:
        ground = ground_state(ops)
    psi = ground.amplitudes
    for _ in range(n1):
        psi = ops.a_ddag[0] @ psi
    for _ in range(n2):
        psi = ops.a_ddag[1] @ psi
    psi = psi / math.sqrt(math.factorial(n1) * math.factorial(n2))
    return FockState(psi, ops.metric.inner(psi, psi).real, n1, n2)


def verify_ladder(ops: ModelOperators, n_max: int, tol: float = 1e-6) -> list[Check]:
    """Ladder algebra on the interior block plus statewise ladder action."""
    if n_max + 1 > ops.cutoff // 2:
        raise InvalidTruncationError(f"n_max + 1 must not exceed cutoff/2, got {n_max}")
    keep = opalg.default_keep(ops.cutoff)
    one = opalg.identity(ops.H.basis)
    zero = 0 * one
    a, ad, N = ops.a, ops.a_ddag, ops.N
    dev = lambda m: opalg.interior_deviation(m, keep)
    checks = []
    for j in range(2):
        for k in range(2):
            delta = 1.0 if j == k else 0.0
            tag = f"{j + 1}{k + 1}"
            checks += [
                Check(f"[a_j,a_k^dd]-delta_{tag}", dev(opalg.commutator(a[j], ad[k]) - delta * one), tol),
                Check(f"[a_j,a_k]_{tag}", dev(opalg.commutator(a[j], a[k])), tol),
                Check(f"[a_j^dd,a_k^dd]_{tag}", dev(opalg.commutator(ad[j], ad[k])), tol),
                Check(
                    f"[N_j,a_k^dd]-delta*a_j^dd_{tag}",
                    dev(opalg.commutator(N[j], ad[k]) - (ad[j] if j == k else zero)),
                    tol,
                ),
                Check(
                    f"[N_j,a_k]+delta*a_j_{tag}",
                    dev(opalg.commutator(N[j], a[k]) + (a[j] if j == k else zero)),
                    tol,
                ),
            ]

    ground = ground_state(ops)
    states = {}

    def state(n1, n2):
        if (n1, n2) not in states:
            states[n1, n2] = n_particle_state(ops, n1, n2, ground).amplitudes
        return states[n1, n2]

    up = [0.0, 0.0]
    down = [0.0, 0.0]
    for s in range(n_max + 1):
        for n1 in range(s + 1):
            n2 = s - n1
            psi = state(n1, n2)
            up[0] = max(up[0], np.linalg.norm(ad[0] @ psi - np.sqrt(n1 + 1) * state(n1 + 1, n2)))
            up[1] = max(up[1], np.linalg.norm(ad[1] @ psi - np.sqrt(n2 + 1) * state(n1, n2 + 1)))
            lo1 = np.sqrt(n1) * state(n1 - 1, n2) if n1 else 0.0
            lo2 = np.sqrt(n2) * state(n1, n2 - 1) if n2 else 0.0
            down[0] = max(down[0], np.linalg.norm(a[0] @ psi - lo1))
            down[1] = max(down[1], np.linalg.norm(a[1] @ psi - lo2))
    for j in range(2):
        checks.append(Check(f"a_{j + 1}^dd|n> raising", float(up[j]), tol, "l2_state"))
        checks.append(Check(f"a_{j + 1}|n> lowering", float(down[j]), tol, "l2_state"))
    return checks


def verify_model(ops: ModelOperators) -> list[Check]:
    """Construction, pseudo-Hermiticity and metric identities of the model."""
    keep = opalg.default_keep(ops.cutoff)
    skeep = opalg.sandwich_keep(ops.cutoff)
    dev = lambda m, k=keep: opalg.interior_deviation(m, k)
    H, V, eta, par = ops.H, ops.V, ops.eta, ops.parity
    checks = [
        Check("H_direct-H_shifted", ops.construction_deviation, 1e-12, "max_full"),
        Check("P-pseudo-Hermiticity", (par @ H - H.dag @ par).max_abs(), 1e-12, "max_full"),
        Check("eta_hermiticity", ops.metric.herm_deviation, 1e-6),
        Check("eta_min_eigenvalue", ops.metric.min_metric_eig, 0.0, "min_eig_interior", "lower"),
        # informational: flags ill-conditioned metrics, fails only if not finite
        Check("eta_condition", ops.metric.condition, math.inf, "condition_interior"),
        Check("[H,V]", dev(opalg.commutator(H, V)), 1e-6),
        Check("eta*H-H^dag*eta", dev(eta @ H - H.dag @ eta), 1e-6),
        Check("V^2-I", dev(V @ V - 1.0, skeep), 1e-6),
    ]
    one = opalg.identity(H.basis)
    for j in range(2):
        for k in range(2):
            delta = 1j if j == k else 0.0
            checks.append(Check(f"[X_{j + 1},P_{k + 1}]-i*delta",
                                dev(opalg.commutator(ops.X[j], ops.P_mom[k]) - delta * one), 1e-10))
    for j in range(2):
        pa = opalg.pseudo_adjoint(ops.a[j], ops.metric)
        checks.append(Check(f"pseudo_adjoint(a_{j + 1})-a_{j + 1}^dd",
                            dev(pa - ops.a_ddag[j], skeep), 1e-6))
        Nj = ops.N[j]
        checks.append(Check(f"N_{j + 1}-N_{j + 1}^dag", (Nj - Nj.dag).max_abs(), 0.01,
                            "max_full", "lower"))
        checks.append(Check(f"N_{j + 1}-pseudo_adjoint(N_{j + 1})",
                            dev(Nj - opalg.pseudo_adjoint(Nj, ops.metric), skeep), 1e-6))
    return checks


def propagator_factors(ops: ModelOperators, t: float):
    """Single-mode factors of ``exp(-iHt)`` and the scalar phase."""
    u = [opalg.expm(-1j * t * h).matrix for h in ops.h_modes]
    return u[0], u[1], np.exp(-1j * ops.params.shift * t)


def evolve(ops: ModelOperators, psi0: np.ndarray, t: float) -> np.ndarray:
    """``exp(-iHt) psi0`` via ``exp(-iHt) = e^{-i(A^2+B^2)t} exp(-iH1 t) exp(-iH2 t)``."""
    u1, u2, phase = propagator_factors(ops, t)
    n = ops.cutoff
    psi = np.asarray(psi0).reshape(n, n)
    return phase * (u1 @ psi @ u2.T).ravel()


def evolve_check(ops: ModelOperators, psi0: FockState, t_grid) -> np.ndarray:
    """Metric norm ``<psi(t)| eta |psi(t)>`` along ``t_grid``.

    Returns the complex values so callers can confirm the imaginary parts
    vanish; a metric-unitary evolution keeps them equal to ``psi0.eta_norm``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if not np.all(np.isfinite(t_grid)):
        raise ValueError("time grid must be finite")
    return np.array(
        [ops.metric.inner(psi, psi) for psi in (evolve(ops, psi0.amplitudes, t) for t in t_grid)]
    )


def v_similarity_check(ops: ModelOperators, keep: int | None = None) -> float:
    """Interior distance between V and ``S (-1)^(n1+n2) S^{-1}``.

    ``S = exp(-A(p1+p2)) exp(B(x1+x2))`` maps ``x_j`` to ``X_j`` and ``p_j`` to
    ``P_j`` by similarity, which gives V independently of any eigensolver.
    """
    A, B = ops.params.A, ops.params.B
    xs = ops.x[0] + ops.x[1]
    ps = ops.p[0] + ops.p[1]
    S = opalg.expm(-A * ps) @ opalg.expm(B * xs)
    S_inv = opalg.expm(-B * xs) @ opalg.expm(A * ps)
    v_alt = S @ ops.parity @ S_inv
    if keep is None:
        keep = opalg.sandwich_keep(ops.cutoff)
    return opalg.interior_deviation(v_alt - ops.V, keep)
