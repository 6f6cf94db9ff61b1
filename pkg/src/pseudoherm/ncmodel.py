"""Noncommutative extension of the two-mode oscillator, to first order.

Noncommuting coordinates and momenta are represented on the commutative
Fock space through the Bopp shift

    xhat_j = x_j - (theta/2) eps_jk p_k,   phat_j = p_j + (theta_tilde/2) eps_jk x_k

with ``eps_12 = -eps_21 = 1``.  Substituting into the oscillator and keeping
first order in ``(theta, theta_tilde)`` couples the two modes through
``(theta + theta_tilde)/2 (x2 p1 - x1 p2)``.  The shifted variables
``calX_j = x_j + i calA_j`` and ``calP_j = p_j + i calB_j`` partially
diagonalize the result, and chiral ladder operators finish the job, giving
the level formula ``(n1 + n2 + 1) + (theta + theta_tilde)(n1 - n2)/2 + A^2 + B^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import opalg
from .errors import InvalidTruncationError, MetricNotPositiveError, ParameterError
from .model import (
    ModelParams,
    _check_count,
    _labels_up_to,
    build_metric,
    embed,
    pair_levels,
    shifted_oscillator,
)
from .opalg import ComplexOperator, MetricBundle
from .reports import Check, SpectrumTable

THETA_GUARD = 0.2
EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])
ETA = np.diag([1.0, -1.0])


@dataclass(frozen=True)
class NCParams:
    base: ModelParams
    theta: float = 0.0
    theta_tilde: float = 0.0

    def __post_init__(self):
        for name in ("theta", "theta_tilde"):
            v = getattr(self, name)
            if not np.isfinite(v) or abs(v) > THETA_GUARD:
                raise ParameterError(f"|{name}| must be <= {THETA_GUARD}, got {v}")

    @property
    def A(self) -> float:
        return self.base.A

    @property
    def B(self) -> float:
        return self.base.B

    @property
    def cutoff(self) -> int:
        return self.base.cutoff

    @property
    def cal_A(self) -> tuple[float, float]:
        half = self.B * self.theta / 2
        return (self.A + half, self.A - half)

    @property
    def cal_B(self) -> tuple[float, float]:
        half = self.A * self.theta_tilde / 2
        return (self.B - half, self.B + half)

    @property
    def coupling(self) -> float:
        return (self.theta + self.theta_tilde) / 2

    def order2_constant(self) -> float:
        """Constant part of the second-order residue between the two NC forms."""
        A, B, t, tt = self.A, self.B, self.theta, self.theta_tilde
        return (t + tt) * (A**2 * tt + B**2 * t) / 2 - (B**2 * t**2 + A**2 * tt**2) / 4

    def with_theta(self, theta: float, theta_tilde: float) -> "NCParams":
        return NCParams(self.base, theta, theta_tilde)


def _commutative_xp(cutoff: int):
    xs, ps = opalg.position_momentum(cutoff)
    return (embed(xs, 0), embed(xs, 1)), (embed(ps, 0), embed(ps, 1))


def bopp_shift(params: NCParams, x, p):
    """First-order representation of the noncommuting pairs on the Fock space."""
    t, tt = params.theta, params.theta_tilde
    xhat = tuple(x[j] - (t / 2) * (EPS[j, 0] * p[0] + EPS[j, 1] * p[1]) for j in range(2))
    phat = tuple(p[j] + (tt / 2) * (EPS[j, 0] * x[0] + EPS[j, 1] * x[1]) for j in range(2))
    return xhat, phat


def build_nc_hamiltonian(params: NCParams) -> ComplexOperator:
    """Coupled Hamiltonian with the two first-order correction terms."""
    A, B = params.A, params.B
    t, tt = params.theta, params.theta_tilde
    x, p = _commutative_xp(params.cutoff)
    H0 = (
        (p[0] @ p[0] + x[0] @ x[0]) / 2
        + (p[1] @ p[1] + x[1] @ x[1]) / 2
        + 1j * (A * (x[0] + x[1]) + B * (p[0] + p[1]))
    )
    coupling = params.coupling * (x[1] @ p[0] - x[0] @ p[1])
    skew = -1j * ((B * tt / 2) * (x[0] - x[1]) - (A * t / 2) * (p[0] - p[1]))
    return H0 + coupling + skew


class _FirstOrder:
    """Operator expanded in ``(theta, theta_tilde)``, truncated past first order.

    ``terms`` maps an order pair ``(i, j)`` to the matrix multiplying
    ``theta**i * theta_tilde**j``.
    """

    def __init__(self, terms):
        self.terms = {k: v for k, v in terms.items() if sum(k) < 2}

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return _FirstOrder(out)

    def __matmul__(self, other):
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = (k1[0] + k2[0], k1[1] + k2[1])
                if sum(k) < 2:
                    out[k] = out[k] + v1 @ v2 if k in out else v1 @ v2
        return _FirstOrder(out)

    def scale(self, c):
        return _FirstOrder({k: c * v for k, v in self.terms.items()})

    def evaluate(self, theta, theta_tilde):
        return sum(theta**i * theta_tilde**j * v for (i, j), v in self.terms.items())


def build_nc_hamiltonian_via_bopp(params: NCParams) -> ComplexOperator:
    """Same Hamiltonian obtained by expanding the shifted operators in series.

    The Bopp-shifted pairs are substituted into the oscillator and every
    term of combined order two or more in ``(theta, theta_tilde)`` dropped.
    """
    A, B = params.A, params.B
    x, p = _commutative_xp(params.cutoff)
    xhat = [
        _FirstOrder({(0, 0): x[j], (1, 0): -0.5 * (EPS[j, 0] * p[0] + EPS[j, 1] * p[1])})
        for j in range(2)
    ]
    phat = [
        _FirstOrder({(0, 0): p[j], (0, 1): 0.5 * (EPS[j, 0] * x[0] + EPS[j, 1] * x[1])})
        for j in range(2)
    ]
    H = (phat[0] @ phat[0] + xhat[0] @ xhat[0] + phat[1] @ phat[1] + xhat[1] @ xhat[1]).scale(0.5)
    H = H + (xhat[0] + xhat[1]).scale(1j * A) + (phat[0] + phat[1]).scale(1j * B)
    return H.evaluate(params.theta, params.theta_tilde)


@dataclass(frozen=True, eq=False)
class NCOperators:
    params: NCParams
    H_nc: ComplexOperator
    H_partial: ComplexOperator
    calX: tuple[ComplexOperator, ComplexOperator]
    calP: tuple[ComplexOperator, ComplexOperator]
    calH1: ComplexOperator
    calH2: ComplexOperator
    metric: MetricBundle
    bold_a: tuple[ComplexOperator, ComplexOperator]
    bold_a_ddag: tuple[ComplexOperator, ComplexOperator]
    calN: tuple[ComplexOperator, ComplexOperator]
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

    @property
    def angular(self) -> ComplexOperator:
        """Coupling operator ``calX2 calP1 - calX1 calP2``."""
        return self.calX[1] @ self.calP[0] - self.calX[0] @ self.calP[1]


def chiral_ladder(calX, calP):
    """``bold_a_j`` and the metric adjoint ``bold_a_j''`` from the shifted pairs."""
    a, ad = [], []
    for j in range(2):
        a.append(sum(
            ((ETA[j, k] + 1j * EPS[j, k]) * calX[k] + (1j * ETA[j, k] - EPS[j, k]) * calP[k]) / 2
            for k in range(2)
        ))
        ad.append(sum(
            ((ETA[j, k] - 1j * EPS[j, k]) * calX[k] - (1j * ETA[j, k] + EPS[j, k]) * calP[k]) / 2
            for k in range(2)
        ))
    return tuple(a), tuple(ad)


def build_nc_structure(params: NCParams) -> NCOperators:
    n = params.cutoff
    x, p = _commutative_xp(n)
    cA, cB = params.cal_A, params.cal_B
    calX = tuple(x[j] + 1j * cA[j] for j in range(2))
    calP = tuple(p[j] + 1j * cB[j] for j in range(2))
    calH1 = (calP[0] @ calP[0] + calX[0] @ calX[0]) / 2
    calH2 = (calP[1] @ calP[1] + calX[1] @ calX[1]) / 2
    H_partial = (
        calH1
        + calH2
        + params.coupling * (calX[1] @ calP[0] - calX[0] @ calP[1])
        + params.base.shift
    )
    h_modes = tuple(shifted_oscillator(n, cA[j], cB[j]) for j in range(2))
    metric = build_metric(h_modes)
    bold_a, bold_a_ddag = chiral_ladder(calX, calP)
    calN = tuple(bold_a_ddag[j] @ bold_a[j] for j in range(2))
    return NCOperators(
        params=params,
        H_nc=build_nc_hamiltonian(params),
        H_partial=H_partial,
        calX=calX,
        calP=calP,
        calH1=calH1,
        calH2=calH2,
        metric=metric,
        bold_a=bold_a,
        bold_a_ddag=bold_a_ddag,
        calN=calN,
        h_modes=h_modes,
    )


def second_order_operator(params: NCParams) -> ComplexOperator:
    """Non-constant second-order part of ``H_partial - H_nc``.

    Expanding the partially diagonalized form leaves, besides the constant
    :meth:`NCParams.order2_constant`, the term
    ``-i (theta + theta_tilde)/4 [A theta_tilde (x1 + x2) + B theta (p1 + p2)]``.
    """
    A, B, t, tt = params.A, params.B, params.theta, params.theta_tilde
    x, p = _commutative_xp(params.cutoff)
    return (-1j * (t + tt) / 4) * (A * tt * (x[0] + x[1]) + B * t * (p[0] + p[1]))


def nc_spectrum_analytic(n1: int, n2: int, params: NCParams) -> float:
    return (n1 + n2 + 1) + params.coupling * (n1 - n2) + params.base.shift


def nc_spectrum_numeric(params: NCParams, count: int) -> SpectrumTable:
    """Lowest ``count`` eigenvalues of the coupled Hamiltonian with labels.

    Levels are paired by sorting both lists; within a first-order-split
    multiplet this assigns ascending eigenvalues to ascending
    ``(theta + theta_tilde)(n1 - n2)/2``, so the label order follows the sign
    of ``theta + theta_tilde``.
    """
    _check_count(count, params.cutoff)
    eigs = opalg.sorted_eigenvalues(build_nc_hamiltonian(params))[:count]
    rows = pair_levels(eigs, _labels_up_to(count),
                       lambda n1, n2: nc_spectrum_analytic(n1, n2, params))
    return SpectrumTable(rows[:count], params.theta, params.theta_tilde, params.order2_constant())


@dataclass(frozen=True)
class ScalingRecord:
    n1: int
    n2: int
    residual_coarse: float
    residual_fine: float
    ratio: float
    window: tuple[float, float]
    floor: float

    @property
    def passed(self) -> bool:
        if self.residual_coarse < self.floor and self.residual_fine < self.floor:
            return True
        return self.window[0] <= self.ratio <= self.window[1]

    def to_dict(self) -> dict:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "residual_coarse": self.residual_coarse,
            "residual_fine": self.residual_fine,
            "ratio": self.ratio,
            "pass": self.passed,
        }


def first_order_scaling_check(
    base: ModelParams,
    s_values: tuple[float, float] = (1e-2, 1e-3),
    levels: int = 6,
    window: tuple[float, float] = (50.0, 200.0),
    floor: float = 1e-8,
) -> list[ScalingRecord]:
    """Residuals against the first-order formula at ``theta = theta_tilde = s``.

    A first-order-correct formula leaves residuals of order ``s**2``, so the
    coarse-to-fine ratio for ``s`` a factor 10 apart lands near 100.
    Only split levels (``n1 != n2``) are examined.
    """
    coarse, fine = (
        nc_spectrum_numeric(NCParams(base, s, s), levels) for s in s_values
    )
    records = []
    for rc, rf in zip(coarse.rows, fine.rows):
        if (rc.n1, rc.n2) != (rf.n1, rf.n2):
            raise InvalidTruncationError("level labelling differs between the two runs")
        if rc.n1 == rc.n2:
            continue
        ratio = rc.residual / rf.residual if rf.residual > 0 else float("inf")
        records.append(ScalingRecord(rc.n1, rc.n2, rc.residual, rf.residual, ratio, window, floor))
    return records


def swap_operator(cutoff: int) -> ComplexOperator:
    """Permutation exchanging the two mode labels."""
    n = cutoff
    idx = np.arange(n * n)
    i, j = np.divmod(idx, n)
    S = np.zeros((n * n, n * n))
    S[j * n + i, idx] = 1.0
    return ComplexOperator(S, opalg.TwoMode(n))


def verify_nc(ops: NCOperators) -> list[Check]:
    """Metric, ladder and decomposition identities of the NC structure."""
    n = ops.cutoff
    keep = opalg.default_keep(n)
    skeep = opalg.sandwich_keep(n)
    dev = lambda m, k=keep: opalg.interior_deviation(m, k)
    one = opalg.identity(ops.H_nc.basis)
    par, V, eta, H = ops.metric.parity, ops.V, ops.eta, ops.H_partial
    checks = [
        Check("eta_hermiticity", ops.metric.herm_deviation, 1e-6),
        Check("eta_min_eigenvalue", ops.metric.min_metric_eig, 0.0, "min_eig_interior", "lower"),
        Check("eta_condition", ops.metric.condition, np.inf, "condition_interior"),
        Check("P-pseudo-Hermiticity(H_nc)", (par @ ops.H_nc - ops.H_nc.dag @ par).max_abs(), 1e-12, "max_full"),
        Check("[H_partial,V]", dev(opalg.commutator(H, V)), 1e-6),
        Check("eta*H_partial-H_partial^dag*eta", dev(eta @ H - H.dag @ eta), 1e-6),
        Check("P^-1 V^dag P - V", dev(par @ V.dag @ par - V), 1e-6),
        Check("[coupling,calH1+calH2]", dev(opalg.commutator(ops.angular, ops.calH1 + ops.calH2)), 1e-8),
        Check("calH1+calH2-(calN1+calN2+1)", dev(ops.calH1 + ops.calH2 - (ops.calN[0] + ops.calN[1] + 1.0)), 1e-6),
        Check("coupling-(calN1-calN2)", dev(ops.angular - (ops.calN[0] - ops.calN[1])), 1e-6),
    ]
    for j in range(2):
        for k in range(2):
            tag = f"{j + 1}{k + 1}"
            d = 1.0 if j == k else 0.0
            checks += [
                Check(f"[calX_j,calP_k]-i*delta_{tag}", dev(opalg.commutator(ops.calX[j], ops.calP[k]) - 1j * d * one), 1e-10),
                Check(f"[calX_j,calX_k]_{tag}", dev(opalg.commutator(ops.calX[j], ops.calX[k])), 1e-10),
                Check(f"[calP_j,calP_k]_{tag}", dev(opalg.commutator(ops.calP[j], ops.calP[k])), 1e-10),
                Check(f"[a_j,a_k^dd]-delta_{tag}", dev(opalg.commutator(ops.bold_a[j], ops.bold_a_ddag[k]) - d * one), 1e-6),
                Check(f"[a_j,a_k]_{tag}", dev(opalg.commutator(ops.bold_a[j], ops.bold_a[k])), 1e-6),
                Check(f"[N_j,a_k^dd]-delta*a_j^dd_{tag}",
                      dev(opalg.commutator(ops.calN[j], ops.bold_a_ddag[k]) - d * ops.bold_a_ddag[j]), 1e-6),
            ]
        pa = opalg.pseudo_adjoint(ops.bold_a[j], ops.metric)
        checks.append(Check(f"pseudo_adjoint(a_{j + 1})-a_{j + 1}^dd", dev(pa - ops.bold_a_ddag[j], skeep), 1e-6))
    return checks


def guard_positive(ops: NCOperators):
    if not ops.metric.min_metric_eig > 0:
        raise MetricNotPositiveError("noncommutative metric is not positive on the interior")
