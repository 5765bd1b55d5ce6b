"""Standard-form semidefinite programs over Hermitian blocks.

A problem holds PSD variable blocks X_k and scalar linear constraints

    minimize    sum_k <C_k, X_k>
    subject to  sum_k <A_ik, X_k>  (=, <=, >=)  b_i,      X_k >= 0,

with the real inner product <A, X> = Re Tr(A† X). Operator equalities and
inequalities are expressed by the caller as one scalar constraint per
Hermitian basis element, with explicit PSD slack blocks where needed;
scalar inequalities are converted to equalities with 1x1 slack blocks
inside the solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import linalg

SENSES = ("==", "<=", ">=")


@dataclass
class LinearConstraint:
    """One scalar constraint: sum over blocks of <coeff, X_block> sense rhs."""

    coeffs: dict[int, np.ndarray]
    rhs: float
    sense: str = "=="


class SdpProblem:
    """Container and validator for a block-diagonal Hermitian SDP."""

    def __init__(self, block_dims: list[int]):
        if not block_dims or any(int(d) < 1 for d in block_dims):
            raise ValueError(f"invalid block dimensions {block_dims}")
        self.block_dims = [int(d) for d in block_dims]
        self.objective: dict[int, np.ndarray] = {}
        self.constraints: list[LinearConstraint] = []

    def add_block(self, dim: int) -> int:
        if dim < 1:
            raise ValueError("block dimension must be >= 1")
        self.block_dims.append(int(dim))
        return len(self.block_dims) - 1

    def _check_coeff(self, k: int, a) -> np.ndarray:
        if not 0 <= k < len(self.block_dims):
            raise ValueError(f"unknown block index {k}")
        a = np.atleast_2d(np.asarray(a, dtype=complex))
        d = self.block_dims[k]
        if a.shape != (d, d):
            raise ValueError(f"coefficient shape {a.shape} does not match block dim {d}")
        return linalg.require_hermitian(a, rtol=1e-10)

    def set_objective(self, k: int, c) -> None:
        self.objective[k] = self._check_coeff(k, c)

    def add_constraint(self, coeffs: dict[int, np.ndarray], rhs: float, sense: str = "==") -> None:
        if sense not in SENSES:
            raise ValueError(f"sense must be one of {SENSES}, got {sense!r}")
        if not coeffs:
            raise ValueError("constraint must touch at least one block")
        checked = {k: self._check_coeff(k, a) for k, a in coeffs.items()}
        self.constraints.append(LinearConstraint(checked, float(rhs), sense))

    def add_operator_equality(self, terms: dict[int, "callable"], rhs: np.ndarray) -> None:
        """Add the operator equation sum_k L_k(X_k) = rhs, one scalar row per
        Hermitian basis element of the equation space.

        ``terms`` maps a block index to the adjoint of its linear map:
        a callable taking a Hermitian basis element H and returning the
        coefficient operator L_k†(H) on that block.
        """
        rhs = linalg.require_hermitian(rhs, rtol=1e-10)
        for h in hermitian_basis(rhs.shape[0]):
            coeffs = {k: adj(h) for k, adj in terms.items()}
            self.add_constraint(coeffs, float(np.real(np.sum(h.conj() * rhs))), "==")


def hermitian_basis(d: int):
    """Orthonormal basis of the real space of d x d Hermitian matrices."""
    s = 1.0 / np.sqrt(2.0)
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        yield e
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = s
            e[j, i] = s
            yield e
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1j * s
            e[j, i] = -1j * s
            yield e


@dataclass
class SdpSolution:
    primal_blocks: list[np.ndarray]
    dual_multipliers: np.ndarray
    primal_objective: float
    dual_objective: float
    status: str
    iterations: int
    residuals: dict = field(default_factory=dict)

    @property
    def relative_gap(self) -> float:
        p, d = self.primal_objective, self.dual_objective
        return abs(p - d) / (1.0 + abs(p) + abs(d))


@dataclass
class VerifyReport:
    ok: bool
    max_equality_violation: float
    max_inequality_violation: float
    min_block_eigenvalue: float
    relative_gap: float
    findings: list[str]


def verify(problem: SdpProblem, solution: SdpSolution,
           feas_tol: float = 1e-8, gap_tol: float = 1e-7) -> VerifyReport:
    """Independently re-evaluate feasibility residuals and the duality gap."""
    findings: list[str] = []
    b_scale = 1.0 + max((abs(c.rhs) for c in problem.constraints), default=0.0)
    max_eq = 0.0
    max_ineq = 0.0
    for idx, con in enumerate(problem.constraints):
        value = 0.0
        for k, a in con.coeffs.items():
            value += float(np.real(np.sum(a.conj() * solution.primal_blocks[k])))
        if con.sense == "==":
            viol = abs(value - con.rhs)
            max_eq = max(max_eq, viol)
        elif con.sense == "<=":
            viol = max(0.0, value - con.rhs)
            max_ineq = max(max_ineq, viol)
        else:
            viol = max(0.0, con.rhs - value)
            max_ineq = max(max_ineq, viol)
        if viol > feas_tol * b_scale:
            findings.append(f"constraint {idx} violated by {viol:.3e}")
    min_eig = np.inf
    for k, x in enumerate(solution.primal_blocks):
        w = np.linalg.eigvalsh(linalg.hermitian_part(x))
        min_eig = min(min_eig, float(w.min()))
        if w.min() < -1e-9 * (1.0 + abs(w.max())):
            findings.append(f"block {k} not PSD: min eigenvalue {w.min():.3e}")
    gap = solution.relative_gap
    if solution.status == "optimal" and gap > gap_tol:
        findings.append(f"duality gap {gap:.3e} exceeds {gap_tol:.1e}")
    return VerifyReport(ok=not findings, max_equality_violation=max_eq,
                        max_inequality_violation=max_ineq,
                        min_block_eigenvalue=float(min_eig),
                        relative_gap=gap, findings=findings)
