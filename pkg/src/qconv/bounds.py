"""Finite-blocklength converse bounds on classical coding over quantum channels.

The central quantity is the minimal type-II error beta of a bipartite
hypothesis test between the channel acting on half of a canonical
purification of the average input, and a product of the purification's
reference marginal with an arbitrary output state, maximized over that
output state. Its negative log2 upper-bounds log2 M for any code with
average error eps: unrestricted tests bound entanglement-assisted codes,
PPT-preserving tests bound unassisted codes.

Both bounds are evaluated as semidefinite programs in the variable
R = rho_ref^(1/2) T rho_ref^(1/2); the worst-case type-II error of a test
becomes the spectral norm of its reference-side partial trace, which the
program minimizes as an epigraph variable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from . import linalg, sdp
from .hypotest import binomial_beta, classical_np_beta, quantum_np_beta
from .quantum import (DensityMatrix, QuantumChannel, apply_channel,
                      mutual_information)


class TestClass(enum.Enum):
    __test__ = False  # not a pytest collectible

    ALL = "ALL"
    PPT = "PPT"
    LC1 = "LC1"
    L = "L"

    @property
    def computable(self) -> bool:
        return self in (TestClass.ALL, TestClass.PPT)


class UncomputableClassError(ValueError):
    """Raised when a bound is requested for a test class with no known program."""


class SolverFailure(RuntimeError):
    """Raised when the interior-point solve does not reach optimality."""


@dataclass
class BoundResult:
    """A converse bound: beta and bits = -log2(beta).

    ``beta`` is an mpmath float on the exact depolarising path, where it
    underflows float64 for large block lengths.
    """

    bits: float
    beta: float | mp.mpf
    epsilon: float
    test_class: TestClass
    n_uses: int = 1
    optimal_r: np.ndarray | None = None
    optimal_sigma: np.ndarray | None = None
    optimal_rho: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


def _result(beta, eps: float, cls: TestClass, n: int = 1, **extra) -> BoundResult:
    if isinstance(beta, mp.mpf):
        bits = float(-mp.log(beta, 2)) if beta > 0 else float("inf")
    else:
        beta = float(min(max(beta, 1e-300), 1.0))
        bits = float(-np.log2(beta))
    return BoundResult(bits=bits, beta=beta, epsilon=eps, test_class=cls, n_uses=n, **extra)


def _clamp_eps(eps: float) -> float:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must be in [0, 1], got {eps}")
    # interior-point programs need strict feasibility at the endpoints
    return min(max(eps, 1e-9), 1.0 - 1e-9)


def _ref_state(rho: DensityMatrix) -> np.ndarray:
    """Reference marginal of the canonical purification: the transpose."""
    return rho.mat.T.copy()


def _require_class(cls: TestClass) -> None:
    if not isinstance(cls, TestClass):
        raise TypeError(f"expected a TestClass, got {cls!r}")
    if not cls.computable:
        raise UncomputableClassError(f"test class {cls.value} has no computable program")


def _solve(problem: sdp.SdpProblem) -> sdp.SdpSolution:
    solution = sdp.solve(problem)
    if solution.status != "optimal":
        raise SolverFailure(f"SDP terminated with status {solution.status} "
                            f"(residuals {solution.residuals})")
    return solution


def _top_eigenspace_state(op: np.ndarray, degeneracy_tol: float = 1e-8) -> np.ndarray:
    """Normalized projector onto the top eigenspace, degeneracies merged."""
    w, v = np.linalg.eigh(linalg.hermitian_part(op))
    top = w[-1]
    sel = v[:, w >= top - degeneracy_tol * (1.0 + abs(top))]
    proj = sel @ sel.conj().T
    return linalg.hermitian_part(proj / sel.shape[1])


def _ea_problem(channel: QuantumChannel, eps: float, cls: TestClass,
                rho_ref: np.ndarray | None):
    """Assemble the converse SDP; ``rho_ref is None`` makes the input state a
    variable block (the joint program of the optimized bound)."""
    da, db = channel.dim_in, channel.dim_out
    dab = da * db
    prob = sdp.SdpProblem([dab, 1, db, dab])  # R, lambda, slack for trace-out, slack for cap
    R, LAM, S_TR, S_CAP = 0, 1, 2, 3
    rho_block = None
    if rho_ref is None:
        rho_block = prob.add_block(da)
    prob.set_objective(LAM, [[1.0]])
    eye_a = np.eye(da, dtype=complex)
    eye_b = np.eye(db, dtype=complex)

    # trace over the reference: Tr_ref R + S_TR = lambda I_B
    prob.add_operator_equality(
        {R: lambda h: np.kron(eye_a, h),
         S_TR: lambda h: h,
         LAM: lambda h: -np.real(np.trace(h)) * np.eye(1)},
        np.zeros((db, db)))
    # acceptance on the true hypothesis: <choi, R> >= 1 - eps
    prob.add_constraint({R: channel.choi}, 1.0 - eps, ">=")
    # cap: R + S_CAP = rho_ref ⊗ I_B (rho_ref fixed or variable)
    if rho_ref is not None:
        prob.add_operator_equality(
            {R: lambda h: h, S_CAP: lambda h: h},
            np.kron(rho_ref, eye_b))
    else:
        prob.add_operator_equality(
            {R: lambda h: h, S_CAP: lambda h: h,
             rho_block: lambda h: -linalg.partial_trace(h, (da, db), "b")},
            np.zeros((dab, dab)))
        prob.add_constraint({rho_block: eye_a}, 1.0, "==")

    if cls is TestClass.PPT:
        # 0 <= R^{T_B} <= rho_ref ⊗ I_B via a mirror block P = R^{T_B}
        P = prob.add_block(dab)
        S_PPT = prob.add_block(dab)
        prob.add_operator_equality(
            {P: lambda h: h,
             R: lambda h: -linalg.partial_transpose(h, (da, db), "b")},
            np.zeros((dab, dab)))
        if rho_ref is not None:
            prob.add_operator_equality(
                {P: lambda h: h, S_PPT: lambda h: h},
                np.kron(rho_ref, eye_b))
        else:
            prob.add_operator_equality(
                {P: lambda h: h, S_PPT: lambda h: h,
                 rho_block: lambda h: -linalg.partial_trace(h, (da, db), "b")},
                np.zeros((dab, dab)))
    return prob, R, rho_block


def _ea_result(channel: QuantumChannel, eps_raw: float, eps: float, cls: TestClass,
               solution: sdp.SdpSolution, r_block: int,
               rho_mat: np.ndarray | None) -> BoundResult:
    da, db = channel.dim_in, channel.dim_out
    r_opt = linalg.hermitian_part(solution.primal_blocks[r_block])
    sigma = _top_eigenspace_state(linalg.partial_trace(r_opt, (da, db), "a"))
    return _result(solution.primal_objective, eps_raw, cls,
                   optimal_r=r_opt, optimal_sigma=sigma, optimal_rho=rho_mat,
                   diagnostics=dict(solution.residuals, iterations=solution.iterations,
                                    dual_objective=solution.dual_objective))


def ea_bound(channel: QuantumChannel, rho: DensityMatrix, eps: float,
             cls: TestClass = TestClass.ALL) -> BoundResult:
    """Converse bound at a fixed average input state (primal program).

    Returns bits = -log2(min lambda) where lambda caps the reference-side
    partial trace of R, subject to acceptance probability at least 1-eps
    on the channel hypothesis and 0 <= R <= rho_ref ⊗ I. For the PPT
    class the same two-sided cap is imposed on the partial transpose.
    """
    _require_class(cls)
    if rho.dim != channel.dim_in:
        raise ValueError(f"state dim {rho.dim} != channel input dim {channel.dim_in}")
    eps_c = _clamp_eps(eps)
    prob, r_block, _ = _ea_problem(channel, eps_c, cls, _ref_state(rho))
    solution = _solve(prob)
    return _ea_result(channel, eps, eps_c, cls, solution, r_block, None)


def ea_bound_dual(channel: QuantumChannel, rho: DensityMatrix, eps: float) -> BoundResult:
    """Converse bound at a fixed input via the dual program (unrestricted tests).

    Maximizes (1-eps) mu - <F, rho_ref ⊗ I> subject to
    I ⊗ G + F >= mu choi, Tr G <= 1 and F, G, mu >= 0; by strong duality
    the value equals the primal bound.
    """
    if rho.dim != channel.dim_in:
        raise ValueError(f"state dim {rho.dim} != channel input dim {channel.dim_in}")
    eps_c = _clamp_eps(eps)
    da, db = channel.dim_in, channel.dim_out
    dab = da * db
    rho_ref = _ref_state(rho)
    prob = sdp.SdpProblem([dab, db, 1, dab])  # F, G, mu, slack
    F, G, MU, S = 0, 1, 2, 3
    prob.set_objective(F, np.kron(rho_ref, np.eye(db, dtype=complex)))
    prob.set_objective(MU, [[-(1.0 - eps_c)]])
    choi = channel.choi
    prob.add_operator_equality(
        {G: lambda h: linalg.partial_trace(h, (da, db), "a"),
         F: lambda h: h,
         MU: lambda h: -np.real(np.sum(h.conj() * choi)) * np.eye(1),
         S: lambda h: -h},
        np.zeros((dab, dab)))
    prob.add_constraint({G: np.eye(db, dtype=complex)}, 1.0, "<=")
    solution = _solve(prob)
    value = -solution.primal_objective
    return _result(value, eps, TestClass.ALL,
                   diagnostics=dict(solution.residuals, iterations=solution.iterations,
                                    dual_objective=-solution.dual_objective))


def ea_bound_opt_rho(channel: QuantumChannel, eps: float,
                     cls: TestClass = TestClass.ALL) -> BoundResult:
    """Converse bound maximized over input states.

    Joint program: the reference state becomes a PSD unit-trace variable
    block, the cap constraint R <= rho_ref ⊗ I staying linear in the pair.
    The returned optimal_rho is transposed back to the input convention.
    """
    _require_class(cls)
    eps_c = _clamp_eps(eps)
    prob, r_block, rho_block = _ea_problem(channel, eps_c, cls, None)
    solution = _solve(prob)
    rho_mat = linalg.hermitian_part(solution.primal_blocks[rho_block]).T
    return _ea_result(channel, eps, eps_c, cls, solution, r_block, rho_mat)


def binary_entropy(p: float) -> float:
    """h(p) in bits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    total = 0.0
    for q in (p, 1.0 - p):
        if q > 0.0:
            total -= q * np.log2(q)
    return total


def binary_relative_entropy(p: float, q: float) -> float:
    """d(p||q) = p log2(p/q) + (1-p) log2((1-p)/(1-q))."""
    if not (0.0 <= p <= 1.0 and 0.0 < q < 1.0):
        raise ValueError(f"invalid binary distributions p={p}, q={q}")
    total = 0.0
    if p > 0.0:
        total += p * np.log2(p / q)
    if p < 1.0:
        total += (1.0 - p) * np.log2((1.0 - p) / (1.0 - q))
    return total


def fano_bound(channel: QuantumChannel, rho: DensityMatrix, eps: float) -> float:
    """Mutual-information (Fano-type) converse: (I(E, rho) + h(eps)) / (1 - eps)."""
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must be in [0, 1), got {eps}")
    return (mutual_information(channel, rho) + binary_entropy(eps)) / (1.0 - eps)


def depolarising_exact(d: int, p: float, n: int, eps: float) -> BoundResult:
    """Exact optimized bound for n uses of the d-dimensional depolarising channel.

    By the channel's full unitary and permutation covariance the bound
    reduces to a binary i.i.d. hypothesis test with success weights
    mu = (1-p) + p/d² against lam = 1/d², evaluated by the closed-form
    binomial expression in O(n) arithmetic.
    """
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarising parameter must be in [0, 1], got {p}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    mu = (1.0 - p) + p / d**2
    lam = 1.0 / d**2
    tr = binomial_beta(mu, lam, n, eps)
    return _result(tr.beta, eps, TestClass.ALL, n,
                   diagnostics={"mu": mu, "lam": lam, "threshold": tr.threshold,
                                "gamma": tr.gamma})


def _golden_section(f, lo: float, hi: float, iters: int = 80):
    """Minimize a unimodal function on [lo, hi]; returns (x, f(x))."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _simplex_minimize(f, dim: int, iters: int = 60):
    """Minimize a convex function over the probability simplex.

    Nested golden-section over stick-breaking mass coordinates; the partial
    minimum over a suffix of coordinates is again convex in the preceding
    one, so each 1-D search is unimodal. Cost grows as iters**(dim-1),
    which is fine for the small alphabets this is used on.
    """
    if dim == 1:
        point = np.array([1.0])
        return point, f(point)

    def rec(prefix: list[float], remaining: float, k: int):
        if k == dim - 1:
            point = prefix + [remaining]
            return point, f(np.array(point))

        def val(t: float) -> float:
            return rec(prefix + [t], remaining - t, k + 1)[1]

        x, _ = _golden_section(val, 0.0, remaining, iters)
        return rec(prefix + [x], remaining - x, k + 1)

    point, value = rec([], 1.0, 0)
    return np.array(point), value


def classical_converse(w: np.ndarray, eps: float,
                       p: np.ndarray | None = None) -> BoundResult:
    """Converse for a classical channel given by a column-stochastic matrix.

    For a fixed input distribution p the bound is -log2 of the maximal
    type-II error of the classical test between the joint input-output
    distribution and p x q, maximized over output distributions q (the
    inner maximum is concave in q). When ``p`` is omitted it is optimized
    as well; the type-II error is convex in p, so both searches use
    nested golden-section over the simplex (practical for small
    alphabets).
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.min() < -1e-12:
        raise ValueError("channel matrix must be a nonnegative matrix")
    if np.abs(w.sum(axis=0) - 1.0).max() > 1e-10:
        raise ValueError("channel matrix columns must be distributions")
    nb, na = w.shape
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must be in [0, 1), got {eps}")

    def beta_tilde(p_in: np.ndarray) -> float:
        joint = (w * p_in[None, :]).T.reshape(-1)  # index a*nb + b

        def neg_beta(q: np.ndarray) -> float:
            prod = np.outer(p_in, q).reshape(-1)
            return -classical_np_beta(joint, prod, eps).beta

        _, value = _simplex_minimize(neg_beta, nb)
        return -value

    if p is None:
        if na > 8:
            raise ValueError("input optimization supported for alphabets up to 8; pass p")
        p_opt, beta = _simplex_minimize(beta_tilde, na)
    else:
        p_opt = np.asarray(p, dtype=float)
        if p_opt.shape != (na,) or abs(p_opt.sum() - 1.0) > 1e-10 or p_opt.min() < 0:
            raise ValueError("p must be a distribution over the input alphabet")
        beta = beta_tilde(p_opt)
    return _result(beta, eps, TestClass.ALL,
                   optimal_rho=np.diag(p_opt).astype(complex),
                   diagnostics={"input_distribution": p_opt.tolist()})


def wang_renner_chi(ensemble: list[tuple[float, DensityMatrix]],
                    channel: QuantumChannel, eps: float) -> float:
    """Wang-Renner style bound for a fixed input ensemble (bits).

    Builds the classical-quantum state sum_x p(x) |x><x| ⊗ E(rho_x) and
    tests it against tau_C ⊗ E(rho_avg); no maximization over ensembles
    is performed.
    """
    if not ensemble:
        raise ValueError("ensemble must be non-empty")
    probs = np.array([float(pr) for pr, _ in ensemble])
    if probs.min() < 0 or abs(probs.sum() - 1.0) > 1e-10:
        raise ValueError("ensemble probabilities must form a distribution")
    states = [st for _, st in ensemble]
    if any(st.dim != channel.dim_in for st in states):
        raise ValueError("ensemble states must match the channel input dimension")
    k = len(ensemble)
    db = channel.dim_out
    tau_cb = np.zeros((k * db, k * db), dtype=complex)
    avg = np.zeros((channel.dim_in, channel.dim_in), dtype=complex)
    for x, (pr, st) in enumerate(ensemble):
        tau_cb[x * db:(x + 1) * db, x * db:(x + 1) * db] = pr * channel.apply_mat(st.mat)
        avg += pr * st.mat
    tau_b = channel.apply_mat(avg)
    tau_prod = np.kron(np.diag(probs).astype(complex), tau_b)
    result = quantum_np_beta(DensityMatrix(linalg.hermitian_part(tau_cb)),
                             DensityMatrix(linalg.hermitian_part(tau_prod)), eps)
    beta = max(float(result.beta), 1e-300)
    return float(-np.log2(beta))


def average_state(rho: DensityMatrix, unitaries: list[np.ndarray],
                  weights: list[float]) -> DensityMatrix:
    """Group-average sum_g w_g U_g rho U_g† over a finite set of unitaries."""
    if len(unitaries) != len(weights):
        raise ValueError("need one weight per unitary")
    wts = np.array([float(x) for x in weights])
    if wts.min() < 0 or abs(wts.sum() - 1.0) > 1e-10:
        raise ValueError("weights must form a distribution")
    total = np.zeros_like(rho.mat)
    for u, wt in zip(unitaries, wts):
        u = linalg.require_matrix(u)
        if np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() > 1e-10:
            raise ValueError("averaging element is not unitary")
        total += wt * (u @ rho.mat @ u.conj().T)
    return DensityMatrix(linalg.hermitian_part(total))


def verify_covariance(channel: QuantumChannel, u: np.ndarray, v: np.ndarray,
                      atol: float = 1e-8) -> bool:
    """Check E(U x U†) = V E(x) V† on a spanning set of matrix units."""
    u = linalg.require_matrix(u)
    v = linalg.require_matrix(v)
    if u.shape != (channel.dim_in,) * 2 or v.shape != (channel.dim_out,) * 2:
        raise ValueError("covariance unitaries must match the channel dimensions")
    for mat, name in ((u, "input"), (v, "output")):
        if np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])).max() > 1e-10:
            raise ValueError(f"{name} element is not unitary")
    da = channel.dim_in
    for i in range(da):
        for j in range(da):
            unit = np.zeros((da, da), dtype=complex)
            unit[i, j] = 1.0
            lhs = channel.apply_mat(u @ unit @ u.conj().T)
            rhs = v @ channel.apply_mat(unit) @ v.conj().T
            if np.abs(lhs - rhs).max() > atol:
                return False
    return True


def noisy_storage_minentropy(code_rate_bits: float, bound: BoundResult) -> float:
    """Min-entropy guarantee against a bounded noisy quantum storage.

    If the rate pushed through the adversary's storage channel exceeds the
    converse bound, any decoding errs with probability above eps, giving
    H_min >= -log2(1 - eps); otherwise no guarantee (0).
    """
    if code_rate_bits > bound.bits:
        return float(-np.log2(1.0 - bound.epsilon))
    return 0.0
