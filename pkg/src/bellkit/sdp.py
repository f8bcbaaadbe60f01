"""Dense primal-dual interior-point solver for the POVM subproblem.

    minimize    sum_k Tr(F_k M_k)
    subject to  M_k >= 0 (Hermitian PSD),  sum_k M_k = I

with dual  max Tr(Y) s.t. Y <= F_k for all k.  Complex Hermitian blocks are
handled natively with Nesterov-Todd scaling; problem sizes here are tiny
(d <= 64), so a textbook implementation is robust and dependency-free.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERM_TOL = 1e-10
DEFAULT_TOL = 1e-8
MAX_ITERATIONS = 200
STEP_FRACTION = 0.98


class SdpError(RuntimeError):
    pass


class SdpNonConvergence(SdpError):
    """Iteration cap hit; carries the best iterate found."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class PovmSubproblem:
    dimension: int
    costs: tuple[np.ndarray, ...]

    def __post_init__(self):
        costs = tuple(np.asarray(f, dtype=complex) for f in self.costs)
        for f in costs:
            if f.shape != (self.dimension, self.dimension):
                raise ValueError("cost operator shape mismatch")
            if np.abs(f - f.conj().T).max() > HERM_TOL * max(1.0, np.abs(f).max()):
                raise ValueError("cost operator is not Hermitian")
        object.__setattr__(self, "costs", costs)

    @property
    def outcomes(self) -> int:
        return len(self.costs)


@dataclass
class SdpSolution:
    povm: list[np.ndarray]
    dual_certificate: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    iterations: int


def _herm(m):
    return 0.5 * (m + m.conj().T)


def _sqrt_and_inv_sqrt(m):
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 1e-300, None)
    rt = np.sqrt(vals)
    return (vecs * rt) @ vecs.conj().T, (vecs / rt) @ vecs.conj().T


def _nt_scaling(M, S):
    """W with W S W = M (both arguments Hermitian positive definite)."""
    S_half, S_ihalf = _sqrt_and_inv_sqrt(S)
    T_half, _ = _sqrt_and_inv_sqrt(_herm(S_half @ M @ S_half))
    return _herm(S_ihalf @ T_half @ S_ihalf)


def _max_step(X, dX):
    """Largest alpha with X + alpha dX >= 0, assuming X > 0."""
    _, X_ihalf = _sqrt_and_inv_sqrt(X)
    lam = np.linalg.eigvalsh(_herm(X_ihalf @ dX @ X_ihalf)).min()
    if lam >= 0:
        return np.inf
    return -1.0 / lam


def solve_povm_subproblem(
    problem: PovmSubproblem,
    tol: float = DEFAULT_TOL,
    max_iterations: int = MAX_ITERATIONS,
    verbose: bool = False,
) -> SdpSolution:
    d = problem.dimension
    K = problem.outcomes
    F = [np.asarray(f, dtype=complex) for f in problem.costs]
    eye = np.eye(d, dtype=complex)

    spread = max(np.abs(F[k] - F[0]).max() for k in range(K))
    if spread <= HERM_TOL:
        # degenerate: objective is constant; return the uniform POVM
        value = float(np.trace(F[0]).real)
        return SdpSolution([eye / K for _ in range(K)], F[0], value, value, 0.0, 0)

    M = [eye / K for _ in range(K)]
    y0 = min(float(np.linalg.eigvalsh(f).min()) for f in F) - 1.0
    Y = y0 * eye
    S = [_herm(f - Y) for f in F]

    best = None
    for iteration in range(1, max_iterations + 1):
        mu = sum(float(np.real(np.trace(M[k] @ S[k]))) for k in range(K)) / (K * d)
        Rp = eye - sum(M)
        Rd = [_herm(F[k] - Y - S[k]) for k in range(K)]
        primal = sum(float(np.real(np.trace(F[k] @ M[k]))) for k in range(K))
        dual = float(np.real(np.trace(Y)))
        gap = primal - dual
        pres = float(np.abs(Rp).max())
        dres = max(float(np.abs(r).max()) for r in Rd)
        if verbose:
            print(
                f"  it {iteration:3d}  mu={mu:.3e}  gap={gap:.3e}  "
                f"pres={pres:.3e}  dres={dres:.3e}"
            )
        sol = SdpSolution([m.copy() for m in M], Y.copy(), primal, dual, gap, iteration)
        if best is None or abs(gap) < abs(best.gap):
            best = sol
        if mu < tol and abs(gap) < tol and pres < tol and dres < tol:
            return sol

        W = [_nt_scaling(M[k], S[k]) for k in range(K)]
        S_inv = [np.linalg.inv(S[k]) for k in range(K)]
        G = sum(np.kron(W[k], W[k].conj()) for k in range(K))

        def solve_direction(sigma):
            Rc = [_herm(sigma * mu * S_inv[k] - M[k]) for k in range(K)]
            rhs = Rp - sum(Rc) + sum(W[k] @ Rd[k] @ W[k] for k in range(K))
            dY = _herm(np.linalg.solve(G, rhs.reshape(-1)).reshape(d, d))
            dS = [_herm(Rd[k] - dY) for k in range(K)]
            dM = [_herm(Rc[k] - W[k] @ dS[k] @ W[k]) for k in range(K)]
            return dY, dS, dM

        # predictor for the centering weight, then the actual step
        _, dS_aff, dM_aff = solve_direction(0.0)
        ap = min(min(_max_step(M[k], dM_aff[k]) for k in range(K)), 1.0)
        ad = min(min(_max_step(S[k], dS_aff[k]) for k in range(K)), 1.0)
        mu_aff = sum(
            float(
                np.real(
                    np.trace((M[k] + ap * dM_aff[k]) @ (S[k] + ad * dS_aff[k]))
                )
            )
            for k in range(K)
        ) / (K * d)
        sigma = float(np.clip((max(mu_aff, 0.0) / mu) ** 3, 1e-8, 0.99))
        dY, dS, dM = solve_direction(sigma)
        ap = min(STEP_FRACTION * min(_max_step(M[k], dM[k]) for k in range(K)), 1.0)
        ad = min(STEP_FRACTION * min(_max_step(S[k], dS[k]) for k in range(K)), 1.0)
        M = [_herm(M[k] + ap * dM[k]) for k in range(K)]
        S = [_herm(S[k] + ad * dS[k]) for k in range(K)]
        Y = _herm(Y + ad * dY)

    raise SdpNonConvergence(
        f"no convergence after {max_iterations} iterations (gap {best.gap:.2e})",
        best,
    )


def polish_povm_solution(
    problem: PovmSubproblem, solution: SdpSolution, kernel_tol: float = 1e-6
) -> list[np.ndarray] | None:
    """Exact projective POVM from the dual certificate, when one exists.

    At optimality every M_k is supported on ker(F_k - Y).  When those kernels
    jointly span C^d with the right multiplicities, Loewdin orthonormalization
    turns the kernel bases into exact orthogonal projectors summing to the
    identity.  Returns None when the optimum is not of this form (genuine
    POVMs, degenerate kernels).
    """
    d = problem.dimension
    Y = solution.dual_certificate
    scale = max(1.0, max(np.abs(f).max() for f in problem.costs))
    groups = []
    for F in problem.costs:
        vals, vecs = np.linalg.eigh(_herm(F - Y))
        groups.append(vecs[:, vals < kernel_tol * scale])
    if sum(g.shape[1] for g in groups) != d:
        return None
    V = np.concatenate(groups, axis=1)
    G = _herm(V.conj().T @ V)
    if np.abs(G - np.eye(d)).max() > 1e-3:
        return None
    gv, gw = np.linalg.eigh(G)
    if gv.min() < 1e-6:
        return None
    W = V @ (gw / np.sqrt(gv)) @ gw.conj().T
    povm, col = [], 0
    for g in groups:
        sub = W[:, col:col + g.shape[1]]
        povm.append(sub @ sub.conj().T)
        col += g.shape[1]
    value = sum(float(np.real(np.trace(f @ m))) for f, m in zip(problem.costs, povm))
    if value > solution.primal_value + 1e-7 * scale:
        return None
    return povm


def binary_subproblem_value(F0: np.ndarray, F1: np.ndarray) -> float:
    """Closed form for K=2: Tr(F1) plus the negative part of F0 - F1."""
    diff = np.linalg.eigvalsh(_herm(np.asarray(F0) - np.asarray(F1)))
    return float(np.real(np.trace(F1))) + float(diff[diff < 0].sum())


def _per_outcome_costs(block, model, party, combo):
    """Cost matrices for one input combo: F_a with sum_a Tr(F_a E_a) equal to
    the combo's contribution, as a function of party's POVM at combo[party]."""
    import math

    from .quantum import Ket

    dims = model.assemblage.dimensions
    n = len(dims)
    d = dims[party]
    K = block.shape[0]
    others = [q for q in range(n) if q != party]
    R = math.prod(dims[q] for q in others)

    if isinstance(model.state, Ket):
        rho = model.state.density_matrix()
    else:
        rho = model.state
    rho_t = rho.reshape(dims + dims)
    row = [party] + others
    col = [n + party] + [n + q for q in others]
    rho_p = np.transpose(rho_t, row + col).reshape(d, R, d, R)

    # Q_a = sum over the other parties' outcomes of c(a, ...) (x) E_others
    w = np.transpose(block, [party] + others).astype(complex)
    caps = "ABCDEF"
    subs = ["w" + caps[:len(others)]]
    operands = [w]
    out_rows, out_cols = "", ""
    pair_letters = ["kl", "mn", "op", "qr", "st"]
    for idx, q in enumerate(others):
        subs.append(caps[idx] + pair_letters[idx])
        operands.append(model.assemblage.povms[q][combo[q]].stacked())
        out_rows += pair_letters[idx][0]
        out_cols += pair_letters[idx][1]
    Q = np.einsum(
        ",".join(subs) + "->w" + out_rows + out_cols, *operands
    ).reshape(K, R, R)
    # Tr[(M (x) Q) rho_p] = sum_ij M[i,j] F[j,i]
    F = np.einsum("wrs,jsir->wji", Q, rho_p)
    return [F[a] for a in range(K)]


def contract_costs(expr, model, party: int, inp: int) -> PovmSubproblem:
    """Cost operators for one measurement's see-saw update.

    Returns F_k with sum_k Tr(F_k M_k) equal to the full expression value as
    a function of that measurement's elements, everything else held fixed.
    Contributions that do not involve the chosen measurement are folded in as
    a multiple of the identity (they are constant once sum_k M_k = I).
    """
    from .expressions import expand_to_coefficients

    sc = expr.scenario
    K = sc.outputs
    dims = model.assemblage.dimensions
    d = dims[party]
    coeffs = expand_to_coefficients(expr)

    lin = [np.zeros((d, d), dtype=complex) for _ in range(K)]
    const = 0.0
    for combo in sc.input_combos():
        block = coeffs[combo]
        if not block.any():
            continue
        Fs = _per_outcome_costs(block, model, party, combo)
        if combo[party] == inp:
            for k in range(K):
                lin[k] += Fs[k]
        else:
            povm = model.assemblage.povms[party][combo[party]]
            const += sum(
                float(np.trace(Fs[k] @ povm.elements[k]).real) for k in range(K)
            )
    costs = tuple(_herm(lin[k] + (const / d) * np.eye(d)) for k in range(K))
    return PovmSubproblem(d, costs)
