"""Finite-dimensional operator assignments: normality and order checks,
polynomial evaluation on commuting matrices, verification reports,
simultaneous diagonalization of commuting normal families, and diagonal
embeddings of classical solutions.

Exact CycNum coefficients cross into complex doubles only here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .csp_core import Instance
from .cyclotomic import CycNum, UniPoly, embed
from .fourier import MultiPoly, relation_polynomial

DEFAULT_TOL = 1e-8


def _as_matrix(A) -> np.ndarray:
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("operator must be a square matrix")
    return M


def root_value(k: int, d: int) -> complex:
    return complex(np.exp(2j * np.pi * (k % d) / d))


def fro(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, "fro"))


def check_normal_order(A, d: int) -> tuple[float, float]:
    """Frobenius residuals (|AA* - A*A|, |A^d - I|)."""
    M = _as_matrix(A)
    normality = fro(M @ M.conj().T - M.conj().T @ M)
    order = fro(np.linalg.matrix_power(M, d) - np.eye(M.shape[0]))
    return normality, order


def commutator_norm(A, B) -> float:
    M, N = _as_matrix(A), _as_matrix(B)
    return fro(M @ N - N @ M)


def cyc_to_complex(c: CycNum) -> complex:
    return c.to_complex()


def eval_multipoly_matrix(poly: MultiPoly, mats) -> np.ndarray:
    """Evaluate a polynomial at a tuple of (pairwise commuting) matrices."""
    mats = [_as_matrix(M) for M in mats]
    if len(mats) != len(poly.vars):
        raise ValueError("matrix tuple length must match variable count")
    if mats:
        n = mats[0].shape[0]
        if any(M.shape[0] != n for M in mats):
            raise ValueError("matrices must share one dimension")
    else:
        n = 1
    top = [0] * len(mats)
    for exps in poly.terms:
        for j, e in enumerate(exps):
            top[j] = max(top[j], e)
    powers = []
    for M, m in zip(mats, top):
        row = [np.eye(n, dtype=complex)]
        for _ in range(m):
            row.append(row[-1] @ M)
        powers.append(row)
    out = np.zeros((n, n), dtype=complex)
    for exps, coeff in poly.terms.items():
        term = np.eye(n, dtype=complex) * cyc_to_complex(coeff)
        for j, e in enumerate(exps):
            if e:
                term = term @ powers[j][e]
        out += term
    return out


def apply_unipoly_matrix(p: UniPoly, A) -> np.ndarray:
    """Horner evaluation of a univariate polynomial at a matrix."""
    M = _as_matrix(A)
    n = M.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for c in reversed(p.coeffs):
        out = out @ M + cyc_to_complex(c) * np.eye(n)
    return out


# ---------------------------------------------------------------------------
# Operator assignments


@dataclass
class OperatorAssignment:
    dim: int
    assign: dict  # variable -> ndarray (dim x dim)

    def __post_init__(self):
        fixed = {}
        for v, M in self.assign.items():
            M = _as_matrix(M)
            if M.shape[0] != self.dim:
                raise ValueError(f"operator for {v!r} has dimension {M.shape[0]}, expected {self.dim}")
            fixed[v] = M
        self.assign = fixed

    def __getitem__(self, var: str) -> np.ndarray:
        return self.assign[var]

    def map(self, fn) -> "OperatorAssignment":
        out = {v: _as_matrix(fn(M)) for v, M in self.assign.items()}
        dim = next(iter(out.values())).shape[0] if out else self.dim
        return OperatorAssignment(dim, out)


def embed_classical(solutions, d: int) -> OperatorAssignment:
    """Diagonal direct-sum embedding of classical solutions: variable v gets
    diag over the solutions of the root of unity indexed by s(v)."""
    solutions = list(solutions)
    if not solutions:
        raise ValueError("need at least one classical solution")
    keys = set(solutions[0])
    for s in solutions[1:]:
        if set(s) != keys:
            raise ValueError("solutions must share one variable set")
    assign = {}
    for v in sorted(keys):
        diag = [root_value(s[v], d) for s in solutions]
        assign[v] = np.diag(diag)
    return OperatorAssignment(len(solutions), assign)


def operator_assignment_to_obj(A: OperatorAssignment) -> dict:
    return {
        "dim": A.dim,
        "assign": {
            v: [[[float(x.real), float(x.imag)] for x in row] for row in M]
            for v, M in sorted(A.assign.items())
        },
    }


def operator_assignment_to_json(A: OperatorAssignment) -> str:
    return json.dumps(operator_assignment_to_obj(A), sort_keys=True, indent=1)


def operator_assignment_from_obj(obj: dict) -> OperatorAssignment:
    dim = int(obj["dim"])
    assign = {}
    for v, rows in obj["assign"].items():
        assign[v] = np.array([[complex(re, im) for re, im in row] for row in rows])
    return OperatorAssignment(dim, assign)


def operator_assignment_from_json(text: str) -> OperatorAssignment:
    return operator_assignment_from_obj(json.loads(text))


# ---------------------------------------------------------------------------
# Verification


@dataclass
class VerificationReport:
    tol: float
    normality: list = field(default_factory=list)  # (var, normality res, order res)
    commutation: list = field(default_factory=list)  # (constraint idx, u, w, res)
    polynomial: list = field(default_factory=list)  # (constraint idx, res)

    @property
    def max_residual(self) -> float:
        worst = 0.0
        for _, a, b in self.normality:
            worst = max(worst, a, b)
        for _, _, _, r in self.commutation:
            worst = max(worst, r)
        for _, r in self.polynomial:
            worst = max(worst, r)
        return worst

    @property
    def worst_offender(self) -> tuple[str, float]:
        label, worst = "none", 0.0
        for v, a, b in self.normality:
            if a > worst:
                label, worst = f"normality {v}", a
            if b > worst:
                label, worst = f"order {v}", b
        for ci, u, w, r in self.commutation:
            if r > worst:
                label, worst = f"commutation c{ci} {u},{w}", r
        for ci, r in self.polynomial:
            if r > worst:
                label, worst = f"polynomial c{ci}", r
        return label, worst

    @property
    def verdict(self) -> str:
        return "SATISFYING" if self.max_residual <= self.tol else "VIOLATING"

    def lines(self) -> list[str]:
        out = [f"tol: {self.tol:g}"]
        for v, a, b in self.normality:
            out.append(f"normal {v} {a:.3e} {b:.3e}")
        for ci, u, w, r in self.commutation:
            out.append(f"commute c{ci} {u} {w} {r:.3e}")
        for ci, r in self.polynomial:
            out.append(f"poly c{ci} {r:.3e}")
        label, worst = self.worst_offender
        out.append(f"worst: {label} {worst:.3e}")
        out.append(f"verdict: {self.verdict}")
        return out


def verify_assignment(inst: Instance, A: OperatorAssignment, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Check an operator assignment against an instance: per-variable
    normality and order, pairwise commutation inside every constraint scope,
    and the characteristic polynomial of every constraint evaluating to the
    identity."""
    report = VerificationReport(tol=tol)
    for v in inst.variables:
        if v not in A.assign:
            raise KeyError(f"assignment is missing variable {v!r}")
        a, b = check_normal_order(A[v], inst.d)
        report.normality.append((v, a, b))
    poly_cache: dict[str, MultiPoly] = {}
    for ci, c in enumerate(inst.constraints):
        mats = [A[v] for v in c.scope]
        for i in range(len(c.scope)):
            for j in range(i + 1, len(c.scope)):
                res = commutator_norm(mats[i], mats[j])
                report.commutation.append((ci, c.scope[i], c.scope[j], res))
        if c.rel not in poly_cache:
            poly_cache[c.rel] = relation_polynomial(inst.language[c.rel])
        value = eval_multipoly_matrix(poly_cache[c.rel], mats)
        report.polynomial.append((ci, fro(value - np.eye(A.dim))))
    return report


# ---------------------------------------------------------------------------
# Simultaneous diagonalization


def _hermitian_parts(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    H = (M + M.conj().T) / 2
    K = (M - M.conj().T) / (2j)
    return H, K


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(values)
    groups = [[order[0]]]
    for idx in order[1:]:
        if values[idx] - values[groups[-1][-1]] <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return [np.array(g) for g in groups]


def simultaneous_diagonalize(mats, tol: float = DEFAULT_TOL, seed: int = 0):
    """Common eigenbasis of pairwise commuting normal matrices.

    Returns (U, diags) with U unitary, U A_i U^-1 = diags_i.  First splits on
    a random real combination of the Hermitian and anti-Hermitian parts, then
    refines any residual degenerate block against each matrix in turn.
    Raises if the inputs fail commutation or normality beyond tol.
    """
    mats = [_as_matrix(M) for M in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    n = mats[0].shape[0]
    scale = max(1.0, max(fro(M) for M in mats))
    for i, M in enumerate(mats):
        if M.shape[0] != n:
            raise ValueError("matrices must share one dimension")
        if fro(M @ M.conj().T - M.conj().T @ M) > tol * scale * scale:
            raise ValueError(f"matrix {i} is not normal within tolerance")
        for j in range(i + 1, len(mats)):
            if commutator_norm(M, mats[j]) > tol * scale * scale:
                raise ValueError(f"matrices {i} and {j} do not commute within tolerance")

    herms: list[np.ndarray] = []
    for M in mats:
        H, K = _hermitian_parts(M)
        herms.append(H)
        herms.append(K)
    rng = np.random.default_rng(seed)
    mix = sum(float(c) * H for c, H in zip(rng.standard_normal(len(herms)), herms))

    basis = np.eye(n, dtype=complex)
    blocks = [np.arange(n)]

    def split(block_cols: np.ndarray, H: np.ndarray, ctol: float) -> list[np.ndarray]:
        sub = basis[:, block_cols]
        B = sub.conj().T @ H @ sub
        B = (B + B.conj().T) / 2
        w, W = np.linalg.eigh(B)
        basis[:, block_cols] = sub @ W
        return [block_cols[g] for g in _cluster(w, ctol)]

    ctol = max(tol, 1e-12) * max(1.0, fro(mix))
    new_blocks = []
    for blk in blocks:
        new_blocks.extend(split(blk, mix, ctol) if len(blk) > 1 else [blk])
    blocks = new_blocks

    for H in herms:
        ctol_h = max(tol, 1e-12) * max(1.0, fro(H))
        new_blocks = []
        for blk in blocks:
            new_blocks.extend(split(blk, H, ctol_h) if len(blk) > 1 else [blk])
        blocks = new_blocks

    U = basis.conj().T
    diags = []
    for M in mats:
        D = U @ M @ basis
        diags.append(np.diag(np.diag(D)))
    return U, diags


# ---------------------------------------------------------------------------
# Randomized implication probe


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    phases = np.diag(R).copy()
    phases /= np.abs(phases)
    return Q * phases


def operator_implication_probe(
    premises,
    conclusion: MultiPoly,
    trials: int = 50,
    n: int = 4,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> bool:
    """Sample fully commuting normal order-d tuples and test that whenever the
    premise polynomials vanish, the conclusion does as well.

    The tuples are random unitary conjugations of diagonal root-of-unity
    matrices whose diagonal slots are drawn from the premise-satisfying subset
    of U_d^r, so every trial exercises the implication.  Raises when the
    implication already fails over U_d itself.
    """
    premises = list(premises)
    if premises:
        d = premises[0].d
        variables = premises[0].vars
        for q in premises + [conclusion]:
            if q.d != d or q.vars != variables:
                raise ValueError("premises and conclusion must share domain and variables")
    else:
        d, variables = conclusion.d, conclusion.vars
    r = len(variables)
    satisfying = []
    for point in product(range(d), repeat=r):
        cyc_point = [embed(k, d) for k in point]
        if all(q.eval(cyc_point).is_zero() for q in premises):
            if not conclusion.eval(cyc_point).is_zero():
                raise ValueError(
                    f"implication fails over U_d at point {point}; probe not applicable"
                )
            satisfying.append(point)
    if not satisfying:
        return True  # premises unsatisfiable over U_d: nothing to sample
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        slots = [satisfying[rng.integers(len(satisfying))] for _ in range(n)]
        U = random_unitary(n, rng)
        mats = []
        for j in range(r):
            D = np.diag([root_value(slot[j], d) for slot in slots])
            mats.append(U @ D @ U.conj().T)
        if any(fro(eval_multipoly_matrix(q, mats)) > tol for q in premises):
            return False  # construction failed to satisfy premises: treat as probe failure
        if fro(eval_multipoly_matrix(conclusion, mats)) > 10 * tol:
            return False
    return True
