"""Truncated Fock representations and the numerical hyperrigidity certificate.

The Fock space is ``H = H_0 + ... + H_N`` with ``H_k = X^{(x)k} (x)_A H_0`` and
``H_0 = C^{n_1} + ... + C^{n_B}``; concretely ``H_k = sum_i C^{m^(k)_i}``.
``pi1(x)`` creates ``H_k -> H_{k+1}`` and annihilates the top level.

The certificate dilates ``(pi0, pi1)`` by a truncated unilateral shift ``V``
on ``C^M`` and a truncated bilateral shift ``U`` on ``C^{2M+1}`` (indices
``-M..M``), twisting only the part of ``pi1`` outside ``P = pi0(1_J)``. The
compression ``Phi`` onto indices ``0..M-1`` matches the two dilations on
the generators ``a, x, y*`` but not on products ``x y*`` unless
``Q pi1(X) = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import matcore as mc
from .correspondence import (
    Correspondence,
    creation_blocks,
    katsura_ideal,
    tensor_product,
    validate,
)
from .cstar import AlgebraElement, Ideal, unit_of_ideal
from .hilbmod import ModuleElement, frame, inner_product


class CertificateError(RuntimeError):
    """An internal consistency check of the construction failed."""


# --------------------------------------------------------------------------
# Fock representation
# --------------------------------------------------------------------------


class ToeplitzRep:
    """Truncated Fock representation of depth ``N``."""

    def __init__(self, correspondence: Correspondence, depth: int):
        if depth < 1:
            raise ValueError("Fock depth must be >= 1")
        self.correspondence = correspondence
        self.depth = depth
        levels = [Correspondence.identity(correspondence.algebra)]
        for _ in range(depth):
            levels.append(tensor_product(correspondence, levels[-1]))
        self.levels = levels
        self.level_dims = [sum(lv.module.multiplicities) for lv in levels]
        self.level_offsets = mc.offsets(self.level_dims)
        self.hilbert_dim = self.level_offsets[-1]
        self._pi1_cache: dict[tuple[int, int, int], np.ndarray] = {}

    def level_slice(self, k: int) -> slice:
        return slice(self.level_offsets[k], self.level_offsets[k + 1])

    @cached_property
    def level_projections(self) -> list[np.ndarray]:
        out = []
        for k in range(self.depth + 1):
            p = mc.zeros(self.hilbert_dim, self.hilbert_dim)
            s = self.level_slice(k)
            p[s, s] = mc.eye(self.level_dims[k])
            out.append(p)
        return out

    def below_top(self) -> np.ndarray:
        """Projection onto levels ``0..N-1``."""
        return sum(self.level_projections[:-1], mc.zeros(self.hilbert_dim, self.hilbert_dim))

    def pi0(self, a: AlgebraElement) -> np.ndarray:
        return mc.block_diag(lv.left_action(a).to_matrix() for lv in self.levels)

    def pi1(self, x: ModuleElement) -> np.ndarray:
        if x.module != self.correspondence.module:
            raise ValueError("element is not in the correspondence module")
        out = mc.zeros(self.hilbert_dim, self.hilbert_dim)
        for k in range(self.depth):
            block = mc.block_diag(creation_blocks(x, self.levels[k]))
            out[self.level_slice(k + 1), self.level_slice(k)] = block
        return out

    def pi1_basis(self, idx: tuple[int, int, int]) -> np.ndarray:
        if idx not in self._pi1_cache:
            self._pi1_cache[idx] = self.pi1(self.correspondence.module.basis_element(*idx))
        return self._pi1_cache[idx]

    def module_axiom_residual(self, a: AlgebraElement, x: ModuleElement) -> float:
        """``||pi0(a) pi1(x) - pi1(a.x)||``."""
        return mc.op_norm(self.pi0(a) @ self.pi1(x) - self.pi1(self.correspondence.act(a, x)))

    def inner_product_defect(self, x: ModuleElement, y: ModuleElement) -> np.ndarray:
        """``pi1(x)* pi1(y) - pi0(<x, y>)``; nonzero only on the top level."""
        return mc.adjoint(self.pi1(x)) @ self.pi1(y) - self.pi0(inner_product(x, y))

    def covariance_residual(self, ideal: Ideal | None = None, tol=None) -> float:
        """Diagnostic: ``max ||phi_pi(lambda(a)) - pi0(a)||`` over matrix units of ``J``.

        ``phi_pi(lambda(a)) = sum_k pi1(a.x_k) pi1(x_k)*`` for a normalized frame
        ``x_k``. The Fock representation is never covariant on level 0, so this
        is a measurement, not a gate.
        """
        c = self.correspondence
        if ideal is None:
            ideal = katsura_ideal(c, tol)
        basis = c.module.basis()
        if not basis:
            return max((1.0 for j in ideal.members), default=0.0)
        f = frame(basis, tol, module=c.module)
        worst = 0.0
        for j, p, q in c.algebra.matrix_units():
            if j not in ideal.members:
                continue
            a = c.algebra.matrix_unit(j, p, q)
            lhs = sum(self.pi1(c.act(a, v)) @ mc.adjoint(self.pi1(v)) for v in f.vectors)
            worst = max(worst, mc.op_norm(lhs - self.pi0(a)))
        return worst


def fock_rep(c: Correspondence, depth: int) -> ToeplitzRep:
    return ToeplitzRep(c, depth)


# --------------------------------------------------------------------------
# Sums of Kronecker products
# --------------------------------------------------------------------------


@dataclass
class KronSum:
    """``sum_t A_t (x) S_t`` with ``A_t`` on ``H`` and ``S_t`` on the shift space."""

    terms: list[tuple[np.ndarray, np.ndarray]]

    def __matmul__(self, other: "KronSum") -> "KronSum":
        return KronSum([(a @ b, s @ t) for a, s in self.terms for b, t in other.terms])

    def __sub__(self, other: "KronSum") -> "KronSum":
        return KronSum(self.terms + [(-a, s) for a, s in other.terms])

    def adjoint(self) -> "KronSum":
        return KronSum([(mc.adjoint(a), mc.adjoint(s)) for a, s in self.terms])

    def compress(self, w_h: np.ndarray | None, w_s: np.ndarray | None) -> "KronSum":
        """``(W_h (x) W_s)^* T (W_h (x) W_s)``; ``None`` means identity."""
        def c(w, m):
            return m if w is None else mc.adjoint(w) @ m @ w
        return KronSum([(c(w_h, a), c(w_s, s)) for a, s in self.terms])

    def dense(self) -> np.ndarray:
        return sum(np.kron(a, s) for a, s in self.terms)

    def simplified(self) -> "KronSum":
        """Merge terms with equal shift factors, then equal ``H`` factors; drop zeros."""
        merged: list[tuple[np.ndarray, np.ndarray]] = []
        for a, s in self.terms:
            for k, (b, t) in enumerate(merged):
                if t.shape == s.shape and np.array_equal(t, s):
                    merged[k] = (b + a, t)
                    break
            else:
                merged.append((a, s))
        merged2: list[tuple[np.ndarray, np.ndarray]] = []
        for a, s in merged:
            for k, (b, t) in enumerate(merged2):
                if b.shape == a.shape and np.array_equal(b, a):
                    merged2[k] = (b, t + s)
                    break
            else:
                merged2.append((a, s))
        return KronSum([(a, s) for a, s in merged2 if np.any(a) and np.any(s)])

    def norm(self) -> float:
        """Exact operator norm, via ``||A (x) S|| = ||A|| ||S||`` for one term."""
        s = self.simplified()
        if not s.terms:
            return 0.0
        if len(s.terms) == 1:
            a, t = s.terms[0]
            return mc.op_norm(a) * mc.op_norm(t)
        return mc.op_norm(s.dense())

    def residual_bound(self) -> float:
        """Triangle-inequality upper bound on the norm."""
        return sum(mc.op_norm(a) * mc.op_norm(t) for a, t in self.simplified().terms)


# --------------------------------------------------------------------------
# Shift dilation
# --------------------------------------------------------------------------


def unilateral_shift(m: int) -> np.ndarray:
    """``V e_p = e_{p+1}`` on ``C^m``, annihilating the last basis vector."""
    return np.eye(m, k=-1, dtype=np.complex128)


def bilateral_shift(m: int) -> np.ndarray:
    """Shift on ``C^{2m+1}`` with indices ``-m..m``; the vector at ``m`` is annihilated."""
    return np.eye(2 * m + 1, k=-1, dtype=np.complex128)


def corner_isometry(m: int) -> np.ndarray:
    """Embedding of ``C^m`` as indices ``0..m-1`` of ``C^{2m+1}``."""
    w = mc.zeros(2 * m + 1, m)
    w[m:2 * m, :] = mc.eye(m)
    return w


class DilatedPair:
    """The pairs ``(tau0, tau1_V)`` and ``(tau0, tau1_U)`` built from ``P = pi0(1_J)``."""

    def __init__(self, base: ToeplitzRep, ideal: Ideal, shift_dim: int, tol=None):
        if shift_dim < 2:
            raise ValueError("shift dimension must be >= 2")
        t = mc.tolerance(tol)
        self.base = base
        self.ideal = ideal
        self.shift_dim = shift_dim
        self.tol = t
        self.P = base.pi0(unit_of_ideal(ideal))
        self.Q = mc.eye(base.hilbert_dim) - self.P
        self.V = unilateral_shift(shift_dim)
        self.U = bilateral_shift(shift_dim)
        self.W = corner_isometry(shift_dim)
        self.I_V = mc.eye(shift_dim)
        self.I_U = mc.eye(2 * shift_dim + 1)
        alg = base.correspondence.algebra
        worst = max(
            (mc.op_norm(self.P @ base.pi0(alg.matrix_unit(*u)) - base.pi0(alg.matrix_unit(*u)) @ self.P)
             for u in alg.matrix_units()),
            default=0.0,
        )
        if not t.accepts(worst):
            raise CertificateError(f"P does not commute with pi0(A): residual {worst:.3e}")

    # structured forms
    def tau0_terms(self, a: AlgebraElement, bilateral: bool = False) -> KronSum:
        return KronSum([(self.base.pi0(a), self.I_U if bilateral else self.I_V)])

    def tau1_terms(self, x: ModuleElement, bilateral: bool = False) -> KronSum:
        return self.tau1_terms_from(self.base.pi1(x), bilateral)

    def tau1_terms_from(self, pi1x: np.ndarray, bilateral: bool = False) -> KronSum:
        if bilateral:
            return KronSum([(self.P @ pi1x, self.I_U), (self.Q @ pi1x, self.U)])
        return KronSum([(self.P @ pi1x, self.I_V), (self.Q @ pi1x, self.V)])

    def Phi(self, t: KronSum) -> KronSum:
        return t.compress(None, self.W)

    # dense forms, used for brute-force cross-checks
    def tau0(self, a: AlgebraElement) -> np.ndarray:
        return self.tau0_terms(a).dense()

    def tauV1(self, x: ModuleElement) -> np.ndarray:
        return self.tau1_terms(x).dense()

    def tauU1(self, x: ModuleElement) -> np.ndarray:
        return self.tau1_terms(x, bilateral=True).dense()

    def Phi_dense(self, t: np.ndarray) -> np.ndarray:
        w = np.kron(mc.eye(self.base.hilbert_dim), self.W)
        return mc.adjoint(w) @ t @ w

    def toeplitz_residuals(self) -> dict[str, float]:
        """Check the Toeplitz identities of ``(tau0, tau1_V)`` on generators.

        The inner-product identity is compressed away from the top Fock level
        and the last shift coordinate, where truncation breaks ``V*V = I``.
        """
        c = self.base.correspondence
        alg = c.algebra
        basis_idx = list(c.module.basis_indices())
        module_res = 0.0
        for u in alg.matrix_units():
            a = alg.matrix_unit(*u)
            for idx in basis_idx:
                x = c.module.basis_element(*idx)
                diff = self.tau0_terms(a) @ self.tau1_terms(x) - self.tau1_terms(c.act(a, x))
                module_res = max(module_res, diff.residual_bound())
        e_h = self.base.below_top()
        e_s = mc.eye(self.shift_dim)
        e_s[-1, -1] = 0.0
        inner_res = 0.0
        for ix in basis_idx:
            tx = self.tau1_terms_from(self.base.pi1_basis(ix)).adjoint()
            for iy in basis_idx:
                ty = self.tau1_terms_from(self.base.pi1_basis(iy))
                x = c.module.basis_element(*ix)
                y = c.module.basis_element(*iy)
                diff = (tx @ ty - self.tau0_terms(inner_product(x, y))).compress(e_h, e_s)
                inner_res = max(inner_res, diff.residual_bound())
        return {"module": module_res, "inner_product": inner_res}


def shift_dilation(rep: ToeplitzRep, ideal: Ideal, shift_dim: int, tol=None) -> DilatedPair:
    return DilatedPair(rep, ideal, shift_dim, tol)


# --------------------------------------------------------------------------
# Certificate
# --------------------------------------------------------------------------


@dataclass
class CertificateReport:
    defect: float
    agreement_on_S: float
    verdict: bool
    depth: int
    shift_dim: int
    tol: float
    basis: list[tuple[int, int, int]]
    defect_table: np.ndarray
    analytic_max: float
    covariance_residual: float | None = None
    random_max: float | None = None
    notes: list[str] = field(default_factory=list)

    def worst_pair(self) -> tuple[tuple[int, int, int], tuple[int, int, int]] | None:
        if self.defect_table.size == 0:
            return None
        p, q = np.unravel_index(int(np.argmax(self.defect_table)), self.defect_table.shape)
        return self.basis[p], self.basis[q]

    def pair_defect(self, x_idx, y_idx) -> float:
        return float(self.defect_table[self.basis.index(tuple(x_idx)), self.basis.index(tuple(y_idx))])


def _shift_coefficients(d: DilatedPair) -> dict[tuple[str, str], np.ndarray]:
    """``Phi(S_s S_t^*) - R_s R_t^*`` for ``s, t`` in ``{P, Q}``.

    ``S = (I, U)`` on the bilateral space and ``R = (I, V)`` on the unilateral
    one, so ``tau_U(x) = sum_s s pi1(x) (x) S_s`` and likewise for ``tau_V``.
    """
    s_u = {"P": d.I_U, "Q": d.U}
    r_v = {"P": d.I_V, "Q": d.V}
    out = {}
    for s in "PQ":
        for t in "PQ":
            phi = mc.adjoint(d.W) @ s_u[s] @ mc.adjoint(s_u[t]) @ d.W
            out[(s, t)] = phi - r_v[s] @ mc.adjoint(r_v[t])
    return out


def _agreement_on_S(d: DilatedPair) -> float:
    c = d.base.correspondence
    worst = 0.0
    for u in c.algebra.matrix_units():
        a = c.algebra.matrix_unit(*u)
        worst = max(worst, (d.Phi(d.tau0_terms(a, bilateral=True)) - d.tau0_terms(a)).norm())
    for idx in c.module.basis_indices():
        pi1x = d.base.pi1_basis(idx)
        diff = d.Phi(d.tau1_terms_from(pi1x, True)) - d.tau1_terms_from(pi1x)
        worst = max(worst, diff.norm(), diff.adjoint().norm())
    return worst


def _pair_defects(d: DilatedPair, pis: np.ndarray, coeffs) -> np.ndarray:
    """Defect norms for all pairs of the stacked ``pi1`` matrices ``pis``."""
    proj = {"P": d.P, "Q": d.Q}
    live = [(s, t, m) for (s, t), m in coeffs.items() if np.any(m)]
    b = pis.shape[0]
    table = np.zeros((b, b))
    if not live or b == 0:
        return table
    if len(live) == 1:
        s, t, m = live[0]
        left = proj[s] @ pis
        right = proj[t] @ pis
        scale = mc.op_norm(m)
        for p in range(b):
            prods = left[p] @ np.conj(np.transpose(right, (0, 2, 1)))
            nz = np.any(prods != 0, axis=(1, 2))
            if np.any(nz):
                table[p, nz] = mc.batched_op_norm(prods[nz]) * scale
        return table
    for p in range(b):
        for q in range(b):
            ks = KronSum([(proj[s] @ pis[p] @ mc.adjoint(pis[q]) @ proj[t], m) for s, t, m in live])
            table[p, q] = ks.norm()
    return table


def certificate(
    c: Correspondence,
    depth: int = 2,
    shift_dim: int = 4,
    tol=None,
    *,
    n_random: int = 0,
    seed: int = 0,
    verify_dilation: bool = False,
    covariance: bool = False,
) -> CertificateReport:
    """Build the shift dilation for ``J = J_X`` and measure the product defect.

    ``defect`` is the maximum over standard-basis pairs of
    ``||Phi(tau_U(x) tau_U(y)^*) - tau_V(x) tau_V(y)^*||``. Random pairs, when
    requested, only populate ``random_max``.
    """
    t = mc.tolerance(tol)
    validate(c, t)
    rep = fock_rep(c, depth)
    ideal = katsura_ideal(c, t)
    d = shift_dilation(rep, ideal, shift_dim, t)
    notes = []
    if verify_dilation:
        res = d.toeplitz_residuals()
        for name, value in res.items():
            if not t.accepts(value):
                raise CertificateError(f"dilated pair violates the {name} identity: {value:.3e}")
    agreement = _agreement_on_S(d)
    if not t.accepts(agreement):
        raise CertificateError(f"dilations disagree on S(A,X) generators: {agreement:.3e}")
    coeffs = _shift_coefficients(d)
    basis = list(c.module.basis_indices())
    pis = np.array([rep.pi1_basis(idx) for idx in basis]).reshape(len(basis), rep.hilbert_dim, rep.hilbert_dim)
    table = _pair_defects(d, pis, coeffs)
    defect = float(table.max()) if table.size else 0.0

    qpis = d.Q @ pis
    analytic = 0.0
    for p in range(len(basis)):
        prods = qpis[p] @ np.conj(np.transpose(qpis, (0, 2, 1)))
        analytic = max(analytic, float(mc.batched_op_norm(prods).max()))
    if abs(analytic - defect) > t.value:
        notes.append(
            f"defect {defect:.6e} differs from ||Q pi1(x) pi1(y)* Q|| = {analytic:.6e}"
        )

    random_max = None
    if n_random:
        rng = np.random.default_rng(seed)
        rand = np.array([rep.pi1(c.module.random_element(rng)) for _ in range(2 * n_random)])
        rand = rand.reshape(2 * n_random, rep.hilbert_dim, rep.hilbert_dim)
        random_max = float(max(
            (_pair_defects(d, rand[[2 * k, 2 * k + 1]], coeffs)[0, 1] for k in range(n_random)),
            default=0.0,
        ))
    cov = rep.covariance_residual(ideal, t) if covariance else None
    return CertificateReport(
        defect=defect,
        agreement_on_S=agreement,
        verdict=t.accepts(defect),
        depth=depth,
        shift_dim=shift_dim,
        tol=t.value,
        basis=basis,
        defect_table=table,
        analytic_max=analytic,
        covariance_residual=cov,
        random_max=random_max,
        notes=notes,
    )


def brute_force_defect(c: Correspondence, x: ModuleElement, y: ModuleElement,
                       depth: int = 2, shift_dim: int = 4, tol=None) -> float:
    """Dense reference computation of one product defect, with no structure exploited."""
    rep = fock_rep(c, depth)
    d = shift_dilation(rep, katsura_ideal(c, tol), shift_dim, tol)
    lhs = d.Phi_dense(d.tauU1(x) @ mc.adjoint(d.tauU1(y)))
    rhs = d.tauV1(x) @ mc.adjoint(d.tauV1(y))
    return mc.op_norm(lhs - rhs)


# --------------------------------------------------------------------------
# Schwarz machinery
# --------------------------------------------------------------------------


class NotIsometryError(ValueError):
    pass


class HypothesisError(ValueError):
    """The corner bound required by :func:`epsilon_bound_check` does not hold."""

    def __init__(self, corner: float, eps: float):
        super().__init__(f"corner norm {corner:.3e} exceeds eps = {eps:.3e}")
        self.corner = corner


@dataclass(frozen=True, eq=False)
class StinespringMap:
    """``phi(T) = W^* (I_r (x) T) W`` with ``W`` an isometry: a unital completely positive map."""

    W: np.ndarray
    multiplicity: int
    dim: int

    def __post_init__(self):
        w = mc.as_cmatrix(self.W)
        if w.shape[0] != self.multiplicity * self.dim:
            raise ValueError(f"W needs {self.multiplicity * self.dim} rows, got {w.shape[0]}")
        res = mc.op_norm(mc.adjoint(w) @ w - mc.eye(w.shape[1]))
        if not mc.tolerance().accepts(res):
            raise NotIsometryError(f"W is not an isometry: ||W*W - I|| = {res:.3e}")
        object.__setattr__(self, "W", w)

    @classmethod
    def random(cls, rng: np.random.Generator, dim: int, multiplicity: int, out_dim: int) -> "StinespringMap":
        return cls(mc.random_isometry(rng, dim * multiplicity, out_dim), multiplicity, dim)

    @classmethod
    def identity(cls, dim: int) -> "StinespringMap":
        return cls(mc.eye(dim), 1, dim)

    def rho(self, t: np.ndarray) -> np.ndarray:
        return np.kron(mc.eye(self.multiplicity), t)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return mc.adjoint(self.W) @ self.rho(t) @ self.W


def schwarz_defect(phi: StinespringMap, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``phi(a b^*) - phi(a) phi(b)^*``; positive semidefinite when ``a = b``."""
    return phi(a @ mc.adjoint(b)) - phi(a) @ mc.adjoint(phi(b))


def _row(elems) -> np.ndarray:
    if isinstance(elems, np.ndarray) and elems.ndim == 2:
        return elems
    return np.hstack(list(elems))


def block_positivity_paths(a_row, b_row, m_block, tol=None) -> tuple[bool, bool]:
    """Positivity of ``[[I, C^*], [C, M]]`` with ``C = [A; B]``, and of ``M - C C^*``."""
    t = mc.tolerance(tol)
    a = _row(a_row)
    b = _row(b_row)
    m = mc.as_cmatrix(m_block)
    if a.shape != b.shape:
        raise ValueError(f"row shapes differ: {a.shape} vs {b.shape}")
    col = np.vstack([a, b])
    if m.shape != (col.shape[0], col.shape[0]):
        raise ValueError(f"M must be {col.shape[0]}x{col.shape[0]}, got {m.shape}")
    full = np.block([[mc.eye(col.shape[1]), mc.adjoint(col)], [col, m]])
    return mc.is_psd(full, t), mc.is_psd(m - col @ mc.adjoint(col), t)


def block_positivity(a_row, b_row, m_block, tol=None) -> bool:
    via_block, via_schur = block_positivity_paths(a_row, b_row, m_block, tol)
    if via_block != via_schur:
        raise CertificateError(
            f"block positivity paths disagree: full matrix {via_block}, Schur complement {via_schur}"
        )
    return via_block


@dataclass(frozen=True)
class EpsilonBound:
    holds: bool
    off_diagonal_sq: float
    corner: float
    schwarz_bound: float
    norm_bound: float

    def __bool__(self):
        return self.holds


def epsilon_bound_check(phi: StinespringMap, a_elems: Sequence[np.ndarray], b_elems: Sequence[np.ndarray],
                        eps: float, slack: float = 1e-9) -> EpsilonBound:
    """Check ``||phi(A B^*) - phi(A) phi(B)^*||^2 <= eps ||corner_22|| <= 2 eps ||B B^*||``.

    ``phi`` acts entrywise on the rows ``A = (a_1..a_n)``, ``B = (b_1..b_n)``.
    Requires ``||phi(A A^*) - phi(A) phi(A)^*|| <= eps``.
    """
    if len(a_elems) != len(b_elems):
        raise ValueError("rows must have the same length")

    def corner(xs, ys):
        return sum(schwarz_defect(phi, x, y) for x, y in zip(xs, ys))

    c11 = corner(a_elems, a_elems)
    c11_norm = mc.op_norm(c11)
    if c11_norm > eps + slack:
        raise HypothesisError(c11_norm, eps)
    off = mc.op_norm(corner(a_elems, b_elems)) ** 2
    c22 = mc.op_norm(corner(b_elems, b_elems))
    bb = mc.op_norm(sum(b @ mc.adjoint(b) for b in b_elems))
    schwarz = eps * c22
    outer = 2 * eps * bb
    holds = off <= schwarz + slack and schwarz <= outer + slack
    return EpsilonBound(holds, off, c11_norm, schwarz, outer)
