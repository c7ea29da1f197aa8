"""C*-correspondences over multi-matrix algebras and the hyperrigidity test.

A left action ``lambda: A -> L(X)`` is encoded block by block: for module
block ``i`` and algebra block ``j`` an intertwiner ``V_ij`` of shape
``m_i x (c_ij n_j)`` so that

    lambda(a)_i = sum_j V_ij (I_{c_ij} (x) a_j) V_ij^*.

``c_ij`` is the multiplicity of ``M_{n_j}`` inside ``M_{m_i}``. The map is a
*-homomorphism exactly when each ``V_ij`` is an isometry and the ranges for
different ``j`` are orthogonal; :func:`validate` checks this on matrix units.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import matcore as mc
from .cstar import AlgebraElement, Ideal, MultiMatrixAlgebra, StructureError, unit_of_ideal
from .hilbmod import HilbertModule, ModuleElement, ModuleOperator, module_norm

log = logging.getLogger(__name__)


class InvalidLeftActionError(ValueError):
    def __init__(self, message: str, pair=None, residual: float = float("nan")):
        super().__init__(message)
        self.pair = pair
        self.residual = residual


@dataclass(frozen=True, eq=False)
class Correspondence:
    module: HilbertModule
    intertwiners: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        alg = self.module.algebra
        rows = self.module.multiplicities
        if len(self.intertwiners) != len(rows):
            raise StructureError(f"need intertwiners for {len(rows)} module blocks")
        fixed = []
        for i, row in enumerate(self.intertwiners):
            if len(row) != alg.num_blocks:
                raise StructureError(f"module block {i + 1}: need {alg.num_blocks} intertwiners")
            out = []
            for j, v in enumerate(row):
                v = mc.as_cmatrix(v) if np.size(v) else mc.zeros(rows[i], 0)
                n = alg.block_sizes[j]
                if v.shape[0] != rows[i] or v.shape[1] % n:
                    raise StructureError(
                        f"intertwiner ({i + 1},{j + 1}) has shape {v.shape}; "
                        f"expected {rows[i]} rows and a multiple of {n} columns"
                    )
                out.append(v)
            fixed.append(tuple(out))
        object.__setattr__(self, "intertwiners", tuple(fixed))

    @property
    def algebra(self) -> MultiMatrixAlgebra:
        return self.module.algebra

    @classmethod
    def from_multiplicities(
        cls,
        algebra: MultiMatrixAlgebra,
        module_multiplicities: Sequence[int],
        lambda_multiplicities,
        unitaries: Sequence[np.ndarray] | None = None,
    ) -> "Correspondence":
        """Build the left action with the given multiplicity matrix.

        Copies of ``M_{n_j}`` are stacked down the diagonal of ``M_{m_i}`` in
        block order; the remaining ``m_i - sum_j c_ij n_j`` rows are the
        degenerate part. ``unitaries`` optionally rotates each module block.
        """
        module = HilbertModule(algebra, tuple(module_multiplicities))
        c = np.asarray(lambda_multiplicities, dtype=int).reshape(len(module.multiplicities), algebra.num_blocks)
        if np.any(c < 0):
            raise ValueError("lambda multiplicities must be >= 0")
        rows = []
        for i, m in enumerate(module.multiplicities):
            used = int(sum(c[i, j] * n for j, n in enumerate(algebra.block_sizes)))
            if used > m:
                raise StructureError(
                    f"module block {i + 1}: sum_j c_ij n_j = {used} exceeds multiplicity {m}"
                )
            ident = mc.eye(m)
            w = ident if unitaries is None else mc.as_cmatrix(unitaries[i], (m, m))
            row, off = [], 0
            for j, n in enumerate(algebra.block_sizes):
                width = int(c[i, j]) * n
                row.append(w @ ident[:, off:off + width])
                off += width
            rows.append(tuple(row))
        return cls(module, tuple(rows))

    @classmethod
    def identity(cls, algebra: MultiMatrixAlgebra) -> "Correspondence":
        """``A`` over itself with left multiplication."""
        b = algebra.num_blocks
        return cls.from_multiplicities(algebra, algebra.block_sizes, np.eye(b, dtype=int))

    @classmethod
    def zero_action(cls, module: HilbertModule) -> "Correspondence":
        b = module.algebra.num_blocks
        return cls.from_multiplicities(module.algebra, module.multiplicities, np.zeros((b, b), dtype=int))

    def multiplicity_matrix(self) -> np.ndarray:
        sizes = self.algebra.block_sizes
        return np.array(
            [[v.shape[1] // sizes[j] for j, v in enumerate(row)] for row in self.intertwiners], dtype=int
        ).reshape(len(self.intertwiners), len(sizes))

    def left_action(self, a: AlgebraElement) -> ModuleOperator:
        """``lambda(a)`` as an operator on the module."""
        if a.algebra != self.algebra:
            raise StructureError("algebra element from another algebra")
        blocks = []
        for i, row in enumerate(self.intertwiners):
            m = self.module.multiplicities[i]
            acc = mc.zeros(m, m)
            for j, v in enumerate(row):
                if v.shape[1]:
                    c = v.shape[1] // self.algebra.block_sizes[j]
                    acc += v @ np.kron(mc.eye(c), a.blocks[j]) @ mc.adjoint(v)
            blocks.append(acc)
        return self.module.operator(blocks)

    def act(self, a: AlgebraElement, x: ModuleElement) -> ModuleElement:
        """Left action ``a . x``."""
        return self.left_action(a)(x)

    def change_basis(self, unitaries: Sequence[np.ndarray]) -> "Correspondence":
        """Conjugate each module block by a unitary (an isomorphic correspondence)."""
        return Correspondence(
            self.module,
            tuple(tuple(w @ v for v in row) for w, row in zip(unitaries, self.intertwiners)),
        )

    def unit_images(self) -> np.ndarray:
        """``lambda(E)`` for every matrix unit, as dense matrices on ``C^{sum m_i}``.

        Order follows :meth:`MultiMatrixAlgebra.matrix_units`.
        """
        units = list(self.algebra.matrix_units())
        d = sum(self.module.multiplicities)
        out = np.zeros((len(units), d, d), dtype=np.complex128)
        for k, (j, p, q) in enumerate(units):
            out[k] = self.left_action(self.algebra.matrix_unit(j, p, q)).to_matrix()
        return out


def validate(c: Correspondence, tol=None) -> None:
    """Check that the left action is a *-homomorphism on matrix units.

    Raises :class:`InvalidLeftActionError` naming the worst-violating pair.
    """
    t = mc.tolerance(tol)
    units = list(c.algebra.matrix_units())
    index = {u: k for k, u in enumerate(units)}
    images = c.unit_images()
    if images.shape[1] == 0:
        return
    adj = np.array([images[index[(j, q, p)]] for (j, p, q) in units])
    star = mc.batched_op_norm(np.conj(np.transpose(images, (0, 2, 1))) - adj)
    k = int(np.argmax(star))
    if not t.accepts(star[k]):
        raise InvalidLeftActionError(
            f"lambda(E)* != lambda(E*) for unit {_fmt_unit(units[k])}: residual {star[k]:.3e}",
            (units[k],), float(star[k]),
        )
    worst, worst_pair = 0.0, None
    for a, ua in enumerate(units):
        prods = images[a] @ images
        expected = np.zeros_like(prods)
        for b, ub in enumerate(units):
            if ua[0] == ub[0] and ua[2] == ub[1]:
                expected[b] = images[index[(ua[0], ua[1], ub[2])]]
        res = mc.batched_op_norm(prods - expected)
        b = int(np.argmax(res))
        if res[b] > worst:
            worst, worst_pair = float(res[b]), (ua, units[b])
    if not t.accepts(worst):
        raise InvalidLeftActionError(
            f"lambda is not multiplicative: worst pair {_fmt_unit(worst_pair[0])}, "
            f"{_fmt_unit(worst_pair[1])} with residual {worst:.3e}",
            worst_pair, worst,
        )


def _fmt_unit(u) -> str:
    j, p, q = u
    return f"E[{j + 1}]({p + 1},{q + 1})"


def _block_action_norms(c: Correspondence) -> list[float]:
    """Largest ``||lambda(E)||`` over the matrix units of each algebra block."""
    units = list(c.algebra.matrix_units())
    images = c.unit_images()
    norms = mc.batched_op_norm(images) if images.shape[1] else np.zeros(len(units))
    out = [0.0] * c.algebra.num_blocks
    for (j, _, _), nrm in zip(units, norms):
        out[j] = max(out[j], float(nrm))
    return out


def kernel_of_lambda(c: Correspondence, tol=None) -> Ideal:
    t = mc.tolerance(tol)
    norms = _block_action_norms(c)
    return Ideal.of(c.algebra, (j for j, nrm in enumerate(norms) if nrm <= t.value))


def katsura_ideal(c: Correspondence, tol=None) -> Ideal:
    """Largest ideal orthogonal to ``ker lambda`` (every ``lambda(a)`` is compact here)."""
    return kernel_of_lambda(c, tol).complement()


@dataclass(frozen=True, eq=False)
class HyperrigidityVerdict:
    hyperrigid: bool
    katsura_blocks: Ideal
    kernel_blocks: Ideal
    degeneracy_witness: ModuleElement | None = None
    witness_index: tuple[int, int, int] | None = None
    witness_residual: float = 0.0
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.hyperrigid != (self.degeneracy_witness is None):
            raise ValueError("a verdict carries a witness exactly when it is negative")


def is_hyperrigid(c: Correspondence, tol=None) -> HyperrigidityVerdict:
    """Decide whether ``J_X . X = X`` by checking ``lambda(1_J) = id`` on the standard basis."""
    t = mc.tolerance(tol)
    warnings = []
    for j, nrm in enumerate(_block_action_norms(c)):
        if t.value < nrm < 10 * t.value:
            warnings.append(f"algebra block {j + 1}: ||lambda(E)|| = {nrm:.3e} is borderline for ker lambda")
    kernel = kernel_of_lambda(c, t)
    katsura = kernel.complement()
    p = c.left_action(unit_of_ideal(katsura))
    worst, worst_idx = 0.0, None
    for idx in c.module.basis_indices():
        b = c.module.basis_element(*idx)
        res = module_norm(p(b) - b)
        if res > worst:
            worst, worst_idx = res, idx
    for w in warnings:
        log.warning(w)
    if t.accepts(worst):
        return HyperrigidityVerdict(True, katsura, kernel, warnings=tuple(warnings))
    return HyperrigidityVerdict(
        False, katsura, kernel,
        degeneracy_witness=c.module.basis_element(*worst_idx),
        witness_index=worst_idx,
        witness_residual=worst,
        warnings=tuple(warnings),
    )


def creation_blocks(x: ModuleElement, y: Correspondence) -> list[np.ndarray]:
    """Matrices of ``eta -> x (x) eta`` from ``Y`` into ``X (x)_A Y``, one per block.

    Block ``i`` maps ``C^{m^Y_i}`` to ``C^{m_i''}`` with
    ``m_i'' = sum_j c^Y_ij m^X_j``; column-wise it also sends ``Y_i`` to the
    block ``i`` of the tensor product.
    """
    alg = y.algebra
    if x.module.algebra != alg:
        raise StructureError("tensor factors over different algebras")
    out = []
    for i, row in enumerate(y.intertwiners):
        parts = []
        for j, v in enumerate(row):
            c = v.shape[1] // alg.block_sizes[j]
            parts.append(np.kron(mc.eye(c), x.blocks[j]) @ mc.adjoint(v))
        out.append(np.vstack(parts) if parts else mc.zeros(0, y.module.multiplicities[i]))
    return out


def tensor_product(x: Correspondence, y: Correspondence) -> Correspondence:
    """Internal tensor product ``X (x)_A Y`` with left action from ``X``.

    Inner product ``<x1 (x) y1, x2 (x) y2> = <y1, lambda_Y(<x1, x2>) y2>``; the
    multiplicity matrix is ``C_Y @ C_X``.
    """
    alg = x.algebra
    if y.algebra != alg:
        raise StructureError("tensor factors over different algebras")
    cy = y.multiplicity_matrix()
    mx = x.module.multiplicities
    mult = [int(sum(cy[i, j] * mx[j] for j in range(alg.num_blocks))) for i in range(len(cy))]
    rows = []
    for i in range(len(cy)):
        row = []
        for l, n in enumerate(alg.block_sizes):
            segments = [np.kron(mc.eye(int(cy[i, j])), x.intertwiners[j][l]) for j in range(alg.num_blocks)]
            row.append(mc.block_diag(segments) if segments else mc.zeros(mult[i], 0))
        rows.append(tuple(row))
    return Correspondence(HilbertModule(alg, tuple(mult)), tuple(rows))


def tensor_element(x: ModuleElement, eta: ModuleElement, y: Correspondence) -> ModuleElement:
    """The elementary tensor ``x (x) eta`` inside ``tensor_product(X, y)``."""
    blocks = [r @ e for r, e in zip(creation_blocks(x, y), eta.blocks)]
    cy = y.multiplicity_matrix()
    mx = x.module.multiplicities
    mult = tuple(int(sum(cy[i, j] * mx[j] for j in range(len(mx)))) for i in range(len(cy)))
    return HilbertModule(x.module.algebra, mult).element(blocks)


def tensor_power(c: Correspondence, k: int) -> Correspondence:
    """``X^{(x)k}`` with its left action; ``k = 0`` gives ``A`` over itself."""
    if k < 0:
        raise ValueError("tensor power must be >= 0")
    out = Correspondence.identity(c.algebra)
    for _ in range(k):
        out = tensor_product(c, out)
    return out
