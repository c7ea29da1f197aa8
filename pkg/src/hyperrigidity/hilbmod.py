"""Finitely generated right Hilbert modules over multi-matrix algebras.

A module is kept in standard form ``X = Mat(m_1 x n_1) + ... + Mat(m_B x n_B)``
with right action ``(x a)_i = x_i a_i`` and inner product
``<x, y>_i = x_i^* y_i`` (linear in the second variable). Adjointable
operators are ``M_{m_1} + ... + M_{m_B}`` acting by left multiplication;
here every one of them is a finite sum of rank-one operators.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import matcore as mc
from .cstar import AlgebraElement, MultiMatrixAlgebra, StructureError


class GenerationError(ValueError):
    """Generators fail to span the module; ``block`` is the first deficient block."""

    def __init__(self, block: int, min_eigenvalue: float):
        super().__init__(
            f"generators do not generate: block {block + 1} is deficient "
            f"(smallest eigenvalue of sum g g* = {min_eigenvalue:.3e})"
        )
        self.block = block
        self.min_eigenvalue = min_eigenvalue


@dataclass(frozen=True)
class HilbertModule:
    algebra: MultiMatrixAlgebra
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        mult = tuple(int(m) for m in self.multiplicities)
        if len(mult) != self.algebra.num_blocks:
            raise StructureError(
                f"{len(mult)} multiplicities for an algebra with {self.algebra.num_blocks} blocks"
            )
        if any(m < 0 for m in mult):
            raise ValueError(f"multiplicities must be >= 0, got {mult}")
        object.__setattr__(self, "multiplicities", mult)

    @classmethod
    def standard(cls, algebra: MultiMatrixAlgebra) -> "HilbertModule":
        """``A`` as a right module over itself."""
        return cls(algebra, algebra.block_sizes)

    def block_shapes(self) -> list[tuple[int, int]]:
        return list(zip(self.multiplicities, self.algebra.block_sizes))

    @property
    def dim(self) -> int:
        return sum(m * n for m, n in self.block_shapes())

    def element(self, blocks) -> "ModuleElement":
        return ModuleElement(self, tuple(blocks))

    def operator(self, blocks) -> "ModuleOperator":
        return ModuleOperator(self, tuple(blocks))

    def zero(self) -> "ModuleElement":
        return self.element(mc.zeros(m, n) for m, n in self.block_shapes())

    def identity(self) -> "ModuleOperator":
        return self.operator(mc.eye(m) for m in self.multiplicities)

    def zero_operator(self) -> "ModuleOperator":
        return self.operator(mc.zeros(m, m) for m in self.multiplicities)

    def basis_element(self, i: int, r: int, s: int) -> "ModuleElement":
        blocks = [mc.zeros(m, n) for m, n in self.block_shapes()]
        blocks[i][r, s] = 1.0
        return self.element(blocks)

    def basis_indices(self) -> Iterator[tuple[int, int, int]]:
        """Standard basis ``(block, row, col)`` in a fixed order."""
        for i, (m, n) in enumerate(self.block_shapes()):
            for r in range(m):
                for s in range(n):
                    yield i, r, s

    def basis(self) -> list["ModuleElement"]:
        return [self.basis_element(*idx) for idx in self.basis_indices()]

    def random_element(self, rng: np.random.Generator) -> "ModuleElement":
        return self.element(mc.random_cmatrix(rng, m, n) for m, n in self.block_shapes())

    def random_operator(self, rng: np.random.Generator) -> "ModuleOperator":
        return self.operator(mc.random_cmatrix(rng, m, m) for m in self.multiplicities)


@dataclass(frozen=True, eq=False)
class ModuleElement:
    module: HilbertModule
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        shapes = self.module.block_shapes()
        if len(self.blocks) != len(shapes):
            raise StructureError(f"expected {len(shapes)} blocks, got {len(self.blocks)}")
        object.__setattr__(
            self, "blocks", tuple(mc.as_cmatrix(b, s) for b, s in zip(self.blocks, shapes))
        )

    def _check(self, other) -> None:
        if not isinstance(other, ModuleElement) or other.module != self.module:
            raise StructureError("elements belong to different modules")

    def __add__(self, other):
        self._check(other)
        return ModuleElement(self.module, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        self._check(other)
        return ModuleElement(self.module, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return ModuleElement(self.module, tuple(-a for a in self.blocks))

    def __mul__(self, other):
        """Scalar multiple, or the right action when ``other`` is an algebra element."""
        if isinstance(other, AlgebraElement):
            if other.algebra != self.module.algebra:
                raise StructureError("algebra element acts on a module over another algebra")
            return ModuleElement(self.module, tuple(x @ a for x, a in zip(self.blocks, other.blocks)))
        return ModuleElement(self.module, tuple(other * x for x in self.blocks))

    def __rmul__(self, scalar):
        if isinstance(scalar, AlgebraElement):
            return NotImplemented
        return self * scalar

    def norm(self) -> float:
        return module_norm(self)

    def flat(self) -> np.ndarray:
        """Concatenated row-major entries; the coordinate vector in the standard basis."""
        if not self.blocks:
            return np.zeros(0, dtype=np.complex128)
        return np.concatenate([b.reshape(-1) for b in self.blocks])


@dataclass(frozen=True, eq=False)
class ModuleOperator:
    module: HilbertModule
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        mult = self.module.multiplicities
        if len(self.blocks) != len(mult):
            raise StructureError(f"expected {len(mult)} blocks, got {len(self.blocks)}")
        object.__setattr__(
            self, "blocks", tuple(mc.as_cmatrix(b, (m, m)) for b, m in zip(self.blocks, mult))
        )

    def _check(self, other) -> None:
        if not isinstance(other, ModuleOperator) or other.module != self.module:
            raise StructureError("operators act on different modules")

    def __call__(self, x: ModuleElement) -> ModuleElement:
        if x.module != self.module:
            raise StructureError("operator applied to an element of another module")
        return ModuleElement(self.module, tuple(t @ b for t, b in zip(self.blocks, x.blocks)))

    def __matmul__(self, other):
        if isinstance(other, ModuleElement):
            return self(other)
        self._check(other)
        return ModuleOperator(self.module, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def __add__(self, other):
        self._check(other)
        return ModuleOperator(self.module, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        self._check(other)
        return ModuleOperator(self.module, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __mul__(self, scalar):
        return ModuleOperator(self.module, tuple(scalar * a for a in self.blocks))

    __rmul__ = __mul__

    def adjoint(self) -> "ModuleOperator":
        return ModuleOperator(self.module, tuple(mc.adjoint(a) for a in self.blocks))

    def norm(self) -> float:
        return max((mc.op_norm(b) for b in self.blocks), default=0.0)

    def is_positive(self, tol=None) -> bool:
        t = mc.tolerance(tol)
        return all(mc.is_psd(b, t) for b in self.blocks if b.size)

    def to_matrix(self) -> np.ndarray:
        return mc.block_diag(self.blocks)


def _same_module(x: ModuleElement, y: ModuleElement) -> None:
    if x.module != y.module:
        raise StructureError("elements belong to different modules")


def inner_product(x: ModuleElement, y: ModuleElement) -> AlgebraElement:
    _same_module(x, y)
    return x.module.algebra.element(mc.adjoint(a) @ b for a, b in zip(x.blocks, y.blocks))


def rank_one(x: ModuleElement, y: ModuleElement) -> ModuleOperator:
    """The operator ``z -> x <y, z>``."""
    _same_module(x, y)
    return x.module.operator(a @ mc.adjoint(b) for a, b in zip(x.blocks, y.blocks))


def module_norm(x: ModuleElement) -> float:
    return float(np.sqrt(inner_product(x, x).norm()))


def as_rank_one_sum(t: ModuleOperator) -> list[tuple[ModuleElement, ModuleElement]]:
    """Write ``t`` as a sum of rank-one operators built from matrix units.

    Uses ``t_i = sum_{r,s} t_i[r,s] e_r e_s^*`` with ``e_r`` realised as the
    basis element at ``(i, r, 0)``.
    """
    mod = t.module
    terms = []
    for i, block in enumerate(t.blocks):
        for r in range(block.shape[0]):
            for s in range(block.shape[1]):
                if block[r, s] != 0:
                    terms.append((block[r, s] * mod.basis_element(i, r, 0), mod.basis_element(i, s, 0)))
    return terms


def sum_rank_ones(module: HilbertModule, terms) -> ModuleOperator:
    total = module.zero_operator()
    for x, y in terms:
        total = total + rank_one(x, y)
    return total


@dataclass(frozen=True, eq=False)
class Frame:
    """A standard normalized frame: ``sum_k theta(x_k, x_k) = id``."""

    module: HilbertModule
    vectors: tuple[ModuleElement, ...]

    def __len__(self) -> int:
        return len(self.vectors)

    def frame_operator(self) -> ModuleOperator:
        return approximate_unit(self, len(self.vectors)) if self.vectors else self.module.zero_operator()

    def reconstruct(self, x: ModuleElement) -> ModuleElement:
        """``sum_k x_k <x_k, x>``."""
        out = self.module.zero()
        for v in self.vectors:
            out = out + v * inner_product(v, x)
        return out

    def identity_residual(self) -> float:
        return (self.frame_operator() - self.module.identity()).norm()

    def reconstruction_residual(self, xs: Sequence[ModuleElement]) -> float:
        return max((module_norm(self.reconstruct(x) - x) for x in xs), default=0.0)


def frame_generator_operator(module: HilbertModule, generators: Sequence[ModuleElement]) -> ModuleOperator:
    """``T = sum_k theta(g_k, g_k)``."""
    blocks = [mc.zeros(m, m) for m in module.multiplicities]
    for g in generators:
        if g.module != module:
            raise StructureError("generator belongs to another module")
        for i, b in enumerate(g.blocks):
            blocks[i] += b @ mc.adjoint(b)
    return module.operator(blocks)


def frame(generators: Sequence[ModuleElement], tol=None, module: HilbertModule | None = None) -> Frame:
    """Normalize a generating family to a standard normalized frame via ``T^{-1/2}``."""
    t = mc.tolerance(tol)
    if module is None:
        if not generators:
            raise ValueError("need at least one generator or an explicit module")
        module = generators[0].module
    big_t = frame_generator_operator(module, generators)
    inv_roots = []
    for i, block in enumerate(big_t.blocks):
        if block.shape[0] == 0:
            inv_roots.append(block)
            continue
        w = mc.herm_eig(block, t)[0]
        if w[-1] <= t.bound(w[0]):
            raise GenerationError(i, float(w[-1]))
        inv_roots.append(mc.psd_inv_sqrt(block, t))
    root = module.operator(inv_roots)
    return Frame(module, tuple(root(g) for g in generators))


def approximate_unit(f: Frame, n: int) -> ModuleOperator:
    """``e_n = sum_{k <= n} theta(x_k, x_k)`` for ``1 <= n <= len(f)``."""
    if not 1 <= n <= len(f.vectors):
        raise ValueError(f"n must lie in [1, {len(f.vectors)}], got {n}")
    return sum_rank_ones(f.module, ((v, v) for v in f.vectors[:n]))
