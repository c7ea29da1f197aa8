"""Finite-dimensional C*-algebras ``A = M_{n_1} + ... + M_{n_B}``.

Blocks are indexed from 0 inside the library; the text format and reports
use 1-based block numbers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from . import matcore as mc


class StructureError(ValueError):
    """Objects living over different algebras or modules were combined."""


@dataclass(frozen=True)
class MultiMatrixAlgebra:
    block_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.block_sizes)
        if not sizes:
            raise ValueError("an algebra needs at least one block")
        if any(n < 1 for n in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    @property
    def dim(self) -> int:
        return sum(n * n for n in self.block_sizes)

    def element(self, blocks) -> "AlgebraElement":
        return AlgebraElement(self, tuple(blocks))

    def zero(self) -> "AlgebraElement":
        return self.element(mc.zeros(n, n) for n in self.block_sizes)

    def one(self) -> "AlgebraElement":
        return self.element(mc.eye(n) for n in self.block_sizes)

    def matrix_unit(self, j: int, p: int, q: int) -> "AlgebraElement":
        """The matrix unit ``E_pq`` of block ``j``."""
        blocks = [mc.zeros(n, n) for n in self.block_sizes]
        blocks[j][p, q] = 1.0
        return self.element(blocks)

    def matrix_units(self) -> Iterator[tuple[int, int, int]]:
        for j, n in enumerate(self.block_sizes):
            for p in range(n):
                for q in range(n):
                    yield j, p, q

    def random_element(self, rng: np.random.Generator) -> "AlgebraElement":
        return self.element(mc.random_cmatrix(rng, n, n) for n in self.block_sizes)


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: MultiMatrixAlgebra
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        sizes = self.algebra.block_sizes
        if len(self.blocks) != len(sizes):
            raise StructureError(f"expected {len(sizes)} blocks, got {len(self.blocks)}")
        blocks = tuple(mc.as_cmatrix(b, (n, n)) for b, n in zip(self.blocks, sizes))
        object.__setattr__(self, "blocks", blocks)

    def _check(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement) or other.algebra != self.algebra:
            raise StructureError("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(-a for a in self.blocks))

    def __mul__(self, scalar):
        if isinstance(scalar, AlgebraElement):
            raise TypeError("use @ for the algebra product")
        return AlgebraElement(self.algebra, tuple(scalar * a for a in self.blocks))

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(mc.adjoint(a) for a in self.blocks))

    @property
    def H(self) -> "AlgebraElement":
        return self.adjoint()

    def norm(self) -> float:
        return norm(self)

    def to_matrix(self) -> np.ndarray:
        return mc.block_diag(self.blocks)

    def allclose(self, other: "AlgebraElement", tol=None) -> bool:
        self._check(other)
        return norm(self - other) <= mc.tolerance(tol).bound(max(norm(self), norm(other)))


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a @ b


def add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a + b


def adjoint(a: AlgebraElement) -> AlgebraElement:
    return a.adjoint()


def norm(a: AlgebraElement) -> float:
    """C*-norm of a direct sum: the largest block operator norm."""
    return max(mc.op_norm(b) for b in a.blocks)


def is_positive(a: AlgebraElement, tol=None) -> bool:
    t = mc.tolerance(tol)
    scale = norm(a)
    for b in a.blocks:
        asym = mc.hermitian_defect(b)
        if not t.accepts(asym, scale):
            raise mc.NotHermitianError(asym, t.bound(scale))
    return all(mc.min_eigenvalue(b, t) >= -t.bound(scale) for b in a.blocks)


@dataclass(frozen=True)
class Ideal:
    """A closed two-sided ideal, identified with the set of blocks it contains."""

    algebra: MultiMatrixAlgebra
    members: frozenset[int]

    def __post_init__(self):
        members = frozenset(int(j) for j in self.members)
        bad = [j for j in members if not 0 <= j < self.algebra.num_blocks]
        if bad:
            raise ValueError(f"block indices out of range: {sorted(bad)}")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, algebra: MultiMatrixAlgebra, members: Iterable[int]) -> "Ideal":
        return cls(algebra, frozenset(members))

    def complement(self) -> "Ideal":
        return Ideal(self.algebra, frozenset(range(self.algebra.num_blocks)) - self.members)

    def __or__(self, other: "Ideal") -> "Ideal":
        return Ideal(self.algebra, self.members | other.members)

    def __and__(self, other: "Ideal") -> "Ideal":
        return Ideal(self.algebra, self.members & other.members)

    def __contains__(self, j: int) -> bool:
        return j in self.members

    def sorted(self) -> list[int]:
        return sorted(self.members)

    def is_empty(self) -> bool:
        return not self.members

    def is_full(self) -> bool:
        return len(self.members) == self.algebra.num_blocks


def unit_of_ideal(ideal: Ideal) -> AlgebraElement:
    """Identity on the member blocks, zero elsewhere."""
    alg = ideal.algebra
    return alg.element(
        mc.eye(n) if j in ideal.members else mc.zeros(n, n) for j, n in enumerate(alg.block_sizes)
    )


def ideal_generated_by(a: AlgebraElement, tol=None) -> Ideal:
    """Smallest ideal containing ``a``: the blocks where ``a`` is nonzero."""
    t = mc.tolerance(tol)
    return Ideal(a.algebra, frozenset(j for j, b in enumerate(a.blocks) if mc.op_norm(b) > t.value))


def is_supported_in(a: AlgebraElement, ideal: Ideal, tol=None) -> bool:
    return ideal_generated_by(a, tol).members <= ideal.members
