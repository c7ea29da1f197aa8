import numpy as np
import pytest

from hyperrigidity import matcore as mc
from hyperrigidity.cstar import MultiMatrixAlgebra, StructureError, is_positive, norm
from hyperrigidity.hilbmod import (
    GenerationError,
    HilbertModule,
    approximate_unit,
    as_rank_one_sum,
    frame,
    inner_product,
    module_norm,
    rank_one,
    sum_rank_ones,
)

ALG = MultiMatrixAlgebra((2, 1, 3))
MOD = HilbertModule(ALG, (3, 0, 2))
C2 = HilbertModule(MultiMatrixAlgebra((1,)), (2,))


def col(*entries):
    return C2.element([np.array(entries, dtype=complex).reshape(-1, 1)])


def test_inner_product_axioms(rng):
    for _ in range(30):
        x, y, z = (MOD.random_element(rng) for _ in range(3))
        a = ALG.random_element(rng)
        alpha = complex(rng.standard_normal(), rng.standard_normal())
        assert inner_product(x, y).adjoint().allclose(inner_product(y, x))
        assert inner_product(x, y * a).allclose(inner_product(x, y) @ a)
        assert inner_product(x, y + alpha * z).allclose(inner_product(x, y) + alpha * inner_product(x, z))
        assert is_positive(inner_product(x, x))


def test_definiteness(rng):
    assert norm(inner_product(MOD.zero(), MOD.zero())) == 0.0
    x = MOD.random_element(rng)
    assert norm(inner_product(x, x)) > 0


def test_orthogonal_columns():
    assert norm(inner_product(col(1, 0), col(0, 1))) == 0.0


def test_mismatched_modules():
    with pytest.raises(StructureError):
        inner_product(MOD.zero(), C2.zero())


def test_rank_one_defining_property(rng):
    x = MOD.random_element(rng)
    lhs = rank_one(x, x)(x)
    rhs = x * inner_product(x, x)
    assert module_norm(lhs - rhs) <= 1e-10 * module_norm(rhs)


def test_rank_one_adjoint_via_pairing(rng):
    for _ in range(10):
        x, y, u, v = (MOD.random_element(rng) for _ in range(4))
        t = rank_one(x, y)
        # <u, t v> = <t* u, v> with t* = theta(y, x)
        assert inner_product(u, t(v)).allclose(inner_product(rank_one(y, x)(u), v))
        assert t.adjoint().to_matrix() == pytest.approx(rank_one(y, x).to_matrix())


def test_rank_one_norm_bound(rng):
    for _ in range(50):
        x, y = MOD.random_element(rng), MOD.random_element(rng)
        assert rank_one(x, y).norm() <= module_norm(x) * module_norm(y) * (1 + 1e-12)


def test_frame_unit_generator():
    a_mod = HilbertModule.standard(ALG)
    one = a_mod.element(ALG.one().blocks)
    f = frame([one])
    assert len(f) == 1
    assert module_norm(f.vectors[0] - one) <= 1e-12


def test_frame_orthonormal_is_unchanged():
    f = frame([col(1, 0), col(0, 1)])
    assert module_norm(f.vectors[0] - col(1, 0)) <= 1e-12
    assert module_norm(f.vectors[1] - col(0, 1)) <= 1e-12


def test_frame_reconstruction_random(rng):
    mod = HilbertModule(MultiMatrixAlgebra((2,)), (2,))
    f = frame([mod.random_element(rng) for _ in range(3)])
    xs = [mod.random_element(rng) for _ in range(100)]
    assert f.identity_residual() <= 1e-10
    assert f.reconstruction_residual(xs) <= 1e-10


def test_frame_reports_deficient_block():
    mod = HilbertModule(MultiMatrixAlgebra((1, 1)), (1, 2))
    g = mod.element([np.ones((1, 1)), np.array([[1.0], [0.0]])])
    with pytest.raises(GenerationError) as info:
        frame([g])
    assert info.value.block == 1


def test_frame_zero_blocks_are_empty_sums(rng):
    f = frame([MOD.random_element(rng) for _ in range(3)])
    assert f.frame_operator().blocks[1].shape == (0, 0)
    assert f.identity_residual() <= 1e-10


def test_approximate_unit_full_length_is_identity(rng):
    f = frame([MOD.random_element(rng) for _ in range(4)])
    assert (approximate_unit(f, len(f)) - MOD.identity()).norm() <= 1e-10


def test_approximate_unit_first_term_is_projection():
    f = frame([col(1, 0), col(0, 1)])
    assert np.allclose(approximate_unit(f, 1).blocks[0], np.diag([1.0, 0.0]))


def test_approximate_unit_monotone_and_contractive(rng):
    for _ in range(10):
        f = frame([MOD.random_element(rng) for _ in range(5)])
        prev = None
        for n in range(1, len(f) + 1):
            e = approximate_unit(f, n)
            assert e.is_positive()
            assert e.norm() <= 1 + 1e-10
            if prev is not None:
                assert (e - prev).is_positive()
            prev = e


def test_approximate_unit_range():
    f = frame([col(1, 0), col(0, 1)])
    with pytest.raises(ValueError):
        approximate_unit(f, 0)
    with pytest.raises(ValueError):
        approximate_unit(f, 3)


def test_module_norm_examples(rng):
    assert module_norm(col(1, 0)) == pytest.approx(1.0)
    x = MOD.random_element(rng)
    assert module_norm(2 * x) == pytest.approx(2 * module_norm(x))
    for _ in range(50):
        x, a = MOD.random_element(rng), ALG.random_element(rng)
        assert module_norm(x * a) <= module_norm(x) * norm(a) * (1 + 1e-12)
        y = MOD.random_element(rng)
        assert norm(inner_product(x, y)) <= module_norm(x) * module_norm(y) * (1 + 1e-12)


def test_compacts_span(rng):
    t = MOD.random_operator(rng)
    rebuilt = sum_rank_ones(MOD, as_rank_one_sum(t))
    assert (rebuilt - t).norm() <= 1e-10


def test_operator_is_right_linear(rng):
    t = MOD.random_operator(rng)
    x, a = MOD.random_element(rng), ALG.random_element(rng)
    assert module_norm(t(x * a) - t(x) * a) <= 1e-10 * max(1, module_norm(x) * norm(a) * t.norm())
    assert inner_product(t(x), x).allclose(inner_product(x, t.adjoint()(x)))
