import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperrigidity import matcore as mc
from hyperrigidity.corpus import random_correspondence
from hyperrigidity.correspondence import Correspondence, katsura_ideal
from hyperrigidity.cstar import Ideal, MultiMatrixAlgebra
from hyperrigidity.hilbmod import HilbertModule
from hyperrigidity.repcert import (
    CertificateError,
    HypothesisError,
    KronSum,
    NotIsometryError,
    StinespringMap,
    bilateral_shift,
    block_positivity,
    block_positivity_paths,
    brute_force_defect,
    certificate,
    corner_isometry,
    epsilon_bound_check,
    fock_rep,
    schwarz_defect,
    shift_dilation,
    unilateral_shift,
)

C = MultiMatrixAlgebra((1,))


def degenerate():
    return Correspondence.from_multiplicities(C, [2], [[1]])


def test_scalar_fock_space_is_truncated_shift():
    c = Correspondence.identity(C)
    rep = fock_rep(c, 3)
    assert rep.hilbert_dim == 4
    one = c.module.basis_element(0, 0, 0)
    assert np.allclose(rep.pi1(one), np.eye(4, k=-1))
    assert np.allclose(rep.pi0(C.one()), np.eye(4))


def test_level_dimensions_follow_multiplicity_matrix(rng):
    c = random_correspondence(rng, "mixed")
    rep = fock_rep(c, 3)
    cm = c.multiplicity_matrix()
    m = np.array(c.module.multiplicities)
    for k in range(1, 4):
        assert rep.level_dims[k] == int((np.linalg.matrix_power(cm, k - 1) @ m).sum())


def test_fock_depth_validation():
    with pytest.raises(ValueError):
        fock_rep(degenerate(), 0)


def test_module_identity(rng):
    for kind in ("unital", "subunital", "mixed"):
        c = random_correspondence(rng, kind)
        rep = fock_rep(c, 2)
        for _ in range(5):
            a, x = c.algebra.random_element(rng), c.module.random_element(rng)
            assert rep.module_axiom_residual(a, x) <= 1e-12 * max(1.0, a.norm())


def test_inner_product_identity_below_top(rng):
    for kind in ("unital", "subunital", "mixed"):
        c = random_correspondence(rng, kind)
        rep = fock_rep(c, 2)
        e = rep.below_top()
        top = rep.level_projections[-1]
        for _ in range(5):
            x, y = c.module.random_element(rng), c.module.random_element(rng)
            d = rep.inner_product_defect(x, y)
            assert mc.op_norm(e @ d @ e) <= 1e-10
            assert mc.op_norm(d - top @ d @ top) <= 1e-10


def test_inner_product_defect_is_visible_at_top():
    c = Correspondence.identity(C)
    rep = fock_rep(c, 2)
    one = c.module.basis_element(0, 0, 0)
    d = rep.inner_product_defect(one, one)
    assert d[-1, -1] == pytest.approx(-1.0)


def test_shift_matrices():
    v = unilateral_shift(4)
    assert np.allclose(mc.adjoint(v) @ v, np.diag([1, 1, 1, 0]))
    u = bilateral_shift(3)
    assert u.shape == (7, 7)
    assert np.allclose(mc.adjoint(u) @ u, np.diag([1, 1, 1, 1, 1, 1, 0]))
    w = corner_isometry(3)
    assert np.allclose(mc.adjoint(w) @ w, np.eye(3))
    # the corner compresses U to V
    assert np.allclose(mc.adjoint(w) @ u @ w, unilateral_shift(3))


def test_kron_sum_dense_and_norm(rng):
    a, b = mc.random_cmatrix(rng, 3, 3), mc.random_cmatrix(rng, 3, 3)
    s, t = mc.random_cmatrix(rng, 2, 2), mc.random_cmatrix(rng, 2, 2)
    k = KronSum([(a, s), (b, t)])
    assert np.allclose(k.dense(), np.kron(a, s) + np.kron(b, t))
    assert k.norm() == pytest.approx(np.linalg.norm(k.dense(), 2))
    single = KronSum([(a, s)])
    assert single.norm() == pytest.approx(np.linalg.norm(np.kron(a, s), 2))
    prod = k @ single.adjoint()
    assert np.allclose(prod.dense(), k.dense() @ np.kron(a, s).conj().T)
    merged = KronSum([(a, s), (b, s)]).simplified()
    assert np.allclose(merged.dense(), np.kron(a + b, s))


def test_dilation_with_full_ideal_has_no_shift_part():
    c = Correspondence.identity(C)
    d = shift_dilation(fock_rep(c, 2), Ideal.of(C, [0]), 3)
    assert np.allclose(d.Q, 0)
    x = c.module.basis_element(0, 0, 0)
    assert np.allclose(d.tauV1(x), np.kron(d.base.pi1(x), np.eye(3)))


def test_dilation_with_empty_ideal_is_pure_shift():
    c = Correspondence.identity(C)
    d = shift_dilation(fock_rep(c, 2), Ideal.of(C, []), 3)
    x = c.module.basis_element(0, 0, 0)
    assert np.allclose(d.tauV1(x), np.kron(d.base.pi1(x), unilateral_shift(3)))


def test_degenerate_example_has_shift_component():
    c = degenerate()
    d = shift_dilation(fock_rep(c, 2), katsura_ideal(c), 4)
    e2 = d.base.pi1_basis((0, 1, 0))
    assert mc.op_norm(d.Q @ e2) > 0.5
    with pytest.raises(ValueError):
        shift_dilation(fock_rep(c, 2), katsura_ideal(c), 1)


def test_dilated_pair_toeplitz_identities(rng):
    for kind in ("unital", "mixed"):
        c = random_correspondence(rng, kind, max_blocks=2, max_size=2, max_mult=2)
        d = shift_dilation(fock_rep(c, 2), katsura_ideal(c), 3)
        res = d.toeplitz_residuals()
        assert res["module"] <= 1e-10
        assert res["inner_product"] <= 1e-10


def test_certificate_examples():
    r = certificate(degenerate())
    assert r.defect == pytest.approx(1.0, abs=1e-10)
    assert not r.verdict
    assert r.worst_pair() == ((0, 1, 0), (0, 1, 0))
    assert r.pair_defect((0, 0, 0), (0, 0, 0)) == pytest.approx(0.0, abs=1e-12)
    assert r.agreement_on_S <= 1e-12
    ok = certificate(Correspondence.identity(MultiMatrixAlgebra((2, 1))))
    assert ok.verdict and ok.defect <= 1e-10


def test_certificate_zero_module():
    c = Correspondence.zero_action(HilbertModule(MultiMatrixAlgebra((2,)), (0,)))
    r = certificate(c)
    assert r.verdict and r.defect == 0.0 and r.worst_pair() is None


def test_structured_matches_brute_force(rng):
    cases = [degenerate()] + [random_correspondence(rng, k, max_blocks=2, max_size=2, max_mult=2)
                              for k in ("unital", "subunital", "mixed")]
    for c in cases:
        r = certificate(c, depth=2, shift_dim=3)
        if not r.basis:
            continue
        for _ in range(3):
            i = r.basis[int(rng.integers(len(r.basis)))]
            j = r.basis[int(rng.integers(len(r.basis)))]
            x, y = c.module.basis_element(*i), c.module.basis_element(*j)
            assert abs(brute_force_defect(c, x, y, 2, 3) - r.pair_defect(i, j)) <= 1e-10
        assert abs(r.analytic_max - r.defect) <= 1e-10


def test_random_pairs_match_brute_force():
    rng = np.random.default_rng(7)
    c = random_correspondence(rng, "subunital", max_blocks=2, max_size=2, max_mult=2)
    r = certificate(c, depth=2, shift_dim=3, n_random=1, seed=3)
    prng = np.random.default_rng(3)
    x, y = c.module.random_element(prng), c.module.random_element(prng)
    assert r.random_max == pytest.approx(brute_force_defect(c, x, y, 2, 3), abs=1e-10)


@pytest.mark.parametrize("depth,shift", [(1, 2), (2, 2), (2, 5), (3, 3)])
def test_defect_independent_of_truncation(depth, shift):
    r = certificate(degenerate(), depth=depth, shift_dim=shift)
    assert r.defect == pytest.approx(1.0, abs=1e-10)


def test_certificate_matches_structural_verdict(rng):
    from hyperrigidity.correspondence import is_hyperrigid
    for kind in ("unital", "subunital", "zero", "mixed"):
        for _ in range(4):
            c = random_correspondence(rng, kind)
            assert certificate(c).verdict == is_hyperrigid(c).hyperrigid


def test_covariance_is_only_a_diagnostic():
    c = Correspondence.identity(C)
    r = certificate(c, covariance=True)
    assert r.verdict
    assert r.covariance_residual == pytest.approx(1.0)


def test_verify_dilation_option(rng):
    c = random_correspondence(rng, "mixed", max_blocks=2, max_size=2, max_mult=2)
    assert certificate(c, verify_dilation=True).defect >= 0


# -- Schwarz machinery ------------------------------------------------------


def test_stinespring_map_is_unital(rng):
    phi = StinespringMap.random(rng, 3, 2, 4)
    assert np.allclose(phi(np.eye(3)), np.eye(4))
    with pytest.raises(NotIsometryError):
        StinespringMap(2 * np.eye(2), 1, 2)
    ident = StinespringMap.identity(3)
    a = mc.random_cmatrix(rng, 3, 3)
    assert np.allclose(ident(a), a)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_schwarz_defect_is_psd(seed):
    rng = np.random.default_rng(seed)
    phi = StinespringMap.random(rng, 3, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    a = mc.random_cmatrix(rng, 3, 3)
    d = schwarz_defect(phi, a, a)
    assert mc.hermitian_defect(d) <= 1e-10
    assert mc.min_eigenvalue(d) >= -1e-10


def test_multiplicative_for_homomorphisms(rng):
    phi = StinespringMap(np.kron(np.ones((2, 1)) / np.sqrt(2), np.eye(3)), 2, 3)
    a, b = mc.random_cmatrix(rng, 3, 3), mc.random_cmatrix(rng, 3, 3)
    assert mc.op_norm(schwarz_defect(phi, a, b)) <= 1e-12


def test_block_positivity_examples(rng):
    a, b = mc.random_cmatrix(rng, 2, 4), mc.random_cmatrix(rng, 2, 4)
    col = np.vstack([a, b])
    m = col @ col.conj().T
    assert block_positivity(a, b, m + 1e-3 * np.eye(4))
    assert not block_positivity(a, b, m - 1e-2 * np.eye(4))
    assert block_positivity_paths(a, b, m) == (True, True)
    with pytest.raises(ValueError):
        block_positivity(a, b[:, :3], m)


def test_block_positivity_from_row_elements(rng):
    phi = StinespringMap.random(rng, 2, 2, 2)
    a_elems = [mc.random_cmatrix(rng, 2, 2) for _ in range(2)]
    b_elems = [mc.random_cmatrix(rng, 2, 2) for _ in range(2)]
    rows_a = [phi(x) for x in a_elems]
    rows_b = [phi(y) for y in b_elems]
    m = np.block([[sum(phi(x @ y.conj().T) for x, y in zip(xs, ys)) for ys in (a_elems, b_elems)]
                  for xs in (a_elems, b_elems)])
    assert block_positivity(rows_a, rows_b, m)


def test_epsilon_bound(rng):
    for _ in range(10):
        phi = StinespringMap.random(rng, 3, 2, 3)
        a = [mc.random_cmatrix(rng, 3, 3) for _ in range(2)]
        b = [mc.random_cmatrix(rng, 3, 3) for _ in range(2)]
        eps = mc.op_norm(sum(schwarz_defect(phi, x, x) for x in a))
        r = epsilon_bound_check(phi, a, b, eps)
        assert r and r.off_diagonal_sq <= r.schwarz_bound + 1e-9 <= r.norm_bound + 2e-9
        with pytest.raises(HypothesisError):
            epsilon_bound_check(phi, a, b, eps / 2 - 1e-6)


def test_compression_of_nilpotent_has_schwarz_defect():
    phi = StinespringMap(np.array([[1.0], [0.0]]), 1, 2)
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    # phi(a a*) = (a a*)_11 = 1 while phi(a) = a_11 = 0
    assert mc.op_norm(schwarz_defect(phi, a, a)) == pytest.approx(1.0)


def test_block_positivity_trivial_and_strict(rng):
    z = np.zeros((1, 1))
    assert block_positivity(z, z, np.zeros((2, 2)))
    for eps in (1e-6, 1e-3, 1.0):
        a, b = mc.random_cmatrix(rng, 2, 2), mc.random_cmatrix(rng, 2, 2)
        col = np.vstack([a, b])
        assert not block_positivity(a, b, col @ col.conj().T - eps * np.eye(4))


def test_epsilon_bound_with_zero_row(rng):
    phi = StinespringMap.random(rng, 2, 2, 2)
    a = [mc.random_cmatrix(rng, 2, 2)]
    eps = mc.op_norm(schwarz_defect(phi, a[0], a[0]))
    r = epsilon_bound_check(phi, a, [np.zeros((2, 2))], eps)
    assert r and r.off_diagonal_sq == 0.0 and r.norm_bound == 0.0
    ident = StinespringMap.identity(2)
    r = epsilon_bound_check(ident, a, [mc.random_cmatrix(rng, 2, 2)], 0.0)
    assert r and r.off_diagonal_sq <= 1e-20
