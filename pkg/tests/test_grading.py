import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localizer_lab import (
    GradedOperator,
    GradedSpace,
    bounded_transform,
    func_calc,
    gap,
    lipschitz_derivative,
    operator_norm,
    sqrt_positive,
)
from localizer_lab.errors import NegativityError, NotInvertibleError, ParityError


def random_even(space, rng, hermitian=True):
    a = rng.normal(size=(space.n_plus, space.n_plus)) \
        + 1j * rng.normal(size=(space.n_plus, space.n_plus))
    b = rng.normal(size=(space.n_minus, space.n_minus)) \
        + 1j * rng.normal(size=(space.n_minus, space.n_minus))
    if hermitian:
        a = (a + a.conj().T) / 2
        b = (b + b.conj().T) / 2
    return GradedOperator.even_from_blocks(space, a, b, hermitian=hermitian)


def random_odd(space, rng):
    c = rng.normal(size=(space.n_minus, space.n_plus)) \
        + 1j * rng.normal(size=(space.n_minus, space.n_plus))
    return GradedOperator.odd_from_block(space, c)


def test_space_basics():
    space = GradedSpace(3, 2)
    assert space.n == 5
    assert np.array_equal(space.gamma_diag, [1, 1, 1, -1, -1])
    g = space.gamma_matrix()
    assert np.array_equal(g, np.diag([1.0, 1.0, 1.0, -1.0, -1.0]))
    assert not space.balanced()
    assert GradedSpace(2, 2).balanced()


def test_space_rejects_negative_dimensions():
    with pytest.raises(ValueError):
        GradedSpace(-1, 2)


def test_parity_of_products():
    # matmul returns plain matrices; snapped with the expected parity accepts
    # them, which is the structural claim
    rng = np.random.default_rng(3)
    space = GradedSpace(3, 2)
    e = random_even(space, rng)
    o = random_odd(space, rng)
    assert GradedOperator.snapped(e @ e, space, "even").parity == "even"
    assert GradedOperator.snapped(o @ o, space, "even").parity == "even"
    assert GradedOperator.snapped(e @ o, space, "odd").parity == "odd"
    assert GradedOperator.snapped(o @ e, space, "odd").parity == "odd"


def test_even_operator_commutes_with_gamma_odd_anticommutes():
    rng = np.random.default_rng(4)
    space = GradedSpace(4, 3)
    g = space.gamma_matrix()
    e = random_even(space, rng).matrix
    o = random_odd(space, rng).matrix
    assert np.allclose(g @ e, e @ g)
    assert np.allclose(g @ o, -o @ g)


def test_parity_enforced_on_construction():
    space = GradedSpace(2, 2)
    m = np.ones((4, 4))
    with pytest.raises(ParityError):
        GradedOperator(m, space, parity="even")
    with pytest.raises(ParityError):
        GradedOperator(m, space, parity="odd")
    # parity "none" accepts anything square of the right size
    GradedOperator(m, space, parity="none", hermitian=True)


def test_snapped_cleans_roundoff():
    rng = np.random.default_rng(5)
    space = GradedSpace(3, 3)
    e = random_even(space, rng)
    noisy = e.matrix + 1e-13 * rng.normal(size=e.matrix.shape)
    snapped = GradedOperator.snapped(noisy, space, "even", hermitian=True)
    assert snapped.parity == "even"
    assert np.allclose(snapped.matrix, snapped.matrix.conj().T, atol=0)
    off = snapped.block("+", "-")
    assert np.all(off == 0)


def test_odd_from_block_adjoint_structure():
    rng = np.random.default_rng(6)
    space = GradedSpace(2, 3)
    c = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    d = GradedOperator.odd_from_block(space, c)
    assert d.hermitian
    assert np.allclose(d.block("-", "+"), c)
    assert np.allclose(d.block("+", "-"), c.conj().T)
    assert np.allclose(d.odd_block, c)


def test_eigenvalues_match_numpy():
    rng = np.random.default_rng(7)
    space = GradedSpace(4, 4)
    h = random_even(space, rng)
    w = h.eigenvalues()
    assert np.allclose(w, np.linalg.eigvalsh(h.matrix))


def test_eig_decomposition_reconstructs():
    rng = np.random.default_rng(8)
    space = GradedSpace(3, 4)
    d = random_odd(space, rng)
    dec = d.eig()
    m = (dec.vectors * dec.eigenvalues) @ dec.vectors.conj().T
    assert np.allclose(m, d.matrix, atol=1e-12)


def test_func_calc_polynomial_agrees_with_matrix_power():
    rng = np.random.default_rng(9)
    space = GradedSpace(3, 3)
    h = random_even(space, rng)
    sq = func_calc(lambda x: x**2, h)
    assert sq.parity == "even"
    assert np.allclose(sq.matrix, h.matrix @ h.matrix, atol=1e-12)


def test_func_calc_even_function_of_odd_operator_is_even():
    rng = np.random.default_rng(10)
    space = GradedSpace(3, 3)
    d = random_odd(space, rng)
    sq = func_calc(lambda x: x**2, d)
    assert sq.parity == "even"
    odd_f = func_calc(lambda x: x**3, d)
    assert odd_f.parity == "odd"


def test_func_calc_generic_function_of_odd_operator_loses_parity():
    rng = np.random.default_rng(11)
    space = GradedSpace(2, 2)
    d = random_odd(space, rng)
    shifted = func_calc(lambda x: x + 1.0, d)
    assert shifted.parity == "none"


def test_lipschitz_derivative_is_commutator():
    rng = np.random.default_rng(12)
    space = GradedSpace(3, 2)
    d = random_odd(space, rng)
    h = random_even(space, rng)
    der = lipschitz_derivative(d, h)
    assert der.parity == "odd"
    assert np.allclose(der.matrix, d.matrix @ h.matrix - h.matrix @ d.matrix)


def test_lipschitz_derivative_vanishes_for_functions_of_d():
    rng = np.random.default_rng(13)
    space = GradedSpace(3, 3)
    d = random_odd(space, rng)
    f = func_calc(lambda x: x**2, d)
    assert operator_norm(lipschitz_derivative(d, f)) < 1e-12


def test_bounded_transform_contracts():
    rng = np.random.default_rng(14)
    space = GradedSpace(4, 4)
    d = random_odd(space, rng)
    b = bounded_transform(d)
    assert b.parity == "odd"
    assert operator_norm(b) < 1.0
    w = d.eigenvalues()
    expected = w / np.sqrt(1.0 + w**2)
    assert np.allclose(np.sort(b.eigenvalues()), np.sort(expected))


def test_sqrt_positive_squares_back():
    rng = np.random.default_rng(15)
    space = GradedSpace(3, 3)
    h = random_even(space, rng)
    p = func_calc(lambda x: x**2, h)
    r = sqrt_positive(p)
    assert np.allclose(r.matrix @ r.matrix, p.matrix, atol=1e-10)
    assert np.all(r.eigenvalues() >= -1e-12)


def test_sqrt_positive_rejects_negative():
    space = GradedSpace(2, 0)
    h = GradedOperator(np.diag([1.0, -0.5]), space, parity="even", hermitian=True)
    with pytest.raises(NegativityError):
        sqrt_positive(h)


def test_gap_of_diagonal():
    space = GradedSpace(3, 0)
    h = GradedOperator(np.diag([2.0, -0.25, 1.0]), space, parity="even",
                       hermitian=True)
    assert gap(h) == pytest.approx(0.25)


def test_gap_rejects_singular():
    space = GradedSpace(2, 0)
    h = GradedOperator(np.diag([1.0, 0.0]), space, parity="even", hermitian=True)
    with pytest.raises(NotInvertibleError):
        gap(h)


def test_operator_norm_matches_numpy_two_norm():
    rng = np.random.default_rng(16)
    space = GradedSpace(4, 3)
    h = random_even(space, rng)
    assert operator_norm(h) == pytest.approx(np.linalg.norm(h.matrix, 2))
    m = rng.normal(size=(5, 3))
    assert operator_norm(m) == pytest.approx(np.linalg.norm(m, 2))


@settings(max_examples=25, deadline=None)
@given(n_plus=st.integers(1, 5), n_minus=st.integers(1, 5),
       seed=st.integers(0, 10_000))
def test_odd_squared_is_even_and_psd(n_plus, n_minus, seed):
    rng = np.random.default_rng(seed)
    space = GradedSpace(n_plus, n_minus)
    d = random_odd(space, rng)
    sq = GradedOperator.snapped(d @ d, space, "even", hermitian=True)
    assert sq.parity == "even"
    assert np.all(np.linalg.eigvalsh(sq.matrix) >= -1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_gamma_conjugation_flips_odd_sign(seed):
    rng = np.random.default_rng(seed)
    space = GradedSpace(3, 3)
    d = random_odd(space, rng)
    g = space.gamma_matrix()
    assert np.allclose(g @ d.matrix @ g, -d.matrix)
