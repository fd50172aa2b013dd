import numpy as np
import pytest

from localizer_lab import (
    gap,
    lipschitz_derivative,
    operator_norm,
    oscillator_dirac,
    parse_model,
    qwz_bloch,
    qwz_chern_model,
    mk_block_example,
    random_lipschitz,
)


def test_oscillator_shapes_and_parities():
    desc = oscillator_dirac(40)
    assert desc.space.n_plus == 40
    assert desc.space.n_minus == 39
    assert desc.D.parity == "odd"
    assert desc.H.parity == "even"
    assert gap(desc.H) == pytest.approx(1.0)
    assert operator_norm(lipschitz_derivative(desc.D, desc.H)) == 0.0


def test_oscillator_spectrum_is_exact_square_roots():
    desc = oscillator_dirac(30)
    w = np.sort(np.abs(desc.D.eigenvalues()))
    # +-sqrt(k) for k = 1..n-1 plus the single zero mode
    expected = np.sort(np.concatenate([[0.0], np.repeat(np.sqrt(np.arange(1.0, 30.0)), 2)]))
    assert np.allclose(w, expected, atol=1e-12)
    assert np.sum(np.abs(desc.D.eigenvalues()) < 1e-10) == 1


def test_oscillator_truncation_guard_is_half_the_cut():
    desc = oscillator_dirac(40)
    lam_c = np.abs(desc.D.eigenvalues()).max()
    assert desc.rho_max == pytest.approx(lam_c / 2.0)
    # the guard proves no contaminated mode is visible below rho_max
    assert desc.truncation_fraction == 0.0


def test_qwz_bloch_hermitian_and_periodic():
    m = 1.0
    h = qwz_bloch(0.3, -1.1, m)
    assert h.shape == (2, 2)
    assert np.allclose(h, h.conj().T)
    assert np.allclose(qwz_bloch(0.3 + 2 * np.pi, -1.1, m), h)


def test_qwz_model_structure():
    desc = qwz_chern_model(8, 1.0)
    assert desc.space.n_plus == desc.space.n_minus == 2 * 8 * 8
    assert desc.H.parity == "even"
    assert desc.D.parity == "odd"
    assert desc.n_occupied == 1
    assert desc.gap_bound > 0
    assert gap(desc.H) >= desc.gap_bound - 1e-9


def test_mk_block_example_rank_is_class():
    desc = mk_block_example(2, seed=7)
    p = desc.extras["projection"]
    assert np.allclose(p @ p, p, atol=1e-12)
    assert desc.expected_class == int(round(np.trace(p).real))
    assert desc.coefficient == ("M_k", 2)
    assert operator_norm(desc.D) == 0.0


def test_mk_block_example_rank_override():
    desc = mk_block_example(3, seed=0, rank=4)
    assert desc.expected_class == 4
    with pytest.raises(ValueError):
        mk_block_example(2, seed=0, rank=100)


def test_random_lipschitz_derivative_is_controlled():
    base = oscillator_dirac(30)
    res = random_lipschitz(base.D, strength=0.02, seed=3)
    assert res.H.parity == "even"
    assert res.H.hermitian
    d_norm = operator_norm(base.D)
    measured = operator_norm(lipschitz_derivative(base.D, res.H))
    assert measured == pytest.approx(res.dh_norm)
    # block-constant base contributes nothing; only the perturbation does
    assert res.dh_norm <= 2.0 * 0.02 * 2.0 * d_norm
    assert gap(res.H) >= 0.1 * operator_norm(res.H) - 1e-12


def test_random_lipschitz_is_seeded():
    base = oscillator_dirac(20)
    a = random_lipschitz(base.D, 0.05, seed=11)
    b = random_lipschitz(base.D, 0.05, seed=11)
    c = random_lipschitz(base.D, 0.05, seed=12)
    assert np.array_equal(a.H.matrix, b.H.matrix)
    assert not np.array_equal(a.H.matrix, c.H.matrix)


def test_parse_model_round_trips():
    desc = parse_model("oscillator:n=24")
    assert desc.name == "oscillator" and desc.parameters["n"] == 24
    desc = parse_model("qwz:L=8,m=3.0")
    assert desc.parameters == {"L": 8, "m": 3.0}
    desc = parse_model("mk:k=2,seed=5")
    assert desc.parameters["k"] == 2 and desc.parameters["seed"] == 5
    desc = parse_model("random:strength=0.01,seed=2")
    assert desc.name == "random"
    assert "dh_norm" in desc.extras


def test_parse_model_key_property():
    desc = parse_model("qwz:L=8,m=3.0")
    assert desc.key == "qwz:L=8,m=3.0"


def test_parse_model_rejects_malformed():
    with pytest.raises(ValueError):
        parse_model("nosuchmodel:n=4")
    with pytest.raises(ValueError):
        parse_model("oscillator:n")
    with pytest.raises(ValueError):
        parse_model("oscillator:n=10,bogus=1")
    with pytest.raises(ValueError):
        parse_model("qwz:L=8")
