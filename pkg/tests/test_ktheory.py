import numpy as np
import pytest

from localizer_lab import (
    GradedOperator,
    GradedSpace,
    RelativeClass,
    bounded_transform,
    class_of,
    common_params,
    default_localizer,
    dirac_path,
    dirac_path_stability,
    direct_sum,
    half_signature_class,
    homotopy_stability,
    index_class_projection,
    localizer_index,
    operator_norm,
    oscillator_dirac,
    phase_path,
    positive_projection,
    signature,
    space_sum,
)
from localizer_lab.ktheory import inertia_ldl
from localizer_lab.errors import (
    ClassInconsistencyError,
    NotInvertibleError,
    ParityError,
)
from localizer_lab.verification import random_even_invertible, random_odd, random_space

PHI = default_localizer()


def diag_even(values):
    values = np.asarray(values, dtype=float)
    space = GradedSpace(len(values), 0)
    return GradedOperator(np.diag(values), space, parity="even", hermitian=True)


# ---------------------------------------------------------------------------
# inertia and signature
# ---------------------------------------------------------------------------


def test_signature_counts_diagonal():
    s = signature(diag_even([3.0, -1.0, 2.0, -0.5, 0.7]))
    assert (s.n_pos, s.n_neg, s.n_zero) == (3, 2, 0)
    assert s.signature == 1
    assert s.invertible


def test_signature_zero_band_is_relative():
    s = signature(diag_even([1.0, 1e-12]))
    assert s.n_zero == 1
    assert not s.invertible
    # widening the band by hand moves the small value out of it
    s2 = signature(diag_even([1.0, 1e-12]), tau_sig=1e-14)
    assert s2.n_zero == 0


def test_signature_accepts_raw_eigenvalues():
    s = signature(np.array([-2.0, 5.0, 5.0]))
    assert s.signature == 1


def test_inertia_ldl_matches_eigen_signature():
    rng = np.random.default_rng(52)
    for _ in range(5):
        space = random_space(rng, max_side=14)
        h = random_even_invertible(rng, space)
        a = signature(h)
        b = inertia_ldl(h.matrix)
        assert (a.n_pos, a.n_neg, a.n_zero) == (b.n_pos, b.n_neg, b.n_zero)


def test_positive_projection_is_spectral():
    h = diag_even([2.0, -1.0, 0.5, -3.0])
    q = positive_projection(h)
    assert np.allclose(q.matrix, np.diag([1.0, 0.0, 1.0, 0.0]))
    with pytest.raises(NotInvertibleError):
        positive_projection(diag_even([1.0, 0.0]))


# ---------------------------------------------------------------------------
# difference classes
# ---------------------------------------------------------------------------


def test_half_signature_class_diagonal_pairs():
    ref = diag_even([-1.0, -1.0, -1.0])
    var = diag_even([1.0, 1.0, -1.0])
    assert half_signature_class(ref, var) == 2
    assert class_of(RelativeClass(h_ref=ref, h_var=var)) == 2


def test_half_signature_class_rejects_odd_difference():
    # on one space signature differences are even; an odd difference needs
    # mismatched dimensions and must be refused
    ref = diag_even([-1.0, -1.0])
    var = diag_even([1.0, 1.0, 1.0])
    with pytest.raises(ClassInconsistencyError):
        half_signature_class(ref, var)


def test_half_signature_class_needs_invertible_input():
    with pytest.raises(NotInvertibleError):
        half_signature_class(diag_even([0.0, 1.0]), diag_even([1.0, 1.0]))


def test_index_class_projection_idempotent():
    rng = np.random.default_rng(53)
    space = GradedSpace(4, 4)
    f = bounded_transform(random_odd(rng, space))
    q = index_class_projection(f)
    assert operator_norm(q.matrix @ q.matrix - q.matrix) < 1e-9
    assert np.allclose(q.matrix, q.matrix.conj().T)


def test_index_class_projection_of_zero_is_gamma_plus():
    space = GradedSpace(3, 2)
    f = GradedOperator(np.zeros((5, 5), dtype=complex), space, parity="odd",
                       hermitian=True)
    q = index_class_projection(f)
    expected = np.diag([1.0, 1.0, 1.0, 0.0, 0.0]) + np.diag([0.0, 0.0, 0.0, 1.0, 1.0]) * 0
    # gamma(1 - 0) + 0 + gamma_minus = diag(1,1,1,-1,-1) + diag(0,0,0,1,1)
    expected = np.diag([1.0, 1.0, 1.0, 0.0, 0.0])
    assert np.allclose(q.matrix, expected)


# ---------------------------------------------------------------------------
# the localizer index
# ---------------------------------------------------------------------------


def test_localizer_index_oscillator():
    osc = oscillator_dirac(40)
    report = localizer_index(osc.H, osc.D, PHI)
    assert report.value == 1
    assert report.admissible
    assert report.min_gap > 0
    payload = report.to_json_dict()
    assert payload["class"] == 1
    assert payload["admissible"] is True


def test_localizer_index_additive_under_direct_sum():
    a = oscillator_dirac(20)
    b = oscillator_dirac(26)
    H = direct_sum(a.H, b.H)
    D = direct_sum(a.D, b.D)
    assert H.space.n == space_sum(a.space, b.space).n
    report = localizer_index(H, D, PHI)
    assert report.value == 2


def test_direct_sum_of_mixed_parity_loses_parity():
    a = oscillator_dirac(20)
    assert direct_sum(a.H, a.H).parity == "even"
    assert direct_sum(a.D, a.D).parity == "odd"
    assert direct_sum(a.H, a.D).parity == "none"


# ---------------------------------------------------------------------------
# homotopies
# ---------------------------------------------------------------------------


def test_phase_path_endpoints():
    osc = oscillator_dirac(24)
    path = phase_path(osc.H, 5)
    assert len(path) == 5
    assert np.allclose(path[0].matrix, osc.H.matrix, atol=1e-12)
    w = np.linalg.eigvalsh(path[-1].matrix)
    assert np.allclose(np.abs(w), 1.0, atol=1e-10)


def test_common_params_admissible_for_every_step():
    osc = oscillator_dirac(30)
    path = phase_path(osc.H, 4)
    params = common_params(path, osc.D, PHI)
    assert params.admissible
    from localizer_lab import constant_C
    for h in path:
        p = constant_C(params.kappa, params.rho, h, osc.D, PHI)
        assert p.admissible


def test_homotopy_stability_oscillator_phase():
    osc = oscillator_dirac(30)
    path = phase_path(osc.H, 5)
    report = homotopy_stability(path, osc.D, PHI)
    assert report.constant
    assert report.failing_step is None
    assert set(report.values) == {1}
    assert all(s.no_crossing for s in report.steps[1:])


def test_dirac_path_shape_and_endpoint():
    osc = oscillator_dirac(24)
    rng = np.random.default_rng(54)
    T = random_odd(rng, osc.space)
    scale = 0.05 * operator_norm(osc.D) / operator_norm(T)
    T = GradedOperator(scale * T.matrix, osc.space, parity="odd", hermitian=True)
    path = dirac_path(osc.D, T, 5)
    assert len(path) == 5
    assert np.allclose(path[0].matrix, osc.D.matrix)
    assert np.allclose(path[-1].matrix, osc.D.matrix + T.matrix)


def test_dirac_path_stability_small_perturbation():
    osc = oscillator_dirac(30)
    rng = np.random.default_rng(55)
    T = random_odd(rng, osc.space)
    scale = 0.05 * operator_norm(osc.D) / operator_norm(T)
    T = GradedOperator(scale * T.matrix, osc.space, parity="odd", hermitian=True)
    report = dirac_path_stability(osc.H, dirac_path(osc.D, T, 5), PHI)
    assert report.constant
    assert set(report.values) == {1}


def test_dirac_path_rejects_even_perturbation():
    osc = oscillator_dirac(20)
    with pytest.raises(ParityError):
        dirac_path(osc.D, osc.H, 3)
