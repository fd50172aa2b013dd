import json
import math
from pathlib import Path

import numpy as np
import pytest

from localizer_lab import default_localizer, validate_localizing
from localizer_lab.localizing import export_samples_csv

ORACLES = json.loads((Path(__file__).resolve().parent.parent / "oracles.json").read_text())


def test_default_shape_constants():
    phi = default_localizer()
    assert phi.plateau_radius == pytest.approx(0.5)
    assert phi.support_radius == pytest.approx(1.0)
    assert phi.smoothing_width == 0.25


def test_plateau_and_support_are_exact():
    phi = default_localizer()
    xs = np.linspace(-0.5, 0.5, 101)
    assert np.all(phi(xs) == 1.0)
    outside = np.array([-2.0, -1.0, 1.0, 1.5, 7.0])
    assert np.all(phi(outside) == 0.0)


def test_even_and_range():
    phi = default_localizer()
    xs = np.linspace(0.0, 1.2, 400)
    vals = phi(xs)
    assert np.array_equal(vals, phi(-xs))
    assert np.all((0.0 <= vals) & (vals <= 1.0))


def test_monotone_decreasing_on_transition():
    phi = default_localizer()
    xs = np.linspace(0.5, 1.0, 200)
    vals = phi(xs)
    assert np.all(np.diff(vals) <= 0)


def test_window_identities_pointwise():
    # the two exact relations the localizer assembly relies on
    phi = default_localizer()
    xs = np.linspace(-1.5, 1.5, 601)
    v = phi(xs)
    v_half = phi(xs / 2.0)
    assert np.all(v_half**2 * v == v)
    tail = np.sqrt(np.clip(1.0 - v_half**4, 0.0, None))
    assert np.all(tail * v == 0.0)


def test_narrower_width_shifts_edges():
    phi = default_localizer(0.1)
    assert phi.plateau_radius == pytest.approx(0.65)
    assert phi.support_radius == pytest.approx(0.85)
    assert phi(np.array([0.64])) == 1.0
    assert phi(np.array([0.86])) == 0.0


def test_width_domain_checked():
    with pytest.raises(ValueError):
        default_localizer(0.0)
    with pytest.raises(ValueError):
        default_localizer(0.3)


def test_frozen_fourier_constants():
    phi = default_localizer()
    frozen = ORACLES["phi"]
    rel = frozen["rel_tol"]
    assert phi.fourier_weight == pytest.approx(frozen["fourier_weight"], rel=rel)
    assert phi.c_phi == pytest.approx(frozen["c_phi"], rel=rel)
    assert phi.tail_bound > 0.0


def test_weight_below_cited_bound():
    phi = default_localizer()
    assert phi.fourier_weight + phi.tail_bound <= 8.0 * math.sqrt(2.0 * math.pi)


def test_validation_report_passes():
    rep = validate_localizing(default_localizer())
    assert rep.plateau and rep.support and rep.monotone and rep.even and rep.range_ok
    assert rep.passed


def test_validation_flags_bad_function():
    rep = validate_localizing(lambda x: np.cos(np.asarray(x)))
    assert not rep.passed


def test_scaled_evaluator():
    phi = default_localizer()
    f = phi.scaled(4.0)
    assert f(np.array([1.9])) == 1.0
    assert f(np.array([4.1])) == 0.0


def test_odd_complement_completes_fourth_power():
    phi = default_localizer()
    g = phi.odd_complement()
    xs = np.linspace(-1.5, 1.5, 301)
    assert np.allclose(g(xs)**2 + phi(xs)**4, 1.0, atol=1e-12)
    assert np.allclose(g(-xs), -g(xs))


def test_fourier_weight_quadrature_stability():
    phi = default_localizer()
    fine = default_localizer(x_step=5e-4, p_step=5e-3)
    change = abs(fine.fourier_weight - phi.fourier_weight) / phi.fourier_weight
    assert change < 5e-3


def test_export_samples_roundtrip(tmp_path):
    phi = default_localizer()
    out = tmp_path / "phi.csv"
    export_samples_csv(phi, out)
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "x,phi(x)"
    xs, vals = [], []
    for line in rows[1:]:
        a, b = line.split(",")
        xs.append(float(a))
        vals.append(float(b))
    xs = np.array(xs)
    vals = np.array(vals)
    assert np.array_equal(vals, phi(xs))
