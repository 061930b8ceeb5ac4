import math

import numpy as np
import pytest

import perhom


def test_builtins_listed():
    names = perhom.builtin_model_names()
    assert "harmonic" in names and "asym_atom" in names


def test_harmonic_sigma_is_sqrt3():
    law = perhom.solve(perhom.builtin_model("harmonic"), resolution=[256])
    assert law["sigma"].shape == (1, 1)
    assert abs(law["sigma"][0, 0] - math.sqrt(3.0)) < 1e-3 * math.sqrt(3.0)
    assert law["pi"].shape == (256,)
    assert abs(law["pi"].sum() - 1.0) < 1e-12


def test_model_round_trip_through_json():
    m = perhom.builtin_model("asym_atom")
    back = perhom.parse_model(m.to_json())
    assert back.hash == m.hash
    assert back.dim == 1


def test_invalid_model_raises_with_code():
    with pytest.raises(perhom.PerhomError) as info:
        perhom.solve(perhom.builtin_model("bad_atom"))
    assert info.value.code == "model-invalid"
    with pytest.raises(perhom.PerhomError) as info:
        perhom.parse_model("{ not json")
    assert info.value.code == "parse"


def test_simulation_is_reproducible():
    m = perhom.builtin_model("const_levy")
    a = perhom.simulate(m, epsilon=0.5, n_paths=200, dt=0.05, seed=4)
    b = perhom.simulate(m, epsilon=0.5, n_paths=200, dt=0.05, seed=4, workers=3)
    assert a["endpoints"].shape == (200, 1)
    np.testing.assert_array_equal(a["endpoints"], b["endpoints"])
    # modified second characteristic is exactly T Sigma for constant coefficients
    np.testing.assert_allclose(a["ctilde"][:, 0], 1.5, rtol=1e-10)


def test_verify_report():
    rep = perhom.verify(perhom.builtin_model("const_levy"), epsilons=[0.5, 0.25], n_paths=1000, dt=0.05, seed=3)
    assert rep["schema"] == "perhom.report/1"
    assert [v["name"] for v in rep["verdicts"]] == ["sigma-psd", "etp2", "etp1", "gaussianity"]
