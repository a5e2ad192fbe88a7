"""Spectral model: widths, visibility closed form, quadrature, dip fits."""

import math

import numpy as np
import pytest

from ghz3d import spectral as sp

SGVM_REF = sp.sigma_gvm(1e-3, 1.6e-9)


def model_with_filter(sigma_f: float) -> sp.SpectralModel:
    base = sp.SpectralModel.reference_defaults()
    return sp.SpectralModel(
        sigma_f=sigma_f,
        sigma_p=base.sigma_p,
        crystal_length=base.crystal_length,
        delta_inv_gv=base.delta_inv_gv,
        lambda_c=base.lambda_c,
    )


# --- widths -------------------------------------------------------------------


def test_sigma_gvm_reference_value():
    assert SGVM_REF == pytest.approx(5.59e11, rel=1e-3)


def test_sigma_gvm_scalings():
    assert sp.sigma_gvm(2e-3, 1.6e-9) == pytest.approx(SGVM_REF / 2, rel=1e-12)
    assert sp.sigma_gvm(1e-3, 1.6e12) == pytest.approx(0.0, abs=1e-9)


def test_bandwidth_wavelength_conversion():
    dl = sp.bandwidth_to_wavelength(5.59e11, 808e-9)
    assert dl == pytest.approx(1.216e-9, rel=2e-3)
    assert sp.bandwidth_to_wavelength(0.0, 808e-9) == 0.0
    assert sp.bandwidth_to_wavelength(2e11, 808e-9) == pytest.approx(
        2 * sp.bandwidth_to_wavelength(1e11, 808e-9), rel=1e-12
    )
    assert sp.wavelength_to_bandwidth(dl, 808e-9) == pytest.approx(5.59e11, rel=1e-12)


def test_gvm_width_corresponds_to_1p2nm():
    dl = sp.bandwidth_to_wavelength(SGVM_REF, 808e-9)
    assert abs(dl - 1.2e-9) / 1.2e-9 < 0.02


def test_fwhm_round_trip():
    assert sp.fwhm_to_sigma(sp.sigma_to_fwhm(3.7e11)) == pytest.approx(3.7e11, rel=1e-12)


# --- closed-form visibility ------------------------------------------------------


def test_visibility_equal_widths_is_sqrt3_over_2():
    assert abs(sp.visibility(1.0, 1.0) - math.sqrt(3) / 2) < 1e-12
    assert abs(sp.visibility(SGVM_REF, SGVM_REF) - 0.866) < 1e-3


def test_visibility_limits():
    assert sp.visibility(1e-9, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert sp.visibility(2.0, 1.0) == pytest.approx(0.6, abs=1e-12)


def test_visibility_monotone_in_filter_width():
    values = [sp.visibility(f, 1.0) for f in np.linspace(0.05, 4.0, 40)]
    assert all(a > b for a, b in zip(values, values[1:]))


# --- numeric four-photon probability ----------------------------------------------


@pytest.mark.parametrize("factor", [0.5, 1.0, 2.0])
def test_quadrature_visibility_close_to_gvm_closed_form(factor):
    model = model_with_filter(factor * SGVM_REF)
    v_num = sp.visibility_numeric(model)
    v_closed = sp.visibility(model.sigma_f, model.sigma_gvm)
    assert abs(v_num - v_closed) / v_closed < 0.01


@pytest.mark.parametrize("factor", [0.5, 1.0, 2.0])
def test_quadrature_visibility_exact_against_effective_width(factor):
    # both routes use the same Gaussian JSA once the pump width is folded in
    model = model_with_filter(factor * SGVM_REF)
    v_num = sp.visibility_numeric(model, order=48)
    v_closed = sp.visibility(model.sigma_f, model.sigma_s)
    assert abs(v_num - v_closed) < 1e-9


def test_p4_even_in_delay():
    model = sp.SpectralModel.reference_defaults()
    for dt in (0.4e-12, 1.3e-12):
        assert sp.p4_numeric(model, dt) == pytest.approx(
            sp.p4_numeric(model, -dt), rel=1e-12
        )


def test_p4_approaches_constant_at_large_delay():
    model = sp.SpectralModel.reference_defaults()
    limit = sp.p4_limit(model)
    far = sp.p4_numeric(model, 60e-12, order=96, check=False)
    assert abs(far - limit) / limit < 1e-3


def test_p4_dip_shape_is_gaussian():
    # the Gaussian JSA makes the dip exactly Gaussian in the delay
    model = sp.SpectralModel.reference_defaults()
    limit = sp.p4_limit(model)
    dts = np.linspace(-3e-12, 3e-12, 13)
    depth = np.array([1.0 - sp.p4_numeric(model, dt) / limit for dt in dts])
    logd = np.log(depth / depth[6])
    quad = np.polyfit(dts, logd, 2)
    reconstructed = np.polyval(quad, dts)
    assert np.max(np.abs(reconstructed - logd)) < 1e-6


def test_p4_convergence_guard():
    model = model_with_filter(2.0 * SGVM_REF)
    with pytest.raises(sp.QuadratureNotConverged):
        sp.p4_numeric(model, 0.0, order=4)


# --- dip model and fitting ----------------------------------------------------------


def test_dip_curve_examples():
    dip = sp.DipModel(baseline=100.0, visibility=0.834, width=800e-6, center=0.0)
    rows = dict(sp.dip_curve(dip, [0.0, 1.0]))
    assert rows[0.0] == pytest.approx(100.0 * (1 - 0.834), rel=1e-12)
    assert rows[1.0] == pytest.approx(100.0, rel=1e-9)


def test_fit_round_trip_reference_parameters():
    truth = sp.DipModel(baseline=7.0, visibility=0.834, width=800e-6, center=35e-6)
    xs = np.linspace(-2.5e-3, 2.5e-3, 61)
    fitted = sp.fit_dip(sp.dip_curve(truth, xs))
    assert fitted.baseline == pytest.approx(truth.baseline, rel=1e-6)
    assert fitted.visibility == pytest.approx(truth.visibility, rel=1e-6)
    assert fitted.width == pytest.approx(truth.width, rel=1e-6)
    assert fitted.center == pytest.approx(truth.center, abs=truth.width * 1e-6)


def test_fit_flat_data_gives_zero_visibility():
    xs = np.linspace(-1e-3, 1e-3, 21)
    fitted = sp.fit_dip([(float(x), 50.0) for x in xs])
    assert fitted.visibility == pytest.approx(0.0, abs=1e-3)


def test_fit_poisson_noise_recovers_visibility():
    truth = sp.DipModel(baseline=100.0, visibility=0.834, width=800e-6, center=0.0)
    xs = np.linspace(-2.5e-3, 2.5e-3, 41)
    rng = np.random.default_rng(20180404)
    clean = np.array([r for _, r in sp.dip_curve(truth, xs)])
    noisy = rng.poisson(clean).astype(float)
    fitted = sp.fit_dip(list(zip(xs, noisy)))
    assert abs(fitted.visibility - truth.visibility) < 0.05


def test_fit_needs_enough_samples():
    with pytest.raises(ValueError):
        sp.fit_dip([(0.0, 1.0)] * 4)


def test_invalid_model_parameters_rejected():
    with pytest.raises(ValueError):
        sp.DipModel(baseline=1.0, visibility=1.5, width=1.0, center=0.0)
    with pytest.raises(ValueError):
        sp.SpectralModel(sigma_f=-1.0, sigma_p=1.0, crystal_length=1.0, delta_inv_gv=1.0, lambda_c=1.0)
    with pytest.raises(ValueError):
        sp.sigma_gvm(-1e-3, 1.6e-9)
