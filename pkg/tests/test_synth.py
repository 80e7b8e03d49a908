import numpy as np
import pytest

from qpdyn.synth import SynthError, SynthSpec, generate, on_grid_rho


def test_pure_rotation_is_exact_cosine():
    spec = SynthSpec(
        rho=np.array([2 * np.pi / 64]),
        gper_coeffs={(1,): 1.0},
        chaos={"family": "none"},
        N=256,
        k=1,
        seed=0,
    )
    ts, truth = generate(spec)
    n = np.arange(256)
    expected = np.cos(2 * np.pi * n / 64)
    assert np.max(np.abs(ts.values[:, 0] - expected)) < 1e-12
    # period 64 samples (up to phase-accumulation rounding)
    assert np.allclose(ts.values[:64], ts.values[64:128], atol=1e-12)


def test_tanh_contraction_envelope():
    # |g_per| <= 1 and a*tanh bounded by a: fixed-point envelope
    # (1 + a sup|tanh|) / (1 - a) with a = 0.5 gives 3
    spec = SynthSpec(
        rho=np.array([2 * np.pi * 5 / 128]),
        gper_coeffs={(1,): 1.0},
        chaos={"family": "tanh", "a": 0.5, "b": 1.0},
        N=5000,
        k=1,
        seed=1,
    )
    ts, _ = generate(spec)
    assert np.abs(ts.values).max() <= (1 + 0.5 * 1.0) / (1 - 0.5)


def test_dft_peaks_at_generator_bins():
    spec = SynthSpec(
        rho=on_grid_rho([89, 55], 1024),
        gper_coeffs={(1, 0): 1.0, (0, 1): 0.8},
        chaos={"family": "none"},
        N=1024,
        k=1,
        seed=2,
    )
    ts, truth = generate(spec)
    spectrum = np.abs(np.fft.rfft(ts.values[:, 0]))
    top2 = set(np.argsort(spectrum)[::-1][:2])
    assert top2 == {89, 55}
    # everything else is numerically silent
    rest = np.delete(spectrum, sorted(top2))
    assert rest.max() < 1e-9 * spectrum.max()


def test_reproducible_bitwise():
    spec = dict(
        rho=on_grid_rho([13], 256),
        gper_coeffs={(1,): 0.7},
        chaos={"family": "tanh", "a": 0.3, "b": 2.0},
        noise_sd=0.1,
        N=300,
        k=2,
        seed=42,
    )
    a, _ = generate(SynthSpec(**spec))
    b, _ = generate(SynthSpec(**spec))
    assert np.array_equal(a.values, b.values)


def test_truth_decomposes_series_exactly():
    spec = SynthSpec(
        rho=on_grid_rho([7, 11], 128),
        gper_coeffs={(1, 0): 1.0, (0, 1): 0.5, (1, -1): 0.2},
        chaos={"family": "tanh", "a": 0.4, "b": 1.5},
        N=400,
        k=1,
        seed=3,
    )
    ts, truth = generate(spec)
    assert np.array_equal(
        ts.values, truth.gper_samples + truth.chaos_increments
    )
    # chaotic increment is the contraction applied to the previous sample
    prev = ts.values[:-1]
    assert np.array_equal(
        truth.chaos_increments[1:], 0.4 * np.tanh(1.5 * prev)
    )


def test_noise_is_observation_only():
    base = dict(
        rho=on_grid_rho([9], 128),
        gper_coeffs={(1,): 1.0},
        chaos={"family": "tanh", "a": 0.4, "b": 1.0},
        N=200,
        k=1,
        seed=4,
    )
    clean, truth_clean = generate(SynthSpec(**base))
    noisy, truth_noisy = generate(SynthSpec(**base, noise_sd=0.05))
    # identical underlying dynamics, additive noise on the record only
    assert np.array_equal(truth_clean.gper_samples, truth_noisy.gper_samples)
    assert np.array_equal(
        truth_clean.chaos_increments, truth_noisy.chaos_increments
    )
    assert not np.array_equal(clean.values, noisy.values)


def test_non_contracting_chaos_rejected():
    with pytest.raises(SynthError, match="contraction"):
        SynthSpec(
            rho=np.array([0.1]),
            gper_coeffs={(1,): 1.0},
            chaos={"family": "tanh", "a": 2.0, "b": 1.0},
        )


def test_validation_errors():
    with pytest.raises(SynthError):
        SynthSpec(rho=np.array([0.0]), gper_coeffs={(1,): 1.0})
    with pytest.raises(SynthError):
        SynthSpec(rho=np.array([7.0]), gper_coeffs={(1,): 1.0})
    with pytest.raises(SynthError):
        SynthSpec(rho=np.array([0.1]), gper_coeffs={(1, 2): 1.0})
    with pytest.raises(SynthError):
        SynthSpec(
            rho=np.array([0.1]),
            gper_coeffs={(1,): np.array([1.0, 2.0, 3.0])},
            k=2,
        )
    with pytest.raises(SynthError):
        SynthSpec(rho=np.array([0.1]), gper_coeffs={(1,): 1.0},
                  chaos={"family": "logistic"})


def test_multichannel_coefficients():
    spec = SynthSpec(
        rho=on_grid_rho([5], 64),
        gper_coeffs={(1,): np.array([1.0, 0.5j])},
        chaos={"family": "none"},
        N=64,
        k=2,
        seed=5,
    )
    ts, _ = generate(spec)
    n = np.arange(64)
    assert np.allclose(ts.values[:, 0], np.cos(2 * np.pi * 5 * n / 64), atol=1e-12)
    assert np.allclose(ts.values[:, 1], -0.5 * np.sin(2 * np.pi * 5 * n / 64), atol=1e-12)


def test_burn_in_advances_phase():
    base = dict(
        rho=on_grid_rho([3], 64),
        gper_coeffs={(1,): 1.0},
        chaos={"family": "none"},
        N=64,
        k=1,
        seed=6,
    )
    plain, _ = generate(SynthSpec(**base))
    burned, _ = generate(SynthSpec(**base, burn_in=16))
    assert np.allclose(burned.values[:48], plain.values[16:], atol=1e-12)
