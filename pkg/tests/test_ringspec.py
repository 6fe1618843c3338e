import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import direct_ring_energies, ring_bin_counts

from sreval.errors import DimensionTooSmall, ZeroTotal
from sreval.image_io import LumaPlane
from sreval.ringspec import (
    RingSpectrum,
    compute_ring_spectrum,
    emit_ring_bars,
    high_frequency_share,
)
from sreval.synthetic import checkerboard, gaussian_blur, noise_plane


def test_boundaries_partition_unit_interval(rng):
    spec = compute_ring_spectrum(noise_plane(rng, 16, 16), 10)
    assert spec.boundaries[0] == 0.0
    assert spec.boundaries[-1] == 1.0
    assert len(spec.boundaries) == 11
    widths = np.diff(spec.boundaries)
    np.testing.assert_allclose(widths, 0.1, atol=1e-12)


def test_corner_impulse_energies_are_ring_bin_counts_exactly():
    # f[0,0]=1: every DFT magnitude is exactly 1, so ring energy == bin count
    arr = np.zeros((8, 8))
    arr[0, 0] = 1.0
    spec = compute_ring_spectrum(LumaPlane(arr), 10)
    counts = ring_bin_counts(8, 8, 10)
    assert list(spec.energies) == [float(c) for c in counts]


@pytest.mark.parametrize("pos", [(3, 5), (7, 2), (4, 4)])
def test_shifted_impulse_matches_direct_dft_oracle(pos):
    arr = np.zeros((8, 8))
    arr[pos] = 1.0
    spec = compute_ring_spectrum(LumaPlane(arr), 10)
    want = direct_ring_energies(arr.tolist(), 10)
    np.testing.assert_allclose(spec.energies, want, rtol=1e-9, atol=1e-9)


def test_random_plane_matches_direct_dft_oracle(rng):
    arr = rng.uniform(0, 255, size=(6, 9))
    spec = compute_ring_spectrum(LumaPlane(arr), 5)
    want = direct_ring_energies(arr.tolist(), 5)
    np.testing.assert_allclose(spec.energies, want, rtol=1e-9)


def test_total_energy_conservation(rng):
    arr = rng.uniform(0, 255, size=(32, 48))
    spec = compute_ring_spectrum(LumaPlane(arr), 10)
    magnitudes = np.abs(np.fft.fftshift(np.fft.fft2(arr)))
    assert sum(spec.energies) == pytest.approx(magnitudes.sum(), rel=1e-9)
    assert spec.total == sum(spec.energies)


def test_constant_plane_energy_is_all_dc():
    spec = compute_ring_spectrum(LumaPlane(np.full((16, 16), 200.0)), 10)
    assert spec.energies[0] == pytest.approx(200.0 * 16 * 16)
    assert sum(spec.energies[1:]) == pytest.approx(0.0, abs=1e-6)


def test_ring_count_validation(rng):
    plane = noise_plane(rng, 8, 8)
    with pytest.raises(ValueError):
        compute_ring_spectrum(plane, 0)


def test_min_plane_dimension(rng):
    with pytest.raises(DimensionTooSmall):
        compute_ring_spectrum(noise_plane(rng, 2, 8), 10)


# ---------------------------------------------------------------------------
# high-frequency share


def test_share_at_cutoff_zero_is_exactly_one(rng):
    spec = compute_ring_spectrum(noise_plane(rng, 16, 16), 10)
    assert high_frequency_share(spec, 0) == 1.0


def test_share_monotone_in_cutoff(rng):
    spec = compute_ring_spectrum(noise_plane(rng, 16, 16), 10)
    shares = [high_frequency_share(spec, c) for c in range(10)]
    assert all(a >= b for a, b in zip(shares, shares[1:]))


def test_share_cutoff_validation(rng):
    spec = compute_ring_spectrum(noise_plane(rng, 16, 16), 10)
    with pytest.raises(ValueError):
        high_frequency_share(spec, 10)
    with pytest.raises(ValueError):
        high_frequency_share(spec, -1)


def test_blank_plane_raises_zero_total():
    spec = compute_ring_spectrum(LumaPlane(np.zeros((8, 8))), 10)
    with pytest.raises(ZeroTotal):
        high_frequency_share(spec, 5)


def test_blur_strictly_lowers_share():
    cb = checkerboard(32, cell=4)
    shares = [
        high_frequency_share(compute_ring_spectrum(p, 10), 5)
        for p in (cb, gaussian_blur(cb, 1.0), gaussian_blur(cb, 2.0))
    ]
    assert shares[0] > shares[1] > shares[2]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), h=st.integers(4, 24), w=st.integers(4, 24))
def test_conservation_property(seed, h, w):
    gen = np.random.default_rng(seed)
    arr = gen.uniform(0, 255, size=(h, w))
    spec = compute_ring_spectrum(LumaPlane(arr), 8)
    assert all(e >= 0.0 for e in spec.energies)
    total = np.abs(np.fft.fftshift(np.fft.fft2(arr))).sum()
    assert sum(spec.energies) == pytest.approx(total, rel=1e-9)


# ---------------------------------------------------------------------------
# emission


def test_emit_ring_bars_csv_and_svg(tmp_path, rng):
    spectra = [
        ("a", compute_ring_spectrum(noise_plane(rng, 16, 16), 10)),
        ("b", compute_ring_spectrum(noise_plane(rng, 16, 16), 10)),
    ]
    csv_path = tmp_path / "rings.csv"
    svg_path = tmp_path / "rings.svg"
    emit_ring_bars(spectra, csv_path, svg_path=svg_path)
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["label", "ring_index", "r_min", "r_max", "energy"]
    assert len(rows) == 1 + 20
    assert {r[0] for r in rows[1:]} == {"a", "b"}
    text = svg_path.read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")


def test_emit_ring_bars_rejects_mixed_ring_counts(tmp_path, rng):
    spectra = [
        ("a", compute_ring_spectrum(noise_plane(rng, 16, 16), 10)),
        ("b", compute_ring_spectrum(noise_plane(rng, 16, 16), 5)),
    ]
    with pytest.raises(ValueError):
        emit_ring_bars(spectra, tmp_path / "x.csv")


def test_ring_spectrum_validation():
    with pytest.raises(ValueError):
        RingSpectrum(boundaries=(0.0, 0.5, 1.0), energies=(1.0,), total=1.0)
