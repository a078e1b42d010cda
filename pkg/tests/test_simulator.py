import numpy as np
import pytest

import roomdecay as rd
from roomdecay.bands import bank_power_response
from roomdecay.errors import ValidationError
from roomdecay.simulator import (
    KERNEL_TAPS,
    SAMPLE_RATE,
    SPEED_OF_SOUND,
    fractional_delay_kernel,
    image_arrivals,
)


def _flat_room(alpha=0.3, dims=(4.0, 4.0, 4.0), src=(1.0, 2.0, 2.0), rcv=(3.0, 2.0, 2.0)):
    return rd.RoomSpec(
        length_m=dims[0], width_m=dims[1], height_m=dims[2],
        source_xyz=src, receiver_xyz=rcv, absorption=(alpha,) * 7,
    )


def test_total_absorption_leaves_only_direct_path():
    # Source/receiver separation chosen so the direct delay is an exact
    # integer number of samples: the kernel collapses to a unit impulse.
    dist = 280 * SPEED_OF_SOUND / SAMPLE_RATE
    room = _flat_room(alpha=1.0, src=(1.0, 2.0, 2.0), rcv=(1.0 + dist, 2.0, 2.0))
    rir = rd.simulate_band_rir(room, 0, 0.05)
    expected = np.zeros(len(rir.samples))
    expected[280] = 1.0 / dist
    assert np.allclose(rir.samples, expected, atol=1e-15)


def test_first_order_mirror_path_lengths():
    # Hand-computed first-order image distances for a 4 m cube with the
    # source at (1,2,2) and receiver at (3,2,2).
    room = _flat_room()
    distances, counts = image_arrivals(room, 6.0)
    first_order = np.sort(distances[counts == 1])
    expected = np.sort([4.0, 4.0, np.sqrt(20), np.sqrt(20), np.sqrt(20), np.sqrt(20)])
    assert first_order.shape == expected.shape
    assert np.allclose(first_order, expected, atol=SPEED_OF_SOUND / SAMPLE_RATE)
    assert np.isclose(distances[counts == 0][0], 2.0)


def test_band_rir_contains_first_order_arrivals():
    room = _flat_room()
    rir = rd.simulate_band_rir(room, 3, 0.05)
    for d in (2.0, 4.0, np.sqrt(20)):
        idx = int(round(d / SPEED_OF_SOUND * SAMPLE_RATE))
        window = rir.samples[idx - 1 : idx + 2]
        assert np.max(np.abs(window)) > 0.05 / d


def test_band_rir_decay_matches_eyring_prediction():
    # Median over a handful of mid-absorption rooms; the statistical
    # formula is only a coarse oracle, hence the wide tolerance.
    ratios = []
    for seed in range(6):
        base = rd.sample_room(seed)
        room = rd.RoomSpec(
            length_m=base.length_m, width_m=base.width_m, height_m=base.height_m,
            source_xyz=base.source_xyz, receiver_xyz=base.receiver_xyz,
            absorption=(0.3,) * 7,
        )
        t_eyring = rd.predict_t60_eyring(room, 0)
        rir = rd.simulate_band_rir(room, 0, max(0.5, 2.0 * t_eyring))
        measured = rd.t20(rd.compute_edc(rir))
        ratios.append(measured / t_eyring)
    median = float(np.median(ratios))
    assert 0.8 <= median <= 1.2, ratios


def test_reciprocity_same_echogram():
    room = _flat_room(src=(1.2, 1.7, 2.9), rcv=(2.8, 3.1, 1.4))
    swapped = rd.RoomSpec(
        length_m=room.length_m, width_m=room.width_m, height_m=room.height_m,
        source_xyz=room.receiver_xyz, receiver_xyz=room.source_xyz,
        absorption=room.absorption,
    )
    beta = np.sqrt(1.0 - 0.3)
    bins = np.linspace(0.0, 60.0, 201)
    hists = []
    for r in (room, swapped):
        d, c = image_arrivals(r, 60.0)
        energy = (beta**c / d) ** 2
        hists.append(np.histogram(d, bins=bins, weights=energy)[0])
    assert np.allclose(hists[0], hists[1], atol=1e-9)


def test_arrival_count_grows_cubically():
    room = _flat_room()
    counts = [len(image_arrivals(room, 343.0 * t)[0]) for t in (0.1, 0.2, 0.4)]
    # doubling the reach should multiply arrivals by ~8
    assert counts[1] / counts[0] == pytest.approx(8.0, rel=0.15)
    assert counts[2] / counts[1] == pytest.approx(8.0, rel=0.15)


def test_simulate_rir_exact_length_and_determinism(mid_room):
    rir = rd.simulate_rir(mid_room, 1.0)
    assert len(rir.samples) == 48_000
    again = rd.simulate_rir(mid_room, 1.0)
    assert np.array_equal(rir.samples, again.samples)
    assert np.max(np.abs(rir.samples)) == pytest.approx(1.0)


def test_broadband_t20_matches_single_band():
    room = _flat_room(alpha=0.35, src=(1.0, 1.3, 1.1), rcv=(2.9, 2.6, 2.2))
    duration = max(0.5, 2.0 * rd.predict_t60_eyring(room, 0))
    broadband = rd.t20(rd.compute_edc(rd.simulate_rir(room, duration)))
    single = rd.t20(rd.compute_edc(rd.simulate_band_rir(room, 3, duration)))
    assert broadband == pytest.approx(single, rel=0.05)


def test_coincident_source_receiver_rejected():
    room = _flat_room(src=(2.0, 2.0, 2.0), rcv=(2.0, 2.0, 2.0))
    with pytest.raises(ValidationError):
        rd.simulate_rir(room, 0.1)


def test_eyring_direct_formula():
    # V=100 m^3, S=130 m^2 shoebox: 5 x 5 x 4.
    room = rd.RoomSpec(
        length_m=5, width_m=5, height_m=4,
        source_xyz=(1, 1, 1), receiver_xyz=(3, 3, 2), absorption=(0.3,) * 7,
    )
    assert room.volume_m3 == pytest.approx(100.0)
    assert room.surface_m2 == pytest.approx(130.0)
    assert rd.predict_t60_eyring(room, 0) == pytest.approx(0.347, abs=5e-4)


def test_eyring_monotone_in_absorption():
    times = []
    for alpha in (0.2, 0.3, 0.5, 0.7, 0.9):
        room = _flat_room(alpha=alpha)
        times.append(rd.predict_t60_eyring(room, 0))
    assert all(a > b for a, b in zip(times, times[1:]))


def test_eyring_scaling_law():
    small = rd.RoomSpec(5, 5, 4, (1, 1, 1), (3, 3, 2), (0.3,) * 7)
    big = rd.RoomSpec(10, 10, 8, (2, 2, 2), (6, 6, 4), (0.3,) * 7)
    assert rd.predict_t60_eyring(big, 0) == pytest.approx(
        2.0 * rd.predict_t60_eyring(small, 0)
    )


def test_duration_policy_floor_and_cap():
    live = _flat_room(alpha=0.99)
    assert rd.default_duration(live) == 0.5
    # huge near-rigid room exceeds the cap
    boomy = rd.RoomSpec(50, 50, 50, (10, 10, 10), (30, 30, 30), (0.02,) * 7)
    assert rd.default_duration(boomy) == 3.0


def test_kernel_is_delta_at_zero_phase():
    k = fractional_delay_kernel(0.0)
    assert k.shape == (KERNEL_TAPS,)
    assert k[KERNEL_TAPS // 2] == 1.0
    assert np.all(np.delete(k, KERNEL_TAPS // 2) == 0.0)


def test_kernel_interpolates_between_samples():
    k = fractional_delay_kernel(0.5)
    assert k[40] == pytest.approx(k[41])
    assert abs(k[40] - 2 / np.pi) < 0.05


def test_filter_bank_power_sum_is_flat():
    freqs = np.geomspace(89.0, 11_300.0, 400)
    power = bank_power_response(freqs, 48_000)
    assert power.min() >= 0.5
    assert power.max() <= 1.5


def test_rir_rejects_nonfinite():
    with pytest.raises(ValidationError):
        rd.Rir(samples=np.array([1.0, np.nan]), sample_rate=48_000)
