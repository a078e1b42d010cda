import numpy as np
import pytest

import roomdecay as rd


def make_exponential_edc(t60_s: float, duration_s: float, sample_rate: int = 48_000) -> rd.Edc:
    """Exact exponential decay: 10 dB per t60/6 seconds, starting at 1."""
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    return rd.Edc(values=10.0 ** (-6.0 * t / t60_s), sample_rate=sample_rate)


@pytest.fixture(scope="session")
def mid_room() -> rd.RoomSpec:
    return rd.sample_room(42)


@pytest.fixture(scope="session")
def short_rir(mid_room) -> rd.Rir:
    return rd.simulate_rir(mid_room, 0.5)
