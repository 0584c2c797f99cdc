"""Shared fixtures: the default build, bundled drive cycles, tiny synthetic trips."""

from pathlib import Path

import pytest

from hevql.config import build_config
from hevql.cycle import DriveCycle, load_cycle

REPO_ROOT = Path(__file__).resolve().parent.parent
CYCLE_DIR = REPO_ROOT / "data" / "cycles"


@pytest.fixture(scope="session")
def cfg():
    return build_config({})


@pytest.fixture(scope="session")
def env(cfg):
    return cfg.env()


@pytest.fixture(scope="session")
def udds():
    return load_cycle(str(CYCLE_DIR / "udds.csv"), name="udds")


@pytest.fixture(scope="session")
def wltp():
    return load_cycle(str(CYCLE_DIR / "wltp_class3.csv"), name="wltp")


@pytest.fixture(scope="session")
def hwfet():
    return load_cycle(str(CYCLE_DIR / "hwfet.csv"), name="hwfet")


def make_ramp_cycle(top_mps: float = 14.0, step_mps: float = 2.0) -> DriveCycle:
    """Short launch-cruise-brake trip, cheap enough for training loops in tests."""
    speeds = [0.0, 0.0]
    v = 0.0
    while v < top_mps:
        v = min(v + step_mps, top_mps)
        speeds.append(v)
    speeds.extend([top_mps] * 6)
    while v > 0.0:
        v = max(v - step_mps, 0.0)
        speeds.append(v)
    speeds.extend([0.0, 0.0])
    times = tuple(float(t) for t in range(len(speeds)))
    return DriveCycle(name="ramp", timestamps_s=times, speeds_mps=tuple(speeds))


@pytest.fixture(scope="session")
def ramp_cycle():
    return make_ramp_cycle()


@pytest.fixture(scope="session")
def zero_cycle():
    times = tuple(float(t) for t in range(11))
    return DriveCycle(name="zeros", timestamps_s=times, speeds_mps=(0.0,) * 11)


def write_cycle_csv(cycle: DriveCycle, path) -> str:
    """Serialize a cycle in the loader's metric header format."""
    lines = ["time_s,speed_mps"]
    for t, v in zip(cycle.timestamps_s, cycle.speeds_mps):
        lines.append(f"{t:.1f},{v!r}")
    Path(path).write_text("\n".join(lines) + "\n")
    return str(path)
