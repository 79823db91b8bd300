import math
from pathlib import Path

import pytest

from coopamc.channels import LutzParams
from coopamc.modes import AmcMode, ModeSet, db_to_linear
from coopamc.scenario import load_mode_set

REPO = Path(__file__).resolve().parents[1]
SCENARIOS = REPO / "scenarios"


@pytest.fixture(scope="session")
def scenario_dir() -> Path:
    return SCENARIOS


@pytest.fixture(scope="session")
def hiperlan_modes() -> ModeSet:
    return load_mode_set(SCENARIOS / "modes_hiperlan2.yaml")


@pytest.fixture(scope="session")
def hiperlan_modes_lmsc() -> ModeSet:
    return load_mode_set(SCENARIOS / "modes_hiperlan2_lmsc.yaml")


@pytest.fixture(scope="session")
def mode_a2g1() -> AmcMode:
    # Synthetic single mode with PER(gamma) = min(1, 2 e^{-gamma}),
    # continuous at the cutoff ln 2.
    return AmcMode(1, 1.0, 2.0, 1.0, math.log(2.0))


@pytest.fixture(scope="session")
def single_mode_set(mode_a2g1) -> ModeSet:
    return ModeSet((mode_a2g1,), packet_length=1080)


# Lutz channel parameter rows measured in the city (S-D) and highway (R-D)
# environments, unfaded power normalized to 1; Rice factor converted from dB.
@pytest.fixture(scope="session")
def lutz_sd_params() -> LutzParams:
    return LutzParams(0.89, db_to_linear(3.9), 1.0, -11.5, 2.0)


@pytest.fixture(scope="session")
def lutz_rd_params() -> LutzParams:
    return LutzParams(0.24, db_to_linear(10.2), 1.0, -8.9, 5.1)
