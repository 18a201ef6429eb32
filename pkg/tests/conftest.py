from pathlib import Path

import pytest

from fsikit.seeds.factories import ExampleFactory

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def config_dir() -> Path:
    return CONFIG_DIR


@pytest.fixture
def example1():
    return ExampleFactory.example1()


@pytest.fixture
def example1_stable():
    return ExampleFactory.example1(stable=True)


@pytest.fixture
def example2():
    """Builder: example2(p)."""
    return ExampleFactory.example2


@pytest.fixture
def example3():
    return ExampleFactory.example3()


@pytest.fixture
def example3_stable():
    return ExampleFactory.example3(stable=True)


@pytest.fixture
def pcmc_buck():
    """Stable PCMC buck at D = 0.6 (ramp dominates)."""
    return ExampleFactory.pcmc_buck()


@pytest.fixture
def pcmc_buck_unstable():
    """PCMC buck at D = 0.6 with a ramp too small to damp the current loop."""
    return ExampleFactory.pcmc_buck(V_m=0.005)
