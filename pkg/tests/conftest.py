import numpy as np
import pytest

from fbpindex import datagen
from fbpindex.evalbench import Protocol


def small_spec(n=120, d=64, seed=11, sigmas=(0.5, 0.3, 0.8), samples=4):
    names = ("face", "fingerprint", "iris")
    return datagen.SynthSpec(
        n_identities=n,
        characteristics=tuple(datagen.CharacteristicSpec(c, d, s, samples)
                              for c, s in zip(names, sigmas)),
        seed=seed)


@pytest.fixture(scope="session")
def small_dataset():
    return datagen.generate(small_spec())


@pytest.fixture(scope="session")
def small_protocol():
    return Protocol(folds=4, seed=3, calibration_identities=20, k_range=(3, 4, 5))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance results, printed as one line per criterion at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
