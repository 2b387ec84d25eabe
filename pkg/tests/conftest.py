import math

import pytest

from nfbeam.cidft import build_lookup_table
from nfbeam.codebook import PAPER_SIN_MAX, dft_codebook, polar_codebook
from nfbeam.geometry import ArrayConfig


@pytest.fixture(scope="session")
def cfg():
    return ArrayConfig()


@pytest.fixture(scope="session")
def small_cfg():
    return ArrayConfig(n_elements=32)


@pytest.fixture(scope="session")
def sector_table(cfg):
    return build_lookup_table(cfg, -PAPER_SIN_MAX, PAPER_SIN_MAX)


@pytest.fixture(scope="session")
def full_table(cfg):
    return build_lookup_table(cfg)


@pytest.fixture(scope="session")
def sector_dft(sector_table):
    return sector_table.book


@pytest.fixture(scope="session")
def sector_polar(cfg):
    return polar_codebook(cfg, -PAPER_SIN_MAX, PAPER_SIN_MAX)


@pytest.fixture(scope="session")
def full_dft(cfg):
    return dft_codebook(cfg)


DEG = math.pi / 180


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
