from __future__ import annotations

from pathlib import Path

import pytest

from robustreach.formats import load_pam, load_tm

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


@pytest.fixture(scope="session")
def s1():
    """One piece, x -> x/2 on [0, 1]."""
    return load_pam(fixture_path("s1.json"))


@pytest.fixture(scope="session")
def s2():
    """Two pieces: x/2 on [0, 1/2], x/2 + 1/2 on [1/2, 1]."""
    return load_pam(fixture_path("s2.json"))


@pytest.fixture(scope="session")
def palindrome():
    return load_tm(fixture_path("palindrome.tm"))


@pytest.fixture(scope="session")
def marker():
    """Walks three cells right and accepts iff it finds a 1 there."""
    return load_tm(fixture_path("marker.tm"))


@pytest.fixture(scope="session")
def immediate():
    """Accepts every word at step 1 without looking at the tape."""
    return load_tm(fixture_path("immediate_accept.tm"))


@pytest.fixture(scope="session")
def right_mover():
    """Walks right forever, alternating two states; never decides."""
    return load_tm(fixture_path("right_mover.tm"))


@pytest.fixture(scope="session")
def loop_with_exit():
    """Bounces on two cells forever; has an accepting state it never enters."""
    return load_tm(fixture_path("loop_with_exit.tm"))
