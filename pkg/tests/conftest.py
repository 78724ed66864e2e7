import pytest

from socialots import social, verifier


@pytest.fixture(scope="session")
def defs():
    return verifier.builtin_definitions()


@pytest.fixture(scope="session")
def bounds():
    return social.social_bounds()


@pytest.fixture
def net():
    return social.SocialNetwork()


@pytest.fixture(scope="session")
def step_checker(bounds):
    """The full two-account universe; built once, shared by the slow tests."""
    return verifier.StepChecker(bounds, social.SocialNetwork())
