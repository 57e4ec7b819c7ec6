import pytest

from repgames.games import validate_game, validate_strategy


@pytest.fixture
def game():
    return validate_game(3, 0, 5, 1)


@pytest.fixture
def qstar():
    """The worked MisTort opponent used across the examples."""
    return validate_strategy([0.9, 0.5, 0.2, 0.1], "completely_mixed")


@pytest.fixture
def ustrat():
    """An ungrateful opponent: q3 <= q1 <= q4 <= q2."""
    return validate_strategy([0.4, 0.8, 0.2, 0.6], "completely_mixed")
