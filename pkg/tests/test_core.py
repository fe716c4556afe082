import math

import numpy as np
import pytest

from appletasting.core import (
    Feedback,
    GameSpec,
    expected_loss,
    feedback,
    optimal_action,
    optimal_action_from_prob,
    realized_loss,
    sigmoid,
)

G = GameSpec(l01=0.4, l11=0.05, d=1, T=10)


def test_sigmoid_values():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(800.0) == 1.0
    assert sigmoid(-800.0) == 0.0
    assert sigmoid(3.7) + sigmoid(-3.7) == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.isfinite(sigmoid(np.array([-700.0, 0.0, 700.0]))))


def test_sigmoid_array_matches_scalar():
    z = np.linspace(-30, 30, 61)
    np.testing.assert_allclose(sigmoid(z), [sigmoid(float(v)) for v in z], rtol=1e-15)


@pytest.mark.parametrize(
    "a, p, expected",
    [(0, 0.5, 0.2), (1, 0.0, 1.0), (1, 1.0, 0.05)],
)
def test_expected_loss(a, p, expected):
    assert expected_loss(a, p, G) == pytest.approx(expected)


def test_expected_loss_rejects_bad_probability():
    with pytest.raises(ValueError):
        expected_loss(0, 1.2, G)


def test_optimal_action_examples():
    # losses evaluated arm by arm
    for p, losses, best in [(0.9, (0.36, 0.145), 1), (0.5, (0.2, 0.525), 0)]:
        assert expected_loss(0, p, G) == pytest.approx(losses[0])
        assert expected_loss(1, p, G) == pytest.approx(losses[1])
        z = math.log(p / (1 - p))
        assert optimal_action(np.array([z]), np.array([1.0]), G) == best


def test_tie_goes_to_action_one():
    p_star = 1 / 1.35
    assert G.indifference_prob == pytest.approx(p_star)
    assert expected_loss(0, p_star, G) == pytest.approx(expected_loss(1, p_star, G))
    assert optimal_action_from_prob(p_star, G) == 1
    assert optimal_action_from_prob(p_star - 1e-9, G) == 0


def test_boundary_logit():
    assert G.boundary_logit == pytest.approx(math.log(1 / 0.35))
    theta = np.array([G.boundary_logit + 1e-9])
    assert optimal_action(theta, np.array([1.0]), G) == 1
    assert optimal_action(-theta, np.array([-1.0]), G) == 1
    assert optimal_action(theta - 2e-9, np.array([1.0]), G) == 0


def test_realized_loss_matrix():
    assert realized_loss(0, 0, G) == 0
    assert realized_loss(0, 1, G) == 0.4
    assert realized_loss(1, 0, G) == 1
    assert realized_loss(1, 1, G) == 0.05


def test_feedback_matrix():
    assert feedback(0, 1, G) == Feedback(None)
    assert not feedback(0, 0, G).observed
    assert feedback(1, 0, G).signal == 1.0
    assert feedback(1, 1, G).signal == 0.05
    assert feedback(1, 0, G).true_class(G) == 0
    assert feedback(1, 1, G).true_class(G) == 1
    with pytest.raises(ValueError):
        Feedback(None).true_class(G)


def test_game_validation():
    with pytest.raises(ValueError):
        GameSpec(l01=0.1, l11=0.2, d=1, T=1)
    with pytest.raises(ValueError):
        GameSpec(l01=0.4, l11=-0.1, d=1, T=1)
    with pytest.raises(ValueError):
        GameSpec(l01=0.4, l11=0.05, d=0, T=1)
    # problem (iii) loss parameters sit at l01 - l11 = 1
    assert GameSpec(l01=1.0, l11=0.0, d=1, T=1).boundary_logit == 0.0


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        optimal_action(np.zeros(2), np.zeros(3), G)
