import numpy as np
import pytest

from sohcast.data import split_by_health, synth_degradation
from sohcast.distillation import train_teacher
from sohcast.models import TeacherModel

TOY_WINDOW, TOY_HORIZON = 24, 12


@pytest.fixture(scope="session")
def toy_split():
    """Small noisy synthetic dataset shared by training-dependent tests."""
    cells = synth_degradation(12, 300, {"noise_sd": 0.004}, seed=11)
    return split_by_health(cells, 1 / 3, seed=11, window=TOY_WINDOW,
                           horizon=TOY_HORIZON, train_stride=15)


@pytest.fixture(scope="session")
def toy_teacher(toy_split):
    """A small but properly trained teacher (reused; never mutated)."""
    teacher = TeacherModel(TOY_WINDOW, TOY_HORIZON, hidden_dim=16, steps=10, seed=5)
    train_teacher(teacher, toy_split.train, epochs=40, lr=3e-3, seed=5)
    return teacher


LIN_WINDOW, LIN_HORIZON = 32, 8


@pytest.fixture(scope="session")
def linear_decay_split():
    """Noiseless SoH(c) = 1 - 1e-4*c: the easiest possible forecasting task."""
    cells = synth_degradation(8, 260, {"noise_sd": 0.0, "b_range": (0.0, 0.0),
                                       "a_range": (1e-4, 1e-4)}, seed=3)
    return split_by_health(cells, 1 / 3, seed=3, window=LIN_WINDOW,
                           horizon=LIN_HORIZON, train_stride=10)
