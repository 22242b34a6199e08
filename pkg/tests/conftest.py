from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, settings

from artifact.abgroup import Group, GroupMap
from artifact.families import FamilyInput
from artifact.metric import InvolutiveMetricGroup, QuadraticForm

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def form(orders, diag, off=None) -> QuadraticForm:
    g = Group(tuple(orders))
    return QuadraticForm.make(g, [F(d) for d in diag], {k: F(v) for k, v in (off or {}).items()})


def with_involution(f: QuadraticForm, rows) -> InvolutiveMetricGroup:
    return InvolutiveMetricGroup(f, GroupMap.from_matrix(f.group, rows))


HYPERBOLIC = ((2, 2), (0, 0), {(0, 1): F(1, 2)})


def family_examples() -> dict:
    """The smallest example of every family used across the suite."""
    hyp = form(*HYPERBOLIC)
    return {
        "A-near-group": FamilyInput(
            "A", with_involution(hyp, [[0, 1], [1, 0]]),
            with_involution(form((2, 2, 3), (F(1, 4), F(1, 4), F(1, 3))), [[0, 1, 0], [1, 0, 0], [0, 0, 2]])),
        "A-z4": FamilyInput.of("A", form((4,), (F(1, 8),)), form((4, 3), (F(3, 8), F(1, 3)))),
        "A-haagerup": FamilyInput.of("A", form((3, 3), (F(1, 3), F(2, 3))), form((13,), (F(2, 13),))),
        "B": FamilyInput.of("B", form((2,), (F(1, 4),)), form((4,), (F(5, 8),))),
        "B-conjugate": FamilyInput.of("B", form((2,), (F(3, 4),)), form((4,), (F(3, 8),))),
        "C": FamilyInput("C", InvolutiveMetricGroup.plus(hyp),
                         InvolutiveMetricGroup.minus(form((2, 4), (F(1, 4), F(3, 8))))),
        "D": FamilyInput.of("D", form((2, 2), (F(1, 2), F(1, 2)), {(0, 1): F(1, 2)}), form((5,), (F(1, 5),))),
        "D-asaeda-haagerup": FamilyInput.of("D", form((4, 4), (0, 0), {(0, 1): F(1, 4)}),
                                            form((17,), (F(3, 17),))),
        "E": FamilyInput.of("E", form((2, 2, 3), (0, 0, F(1, 3)), {(0, 1): F(1, 2)}), form((11,), (F(2, 11),))),
    }


EXPECTED_RANKS = {"A-near-group": 10, "A-z4": 10, "A-haagerup": 12, "B": 7, "B-conjugate": 7, "C": 14,
                  "D": 10, "D-asaeda-haagerup": 22, "E": 17}


@pytest.fixture(scope="session")
def examples():
    return family_examples()
