import itertools

import pytest

from artifact.abgroup import fixed_subgroup
from artifact.classification import classify_involutive, two_group_shapes
from artifact.errors import InvalidArgument
from artifact.metric import InvolutiveMetricGroup, are_isomorphic


@pytest.fixture(scope="module", params=["z2", "z2z2"])
def report(request):
    return classify_involutive(request.param, 16)


def test_catalogue_accounts_for_every_class(report):
    assert report.ok, report.summary()
    assert report.unmatched == [] and report.overlaps() == [] and report.unrealized == []


def test_class_counts_are_frozen(report):
    assert len(report.classes) == {"z2": 18, "z2z2": 41}[report.pattern]


def test_classes_have_the_requested_fixed_points(report):
    want = {"z2": (2,), "z2z2": (2, 2)}[report.pattern]
    for c in report.classes:
        fixed = fixed_subgroup(c.group, c.involution)
        assert fixed.size == 2 ** len(want)
        assert all(2 * v % c.group.orders[i] == 0 for x in fixed for i, v in enumerate(x))
        assert c.form.nondegenerate()
        for x in c.group.elements:
            assert c.form(c.involution(x)) == c.form(x)


def test_classes_are_pairwise_distinct(report):
    imgs = [InvolutiveMetricGroup(c.form, c.involution) for c in report.classes]
    for a, b in itertools.combinations(imgs, 2):
        if a.group.orders == b.group.orders:
            assert are_isomorphic(a, b) is None


def test_report_json(report):
    data = report.to_json()
    assert data["ok"] and len(data["classes"]) == len(report.classes)


def test_two_group_shapes():
    assert sorted(two_group_shapes(8)) == sorted([(2,), (4,), (2, 2), (8,), (2, 4), (2, 2, 2)])


def test_bad_arguments():
    with pytest.raises(InvalidArgument):
        classify_involutive("z4", 16)
    with pytest.raises(InvalidArgument):
        classify_involutive("z2", 128)
