import json

import numpy as np
import pytest

from artifact.errors import InvalidArgument, NotFound, ParseError, ResourceLimit
from artifact.families import family_build, family_instance_make
from artifact.moddata import pointed
from artifact.workbench import (SearchSpec, export_json, fixture_names, import_json, involutive_classes, load_fixture,
                                reproduce, search)

from conftest import HYPERBOLIC, form


@pytest.mark.parametrize("name", fixture_names())
def test_fixture_reproduces(name):
    rep = reproduce(name)
    assert rep.passed, rep.summary()


def test_corpus_is_complete():
    names = fixture_names()
    assert len(names) == 13
    for key in ("haagerup-rank12", "asaeda-haagerup", "appendix-e-rank7", "family-c-smallest"):
        assert key in names
    with pytest.raises(NotFound):
        load_fixture("no-such-fixture")


def test_near_group_search_matches_the_known_count():
    hits = search(SearchSpec("A", ((5,),), ((9,), (3, 3))))
    assert len(hits) == 3
    assert [h.instance.Gamma.orders for h in hits].count((3, 3)) == 1


def test_search_is_deterministic_across_threads():
    spec = SearchSpec("A", ((5,),), ((9,), (3, 3)))
    one = [h.instance.to_json() for h in search(spec, 1)]
    four = [h.instance.to_json() for h in search(spec, 4)]
    assert json.dumps(one, sort_keys=True) == json.dumps(four, sort_keys=True)


def test_unfiltered_search_is_a_superset():
    spec = SearchSpec("B", ((2,),), ((4,), (2, 2)))
    filtered = {json.dumps(h.instance.to_json(), sort_keys=True) for h in search(spec)}
    loose = SearchSpec("B", ((2,),), ((4,), (2, 2)), fs_filters=False)
    unfiltered = {json.dumps(h.instance.to_json(), sort_keys=True) for h in search(loose)}
    assert filtered <= unfiltered


def test_enumerated_involutions_include_minus():
    minus = involutive_classes((2, 2), "minus")
    every = involutive_classes((2, 2), "enumerate")
    assert len(every) > len(minus)
    assert len(involutive_classes((3,), "minus")) == 2


def test_search_spec_validation():
    with pytest.raises(InvalidArgument):
        SearchSpec("Q", ((2,),), ((4,),))
    with pytest.raises(InvalidArgument):
        SearchSpec("A", ((2,),), ((4,),), involution="all")
    with pytest.raises(ResourceLimit):
        SearchSpec("A", ((128,),), ((4,),))
    with pytest.raises(ParseError):
        SearchSpec.from_json({"family": "A"})
    spec = SearchSpec("D", ((2, 2),), ((5,),))
    assert SearchSpec.from_json(spec.to_json()) == spec


def test_export_import_roundtrip(tmp_path, examples):
    md = family_build(family_instance_make(examples["C"]))
    path = tmp_path / "c.json"
    export_json(md, path)
    again = import_json(path)
    assert again.labels == md.labels and again.T == md.T
    assert np.allclose(again.S, md.S)


def test_import_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    with pytest.raises(ParseError, match="line 1"):
        import_json(bad)
    with pytest.raises(ParseError):
        import_json(tmp_path / "missing.json")
    md = pointed(form(*HYPERBOLIC)).to_json()
    md["T"] = ["0", "0", "0", "0"]
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(md))
    with pytest.raises(ParseError, match="fails"):
        import_json(broken)
