import json

import pytest

from birdtracks import lemmas
from birdtracks.centralizer import build_algebra
from birdtracks.diagram import leg_transform
from birdtracks.ratfunc import RationalFunc

m = RationalFunc.var("m")


@pytest.mark.parametrize("key", ["cubic-loop", "sixth-order", "row-sum", "antisym-tree", "quartic-loop",
                                 "objj", "objh"])
def test_quick_proofs(key):
    rep = lemmas.prove(key)
    assert rep.passed, rep.transcript
    data = json.loads(rep.to_json())
    assert data["lemma"] == key and data["pass"] is True and data["transcript"]


def test_sixth_order_sign():
    rep = lemmas.prove("sixth-order")
    assert rep.details["opposite_sign_on_second_order_holds"] is False


def test_statements_are_unreduced():
    for key in lemmas.STATEMENTS:
        st = lemmas.statement(key)
        assert st.family in ("e6", "e7")
        assert len(st.lhs) > 0


def test_unknown_key():
    with pytest.raises(lemmas.UnknownLemma):
        lemmas.prove("4.1")
    with pytest.raises(lemmas.UnknownLemma):
        lemmas.statement("nope")


def test_keys_cover_every_proof():
    assert set(lemmas.KEYS) == set(lemmas.PROOFS)


def test_antisym_tree_transforms():
    # the T1 and T2 images of the identity hold as well
    st = lemmas.statement("antisym-tree")
    alg = build_algebra("e6", 3)
    for kind in ("T1", "T2"):
        lhs = alg.reduce(leg_transform(st.lhs, kind))
        rhs = alg.reduce(leg_transform(st.rhs, kind))
        assert lhs == rhs


def test_springer_is_symmetrized():
    st = lemmas.statement("springer")
    assert st.symmetrize == 4
    (_, c), = st.rhs
    assert c == 4 / (3 * m + 6)


@pytest.mark.slow
@pytest.mark.parametrize("key", ["brown", "rotated-brown", "triangle", "springer"])
def test_slow_proofs(key):
    rep = lemmas.prove(key)
    assert rep.passed, rep.transcript


@pytest.mark.slow
def test_rotated_brown_pair_is_unique():
    rep = lemmas.prove("rotated-brown")
    assert rep.details["pair"] == ["h025", "h014"]
    assert rep.details["magnitudes"] == {"2": 4, "1": 8}
