import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from birdtracks.centralizer import build_algebra
from birdtracks.ratfunc import ONE, RationalFunc
from birdtracks.rmatrix import (R_TERMS, RMatrix, _spectral, build_R, check_projector_suite,
                                crossing_check, element_from, objh_check, objj_check, projectors, verify_spectral,
                                ybe_residual)

m, n, u = (RationalFunc.var(x) for x in ("m", "n", "u"))
nonzero = st.fractions(-4, 4, max_denominator=4).filter(lambda q: q != 0)


@pytest.mark.parametrize("family", ["su", "so", "sp", "e6", "e7"])
def test_spectral_form_reproduces_R(family):
    r = build_R(family)
    rep = verify_spectral(r)
    total = sum((f * P for _, f, P in r.spectral[1:]), r.spectral[0][1] * r.spectral[0][2])
    assert total == r.element
    assert len(rep["ratios"]) == len(r.spectral) - 1


@pytest.mark.parametrize("family,ratios", [
    # [PAPER] unified spectra
    ("e6", [(4 + u) / (4 - u), (2 * m + u) / (2 * m - u)]),
    ("e7", [(2 + u) / (2 - u), (m + 2 + u) / (m + 2 - u), (2 * m + 2 + u) / (2 * m + 2 - u)]),
    ("su", [(2 + u) / (2 - u)]),
    ("so", [(2 + u) / (2 - u), (n - 2 + u) / (n - 2 - u)]),
])
def test_eigenvalue_ratios(family, ratios):
    fs = [f for _, f, _ in build_R(family).spectral]
    assert [fs[i + 1] / fs[i] for i in range(len(fs) - 1)] == ratios


def test_mixed_ratios():
    fs = [f for _, f, _ in build_R("e6", mixed=True).spectral]
    assert fs[1] / fs[0] == (u + m + 4) / (u - m - 4)
    assert fs[2] / fs[1] == (u + 3 * m) / (u - 3 * m)


def test_opposite_e7_cupcap_sign_breaks_the_last_ratio():
    alg = build_algebra("e7", 2)
    terms = dict(R_TERMS["e7"])
    terms["C"] = -terms["C"]
    el = element_from(alg, terms)
    r = RMatrix("e7", el, _spectral(el, projectors("e7")))
    verify_spectral(r)
    fs = [f for _, f, _ in r.spectral]
    assert fs[3] / fs[2] != (2 * m + 2 + u) / (2 * m + 2 - u)
    assert fs[1] / fs[0] == (2 + u) / (2 - u)


@pytest.mark.parametrize("family,mixed", [("su", False), ("so", False), ("sp", False), ("e6", False),
                                          ("e7", False), ("e6", True)])
def test_projector_suites(family, mixed):
    rep = check_projector_suite(family, mixed)
    assert rep["orthogonal_idempotents"] and rep["complete"] and rep["pass"]


def test_classical_traces():
    so = check_projector_suite("so")["_traces"]
    assert so == {"P+": n * (n + 1) / 2 - 1, "P-": n * (n - 1) / 2, "P0": ONE}
    su = check_projector_suite("su")["_traces"]
    assert su == {"P+": n * (n + 1) / 2, "P-": n * (n - 1) / 2}
    sp = check_projector_suite("sp")["_traces"]
    assert sp == {"P+": n * (n + 1) / 2, "P-": n * (n - 1) / 2 - 1, "P0": ONE}


def test_exceptional_traces():
    e6 = check_projector_suite("e6")["_traces"]
    dim = 3 * m + 3
    assert e6 == {"P1": dim * (dim + 1) / 2 - dim, "P2": dim * (dim - 1) / 2, "P3": dim}
    e7 = check_projector_suite("e7")["_traces"]
    assert e7["P4"] == ONE
    # [DERIVED] adjoint dimensions of c3, a5, d6, e7
    assert [e7["P3"].evaluate({"m": k}) for k in (1, 2, 4, 8)] == [21, 35, 66, 133]
    assert sum(e7.values(), RationalFunc(0)) == (6 * m + 8) ** 2


@pytest.mark.parametrize("family", ["su", "so", "sp", "e6"])
def test_ybe_exact(family):
    rep = ybe_residual(family)
    assert rep.residual_zero
    assert all(row["residual_terms"] == 0 for row in rep.per_order)
    data = json.loads(rep.to_json())
    assert data["residual_zero"] is True and data["series"] == family
    assert "residual: 0" in rep.transcript()


@pytest.mark.parametrize("family", ["su", "so", "sp"])
@given(nonzero, nonzero)
def test_ybe_scaling_freedom(family, mu, lam):
    assert ybe_residual(family, scale=(RationalFunc(mu), RationalFunc(lam))).residual_zero


@pytest.mark.slow
@settings(max_examples=2)
@given(nonzero, nonzero)
def test_ybe_scaling_freedom_e6(mu, lam):
    assert ybe_residual("e6", scale=(RationalFunc(mu), RationalFunc(lam))).residual_zero


@pytest.mark.parametrize("family", ["su", "so", "sp", "e6", "e7"])
def test_value_at_zero_is_identity(family):
    r = build_R(family)
    at0 = r.at(0)
    alg = at0.algebra
    lead = at0.coefficient("id")
    assert lead != 0
    assert at0 == lead * alg.one


def test_crossing_scalar():
    rep = crossing_check()
    assert rep["pass"]
    assert rep["_scalar"] == u - 3 * m
    assert rep["_scalar"].evaluate({"m": 1, "u": Fraction(1, 2)}) == Fraction(-5, 2)


def test_objj_and_objh():
    j = objj_check()
    assert j["T1"] and j["T2"] and j["eigenspace_dim"] == 1 and j["proportional"]
    h = objh_check()
    assert h["R60"] and h["eigenspace_dim"] == 1 and h["proportional"]


def test_eigenvalue_lookup():
    r = build_R("e6")
    assert r.eigenvalue("P2") / r.eigenvalue("P1") == (4 + u) / (4 - u)
    with pytest.raises(KeyError):
        r.eigenvalue("P9")
