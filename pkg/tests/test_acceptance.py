"""Acceptance criteria 1-10, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.  The file also runs as a
script: ``python tests/test_acceptance.py``.
"""

import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from birdtracks import lemmas, numeric
from birdtracks.centralizer import build_algebra
from birdtracks.ratfunc import ONE, RationalFunc
from birdtracks.rmatrix import (build_R, check_projector_suite, crossing_check, objh_check, objj_check,
                                verify_spectral, ybe_residual)

m, n, u = (RationalFunc.var(x) for x in ("m", "n", "u"))


def _ybe(family, budget):
    t0 = time.perf_counter()
    rep = ybe_residual(family)
    dt = time.perf_counter() - t0
    return rep.residual_zero and dt < budget, f"{family} residual {'0' if rep.residual_zero else 'nonzero'} in {dt:.1f} s"


def criterion_1():
    return _ybe("e6", 60)


def criterion_2():
    return _ybe("e7", 300)


def criterion_3():
    results = [_ybe(f, 30) for f in ("su", "so", "sp")]
    return all(ok for ok, _ in results), "; ".join(d for _, d in results)


def criterion_4():
    want3 = {"su": 6, "so": 15, "sp": 15, "e6": 20, "e7": 35}
    want2 = {"su": 2, "so": 3, "sp": 3, "e6": 3, "e7": 4}
    got3 = {f: build_algebra(f, 3).dim for f in want3}
    got2 = {f: build_algebra(f, 2).dim for f in want2}
    e6, e7 = build_algebra("e6", 3), build_algebra("e7", 3)
    ranks = ((e6.variant_rank, e6.relation_variants), (e7.variant_rank, e7.relation_variants))
    ok = got3 == want3 and got2 == want2 and ranks == ((5, 6), (5, 24))
    return ok, f"p=3 {got3}; p=2 {got2}; variant ranks e6 {ranks[0][0]}/{ranks[0][1]}, e7 {ranks[1][0]}/{ranks[1][1]}"


def criterion_5():
    suites = {(f, False): check_projector_suite(f) for f in ("su", "so", "sp", "e6", "e7")}
    suites[("e6", True)] = check_projector_suite("e6", mixed=True)
    ok = all(s["pass"] for s in suites.values())
    so = suites[("so", False)]["_traces"]
    ok &= so == {"P+": n * (n + 1) / 2 - 1, "P-": n * (n - 1) / 2, "P0": ONE}
    e7 = suites[("e7", False)]["_traces"]
    ok &= e7["P4"] == ONE
    p3 = [int(e7["P3"].evaluate({"m": k})) for k in (1, 2, 4, 8)]
    ok &= p3 == [21, 35, 66, 133]
    return ok, f"{len(suites)} suites idempotent/orthogonal/complete; e7 P3 traces {p3}, P4 trace {e7['P4']}"


def criterion_6():
    want = {"e6": [(4 + u) / (4 - u), (2 * m + u) / (2 * m - u)],
            "e7": [(2 + u) / (2 - u), (m + 2 + u) / (m + 2 - u), (2 * m + 2 + u) / (2 * m + 2 - u)]}
    ok = True
    for family, ratios in want.items():
        r = build_R(family)
        verify_spectral(r)
        fs = [f for _, f, _ in r.spectral]
        ok &= [fs[i + 1] / fs[i] for i in range(len(fs) - 1)] == ratios
    return ok, "e6 and e7 eigenvalue ratios equal the unified spectra exactly"


LEMMA_KEYS = ("cubic-loop", "sixth-order", "row-sum", "objj", "antisym-tree", "quartic-loop", "objh",
              "rotated-brown", "triangle")


def criterion_7():
    failed = [k for k in LEMMA_KEYS if not lemmas.prove(k).passed]
    j, h = objj_check(), objh_check()
    unique = j["eigenspace_dim"] == 1 and h["eigenspace_dim"] == 1
    ok = not failed and unique
    return ok, f"{len(LEMMA_KEYS) - len(failed)}/{len(LEMMA_KEYS)} identities; eigenspace dims objj {j['eigenspace_dim']}, objh {h['eigenspace_dim']}" + (f"; failed {failed}" if failed else "")


def criterion_8():
    rep = crossing_check()
    ok = rep["pass"] and rep["_scalar"] == u - 3 * m
    return ok, f"Cross(R_VV(3m-u)) = ({rep['scalar']}) R_VVbar(u)"


def criterion_9():
    t0 = time.perf_counter()
    worst, ok = {}, True
    for key in ("cubic-loop", "springer", "row-sum"):
        for mm in (1, 2, 4, 8):
            tol = 1e-10 if mm == 1 else 1e-9
            r = numeric.identity_residual(key, mm)
            worst[f"{key}@{mm}"] = r
            ok &= r <= tol
    for key in ("quartic-loop", "brown"):
        r = numeric.identity_residual(key, 2)
        worst[f"{key}@a5"] = r
        ok &= r <= 1e-9
    e6 = build_R("e6").element.to_result()
    for mm in (1, 2, 4, 8):
        uv = (1, 2) if mm == 8 else (Fraction(1, 3), Fraction(1, 5))
        r = numeric.ybe_numeric_residual(e6, numeric.realization("e6", m=mm), *uv, trials=5, seed=0)
        worst[f"ybe e6@{mm}"] = r
        ok &= r <= 1e-8
    e7 = build_R("e7").element.to_result()
    r = numeric.ybe_numeric_residual(e7, numeric.realization("e7", m=2), Fraction(1, 3), Fraction(1, 5), trials=5)
    worst["ybe e7@a5"] = r
    ok &= r <= 1e-8
    exact = numeric.ybe_exact_matrix(e6, numeric.realization("e6", m=1, exact=True), Fraction(1, 3), Fraction(1, 5))
    ok &= exact
    dt = time.perf_counter() - t0
    ok &= dt < 600
    top = max(worst.values())
    return ok, f"max residual {top:.1e} over {len(worst)} checks; exact 216x216 identity {exact}; {dt:.0f} s"


def criterion_10():
    ok, worst, degenerate = True, 0.0, []
    for family in ("su", "so", "sp"):
        for nv in range(1, 7):
            if family == "sp" and nv % 2:
                continue
            real = numeric.realization(family, n=nv)
            for p in (2, 3):
                alg = build_algebra(family, p)
                sym = np.array(alg.constants_at({"n": nv}), dtype=float)
                try:
                    num = numeric.oracle_structure_constants(alg.basis, real)
                    err = float(np.abs(num - sym).max())
                except numeric.DegenerateBasis:
                    # dependent operators: compare the products themselves
                    err = numeric.product_residual(alg.basis, sym, real)
                    degenerate.append(f"{family}{nv}/p{p}")
                worst = max(worst, err)
                ok &= err <= 1e-9
    return ok, f"max deviation {worst:.1e}; operator comparison at degenerate {', '.join(degenerate)}"


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 11)}


@pytest.mark.slow
@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, verdicts):
    ok, detail = CRITERIA[k]()
    verdicts[k] = (bool(ok), detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for k, fn in CRITERIA.items():
        ok, detail = fn()
        failures += not ok
        print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
    sys.exit(1 if failures else 0)
