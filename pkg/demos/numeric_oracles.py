"""Check symbolic identities against explicit tensors built from R, C, H and O.

The exceptional cubic invariant at m comes from 3x3 hermitian matrices over
the m-dimensional division algebra; e7 at m=2 uses the third exterior power of C^6.
"""

from fractions import Fraction

from birdtracks import numeric
from birdtracks.rmatrix import build_R

for m in (1, 2, 4, 8):
    real = numeric.realization("e6", m=m)
    res = {k: numeric.identity_residual(k, m) for k in ("cubic-loop", "row-sum", "springer")}
    line = ", ".join(f"{k} {v:.1e}" for k, v in res.items())
    print(f"e6 m={m} (n={real.n}): {line}")

terms = build_R("e6").element.to_result()
for m, (u, v) in [(1, (Fraction(1, 3), Fraction(1, 5))), (4, (Fraction(1, 3), Fraction(1, 5))), (8, (1, 2))]:
    r = numeric.ybe_numeric_residual(terms, numeric.realization("e6", m=m), u, v, trials=5, seed=0)
    print(f"numeric YBE e6 m={m}: {r:.1e}")

exact = numeric.realization("e6", m=1, exact=True)
print("exact 216x216 YBE at m=1:", numeric.ybe_exact_matrix(terms, exact, Fraction(1, 3), Fraction(2, 5)))

for key in ("quartic-loop", "brown"):
    print(f"e7 m=2 {key}: {numeric.identity_residual(key, 2):.1e}")
