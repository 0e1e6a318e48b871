"""Turn the e6 R-matrix a quarter turn and land on the mixed V x Vbar R-matrix."""

from birdtracks.centralizer import build_algebra
from birdtracks.rmatrix import build_R, check_projector_suite, crossing_check, cross

alg = build_algebra("e6", 2)
print("Cross(P) =", cross(alg.element("P"), build_algebra("e6", 2, mixed=True)))

mixed = build_R("e6", mixed=True)
print("R_VVbar(u) =", mixed.element)
for name, t in check_projector_suite("e6", mixed=True)["_traces"].items():
    print(f"  tr {name} = {t}")

rep = crossing_check()
print("crossing holds:", rep["pass"], " scalar:", rep["scalar"])
