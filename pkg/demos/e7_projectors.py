"""e7: four projectors on V x V, their traces, and the 35-dimensional three-strand algebra."""

from birdtracks.centralizer import build_algebra
from birdtracks.rmatrix import build_R, check_projector_suite, verify_spectral

suite = check_projector_suite("e7")
traces = suite["_traces"]
print("projector suite passes:", suite["pass"])
for name, t in traces.items():
    print(f"tr {name} = {t}")

print("\ntr P3 along the series (m = 1, 2, 4, 8):")
print("  ", [int(traces["P3"].evaluate({"m": k})) for k in (1, 2, 4, 8)])
total = sum(traces.values())
print("sum of traces:", total, "  (should be (6m+8)^2)")

r = build_R("e7")
verify_spectral(r)
fs = [f for _, f, _ in r.spectral]
print("\neigenvalue ratios:")
for a, b in zip(fs, fs[1:]):
    print("  ", b / a)

alg3 = build_algebra("e7", 3)
print(f"\nthree strands: dim {alg3.dim}, relation variants {alg3.relation_variants}, rank {alg3.variant_rank}")
