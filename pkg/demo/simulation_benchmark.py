"""Seeded replication benchmark comparing the two fast selection methods.

A compact version of the simulation study: DGP1 case 1 with a handful of
replications, reporting variable-selection quality and pinball losses with
empirical standard errors.
"""

from sparsevine import simbench

cfg = simbench.DGPConfig(dgp=1, p=10, seed=5)
result = simbench.run_benchmark(cfg, methods=("res", "parcor"), replications=3)

print(f"{'method':>8s} {'measure':>14s} {'mean':>9s} {'se':>8s}")
for row in result.rows:
    print(f"{row['method']:>8s} {row['measure']:>14s} {row['mean']:9.3f} {row['se']:8.3f}")
print(f"failures: {result.failures}")
print("replication 0 detail:",
      {k: v for k, v in result.replications[0].items() if k in ("seed", "chosen", "fits")})
