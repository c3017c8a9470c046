"""Genomic feature-extraction pipeline on a synthetic SNP panel.

Plants a causal SNP block driven by a latent genetic score, then runs the
full pipeline: duplicate/frequency preprocessing, per-SNP Wald screening,
p-value-ordered grouping into continuous features, per-feature bivariate
copula analysis, and finally sparse D-vine regression on the features.
"""

import numpy as np

from sparsevine import dvine, genomics, select, simbench

rng = np.random.Generator(np.random.Philox(11))
n, n_snps, n_causal = 400, 800, 60

latent = rng.standard_normal(n)
values = np.empty((n, n_snps), dtype=np.uint8)
for j in range(n_causal):
    liability = 0.8 * latent + 0.6 * rng.standard_normal(n)
    values[:, j] = 2 * (liability > rng.uniform(-0.8, 0.8))
maf = rng.uniform(0.1, 0.5, size=n_snps - n_causal)
values[:, n_causal:] = 2 * (rng.uniform(size=(n, n_snps - n_causal)) < maf)
y = latent + 0.5 * rng.standard_normal(n)

snps = genomics.SNPMatrix(
    values=values,
    col_ids=tuple([f"causal{j}" for j in range(n_causal)]
                  + [f"noise{j}" for j in range(n_snps - n_causal)]),
)

train, _ = genomics.preprocess(snps, freq_threshold=0.05)
print(f"preprocessing: {snps.shape[1]} SNPs -> {train.shape[1]} "
      "(duplicates and <5% minor frequency dropped)")

screen = genomics.screen(y, train, p_cut=0.10)
print(f"screening: {len(screen.order)} SNPs with Wald p < 0.10; "
      f"best p = {screen.pvalues[screen.order[0]]:.2e}")

features = genomics.extract_features(screen, train, grouping=60)
frac = np.mean([c.startswith("causal") for c in features.groups[0]])
print(f"grouping: {features.values.shape[1]} features of size <= 60; "
      f"first feature is {frac:.0%} causal SNPs")

print("\n== bivariate copula analysis per feature ==")
for row in genomics.bivariate_analysis(y, features):
    flag = "independent?" if row["independent"] else f"tau={row['tau']:+.2f}"
    print(f" feature {row['feature'] + 1}: {row['family']:9s} {flag}")

data = np.column_stack([y, features.values])
model, trace = select.vinereg_res(data)
print(f"\nvineregRes on the features chose {trace.chosen} "
      f"(feature 1 carries the causal block)")
preds = dvine.predict_quantiles(model, data[:, 1:], (0.05, 0.5, 0.95))
print(f"in-sample pinball at 0.5: {simbench.pinball(y, preds[:, 1], 0.5):.3f}")
