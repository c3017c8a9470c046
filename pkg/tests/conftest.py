import numpy as np
import pytest


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@pytest.fixture
def rng():
    return philox(12345)


# Two parameter settings per family, shared by the grid property checks and
# the acceptance suite.
FAMILY_SETTINGS = {
    "indep": [()],
    "gaussian": [(0.5,), (-0.7,)],
    "student": [(0.5, 4.0), (-0.3, 10.0)],
    "clayton": [(0.8,), (3.0,)],
    "gumbel": [(1.5,), (4.0,)],
    "frank": [(4.0,), (-8.0,)],
    "joe": [(1.5,), (3.0,)],
    "bb1": [(0.5, 1.5), (2.0, 2.0)],
    "bb6": [(1.5, 1.5), (2.0, 3.0)],
    "bb7": [(1.5, 1.0), (2.0, 2.5)],
    "bb8": [(3.0, 0.7), (5.0, 0.5)],
}


def all_copulas():
    """Every family x admissible rotation x parameter setting."""
    from sparsevine import bicop as bc

    out = []
    for fam, settings in FAMILY_SETTINGS.items():
        rots = (0,) if fam in bc.SYMMETRIC_FAMILIES else (0, 90, 180, 270)
        for par in settings:
            for rot in rots:
                out.append(bc.FittedBicop(fam, rot, par))
    return out


def planted_snp_dataset(seed: int, n: int = 500, n_snps: int = 2000, n_causal: int = 100):
    """Synthetic genomics dataset: a latent genetic score drives both the
    causal SNP block (through correlated liabilities) and the trait."""
    from sparsevine.genomics import SNPMatrix

    rng = philox(seed)
    g = rng.standard_normal(n)
    values = np.empty((n, n_snps), dtype=np.uint8)
    load = 0.8
    for j in range(n_causal):
        liability = load * g + np.sqrt(1.0 - load * load) * rng.standard_normal(n)
        cut = rng.uniform(-0.8, 0.8)
        values[:, j] = 2 * (liability > cut)
    maf = rng.uniform(0.1, 0.5, size=n_snps - n_causal)
    values[:, n_causal:] = 2 * (rng.uniform(size=(n, n_snps - n_causal)) < maf)
    y = g + 0.5 * rng.standard_normal(n)
    cols = tuple(
        [f"causal{j}" for j in range(n_causal)]
        + [f"noise{j}" for j in range(n_snps - n_causal)]
    )
    return y, SNPMatrix(values=values, col_ids=cols), set(cols[:n_causal])
