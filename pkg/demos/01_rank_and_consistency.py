"""Priorities, rankings and consistency of a small pairwise-comparison matrix.

Four alternatives compared pairwise: c_ij says how much a_i beats a_j.
"""

import numpy as np

from pcman import consistency, derive, rank_of, validate
from pcman.core import TEXT_RECIPROCITY_TOL, consistent_from_weights

# values as typed with four decimals, so reciprocity holds only to ~1e-4
C = validate(
    [
        [1, 0.3203, 6.4158, 1.5449],
        [3.1224, 1, 3.2254, 1.7171],
        [0.1559, 0.3100, 1, 0.1390],
        [0.6473, 0.5824, 7.1927, 1],
    ],
    tol=TEXT_RECIPROCITY_TOL,
)
print(C)

# eigenvalue method: principal eigenvector, found by power iteration
evm = derive(C, "evm")
print("EVM weights:", np.round(evm.weights, 4), "lambda_max =", round(evm.lambda_max, 4))

# geometric mean method: row geometric means, normalized
gmm = derive(C, "gmm")
print("GMM weights:", np.round(gmm.weights, 4))

# rank 1 is the weakest alternative
print("EVM ranks:", rank_of(evm).positions)
print("GMM ranks:", rank_of(gmm).positions)

rep = consistency(C)
print(f"CI = {rep.ci:.4f}, RI = {rep.ri}, CR = {rep.cr:.4f}")
if rep.cr > 0.1:
    print("CR above 0.1: usually considered too inconsistent")

# a matrix built from any weight vector is consistent: CI is zero, EVM == GMM
K = consistent_from_weights([0.5, 0.3, 0.2])
print("consistent CI:", f"{consistency(K).ci:.1e}")
print("EVM == GMM:", np.allclose(derive(K, "evm").weights, derive(K, "gmm").weights))
