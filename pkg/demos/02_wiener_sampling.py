# %% [markdown]
# # Sampling discrete-time Wiener and stable-spline processes
#
# A discrete-time Wiener path is a running sum of white noise scaled by the
# square root of the time steps.  Conversely, rescaled finite differences of a
# Wiener path are white noise.  Both directions are checked by Monte Carlo.

# %%
import numpy as np

from stablespline import (
    KernelSpec,
    empirical_covariance,
    finite_difference,
    gram,
    increment_matrix,
    make_grid,
    sample_stable_spline,
    sample_white,
    sample_wiener,
)

grid = make_grid([0.0, 0.2, 0.3, 1.0, 1.8, 2.0, 3.5])
lam, seed, n_paths = 1.5, 7, 200_000

paths = sample_wiener(grid, lam, seed, n_paths)
C = empirical_covariance(paths)
K = gram(KernelSpec.wiener(lam), grid).entries
print("max |C - lam min(t,s)| / max K =", np.max(np.abs(C - K)) / K.max())

# %% [markdown]
# Rescaled increments `(g(t_{i+1}) - g(t_i)) / sqrt(t_{i+1} - t_i)` should have
# variance `lam` and be uncorrelated.

# %%
w = finite_difference(paths).values / np.sqrt(grid.increments)
print("increment variances / lam:", np.round(w.var(axis=0, ddof=1) / lam, 4))
R = np.corrcoef(w, rowvar=False)
print("largest increment correlation:", np.max(np.abs(R - np.eye(len(R)))))

# %% [markdown]
# The same paths come out of the matrix form `g = A w`, where `A` is the
# lower-triangular increment matrix.

# %%
white = sample_white(grid, lam, seed, 5).values
A = increment_matrix(grid)
print("route difference:",
      np.max(np.abs(sample_wiener(grid, lam, seed, 5).values[:, 1:] - white[:, 1:] @ A.entries.T)))
print("log|A| =", A.log_abs_det)

# %% [markdown]
# Stable-spline paths: a Wiener process read at `exp(-beta t)`.

# %%
ss = sample_stable_spline(grid, beta=0.7, lam=lam, seed=seed, n_paths=n_paths)
K_tc = gram(KernelSpec.tc(0.7, lam), grid).entries
scale = np.sqrt(np.outer(np.diag(K_tc), np.diag(K_tc)))
print("max normalized covariance error:", np.max(np.abs(empirical_covariance(ss) - K_tc) / scale))
