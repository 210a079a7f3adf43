# %% [markdown]
# # Impulse-response estimation with the TC prior
#
# Data: `y = f * u + v` with `f(k) = 0.7**k`, white-noise input and 10 dB SNR.
# The TC-GP estimate (hyperparameters by evidence maximization) is compared
# to unregularized least squares.

# %%
import numpy as np

from stablespline import EstimationConfig, IODataset, convolution_matrix, estimate_impulse_response
from stablespline.sysid import least_squares_fir

m, n = 50, 200
f = 0.7 ** np.arange(m)
rng = np.random.default_rng(1)
u = rng.standard_normal(n)
clean = convolution_matrix(u, m) @ f
y = clean + np.sqrt(np.var(clean) / 10) * rng.standard_normal(n)
data = IODataset.from_arrays(np.arange(n, dtype=float), u, y)

result = estimate_impulse_response(data, EstimationConfig(m=m))
ls = least_squares_fir(data, m)


def rel(e):
    return np.linalg.norm(e - f) / np.linalg.norm(f)


print(f"beta={result.beta:.3f} lambda={result.lam:.3g} sigma2={result.sigma2:.3g}")
print(f"relative error: TC-GP {rel(result.f_mean):.3f}, least squares {rel(ls):.3f}")

# %%
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(f, "k--", label="true")
    ax.plot(ls, ".", alpha=0.5, label="least squares")
    ax.plot(result.f_mean, label="TC-GP mean")
    ax.fill_between(np.arange(m), result.f_mean - 2 * result.f_std,
                    result.f_mean + 2 * result.f_std, alpha=0.3)
    ax.legend()
    fig.savefig("impulse_response.png", dpi=100)
    print("saved impulse_response.png")
