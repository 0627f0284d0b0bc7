"""Spectral analysis toolkit for time-varying Bayesian optimization.

Submodules:

- ``kernels``   stationary correlation functions, their spectral densities
                and the four-class support taxonomy
- ``spectral``  kernel matrices, exact eigendecomposition and spectrum
                approximations (sampled densities, low-rank weights,
                product lattices, circulant embeddings)
- ``gp``        exact GP posteriors, prior path sampling, Mercer posterior
- ``tvbo``      the GP-UCB simulation loop and regret traces
- ``bounds``    mutual information and the cumulative-regret bounds
- ``expcli``    reproducible experiment runner (CSV + SVG artifacts)
"""

from . import bounds, errors, gp, kernels, spectral, tvbo
from .kernels import (
    ClassTag,
    KernelClass,
    LowRankKernel,
    SpatialKernel,
    TemporalKernel,
    classify,
    low_rank_approx,
    spectral_density,
)
from .spectral import Scale, Spectrum, TimeGrid, eig_sym

__version__ = "0.1.0"
