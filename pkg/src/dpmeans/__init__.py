"""Exact distributions of Dirichlet process means computed from the parameter measure."""

__version__ = "0.1.0"

from .charfn import CharfnResult, joint_stieltjes, mean_charfn, variance_mgf
from .errors import DPMeansError
from .gamma_mean import gamma_charfn, gamma_mean_density, levy_reconstruct_charfn
from .identities import lauricella_stieltjes, mk_transform
from .mean_distribution import density_grid, mean_cdf_interval, mean_density
from .measure import Cauchy, Discrete, GaussianScaled, UniformScaled, load_measure, truncate
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .zeta import zeta

__all__ = [
    "CharfnResult",
    "Cauchy",
    "DEFAULT_CONFIG",
    "DPMeansError",
    "Discrete",
    "GaussianScaled",
    "QuadratureConfig",
    "UniformScaled",
    "density_grid",
    "gamma_charfn",
    "gamma_mean_density",
    "joint_stieltjes",
    "lauricella_stieltjes",
    "levy_reconstruct_charfn",
    "load_measure",
    "mean_cdf_interval",
    "mean_charfn",
    "mean_density",
    "mk_transform",
    "truncate",
    "variance_mgf",
    "zeta",
]
