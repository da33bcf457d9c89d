"""Operator-learning datasets: generators, a Burgers reference solver and the ODNB format."""

from .burgers import BurgersInstabilityError, burgers_solve
from .chebyshev import ChebCoeffs, cheb_antiderivative, cheb_eval
from .dataset import DatasetError, OperatorDataset
from .generators import (
    GENERATORS,
    gen_advection,
    gen_burgers,
    gen_differentiation,
    gen_identity,
    generate,
    grf_inputs,
)
from .grf import GrfSample, grf_eigenvalues, grf_sample, realize
from .odnb import FormatError, dataset_bytes, parse_dataset, read_dataset, write_dataset

__all__ = [
    "BurgersInstabilityError", "burgers_solve", "ChebCoeffs", "cheb_antiderivative",
    "cheb_eval", "DatasetError", "OperatorDataset", "GENERATORS", "gen_advection",
    "gen_burgers", "gen_differentiation", "gen_identity", "generate", "grf_inputs",
    "GrfSample", "grf_eigenvalues", "grf_sample", "realize", "FormatError",
    "dataset_bytes", "parse_dataset", "read_dataset", "write_dataset",
]
