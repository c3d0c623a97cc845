"""Bagged histogram, frequency polygon and kernel density estimators."""

from bagdens.estimators import (
    BinGrid,
    FrequencyPolygon,
    Histogram,
    Kde,
    Kernel,
    fit_frequency_polygon,
    fit_histogram,
    fit_kde,
    get_kernel,
    kernel_constants,
)
from bagdens.bagging import BaggedEnsemble, bootstrap_resample, fit_bagged, fit_rash
from bagdens.models import MODELS, get_model
from bagdens.rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "BaggedEnsemble",
    "BinGrid",
    "FrequencyPolygon",
    "Histogram",
    "Kde",
    "Kernel",
    "MODELS",
    "RngStream",
    "bootstrap_resample",
    "fit_bagged",
    "fit_frequency_polygon",
    "fit_histogram",
    "fit_kde",
    "fit_rash",
    "get_kernel",
    "get_model",
    "kernel_constants",
]
