"""The eight univariate simulation targets (normal, chi-square, mixtures, ...).

Every model exposes a vectorised closed-form ``pdf`` and an exact ``sample``
drawn from a :class:`~bagdens.rng.RngStream` (or a numpy ``Generator``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from bagdens.rng import RngStream

_SQRT_2PI = np.sqrt(2.0 * np.pi)


def _normal_pdf(x, mu=0.0, sd=1.0):
    z = (x - mu) / sd
    return np.exp(-0.5 * z * z) / (sd * _SQRT_2PI)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


# -- pdfs ---------------------------------------------------------------------

def _pdf_normal(x):
    return _normal_pdf(x)


def _pdf_chi10(x):
    # chi-square, 10 degrees of freedom: x^4 exp(-x/2) / (2^5 Gamma(5))
    out = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    out[pos] = np.exp(4.0 * np.log(xp) - xp / 2.0 - 5.0 * np.log(2.0) - gammaln(5.0))
    return out


_MIX1_SD = np.sqrt(0.3)


def _pdf_mix1(x):
    return 0.5 * _normal_pdf(x, -1.0, _MIX1_SD) + 0.5 * _normal_pdf(x, 1.0, _MIX1_SD)


_CLAW_MEANS = np.arange(5) / 2.0 - 1.0
_CLAW_SD = 0.1


def _pdf_claw(x):
    out = 0.5 * _normal_pdf(x)
    for mu in _CLAW_MEANS:
        out = out + 0.1 * _normal_pdf(x, mu, _CLAW_SD)
    return out


def _pdf_triangular(x):
    return np.where((x >= 0) & (x <= 2), 1.0 - np.abs(x - 1.0), 0.0)


def _pdf_uniform01(x):
    return np.where((x >= 0) & (x <= 1), 1.0, 0.0)


# blocks (0.2(i-1), 0.2(i-1) + 0.1], i = 1..10
_MIX2_LEFT = 0.2 * np.arange(10)
_MIX2_WIDTH = 0.1


def _in_mix2_block(x):
    # left-open, right-closed blocks; 0.2 spacing leaves gaps of width 0.1
    k = np.ceil(x / 0.2) - 1.0
    inside = (k >= 0) & (k <= 9)
    offset = x - 0.2 * k
    return inside & (offset > 0) & (offset <= _MIX2_WIDTH + 1e-15)


def _pdf_mix2(x):
    return 0.5 * _normal_pdf(x) + 0.5 * _in_mix2_block(x).astype(float)


def _pdf_mix3(x):
    left = (x >= -2) & (x <= -1)
    right = (x >= 1) & (x <= 2)
    return 0.5 * (left | right).astype(float)


# -- samplers -----------------------------------------------------------------

def _sample_normal(gen, n):
    return gen.standard_normal(n)


def _sample_chi10(gen, n):
    return gen.chisquare(10, n)


def _sample_mix1(gen, n):
    sign = np.where(gen.random(n) < 0.5, -1.0, 1.0)
    return sign + _MIX1_SD * gen.standard_normal(n)


def _sample_claw(gen, n):
    comp = gen.random(n)
    z = gen.standard_normal(n)
    # comp < 0.5 -> N(0,1); otherwise one of the five narrow claws
    claw = np.minimum(((comp - 0.5) / 0.1).astype(int), 4)
    return np.where(comp < 0.5, z, _CLAW_MEANS[np.maximum(claw, 0)] + _CLAW_SD * z)


def _sample_triangular(gen, n):
    u = gen.random(n)
    return np.where(u < 0.5, np.sqrt(2.0 * u), 2.0 - np.sqrt(2.0 * (1.0 - u)))


def _sample_uniform01(gen, n):
    return gen.random(n)


def _sample_mix2(gen, n):
    comp = gen.random(n)
    z = gen.standard_normal(n)
    block = gen.integers(0, 10, n)
    # 1 - U lies in (0, 1], matching the left-open block
    u = 1.0 - gen.random(n)
    return np.where(comp < 0.5, z, _MIX2_LEFT[block] + _MIX2_WIDTH * u)


def _sample_mix3(gen, n):
    u = gen.random(n)
    side = gen.random(n) < 0.5
    return np.where(side, -2.0 + u, 1.0 + u)


@dataclass(frozen=True)
class DensityModel:
    id: str
    label: str
    index: int
    support: tuple[float, float]
    _pdf: Callable = None
    _sampler: Callable = None
    breaks: tuple[float, ...] = ()   # points where the pdf is not smooth

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        out = self._pdf(np.atleast_1d(x))
        return float(out[0]) if scalar else out

    def sample(self, n: int, rng) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be >= 1")
        return np.asarray(self._sampler(_as_generator(rng), int(n)), dtype=float)

    def grid(self, points: int = 1001) -> np.ndarray:
        return np.linspace(self.support[0], self.support[1], points)

    def mass(self, a: float | None = None, b: float | None = None) -> float:
        """Adaptive quadrature of the pdf over [a, b] (default: the support hint)."""
        a = self.support[0] if a is None else a
        b = self.support[1] if b is None else b
        cuts = [a, *[c for c in self.breaks if a < c < b], b]
        return float(sum(quad(lambda t: self.pdf(t), lo, hi, limit=200)[0]
                         for lo, hi in zip(cuts[:-1], cuts[1:])))


MODELS: dict[str, DensityModel] = {
    m.id: m
    for m in (
        DensityModel("normal", "Normal", 1, (-5.0, 5.0), _pdf_normal, _sample_normal),
        DensityModel("chi10", "Chi10", 2, (0.0, 40.0), _pdf_chi10, _sample_chi10),
        DensityModel("mix1", "Mix1", 3, (-3.5, 3.5), _pdf_mix1, _sample_mix1),
        DensityModel("claw", "Claw", 4, (-4.0, 4.0), _pdf_claw, _sample_claw),
        DensityModel("triangular", "Triangular", 5, (0.0, 2.0), _pdf_triangular,
                     _sample_triangular, (0.0, 1.0, 2.0)),
        DensityModel("uniform01", "Uniform 0-1", 6, (0.0, 1.0), _pdf_uniform01,
                     _sample_uniform01, (0.0, 1.0)),
        DensityModel("mix2", "Mix2", 7, (-5.0, 5.0), _pdf_mix2, _sample_mix2,
                     tuple(np.round(np.sort(np.r_[_MIX2_LEFT, _MIX2_LEFT + _MIX2_WIDTH]), 12))),
        DensityModel("mix3", "Mix3", 8, (-2.0, 2.0), _pdf_mix3, _sample_mix3,
                     (-2.0, -1.0, 1.0, 2.0)),
    )
}

_ALIASES = {f"m{m.index}": m.id for m in MODELS.values()}


def get_model(name: str) -> DensityModel:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    try:
        return MODELS[key]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
