"""Seeded counter-based random fields for the audit corpora.

Reproducibility across implementations matters more than statistical
sophistication here, so coefficients come from the splitmix64 finalizer
applied to (seed, counter) pairs:

    state   = (seed + (counter + 1) * 0x9E3779B97F4A7C15) mod 2^64
    z       = state
    z       = (z xor (z >> 30)) * 0xBF58476D1CE4E5B9   mod 2^64
    z       = (z xor (z >> 27)) * 0x94D049BB133111EB   mod 2^64
    z       = z xor (z >> 31)
    uniform = z / 2^64                                in [0, 1)

Two corpus flavors share the mode set: integer wavevectors k in
{0..kmax}^dim \\ {0} enumerated in C order, with x' = 2*pi*x/extent per
axis and the spectral envelope w_k = 1/(1 + |k|^2).

* ``band_limited_field`` (generic smooth fields):
      f(x) = sum_k w_k * [ a_k cos(k.x') + b_k sin(k.x') ],
  a_k, b_k = 2*u - 1 from consecutive counters; field number i consumes
  counters [i*2M, (i+1)*2M) where M is the mode count.

* ``audit_field`` (inequality-audit corpora):
      f(x) = sum_k w_k * cos(k.x' + 2*pi*u_k),
  random phases over a fixed envelope; field number i consumes counters
  [i*M, (i+1)*M). The fixed envelope keeps the corpus maxima of the audited
  ratios sharply attained, so they stabilize under corpus growth instead of
  chasing rare amplitude records.

Pairs use the even/odd field indices 2i and 2i+1.
"""

from __future__ import annotations

import itertools

import numpy as np

from .grid import Grid

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, counters: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 outputs for an array of counters."""
    with np.errstate(over="ignore"):
        z = (np.uint64(seed) + (counters.astype(np.uint64) + np.uint64(1)) * _GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z


def uniform(seed: int, counters: np.ndarray) -> np.ndarray:
    """Deterministic uniforms in [0, 1) addressed by counter."""
    return splitmix64(seed, np.asarray(counters)).astype(np.float64) / 2.0 ** 64


def _modes(dim: int, kmax: int) -> list[tuple[int, ...]]:
    return [k for k in itertools.product(range(kmax + 1), repeat=dim)
            if any(k)]


def band_limited_field(grid: Grid, seed: int, index: int, kmax: int = 3) -> np.ndarray:
    """Field number ``index`` of the corpus addressed by ``seed``."""
    modes = _modes(grid.dim, kmax)
    n_coeff = 2 * len(modes)
    base = index * n_coeff
    coeffs = 2.0 * uniform(seed, np.arange(base, base + n_coeff)) - 1.0
    xs = [2.0 * np.pi * grid.coords(a) / grid.extent[a] for a in range(grid.dim)]
    mesh = np.meshgrid(*xs, indexing="ij")
    out = np.zeros(grid.shape)
    for j, k in enumerate(modes):
        phase = sum(k[a] * mesh[a] for a in range(grid.dim))
        weight = 1.0 / (1.0 + sum(ka ** 2 for ka in k))
        out += weight * (coeffs[2 * j] * np.cos(phase) + coeffs[2 * j + 1] * np.sin(phase))
    return out


def band_limited_pair(grid: Grid, seed: int, index: int,
                      kmax: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Pair number ``index``: fields 2*index and 2*index + 1 of the corpus."""
    return (band_limited_field(grid, seed, 2 * index, kmax),
            band_limited_field(grid, seed, 2 * index + 1, kmax))


def audit_field(grid: Grid, seed: int, index: int, kmax: int = 3) -> np.ndarray:
    """Random-phase field over the fixed spectral envelope (audit corpora)."""
    modes = _modes(grid.dim, kmax)
    base = index * len(modes)
    phases = 2.0 * np.pi * uniform(seed, np.arange(base, base + len(modes)))
    xs = [2.0 * np.pi * grid.coords(a) / grid.extent[a] for a in range(grid.dim)]
    mesh = np.meshgrid(*xs, indexing="ij")
    out = np.zeros(grid.shape)
    for j, k in enumerate(modes):
        phase = sum(k[a] * mesh[a] for a in range(grid.dim))
        weight = 1.0 / (1.0 + sum(ka ** 2 for ka in k))
        out += weight * np.cos(phase + phases[j])
    return out


def audit_pair(grid: Grid, seed: int, index: int,
               kmax: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Audit-corpus pair number ``index`` (fields 2*index and 2*index + 1)."""
    return (audit_field(grid, seed, 2 * index, kmax),
            audit_field(grid, seed, 2 * index + 1, kmax))


def band_limited_vector(grid: Grid, seed: int, index: int, kmax: int = 3) -> np.ndarray:
    """Vector field whose components are consecutive corpus fields."""
    comps = [band_limited_field(grid, seed, grid.dim * index + a, kmax)
             for a in range(grid.dim)]
    return np.stack(comps, axis=-1)
