"""Periodic torus grids and their Fourier lattices.

Fields are plain ``numpy`` arrays of shape ``(N,) * d`` sampled on the
torus ``[0, 2*pi*L)^d``; their spectra are the unnormalised ``fftn``
coefficients.  Wave vectors are integers divided by ``L``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft as sfft


class LatticeMismatchError(ValueError):
    """Two objects live on different grids / lattices."""


@dataclass(frozen=True)
class FrequencyLattice:
    """Collocation grid and matching wave-vector lattice of a torus.

    Parameters
    ----------
    d : int
        Spatial dimension (1 or 2).
    N : int
        Points per dimension (even).
    L : float
        Period scale; the torus side is ``2*pi*L``.
    """

    d: int
    N: int
    L: float = 1.0

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if self.N < 4 or self.N % 2:
            raise ValueError(f"N must be even and >= 4, got {self.N}")
        if self.L <= 0:
            raise ValueError("L must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def dx(self) -> float:
        return 2 * np.pi * self.L / self.N

    @property
    def nyquist(self) -> float:
        """Largest resolved wavenumber magnitude along an axis."""
        return self.N / (2 * self.L)

    @cached_property
    def x(self) -> tuple[np.ndarray, ...]:
        """Meshgrid of collocation coordinates (``indexing='ij'``)."""
        x1 = self.dx * np.arange(self.N)
        return tuple(np.meshgrid(*([x1] * self.d), indexing="ij"))

    @cached_property
    def k1(self) -> np.ndarray:
        return np.fft.fftfreq(self.N, d=1.0 / self.N) / self.L

    @cached_property
    def k(self) -> tuple[np.ndarray, ...]:
        """Meshgrid of wave-vector components."""
        return tuple(np.meshgrid(*([self.k1] * self.d), indexing="ij"))

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(sum(kk**2 for kk in self.k))

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on modes carrying an axis index equal to ``N/2``."""
        idx = np.fft.fftfreq(self.N, d=1.0 / self.N)
        m1 = idx == -self.N // 2
        masks = np.meshgrid(*([m1] * self.d), indexing="ij")
        return np.logical_or.reduce(masks)

    @cached_property
    def ik(self) -> tuple[np.ndarray, ...]:
        """Derivative multipliers ``i k_j`` with the Nyquist mode zeroed."""
        out = []
        for kk in self.k:
            m = 1j * kk
            m = np.where(self.nyquist_mask, 0.0, m)
            out.append(m)
        return tuple(out)

    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.fftn(f, axes=tuple(range(-self.d, 0)))

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(fh, axes=tuple(range(-self.d, 0))).real

    def check(self, f: np.ndarray) -> None:
        if f.shape[-self.d:] != self.shape:
            raise LatticeMismatchError(
                f"field shape {f.shape} does not match grid {self.shape}"
            )

    def refined(self, factor: int = 2) -> "FrequencyLattice":
        return FrequencyLattice(self.d, self.N * factor, self.L)

    def key(self) -> dict:
        return {"d": self.d, "N": self.N, "L": float(self.L)}


def lp_norm(f: np.ndarray, p: float) -> float:
    """L^p norm on the torus with the normalised (probability) measure.

    ``p = inf`` is the grid maximum.
    """
    a = np.abs(f)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float(np.mean(a**p) ** (1.0 / p))


def resample(f: np.ndarray, lat: FrequencyLattice, new: FrequencyLattice) -> np.ndarray:
    """Trigonometric interpolation of a grid field onto another resolution."""
    if lat.d != new.d or lat.L != new.L:
        raise LatticeMismatchError("resampling needs same dimension and period")
    fh = lat.fft(f) / lat.N**lat.d
    fh = np.where(lat.nyquist_mask, 0.0, fh)
    out = np.zeros(new.shape, dtype=complex)
    n = min(lat.N, new.N) // 2
    sl = [np.r_[0:n, -n + 1:0] for _ in range(lat.d)]
    src_idx = np.ix_(*[s % lat.N for s in sl])
    dst_idx = np.ix_(*[s % new.N for s in sl])
    out[dst_idx] = fh[src_idx]
    return new.ifft(out * new.N**new.d)


class Dealiaser:
    """Products of band-limited fields on a 3/2 zero-padded grid.

    Spectra are full ``fftn`` arrays on the ``N`` grid; the Nyquist modes of
    the inputs are ignored so that the retained product modes are exact.
    """

    def __init__(self, lat: FrequencyLattice):
        self.lat = lat
        N, d = lat.N, lat.d
        self.M = M = 3 * N // 2
        half = N // 2
        idx = np.r_[0:half, -half + 1:0]
        self.src = np.ix_(*([idx % N] * d))
        self.dst_full = np.ix_(*([idx % M] * d))
        pos = np.arange(half)
        neg = np.arange(1, half)
        # half-spectrum bookkeeping on the last axis
        lead = [idx % M] * (d - 1)
        lead_n = [idx % N] * (d - 1)
        self.half_src_pos = np.ix_(*(lead_n + [pos]))
        self.half_dst_pos = np.ix_(*(lead + [pos]))
        self.neg_out = np.ix_(*(lead_n + [(-neg) % N]))
        self.neg_in = np.ix_(*([(-idx) % M] * (d - 1) + [neg]))
        self.scale = (M / N) ** d
        self.axes = tuple(range(-d, 0))

    def physical(self, fh: np.ndarray) -> np.ndarray:
        """Real field on the padded grid from a full ``N``-grid spectrum."""
        M, d = self.M, self.lat.d
        big = np.zeros((M,) * (d - 1) + (M // 2 + 1,), dtype=complex)
        big[self.half_dst_pos] = fh[self.half_src_pos]
        return sfft.irfftn(big, s=(M,) * d, axes=self.axes) * self.scale

    def spectrum(self, g: np.ndarray) -> np.ndarray:
        """Full ``N``-grid spectrum of a padded-grid field, truncated."""
        H = sfft.rfftn(g, axes=self.axes) / self.scale
        out = np.zeros(self.lat.shape, dtype=complex)
        out[self.half_src_pos] = H[self.half_dst_pos]
        out[self.neg_out] = np.conj(H[self.neg_in])
        return out

    def product(self, ah: np.ndarray, bh: np.ndarray) -> np.ndarray:
        return self.spectrum(self.physical(ah) * self.physical(bh))

    def advect(self, u_phys, th: np.ndarray) -> np.ndarray:
        """Spectrum of ``u . grad theta``; ``u_phys`` is the padded drift."""
        acc = 0.0
        for i in range(self.lat.d):
            acc = acc + u_phys[i] * self.physical(th * self.lat.ik[i])
        return self.spectrum(acc)


_DEALIASERS: dict = {}


def dealiaser(lat: FrequencyLattice) -> Dealiaser:
    if lat not in _DEALIASERS:
        _DEALIASERS[lat] = Dealiaser(lat)
    return _DEALIASERS[lat]
