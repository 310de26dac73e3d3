"""Dyadic frequency decomposition on the periodic torus.

The low-pass profile ``chi`` equals 1 on ``|xi| <= 3/4`` and 0 beyond
``|xi| >= 1``, joined by an ``exp(-1/t)`` smoothstep; the annulus profile is
``phi(xi) = chi(xi/2) - chi(xi)``, supported in ``3/4 <= |xi| <= 2`` and equal
to 1 at ``|xi| = 1``.  Block ``j >= 0`` multiplies by ``phi(2^-j xi)``;
block ``-1`` by ``chi``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .grid import FrequencyLattice, LatticeMismatchError, dealiaser, lp_norm


class LatticeTooSmallError(ValueError):
    pass


def _psi(t):
    t = np.asarray(t, dtype=float)
    tp = np.where(t > 0, t, 1.0)
    return np.where(t > 0, np.exp(-1.0 / tp), 0.0)


def smoothstep(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    a = _psi(t)
    b = _psi(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


CHI_INNER = 0.75
CHI_OUTER = 1.0


def chi(x):
    x = np.abs(np.asarray(x, dtype=float))
    return 1.0 - smoothstep((x - CHI_INNER) / (CHI_OUTER - CHI_INNER))


def phi(x):
    x = np.asarray(x, dtype=float)
    return chi(x / 2) - chi(x)


@dataclass(frozen=True)
class DyadicPartition:
    """Partition of unity on a lattice.

    ``J_max`` is the largest block whose support stays below ``3/4`` of the
    Nyquist frequency.  Blocks ``J_max < j <= j_top`` exist so that the sum
    over blocks reconstructs every lattice mode; they are flagged as
    contaminated.
    """

    lattice: FrequencyLattice

    @property
    def J_max(self) -> int:
        return int(math.floor(math.log2(self.lattice.nyquist * 3 / 8)))

    @property
    def j_top(self) -> int:
        kmax = float(self.lattice.kmag.max())
        # chi(2^-(j+1) xi) = 1 once 2^(j+1) * 3/4 >= kmax
        return max(self.J_max, int(math.ceil(math.log2(kmax / CHI_INNER))) - 1)

    @property
    def indices(self) -> range:
        return range(-1, self.j_top + 1)

    def contaminated(self, j: int) -> bool:
        return j > self.J_max

    @cached_property
    def multipliers(self) -> dict[int, np.ndarray]:
        km = self.lattice.kmag
        out = {-1: chi(km)}
        for j in range(0, self.j_top + 1):
            out[j] = phi(km / 2.0**j)
        return out

    def multiplier(self, j: int) -> np.ndarray:
        if j < -1 or j > self.j_top:
            return np.zeros(self.lattice.shape)
        return self.multipliers[j]

    def low_pass(self, j: int) -> np.ndarray:
        """Multiplier of ``S_j = sum_{k <= j-1} Delta_k``."""
        if j <= -1:
            return np.zeros(self.lattice.shape)
        if j > self.j_top:
            return np.ones(self.lattice.shape)
        return chi(self.lattice.kmag / 2.0**j)

    def widened(self, j: int) -> np.ndarray:
        return self.multiplier(j - 1) + self.multiplier(j) + self.multiplier(j + 1)

    def identity_residual(self) -> float:
        total = sum(self.multipliers.values())
        return float(np.max(np.abs(total - 1.0)))


def build_partition(lattice: FrequencyLattice) -> DyadicPartition:
    if lattice.nyquist < 8:
        raise LatticeTooSmallError(f"Nyquist frequency {lattice.nyquist} is below 8")
    return DyadicPartition(lattice)


def _spectral(theta, lattice):
    lattice.check(theta)
    return lattice.fft(theta)


def project_block(theta: np.ndarray, j: int, part: DyadicPartition) -> np.ndarray:
    if j < -1 or j > part.j_top:
        raise ValueError(f"block index {j} outside [-1, {part.j_top}]")
    lat = part.lattice
    return lat.ifft(_spectral(theta, lat) * part.multiplier(j))


@dataclass
class BlockDecomposition:
    """All blocks ``Delta_j theta`` of one field."""

    part: DyadicPartition
    blocks: dict[int, np.ndarray]

    def __getitem__(self, j: int) -> np.ndarray:
        return self.blocks.get(j, np.zeros(self.part.lattice.shape))

    def low(self, j: int) -> np.ndarray:
        """``S_j theta``, the sum of blocks below ``j``."""
        out = np.zeros(self.part.lattice.shape)
        for k in range(-1, j):
            out = out + self[k]
        return out

    def widened(self, j: int) -> np.ndarray:
        return self[j - 1] + self[j] + self[j + 1]

    def reconstruct(self) -> np.ndarray:
        return sum(self.blocks.values())

    def norms(self, p: float = np.inf) -> dict[int, float]:
        return {j: lp_norm(b, p) for j, b in self.blocks.items()}


def decompose(theta: np.ndarray, part: DyadicPartition) -> BlockDecomposition:
    lat = part.lattice
    th = _spectral(theta, lat)
    return BlockDecomposition(part, {j: lat.ifft(th * part.multiplier(j)) for j in part.indices})


def reconstruction_residual(theta: np.ndarray, part: DyadicPartition) -> float:
    """Relative L^2 error of ``sum_j Delta_j theta``."""
    rec = decompose(theta, part).reconstruct()
    scale = lp_norm(theta, 2)
    return lp_norm(rec - theta, 2) / scale if scale > 0 else lp_norm(rec, 2)


@dataclass
class BesovNormReport:
    s: float
    p: float
    r: float
    j: np.ndarray
    block_norms: np.ndarray  # ||Delta_j theta||_p
    weighted: np.ndarray  # 2^{js} ||Delta_j theta||_p
    contaminated: np.ndarray
    total: float

    def dominant_block(self) -> int:
        return int(self.j[np.argmax(self.weighted)])

    def to_csv(self, path, config_hash: str = "") -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j", "lp_norm", "weighted_norm", "contaminated", "config_hash"])
            for row in zip(self.j, self.block_norms, self.weighted, self.contaminated):
                w.writerow([int(row[0]), repr(float(row[1])), repr(float(row[2])),
                            int(row[3]), config_hash])


def besov_norm(theta: np.ndarray, s: float, p: float, part: DyadicPartition,
               r: float = np.inf, j_max: int | None = None) -> BesovNormReport:
    """Inhomogeneous ``B^s_{p,r}`` norm from grid block norms.

    ``j_max`` restricts the aggregation (default: every block, with the
    blocks above ``part.J_max`` flagged).
    """
    top = part.j_top if j_max is None else min(j_max, part.j_top)
    dec = decompose(theta, part)
    js = np.arange(-1, top + 1)
    bn = np.array([lp_norm(dec[j], p) for j in js])
    wt = 2.0 ** (js * s) * bn
    if math.isinf(r):
        total = float(wt.max())
    else:
        total = float(np.sum(wt**r) ** (1.0 / r))
    return BesovNormReport(
        s=s, p=p, r=r, j=js, block_norms=bn, weighted=wt,
        contaminated=js > part.J_max, total=total,
    )


def holder_seminorm(theta: np.ndarray, delta: float, lattice: FrequencyLattice) -> float:
    """Grid Hölder seminorm over dyadic shifts ``h = dx * 2^m`` along each axis.

    A leading component axis (vector fields) is allowed; the maximum over
    components is returned.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    comps = theta.reshape((-1,) + lattice.shape)
    best = 0.0
    m = 0
    while 2**m <= lattice.N // 2:
        h = lattice.dx * 2**m
        for ax in range(1, lattice.d + 1):
            diff = np.abs(np.roll(comps, -(2**m), axis=ax) - comps)
            best = max(best, float(diff.max()) / h**delta)
        m += 1
    return best


def _grad_components(fh, lattice, k):
    """All k-th order partial derivatives (as grid fields) of a spectrum."""
    if lattice.d == 1:
        return [lattice.ifft(fh * lattice.ik[0] ** k)]
    return [lattice.ifft(fh * lattice.ik[0] ** a * lattice.ik[1] ** (k - a)) for a in range(k + 1)]


@dataclass
class BernsteinRatios:
    upper: float | None  # ||grad^k Delta_j||_b / (2^{j(k+d/a-d/b)} ||Delta_j||_a)
    two_sided: float | None  # ||grad^k Delta_j||_a / (2^{jk} ||Delta_j||_a)


def bernstein_check(theta: np.ndarray, j: int, k: int, a: float, b: float,
                    part: DyadicPartition) -> BernsteinRatios:
    if a > b:
        raise ValueError("need a <= b")
    if j > part.J_max:
        raise ValueError("block above J_max")
    lat = part.lattice
    fh = _spectral(theta, lat) * part.multiplier(j)
    block = lat.ifft(fh)
    base = lp_norm(block, a)
    if base <= 1e-14 * max(lp_norm(theta, a), 1e-300):
        return BernsteinRatios(None, None)
    grads = _grad_components(fh, lat, k)
    d = lat.d
    top_b = max(lp_norm(g, b) for g in grads)
    top_a = max(lp_norm(g, a) for g in grads)
    inv = lambda q: 0.0 if math.isinf(q) else 1.0 / q
    upper = top_b / (2.0 ** (j * (k + d * inv(a) - d * inv(b))) * base)
    return BernsteinRatios(upper, top_a / (2.0 ** (j * k) * base))


# --------------------------------------------------------------------------
# Bony decomposition


def _dealiased_product(ah, bh, lattice):
    """Spectrum of ``a * b`` computed on a 3/2 zero-padded grid."""
    return dealiaser(lattice).product(ah, bh)


def _as_vector(u, lattice):
    u = np.asarray(u, dtype=float)
    if u.shape == lattice.shape and lattice.d == 1:
        u = u[None]
    if u.shape != (lattice.d,) + lattice.shape:
        raise LatticeMismatchError(f"drift shape {u.shape} does not match grid {lattice.shape}")
    return u


def advect(uh, th, lattice):
    """Dealiased spectrum of ``u . grad theta`` from spectra."""
    D = dealiaser(lattice)
    return D.advect([D.physical(c) for c in uh], th)


@dataclass
class BonyTerms:
    I1: np.ndarray
    I2: np.ndarray
    I3: np.ndarray
    commutator: np.ndarray
    residual: float
    i2_tail: np.ndarray  # part of I2 from blocks k >= j+5


def bony_commutator_decomposition(u, theta, j: int, part: DyadicPartition) -> BonyTerms:
    """Split ``u.grad Delta_j theta - Delta_j(u.grad theta)`` into I1 + I2 + I3.

    I1 pairs low-frequency drift with block ``k`` of ``theta`` (|k-j| <= 4),
    I2 pairs block ``k`` of the drift with lower ``theta`` frequencies, and
    I3 pairs comparable frequencies.  I2 includes the terms
    ``Delta_k u . grad Delta_j S_{k-1} theta`` for every ``k >= j+5`` (also
    returned separately as ``i2_tail``) so the identity is exact.
    """
    lat = part.lattice
    u = _as_vector(u, lat)
    lat.check(theta)
    nyq = lat.nyquist_mask
    th = np.where(nyq, 0.0, lat.fft(theta))
    uh = np.array([np.where(nyq, 0.0, lat.fft(c)) for c in u])
    D = part.multiplier
    S = part.low_pass

    def comm(a_mult, b_mult):
        """[Delta_j, (a_mult u).grad](b_mult theta) in spectral form."""
        a = uh * a_mult
        b = th * b_mult
        return D(j) * advect(a, b, lat) - advect(a, b * D(j), lat)

    zero = np.zeros(th.shape, dtype=complex)
    I1 = zero.copy()
    for k in range(max(-1, j - 4), j + 5):
        I1 -= comm(S(k - 1), D(k))
    I2 = zero.copy()
    tail = zero.copy()
    for k in range(-1, part.j_top + 1):
        if abs(k - j) <= 4:
            I2 -= comm(D(k), S(k - 1))
        else:
            # Delta_j(Delta_k u . grad S_{k-1} theta) vanishes by support
            term = advect(uh * D(k), th * S(k - 1) * D(j), lat)
            I2 += term
            tail += term
    I3 = zero.copy()
    for k in range(max(-1, j - 2), part.j_top + 1):
        I3 -= comm(D(k), part.widened(k))
    commutator = advect(uh, th * D(j), lat) - D(j) * advect(uh, th, lat)

    parts = [lat.ifft(x) for x in (I1, I2, I3, commutator, tail)]
    lhs = parts[3]
    rhs = parts[0] + parts[1] + parts[2]
    scale = max(np.abs(lhs).max(), np.abs(parts[0]).max(), np.abs(parts[1]).max(),
                np.abs(parts[2]).max(), 1e-300)
    return BonyTerms(
        I1=parts[0], I2=parts[1], I3=parts[2], commutator=lhs,
        residual=float(np.abs(lhs - rhs).max() / scale), i2_tail=parts[4],
    )


@dataclass
class CommutatorConstants:
    """Smallest constants making the three block bounds hold for one pair."""

    C1: float
    C2: float
    C3: float
    u_seminorm: float


def commutator_constants(u, theta, j: int, delta: float, part: DyadicPartition) -> CommutatorConstants:
    lat = part.lattice
    u = _as_vector(u, lat)
    terms = bony_commutator_decomposition(u, theta, j, part)
    unorm = holder_seminorm(u, delta, lat)
    dec = decompose(theta, part)
    bn = {k: lp_norm(dec[k], np.inf) for k in part.indices}
    r1 = 2.0 ** (-j * delta) * unorm * sum(2.0**k * bn.get(k, 0.0) for k in range(j - 4, j + 5))
    r2 = 2.0 ** (-j * delta) * unorm * sum(2.0**k * bn[k] for k in part.indices if k <= j + 4)
    r3 = unorm * sum(2.0 ** (k * (1 - delta)) * bn[k] for k in part.indices if k >= j - 3)

    def ratio(lhs, rhs):
        top = lp_norm(lhs, np.inf)
        if top <= 1e-13 * max(lp_norm(theta, np.inf), 1e-300) * max(lp_norm(u, np.inf), 1e-300):
            return 0.0
        return top / rhs if rhs > 0 else math.inf

    return CommutatorConstants(
        ratio(terms.I1, r1), ratio(terms.I2, r2), ratio(terms.I3, r3), unorm
    )


def write_partition_profile(path, n: int = 512, x_max: float = 3.0) -> None:
    x = np.linspace(0.0, x_max, n)
    np.savetxt(path, np.column_stack([x, chi(x), phi(x)]), header="xi chi phi")
