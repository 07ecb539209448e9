"""Scalar fields on the torus, Sobolev norms, and the transfer operator.

Grid convention: ``values[i, j] = f(2 pi i / N, 2 pi j / N)``; axis 0 carries
the first wavenumber component.  Fourier coefficients are normalised so that
``f = sum_k fhat(k) e^{i k.x}``, i.e. ``fhat = fft2(values) / N**2``, and all
norms use the averaged measure ``(2 pi)^-2 dx`` so that ``||1||_{L^2} = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterator

import numpy as np

from .torus_maps import TWO_PI, MapSequence, shear_inverse

NUFFT_EPS = 1e-14


@lru_cache(maxsize=32)
def wavenumbers(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer wavenumber grids ``(k1, k2)`` in FFT order (read-only)."""
    k = np.fft.fftfreq(N, 1.0 / N)
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    K1.setflags(write=False)
    K2.setflags(write=False)
    return K1, K2


@lru_cache(maxsize=64)
def _sobolev_weights(N: int, s: float) -> np.ndarray:
    K1, K2 = wavenumbers(N)
    w = (1.0 + K1 * K1 + K2 * K2) ** s
    w.setflags(write=False)
    return w


@lru_cache(maxsize=32)
def grid_points(N: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(N) * (TWO_PI / N)
    X, Y = np.meshgrid(t, t, indexing="ij")
    X.setflags(write=False)
    Y.setflags(write=False)
    return X, Y


@dataclass(frozen=True, eq=False)
class ScalarField:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("values must be a square 2-D array")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @cached_property
    def coeffs(self) -> np.ndarray:
        c = np.fft.fft2(self.values) / self.N ** 2
        c.setflags(write=False)
        return c

    @classmethod
    def from_coeffs(cls, coeffs: np.ndarray) -> "ScalarField":
        N = coeffs.shape[0]
        return cls(np.real(np.fft.ifft2(coeffs) * N * N))

    @classmethod
    def from_function(cls, func, N: int) -> "ScalarField":
        X, Y = grid_points(N)
        return cls(func(X, Y))

    def coefficient(self, k) -> complex:
        """``fhat(k)`` for ``|k1|, |k2| <= N/2 - 1``."""
        k1, k2 = int(k[0]), int(k[1])
        h = self.N // 2
        if abs(k1) > h - 1 or abs(k2) > h - 1:
            raise IndexError(f"wavevector {k} outside the represented band")
        return complex(self.coeffs[k1 % self.N, k2 % self.N])

    def subsample(self, factor: int = 2) -> "ScalarField":
        return ScalarField(self.values[::factor, ::factor])

    def l2_norm(self) -> float:
        return float(np.sqrt(np.mean(self.values ** 2)))

    def mean(self) -> float:
        return float(np.mean(self.values))


@dataclass(frozen=True)
class SparseInitialData:
    """Trigonometric polynomial ``sum a_k e^{i k.x}`` with finitely many modes.

    Modes are stored as one representative per conjugate pair; the partner
    ``(-k, conj a_k)`` is implied.  ``k = (0, 0)`` must carry a real amplitude.
    """

    ks: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    amps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.complex128))

    def __post_init__(self):
        ks = np.asarray(self.ks, dtype=np.int64).reshape(-1, 2)
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(-1)
        if len(ks) != len(amps):
            raise ValueError("ks and amps must have equal length")
        merged: dict[tuple[int, int], complex] = {}
        for (k1, k2), a in zip(ks.tolist(), amps.tolist()):
            key = (k1, k2)
            if (k1, k2) < (0, 0) or (k1 == 0 and k2 < 0):
                key, a = (-k1, -k2), np.conj(a)
            if key == (0, 0) and abs(np.imag(a)) > 1e-14 * max(1.0, abs(a)):
                raise ValueError("the k = 0 amplitude must be real")
            merged[key] = merged.get(key, 0.0) + a
        keys = sorted(merged)
        object.__setattr__(self, "ks", np.array(keys, dtype=np.int64).reshape(-1, 2))
        object.__setattr__(self, "amps", np.array([merged[k] for k in keys], dtype=np.complex128))

    @classmethod
    def from_modes(cls, modes) -> "SparseInitialData":
        """From ``[(k, amplitude), ...]`` where each entry already includes its
        conjugate partner (duplicates of a pair are merged, not doubled)."""
        seen: dict[tuple[int, int], complex] = {}
        for k, a in modes:
            k1, k2 = int(k[0]), int(k[1])
            if (-k1, -k2) in seen and (k1, k2) != (0, 0):
                if abs(seen[(-k1, -k2)] - np.conj(a)) > 1e-12 * max(1.0, abs(a)):
                    raise ValueError(f"amplitudes at {k} and its negative are not conjugate")
                continue
            seen[(k1, k2)] = complex(a)
        if not seen:
            return cls()
        ks = np.array(list(seen), dtype=np.int64)
        return cls(ks, np.array(list(seen.values())))

    @classmethod
    def cosine(cls, k, amplitude: float = 1.0) -> "SparseInitialData":
        """``amplitude * cos(k.x)``."""
        return cls(np.array([k]), np.array([amplitude / 2.0]))

    @classmethod
    def random(cls, rng: np.random.Generator, n_modes: int, kmax: int, kmin: int = 1,
               slope: float = 0.0) -> "SparseInitialData":
        """Mean-zero data with ``n_modes`` distinct random pairs in ``kmin <= |k|_inf <= kmax``
        and complex Gaussian amplitudes scaled by ``|k|^-slope``."""
        cand = [(a, b) for a in range(0, kmax + 1) for b in range(-kmax, kmax + 1)
                if (a > 0 or b > 0) and kmin <= max(abs(a), abs(b)) <= kmax]
        n_modes = min(n_modes, len(cand))
        idx = rng.choice(len(cand), size=n_modes, replace=False)
        ks = np.array([cand[i] for i in np.sort(idx)], dtype=np.int64)
        amps = (rng.standard_normal(n_modes) + 1j * rng.standard_normal(n_modes)) / 2.0
        amps *= np.hypot(ks[:, 0], ks[:, 1]) ** (-slope)
        return cls(ks, amps)

    def __len__(self) -> int:
        return len(self.ks)

    @property
    def is_mean_zero(self) -> bool:
        return not any((k == 0).all() and a != 0 for k, a in zip(self.ks, self.amps))

    def without_mean(self) -> "SparseInitialData":
        keep = ~np.all(self.ks == 0, axis=1)
        return SparseInitialData(self.ks[keep], self.amps[keep])

    def scaled(self, c: float) -> "SparseInitialData":
        return SparseInitialData(self.ks, self.amps * c)

    def _weights(self) -> np.ndarray:
        # each stored pair counts twice, except k = 0
        return np.where(np.all(self.ks == 0, axis=1), 1.0, 2.0)

    def sobolev_norm(self, s: float) -> float:
        k2 = np.sum(self.ks.astype(float) ** 2, axis=1)
        return float(np.sqrt(np.sum(self._weights() * (1.0 + k2) ** s * np.abs(self.amps) ** 2)))

    def max_wavenumber(self) -> int:
        return int(np.max(np.abs(self.ks))) if len(self.ks) else 0

    def __call__(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        out = np.zeros(np.broadcast(x, y).shape)
        for (k1, k2), a, w in zip(self.ks, self.amps, self._weights()):
            if k1 == 0 and k2 == 0:
                out += a.real
                continue
            phase = k1 * x + k2 * y
            out += w * (a.real * np.cos(phase) - a.imag * np.sin(phase))
        return out

    def to_field(self, N: int) -> ScalarField:
        return ScalarField.from_function(self, N)


def synthesize(data: SparseInitialData, p) -> np.ndarray | float:
    val = data(p[0], p[1])
    return float(val) if np.ndim(val) == 0 else val


def pullback(data: SparseInitialData, seq: MapSequence, N: int) -> ScalarField:
    """Grid samples of ``f_n = f_0 o (phi^n)^-1`` using exact inverse maps."""
    X, Y = grid_points(N)
    x, y = seq.inverse(X, Y)
    return ScalarField(data(x, y))


def iter_pullback(data: SparseInitialData, params: np.ndarray, N: int, path: str = "forward") -> Iterator[ScalarField]:
    """Yield the pulled-back fields for n = 0 .. len(params).

    ``path="forward"`` gives ``f_0 o (phi_{n-1} o ... o phi_0)^-1`` exactly as
    :func:`pullback` (quadratic cost in n).  ``path="reversed"`` composes the
    inverses incrementally, i.e. the n-th field is the pullback under the
    reversed prefix ``params[n-1], ..., params[0]``; for i.i.d. steps each
    marginal has the same law as the forward one.
    """
    X, Y = grid_points(N)
    params = np.asarray(params).reshape(-1, 4)
    yield ScalarField(data(X, Y))
    if path == "reversed":
        x, y = X, Y
        for A, Ap, g, gp in params:
            x, y = shear_inverse(A, Ap, g, gp, x, y, reduce=False)
            yield ScalarField(data(x, y))
    elif path == "forward":
        for n in range(1, len(params) + 1):
            x, y = X, Y
            for A, Ap, g, gp in params[n - 1::-1]:
                x, y = shear_inverse(A, Ap, g, gp, x, y, reduce=False)
            yield ScalarField(data(x, y))
    else:
        raise ValueError(f"unknown path {path!r}")


def sobolev_norm_sq(f: ScalarField, s: float) -> float:
    """``sum_k (1+|k|^2)^s |fhat(k)|^2`` over every grid mode (Nyquist included)."""
    c = f.coeffs
    return float(np.sum(_sobolev_weights(f.N, float(s)) * (c.real ** 2 + c.imag ** 2)))


def sobolev_norm(f: ScalarField, s: float) -> float:
    return float(np.sqrt(sobolev_norm_sq(f, s)))


def relative_deviation(fine: float, coarse: float) -> float:
    if fine == 0.0:
        return 0.0 if coarse == 0.0 else float("inf")
    return abs(fine - coarse) / fine


def resolution_check(data: SparseInitialData, seq: MapSequence, s: float, N: int) -> float:
    """Relative change of ``sobolev_norm(pullback(.), s)`` between grids N and 2N.

    The N grid is the even-index subset of the 2N grid, so one pullback serves both.
    """
    fine = pullback(data, seq, 2 * N)
    return relative_deviation(sobolev_norm(fine, s), sobolev_norm(fine.subsample(2), s))


# -- Bessel-potential kernels -------------------------------------------------

class KernelTable:
    """``G_s(z) = sum_{|k|_inf <= K} (1+|k|^2)^-s e^{i k.z}`` and its mean-free part.

    ``G_s(x - y)`` is the integral kernel of the squared ``H^{-s}`` norm, so
    ``(2 pi)^-4 iint G_s(x - y) f(x) f(y) = ||f||^2_{H^-s}`` for fields band-limited to K.
    Evaluation at arbitrary points goes through a type-2 non-uniform FFT.
    """

    def __init__(self, s: float, K: int, mean_free: bool = False):
        if s <= 1.0:
            raise ValueError("kernel_table needs s > 1 for absolute summability in two dimensions")
        self.s = float(s)
        self.K = int(K)
        self.mean_free = mean_free
        k = np.arange(-self.K, self.K + 1)
        K1, K2 = np.meshgrid(k, k, indexing="ij")
        w = (1.0 + K1 * K1 + K2 * K2) ** (-self.s)
        if mean_free:
            w[self.K, self.K] = 0.0
        self.weights = w

    @property
    def mean(self) -> float:
        """Spatial mean of the kernel (its k = 0 coefficient)."""
        return float(self.weights[self.K, self.K])

    def mean_removed(self) -> "KernelTable":
        return KernelTable(self.s, self.K, mean_free=True)

    def __call__(self, z1, z2) -> np.ndarray:
        import finufft

        z1 = np.asarray(z1, dtype=np.float64)
        z2 = np.asarray(z2, dtype=np.float64)
        shape = np.broadcast(z1, z2).shape
        a = np.ascontiguousarray(np.mod(np.broadcast_to(z1, shape).ravel(), TWO_PI))
        b = np.ascontiguousarray(np.mod(np.broadcast_to(z2, shape).ravel(), TWO_PI))
        if a.size == 0:
            return np.zeros(shape)
        out = finufft.nufft2d2(a, b, self.weights.astype(np.complex128), isign=1, eps=NUFFT_EPS)
        return out.real.reshape(shape)

    def direct(self, z1, z2) -> np.ndarray:
        """Plain summation; reference for small K."""
        k = np.arange(-self.K, self.K + 1)
        z1 = np.asarray(z1, dtype=np.float64)[..., None, None]
        z2 = np.asarray(z2, dtype=np.float64)[..., None, None]
        return np.sum(self.weights * np.cos(k[:, None] * z1 + k[None, :] * z2), axis=(-1, -2))


def kernel_table(s: float, K: int) -> KernelTable:
    return KernelTable(s, K)


def neg_norm_kernel_mc(data: SparseInitialData, seq: MapSequence, s: float, pairs: int,
                       rng: np.random.Generator, K: int = 64) -> tuple[float, float]:
    """Monte-Carlo estimate of ``||f_n||^2_{H^-s}`` from the two-point kernel identity.

    Uses the mean-free kernel, which leaves the value unchanged for mean-zero data
    and removes the constant part of the integrand's variance.
    """
    if not len(data):
        return 0.0, 0.0
    kern = KernelTable(s, K, mean_free=True)
    u = rng.random((4, pairs)) * TWO_PI
    fx = data(u[0], u[1])
    fy = data(u[2], u[3])
    x1, y1 = seq.forward(u[0], u[1])
    x2, y2 = seq.forward(u[2], u[3])
    vals = kern(x1 - x2, y1 - y2) * fx * fy
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / np.sqrt(pairs))
