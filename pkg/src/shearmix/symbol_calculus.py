"""Mollified dyadic symbols, torus quantization, and Garding/Egorov primitives.

The symbol is

    a(x, xi) = sum_{N >= 2} chi_N(|xi|) psi^{h_N}(x, xi/|xi|) |xi|^-p,   h_N = N^-eps,

built from a :class:`~shearmix.cocycle_stats.PsiGrid`.  Quantization is the
global Kohn-Nirenberg rule on the flat torus,
``Op(a) f(x) = sum_k a(x, k) fhat(k) e^{i k.x}``.

Each mollified grid is turned into a smooth function by trigonometric
interpolation in all three variables and stored as a rank-truncated sum
``sum_r u_r(x) v_r(theta)``.  Point evaluation, quantization and the Egorov
main term all use this same representation, so they agree exactly.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.ndimage import convolve1d

from .cocycle_stats import PsiGrid
from .spectral_fields import NUFFT_EPS, ScalarField, SparseInitialData, grid_points, wavenumbers
from .torus_maps import TWO_PI


# -- dyadic partition ----------------------------------------------------------

def smoothstep5(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)


def cutoff(z):
    """``eta``: 1 on [0, 1], 0 on [2, inf), quintic smoothstep in between."""
    return 1.0 - smoothstep5(np.asarray(z, dtype=np.float64) - 1.0)


@dataclass(frozen=True)
class DyadicPartition:
    """``chi_1 = eta`` and ``chi_N(z) = eta(z/N) - eta(2z/N)`` for N = 2, 4, .., N_max.

    The sum telescopes to ``eta(z/N_max)``, which is 1 on ``[0, N_max]``.
    """

    N_max: int

    def __post_init__(self):
        n = int(self.N_max)
        if n < 4 or n & (n - 1):
            raise ValueError("N_max must be a power of two >= 4")

    @property
    def shells(self) -> list[int]:
        return [2 ** j for j in range(1, int(np.log2(self.N_max)) + 1)]

    def chi(self, N: int, z):
        z = np.asarray(z, dtype=np.float64)
        if N == 1:
            return cutoff(z)
        return cutoff(z / N) - cutoff(2.0 * z / N)

    def __call__(self, z) -> dict[int, np.ndarray]:
        return {N: self.chi(N, z) for N in [1] + self.shells}

    def total(self, z):
        return sum(self(z).values())


def build_partition(N_max: int) -> DyadicPartition:
    return DyadicPartition(int(N_max))


# -- mollification -------------------------------------------------------------

def bump_weights(h: float, spacing: float) -> np.ndarray | None:
    """Discrete weights of ``(1 - (s/h)^2)^3`` on the lattice ``spacing * Z``, unit sum.
    ``None`` when the support holds only the centre node."""
    r = int(np.floor(h / spacing))
    if r < 1:
        return None
    s = np.arange(-r, r + 1) * spacing / h
    w = np.clip(1.0 - s * s, 0.0, None) ** 3
    return w / w.sum()


@dataclass
class MollifiedGrid:
    values: np.ndarray
    h: float
    unsmoothed_axes: tuple = ()

    @property
    def below_resolution(self) -> bool:
        return len(self.unsmoothed_axes) == 3


def mollify(psi: PsiGrid | np.ndarray, h: float) -> MollifiedGrid:
    """Periodic convolution with a separable polynomial bump of radius ``h`` in (x, y, theta).

    Every output value is a convex combination of input values.  An axis whose
    spacing exceeds ``h`` is left untouched and listed in ``unsmoothed_axes``;
    if that happens on all three axes the input is returned unchanged.
    """
    if not 0.0 < h <= 1.0:
        raise ValueError("h must lie in (0, 1]")
    vals = psi.values if isinstance(psi, PsiGrid) else np.asarray(psi, dtype=np.float64)
    out = np.array(vals, dtype=np.float64, copy=True)
    skipped = []
    for axis in range(3):
        w = bump_weights(h, TWO_PI / vals.shape[axis])
        if w is None:
            skipped.append(axis)
            continue
        out = convolve1d(out, w, axis=axis, mode="wrap")
    return MollifiedGrid(out, float(h), tuple(skipped))


# -- trigonometric interpolation helpers ----------------------------------------

def real_trig_coeffs(values: np.ndarray) -> np.ndarray:
    """Centred Fourier coefficients of the real trigonometric interpolant.

    Even axes get one extra slot: the Nyquist coefficient is split evenly
    between +n/2 and -n/2, so the interpolant is real everywhere and still
    matches every grid value.
    """
    c = np.fft.fftshift(np.fft.fftn(values)) / values.size
    for axis, n in enumerate(values.shape):
        if n % 2 == 0:
            nyq = np.take(c, [0], axis=axis) / 2.0
            c = np.concatenate([nyq, np.delete(c, 0, axis=axis), nyq], axis=axis)
    return c


def _fft_order_embed(c: np.ndarray, N: int) -> np.ndarray:
    """Place a centred odd-size 2-D coefficient array into an N x N FFT-ordered array."""
    n = c.shape[0]
    half = n // 2
    if half >= N // 2:
        raise ValueError("field grid too coarse for the symbol's spatial band")
    out = np.zeros((N, N), dtype=np.complex128)
    idx = np.arange(-half, half + 1) % N
    out[np.ix_(idx, idx)] = c
    return out


@dataclass
class ShellTerm:
    """``u_r(x) v_r(theta)`` terms for one dyadic shell."""

    N: int
    h: float
    ucoef: np.ndarray   # (r, nx+1, nx+1) centred spatial coefficients
    vcoef: np.ndarray   # (r, nt+1) centred angular coefficients
    mollified: MollifiedGrid

    @property
    def rank(self) -> int:
        return self.ucoef.shape[0]

    def u_at(self, x, y) -> np.ndarray:
        """``(r, P)`` spatial factors at points."""
        import finufft

        x = np.ascontiguousarray(np.mod(np.ravel(x), TWO_PI))
        y = np.ascontiguousarray(np.mod(np.ravel(y), TWO_PI))
        if self.rank == 0:
            return np.zeros((0, x.size))
        out = finufft.nufft2d2(x, y, np.ascontiguousarray(self.ucoef), isign=1, eps=NUFFT_EPS)
        return np.atleast_2d(out).real

    def u_grid(self, N: int) -> np.ndarray:
        """``(r, N, N)`` spatial factors on the field grid (zero-padded inverse FFT)."""
        return np.stack([np.fft.ifft2(_fft_order_embed(c, N)).real * N * N for c in self.ucoef]) \
            if self.rank else np.zeros((0, N, N))

    def v_at(self, theta) -> np.ndarray:
        """``(P, r)`` angular factors."""
        half = self.vcoef.shape[1] // 2
        m = np.arange(-half, half + 1)
        theta = np.ravel(theta)
        out = np.empty((theta.size, self.rank))
        for lo in range(0, theta.size, 65536):
            E = np.exp(1j * np.outer(theta[lo:lo + 65536], m))
            out[lo:lo + 65536] = (E @ self.vcoef.T).real
        return out


@dataclass
class SymbolModel:
    p: float
    eps: float
    psi: PsiGrid
    partition: DyadicPartition
    terms: list = field(default_factory=list)
    rank_tol: float = 1e-3
    _grid_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def bank(self) -> dict[int, MollifiedGrid]:
        return {t.N: t.mollified for t in self.terms}

    def __call__(self, x, y, k1, k2) -> np.ndarray:
        return symbol_eval(self, (x, y), (k1, k2))

    def radial(self, knorm):
        """Per-shell radial factors ``chi_N(|k|) |k|^-p`` with the value 0 at k = 0."""
        knorm = np.asarray(knorm, dtype=np.float64)
        with np.errstate(divide="ignore"):
            powk = np.where(knorm > 0, knorm, 1.0) ** (-self.p)
        return {t.N: self.partition.chi(t.N, knorm) * powk for t in self.terms}


def build_symbol(psi: PsiGrid, p: float | None = None, eps: float = 0.2, N_max: int = 256,
                 rank_tol: float = 1e-3) -> SymbolModel:
    """Mollified bank ``psi^{h_N}``, ``h_N = N^-eps``, for shells N = 2 .. N_max.

    ``psi`` is first averaged with its antipodal copy (``theta + pi``), a symmetry
    of the exact eigenfunction, so the symbol is even in ``xi``.
    """
    p = psi.p if p is None else float(p)
    if not 0.0 < eps < 0.25:
        raise ValueError("eps must lie in (0, 1/4)")
    if psi.ntheta % 2:
        raise ValueError("ntheta must be even")
    part = build_partition(N_max)
    vals = psi.values
    sym = 0.5 * (vals + np.roll(vals, psi.ntheta // 2, axis=2))
    nx, nt = psi.nx, psi.ntheta
    terms = []
    for N in part.shells:
        h = float(N) ** (-eps)
        mg = mollify(sym, h)
        U, S, Vt = np.linalg.svd(mg.values.reshape(nx * nx, nt), full_matrices=False)
        r = int(np.sum(S > rank_tol * S[0])) if S[0] > 0 else 0
        ucoef = np.stack([real_trig_coeffs((U[:, j] * S[j]).reshape(nx, nx)) for j in range(r)]) \
            if r else np.zeros((0, nx + 1, nx + 1))
        vcoef = np.stack([real_trig_coeffs(Vt[j]) for j in range(r)]) if r else np.zeros((0, nt + 1))
        terms.append(ShellTerm(N, h, ucoef.astype(np.complex128), vcoef.astype(np.complex128), mg))
    return SymbolModel(p, float(eps), psi, part, terms, rank_tol)


def symbol_eval(S: SymbolModel, x, k) -> np.ndarray | float:
    """``a(x, k)`` at broadcastable points ``x = (x, y)`` and wavevectors ``k = (k1, k2)``."""
    xx, yy, k1, k2 = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in (x[0], x[1], k[0], k[1])))
    shape = xx.shape
    k1, k2 = k1.ravel(), k2.ravel()
    knorm = np.hypot(k1, k2)
    theta = np.arctan2(k2, k1)
    out = np.zeros(knorm.size)
    radial = S.radial(knorm)
    for t in S.terms:
        rad = radial[t.N]
        live = rad != 0
        if not np.any(live) or t.rank == 0:
            continue
        u = t.u_at(xx.ravel()[live], yy.ravel()[live])
        v = t.v_at(theta[live])
        out[live] += rad[live] * np.einsum("rp,pr->p", u, v)
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


# -- symbols as callables --------------------------------------------------------

class Multiplier:
    """x-independent symbol ``a(k)``; quantizes to an exact Fourier multiplier."""

    def __init__(self, func: Callable):
        self.func = func

    def __call__(self, x, y, k1, k2):
        k1, k2 = np.broadcast_arrays(np.asarray(k1, dtype=np.float64), np.asarray(k2, dtype=np.float64))
        val = self.func(k1, k2)
        return np.broadcast_to(val, np.broadcast(np.asarray(x), np.asarray(y), k1).shape)


def bessel_multiplier(s: float) -> Multiplier:
    """``(1 + |k|^2)^{s/2}``."""
    return Multiplier(lambda k1, k2: (1.0 + k1 * k1 + k2 * k2) ** (0.5 * s))


# -- quantization ----------------------------------------------------------------

def _as_field(f) -> ScalarField:
    return f if isinstance(f, ScalarField) else ScalarField(f)


def quantize_apply_complex(a, f: ScalarField, coeff_floor: float = 1e-13) -> np.ndarray:
    """Grid values of ``Op(a) f`` before discarding the imaginary part.

    Only the represented band ``|k1|, |k2| <= N/2 - 1`` is quantized.
    """
    f = _as_field(f)
    N = f.N
    fh = f.coeffs
    K1, K2 = wavenumbers(N)
    if isinstance(a, Multiplier):
        return np.fft.ifft2(np.where(_band_mask(N), a.func(K1, K2), 0.0) * fh) * N * N
    if isinstance(a, SymbolModel):
        return _quantize_model(a, fh, N)
    # general symbol: per-mode synthesis over the support of fhat
    X, Y = grid_points(N)
    mag = np.abs(fh) * _band_mask(N)
    out = np.zeros((N, N), dtype=np.complex128)
    if mag.max() == 0:
        return out
    for i, j in zip(*np.nonzero(mag > coeff_floor * mag.max())):
        k1, k2 = K1[i, j], K2[i, j]
        out += a(X, Y, k1, k2) * fh[i, j] * np.exp(1j * (k1 * X + k2 * Y))
    return out


def _band_mask(N: int) -> np.ndarray:
    """Modes with ``|k1|, |k2| <= N/2 - 1``; the unpaired Nyquist modes are dropped."""
    K1, K2 = wavenumbers(N)
    return (np.abs(K1) < N // 2) & (np.abs(K2) < N // 2)


def _model_factors(S: SymbolModel, N: int):
    """Per-shell ``(live mask, radial weights, v_r(theta_k), u_r(x))`` on an N grid, cached."""
    if N not in S._grid_cache:
        K1, K2 = wavenumbers(N)
        knorm = np.hypot(K1, K2)
        theta = np.arctan2(K2, K1)
        radial = S.radial(knorm)
        band = _band_mask(N)
        parts = []
        for t in S.terms:
            live = (radial[t.N] != 0) & band
            if not np.any(live) or t.rank == 0:
                continue
            parts.append((live, radial[t.N][live], t.v_at(theta[live]), t.u_grid(N)))
        S._grid_cache[N] = parts
    return S._grid_cache[N]


def _quantize_model(S: SymbolModel, fh: np.ndarray, N: int) -> np.ndarray:
    out = np.zeros((N, N), dtype=np.complex128)
    spec = np.zeros((N, N), dtype=np.complex128)
    for live, rad, v, u in _model_factors(S, N):
        base = rad * fh[live]
        for r in range(v.shape[1]):
            spec[live] = base * v[:, r]
            out += u[r] * np.fft.ifft2(spec)
        spec[live] = 0.0
    return out * (N * N)


def quantize_apply(a, f: ScalarField) -> ScalarField:
    """``Op(a) f`` on the grid of ``f`` (real part)."""
    return ScalarField(quantize_apply_complex(a, f).real)


def quadratic_form(a, f: ScalarField, imag_tol: float = 1e-10) -> float:
    """``<Op(a) f, f>`` with the averaged measure ``(2 pi)^-2 dx``."""
    f = _as_field(f)
    q = np.mean(quantize_apply_complex(a, f) * f.values)
    scale = max(abs(q.real), float(np.mean(f.values ** 2)), 1e-300)
    if abs(q.imag) > imag_tol * scale:
        warnings.warn(f"quadratic form has imaginary part {q.imag:.3e}", RuntimeWarning, stacklevel=2)
    return float(q.real)


# -- seminorms -------------------------------------------------------------------

def _fd_weights(order: int) -> np.ndarray:
    return {0: np.array([0.0, 1.0, 0.0]), 1: np.array([-0.5, 0.0, 0.5]), 2: np.array([1.0, -2.0, 1.0])}[order]


def _multi_indices(k: int):
    return [(i, j) for i in range(k + 1) for j in range(k + 1 - i)]


def seminorm_estimate(a, k_order: int, m: float, rho: float, n_x: int = 64, n_xi: int = 64,
                      rng: np.random.Generator | None = None, dx: float = TWO_PI / 128,
                      dxi: float = 0.5, xi_max: float = 128.0, xi_min: float = 0.5) -> float:
    """Sampled ``max_{|alpha|,|beta| <= k} sup |d_x^alpha d_xi^beta a| <xi>^{-m + rho|beta| - (1-rho)|alpha|}``.

    Derivatives are tensor central differences.  ``n_x`` random base points are
    crossed with ``n_xi`` frequencies whose radii form a geometric grid on
    ``[xi_min, xi_max]`` (random angles), so the sup over radii refines
    monotonically as ``n_xi`` grows.
    """
    if not 0 <= k_order <= 2:
        raise ValueError("k_order must lie in 0..2")
    rng = np.random.default_rng(0) if rng is None else rng
    xs = rng.random((n_x, 2)) * TWO_PI
    rad = np.geomspace(xi_min, xi_max, n_xi)
    ang = rng.random(n_xi) * TWO_PI
    xi = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
    X = np.repeat(xs, n_xi, axis=0)
    XI = np.tile(xi, (n_x, 1))
    offs = np.array([-1, 0, 1])
    # evaluate a on the full 3^4 stencil once
    grid = np.stack(np.meshgrid(offs, offs, offs, offs, indexing="ij"), -1).reshape(-1, 4)
    vals = np.empty((len(grid), len(X)))
    for q, (o1, o2, o3, o4) in enumerate(grid):
        vals[q] = np.asarray(a(X[:, 0] + o1 * dx, X[:, 1] + o2 * dx, XI[:, 0] + o3 * dxi, XI[:, 1] + o4 * dxi)).ravel()
    vals = vals.reshape(3, 3, 3, 3, len(X))
    weight_base = 1.0 + np.sum(XI * XI, axis=1)
    best = 0.0
    for al in _multi_indices(k_order):
        for be in _multi_indices(k_order):
            d = vals
            for axis, (order, step) in enumerate(zip(al + be, (dx, dx, dxi, dxi))):
                w = _fd_weights(order) / step ** order
                d = np.tensordot(w, d, axes=([0], [0]))
            expo = (-m + rho * sum(be) - (1.0 - rho) * sum(al)) / 2.0
            best = max(best, float(np.max(np.abs(d) * weight_base ** expo)))
    return best


# -- Egorov ------------------------------------------------------------------------

def _modes_of(f, N: int):
    """``(k1, k2, coefficient)`` arrays of a band-limited field or sparse data."""
    if isinstance(f, SparseInitialData):
        ks = f.ks
        a = f.amps
        nz = ~np.all(ks == 0, axis=1)
        k1 = np.concatenate([ks[:, 0], -ks[nz, 0]])
        k2 = np.concatenate([ks[:, 1], -ks[nz, 1]])
        return k1, k2, np.concatenate([a, np.conj(a[nz])])
    f = _as_field(f)
    K1, K2 = wavenumbers(f.N)
    mag = np.abs(f.coeffs)
    sel = mag > 1e-13 * max(mag.max(), 1e-300)
    return K1[sel], K2[sel], f.coeffs[sel]


def _field_function(f):
    if isinstance(f, SparseInitialData):
        return f
    k1, k2, c = _modes_of(f, None)

    def func(x, y):
        out = np.zeros(np.broadcast(x, y).shape, dtype=np.complex128)
        for a, b, cc in zip(k1, k2, c):
            out += cc * np.exp(1j * (a * x + b * y))
        return out.real
    return func


def egorov_decompose(a, seq, f, N: int = 128, M: int = 1024) -> tuple[ScalarField, ScalarField]:
    """Split ``[Op(a)(f o phi^-1)] o phi`` into ``Op(a~) f`` and a remainder.

    ``a~(x, k) = a(phi x, Dphi(x)^-T k)``.  The conjugated operator is computed
    on a fine grid ``M`` from exact samples of ``f o phi^-1`` and read off at
    ``phi(x)`` by non-uniform FFT; both fields are returned on the ``N`` grid.
    """
    import finufft

    steps = list(seq.steps) if hasattr(seq, "steps") else [seq]
    if len(steps) != 1:
        raise ValueError("egorov_decompose takes a single map")
    step = steps[0]
    X, Y = grid_points(N)
    px, py = step.apply(X, Y)
    J = step.jacobian(X, Y)
    # D phi^-T k = [[d, -c], [-b, a]] k
    ja, jb, jc, jd = J[..., 0, 0], J[..., 0, 1], J[..., 1, 0], J[..., 1, 1]
    k1s, k2s, cs = _modes_of(f, N)
    main = np.zeros((N, N), dtype=np.complex128)
    for k1, k2, c in zip(k1s, k2s, cs):
        e1 = jd * k1 - jc * k2
        e2 = -jb * k1 + ja * k2
        main += a(px, py, e1, e2) * c * np.exp(1j * (k1 * X + k2 * Y))
    fn = _field_function(f)
    XM, YM = grid_points(M)
    qx, qy = step.apply_inverse(XM, YM)
    g = ScalarField(fn(qx, qy))
    hvals = quantize_apply_complex(a, g)
    hc = np.fft.fftshift(np.fft.fft2(hvals)) / (M * M)
    hc[0, :] = 0.0  # drop the unpaired Nyquist row and column
    hc[:, 0] = 0.0
    conj = finufft.nufft2d2(np.ascontiguousarray(px.ravel()), np.ascontiguousarray(py.ravel()),
                            np.ascontiguousarray(hc), isign=1, eps=NUFFT_EPS).reshape(N, N)
    return ScalarField(main.real), ScalarField((conj - main).real)
