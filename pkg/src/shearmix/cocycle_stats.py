"""Lyapunov exponent, moment Lyapunov function and the twisted eigenfunction psi_p.

The projective process is the chain ``(x_n, v_n)`` of a base point and a unit
covector angle under the inverse-transpose derivative cocycle.  The twisted
operator is

    (P^p psi)(x, v) = E |A v|^-p psi(phi x, A v / |A v|),

whose top eigenvalue is ``exp(-Lambda(p))``.  ``psi_p`` is found by power
iteration on a periodic ``(x, y, theta)`` grid starting from ``psi = 1``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numba
import numpy as np

from .rng import uniform_blocks
from .torus_maps import TWO_PI, ENSEMBLE_KINDS, ShearMapStep, ensemble_params, shear_projective


class EstimatorWarning(UserWarning):
    """Raised when a Monte-Carlo estimator is statistically unreliable."""


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    stderr: float
    n_steps: int
    n_samples: int

    def ci(self, z: float = 2.5758293035489004) -> tuple[float, float]:
        return self.value - z * self.stderr, self.value + z * self.stderr


def _initial_states(seed: int, label: str, n_samples: int) -> np.ndarray:
    """``(n_samples, 3)`` uniform ``(x, y, v)``, one stream per sample."""
    u = np.stack([uniform_blocks(seed, label, i, 1)[0, :3] for i in range(n_samples)])
    return u * TWO_PI


def _ensemble(seed, label, n_samples, n_steps, kind, step):
    if step is not None:
        return np.broadcast_to(np.asarray(step.params), (n_samples, n_steps, 4))
    return ensemble_params(seed, label, range(n_samples), n_steps, kind)


def projective_log_gains(params: np.ndarray, x, y, v) -> np.ndarray:
    """Per-step log gains ``(n_samples, n_steps)`` for parameter stacks ``(n_samples, n_steps, 4)``."""
    n_samples, n_steps, _ = params.shape
    out = np.empty((n_samples, n_steps))
    for j in range(n_steps):
        A, Ap, g, gp = params[:, j].T
        x, y, v, out[:, j] = shear_projective(A, Ap, g, gp, x, y, v)
    return out


def top_lyapunov(n_steps: int, n_samples: int, seed: int, kind: str = "pierrehumbert",
                 step: ShearMapStep | None = None, x0=None, n_transient: int | None = None) -> LyapunovEstimate:
    """Top exponent of the covector cocycle from ``n_samples`` independent orbits.

    The first ``n_transient`` steps (default ``n_steps // 10``) only align the
    covector and are excluded from the average.  ``step`` replaces the random
    family by a fixed map; ``x0`` pins the starting point.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if n_steps < 100:
        warnings.warn("Lyapunov estimates need n_steps >= 100 to be reported", EstimatorWarning, stacklevel=2)
    if kind not in ENSEMBLE_KINDS:
        raise ValueError(f"unknown ensemble kind {kind!r}")
    n_transient = n_steps // 10 if n_transient is None else n_transient
    init = _initial_states(seed, "lyapunov-init", n_samples)
    x, y, v = init.T
    if x0 is not None:
        x = np.full(n_samples, float(x0[0]))
        y = np.full(n_samples, float(x0[1]))
    params = _ensemble(seed, "lyapunov", n_samples, n_steps, kind, step)
    gains = projective_log_gains(params, x, y, v)[:, n_transient:]
    per = gains.mean(axis=1)
    se = float(np.std(per, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else float("nan")
    return LyapunovEstimate(float(per.mean()), se, n_steps - n_transient, n_samples)


def moment_lyapunov_direct(p: float, n_steps: int, n_samples: int, seed: int,
                           kind: str = "pierrehumbert") -> tuple[float, float]:
    """``-(1/n) log mean exp(-p S_n)`` with ``S_n = log|A^n v|``, and its delta-method SE."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p == 0.0:
        return 0.0, 0.0
    x, y, v = _initial_states(seed, "moment-init", n_samples).T
    params = _ensemble(seed, "moment", n_samples, n_steps, kind, None)
    S = projective_log_gains(params, x, y, v).sum(axis=1)
    if not np.any(S):
        return 0.0, 0.0
    logw = -p * S
    shift = logw.max()
    w = np.exp(logw - shift)
    mean_w = w.mean()
    ratio = mean_w ** 2 / np.mean(w * w)
    if ratio < 0.01:
        warnings.warn(f"moment estimator effective sample size {ratio * n_samples:.1f} "
                      f"is below 1% of {n_samples}", EstimatorWarning, stacklevel=2)
    value = -(np.log(mean_w) + shift) / n_steps
    se = np.std(w, ddof=1) / np.sqrt(n_samples) / mean_w / n_steps
    return float(value), float(se)


# -- twisted power iteration -------------------------------------------------

@numba.njit(cache=True, inline="always")
def _interp3(psi, x, y, t):
    nx = psi.shape[0]
    nt = psi.shape[2]
    u = x * (nx / TWO_PI)
    w = y * (nx / TWO_PI)
    s = t * (nt / TWO_PI)
    i0 = int(np.floor(u))
    j0 = int(np.floor(w))
    l0 = int(np.floor(s))
    fu = u - i0
    fw = w - j0
    fs = s - l0
    i0 %= nx
    j0 %= nx
    l0 %= nt
    i1 = (i0 + 1) % nx
    j1 = (j0 + 1) % nx
    l1 = (l0 + 1) % nt
    # a + (b - a) f reproduces constants exactly
    c00 = psi[i0, j0, l0] + (psi[i0, j0, l1] - psi[i0, j0, l0]) * fs
    c01 = psi[i0, j1, l0] + (psi[i0, j1, l1] - psi[i0, j1, l0]) * fs
    c10 = psi[i1, j0, l0] + (psi[i1, j0, l1] - psi[i1, j0, l0]) * fs
    c11 = psi[i1, j1, l0] + (psi[i1, j1, l1] - psi[i1, j1, l0]) * fs
    c0 = c00 + (c01 - c00) * fw
    c1 = c10 + (c11 - c10) * fw
    return c0 + (c1 - c0) * fu


@numba.njit(cache=True, nogil=True)
def _twisted_apply(psi, params, p):
    """Empirical twisted operator with one shared set of maps for every node."""
    nx = psi.shape[0]
    nt = psi.shape[2]
    m = params.shape[0]
    out = np.empty_like(psi)
    bad = 0
    for i in range(nx):
        x = TWO_PI * i / nx
        for j in range(nx):
            y = TWO_PI * j / nx
            for l in range(nt):
                th = TWO_PI * l / nt
                cv = np.cos(th)
                sv = np.sin(th)
                acc = 0.0
                for r in range(m):
                    A = params[r, 0]
                    Ap = params[r, 1]
                    g = params[r, 2]
                    gp = params[r, 3]
                    c1 = np.cos(y + g)
                    xs = x + A * np.sin(y + g)
                    c2 = np.cos(xs + gp)
                    ys = y + Ap * np.sin(xs + gp)
                    b = A * c1
                    c = Ap * c2
                    d = 1.0 + A * Ap * c1 * c2
                    w0 = d * cv - c * sv
                    w1 = -b * cv + sv
                    n2 = (w0 * w0 + w1 * w1) / (cv * cv + sv * sv)
                    t1 = np.arctan2(w1, w0) % TWO_PI
                    val = _interp3(psi, xs % TWO_PI, ys % TWO_PI, t1)
                    if not val > 0.0:
                        bad += 1
                    acc += n2 ** (-0.5 * p) * val
                out[i, j, l] = acc / m
    return out, bad


def twisted_apply(psi: np.ndarray, params: np.ndarray, p: float) -> np.ndarray:
    out, bad = _twisted_apply(np.ascontiguousarray(psi, dtype=np.float64),
                              np.ascontiguousarray(params, dtype=np.float64), float(p))
    if bad:
        raise FloatingPointError(f"{bad} non-positive interpolated values of psi")
    return out


@dataclass
class PsiGrid:
    nx: int
    ntheta: int
    values: np.ndarray
    p: float
    lambda_p: float
    stderr: float = 0.0
    log_factors: np.ndarray = field(default_factory=lambda: np.zeros(0))
    increments: np.ndarray = field(default_factory=lambda: np.zeros(0))
    seed: int | None = None

    @property
    def eigenvalue(self) -> float:
        return float(np.exp(-self.lambda_p))

    @classmethod
    def constant(cls, nx: int, ntheta: int, p: float = 0.0) -> "PsiGrid":
        return cls(nx, ntheta, np.ones((nx, nx, ntheta)), p, 0.0)

    @classmethod
    def from_function(cls, func, nx: int, ntheta: int, p: float = 0.0) -> "PsiGrid":
        t = np.arange(nx) * (TWO_PI / nx)
        th = np.arange(ntheta) * (TWO_PI / ntheta)
        X, Y, T = np.meshgrid(t, t, th, indexing="ij")
        return cls(nx, ntheta, np.asarray(func(X, Y, T), dtype=np.float64) * np.ones(X.shape), p, 0.0)

    def __call__(self, x, y, theta) -> np.ndarray:
        """Periodic trilinear interpolation."""
        x, y, theta = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in (x, y, theta)))
        out = _interp_many(self.values, np.mod(x, TWO_PI).ravel(), np.mod(y, TWO_PI).ravel(),
                           np.mod(theta, TWO_PI).ravel())
        return out.reshape(x.shape)

    def with_values(self, values: np.ndarray) -> "PsiGrid":
        return PsiGrid(self.nx, self.ntheta, values, self.p, self.lambda_p, self.stderr,
                       self.log_factors, self.increments, self.seed)


@numba.njit(cache=True)
def _interp_many(psi, x, y, t):
    out = np.empty(x.shape[0])
    for q in range(x.shape[0]):
        out[q] = _interp3(psi, x[q], y[q], t[q])
    return out


def _psi_maps(seed: int, iteration: int, n_maps: int, kind: str) -> np.ndarray:
    from .torus_maps import step_params

    return step_params(seed, iteration, n_maps, kind, label="psi")


def psi_power_iteration(p: float, nx: int, ntheta: int, n_maps_per_iter: int, n_iters: int,
                        seed: int, kind: str = "pierrehumbert") -> PsiGrid:
    """Sup-normalised power iteration of the empirical twisted operator from ``psi = 1``.

    Iteration ``t`` uses the maps of stream ``(seed, "psi", t)`` at every node, so
    runs at different ``p`` share their randomness.  ``lambda_p`` is minus the
    mean log growth factor over the last half of the iterations; ``stderr`` is
    the standard error of that mean.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if nx < 8 or ntheta < 8:
        raise ValueError("grid sizes must be >= 8")
    if n_iters < 2:
        raise ValueError("n_iters must be >= 2")
    psi = np.ones((nx, nx, ntheta))
    logf = np.empty(n_iters)
    inc = np.empty(n_iters)
    for t in range(n_iters):
        new = twisted_apply(psi, _psi_maps(seed, t, n_maps_per_iter, kind), p)
        top = new.max()
        logf[t] = np.log(top)
        new /= top
        inc[t] = np.max(np.abs(new - psi))
        psi = new
    tail = logf[n_iters - n_iters // 2:]
    lam = -float(tail.mean())
    se = float(tail.std(ddof=1) / np.sqrt(len(tail))) if len(tail) > 1 else 0.0
    if psi.min() <= 0.0:
        raise FloatingPointError("psi lost positivity")
    return PsiGrid(nx, ntheta, psi, p, lam, se, logf, inc, seed)


def eigen_residual(psi: PsiGrid, n_maps: int, seed: int, kind: str = "pierrehumbert") -> float:
    """``sup|e^Lambda P psi - psi| / sup psi`` with maps independent of the iteration."""
    params = ensemble_params(seed, "psi-residual", [0], n_maps, kind)[0]
    applied = twisted_apply(psi.values, params, psi.p)
    return float(np.max(np.abs(np.exp(psi.lambda_p) * applied - psi.values)) / psi.values.max())


@dataclass
class LambdaCurve:
    p: np.ndarray
    value: np.ndarray
    stderr: np.ndarray
    secant_slope: float
    secant_stderr: float
    second_differences: np.ndarray
    second_difference_se: np.ndarray
    psis: list = field(default_factory=list, repr=False)

    @property
    def concave(self) -> bool:
        """Second differences below +3 SE: moment Lyapunov functions are concave in p."""
        return bool(np.all(self.second_differences <= 3.0 * self.second_difference_se))


def lambda_curve(p_list, nx: int = 16, ntheta: int = 64, n_maps_per_iter: int = 200,
                 n_iters: int = 40, seed: int = 1, kind: str = "pierrehumbert") -> LambdaCurve:
    p_arr = np.asarray(p_list, dtype=np.float64)
    if p_arr.size == 0 or np.any(p_arr < 0) or np.any(p_arr > 0.5) or np.any(np.diff(p_arr) <= 0):
        raise ValueError("p_list must be increasing within [0, 0.5]")
    psis = [psi_power_iteration(p, nx, ntheta, n_maps_per_iter, n_iters, seed, kind) for p in p_arr]
    vals = np.array([g.lambda_p for g in psis])
    ses = np.array([g.stderr for g in psis])
    if len(p_arr) >= 2:
        h = p_arr[1] - p_arr[0]
        slope = (vals[1] - vals[0]) / h
        slope_se = float(np.hypot(ses[1], ses[0]) / h)
    else:
        slope, slope_se = float("nan"), float("nan")
    # second differences on a possibly uneven grid, scaled as divided differences
    d2, d2se = [], []
    for i in range(1, len(p_arr) - 1):
        h0, h1 = p_arr[i] - p_arr[i - 1], p_arr[i + 1] - p_arr[i]
        c = np.array([2 / (h0 * (h0 + h1)), -2 / (h0 * h1), 2 / (h1 * (h0 + h1))])
        d2.append(float(c @ vals[i - 1:i + 2]))
        d2se.append(float(np.sqrt(np.sum((c * ses[i - 1:i + 2]) ** 2))))
    return LambdaCurve(p_arr, vals, ses, float(slope), slope_se, np.array(d2), np.array(d2se), psis)
