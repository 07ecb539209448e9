"""Random alternating-shear maps of the flat torus (R / 2 pi Z)^2.

One step is the composition of a horizontal and a vertical sine shear,

    x* = x + A  sin(y  + gamma)
    y* = y + A' sin(x* + gamma')

with A, A', gamma, gamma' i.i.d. uniform on (-pi, pi).  The step is an exact
area-preserving bijection; its inverse undoes the two shears in reverse order.

Points and angles are numpy-broadcastable throughout, so the same functions
serve single evaluations and whole ensembles.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .rng import StepStream, uniform_blocks

TWO_PI = 2.0 * np.pi
OVERFLOW_LIMIT = 1e300

ENSEMBLE_KINDS = ("pierrehumbert", "identity")


class TorusPoint(NamedTuple):
    x: np.ndarray | float
    y: np.ndarray | float


def torus_point(x, y) -> TorusPoint:
    return TorusPoint(np.mod(x, TWO_PI), np.mod(y, TWO_PI))


# -- raw shear kernels (parameters may be scalars or arrays) -----------------

def shear_forward(A, Ap, g, gp, x, y, reduce=True):
    xs = x + A * np.sin(y + g)
    ys = y + Ap * np.sin(xs + gp)
    if reduce:
        return np.mod(xs, TWO_PI), np.mod(ys, TWO_PI)
    return xs, ys


def shear_inverse(A, Ap, g, gp, xs, ys, reduce=True):
    y = ys - Ap * np.sin(xs + gp)
    x = xs - A * np.sin(y + g)
    if reduce:
        return np.mod(x, TWO_PI), np.mod(y, TWO_PI)
    return x, y


def shear_jacobian_entries(A, Ap, g, gp, x, y):
    """Entries (a, b, c, d) of D phi = [[a, b], [c, d]] at (x, y)."""
    c1 = np.cos(y + g)
    xs = x + A * np.sin(y + g)
    c2 = np.cos(xs + gp)
    b = A * c1
    c = Ap * c2
    d = 1.0 + A * Ap * c1 * c2
    return np.ones_like(d), b, c, d


def shear_projective(A, Ap, g, gp, x, y, v):
    """One projective step: image point, new covector angle, log |A_check v|."""
    a, b, c, d = shear_jacobian_entries(A, Ap, g, gp, x, y)
    cv, sv = np.cos(v), np.sin(v)
    # inverse transpose of [[a, b], [c, d]] is [[d, -c], [-b, a]] when det = 1
    w0 = d * cv - c * sv
    w1 = -b * cv + a * sv
    xs, ys = shear_forward(A, Ap, g, gp, x, y)
    # dividing by |v|^2 makes the gain exactly 0 for the identity
    return xs, ys, np.mod(np.arctan2(w1, w0), TWO_PI), 0.5 * np.log((w0 * w0 + w1 * w1) / (cv * cv + sv * sv))


def _frame(a, b, c, d) -> np.ndarray:
    a, b, c, d = np.broadcast_arrays(a, b, c, d)
    return np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)


# -- step types ---------------------------------------------------------------

@dataclass(frozen=True)
class ShearMapStep:
    A: float
    Aprime: float
    gamma: float
    gammaprime: float

    @classmethod
    def identity(cls) -> "ShearMapStep":
        return cls(0.0, 0.0, 0.0, 0.0)

    @property
    def params(self) -> np.ndarray:
        return np.array([self.A, self.Aprime, self.gamma, self.gammaprime])

    def apply(self, x, y):
        return shear_forward(self.A, self.Aprime, self.gamma, self.gammaprime, x, y)

    def apply_inverse(self, x, y):
        return shear_inverse(self.A, self.Aprime, self.gamma, self.gammaprime, x, y)

    def jacobian(self, x, y) -> np.ndarray:
        return _frame(*shear_jacobian_entries(self.A, self.Aprime, self.gamma, self.gammaprime, x, y))


@dataclass(frozen=True)
class TranslationStep:
    """Rigid translation x -> x + c.  Not part of the random family; used to
    probe quantization identities that hold exactly for translations."""

    c1: float
    c2: float

    def apply(self, x, y):
        return np.mod(x + self.c1, TWO_PI), np.mod(y + self.c2, TWO_PI)

    def apply_inverse(self, x, y):
        return np.mod(x - self.c1, TWO_PI), np.mod(y - self.c2, TWO_PI)

    def jacobian(self, x, y) -> np.ndarray:
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.broadcast_to(np.eye(2), shape + (2, 2)).copy()


def sample_step(stream: StepStream) -> ShearMapStep:
    """Draw A, A', gamma, gamma' uniformly on (-pi, pi) from one stream block."""
    u = stream.block()
    A, Ap, g, gp = np.pi * (2.0 * u - 1.0)
    return ShearMapStep(float(A), float(Ap), float(g), float(gp))


def step_params(seed: int, sample: int, n_steps: int, kind: str = "pierrehumbert",
                label: str = "maps") -> np.ndarray:
    """``(n_steps, 4)`` parameter array; row ``j`` equals
    ``sample_step(StepStream(seed, sample, j, label))``."""
    if kind not in ENSEMBLE_KINDS:
        raise ValueError(f"unknown ensemble kind {kind!r}")
    params = np.pi * (2.0 * uniform_blocks(seed, label, sample, n_steps) - 1.0)
    if kind == "identity":
        params[:, :2] = 0.0
    return params


@dataclass
class MapSequence:
    """Ordered steps; ``steps[0]`` acts first."""

    steps: list = field(default_factory=list)
    seed: int | None = None
    index: int | None = None

    @classmethod
    def sample(cls, seed: int, index: int, n_steps: int, kind: str = "pierrehumbert",
               label: str = "maps") -> "MapSequence":
        params = step_params(seed, index, n_steps, kind, label)
        return cls([ShearMapStep(*map(float, row)) for row in params], seed, index)

    @classmethod
    def from_params(cls, params: np.ndarray, seed=None, index=None) -> "MapSequence":
        return cls([ShearMapStep(*map(float, row)) for row in np.asarray(params).reshape(-1, 4)], seed, index)

    @classmethod
    def repeat(cls, step, n: int) -> "MapSequence":
        return cls([step] * n)

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return MapSequence(self.steps[item], self.seed, self.index)
        return self.steps[item]

    @property
    def params(self) -> np.ndarray:
        if not all(isinstance(s, ShearMapStep) for s in self.steps):
            raise TypeError("params is only defined for sequences of shear steps")
        if not self.steps:
            return np.empty((0, 4))
        return np.array([s.params for s in self.steps])

    def reversed_prefix(self, n: int) -> "MapSequence":
        """The first ``n`` steps applied in the opposite order.

        For i.i.d. steps its n-fold composition has the same law as the
        original one, which lets ensemble averages at each time be computed
        with one incremental inverse per step.
        """
        return MapSequence(self.steps[:n][::-1], self.seed, self.index)

    def forward(self, x, y):
        for s in self.steps:
            x, y = s.apply(x, y)
        return x, y

    def inverse(self, x, y):
        for s in reversed(self.steps):
            x, y = s.apply_inverse(x, y)
        return x, y


# -- point-level operations ---------------------------------------------------

def apply(step, p) -> TorusPoint:
    return TorusPoint(*step.apply(p[0], p[1]))


def apply_inverse(step, p) -> TorusPoint:
    return TorusPoint(*step.apply_inverse(p[0], p[1]))


def jacobian(step, p) -> np.ndarray:
    return step.jacobian(p[0], p[1])


def inv_transpose_jacobian(step, p) -> np.ndarray:
    J = jacobian(step, p)
    a, b, c, d = J[..., 0, 0], J[..., 0, 1], J[..., 1, 0], J[..., 1, 1]
    return _frame(d, -c, -b, a)


def cocycle(seq: MapSequence, p):
    """``(phi^n(p), A_check^n(p))`` by chained products along the orbit.

    Raises ``OverflowError`` once an entry passes 1e300; long horizons should
    accumulate logarithms through :func:`projective_step` instead.
    """
    x, y = p
    shape = np.broadcast(np.asarray(x, dtype=float), np.asarray(y, dtype=float)).shape
    M = np.broadcast_to(np.eye(2), shape + (2, 2)).copy()
    for step in seq.steps:
        M = inv_transpose_jacobian(step, (x, y)) @ M
        if not np.all(np.isfinite(M)) or np.max(np.abs(M)) > OVERFLOW_LIMIT:
            raise OverflowError("cocycle entries exceed 1e300; use projective_step")
        x, y = step.apply(x, y)
    return TorusPoint(x, y), M


def projective_step(step, p, v):
    """Advance ``(p, v)`` one step.  Returns ``(phi(p), new angle, log|A_check v|)``."""
    if isinstance(step, ShearMapStep):
        xs, ys, v1, lg = shear_projective(step.A, step.Aprime, step.gamma, step.gammaprime, p[0], p[1], v)
        return TorusPoint(xs, ys), v1, lg
    M = inv_transpose_jacobian(step, p)
    cv, sv = np.cos(v), np.sin(v)
    w0 = M[..., 0, 0] * cv + M[..., 0, 1] * sv
    w1 = M[..., 1, 0] * cv + M[..., 1, 1] * sv
    return apply(step, p), np.mod(np.arctan2(w1, w0), TWO_PI), 0.5 * np.log((w0 * w0 + w1 * w1) / (cv * cv + sv * sv))


# -- derivative size functional ------------------------------------------------

@lru_cache(maxsize=1)
def _derivative_table():
    """Lambdified partial derivatives (orders 1..4) of the shear step and its inverse."""
    import sympy as sp

    x, y, A, Ap, g, gp = sp.symbols("x y A Ap g gp", real=True)
    xs = x + A * sp.sin(y + g)
    fwd = (xs, y + Ap * sp.sin(xs + gp))
    yi = y - Ap * sp.sin(x + gp)
    inv = (x - A * sp.sin(yi + g), yi)
    table = {}
    for order in range(1, 5):
        funcs = []
        for comp in fwd + inv:
            for nx in range(order + 1):
                expr = sp.diff(comp, x, nx, y, order - nx)
                funcs.append(sp.lambdify((x, y, A, Ap, g, gp), expr, "numpy"))
        table[order] = funcs
    return table


def derivative_bound(step, k: int, grid: int = 64) -> float:
    """``1 + sup`` of all partial derivatives of orders 1..k of the step and its
    inverse, sampled on a ``grid x grid`` lattice."""
    if not 1 <= k <= 4:
        raise ValueError("k must lie in 1..4")
    if isinstance(step, TranslationStep):
        return 2.0
    t = np.arange(grid) * (TWO_PI / grid)
    X, Y = np.meshgrid(t, t, indexing="ij")
    table = _derivative_table()
    best = 0.0
    for order in range(1, k + 1):
        for f in table[order]:
            val = np.broadcast_to(f(X, Y, step.A, step.Aprime, step.gamma, step.gammaprime), X.shape)
            best = max(best, float(np.max(np.abs(val))))
    return 1.0 + best


def ensemble_params(seed: int, label: str, samples, n_steps: int, kind: str = "pierrehumbert") -> np.ndarray:
    """``(len(samples), n_steps, 4)`` parameters, one independent stream per sample."""
    samples = list(samples)
    out = np.empty((len(samples), n_steps, 4))
    for i, s in enumerate(samples):
        out[i] = step_params(seed, s, n_steps, kind, label)
    return out


def compose_params_inverse(params: Sequence, x, y, reduce=False):
    """Apply the inverses of ``params`` rows last-to-first (the inverse of the
    forward composition row 0 first)."""
    for A, Ap, g, gp in np.asarray(params)[::-1]:
        x, y = shear_inverse(A, Ap, g, gp, x, y, reduce=False)
    if reduce:
        return np.mod(x, TWO_PI), np.mod(y, TWO_PI)
    return x, y


def compose_params_forward(params: Sequence, x, y, reduce=True):
    for A, Ap, g, gp in np.asarray(params):
        x, y = shear_forward(A, Ap, g, gp, x, y, reduce=False)
    if reduce:
        return np.mod(x, TWO_PI), np.mod(y, TWO_PI)
    return x, y
