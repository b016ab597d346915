"""Norm estimation on uniform dyadic grids.

Functions are sampled on boxes at spacing 2^-J.  Besov quasi-norms are
discretized over dyadic shells of shift vectors: on shell j every
grid-representable axis-parallel magnitude in [2^-(j+1), 2^-j] is
tried (plus diagonal directions in dimension >= 2), differences are
formed only where all nodes stay inside the box, and the L^p norms use
the Riemann cell weight 2^-JN.  BMO, decreasing rearrangement / weak
L^p and Hoelder seminorms follow the same node-measure conventions so
cross-checks between estimators are exact.
"""

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .admissible import Constant
from .errors import AlignmentError, ParameterError, ResolutionError

__all__ = [
    "GridFunction",
    "BesovParams",
    "NormReport",
    "sigma_p",
    "iterated_difference",
    "besov_seminorm",
    "lp_norm_grid",
    "bmo_norm",
    "decreasing_rearrangement",
    "weak_lp_norm",
    "holder_norm",
]

INF = math.inf


def sigma_p(ndim, p):
    """The regularity floor N (1/p - 1)_+ below which nothing is a function."""
    if p == INF:
        return 0.0
    return ndim * max(0.0, 1.0 / p - 1.0)


@dataclass(frozen=True)
class GridFunction:
    """Real values on a uniform grid of spacing 2^-level over a box."""

    dim: int
    box: tuple
    level: int
    values: np.ndarray
    flags: tuple = field(default=())

    def __post_init__(self):
        if len(self.box) != self.dim:
            raise ParameterError("box must list one (lo, hi) pair per axis")
        expect = tuple(_axis_count(lo, hi, self.level) for lo, hi in self.box)
        if self.values.shape != expect:
            raise ParameterError(
                "value array shape %r does not match box/level grid %r"
                % (self.values.shape, expect)
            )

    @property
    def spacing(self):
        return math.ldexp(1.0, -self.level)

    @property
    def cell_measure(self):
        return math.ldexp(1.0, -self.level * self.dim)

    def axis_nodes(self, axis):
        lo, _ = self.box[axis]
        n = self.values.shape[axis]
        return lo + np.arange(n) * self.spacing

    @classmethod
    def sample(cls, fn, box, level, dim=None):
        """Sample a callable fn(x0, x1, ...) of per-axis coordinate arrays."""
        box = tuple((float(lo), float(hi)) for lo, hi in box)
        dim = dim if dim is not None else len(box)
        axes = [
            lo + np.arange(_axis_count(lo, hi, level)) * math.ldexp(1.0, -level)
            for lo, hi in box
        ]
        grids = np.meshgrid(*axes, indexing="ij") if dim > 1 else [axes[0]]
        values = np.asarray(fn(*grids), dtype=float)
        return cls(dim, box, level, values)


def _axis_count(lo, hi, level):
    extent = (hi - lo) * math.ldexp(1.0, level)
    n = round(extent)
    if abs(extent - n) > 1e-9:
        raise ParameterError(
            "box edge (%r, %r) is not a whole number of 2^-%d cells" % (lo, hi, level)
        )
    if n < 0:
        raise ParameterError("box has negative extent")
    return n + 1


@dataclass(frozen=True)
class BesovParams:
    """Smoothness/integrability bundle (N, d, s, p, q, M, Psi)."""

    N: int
    s: float
    p: float
    q: float
    d: int = None
    M: int = None
    psi: object = None

    def __post_init__(self):
        object.__setattr__(self, "d", self.N - 1 if self.d is None else self.d)
        object.__setattr__(
            self, "M", int(math.floor(self.s)) + 1 if self.M is None else self.M
        )
        object.__setattr__(self, "psi", Constant(1.0) if self.psi is None else self.psi)
        if self.N < 1 or not 0 < self.d <= self.N:
            raise ParameterError("need N >= 1 and 0 < d <= N")
        for e in (self.p, self.q):
            if e != INF and e <= 0:
                raise ParameterError("p, q must be positive or inf")
        if self.s <= sigma_p(self.N, self.p):
            raise ParameterError(
                "s=%g must exceed sigma_p=%g" % (self.s, sigma_p(self.N, self.p))
            )
        if not self.s < self.M:
            raise ParameterError("need s < M (difference order)")

    def for_dim(self, ndim):
        """The same smoothness parameters read over R^ndim."""
        return BesovParams(
            N=ndim, s=self.s, p=self.p, q=self.q, d=ndim, M=self.M, psi=self.psi
        )


class NormReport:
    """Per-shell seminorm pieces plus their aggregated total."""

    def __init__(self, lp_part, per_shell, total, flags=()):
        self.lp_part = float(lp_part)
        self.per_shell = [(int(j), float(v)) for j, v in per_shell]
        self.total = float(total)
        self.flags = tuple(flags)

    def to_dict(self):
        return {
            "lp": self.lp_part,
            "shells": [{"j": j, "value": v} for j, v in self.per_shell],
            "total": self.total,
            "flags": list(self.flags),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def write_csv(self, fh):
        fh.write("j,value\n")
        for j, v in self.per_shell:
            fh.write("%d,%r\n" % (j, v))
        fh.write("lp,%r\n" % self.lp_part)
        fh.write("total,%r\n" % self.total)

    def __repr__(self):
        return "NormReport(total=%r, shells=%d, flags=%r)" % (
            self.total,
            len(self.per_shell),
            self.flags,
        )


def _integer_offsets(f, h):
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if h.size != f.dim:
        raise ParameterError("shift must have one component per axis")
    scaled = h * math.ldexp(1.0, f.level)
    offsets = np.rint(scaled).astype(int)
    if np.any(np.abs(scaled - offsets) > 1e-9):
        raise AlignmentError("shift %r is not grid aligned at level %d" % (h, f.level))
    return offsets


def _difference_values(values, offsets, order):
    """Binomial combination sum (-1)^(M-i) C(M,i) f(. + i h) on the shrunken core."""
    shape = values.shape
    out_shape = [n - order * abs(o) for n, o in zip(shape, offsets)]
    if any(n <= 0 for n in out_shape):
        return None
    base = [order * abs(o) if o < 0 else 0 for o in offsets]

    def term_slice(i):
        return tuple(
            slice(b + i * o, b + i * o + n) for b, o, n in zip(base, offsets, out_shape)
        )

    if order == 1:  # the hot path of the shell scans
        return values[term_slice(1)] - values[term_slice(0)]
    acc = np.zeros(out_shape)
    for i in range(order + 1):
        acc += ((-1.0) ** (order - i) * math.comb(order, i)) * values[term_slice(i)]
    return acc


def iterated_difference(f, h, order):
    """M-fold difference of a grid function along a grid-aligned shift.

    The output lives on the shrunken domain of points x with x + M h
    still inside the box; an empty domain is flagged, not an error.
    """
    if order < 1:
        raise ParameterError("difference order must be >= 1")
    offsets = _integer_offsets(f, h)
    vals = _difference_values(f.values, offsets, order)
    if vals is None:
        return GridFunction(
            f.dim,
            tuple((lo, lo) for lo, _ in f.box),
            f.level,
            np.zeros((1,) * f.dim),
            flags=("empty-domain",),
        )
    new_box = []
    for (lo, hi), o, n in zip(f.box, offsets, vals.shape):
        shift = (order * abs(o) if o < 0 else 0) * f.spacing
        new_lo = lo + shift
        new_box.append((new_lo, new_lo + (n - 1) * f.spacing))
    return GridFunction(f.dim, tuple(new_box), f.level, vals)


def _cell_values(values):
    """Left-endpoint cell samples: drop the closing node along each axis."""
    if any(n <= 1 for n in values.shape):
        return values
    return values[tuple(slice(0, -1) for _ in values.shape)]


def lp_norm_grid(f, p):
    """Riemann-sum L^p norm, left-endpoint cells of weight 2^-JN.

    The cell rule makes constants and indicator masses exact and shares
    its cell model with the decreasing rearrangement, so rearrangement
    preserves the L^p norm exactly.  p = inf takes the max over all
    nodes.
    """
    if p != INF and p <= 0:
        raise ParameterError("p must be positive or inf")
    if f.values.size == 0:
        return 0.0
    if p == INF:
        return float(np.max(np.abs(f.values)))
    v = np.abs(_cell_values(f.values))
    return float((np.sum(v**p) * f.cell_measure) ** (1.0 / p))


def _shell_magnitudes(level, j):
    """Grid-representable cell counts c with c 2^-J in [2^-(j+1), 2^-j]."""
    lo = math.ldexp(1.0, level - j - 1)
    hi = math.ldexp(1.0, level - j)
    c0 = max(1, int(math.ceil(lo - 1e-9)))
    c1 = int(math.floor(hi + 1e-9))
    return range(c0, c1 + 1)


def _shell_modulus(f, j, order, p):
    """sup over the deterministic shift net of ||Delta^M_h f||_p on shell j."""
    cell = f.cell_measure
    best = 0.0
    seen = False
    for axis in range(f.dim):
        for c in _shell_magnitudes(f.level, j):
            offsets = [0] * f.dim
            offsets[axis] = c
            vals = _difference_values(f.values, offsets, order)
            if vals is None:
                continue
            seen = True
            best = max(best, _raw_lp(vals, p, cell))
    if f.dim >= 2:
        root = math.sqrt(f.dim)
        lo = math.ldexp(1.0, f.level - j - 1) / root
        hi = math.ldexp(1.0, f.level - j) / root
        for c in range(max(1, int(math.ceil(lo - 1e-9))), int(math.floor(hi + 1e-9)) + 1):
            vals = _difference_values(f.values, [c] * f.dim, order)
            if vals is None:
                continue
            seen = True
            best = max(best, _raw_lp(vals, p, cell))
    return best, seen


def _raw_lp(vals, p, cell):
    if vals.size == 0:
        return 0.0
    if p == INF:
        return float(np.max(np.abs(vals)))
    a = np.abs(_cell_values(vals))
    return float((np.sum(a**p) * cell) ** (1.0 / p))


def besov_seminorm(f, params, j_range=None):
    """Discretized (generalized) Besov quasi-norm over dyadic shells.

    Shell j scans shifts with 2^-(j+1) <= |h| <= 2^-j and weights the
    modulus by 2^{js} Psi(2^-j).  For q < inf the inner sup over
    |h| <= t of the defining integral is realized as a running max over
    shells >= j before aggregation, so ``total`` is always the l^q
    combination of ``per_shell`` plus the L^p part.  Shells finer than
    the grid are skipped and flagged; if none of the requested shells
    is representable that is a resolution error.
    """
    s, p, q, order = params.s, params.p, params.q, params.M
    psi = params.psi
    if j_range is None:
        j_range = range(0, max(f.level, 1))
    shells = [j for j in j_range]
    if not shells:
        raise ParameterError("empty shell range")
    flags = list(f.flags)
    usable, moduli = [], []
    for j in shells:
        if j + 1 > f.level:
            flags.append("shell-unresolved:j=%d" % j)
            continue
        mod, seen = _shell_modulus(f, j, order, p)
        if not seen:
            flags.append("shell-empty-domain:j=%d" % j)
            continue
        usable.append(j)
        moduli.append(mod)
    if not usable:
        raise ResolutionError("no requested shell is representable at level %d" % f.level)
    moduli = np.asarray(moduli)
    if q != INF:
        # realize sup_{|h| <= 2^-j} as the running max over finer shells
        moduli = np.maximum.accumulate(moduli[::-1])[::-1]
    weights = np.array([2.0 ** (j * s) * psi.at_dyadic(j) for j in usable])
    shell_vals = weights * moduli
    if q == INF:
        semi = float(np.max(shell_vals))
    else:
        semi = float(np.sum(shell_vals**q) ** (1.0 / q))
    lp_part = lp_norm_grid(f, p)
    return NormReport(
        lp_part, list(zip(usable, shell_vals)), lp_part + semi, flags
    )


def bmo_norm(f, floor_cells=1):
    """Largest mean oscillation over dyadic windows.

    Windows are cubes of 2^t cells per side (down to ``floor_cells``),
    placed at half-side offsets so both the standard dyadic tree and
    its half-shifted copy are scanned.
    """
    n_cells = [n - 1 for n in f.values.shape]
    side_max = min(n_cells)
    if side_max < 1:
        raise ParameterError("grid too small for any window")
    floor_cells = max(1, floor_cells)
    best = 0.0
    side = 1
    while side * 2 <= side_max:
        side *= 2
    sides = []
    while side >= floor_cells:
        sides.append(side)
        side //= 2
    if not sides:
        raise ParameterError("floor_cells leaves no admissible window")
    for side in sides:
        step = max(side // 2, 1)
        starts = [range(0, n - side + 1, step) for n in n_cells]
        for corner in itertools.product(*starts):
            sl = tuple(slice(i, i + side + 1) for i in corner)
            w = f.values[sl]
            m = float(np.mean(w))
            best = max(best, float(np.mean(np.abs(w - m))))
    return best


def decreasing_rearrangement(f):
    """Breakpoints (t_i, f*(t_i)) of the rearranged step function.

    Every cell carries measure 2^-JN; f* holds value v_i on
    [t_i, t_i + cell).  The L^p norm computed from these plateaus is
    exactly lp_norm_grid.
    """
    v = np.sort(np.abs(_cell_values(f.values)).ravel())[::-1]
    t = np.arange(v.size) * f.cell_measure
    return t, v


def weak_lp_norm(f, r):
    """sup_t t^{1/r} f*(t), attained at plateau right endpoints."""
    if r <= 0:
        raise ParameterError("r must be positive")
    t, v = decreasing_rearrangement(f)
    if v.size == 0 or v[0] == 0.0:
        return 0.0
    t_right = t + f.cell_measure
    return float(np.max(t_right ** (1.0 / r) * v))


def holder_norm(f, alpha, order=None, j_range=None):
    """Zygmund-Hoelder norm: sup norm plus the B^alpha_{inf,inf} seminorm."""
    if not 0 < alpha:
        raise ParameterError("alpha must be positive")
    order = int(math.floor(alpha)) + 1 if order is None else order
    if not alpha < order:
        raise ParameterError("alpha must be below the difference order")
    params = BesovParams(N=f.dim, s=alpha, p=INF, q=INF, d=f.dim, M=order)
    return besov_seminorm(f, params, j_range).total


def grid_to_dict(f):
    """JSON-friendly form of a grid function (values flattened row-major)."""
    return {
        "dim": f.dim,
        "box": [[lo, hi] for lo, hi in f.box],
        "level": f.level,
        "values": [float(v) for v in f.values.ravel()],
        "flags": list(f.flags),
    }


def grid_from_dict(d):
    box = tuple((float(lo), float(hi)) for lo, hi in d["box"])
    shape = tuple(_axis_count(lo, hi, int(d["level"])) for lo, hi in box)
    values = np.asarray(d["values"], dtype=float).reshape(shape)
    return GridFunction(
        int(d["dim"]), box, int(d["level"]), values, tuple(d.get("flags", ()))
    )
