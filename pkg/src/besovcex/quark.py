"""Subatomic building blocks and the explicit non-restriction function.

The bump is the standard smooth partition bump: with u(t) = e^{-1/t^2}
on (0, inf) and v(t) = u(1+t) u(1-t), the line profile is
psi0(t) = v(t) / (v(t-1) + v(t) + v(t+1)) and the tensorized bump is
psi(x) = prod_j (1/2) psi0(x_j / 2), supported in [-2, 2]^N, summing to
one over integer translates, positive on [0, 1]^N, and fully separable.
Scaled, translated, monomial-weighted copies of it (quarks) synthesize
functions from sparse coefficient clouds; the counterexample places one
block of coefficients per dyadic level at pairwise disjoint stations
along the first axes.
"""

import csv
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .admissible import Constant
from .errors import ParameterError
from .normest import GridFunction, sigma_p
from .seqspace import DyadicSequence, bpq_from_levels

__all__ = [
    "BumpFn",
    "psi_bump",
    "QuarkCoeffs",
    "CounterexampleSpec",
    "quark_eval",
    "synthesize",
    "counterexample_coeffs",
    "lambda_profile",
    "coeff_norm",
    "write_coeffs_csv",
    "read_coeffs_csv",
]

INF = math.inf


def _v(t):
    """u(1+t) u(1-t): strictly positive on (-1, 1), identically 0 outside."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 1.0
    if np.any(m):
        tm = t[m]
        with np.errstate(under="ignore", over="ignore", divide="ignore"):
            expo = -1.0 / (1.0 + tm) ** 2 - 1.0 / (1.0 - tm) ** 2
            out[m] = np.exp(expo)  # flat-zero tails underflow to exactly 0
    return out


def _psi0(t):
    """v normalized by its 3-term periodization; a C^inf partition profile."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 1.0
    if np.any(m):
        tm = t[m]
        denom = _v(tm - 1.0) + _v(tm) + _v(tm + 1.0)
        out[m] = _v(tm) / denom
    return out


class BumpFn:
    """Tensor-product bump psi(x) = prod_j (1/2) psi0(x_j / 2)."""

    def __init__(self, dimension):
        if dimension < 1:
            raise ParameterError("dimension must be >= 1")
        self.dimension = dimension

    @property
    def support_exponent(self):
        """Smallest r with supp(psi) inside {|y| < 2^r} up to the corner set."""
        return 1.0 + 0.5 * math.log2(self.dimension)

    def profile(self, t):
        """The one-dimensional factor, supported on (-2, 2)."""
        return 0.5 * _psi0(0.5 * np.asarray(t, dtype=float))

    def axis_factor(self, t, power=0):
        """t^power * profile(t), the per-axis piece of psi^beta."""
        base = self.profile(t)
        if power:
            base = base * np.asarray(t, dtype=float) ** power
        return base

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.dimension == 1:
            return self.profile(x)
        if x.shape[-1] != self.dimension:
            raise ParameterError("points must have %d coordinates" % self.dimension)
        out = self.profile(x[..., 0])
        for a in range(1, self.dimension):
            out = out * self.profile(x[..., a])
        return out

    def partition_sum(self, t):
        """sum_m profile(t - m) over the integers; identically 1."""
        t = np.asarray(t, dtype=float)
        lo = int(np.floor(np.min(t))) - 2
        hi = int(np.ceil(np.max(t))) + 2
        total = np.zeros_like(t)
        for m in range(lo, hi + 1):
            total += self.profile(t - m)
        return total

    def min_on_unit_cube(self, n=2048):
        """inf over [0, 1] of the one-dimensional factor (positive)."""
        t = np.linspace(0.0, 1.0, n)
        return float(np.min(self.profile(t)))


def psi_bump(dimension):
    """The package-wide smooth bump in the given dimension."""
    return BumpFn(dimension)


@dataclass
class QuarkCoeffs:
    """Sparse map (beta, nu, m) -> coefficient with decay parameter rho."""

    ndim: int
    rho: float
    entries: dict = field(default_factory=dict)

    def add(self, beta, nu, m, value):
        beta = tuple(int(b) for b in beta)
        m = tuple(int(c) for c in m)
        if len(beta) != self.ndim or len(m) != self.ndim:
            raise ParameterError("beta and m must have %d components" % self.ndim)
        if nu < 0 or any(b < 0 for b in beta):
            raise ParameterError("nu >= 0 and beta >= 0 required")
        key = (beta, int(nu), m)
        self.entries[key] = self.entries.get(key, 0.0) + float(value)
        return self

    def max_nu(self):
        return max((nu for (_, nu, _) in self.entries), default=0)

    def by_beta(self):
        """{beta: {nu: [values...]}} grouping of the cloud."""
        out = {}
        for (beta, nu, _), v in self.entries.items():
            out.setdefault(beta, {}).setdefault(nu, []).append(v)
        return out

    def __len__(self):
        return len(self.entries)


def quark_eval(bump, beta, nu, m, s, p, x, psi=None):
    """One quark 2^{-nu(s - N/p)} Psi(2^-nu)^{-1} (2^nu x - m)^beta psi(2^nu x - m).

    ``beta`` and ``m`` are length-N tuples; ``x`` is a point or array of
    points with trailing axis N (plain array for N = 1).  The scale
    factor degenerates to 2^{-nu s} when p = inf; passing no weight
    gives the classical quark.
    """
    ndim = bump.dimension
    scale = 2.0 ** (-nu * s) if p == INF else 2.0 ** (-nu * (s - ndim / p))
    if psi is not None:
        scale /= psi.at_dyadic(nu)
    x = np.asarray(x, dtype=float)
    if ndim == 1:
        y = math.ldexp(1.0, nu) * x - m[0]
        return scale * bump.axis_factor(y, beta[0])
    if x.shape[-1] != ndim:
        raise ParameterError("points must have %d coordinates" % ndim)
    out = scale
    for a in range(ndim):
        y = math.ldexp(1.0, nu) * x[..., a] - m[a]
        out = out * bump.axis_factor(y, beta[a])
    return out


def _grid_axes(box, level):
    return [
        lo + np.arange(round((hi - lo) * 2.0**level) + 1) * math.ldexp(1.0, -level)
        for lo, hi in box
    ]


def synthesize(coeffs, bump, params, box, level, x_fixed=None):
    """Pointwise sum of the coefficient cloud on a grid, pruned by support.

    With ``x_fixed`` the trailing len(x_fixed) coordinates are pinned
    and the grid covers only the leading axes, i.e. the result is the
    restriction of the synthesized function to that hyperplane.  The
    sum is exact (every quark whose support meets the box contributes);
    a grid coarser than the finest quark level raises an aliasing flag.
    """
    ndim = params.N
    if bump.dimension != ndim:
        raise ParameterError("bump dimension does not match params.N")
    x_fixed = tuple(float(v) for v in (x_fixed or ()))
    gdim = ndim - len(x_fixed)
    if not 1 <= gdim <= ndim or len(box) != gdim:
        raise ParameterError("box must cover the %d free axes" % gdim)
    axes = _grid_axes(box, level)
    values = np.zeros(tuple(a.size for a in axes))
    s, p, psi = params.s, params.p, params.psi
    for (beta, nu, m), coeff in coeffs.entries.items():
        scale = 2.0 ** (-nu * s) if p == INF else 2.0 ** (-nu * (s - ndim / p))
        amp = coeff * scale / psi.at_dyadic(nu)
        if amp == 0.0:
            continue
        # pinned axes contribute plain numbers
        dead = False
        for i, xv in enumerate(x_fixed):
            y = math.ldexp(xv, nu) - m[gdim + i]
            fac = float(bump.axis_factor(y, beta[gdim + i]))
            if fac == 0.0:
                dead = True
                break
            amp *= fac
        if dead:
            continue
        slices, factors = [], []
        for a in range(gdim):
            nodes = axes[a]
            lo_x = (m[a] - 2.0) / 2.0**nu
            hi_x = (m[a] + 2.0) / 2.0**nu
            i0 = int(math.ceil((lo_x - nodes[0]) * 2.0**level - 1e-9))
            i1 = int(math.floor((hi_x - nodes[0]) * 2.0**level + 1e-9))
            i0, i1 = max(i0, 0), min(i1, nodes.size - 1)
            if i0 > i1:
                dead = True
                break
            y = math.ldexp(1.0, nu) * nodes[i0 : i1 + 1] - m[a]
            slices.append(slice(i0, i1 + 1))
            factors.append(bump.axis_factor(y, beta[a]))
        if dead:
            continue
        block = functools.reduce(np.multiply.outer, factors)
        values[tuple(slices)] += amp * block
    flags = ()
    if coeffs.entries and level < coeffs.max_nu() + 1:
        flags = ("aliasing-risk",)
    return GridFunction(gdim, tuple(box), level, values, flags)


@dataclass
class CounterexampleSpec:
    """Everything needed to build and probe one counterexample function.

    ``mode`` records which block construction the sequence came from:
    "plain" for the unweighted one, "weighted" for the weight-tuned one.
    """

    N: int
    s: float
    p: float
    q: float
    jmax: int
    sequence: DyadicSequence
    psi: object = None
    mode: str = "plain"

    def __post_init__(self):
        if self.N < 2:
            raise ParameterError("need N >= 2 so there is a hyperplane to slice")
        if self.psi is None:
            self.psi = Constant(1.0)
        if self.p == INF or not self.p < self.q:
            raise ParameterError("the counterexample needs 0 < p < q <= inf")
        if self.s <= sigma_p(self.N, self.p):
            raise ParameterError("s must exceed sigma_p")
        if self.mode not in ("plain", "weighted"):
            raise ParameterError("mode must be 'plain' or 'weighted'")

    @property
    def d(self):
        return self.N - 1

    @property
    def M(self):
        return int(math.floor(self.s)) + 1

    @property
    def station_gap(self):
        """C_M = 2 (M + 2): spacing of the per-level stations on axis one."""
        return 2 * (self.M + 2)


def counterexample_coeffs(spec, jcap=None, max_entries=2_000_000):
    """Materialize the counterexample's quark coefficients.

    Level j places beta = 0 quarks at m = (C_M 2^j j, ..., C_M 2^j j, k)
    for every offset k in the level's run, with the run value as
    coefficient.  ``jcap`` truncates the cloud (run lengths grow like
    2^j / j, so full materialization is only possible for moderate j).
    """
    ndim = spec.N
    cm = spec.station_gap
    jcap = spec.jmax if jcap is None else min(jcap, spec.jmax)
    total = sum(
        r.length for r in spec.sequence.runs if 1 <= r.level <= jcap and r.value
    )
    if total > max_entries:
        raise ParameterError(
            "cloud would hold %d entries; lower jcap (<= %d requested)" % (total, jcap)
        )
    bump = psi_bump(ndim)
    coeffs = QuarkCoeffs(ndim=ndim, rho=bump.support_exponent + 1.0)
    zero = (0,) * ndim
    for r in sorted(spec.sequence.runs, key=lambda r: r.level):
        j = r.level
        if j > jcap or r.length == 0 or r.value == 0.0:
            continue
        station = cm * (1 << j) * j
        head = (station,) * (ndim - 1)
        for k in range(r.start, r.start + r.length):
            coeffs.add(zero, j, head + (k,), r.value)
    return coeffs


def lambda_profile(spec, bump, x_last, j):
    """Lambda_j(x) = sum_k lambda_{j,k} 2^{j/p} psi(2^j x - k); at most 4 terms."""
    if j > spec.jmax:
        raise ParameterError("level %d beyond the construction's jmax" % j)
    seq = spec.sequence
    base = math.floor(math.ldexp(x_last, j))
    total = 0.0
    for k in range(base - 1, base + 3):
        if k < 0:
            continue
        v = seq.lookup(j, k)
        if v:
            total += v * float(bump.profile(math.ldexp(x_last, j) - k))
    return 2.0 ** (j / spec.p) * total


def coeff_norm(coeffs, p, q, rho=None):
    """sup_beta 2^{rho |beta|} b_{p,q}(lambda^beta) of a coefficient cloud."""
    rho = coeffs.rho if rho is None else rho
    if rho <= 0:
        raise ParameterError("rho must be positive")
    best = 0.0
    for beta, levels in coeffs.by_beta().items():
        norm = bpq_from_levels(levels, p, q).total
        best = max(best, 2.0 ** (rho * sum(beta)) * norm)
    return best


def write_coeffs_csv(coeffs, path):
    n = coeffs.ndim
    cols = ["beta%d" % i for i in range(n)] + ["nu"] + ["m%d" % i for i in range(n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols + ["value"])
        for (beta, nu, m), v in sorted(coeffs.entries.items()):
            w.writerow(list(beta) + [nu] + list(m) + [repr(v)])


def read_coeffs_csv(path, rho=None):
    with open(path, newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        n = sum(1 for h in header if h.startswith("beta"))
        if n < 1 or len(header) != 2 * n + 2:
            raise ParameterError("bad coefficient CSV header: %r" % header)
        coeffs = QuarkCoeffs(ndim=n, rho=rho or (1.0 + 0.5 * math.log2(n) + 1.0))
        for row in reader:
            if not row:
                continue
            beta = tuple(int(x) for x in row[:n])
            nu = int(row[n])
            m = tuple(int(x) for x in row[n + 1 : 2 * n + 1])
            coeffs.add(beta, nu, m, float(row[2 * n + 1]))
    return coeffs
