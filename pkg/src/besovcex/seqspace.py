"""Two-index dyadic sequence kernel.

Sequences live on dyadic blocks T_j = [[2^j, 2^{j+1}-1]]; each level
holds at most one constant-valued contiguous run, so a level costs O(1)
memory and offsets stay exact Python integers up to any level.  On top
of the storage sit the b_{p,q} norms, the condensation-test bounds, the
exact amalgam identity, and the shifted block constructions whose
witness profiles drive every divergence scan in this package.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import admissible
from .errors import DomainError, MonotonicityError, ParameterError

__all__ = [
    "LevelRun",
    "DyadicSequence",
    "BpqNormResult",
    "lp_norm",
    "bpq_norm",
    "bpq_from_levels",
    "condensation_check",
    "phi_bound",
    "lemma32_check",
    "amalgam_integral",
    "construct_zeta",
    "construct_lambda",
    "construct_weighted_lambda",
    "witness_profile",
    "techlemma_constant",
    "write_sequence_csv",
    "read_sequence_csv",
]

INF = math.inf


@dataclass(frozen=True)
class LevelRun:
    """A constant run value on offsets [start, start+length) of level j."""

    level: int
    start: int
    length: int
    value: float

    def __post_init__(self):
        if self.level < 0:
            raise ParameterError("run level must be >= 0")
        if self.length < 0:
            raise ParameterError("run length must be >= 0")
        if self.value < 0:
            raise ParameterError("run value must be >= 0")
        if self.length > 0:
            lo, hi = 1 << self.level, 1 << (self.level + 1)
            if self.start < lo or self.start + self.length > hi:
                raise ParameterError(
                    "run [%d, %d) escapes block T_%d = [%d, %d)"
                    % (self.start, self.start + self.length, self.level, lo, hi)
                )

    @property
    def x_left(self):
        return self.start / (1 << self.level)

    @property
    def x_right(self):
        return (self.start + self.length) / (1 << self.level)


@dataclass(frozen=True)
class DyadicSequence:
    """Sparse two-index sequence lambda_{j,k}, one run per level.

    ``sweep_ends`` lists the levels whose run ends flush at the right
    edge of its block (x = 2), i.e. where a shifted sweep completed.
    """

    runs: tuple
    max_level: int
    sweep_ends: tuple = field(default=())

    def __post_init__(self):
        index = {r.level: r for r in self.runs}
        if len(index) != len(self.runs):
            raise ParameterError("at most one run per level")
        if any(r.level > self.max_level for r in self.runs):
            raise ParameterError("run level exceeds max_level")
        object.__setattr__(self, "_by_level", index)

    def run_at(self, level):
        return self._by_level.get(level)

    def lookup(self, level, offset):
        """lambda_{level, offset}; zero off the stored runs."""
        r = self.run_at(level)
        if r is None or r.length == 0:
            return 0.0
        if r.start <= offset < r.start + r.length:
            return r.value
        return 0.0

    def level_mass(self, level, p):
        """sum_k lambda_{level,k}^p (max for p = inf)."""
        r = self.run_at(level)
        if r is None or r.length == 0 or r.value == 0.0:
            return 0.0
        if p == INF:
            return r.value
        return r.length * r.value**p


class BpqNormResult:
    """Inner l^p level norms and their l^q aggregation."""

    def __init__(self, per_level, total):
        self.per_level = np.asarray(per_level, dtype=float)
        self.total = float(total)

    def __repr__(self):
        return "BpqNormResult(total=%r, levels=%d)" % (self.total, len(self.per_level))


def lp_norm(values, p):
    """l^p norm of a finite list; max modulus for p = inf; 0 on empty."""
    if p != INF and p <= 0:
        raise ParameterError("p must be positive or inf")
    v = np.abs(np.asarray(values, dtype=float))
    if v.size == 0:
        return 0.0
    if p == INF:
        return float(np.max(v))
    return float(np.sum(v**p) ** (1.0 / p))


def _lq_aggregate(level_norms, q):
    a = np.asarray(level_norms, dtype=float)
    if a.size == 0:
        return 0.0
    if q == INF:
        return float(np.max(a))
    return float(np.sum(a**q) ** (1.0 / q))


def bpq_from_levels(levels, p, q, level_weights=None):
    """b_{p,q} norm of explicit per-level value lists.

    ``levels`` maps level -> list of entries (list index works too);
    ``level_weights`` optionally multiplies each level's l^p norm
    before the outer l^q aggregation.
    """
    if isinstance(levels, dict):
        items = sorted(levels.items())
    else:
        items = list(enumerate(levels))
    per = []
    for j, vals in items:
        w = 1.0 if level_weights is None else float(level_weights[j])
        per.append(w * lp_norm(vals, p))
    return BpqNormResult(per, _lq_aggregate(per, q))


def bpq_norm(seq, p, q, level_weights=None):
    """b_{p,q} norm of a DyadicSequence: inner l^p in k, outer l^q in j."""
    if p != INF and p <= 0:
        raise ParameterError("p must be positive or inf")
    if q != INF and q <= 0:
        raise ParameterError("q must be positive or inf")
    per = []
    for j in range(seq.max_level + 1):
        mass = seq.level_mass(j, p)
        norm = mass if p == INF else mass ** (1.0 / p) if mass > 0 else 0.0
        if level_weights is not None:
            norm *= float(level_weights[j])
        per.append(norm)
    return BpqNormResult(per, _lq_aggregate(per, q))


def _check_nonincreasing(lam, strict):
    if np.any(lam < 0):
        raise ParameterError("sequence must be nonnegative")
    if strict and lam.size > 2 and np.any(np.diff(lam[1:]) > 0):
        raise MonotonicityError("sequence is not nonincreasing from index 1")


def condensation_check(lam, jmax=20, strict=True):
    """Cauchy condensation bounds for a truncated nonincreasing sequence.

    ``lam[i]`` is the i-th term (index 0 unused by the bounds); entries
    beyond the list are zero.  Returns (lower, condensed, upper, holds)
    with lower = sum_{j>=1} lam_j, condensed = sum_{j<=jmax} 2^j
    lam_{2^j} and upper = 2*lower.  jmax must cover the support
    (2^(jmax+1) >= len(lam)), otherwise the truncated condensed sum is
    not comparable to the full lower sum.
    """
    lam = np.asarray(lam, dtype=float)
    if jmax < 0:
        raise ParameterError("jmax must be >= 0")
    if (1 << (jmax + 1)) < lam.size:
        raise ParameterError(
            "jmax=%d does not cover the %d-term truncation" % (jmax, lam.size)
        )
    _check_nonincreasing(lam, strict)
    lower = float(np.sum(lam[1:]))
    upper = 2.0 * lower
    condensed = 0.0
    for j in range(jmax + 1):
        idx = 1 << j
        if idx < lam.size:
            condensed += (1 << j) * float(lam[idx])
    slack = 1e-12 * max(1.0, upper)
    holds = (lower <= condensed + slack) and (condensed <= upper + slack)
    return lower, condensed, upper, holds


def phi_bound(x):
    """4/x on [1, inf), 4(1 - log2 x)/x on (0, 1)."""
    if x <= 0:
        raise DomainError("phi is defined for x > 0")
    if x >= 1.0:
        return 4.0 / x
    return (4.0 / x) * (1.0 - math.log2(x))


def lemma32_check(lam, x, jmax=20, strict=True):
    """Dilated condensation bound sum_j 2^j lam_{floor(2^j x)} <= phi(x) sum lam.

    Returns (lhs, rhs, holds); the left side is truncated at jmax, the
    right side sums the whole (finitely supported) sequence.
    """
    lam = np.asarray(lam, dtype=float)
    if x <= 0:
        raise DomainError("x must be positive")
    _check_nonincreasing(lam, strict)
    lhs = 0.0
    for j in range(jmax + 1):
        idx = math.floor(math.ldexp(x, j))
        if 0 <= idx < lam.size:
            lhs += (1 << j) * float(lam[idx])
    rhs = phi_bound(x) * float(np.sum(lam[1:]))
    holds = lhs <= rhs + 1e-12 * max(1.0, rhs)
    return lhs, rhs, holds


def amalgam_integral(lam, p):
    """Exact amalgam identity between l^p and a dyadic-stratified integral.

    ``lam`` lists lambda_1..lambda_n (indexed from 1).  Returns
    (lhs, rhs) with lhs the plain l^p norm and rhs the integral
    (int_[1,2] sum_k 2^k |lambda_{floor(2^k x)}|^p dx)^(1/p), evaluated
    exactly by midpoint values on the finest dyadic cells: the
    integrand is piecewise constant between consecutive breakpoints
    m/2^K, so the quadrature is exact up to roundoff and the two sides
    agree to accumulation error.
    """
    if not 0 < p < INF:
        raise ParameterError("p must be finite and positive")
    lam = np.abs(np.asarray(lam, dtype=float))
    n = lam.size
    if n == 0:
        return 0.0, 0.0
    powed = lam**p
    lhs = float(np.sum(powed)) ** (1.0 / p)
    kmax = int(math.floor(math.log2(n)))  # finest level with T_k intersecting [1, n]
    m = np.arange(1 << kmax, 1 << (kmax + 1), dtype=np.int64)
    num = 2 * m + 1  # midpoint numerators at scale 2^(kmax+1)
    total = np.zeros(m.size)
    for k in range(kmax + 1):
        idx = num >> (kmax + 1 - k)  # floor(2^k x_mid), exact in integers
        inside = idx <= n  # lambda index range is 1..n
        vals = np.where(inside, powed[np.minimum(idx, n) - 1], 0.0)
        total += math.ldexp(1.0, k) * vals
    rhs = (float(np.sum(total)) * math.ldexp(1.0, -kmax)) ** (1.0 / p)
    return lhs, rhs


def _rearranged_blocks(lengths, values):
    """The shifted block layout shared by every construction.

    Level j's run (``lengths[j]`` slots at ``values[j]``) is anchored so
    its left x-edge continues the previous run's right x-edge; a run
    that would overrun its block is placed flush right (right edge at
    x = 2), which completes a sweep, and the next level restarts at
    x = 1.  Anchors double exactly in integer arithmetic.
    """
    runs = []
    sweep_ends = []
    fresh = True
    edge_num = 0  # right-edge numerator at scale prev_level
    prev_level = 0
    for j, (length, value) in enumerate(zip(lengths, values)):
        length = int(length)
        if length <= 0:
            continue
        if length > (1 << j):
            raise ParameterError("level %d pattern longer than its block" % j)
        cap = 1 << (j + 1)
        start = (1 << j) if fresh else (edge_num << (j - prev_level))
        if start + length >= cap:
            start = cap - length
            runs.append(LevelRun(j, start, length, float(value)))
            sweep_ends.append(j)
            fresh = True
        else:
            runs.append(LevelRun(j, start, length, float(value)))
            edge_num = start + length
            prev_level = j
            fresh = False
    return runs, sweep_ends


def construct_zeta(jmax):
    """The shifted block sequence: level j carries floor(2^j/j) slots of value j.

    Every level's block mean stays <= 1 while each completed sweep
    re-covers all of [1, 2), so the witness floor(2^j x) hits the value
    j at infinitely many levels for every x.
    """
    if jmax < 1:
        raise ParameterError("jmax must be >= 1")
    lengths = [0] + [(1 << j) // j for j in range(1, jmax + 1)]
    values = list(range(jmax + 1))
    runs, ends = _rearranged_blocks(lengths, values)
    return DyadicSequence(tuple(runs), jmax, tuple(ends))


def construct_lambda(p, q, jmax):
    """Sequence with finite b_{p,q} norm whose 2^{j/p}-witness is unbounded.

    For q = inf the runs carry 2^{-j/p} zeta_k^{1/p}; for q < inf the
    zeta values are first damped by j^{-sqrt(p/q)} so the level masses
    become q/p-power summable while the witness still grows like
    j^{(1-sqrt(p/q))/p} along covered levels.  Requires p < q.
    """
    _validate_pq(p, q)
    zeta = construct_zeta(jmax)
    damp = 0.0 if q == INF else math.sqrt(p / q)
    runs = []
    for r in zeta.runs:
        j = r.level
        # 2^{-j/p} (j^{-damp} * j)^{1/p}, the damping folded into the exponent
        val = j ** ((1.0 - damp) / p) * 2.0 ** (-j / p)
        runs.append(LevelRun(j, r.start, r.length, val))
    return DyadicSequence(tuple(runs), jmax, zeta.sweep_ends)


def construct_weighted_lambda(p, q, psi, jmax):
    """Block sequence tuned to an admissible weight failing the chi-series test.

    chi = qp/(q-p) (chi = p when q = inf).  The weight series
    sum_j Psi(2^-j)^chi must diverge; for q < inf and increasing Psi
    the sharpness condition chi < 1/c_inf is also required.  The q=inf
    branch lays out blocks of density gamma_j = beta_j / sum_{k<=j}
    beta_k with beta_j = Psi(2^-j)^p, so the weighted witness at a
    covered level equals the partial sum of the divergent beta series.
    The q < inf branch uses the q/(q-p)-power densities with the tau
    damping, making the weighted witness exactly 1 per covered
    level while the b_{p,q} norm stays finite.
    """
    _validate_pq(p, q)
    chi = p if q == INF else q * p / (q - p)
    verdict = admissible.weight_series(psi, chi, max(2 * jmax, 4096)).verdict
    if verdict != "diverges":
        raise ParameterError(
            "weight series with chi=%g converges; the construction needs "
            "divergence" % chi
        )
    if q != INF and psi.direction == "increasing":
        cinf = admissible.c_infinity(psi)
        if cinf > 0 and chi >= 1.0 / cinf:
            raise ParameterError(
                "sharpness condition fails: chi=%g >= 1/c_inf=%g" % (chi, 1.0 / cinf)
            )
    beta = np.array([psi.at_dyadic(j) ** p for j in range(jmax + 1)])
    if q == INF:
        gamma = beta / np.cumsum(beta)
    else:
        a = beta ** (q / (q - p))
        gamma = a / np.cumsum(a)
    lengths = [0] + [
        int(math.floor(math.ldexp(gamma[j], j))) for j in range(1, jmax + 1)
    ]
    values = [0.0] * (jmax + 1)
    for j in range(1, jmax + 1):
        if q == INF:
            values[j] = (1.0 / gamma[j]) ** (1.0 / p) * 2.0 ** (-j / p)
        else:
            # tau_j^{1/p} (1/gamma~_j)^{1/p} 2^{-j/p} collapses to
            # beta_j^{-1/p} 2^{-j/p}: the weighted witness is exactly 1.
            values[j] = beta[j] ** (-1.0 / p) * 2.0 ** (-j / p)
    placed, ends = _rearranged_blocks(lengths, values)
    return DyadicSequence(tuple(placed), jmax, tuple(ends))


def _validate_pq(p, q):
    if p != INF and p <= 0 or q != INF and q <= 0:
        raise ParameterError("p, q must be positive or inf")
    if p == INF or not (p < q):
        raise ParameterError("the construction targets 0 < p < q <= inf only")


def witness_profile(seq, x, p, jmax):
    """The vector (2^{j/p} lambda_{j, floor(2^j x)})_{j=0..jmax}."""
    out = np.zeros(jmax + 1)
    for j in range(jmax + 1):
        idx = math.floor(math.ldexp(x, j))
        val = seq.lookup(j, idx)
        if val:
            out[j] = 2.0 ** (j / p) * val
    return out


def techlemma_constant(entries, alpha, p, ndim, samples):
    """Smallest C in the dyadic Markov-type coefficient bound.

    ``entries`` maps (beta, j, k) -> value with beta and k tuples of
    length ``ndim``; ``alpha`` is a positive summable truncation; the
    bound 2^{jN} |lam^beta_{j,floor(2^j x)}|^p <= C max(1, |beta|^{N+1})
    / alpha_j * sum_k |lam^beta_{j,k}|^p is checked at every sample in
    [1,2]^N and the minimal admissible C is returned (0 if no sample
    meets a nonzero coefficient).
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise ParameterError("sample set must be nonempty")
    if samples.shape[1] != ndim:
        raise ParameterError("samples must have %d coordinates" % ndim)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ParameterError("alpha must be positive")
    groups = {}
    for (beta, j, k), v in entries.items():
        groups.setdefault((tuple(beta), int(j)), {})[tuple(k)] = float(v)
    best = 0.0
    for (beta, j), kmap in groups.items():
        if j >= alpha.size:
            raise ParameterError("alpha truncation shorter than level %d" % j)
        denom = max(1.0, float(sum(beta)) ** (ndim + 1)) / float(alpha[j])
        mass = sum(abs(v) ** p for v in kmap.values())
        if mass == 0.0:
            continue
        for x in samples:
            key = tuple(math.floor(math.ldexp(xi, j)) for xi in x)
            v = kmap.get(key)
            if v:
                lhs = 2.0 ** (j * ndim) * abs(v) ** p
                best = max(best, lhs / (denom * mass))
    return best


def write_sequence_csv(seq, path):
    """One LevelRun per row, levels ascending, header level,start,length,value."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "start", "length", "value"])
        for r in sorted(seq.runs, key=lambda r: r.level):
            w.writerow([r.level, r.start, r.length, repr(r.value)])


def _parse_value(text):
    text = text.strip()
    if text.lstrip("+-").lower().startswith("0x"):
        return float.fromhex(text)
    return float(text)


def read_sequence_csv(path):
    runs = []
    with open(path, newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        if [h.strip() for h in header] != ["level", "start", "length", "value"]:
            raise ParameterError("bad sequence CSV header: %r" % header)
        for row in reader:
            if not row:
                continue
            runs.append(
                LevelRun(int(row[0]), int(row[1]), int(row[2]), _parse_value(row[3]))
            )
    max_level = max((r.level for r in runs), default=0)
    ends = tuple(
        r.level
        for r in sorted(runs, key=lambda r: r.level)
        if r.length > 0 and r.start + r.length == 1 << (r.level + 1)
    )
    return DyadicSequence(tuple(runs), max_level, ends)
