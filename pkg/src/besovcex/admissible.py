"""Admissible weight functions on (0, 1].

An admissible weight is positive and monotone on (0, 1] with
Psi(2^-j) comparable to Psi(2^-2j) uniformly in j, i.e. at most
logarithmic growth or decay near zero.  Three closed-form families are
provided (constant, log-power, log-log-power) plus a tabulated escape
hatch.  Closed forms let the convergence verdict of the dyadic weight
series be decided analytically instead of by inspecting partial sums.
"""

import math

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "AdmissibleFn",
    "Constant",
    "LogPower",
    "LogLogPower",
    "Tabulated",
    "admissibility_check",
    "c_infinity",
    "weight_series",
    "parse_weight",
    "WeightSeriesResult",
]


class AdmissibleFn:
    """Base class: a positive monotone weight on (0, 1]."""

    #: "constant", "increasing" or "decreasing" as a function of t on (0, 1]
    direction = "constant"

    def _raw(self, t):
        raise NotImplementedError

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0.0) or np.any(t > 1.0):
            raise DomainError("weight functions are defined on (0, 1] only")
        out = self._raw(t)
        return float(out) if out.ndim == 0 else out

    def at_dyadic(self, j):
        """Psi(2^-j), computed from j directly so huge j stay finite."""
        raise NotImplementedError

    def c_infinity_limit(self):
        """Analytic t -> 0 limit of log2(Psi(t)/Psi(t^2)), or None."""
        return None

    def series_verdict(self, chi):
        """Analytic verdict for sum_j Psi(2^-j)^chi, or None if unknown."""
        return None

    def spec_string(self):
        raise NotImplementedError

    def __repr__(self):
        return "%s(%s)" % (type(self).__name__, self.spec_string())


class Constant(AdmissibleFn):
    def __init__(self, a=1.0):
        if a <= 0:
            raise ParameterError("constant weight must be positive")
        self.a = float(a)

    direction = "constant"

    def _raw(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.a)

    def at_dyadic(self, j):
        return self.a

    def c_infinity_limit(self):
        return 0.0

    def series_verdict(self, chi):
        return "diverges"

    def spec_string(self):
        return "constant:%r" % self.a


class LogPower(AdmissibleFn):
    """Psi(t) = |log2(c t)|^b on (0, 1] with 0 < c < 1.

    At dyadic arguments Psi(2^-j) = (j + a0)^b with a0 = -log2(c) > 0.
    """

    def __init__(self, c, b):
        if not 0.0 < c < 1.0:
            raise ParameterError("log-power weight requires 0 < c < 1")
        self.c = float(c)
        self.b = float(b)
        self.a0 = -math.log2(self.c)

    @property
    def direction(self):
        if self.b == 0.0:
            return "constant"
        # |log2(ct)| falls as t grows, so the sign of b flips the direction.
        return "decreasing" if self.b > 0 else "increasing"

    def _raw(self, t):
        return np.abs(np.log2(self.c * t)) ** self.b

    def at_dyadic(self, j):
        return (j + self.a0) ** self.b

    def c_infinity_limit(self):
        # log2 ratio = b*log2((a0+u)/(a0+2u)) -> -b as u -> infinity.
        return max(0.0, -self.b)

    def series_verdict(self, chi):
        return "converges" if self.b * chi < -1.0 else "diverges"

    def spec_string(self):
        return "logpow:c=%r,b=%r" % (self.c, self.b)


class LogLogPower(AdmissibleFn):
    """Psi(t) = (log2 |log2(c t)|)^b on (0, 1] with 0 < c < 1/2.

    c < 1/2 keeps |log2(ct)| > 1 on all of (0, 1] so the outer log is
    positive; c >= 1/2 would make Psi vanish or blow up at t = 1.
    """

    def __init__(self, c, b):
        if not 0.0 < c < 0.5:
            raise ParameterError(
                "log-log-power weight requires 0 < c < 1/2 so that "
                "|log2(c t)| > 1 on (0, 1]"
            )
        self.c = float(c)
        self.b = float(b)
        self.a0 = -math.log2(self.c)

    @property
    def direction(self):
        if self.b == 0.0:
            return "constant"
        return "decreasing" if self.b > 0 else "increasing"

    def _raw(self, t):
        return np.log2(np.abs(np.log2(self.c * t))) ** self.b

    def at_dyadic(self, j):
        return math.log2(j + self.a0) ** self.b

    def c_infinity_limit(self):
        # log2(log2(a0+u)) - log2(log2(a0+2u)) -> 0 in both tails; the
        # supremum sits at an interior u and is found on the grid.
        return 0.0

    def series_verdict(self, chi):
        # (log j)^(b*chi) is never summable, whatever the sign of b*chi.
        return "diverges"

    def spec_string(self):
        return "loglogpow:c=%r,b=%r" % (self.c, self.b)


class Tabulated(AdmissibleFn):
    """Weight given by samples at t = 2^-j, extended log-linearly.

    Escape hatch for weights without a closed form; series verdicts are
    heuristic (ratio test on the tail) and flagged as such.
    """

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ParameterError("tabulated weight needs >= 2 dyadic samples")
        if np.any(values <= 0.0):
            raise ParameterError("tabulated weight must be positive")
        self.values = values
        # values[j] = Psi(2^-j): falling in j means Psi grows with t.
        diffs = np.diff(values)
        if np.all(np.abs(diffs) == 0.0):
            self.direction = "constant"
        elif np.all(diffs <= 0):
            self.direction = "increasing"
        elif np.all(diffs >= 0):
            self.direction = "decreasing"
        else:
            raise ParameterError("tabulated weight must be monotone")

    def _raw(self, t):
        j = -np.log2(t)
        jj = np.clip(j, 0.0, len(self.values) - 1.0)
        lo = np.floor(jj).astype(int)
        hi = np.minimum(lo + 1, len(self.values) - 1)
        frac = jj - lo
        logv = np.log(self.values)
        return np.exp((1.0 - frac) * logv[lo] + frac * logv[hi])

    def at_dyadic(self, j):
        jj = min(int(j), len(self.values) - 1)
        return float(self.values[jj])

    def series_verdict(self, chi):
        return None

    def spec_string(self):
        return "table:%s" % ",".join(repr(v) for v in self.values)


def admissibility_check(psi, jmax=64):
    """Doubling-scale comparison Psi(2^-j) vs Psi(2^-2j) up to jmax.

    Returns (max_ratio, monotone) where max_ratio is the worst of the
    ratio and its reciprocal over 0 <= j <= jmax and monotone reports
    sampled monotonicity on a dyadic grid.
    """
    if jmax < 1:
        raise ParameterError("jmax must be >= 1")
    worst = 1.0
    for j in range(jmax + 1):
        a = psi.at_dyadic(j)
        b = psi.at_dyadic(2 * j)
        worst = max(worst, a / b, b / a)
    vals = np.array([psi.at_dyadic(j) for j in range(jmax + 1)])
    up = np.all(np.diff(vals) >= -1e-15)
    down = np.all(np.diff(vals) <= 1e-15)
    return worst, bool(up or down)


def c_infinity(psi, grid_size=4096):
    """sup over 0 < t <= 1 of log2(Psi(t)/Psi(t^2)).

    Scanned on a logarithmic grid (t = 2^-u, u up to 64) together with
    the family's analytic t -> 0 limit.  The value at t = 1 is 0, so
    the supremum is never negative; no clamping is applied.
    """
    if grid_size < 2:
        raise ParameterError("grid_size must be >= 2")
    u = np.linspace(0.0, 64.0, grid_size)
    top = np.array([psi.at_dyadic(x) for x in u])
    bot = np.array([psi.at_dyadic(2.0 * x) for x in u])
    sup = float(np.max(np.log2(top / bot)))
    limit = psi.c_infinity_limit()
    if limit is not None:
        sup = max(sup, limit)
    return sup


class WeightSeriesResult:
    """Partial sum and convergence verdict of sum_j Psi(2^-j)^chi."""

    def __init__(self, partial_sum, verdict, analytic):
        self.partial_sum = partial_sum
        self.verdict = verdict
        self.analytic = analytic

    def __iter__(self):
        return iter((self.partial_sum, self.verdict, self.analytic))

    def __repr__(self):
        return "WeightSeriesResult(partial_sum=%r, verdict=%r, analytic=%r)" % (
            self.partial_sum,
            self.verdict,
            self.analytic,
        )


def weight_series(psi, chi, jmax):
    """Dyadic weight series sum_{1 <= j <= jmax} Psi(2^-j)^chi.

    The tail is summed from j = 1; the j = 0 term is a finite constant
    that never affects the verdict.  For the closed-form families the
    verdict is decided analytically; for tabulated weights a ratio test
    on the last decade of terms is used and ``analytic`` is False.
    """
    if chi <= 0:
        raise ParameterError("chi must be positive")
    if jmax < 1:
        raise ParameterError("jmax must be >= 1")
    j = np.arange(1, jmax + 1, dtype=float)
    if isinstance(psi, Constant):
        terms = np.full(jmax, psi.a**chi)
    elif isinstance(psi, LogPower):
        terms = (j + psi.a0) ** (psi.b * chi)
    elif isinstance(psi, LogLogPower):
        terms = np.log2(j + psi.a0) ** (psi.b * chi)
    else:
        terms = np.array([psi.at_dyadic(int(x)) ** chi for x in j])
    partial = float(np.sum(terms))
    verdict = psi.series_verdict(chi)
    analytic = verdict is not None
    if verdict is None:
        # Heuristic: compare the last decade of terms against 1/j.
        tail = terms[max(1, jmax // 2):]
        tj = j[max(1, jmax // 2):]
        verdict = "converges" if np.all(tail * tj < 0.5) else "diverges"
    return WeightSeriesResult(partial, verdict, analytic)


def parse_weight(text):
    """Parse the CLI weight syntax.

    Accepted forms: ``constant:1.0``, ``logpow:c=0.25,b=-1``,
    ``loglogpow:c=0.25,b=-1`` and ``table:v0,v1,...``.
    """
    text = text.strip()
    if ":" not in text:
        raise ParameterError("weight spec must look like 'family:params'")
    family, _, body = text.partition(":")
    family = family.strip().lower()
    if family == "constant":
        return Constant(float(body))
    if family == "table":
        return Tabulated([float(v) for v in body.split(",") if v.strip()])
    kv = {}
    for item in body.split(","):
        if not item.strip():
            continue
        key, _, val = item.partition("=")
        try:
            kv[key.strip()] = float(val)
        except ValueError:
            raise ParameterError("bad weight parameter %r" % item) from None
    if set(kv) != {"c", "b"}:
        raise ParameterError("expected parameters c=...,b=... in weight spec")
    if family == "logpow":
        return LogPower(kv["c"], kv["b"])
    if family == "loglogpow":
        return LogLogPower(kv["c"], kv["b"])
    raise ParameterError("unknown weight family %r" % family)
