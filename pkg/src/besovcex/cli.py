"""Command-line front door: construct sequences, measure norms, verify claims.

Exit codes: 0 success, 1 I/O error, 2 usage/parameter error, 3 a
verification criterion failed.  Numbers accept decimals or simple
fractions ("1/2") and q = inf is spelled "inf".  A plain-text config
file of ``key = value`` lines may supply any long-option value; command
line flags win.  Every output file embeds the resolved configuration
and the package version, so identical seed + config reproduce outputs
byte for byte.
"""

import argparse
import json
import math
import sys

from . import __version__, admissible, normest, quark, restrict, seqspace, verify
from .errors import ParameterError

INF = math.inf


def parse_number(text):
    """Decimal, simple fraction ('1/2'), or 'inf'."""
    text = str(text).strip().lower()
    if text in ("inf", "infinity", "oo"):
        return INF
    if "/" in text:
        num, _, den = text.partition("/")
        return float(num) / float(den)
    return float(text)


def read_config(path):
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError("config line %r is not key = value" % raw.strip())
            key, _, val = line.partition("=")
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _resolved(args, keys):
    pairs = []
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            pairs.append("%s=%s" % (k, v))
    return " ".join(pairs)


def _header(args, keys):
    return "# besovcex %s | %s\n" % (__version__, _resolved(args, keys))


def _apply_config(args, subparsers):
    if getattr(args, "config", None):
        sub = subparsers[args.command]
        file_vals = read_config(args.config)
        defaults = {a.dest: a.default for a in sub._actions if a.dest != "help"}
        for key, val in file_vals.items():
            if key not in defaults:
                raise ParameterError("unknown config key %r" % key)
            # a flag explicitly given on the command line wins
            if getattr(args, key) == defaults[key]:
                setattr(args, key, val)
    return args


def cmd_construct(args):
    jmax = int(args.jmax)
    if args.kind == "zeta":
        seq = seqspace.construct_zeta(jmax)
        p, q = 1.0, INF
    elif args.kind == "lambda":
        p, q = parse_number(args.p), parse_number(args.q)
        seq = seqspace.construct_lambda(p, q, jmax)
    else:
        p, q = parse_number(args.p), parse_number(args.q)
        psi = admissible.parse_weight(args.psi)
        seq = seqspace.construct_weighted_lambda(p, q, psi, jmax)
    norm = seqspace.bpq_norm(seq, p, q)
    if args.output:
        seqspace.write_sequence_csv(seq, args.output)
        with open(args.output) as fh:
            body = fh.read()
        with open(args.output, "w") as fh:
            fh.write(_header(args, ("kind", "p", "q", "psi", "jmax")))
            fh.write(body)
    print("kind=%s levels=%d runs=%d sweeps=%s" % (
        args.kind, seq.max_level + 1, len(seq.runs), list(seq.sweep_ends)))
    print("b_{%s,%s} norm = %r" % (args.p, args.q, norm.total))
    return 0


def _load_grid(args):
    if args.input.endswith(".json"):
        with open(args.input) as fh:
            return normest.grid_from_dict(json.load(fh))
    coeffs = quark.read_coeffs_csv(args.input)
    if args.box is None or args.level is None:
        raise ParameterError("coefficient input needs --box and --level")
    lo, _, hi = args.box.partition(":")
    box = ((parse_number(lo), parse_number(hi)),) * coeffs.ndim
    params = normest.BesovParams(
        N=coeffs.ndim,
        s=parse_number(args.s),
        p=parse_number(args.p),
        q=parse_number(args.q),
        d=coeffs.ndim,
        M=int(args.M) if args.M else None,
        psi=admissible.parse_weight(args.psi) if args.psi else None,
    )
    return quark.synthesize(coeffs, quark.psi_bump(coeffs.ndim), params, box, int(args.level))


def cmd_measure(args):
    g = _load_grid(args)
    kind = args.norm
    if kind in ("besov", "gbesov"):
        psi = admissible.parse_weight(args.psi) if args.psi else None
        if kind == "gbesov" and psi is None:
            raise ParameterError("gbesov needs --psi")
        params = normest.BesovParams(
            N=g.dim,
            s=parse_number(args.s),
            p=parse_number(args.p),
            q=parse_number(args.q),
            d=g.dim,
            M=int(args.M) if args.M else None,
            psi=psi,
        )
        shells = None
        if args.shells:
            a, _, b = args.shells.partition(":")
            shells = range(int(a), int(b) + 1)
        report = normest.besov_seminorm(g, params, shells)
    elif kind == "bmo":
        report = normest.NormReport(0.0, [], normest.bmo_norm(g, int(args.floor_cells)))
    elif kind == "weaklp":
        r = parse_number(args.r)
        report = normest.NormReport(0.0, [], normest.weak_lp_norm(g, r))
    elif kind == "holder":
        alpha = parse_number(args.alpha)
        report = normest.NormReport(
            0.0, [], normest.holder_norm(g, alpha, int(args.M) if args.M else None)
        )
    else:
        raise ParameterError("unknown norm %r" % kind)
    payload = {
        "version": __version__,
        "config": _resolved(
            args, ("input", "norm", "s", "p", "q", "M", "psi", "r", "alpha", "shells")
        ),
        "report": report.to_dict(),
    }
    text = json.dumps(payload, sort_keys=True, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(_header(args, ("input", "norm", "s", "p", "q")))
            report.write_csv(fh)
    print("total = %r" % report.total)
    return 0


def cmd_verify(args):
    scenario = args.scenario
    kwargs = {}
    if args.seed is not None:
        kwargs["seed"] = int(args.seed)
    if scenario in ("thm1_1", "thm1_2", "thm1_3", "thm1_4"):
        if args.samples is not None:
            kwargs["n_samples"] = int(args.samples)
        if args.jmax is not None:
            kwargs["jmax"] = int(args.jmax)
        if args.p is not None:
            kwargs["p"] = parse_number(args.p)
        if args.q is not None:
            kwargs["q"] = parse_number(args.q)
        if args.s is not None:
            kwargs["s"] = parse_number(args.s)
    if scenario in ("thm1_3", "thm1_4") and args.psi:
        kwargs["psi"] = admissible.parse_weight(args.psi)
    if scenario == "thm1_2":
        kwargs["mode"] = args.mode or "weaklp"
        kwargs.pop("s", None)
        if args.s is not None:
            kwargs["s"] = parse_number(args.s)
    if scenario in ("thm1_1", "thm1_2") and args.grid_check:
        kwargs["grid_check"] = True
    if scenario == "fact1":
        kwargs.pop("seed", None)
        if args.p is not None:
            kwargs["p"] = parse_number(args.p)
        if args.q is not None:
            kwargs["q"] = parse_number(args.q)
        if args.s is not None:
            kwargs["s"] = parse_number(args.s)
        if args.samples is not None:
            kwargs["n_quad"] = int(args.samples)
    results = verify.SCENARIOS[scenario](**kwargs)
    for res in results:
        print(res.line())
    n_fail = sum(not r.passed for r in results)
    if args.out:
        payload = {
            "version": __version__,
            "config": _resolved(
                args, ("scenario", "p", "q", "s", "psi", "mode", "samples", "jmax", "seed")
            ),
            "criteria": [
                {"name": r.name, "passed": r.passed, "detail": r.detail}
                for r in results
            ],
        }
        with open(args.out, "w") as fh:
            fh.write(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    if args.plot_data:
        _write_plot_data(args, scenario, kwargs)
    print("verdict: %s (%d/%d criteria)" % (
        "PASS" if n_fail == 0 else "FAIL", len(results) - n_fail, len(results)))
    return 0 if n_fail == 0 else 3


def _write_plot_data(args, scenario, kwargs):
    """Witness curves as gnuplot blocks (jmax, value), one block per sample."""
    p = kwargs.get("p", 1.0)
    q = kwargs.get("q", INF)
    jmax = kwargs.get("jmax", 34)
    seed = kwargs.get("seed", 2026)
    n = min(kwargs.get("n_samples", 8), 8)
    if scenario == "thm1_4":
        psi = kwargs.get("psi") or admissible.LogPower(0.25, -1.0)
        seq = seqspace.construct_weighted_lambda(p, q, psi, jmax)
        spec = quark.CounterexampleSpec(
            N=2, s=kwargs.get("s", 0.5), p=p, q=q, jmax=jmax,
            sequence=seq, psi=psi, mode="weighted",
        )
    else:
        seq = seqspace.construct_lambda(p, q, jmax)
        spec = quark.CounterexampleSpec(
            N=2, s=kwargs.get("s", 0.5), p=p, q=q, jmax=jmax, sequence=seq
        )
    report = restrict.restriction_divergence_scan(spec, n_samples=n, jmax=jmax, seed=seed)
    with open(args.plot_data, "w") as fh:
        fh.write(_header(args, ("scenario", "p", "q", "jmax", "seed")))
        for i, row in enumerate(report.curves):
            fh.write("# sample %d x=%r\n" % (i, float(report.samples[i])))
            for j, v in enumerate(row):
                fh.write("%d %r\n" % (j, float(v)))
            fh.write("\n")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="besovcex",
        description="Construct dyadic block sequences, measure grid norms, "
        "and verify the restriction dichotomy numerically.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    registry = {}

    c = sub.add_parser("construct", help="build a block sequence and write it as CSV")
    c.add_argument("kind", choices=("zeta", "lambda", "weighted"))
    c.add_argument("--p", default="1")
    c.add_argument("--q", default="inf")
    c.add_argument("--psi", default="logpow:c=0.25,b=-1")
    c.add_argument("--jmax", default="20")
    c.add_argument("--config", default=None)
    c.add_argument("-o", "--output", default=None)
    c.set_defaults(fn=cmd_construct)
    registry["construct"] = c

    m = sub.add_parser("measure", help="estimate a norm of a grid or coefficient file")
    m.add_argument("--input", required=True, help="grid .json or coefficient .csv")
    m.add_argument("--norm", required=True,
                   choices=("besov", "gbesov", "bmo", "weaklp", "holder"))
    m.add_argument("--s", default="0.5")
    m.add_argument("--p", default="1")
    m.add_argument("--q", default="inf")
    m.add_argument("--M", default=None)
    m.add_argument("--psi", default=None)
    m.add_argument("--r", default="2", help="weak-Lp exponent")
    m.add_argument("--alpha", default="0.5", help="Hoelder exponent")
    m.add_argument("--shells", default=None, help="shell range a:b")
    m.add_argument("--floor-cells", dest="floor_cells", default="2")
    m.add_argument("--box", default=None, help="lo:hi per axis (coefficient input)")
    m.add_argument("--level", default=None, help="grid level (coefficient input)")
    m.add_argument("--config", default=None)
    m.add_argument("--out", default=None)
    m.add_argument("--csv", default=None)
    m.set_defaults(fn=cmd_measure)
    registry["measure"] = m

    v = sub.add_parser("verify", help="run a verification scenario")
    v.add_argument("scenario", choices=sorted(verify.SCENARIOS))
    v.add_argument("--p", default=None)
    v.add_argument("--q", default=None)
    v.add_argument("--s", default=None)
    v.add_argument("--psi", default=None)
    v.add_argument("--mode", default=None, choices=(None, "holder", "bmo", "weaklp"))
    v.add_argument("--samples", default=None)
    v.add_argument("--jmax", default=None)
    v.add_argument("--seed", default=None)
    v.add_argument("--grid-check", dest="grid_check", action="store_true")
    v.add_argument("--config", default=None)
    v.add_argument("--out", default=None)
    v.add_argument("--plot-data", dest="plot_data", default=None)
    v.set_defaults(fn=cmd_verify)
    registry["verify"] = v
    return parser, registry


def main(argv=None):
    parser, registry = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args, registry)
        return args.fn(args)
    except ParameterError as exc:
        print("parameter error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("i/o error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
