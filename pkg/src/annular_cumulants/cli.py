"""Command line entry point.

Exit status: 0 on success, 1 when a validation or report fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence

from .combinatorics import Permutation, SetPartition, format_fraction, tau_shape
from .cumulants import (
    MissingMoment,
    TableCumulants,
    TableOracle,
    alpha_pq_from_cumulants,
    free_cumulant,
    kappa_pq,
    moment_from_free_cumulants,
    parse_word,
)
from .matrix_cumulants import (
    MissingTrace,
    MatrixCumulants,
    asymptotic_order_sweep,
    limit_oracle,
    load_model,
    parse_fd,
    second_order_limit,
    vertex_cumulant,
)
from .mc_lab import BATTERIES, BatteryConfig, validate_against_exact
from .noncrossing import (
    AnnulusShape,
    SizeBoundExceeded,
    annular_noncrossing,
    disc_noncrossing,
    noncrossing_perms,
    ps_prime_pairs,
)
from .premaps import InvalidPremap, NoFamily, Premap, premap_euler, premap_kreweras, premap_violation, trisect
from .sd_poset import (
    IncomparablePair,
    mobius_closed,
    mobius_closed_corrected,
    mobius_recursive,
)
from .weingarten import SingularGram, gamma, gamma_sp, wg_context


class UsageError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


class ReportFailure(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    options: dict = field(default_factory=dict)
    output: Optional[str] = None
    fmt: str = "json"
    as_float: bool = False
    golden: Optional[str] = None
    jobs: int = 1

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        opts = dict(vars(ns))
        common = {k: opts.pop(k) for k in ("command", "out", "format", "float", "golden", "jobs")}
        return cls(common["command"], opts, common["out"], common["format"], common["float"], common["golden"], common["jobs"])


def _num(x, as_float: bool):
    if as_float:
        return float(x)
    return format_fraction(x)


# Subcommands


def cmd_enumerate(cfg: RunConfig):
    o = cfg.options
    family = o["family"]
    if family == "nc":
        return [str(p) for p in noncrossing_perms(o["p"] + o["q"])]
    if o["q"] < 1 or o["p"] < 1:
        raise UsageError("--q", "annular families need p, q >= 1")
    shape = AnnulusShape(o["p"], o["q"])
    if family == "disc":
        return [str(p) for p in disc_noncrossing(shape)]
    if family == "ann":
        return [str(p) for p in annular_noncrossing(shape)]
    return [{"perm": str(x.perm), "partition": [list(b) for b in x.partition.blocks]} for x in ps_prime_pairs(shape)]


def cli_elements(table) -> list:
    """Elements grouped by permutation, then by tag, so each permutation sits next to its hatted copy."""
    first = {}
    for i, e in enumerate(table.elements):
        first.setdefault(e.perm, i)
    return sorted(table.elements, key=lambda e: (first[e.perm], int(e.tag)))


def cmd_mobius(cfg: RunConfig):
    o = cfg.options
    shape = AnnulusShape(o["p"], o["q"])
    table = mobius_recursive(shape)
    elems = cli_elements(table)
    if o["pair"] is not None:
        i, j = o["pair"]
        if not (0 <= i < len(elems) and 0 <= j < len(elems)):
            raise UsageError("--pair", f"indices must lie in [0, {len(elems) - 1}]")
        a, b = elems[i], elems[j]
        if not table.leq(a, b):
            raise UsageError("--pair", f"{a.label()} is not below {b.label()}")
        value = table(a, b)
        closed = mobius_closed(a, b)
        out = {"lower": a.label(), "upper": b.label(), "mobius": _num(value, cfg.as_float)}
        out["closed_form"] = _num(closed, cfg.as_float)
        if closed != value:
            corrected = mobius_closed_corrected(a, b)
            out["note"] = (
                f"discrepancy: the closed form gives {format_fraction(closed)}, the recursion {value}; "
                f"with the disc-to-hat correction term the closed form gives {format_fraction(corrected)}"
            )
        return out
    top = table.to_top()
    rows = []
    for idx, e in enumerate(elems):
        rows.append({"index": idx, "element": e.label(), "mobius_to_top": _num(top[e], cfg.as_float)})
    ledger = []
    for a, b in table.comparable_pairs():
        closed = mobius_closed(a, b)
        value = table(a, b)
        if closed != value:
            ledger.append(
                {
                    "lower": a.label(),
                    "upper": b.label(),
                    "recursive": _num(value, cfg.as_float),
                    "closed": _num(closed, cfg.as_float),
                    "corrected": _num(mobius_closed_corrected(a, b), cfg.as_float),
                }
            )
    return {"p": shape.p, "q": shape.q, "elements": rows, "discrepancies": ledger}


def _read_json(path: str, flag: str = "--input"):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(flag, str(exc)) from None
    except json.JSONDecodeError as exc:
        raise UsageError(flag, f"invalid JSON: {exc}") from None


def cmd_transform(cfg: RunConfig):
    o = cfg.options
    data = _read_json(o["input"])
    order = o["order"]
    f = lambda x: _num(x, cfg.as_float)
    if o["dir"] == "m2c":
        if "alpha1" not in data:
            raise UsageError("--input", "moment file needs an 'alpha1' table")
        oracle = TableOracle.from_json(data)
        out = {"kappa1": {k: f(free_cumulant(oracle, parse_word(k))) for k in data["alpha1"]}}
        if order == 2:
            out["kappa2"] = {}
            for key in data.get("alpha2", {}):
                left, right = key.split("|")
                out["kappa2"][key] = f(kappa_pq(oracle, parse_word(left), parse_word(right)))
        return out
    if "kappa1" not in data:
        raise UsageError("--input", "cumulant file needs a 'kappa1' table")
    table = TableCumulants.from_json(data)
    out = {"alpha1": {k: f(moment_from_free_cumulants(table, parse_word(k))) for k in data["kappa1"]}}
    if order == 2:
        out["alpha2"] = {}
        for key in data.get("kappa2", {}):
            left, right = key.split("|")
            out["alpha2"][key] = f(alpha_pq_from_cumulants(table, parse_word(left), parse_word(right)))
    return out


def cmd_weingarten(cfg: RunConfig):
    o = cfg.options
    ctx = wg_context(o["n"], o["dim"])
    f = lambda x: _num(x, cfg.as_float)
    if o["coset_type"]:
        ctype = tuple(sorted(o["coset_type"], reverse=True))
        if sum(ctype) != o["n"]:
            raise UsageError("--coset-type", f"parts must sum to {o['n']}")
        return {"n": o["n"], "N": o["dim"], "coset_type": list(ctype), "value": f(ctx.by_type(ctype))}
    values = {",".join(map(str, k)): f(v) for k, v in sorted(ctx.values.items(), reverse=True)}
    return {"n": o["n"], "N": o["dim"], "values": values}


def _partition(text: str, flag: str) -> SetPartition:
    try:
        return SetPartition.from_json(text)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(flag, f"cannot parse partition: {exc}") from None


def cmd_gamma(cfg: RunConfig):
    o = cfg.options
    u, v = _partition(o["u"], "--u"), _partition(o["v"], "--v")
    if u.ground != v.ground:
        raise UsageError("--v", "u and v must partition the same set")
    if not u.leq(v):
        raise UsageError("--u", "u must refine v")
    value = gamma_sp(u, v) if o["sp"] else gamma(u, v)
    return _num(value, cfg.as_float)


def _base(o) -> Permutation:
    if o.get("base"):
        try:
            return Permutation.parse(o["base"])
        except ValueError as exc:
            raise UsageError("--base", str(exc)) from None
    if o.get("p") is None:
        raise UsageError("--base", "give --base or --p/--q")
    return tau_shape(*(s for s in (o["p"], o["q"]) if s))


def cmd_premap(cfg: RunConfig):
    o = cfg.options
    op = o["op"]
    try:
        cycles_perm = Permutation.parse(o["pi"], None)
    except ValueError as exc:
        raise UsageError("--pi", str(exc)) from None
    if op == "validate":
        pts = {abs(x) for x in cycles_perm.ground}
        perm = Permutation.parse(o["pi"], sorted(pts) + [-k for k in sorted(pts)])
        bad = premap_violation(perm)
        if bad is not None:
            raise ReportFailure(json.dumps({"valid": False, "k": bad[0], "reason": bad[1]}))
        return {"valid": True, "premap": str(Premap(perm))}
    try:
        m = Premap.parse(o["pi"])
    except InvalidPremap as exc:
        try:
            m = parse_fd(o["pi"])  # face representative, e.g. "(1,-2)"
        except (ValueError, InvalidPremap):
            raise UsageError("--pi", str(exc)) from None
    base = _base(o)
    if set(base.ground) != set(m.ground):
        raise UsageError("--pi", f"premap ground {list(m.ground)} does not match the base {list(base.ground)}")
    if op == "kr":
        return {"premap": str(m), "kreweras": str(premap_kreweras(m, base))}
    if op == "chi":
        return {"premap": str(m), "chi": premap_euler(m, base)}
    if o.get("p") is None or o.get("q") is None:
        raise UsageError("--p", "trisect needs --p and --q")
    try:
        family, sigma = trisect(m, AnnulusShape(o["p"], o["q"]))
    except NoFamily as exc:
        raise ReportFailure(json.dumps({"premap": str(m), "family": None, "reason": str(exc)}))
    return {"premap": str(m), "family": family.value, "permutation": str(sigma)}


def _model(o, N: int):
    data = _read_json(o["model"], "--model")
    try:
        return load_model(data, N)
    except (KeyError, ValueError) as exc:
        raise UsageError("--model", str(exc)) from None


def cmd_vertex(cfg: RunConfig):
    o = cfg.options
    N = o["dim"]
    model = _model(o, N)
    try:
        pi = parse_fd(o["pi"])
    except (ValueError, InvalidPremap) as exc:
        raise UsageError("--pi", str(exc)) from None
    u = _partition(o["u"], "--u") if o["u"] else SetPartition.one(pi.ground)
    if not pi.blocks().leq(u):
        raise UsageError("--u", "U must be coarser than the vertex partition of pi")
    value = vertex_cumulant(MatrixCumulants(model, N), u, pi)
    return {"pi": str(pi.fd()), "U": [list(b) for b in u.blocks], "N": N, "K": _num(value, cfg.as_float)}


def _int_list(text: str, flag: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(flag, f"expected comma-separated integers, got {text!r}") from None


def cmd_sweep(cfg: RunConfig):
    o = cfg.options
    dims = _int_list(o["dims"], "--dims")
    if len(dims) < 2:
        raise UsageError("--dims", "need at least two dimensions")
    base = _model(o, dims[0])
    if not hasattr(base, "at"):
        raise UsageError("--model", "sweeps need an ensemble fixture that can change dimension")
    shapes = [_int_list(s, "--sizes") for s in o["sizes"]] if o["sizes"] else [[2], [1, 1], [2, 1, 1]]
    sweeps = [asymptotic_order_sweep(base.at, s, dims) for s in shapes]
    report = {"dims": dims, "order_sweeps": [s.to_json() for s in sweeps]}
    ok = all(s.ok for s in sweeps)
    if o["limit"]:
        oracle = limit_oracle(base)
        limits = []
        for text in o["limit"]:
            p, q = _int_list(text, "--limit")
            rep = second_order_limit(base.at, oracle, p, q, dims)
            limits.append(rep.to_json())
            ok = ok and rep.ok
        report["two_vertex_limits"] = limits
    report["ok"] = ok
    if not ok:
        raise ReportFailure(json.dumps(report, indent=2))
    return report


def cmd_simulate(cfg: RunConfig):
    o = cfg.options
    if o["samples"] < 2:
        raise UsageError("--samples", "need at least two samples")
    model = _model(o, o["dim"]) if o["model"] else None
    config = BatteryConfig(o["battery"], o["dim"], o["samples"], o["seed"], jobs=cfg.jobs, model=model)
    report = validate_against_exact(config).to_json()
    if not report["ok"]:
        raise ReportFailure(json.dumps(report, indent=2))
    return report


COMMANDS = {
    "enumerate": cmd_enumerate,
    "mobius": cmd_mobius,
    "transform": cmd_transform,
    "weingarten": cmd_weingarten,
    "gamma": cmd_gamma,
    "premap": cmd_premap,
    "vertex": cmd_vertex,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
}


# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="annular-cumulants", description="Annular noncrossing combinatorics and matrix cumulants.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--float", action="store_true", help="print numbers as floats instead of exact fractions")
    common.add_argument("--out", "--report", dest="out", help="write output to this file")
    common.add_argument("--golden", help="compare output with this file; exit 1 on mismatch")
    common.add_argument("--jobs", type=int, default=1, help="worker cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common], help="list noncrossing permutations")
    p.add_argument("--family", choices=("nc", "disc", "ann", "ps-prime"), required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, default=0)

    p = sub.add_parser("mobius", parents=[common], help="Mobius function of the annular poset")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--pair", type=int, nargs=2, metavar=("A", "B"))

    p = sub.add_parser("transform", parents=[common], help="moments to cumulants and back")
    p.add_argument("--dir", choices=("m2c", "c2m"), required=True)
    p.add_argument("--order", type=int, choices=(1, 2), default=2)
    p.add_argument("--input", required=True)

    p = sub.add_parser("weingarten", parents=[common], help="orthogonal Weingarten values")
    p.add_argument("--n", type=int, required=True, help="half the number of matrix entries")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--coset-type", dest="coset_type", type=lambda s: [int(x) for x in s.split(",")])

    p = sub.add_parser("gamma", parents=[common], help="leading Weingarten cumulant coefficient")
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--sp", action="store_true", help="quaternionic variant")

    p = sub.add_parser("premap", parents=[common], help="premap operations")
    p.add_argument("--op", choices=("validate", "kr", "chi", "trisect"), required=True)
    p.add_argument("--pi", required=True)
    p.add_argument("--base")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)

    p = sub.add_parser("vertex", parents=[common], help="vertex cumulant of a fixture")
    p.add_argument("--model", required=True)
    p.add_argument("--pi", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--u")

    p = sub.add_parser("sweep", parents=[common], help="order and limit sweeps over N")
    p.add_argument("--model", required=True)
    p.add_argument("--dims", required=True)
    p.add_argument("--sizes", action="append", help="vertex sizes such as 2,1,1 (repeatable)")
    p.add_argument("--limit", action="append", help="two-vertex limit p,q (repeatable)")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo battery against exact values")
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--battery", choices=BATTERIES, default="haar-basic")
    p.add_argument("--model")
    return parser


def render(result: Any, fmt: str) -> str:
    if fmt == "csv" and isinstance(result, list):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in result:
            if isinstance(row, dict):
                writer.writerow([row["perm"], json.dumps(row["partition"])])
            else:
                writer.writerow([row])
        return buf.getvalue()
    if fmt == "csv":
        raise UsageError("--format", "csv is only available for enumerate")
    return json.dumps(result, indent=None if isinstance(result, (list, str)) else 2) + "\n"


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        if cfg.jobs < 1:
            raise UsageError("--jobs", "must be at least 1")
        result = COMMANDS[cfg.subcommand](cfg)
        text = render(result, cfg.fmt)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SizeBoundExceeded, SingularGram) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ReportFailure as exc:
        _emit(str(exc) + "\n", cfg, stdout)
        return 1
    except (MissingMoment, MissingTrace, IncomparablePair) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(text, cfg, stdout)
    if cfg.golden:
        with open(cfg.golden) as fh:
            if fh.read() != text:
                print(f"error: output differs from {cfg.golden}", file=sys.stderr)
                return 1
    return 0


def _emit(text: str, cfg: RunConfig, stdout) -> None:
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    return run(RunConfig.from_namespace(ns))


if __name__ == "__main__":
    sys.exit(main())
