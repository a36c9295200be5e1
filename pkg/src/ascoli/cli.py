"""Command line entry point: ``ascoli <command> [options]``.

Exit status is 0 on success, 2 when a semantic check fails (bad input,
failed certificate) and 3 when a finite resource bound was hit (horizon,
depth or bit budget too small).
"""
import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .bw import BinTree, bw_unit, load_tree, random_tree
from .counterexample import build_family, plot_rows, verify_nonuniform
from .errors import CertificateFailure, HorizonInsufficient, ResourceBound, SemanticFailure
from .exactnum import format_rational, parse_rational, real_from_rational
from .funcspace import UNIFORM, FuncSeq, UniformModulus, family_from_json
from .pipeline import (
    aa_extract_general,
    aa_extract_uniform,
    constant_family_reduction,
    grid_Y,
    pointwise_to_uniform_rate,
)

OK, SEMANTIC, RESOURCE = 0, 2, 3


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    horizon: int = 1024
    depth_budget: int = None
    k_max: int = 4
    seed: int = 0
    fmt: str = "json"
    roundtrip: bool = False
    out_dir: str = None
    extra: dict = field(default_factory=dict)

    def check(self):
        if self.command in ("aa-extract", "bw-demo") and self.horizon < (1 << self.k_max):
            raise HorizonInsufficient(f"horizon {self.horizon} < 2^{self.k_max}")


# -- output helpers ---------------------------------------------------------


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv_text(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([format_rational(v) if isinstance(v, Fraction) else v for v in row])
    return buf.getvalue()


class Output:
    """Collects named artifacts; the primary one goes to stdout."""

    def __init__(self, config, stdout):
        self.config = config
        self.stdout = stdout
        self.files = {}

    def add(self, name, text):
        self.files[name] = text

    def emit(self, primary):
        self.stdout.write(self.files[primary])
        if self.config.out_dir:
            out = Path(self.config.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            for name, text in sorted(self.files.items()):
                (out / name).write_text(text, encoding="utf-8")


# -- inputs -----------------------------------------------------------------


def _read(path):
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _tree_from_config(config):
    if config.extra.get("full") is not None:
        return BinTree.full(config.extra["full"])
    if config.inputs:
        return load_tree(_read(config.inputs[0]))
    if config.depth_budget is None:
        raise SemanticFailure("give a tree file, --full D, or --depth-budget D for a random tree")
    return random_tree(config.depth_budget, random.Random(config.seed))


def _sample_rationals(rng, count, denominator):
    out = []
    for _ in range(count):
        out.append(Fraction(rng.randint(0, denominator), denominator))
    return out


def _family_from_config(config):
    """Returns ``(family, tree or None)``."""
    if config.extra.get("tree"):
        tree = load_tree(_read(config.extra["tree"]))
        family = build_family(tree)
        members = family.members(family.max_length + 1)
        return FuncSeq.from_members(members, family.shared_modulus), tree
    if config.extra.get("builtin"):
        params = json.loads(config.extra.get("params") or "{}")
        data = {"kind": "builtin", "name": config.extra["builtin"], "params": params}
        return family_from_json(data), None
    if not config.inputs:
        raise SemanticFailure("aa-extract needs a family file, --builtin NAME or --tree FILE")
    try:
        data = json.loads(_read(config.inputs[0]))
    except json.JSONDecodeError as exc:
        raise SemanticFailure(f"family file is not JSON: {exc}") from None
    tree = None
    if "tree" in data:
        tree = BinTree.from_members(["" if s == "ε" else s for s in data["tree"]["members"]],
                                    data["tree"]["depth_budget"])
    return family_from_json(data), tree


# -- commands ---------------------------------------------------------------


def _convergence_rows(certs):
    rows = [["k", "m", "grid_j", "tail_size", "max_margin", "sup_bound"]]
    for c in certs:
        rows.append([c.k, c.m, c.grid_j, c.tail_size, max(c.margins), c.sup_bound])
    return rows


def cmd_aa_extract(config, out):
    seq, tree = _family_from_config(config)
    horizon = config.horizon
    if seq.length is not None:
        # an explicit finite family is its own materialized prefix
        horizon = min(horizon, seq.length)
    try:
        if seq.flavor == UNIFORM:
            sub, certs = aa_extract_uniform(seq, config.k_max, horizon)
        else:
            sub, certs = aa_extract_general(seq, config.k_max, horizon)
    except CertificateFailure as exc:
        report = {"status": "certificate_failure", "message": str(exc), "k": exc.k}
        if exc.witness is not None:
            y, a, b = exc.witness
            report["witness"] = {"y": format_rational(y), "n": a, "n_prime": b}
        if tree is not None:
            report["nonuniformity"] = verify_nonuniform(tree).to_json()
        out.add("failure.json", _json_text(report))
        out.emit("failure.json")
        return SEMANTIC
    body = {"status": "certified",
            "subsequence": sub.to_json(),
            "certificates": [c.to_json() for c in certs]}
    out.add("subsequence.json", _json_text(sub.to_json()))
    out.add("certificates.json", _json_text([c.to_json() for c in certs]))
    out.add("table.csv", _csv_text(_convergence_rows(certs)))
    out.add("result.json", _json_text(body))
    out.emit("table.csv" if config.fmt == "csv" else "result.json")
    return OK


def cmd_counterexample(config, out):
    tree = _tree_from_config(config)
    family = build_family(tree)
    rng = random.Random(config.seed)
    count = config.extra.get("samples", 200)
    samples = _sample_rationals(rng, count, 3 ** (family.depth + 1) * 2)
    report = verify_nonuniform(tree, samples=samples)
    fam = family.members_json()
    fam["tree"] = {"depth_budget": tree.depth_budget,
                   "members": [s if s else "ε" for s in tree.members_up_to(tree.depth_budget)]}
    grid = min(family.depth, 6)
    header = ["x"] + [f"f_{n}" for n in range(family.max_length + 1)]
    out.add("family.json", _json_text(fam))
    out.add("report.json", _json_text(report.to_json()))
    out.add("plot.csv", _csv_text([header] + list(plot_rows(family, grid))))
    out.emit("plot.csv" if config.fmt == "csv" else "report.json")
    return OK if report.ok else SEMANTIC


def _sequence_values(config):
    """Exact terms for bw-demo, ``horizon`` of them."""
    name = config.extra.get("sequence") or "alternating"
    n = config.horizon
    if config.extra.get("values"):
        vals = [parse_rational(v) for v in config.extra["values"].split(",")]
        if len(vals) < n:
            raise HorizonInsufficient(f"{len(vals)} values given, horizon {n}")
        return vals[:n]
    if name == "alternating":
        return [Fraction(i % 2) for i in range(n)]
    if name == "harmonic":
        return [Fraction(1, i + 1) for i in range(n)]
    if name.startswith("constant"):
        _, _, value = name.partition(":")
        c = parse_rational(value or "1/2")
        return [c] * n
    if name == "random":
        rng = random.Random(config.seed)
        pool = [Fraction(rng.randint(0, 16), 16) for _ in range(8)]
        return [rng.choice(pool) for _ in range(n)]
    raise SemanticFailure(f"unknown sequence {name!r}")


def cmd_bw_demo(config, out):
    vals = _sequence_values(config)
    xs = [real_from_rational(v) for v in vals]
    k = config.k_max
    sub = bw_unit(xs, config.horizon, k)
    interval = sub.limit_interval(k, lambda n: xs[n].bounds(k))
    rows = [["position", "index", "value"]]
    rows.extend([p, n, vals[n]] for p, n in enumerate(sub.indices))
    body = {"subsequence": sub.to_json(),
            "limit_interval": [format_rational(q) for q in interval]}
    if config.roundtrip:
        fam = constant_family_reduction(lambda n: xs[n], len(xs))
        g, certs = aa_extract_uniform(fam, k, config.horizon)
        m = certs[k].m
        tail = [vals[n] for n in list(g)[m + 1:]]
        eps = Fraction(1, 1 << k)
        other = (max(tail) - eps, min(tail) + eps)
        body["roundtrip"] = {
            "g": list(g.indices),
            "certificates": [c.to_json() for c in certs],
            "limit_interval": [format_rational(q) for q in other],
            "intervals_intersect": max(interval[0], other[0]) <= min(interval[1], other[1]),
            "selectors_identical": tuple(g.indices) == tuple(sub.indices),
        }
    out.add("subsequence.csv", _csv_text(rows))
    out.add("result.json", _json_text(body))
    out.emit("subsequence.csv" if config.fmt == "csv" else "result.json")
    if config.roundtrip and not body["roundtrip"]["intervals_intersect"]:
        return SEMANTIC
    return OK


def cmd_rate_convert(config, out):
    slope = config.extra.get("slope", 1)
    offset = config.extra.get("offset", 0)
    phi_prime = UniformModulus.affine(slope, offset)
    rows = [["k", "phi_prime", "grid_size", "rate"]]
    table = {}
    for k in range(config.k_max + 1):
        rate = pointwise_to_uniform_rate(phi_prime, k)
        table[str(k)] = rate
        rows.append([k, phi_prime(k), len(grid_Y(phi_prime(k))), rate])
    body = {"modulus": phi_prime.to_json(), "rates": table}
    out.add("rates.csv", _csv_text(rows))
    out.add("rates.json", _json_text(body))
    out.emit("rates.csv" if config.fmt == "csv" else "rates.json")
    return OK


COMMANDS = {
    "aa-extract": cmd_aa_extract,
    "counterexample": cmd_counterexample,
    "bw-demo": cmd_bw_demo,
    "rate-convert": cmd_rate_convert,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="ascoli", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, horizon=1024, k_max=4):
        p.add_argument("--horizon", type=int, default=horizon)
        p.add_argument("--depth-budget", type=int, default=None)
        p.add_argument("--k-max", type=int, default=k_max)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default=None, help="also write every artifact here")
        return p

    p = common(sub.add_parser("aa-extract", help="extract and certify a uniformly convergent subsequence"))
    p.add_argument("family", nargs="?", help="family JSON file")
    p.add_argument("--builtin", help="builtin family name, e.g. lipschitz_decay")
    p.add_argument("--params", help="JSON parameters for --builtin")
    p.add_argument("--tree", help="tree file; use its counterexample family")

    p = common(sub.add_parser("counterexample", help="build and check the family of a tree"))
    p.add_argument("tree", nargs="?", help="tree file (default: random tree from --seed)")
    p.add_argument("--full", type=int, default=None, help="use the full tree of this depth")
    p.add_argument("--samples", type=int, default=200)

    p = common(sub.add_parser("bw-demo", help="Bolzano-Weierstrass on a rational sequence"))
    p.add_argument("--sequence", default="alternating",
                   help="alternating, harmonic, constant:P/Q or random")
    p.add_argument("--values", help="explicit comma separated rationals")
    p.add_argument("--roundtrip", action="store_true",
                   help="also run the constant-family extraction and compare")

    p = common(sub.add_parser("rate-convert", help="tabulate the product-space rate"), k_max=8)
    p.add_argument("--slope", type=int, default=1)
    p.add_argument("--offset", type=int, default=0)
    return parser


def config_from_args(args):
    known = {"command", "horizon", "depth_budget", "k_max", "seed", "format",
             "roundtrip", "out_dir", "family", "tree"}
    extra = {k: v for k, v in vars(args).items() if k not in known}
    inputs = []
    if args.command == "aa-extract":
        if args.family:
            inputs.append(args.family)
        extra["tree"] = args.tree
    elif args.command == "counterexample" and args.tree:
        inputs.append(args.tree)
    return RunConfig(command=args.command, inputs=inputs, horizon=args.horizon,
                     depth_budget=args.depth_budget, k_max=args.k_max, seed=args.seed,
                     fmt=args.format, roundtrip=getattr(args, "roundtrip", False),
                     out_dir=args.out_dir, extra=extra)


def run(config, stdout=None, stderr=None):
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    out = Output(config, stdout)
    try:
        config.check()
        return COMMANDS[config.command](config, out)
    except SemanticFailure as exc:
        stderr.write(f"error: {exc}\n")
        return SEMANTIC
    except ResourceBound as exc:
        stderr.write(f"resource bound: {exc}\n")
        return RESOURCE
    except (OSError, ValueError, KeyError) as exc:
        stderr.write(f"error: {exc}\n")
        return SEMANTIC


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
