"""Fixed CLI invocations shared by the golden-file tests and the acceptance run."""
import io
import os
from pathlib import Path

from ascoli.cli import build_parser, config_from_args, run

GOLDEN = Path(__file__).parent / "golden"

# name -> (argv, expected exit status)
CASES = {
    "rate_convert": (["rate-convert", "--k-max", "8"], 0),
    "rate_convert_csv": (["rate-convert", "--k-max", "4", "--format", "csv"], 0),
    "aa_decay": (["aa-extract", "--builtin", "lipschitz_decay", "--k-max", "4",
                  "--format", "csv"], 0),
    "aa_alternating": (["aa-extract", "--builtin", "alternating_constants",
                        "--k-max", "3", "--horizon", "64"], 0),
    "aa_counterexample": (["aa-extract", "--tree", "{golden}/small.tree", "--k-max", "1"], 2),
    "ce_small": (["counterexample", "{golden}/small.tree", "--samples", "40"], 0),
    "ce_full3": (["counterexample", "--full", "3", "--samples", "20", "--seed", "5"], 0),
    "ce_random": (["counterexample", "--depth-budget", "5", "--seed", "11", "--samples", "20",
                   "--format", "csv"], 0),
    "ce_empty": (["counterexample", "{golden}/empty.tree"], 2),
    "bw_alternating": (["bw-demo", "--sequence", "alternating", "--horizon", "64",
                        "--k-max", "3", "--roundtrip"], 0),
    "bw_harmonic": (["bw-demo", "--sequence", "harmonic", "--horizon", "256", "--k-max", "4",
                     "--format", "csv"], 0),
    "bw_short": (["bw-demo", "--values", "0,1/2,1", "--horizon", "16", "--k-max", "2"], 3),
}


def invoke(name, out_dir=None):
    argv, _ = CASES[name]
    argv = [a.format(golden=GOLDEN) for a in argv]
    if out_dir is not None:
        argv = argv + ["--out-dir", str(out_dir)]
    config = config_from_args(build_parser().parse_args(argv))
    out, err = io.StringIO(), io.StringIO()
    code = run(config, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def golden_path(name):
    return GOLDEN / f"{name}.out"


def regenerate():
    for name in CASES:
        code, out, err = invoke(name)
        golden_path(name).write_text(f"exit={code}\n{out}{err}", encoding="utf-8")


def golden_text(name):
    code, out, err = invoke(name)
    return f"exit={code}\n{out}{err}"


if __name__ == "__main__" or os.environ.get("ASCOLI_REGEN_GOLDEN") == "1":
    regenerate()
