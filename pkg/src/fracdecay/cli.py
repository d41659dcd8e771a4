"""Command line interface.

Each subcommand reads optional ``key=value`` settings from ``--config`` and
lets command line flags override them. Relative output paths are resolved
against ``$FRACDECAY_OUTPUT_DIR`` when it is set.

Exit codes: 0 on success, 1 when an embedded check fails (a JSON witness is
written to stderr and next to the output file), 2 for invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from fracdecay import harness
from fracdecay.errors import FracDecayError, InvariantError
from fracdecay.lorentz_bounds import NormIndices, closed_form_supremum, decay_exponent, envelope_bound
from fracdecay.ml_special import ml
from fracdecay.spectral_model import PowerLaw

OUTPUT_DIR_ENV = "FRACDECAY_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def read_config(path: str | os.PathLike) -> dict[str, str]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _parse_complex(s: str) -> complex:
    return complex(str(s).replace(" ", "").replace("i", "j"))


REQUIRED = object()

# name -> (type, default)
Schema = dict[str, tuple[Callable[[str], Any], Any]]

SCHEMAS: dict[str, Schema] = {
    "ml": {
        "alpha": (float, REQUIRED),
        "delta": (float, 1.0),
        "z": (_parse_complex, REQUIRED),
    },
    "bound": {
        "beta": (float, REQUIRED),
        "lam": (float, REQUIRED),
        "p": (float, 2.0),
        "q": (float, REQUIRED),
        "t": (float, 1.0),
    },
    "suite": {
        "seed": (int, 42),
        "count": (int, 200),
        "output": (str, "theorem31_suite.csv"),
    },
    "decay": {
        "kind": (str, harness.DECAY_DEFAULTS["kind"]),
        "beta": (float, harness.DECAY_DEFAULTS["beta"]),
        "lam": (float, None),
        "p": (float, harness.DECAY_DEFAULTS["p"]),
        "q": (float, harness.DECAY_DEFAULTS["q"]),
        "dim": (int, harness.DECAY_DEFAULTS["dim"]),
        "points": (int, harness.DECAY_DEFAULTS["points"]),
        "box_length": (float, harness.DECAY_DEFAULTS["box_length"]),
        "domain": (str, harness.DECAY_DEFAULTS["domain"]),
        "modes": (int, harness.DECAY_DEFAULTS["modes"]),
        "t_min": (float, harness.DECAY_DEFAULTS["t_min"]),
        "t_max": (float, harness.DECAY_DEFAULTS["t_max"]),
        "times": (int, harness.DECAY_DEFAULTS["times"]),
        "seed": (int, harness.DECAY_DEFAULTS["seed"]),
        "output": (str, "decay.csv"),
    },
    "table4": {
        "alpha": (float, 0.5),
        "p": (float, 2.0),
        "q": (float, 4.0),
        "output": (str, "table4.csv"),
    },
    "figure1": {
        "alpha": (float, 1.95),
        "x_max": (float, 100.0),
        "points": (int, 1001),
        "output": (str, "figure1.csv"),
    },
}

HELP = {
    "ml": "evaluate the Mittag-Leffler function E_{alpha,delta}(z)",
    "bound": "envelope bound for a power-law counting function",
    "suite": "randomized weak norm versus envelope bound checks",
    "decay": "decay experiment on a periodic grid",
    "table4": "decay exponents for the operator catalog",
    "figure1": "E_{alpha,1}(-x), E_{alpha,2}(-x) against their envelope",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracdecay",
        description="Mittag-Leffler propagators, weak Lorentz bounds and decay experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", help="flat key=value settings file")
        for key, (_, default) in schema.items():
            # defaults are applied after merging with the config file
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None,
                           help="required" if default is REQUIRED else f"default: {default}")
    return parser


def resolve_settings(command: str, args: argparse.Namespace) -> dict[str, Any]:
    schema = SCHEMAS[command]
    raw: dict[str, Any] = {}
    if args.config:
        config = read_config(args.config)
        unknown = set(config) - set(schema)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
        raw.update(config)
    for key in schema:
        value = getattr(args, key)
        if value is not None:
            raw[key] = value

    out = {}
    for key, (conv, default) in schema.items():
        if key in raw:
            try:
                out[key] = conv(raw[key])
            except ValueError as exc:
                raise UsageError(f"invalid value for {key}: {exc}") from None
        elif default is REQUIRED:
            raise UsageError(f"missing required setting: {key}")
        else:
            out[key] = default
    return out


def output_path(name: str) -> Path:
    path = Path(name)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fp:
        harness.write_csv(fp, header, rows)


def _fail(path: Path | None, message: str, witness: Any) -> int:
    payload = {"error": message, "witness": witness}
    text = json.dumps(payload, indent=2, sort_keys=True, default=float)
    print(text, file=sys.stderr)
    if path is not None:
        path.with_suffix(path.suffix + ".witness.json").write_text(text + "\n")
    return EXIT_CHECK_FAILED


# {{{ commands


def cmd_ml(s: dict) -> int:
    value = complex(ml(s["z"], s["alpha"], s["delta"]))
    print(f"{value.real:.17g} {value.imag:.17g}")
    return EXIT_OK


def cmd_bound(s: dict) -> int:
    beta, lam, t = s["beta"], s["lam"], s["t"]
    exponent = decay_exponent(beta, lam, s["p"], s["q"])
    r = NormIndices(s["p"], s["q"]).r
    if math.isinf(r):
        print("r = inf: no decay")
        return EXIT_OK

    numeric = envelope_bound(lambda v: 1 / (1 + t**beta * v), PowerLaw(lam), r)
    exact = closed_form_supremum(beta, lam, r, t)
    harness.write_csv(sys.stdout, ("t", "r", "bound", "maximizer", "closed_form", "exponent"),
                      [(t, r, numeric.value, numeric.maximizer, exact.value, exponent)])
    return EXIT_OK


def cmd_suite(s: dict) -> int:
    path = output_path(s["output"])
    rows, witnesses = harness.run_theorem31_suite(s["seed"], s["count"])
    _write(path, harness.SUITE_HEADER, rows)
    passed = sum(1 for row in rows if row[-1])
    print(f"{passed}/{len(rows)} models pass; report written to {path}")
    if witnesses:
        return _fail(path, "weak norm exceeds envelope bound", witnesses)
    return EXIT_OK


def cmd_decay(s: dict) -> int:
    path = output_path(s.pop("output"))
    report = harness.run_decay(s)
    _write(path, harness.DECAY_HEADER, report.rows())
    print(f"exponent {report.exponent:.17g}")
    print(f"envelope slope {report.envelope_slope.slope:.17g}")
    print(f"ratio slope {report.ratio_slope.slope:.17g}")
    print(f"empirical solution slope (fitted, diagnostic) {report.empirical_slope.slope:.17g}")
    if not report.passed:
        return _fail(path, "decay bound check failed", report.witness())
    print(f"bound verified; series written to {path}")
    return EXIT_OK


def cmd_table4(s: dict) -> int:
    path = output_path(s["output"])
    rows, failures = harness.run_table4(s["alpha"], s["p"], s["q"])
    _write(path, harness.TABLE4_HEADER, rows)
    print(f"{len(rows)} rows written to {path}")
    if failures:
        return _fail(path, "counting exponent fit mismatch", failures)
    return EXIT_OK


def cmd_figure1(s: dict) -> int:
    path = output_path(s["output"])
    rows, c, violations = harness.run_figure1(s["alpha"], s["x_max"], s["points"])
    _write(path, harness.FIGURE1_HEADER, rows)
    print(f"envelope constant {c:.17g}; {len(rows)} samples written to {path}")
    if violations:
        return _fail(path, "envelope does not dominate", violations)
    return EXIT_OK


COMMANDS = {
    "ml": cmd_ml,
    "bound": cmd_bound,
    "suite": cmd_suite,
    "decay": cmd_decay,
    "table4": cmd_table4,
    "figure1": cmd_figure1,
}


# }}}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args.command, args)
        return COMMANDS[args.command](settings)
    except InvariantError as exc:
        return _fail(None, str(exc), exc.witness)
    except (UsageError, FracDecayError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
