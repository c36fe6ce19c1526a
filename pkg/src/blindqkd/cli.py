"""Command-line front end.

Every flag can also be given as an environment variable ``BLINDQKD_<FLAG>``
(upper case, dashes as underscores).  Flags win over the environment, the
environment wins over defaults.

Exit codes: 0 success (an aborted verdict is a result), 1 bad configuration
or unwritable output, 2 internal invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .harness import (
    RNG_DRAW_ORDER,
    SCENARIOS,
    VARIANTS,
    ConfigError,
    ProtocolParams,
    SessionReport,
    run_session,
)
from .photon import LabelSet
from .quantum import InvariantViolation

log = logging.getLogger("blindqkd")

SCHEMA_VERSION = 1
ENV_PREFIX = "BLINDQKD_"
FORMATS = ("json", "csv", "table")

CSV_FIELDS = (
    "variant",
    "scenario",
    "seed",
    "n_rounds",
    "agreement_rate",
    "qber_sampled",
    "eve_k_rate",
    "eve_b_rate",
    "intensity_pass_rate",
    "verdict",
    "abort_reasons",
    "final_key_length",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


@dataclass(frozen=True)
class CliConfig:
    params: ProtocolParams
    format: str = "json"
    out: Optional[str] = None
    matrix: bool = False

    def sessions(self) -> list[ProtocolParams]:
        if not self.matrix:
            return [self.params]
        p = self.params
        return [
            ProtocolParams(
                variant=p.variant,
                scenario=sc,
                rounds=p.rounds,
                seed=(p.seed + i) % 2**64,
                delta=p.delta,
                canonical=p.canonical,
                sample_fraction=p.sample_fraction,
                qber_threshold=p.qber_threshold,
                intensity_tol=p.intensity_tol,
                intensity_check_prob=p.intensity_check_prob,
            )
            for i, sc in enumerate(SCENARIOS)
        ]


def _flag_spec():
    # (flag, type, default)
    return [
        ("--variant", str, "strong"),
        ("--scenario", str, "honest"),
        ("--rounds", int, 10_000),
        ("--seed", int, 42),
        ("--delta", float, 0.1),
        ("--wavelength", float, 1550.0),
        ("--sample-fraction", float, 0.2),
        ("--qber-threshold", float, 0.05),
        ("--intensity-tol", float, 0.01),
        ("--intensity-check-prob", float, 0.25),
        ("--format", str, "json"),
        ("--out", str, None),
    ]


def _env_name(flag: str) -> str:
    return ENV_PREFIX + flag.lstrip("-").replace("-", "_").upper()


def build_parser(env: Mapping[str, str]) -> argparse.ArgumentParser:
    parser = _Parser(prog="blindqkd", description="Simulate the blind three-way QKD protocol under attack.")
    for flag, typ, default in _flag_spec():
        raw = env.get(_env_name(flag))
        if raw is not None:
            try:
                default = typ(raw)
            except ValueError:
                raise UsageError(f"{_env_name(flag)}={raw!r} is not a valid {typ.__name__}")
        kwargs = {"type": typ, "default": default}
        if flag == "--variant":
            kwargs["choices"] = VARIANTS
        elif flag == "--scenario":
            kwargs["choices"] = SCENARIOS
        elif flag == "--format":
            kwargs["choices"] = FORMATS
        parser.add_argument(flag, **kwargs)
    matrix_env = env.get(_env_name("--matrix"), "").lower() in ("1", "true", "yes")
    parser.add_argument("--matrix", action="store_true", default=matrix_env,
                        help="run all four scenarios (seed + scenario index)")
    return parser


def parse_config(argv: Sequence[str], env: Optional[Mapping[str, str]] = None) -> CliConfig:
    env = os.environ if env is None else env
    args = build_parser(env).parse_args(list(argv))
    try:
        canonical = LabelSet(wavelength=args.wavelength)
        params = ProtocolParams(
            variant=args.variant,
            scenario=args.scenario,
            rounds=args.rounds,
            seed=args.seed,
            delta=args.delta,
            canonical=canonical,
            sample_fraction=args.sample_fraction,
            qber_threshold=args.qber_threshold,
            intensity_tol=args.intensity_tol,
            intensity_check_prob=args.intensity_check_prob,
        )
        cfg = CliConfig(params, args.format, args.out, args.matrix)
        cfg.sessions()  # matrix expansion re-validates every scenario
    except (ConfigError, ValueError) as e:
        raise UsageError(str(e)) from e
    if args.delta == 0 and (args.matrix or args.scenario in ("labeling", "labeling_vs_scrub")):
        log.warning("delta = 0: labels carry no information, the labeling attack degenerates to impersonation")
    return cfg


# -- reports -----------------------------------------------------------------


def _num(x: float) -> float:
    return float(f"{x:.6g}")


def report_dict(report: SessionReport) -> dict:
    p = report.params
    return {
        "schema": SCHEMA_VERSION,
        "params": {
            "variant": p.variant,
            "scenario": p.scenario,
            "rounds": p.rounds,
            "seed": p.seed,
            "delta": _num(p.delta),
            "wavelength": _num(p.canonical.wavelength),
            "sample_fraction": _num(p.sample_fraction),
            "qber_threshold": _num(p.qber_threshold),
            "intensity_tol": _num(p.intensity_tol),
            "intensity_check_prob": _num(p.intensity_check_prob),
        },
        "rng_draw_order": list(RNG_DRAW_ORDER),
        "n_rounds": report.n_rounds,
        "agreement_rate": _num(report.agreement_rate),
        "qber_sampled": _num(report.qber_sampled),
        "sampled_bits": report.sampled_bits,
        "eve_k_rate": _num(report.eve_k_rate),
        "eve_b_rate": _num(report.eve_b_rate),
        "intensity_pass_rate": _num(report.intensity_pass_rate),
        "verdict": report.verdict,
        "abort_reasons": list(report.abort_reasons),
        "final_key_length": len(report.final_key_bits_a),
        "final_key_bits_a": report.final_key_bits_a,
        "final_key_bits_b": report.final_key_bits_b,
    }


def emit_report(reports: Sequence[SessionReport], fmt: str, matrix: bool = False) -> bytes:
    dicts = [report_dict(r) for r in reports]
    if fmt == "json":
        if matrix:
            doc = {"schema": SCHEMA_VERSION, "matrix": dicts}
        else:
            (doc,) = dicts
        return (json.dumps(doc, indent=2, sort_keys=False) + "\n").encode()
    rows = []
    for d in dicts:
        row = {**d["params"], **d}
        row["abort_reasons"] = ";".join(d["abort_reasons"])
        rows.append({k: row[k] for k in CSV_FIELDS})
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue().encode()
    if fmt == "table":
        cells = [list(CSV_FIELDS)] + [[_cell(r[k]) for k in CSV_FIELDS] for r in rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(CSV_FIELDS))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return ("\n".join(lines) + "\n").encode()
    raise UsageError(f"unknown format {fmt!r}")


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v) if v != "" else "-"


def main(argv: Optional[Sequence[str]] = None, env: Optional[Mapping[str, str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv, env)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)

    try:
        reports = [run_session(p) for p in cfg.sessions()]
    except InvariantViolation as e:
        print(f"internal invariant violation: {e}", file=sys.stderr)
        return 2

    data = emit_report(reports, cfg.format, matrix=cfg.matrix)
    if cfg.out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return 0
    try:
        with open(cfg.out, "wb") as fh:
            fh.write(data)
    except OSError as e:
        print(f"cannot write {cfg.out}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
