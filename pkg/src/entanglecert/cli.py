"""Command-line front end.

    entanglecert certify --test witness --pa 0.5 --pb 0.5 --exact
    entanglecert sweep --grid 0:1:11 --out sweep.csv
    entanglecert recover --plan chsh
    entanglecert tradeoff --points 21
    entanglecert monitor --windows 500 --seed 7 --out monitor.csv
    entanglecert tomography --state mixed:0.3 --shots 10000
    entanglecert sweep --config sweep.csv        # re-run from an emitted file
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .certify import CertTest, certify
from .config import COMMANDS, RunConfig, build_config, config_values_from_file
from .core import PHI_PLUS, PureState
from .errors import EntangleCertError, ParseError, ValidationError
from .metrics import (
    PLANS,
    concurrence,
    entanglement_of_formation,
    expectations_from_labels,
    fidelity_with_pure,
    pauli_expectations,
    purity,
    sampled_pauli_expectations,
    tomography_linear_inversion,
)
from .monitor import OUProcess, SelectionConfig, mixed_state, run_monitoring
from .protocol import ReversalPolicy, SweepGrid, sweep_certification, sweep_recovery, tradeoff_curves
from .rng import RngStream
from .tables import ResultTable, emit

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_IO = 5

SHORT_NAMES = {
    CertTest.WITNESS: "W",
    CertTest.STEERING_A_TO_B: "S3",
    CertTest.STEERING_B_TO_A: "S3_reverse",
    CertTest.CHSH: "S",
}


def _read_expectations(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise EntangleCertError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(data, dict):
        raise ParseError("expectation file must hold a JSON object", line=1)
    return expectations_from_labels(data)


def resolve_state(spec: str):
    """'ideal', 'mixed:<gamma>' or a JSON file of Pauli expectations."""
    if spec == "ideal":
        return PHI_PLUS
    if spec.startswith("mixed:"):
        try:
            gamma = float(spec.split(":", 1)[1])
        except ValueError:
            raise ValidationError("state", f"bad mixed-state spec {spec!r}") from None
        if not 0.0 <= gamma <= 1.0:
            raise ValidationError("state", f"gamma = {gamma} out of [0,1]")
        return mixed_state(gamma)
    if Path(spec).is_file():
        return tomography_linear_inversion(_read_expectations(spec)).density()
    raise ValidationError("state", f"state must be 'ideal', 'mixed:<gamma>' or an existing file, got {spec!r}")


def _shots(cfg: RunConfig) -> int:
    return 0 if cfg.exact else cfg.shots


def _cmd_certify(cfg: RunConfig, rng: RngStream) -> ResultTable:
    state = resolve_state(cfg.state)
    table = ResultTable(["test", "p_a", "p_b", "statistic", "threshold", "certified", "standard_error", "shots"])
    for i, name in enumerate(cfg.tests):
        r = certify(state, CertTest(name), cfg.pa, cfg.pb, _shots(cfg), rng.child(i))
        table.append([name, cfg.pa, cfg.pb, r.statistic, r.threshold, r.certified, r.standard_error, r.shots])
    return table


def _cmd_sweep(cfg: RunConfig, rng: RngStream) -> ResultTable:
    values = tuple(cfg.strengths())
    tests = tuple(CertTest(t) for t in cfg.tests)
    grid = SweepGrid(values, values, tests, _shots(cfg))
    results = sweep_certification(grid, resolve_state(cfg.state), rng)
    cols = ["p_a", "p_b"]
    for t in tests:
        n = SHORT_NAMES[t]
        cols += [n, f"{n}_certified"] + ([] if cfg.exact else [f"{n}_se"])
    table = ResultTable(cols)
    for k in range(0, len(results), len(tests)):
        cell = results[k : k + len(tests)]
        row = [cell[0].p_a, cell[0].p_b]
        for r in cell:
            row += [r.statistic, r.certified] + ([] if cfg.exact else [r.standard_error])
        table.append(row)
    return table


def _cmd_recover(cfg: RunConfig, rng: RngStream) -> ResultTable:
    state = resolve_state(cfg.state)
    target = state if isinstance(state, PureState) else PHI_PLUS
    rows = sweep_recovery(cfg.strengths(), state, PLANS[cfg.plan], _shots(cfg), ReversalPolicy(cfg.policy), rng, target)
    table = ResultTable(["p", "F_before", "E_before", "P_before", "F_after", "E_after", "P_after", "success_probability"])
    nan = math.nan
    for r in rows:
        a = r.after
        table.append([
            r.p,
            r.before.fidelity,
            r.before.eof,
            r.before.purity,
            a.fidelity if a else nan,
            a.eof if a else nan,
            a.purity if a else nan,
            r.success_probability,
        ])
    return table


def _cmd_tradeoff(cfg: RunConfig, rng: RngStream) -> ResultTable:
    table = ResultTable(["p", "R", "S", "S3", "E_steering", "E_chsh"])
    for r in tradeoff_curves(cfg.strengths(), resolve_state(cfg.state)):
        table.append([r.p, r.reversibility, r.chsh, r.steering, r.eof_steering, r.eof_chsh])
    return table


def _cmd_monitor(cfg: RunConfig, rng: RngStream) -> ResultTable:
    sel = SelectionConfig(threshold=cfg.threshold, window_shots=cfg.shots, p_a=cfg.pa, p_b=cfg.pb, exact=cfg.exact)
    ou = OUProcess(mu=cfg.ou_mu, theta=cfg.ou_theta, sigma=cfg.ou_sigma)
    report = run_monitoring(sel, ou, cfg.windows, rng)
    table = ResultTable(["window", "gamma", "W", "W_se", "selected", "S", "S_se"])
    for w in report.windows:
        table.append([w.index, w.gamma, w.witness, w.witness_se, w.selected, w.chsh, w.chsh_se])
    table.metadata["summary"] = {
        "n_windows": len(report.windows),
        "n_selected": report.n_selected,
        "S_selected": report.s_selected,
        "S_selected_se": report.s_selected_se,
        "S_all": report.s_all,
        "S_all_se": report.s_all_se,
    }
    return table


def _cmd_tomography(cfg: RunConfig, rng: RngStream) -> ResultTable:
    if Path(cfg.state).is_file():
        expectations = _read_expectations(cfg.state)
    else:
        state = resolve_state(cfg.state)
        expectations = pauli_expectations(state) if cfg.exact else sampled_pauli_expectations(state, cfg.shots, rng)
    rec = tomography_linear_inversion(expectations)
    cols = ["fidelity", "purity", "concurrence", "eof", "min_eigenvalue"]
    row = [fidelity_with_pure(PHI_PLUS, rec.density()) if rec.physical else _raw_fidelity(rec.matrix)]
    row.append(float((rec.matrix @ rec.matrix).trace().real))
    if rec.physical:
        c = concurrence(rec.density())
        row += [c, entanglement_of_formation(c)]
    else:
        row += [math.nan, math.nan]
    row.append(rec.min_eigenvalue)
    for i in range(4):
        for j in range(4):
            cols += [f"re_{i}{j}", f"im_{i}{j}"]
            row += [float(rec.matrix[i, j].real), float(rec.matrix[i, j].imag)]
    return ResultTable(cols, [row])


def _raw_fidelity(m) -> float:
    psi = PHI_PLUS.amplitudes
    return float((psi.conj() @ m @ psi).real)


HANDLERS = {
    "certify": _cmd_certify,
    "sweep": _cmd_sweep,
    "recover": _cmd_recover,
    "tradeoff": _cmd_tradeoff,
    "monitor": _cmd_monitor,
    "tomography": _cmd_tomography,
}


def run_command(cfg: RunConfig) -> ResultTable:
    """Execute ``cfg`` and return its table with the reproducibility header attached."""
    table = HANDLERS[cfg.command](cfg, RngStream(cfg.seed, 0))
    table.metadata = {"version": __version__, "config": cfg.echo(), **table.metadata}
    return table


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entanglecert", description="Weak-measurement entanglement certification and recovery simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML config file, or a table emitted by a previous run")
        p.add_argument("--state", help="ideal | mixed:<gamma> | JSON file of Pauli expectations")
        p.add_argument("--test", dest="tests", action="append", help="test name (repeatable or comma-separated)")
        p.add_argument("--pa", type=float)
        p.add_argument("--pb", type=float)
        p.add_argument("--grid", help="strength grid start:stop:count")
        p.add_argument("--points", type=int, help="number of grid points")
        p.add_argument("--shots", type=int, help="shots per setting; selects sampled mode unless --exact")
        p.add_argument("--exact", action="store_true", default=None, help="exact expectation values")
        p.add_argument("--seed", type=int)
        p.add_argument("--policy", choices=["all", "plus"])
        p.add_argument("--plan", choices=["witness", "steering", "chsh"])
        p.add_argument("--threshold", type=float)
        p.add_argument("--windows", type=int)
        p.add_argument("--ou-mu", dest="ou_mu", type=float)
        p.add_argument("--ou-theta", dest="ou_theta", type=float)
        p.add_argument("--ou-sigma", dest="ou_sigma", type=float)
        p.add_argument("--out")
        p.add_argument("--format", choices=["csv", "jsonl"])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = config_values_from_file(args.config) if args.config else {}
    values["command"] = args.command
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "command") and v is not None}
    if "tests" in flags:
        flags["tests"] = [t for item in flags["tests"] for t in item.split(",")]
    if "shots" in flags and not flags.get("exact"):
        flags["exact"] = False
    values.update(flags)
    return build_config(values)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = config_from_args(args)
        table = run_command(cfg)
        emit(table, cfg.format, cfg.out)
    except ParseError as exc:
        print(f"entanglecert: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"entanglecert: invalid {exc.field}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"entanglecert: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EntangleCertError as exc:
        print(f"entanglecert: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
