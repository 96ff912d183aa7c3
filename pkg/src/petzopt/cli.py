"""Command-line front end.

Subcommands: ``analyze`` (fidelities + certificate, optionally the numerical
optimizer), ``certify`` (certificate only, never touches the optimizer),
``optimize`` (solver solution), ``sweep`` (parameter grids to CSV), and
``zoo`` (generator listing). JSON goes to stdout, diagnostics to stderr;
exit codes are 0 (ok), 2 (input error), 3 (convergence or quality failure).
All numbers are produced by library calls; the CLI formats them only.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import linops, optimal, petz, zoo
from .channels import (
    DensityOperator,
    KrausChannel,
    channel_from_json,
    channel_to_json,
    choi,
    maximally_mixed,
    validate,
)
from .errors import PetzoptError

SWEEP_QUANTITIES = (
    "f_tc",
    "f_petz",
    "f_opt",
    "gap",
    "commutator_general",
    "commutator_pgm",
    "b_min_eig",
    "kl_residual",
)


class CliError(Exception):
    """Input error mapped to exit code 2."""


# ----------------------------------------------------------------------
# Generator registry
# ----------------------------------------------------------------------


def _parse_pauli_support(text: str, d: int) -> dict:
    """Parse a comma-separated list of Pauli labels (I, X, Z, Y, X^aZ^b)."""
    supp = set()
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if token == "I":
            supp.add((0, 0))
            continue
        if token == "Y":
            supp.add((1, 1))
            continue
        match = re.fullmatch(r"(?:X(?:\^?(\d+))?)?(?:Z(?:\^?(\d+))?)?", token)
        if not match or (match.group(0) == ""):
            raise CliError(f"cannot parse Pauli label {token!r}")
        a = int(match.group(1)) if match.group(1) else (1 if "X" in token else 0)
        b = int(match.group(2)) if match.group(2) else (1 if "Z" in token else 0)
        supp.add((a % d, b % d))
    if not supp:
        raise CliError("empty Pauli support set")
    return {g: 1.0 / len(supp) for g in sorted(supp)}


def _build_pauli(args) -> zoo.ZooFixture:
    return zoo.pauli_channel(args.d, _parse_pauli_support(args.support, args.d))


def _build_c2c(args) -> zoo.ZooFixture:
    size = args.size
    if args.c2c_kind == "permutation":
        p = np.roll(np.eye(size), 1, axis=0)
    elif args.c2c_kind == "constant":
        p = np.full((size, size), 1.0 / size)
    else:
        raise CliError(f"unknown c2c kind {args.c2c_kind!r}")
    return zoo.c2c_channel(p)


def _build_toy(args) -> zoo.ZooFixture:
    return zoo.toy_channel(args.a, args.b)


def _build_direct_sum(args) -> zoo.ZooFixture:
    return zoo.direct_sum_example(args.seed)


def _build_qubit_example(args) -> zoo.ZooFixture:
    return zoo.qubit_example(args.a, args.t, args.x, args.y)


def _build_gkp(args) -> zoo.ZooFixture:
    return zoo.gkp_transduction(args.delta, args.eta, args.cutoff, args.drop_tol)


def _build_random(args) -> zoo.ZooFixture:
    return zoo.random_fixture(args.d, args.n, args.n_k, args.seed or 0)


GENERATORS = {
    "c2c": {
        "build": _build_c2c,
        "params": {"c2c-kind": "permutation", "size": 3},
        "provenance": "classical conditional distribution embedded as a quantum channel",
    },
    "direct-sum": {
        "build": _build_direct_sum,
        "params": {"seed": None},
        "provenance": "direct-sum QEC matrix; optimality beyond commuting rho and sigma",
    },
    "gkp": {
        "build": _build_gkp,
        "params": {"delta": 0.3, "eta": 0.5, "cutoff": 80, "drop-tol": 1e-5},
        "provenance": "finite-energy square-lattice GKP transduction through a beam splitter",
    },
    "pauli": {
        "build": _build_pauli,
        "params": {"d": 2, "support": "I,Z"},
        "provenance": "qudit Pauli error ensemble; clock-and-shift construction",
    },
    "qubit-example": {
        "build": _build_qubit_example,
        "params": {"a": float(np.sqrt(0.3)), "t": 1.0, "x": 0.25, "y": 0.08},
        "provenance": "commuting rho/sigma family violating the pretty-good commutator",
    },
    "random": {
        "build": _build_random,
        "params": {"d": 2, "n": 3, "n-k": 2, "seed": 0},
        "provenance": "seeded Haar-random isometry channel",
    },
    "toy": {
        "build": _build_toy,
        "params": {"a": 1.0, "b": 1.0},
        "provenance": "two-Kraus qubit-to-qutrit model with block-orthogonal error spaces",
    },
}


# ----------------------------------------------------------------------
# Input resolution
# ----------------------------------------------------------------------


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON in {path}: {exc}") from exc


def _resolve_channel(args) -> tuple[KrausChannel, zoo.ZooFixture | None]:
    if getattr(args, "channel", None):
        obj = _load_json(args.channel)
        return channel_from_json(obj), None
    if getattr(args, "generator", None):
        name = args.generator
        if name not in GENERATORS:
            raise CliError(f"unknown generator {name!r}; see `petzopt zoo`")
        fixture = GENERATORS[name]["build"](args)
        return fixture.channel, fixture
    raise CliError("provide --channel <path> or --generator <name>")


def _resolve_state(spec: str, d: int, sigma: DensityOperator | None) -> DensityOperator:
    if spec == "maximally-mixed":
        return maximally_mixed(d)
    if spec == "sqrt-sigma":
        if sigma is None:
            raise CliError("sqrt-sigma is only meaningful for --rho")
        return DensityOperator(linops.hermitian_power(sigma.matrix, 0.5))
    if spec.startswith("file:"):
        obj = _load_json(spec[5:])
        try:
            rows = obj["matrix"] if isinstance(obj, dict) else obj
            mat = np.array([[complex(re_, im_) for re_, im_ in row] for row in rows])
        except (TypeError, ValueError, KeyError) as exc:
            raise CliError(f"malformed state file {spec[5:]}: {exc}") from exc
        return DensityOperator(mat)
    raise CliError(f"cannot parse state spec {spec!r}")


def _resolve_states(args, d: int) -> tuple[DensityOperator, DensityOperator]:
    sigma = _resolve_state(args.sigma, d, None)
    rho = _resolve_state(args.rho, d, sigma)
    return rho, sigma


def _emit(obj: dict):
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _is_maximally_mixed(state: DensityOperator) -> bool:
    return bool(np.allclose(state.matrix, np.eye(state.dim) / state.dim, atol=1e-12))


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------


def cmd_analyze(args) -> int:
    channel, _ = _resolve_channel(args)
    rho, sigma = _resolve_states(args, channel.d)
    report = petz.petz_fidelity_compact(rho, sigma, channel)
    cert = petz.certify(rho, sigma, channel, cert_tol=args.tol)
    out = {
        "channel": {
            "d": channel.d,
            "n": channel.n,
            "n_K": channel.n_K,
            "tp_defect": validate(channel).tp_defect,
        },
        "rho": args.rho,
        "sigma": args.sigma,
        "fidelities": {
            "f_direct": report.f_direct,
            "f_compact": report.f_compact,
        },
        "certificate": cert.to_json(),
    }
    if _is_maximally_mixed(rho) and _is_maximally_mixed(sigma):
        out["fidelities"]["f_tc"] = petz.tc_fidelity(petz.qec_matrix(channel))
    if args.optimize:
        init = choi(petz.petz_map(channel, sigma), side="recovery")
        solution = optimal.optimize_recovery(channel, rho, init=init)
        out["optimize"] = {
            "fidelity": solution.fidelity,
            "iterations": solution.iterations,
            "converged": solution.converged,
            "tp_defect": solution.tp_defect,
            "gap": solution.fidelity - report.f_compact,
        }
        if args.require_converged and not solution.converged:
            _emit(out)
            print("optimizer did not converge", file=sys.stderr)
            return 3
    _emit(out)
    return 0


def cmd_certify(args) -> int:
    channel, _ = _resolve_channel(args)
    rho, sigma = _resolve_states(args, channel.d)
    cert = petz.certify(rho, sigma, channel, cert_tol=args.tol)
    _emit(cert.to_json())
    return 0


def cmd_optimize(args) -> int:
    channel, _ = _resolve_channel(args)
    rho, sigma = _resolve_states(args, channel.d)
    init = choi(petz.petz_map(channel, sigma), side="recovery")
    solution = optimal.optimize_recovery(
        channel,
        rho,
        init=init,
        max_iter=args.max_iter,
        step=args.step,
        tol=args.tol,
        method=args.method,
    )
    _emit(solution.to_json())
    if args.require_converged and not solution.converged:
        print("optimizer did not converge", file=sys.stderr)
        return 3
    return 0


def cmd_export(args) -> int:
    channel, fixture = _resolve_channel(args)
    out = channel_to_json(channel)
    if fixture is not None:
        out["expected"] = dict(sorted(fixture.expected.items()))
        out["provenance"] = fixture.provenance
    _emit(out)
    return 0


def _sweep_point(payload) -> list:
    """Evaluate one grid point; runs inside a worker process."""
    (name, base_args, param, value, quantities) = payload
    args = argparse.Namespace(**base_args)
    setattr(args, param.replace("-", "_"), value)
    fixture = GENERATORS[name]["build"](args)
    channel, rho, sigma = fixture.channel, fixture.rho, fixture.sigma
    values: dict = {}
    if "f_tc" in quantities:
        values["f_tc"] = petz.tc_fidelity(petz.qec_matrix(channel))
    need_cert = {"commutator_general", "commutator_pgm", "b_min_eig", "kl_residual"} & set(
        quantities
    )
    if need_cert:
        cert = petz.certify(rho, sigma, channel)
        cert_map = cert.to_json()
        for q in need_cert:
            values[q] = cert_map[q]
    if {"f_petz", "gap"} & set(quantities):
        values["f_petz"] = petz.petz_fidelity_compact(rho, sigma, channel).f_compact
    if {"f_opt", "gap"} & set(quantities):
        init = choi(petz.petz_map(channel, sigma), side="recovery")
        values["f_opt"] = optimal.optimize_recovery(channel, rho, init=init).fidelity
    if "gap" in quantities:
        values["gap"] = values["f_opt"] - values["f_petz"]
    return [values[q] for q in quantities]


def cmd_sweep(args) -> int:
    if args.generator not in GENERATORS:
        raise CliError(f"unknown generator {args.generator!r}")
    if args.steps < 2:
        raise CliError("--steps must be at least 2")
    if not args.min < args.max:
        raise CliError("--min must be strictly below --max")
    quantities = [q.strip() for q in args.quantities.split(",") if q.strip()]
    if not quantities:
        raise CliError("--quantities must be a non-empty comma-separated list")
    for q in quantities:
        if q not in SWEEP_QUANTITIES:
            raise CliError(f"unknown quantity {q!r}; choose from {', '.join(SWEEP_QUANTITIES)}")
    param_attr = args.param.replace("-", "_")
    base_args = {k: v for k, v in vars(args).items() if k != "func"}
    if param_attr not in base_args:
        raise CliError(f"unknown sweep parameter {args.param!r}")

    grid = np.linspace(args.min, args.max, args.steps)
    payloads = [
        (args.generator, base_args, args.param, float(v), tuple(quantities)) for v in grid
    ]
    rows: list = [None] * len(payloads)
    failures = 0
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = pool.map(_sweep_point_safe, payloads)
            for i, res in enumerate(results):
                rows[i] = res
    else:
        for i, payload in enumerate(payloads):
            rows[i] = _sweep_point_safe(payload)
    failures = sum(1 for r in rows if r is None)

    tmp_fd, tmp_path = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(args.out)) or ".")
    try:
        with os.fdopen(tmp_fd, "w") as fh:
            fh.write(",".join([args.param] + quantities) + "\n")
            for v, row in zip(grid, rows):
                cells = [format(float(v), ".17g")]
                if row is None:
                    cells += ["" for _ in quantities]
                else:
                    cells += [format(float(x), ".17g") for x in row]
                fh.write(",".join(cells) + "\n")
        os.replace(tmp_path, args.out)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    if failures:
        print(f"{failures} of {len(rows)} grid points failed", file=sys.stderr)
    ok = len(rows) - failures
    return 0 if ok >= 0.9 * len(rows) else 3


def _sweep_point_safe(payload):
    try:
        return _sweep_point(payload)
    except (PetzoptError, CliError, ValueError):
        return None


def cmd_zoo(args) -> int:
    names = sorted(GENERATORS)
    if args.json:
        listing = {
            "generators": [
                {
                    "name": name,
                    "params": {k: GENERATORS[name]["params"][k] for k in sorted(GENERATORS[name]["params"])},
                    "provenance": GENERATORS[name]["provenance"],
                }
                for name in names
            ]
        }
        _emit(listing)
        return 0
    for name in names:
        meta = GENERATORS[name]
        params = " ".join(f"--{k} {v}" for k, v in sorted(meta["params"].items()))
        print(f"{name:15s} {params}")
        print(f"{'':15s}   {meta['provenance']}")
    return 0


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------


def _add_channel_source(parser: argparse.ArgumentParser):
    parser.add_argument("--channel", help="path to a channel JSON file")
    parser.add_argument("--generator", help="generator name (see `petzopt zoo`)")
    # generator parameters
    parser.add_argument("--a", type=float, default=1.0)
    parser.add_argument("--b", type=float, default=1.0)
    parser.add_argument("--t", type=float, default=1.0)
    parser.add_argument("--x", type=float, default=0.25)
    parser.add_argument("--y", type=float, default=0.08)
    parser.add_argument("--d", type=int, default=2)
    parser.add_argument("--n", type=int, default=3)
    parser.add_argument("--n-k", type=int, default=2)
    parser.add_argument("--support", default="I,Z")
    parser.add_argument("--size", type=int, default=3)
    parser.add_argument("--c2c-kind", choices=("permutation", "constant"), default="permutation")
    parser.add_argument("--delta", type=float, default=0.3)
    parser.add_argument("--eta", type=float, default=0.5)
    parser.add_argument("--cutoff", type=int, default=80)
    parser.add_argument("--drop-tol", type=float, default=1e-5)
    parser.add_argument("--seed", type=int, default=None)


def _add_states(parser: argparse.ArgumentParser):
    parser.add_argument("--rho", default="maximally-mixed")
    parser.add_argument("--sigma", default="maximally-mixed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="petzopt",
        description="Petz recovery analysis: QEC matrices, fidelities, optimality certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="fidelities, certificate, optional optimizer")
    _add_channel_source(p)
    _add_states(p)
    p.add_argument("--tol", type=float, default=petz.CERT_TOL)
    p.add_argument("--optimize", action="store_true")
    p.add_argument("--require-converged", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("certify", help="optimality certificate only (no optimizer)")
    _add_channel_source(p)
    _add_states(p)
    p.add_argument("--tol", type=float, default=petz.CERT_TOL)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("optimize", help="numerical optimal-recovery solver")
    _add_channel_source(p)
    _add_states(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--method", choices=("auto", "ascent", "power"), default="auto")
    p.add_argument("--require-converged", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("export", help="emit a generator's channel as JSON")
    _add_channel_source(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("sweep", help="grid sweep of a generator parameter to CSV")
    _add_channel_source(p)
    p.add_argument("--param", required=True, help="generator parameter to sweep")
    p.add_argument("--min", type=float, required=True)
    p.add_argument("--max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--quantities", required=True, help=f"comma list of {','.join(SWEEP_QUANTITIES)}")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("zoo", help="list generators, parameters, and provenance")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_zoo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, PetzoptError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
