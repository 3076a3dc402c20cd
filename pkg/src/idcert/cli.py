"""Command-line entry point: ``idcert find-ids | certify | gamma | simulate | tomo``.

Exit codes: 0 success, 2 input error, 3 empty result, 4 coverage gap.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources
from typing import Sequence

import numpy as np

from . import gamma as gm
from . import measurement as ms
from . import pauli as pl
from . import states as st
from .certify import CertificationError
from .ids import IdError, IdTable, find_ids_in_group
from .pauli import PauliError
from .report import auto_select_id, certification_report
from .stabilizer import StabilizerError, group_from_generators, state_stabilizer

EXIT_OK, EXIT_INPUT, EXIT_EMPTY, EXIT_COVERAGE = 0, 2, 3, 4

log = logging.getLogger("idcert")

_ALIASES = {"ring": "ring_graph", "path": "path_graph", "bell": "bell_product"}


class InputError(Exception):
    pass


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def data_path(name: str) -> str:
    """Path of a bundled fixture (``c_lin_expectations.json`` and friends)."""
    return str(resources.files("idcert") / "data" / name)


def _dataset(path: str) -> ms.Dataset:
    """Load a dataset file; a bare name of a bundled fixture also works."""
    if not os.path.exists(path) and os.path.exists(data_path(path)):
        path = data_path(path)
    try:
        return ms.load_dataset(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def parse_state(text: str) -> tuple[str, st.QuantumState]:
    """A JSON file with a state spec, or ``name[:n]`` such as ``ghz:3`` or ``c_lin``."""
    if os.path.exists(text):
        spec = _read_json(text)
        if not isinstance(spec, dict):
            raise InputError(f"{text}: expected a JSON object")
        return spec.get("label", os.path.basename(text)), st.state_from_spec(spec)
    name, _, n = text.partition(":")
    name = _ALIASES.get(name.lower(), name.lower())
    return text, st.make_named_state(name, int(n) if n else None)


def _state_from_meta(meta: dict) -> tuple[str, st.QuantumState]:
    spec = meta.get("state")
    if spec is None:
        raise InputError("no --state given and the dataset names no target state")
    if isinstance(spec, str):
        return parse_state(spec)
    label = spec.get("name", "target") + (f":{spec['n']}" if "n" in spec else "")
    return label, st.state_from_spec(spec)


def _load_id(arg) -> IdTable:
    data = _read_json(arg) if isinstance(arg, str) else arg
    return IdTable.from_json(data)


def _emit(text: str, out: str | None, payload) -> None:
    print(text)
    if out:
        with open(out, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")


# -- subcommands ---------------------------------------------------------------


def cmd_find_ids(args) -> int:
    if os.path.exists(args.source):
        data = _read_json(args.source)
        if isinstance(data, dict) and "generators" in data:
            group = group_from_generators([pl.parse_pauli(g) for g in data["generators"]])
        else:
            group = state_stabilizer(st.state_from_spec(data))
    else:
        group = state_stabilizer(parse_state(args.source)[1])
    flag = lambda v: True if v else None  # noqa: E731
    found = find_ids_in_group(
        group, args.max_m, m_min=args.min_m,
        whole=flag(args.whole), negative=flag(args.negative),
        entangled=flag(args.entangled), critical=flag(args.critical),
        full_support=flag(args.full_support),
    )
    lines = [f"{len(found)} ID(s)"]
    payload = []
    for t in found:
        c = t.classify()
        flags = ["neg" if c.sign < 0 else "pos", "whole" if c.is_whole else "partial"]
        if c.is_entangled:
            flags.append("entangled")
        if c.is_critical:
            flags.append("critical")
        rows = " ".join(pl.format_pauli(r, plus=False) for r in t.rows)
        lam = "".join("+" if l > 0 else "-" for l in t.lambdas)
        lines.append(f"{t.label:<9} {rows}  lambda={lam}  {','.join(flags)}  "
                     f"settings={c.min_settings}")
        payload.append(t.to_json() | {"label": t.label, "sign": c.sign, "whole": c.is_whole,
                                      "entangled": c.is_entangled, "critical": c.is_critical,
                                      "min_settings": c.min_settings})
    _emit("\n".join(lines), args.out, payload)
    return EXIT_OK if found else EXIT_EMPTY


def cmd_certify(args) -> int:
    dataset = _dataset(args.dataset)
    meta = dataset.meta
    label, target = parse_state(args.state) if args.state else _state_from_meta(meta)
    if args.id == "auto":
        id_table = auto_select_id(dataset, target)
    elif args.id:
        id_table = _load_id(args.id)
    elif "id" in meta:
        id_table = _load_id(meta["id"])
    else:
        id_table = auto_select_id(dataset, target)
    gens = args.generators.split(",") if args.generators else meta.get("generators")
    report = certification_report(
        dataset, target, id_table, state_label=label, generators=gens,
        witnesses=meta.get("witnesses", ()), alpha_sigma=meta.get("alpha_sigma"),
        cycles=args.cycles, rng_seed=args.seed,
    )
    if args.plot_data:
        os.makedirs(args.plot_data, exist_ok=True)
        rows = [pl.format_pauli(r) for r in id_table.rows]
        with open(os.path.join(args.plot_data, "expectations.csv"), "w") as fh:
            fh.write(ms.expectations_csv(rows, report.row_estimates, list(report.lambdas)))
        with open(os.path.join(args.plot_data, "fidelity_methods.csv"), "w") as fh:
            fh.write(ms.fidelity_methods_csv(
                {k: None if v is None else (v.value, v.sigma) for k, v in report.fidelity.items()}))
    _emit(report.summary(), args.out, report.to_json())
    return EXIT_OK


def cmd_gamma(args) -> int:
    id_table = _load_id(args.id)
    n = id_table.n_qubits
    if args.classes:
        entries = _read_json(args.classes)
        if not isinstance(entries, list):
            raise InputError(f"{args.classes}: catalogue must be a JSON list")
        classes = gm.catalog_from_json(entries, n)
    else:
        classes = [gm.class_from_label(c, n) for c in gm.default_catalog(n)]
    if not classes:
        _emit("empty catalogue", args.out, [])
        return EXIT_EMPTY
    est = gm.gamma_table(id_table, classes, args.starts, args.seed,
                         tolerance=args.tolerance, workers=args.threads)
    _emit(gm.format_gamma_table(est), args.out, [e.to_json() for e in est])
    return EXIT_OK


def _auto_id_for(target: st.QuantumState) -> IdTable:
    group = state_stabilizer(target)
    n = target.n_qubits
    cands = find_ids_in_group(group, n + 1, entangled=True)
    if not cands:
        raise InputError("the target group has no entangled ID with M <= N+1")
    bell = [t for t in cands if t.is_whole and t.is_negative]
    pool = bell or cands
    return min(pool, key=lambda t: len(t.min_settings()))


def cmd_simulate(args) -> int:
    label, target = parse_state(args.state)
    if args.full_tomo:
        settings = ms.all_settings(target.n_qubits)
    elif args.settings == "auto":
        id_table = _load_id(args.id) if args.id else _auto_id_for(target)
        settings = ms.plan_settings(id_table)
    elif os.path.exists(args.settings):
        settings = _read_json(args.settings)
    else:
        settings = [s.strip() for s in args.settings.split(",") if s.strip()]
    if not settings:
        raise InputError("no measurement settings given")
    ds = ms.simulate_experiment(target, args.p, settings, args.shots, args.seed)
    ds.meta["state"] = args.state
    data = ds.to_json()
    text = json.dumps(data, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"{len(settings)} setting(s) x ~{args.shots} shots written to {args.out}")
    else:
        print(text)
    return EXIT_OK


def cmd_tomo(args) -> int:
    dataset = _dataset(args.dataset)
    if not isinstance(dataset, ms.ExperimentDataset):
        raise InputError("tomography needs a counts dataset")
    if args.state:
        label, target = parse_state(args.state)
    else:
        label, target = _state_from_meta(dataset.meta)
    res = ms.linear_inversion_tomography(dataset)
    f = res.fidelity(target)
    text = (f"linear-inversion tomography of {label}: F = {f:.4f}; "
            f"most negative eigenvalue {res.min_eigenvalue:.4g}")
    payload = {"fidelity": f, "min_eigenvalue": res.min_eigenvalue, "method": res.method,
               "rho_real": np.round(res.rho.real, 12).tolist(),
               "rho_imag": np.round(res.rho.imag, 12).tolist()}
    _emit(text, args.out, payload)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("--out", help="write JSON output here")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(
        prog="idcert", description=__doc__.splitlines()[0],
        epilog="exit codes: 0 ok, 2 input error, 3 empty result, 4 coverage gap",
    )
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("find-ids", parents=[common], help="list IDs of a stabilizer group")
    f.add_argument("source", help="state spec / generator JSON file, or a name like c_lin, ghz:5")
    f.add_argument("--max-m", type=int, default=5)
    f.add_argument("--min-m", type=int, default=2)
    for name in ("whole", "negative", "entangled", "critical"):
        f.add_argument(f"--{name}", action="store_true")
    f.add_argument("--full-support", action="store_true", help="rows must touch every qubit")
    f.set_defaults(func=cmd_find_ids)

    c = sub.add_parser("certify", parents=[common], help="certify a state from a dataset")
    c.add_argument("dataset")
    c.add_argument("--state", help="target (name[:n] or spec file); default from the dataset")
    c.add_argument("--id", help="ID JSON file or 'auto'")
    c.add_argument("--generators", help="comma-separated GoSG generators")
    c.add_argument("--cycles", type=int, default=ms.DEFAULT_MC_CYCLES)
    c.add_argument("--plot-data", metavar="DIR", help="write plot-data CSV files to DIR")
    c.set_defaults(func=cmd_certify)

    g = sub.add_parser("gamma", parents=[common], help="numeric witness bounds per class")
    g.add_argument("--id", required=True)
    g.add_argument("--classes", help="catalogue JSON (default: built-in four-qubit catalogue)")
    g.add_argument("--starts", type=int, default=gm.DEFAULT_STARTS)
    g.add_argument("--tolerance", type=float, default=gm.DEFAULT_TOL)
    g.set_defaults(func=cmd_gamma)

    s = sub.add_parser("simulate", parents=[common], help="synthetic noisy counts")
    s.add_argument("state")
    s.add_argument("--p", type=float, default=0.0, help="depolarizing probability")
    s.add_argument("--shots", type=int, default=10000)
    s.add_argument("--settings", default="auto", help="auto, a JSON list file, or XYZ,ZZZ,...")
    s.add_argument("--id", help="ID JSON used by --settings auto")
    s.add_argument("--full-tomo", action="store_true", help="all 3^N settings")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("tomo", parents=[common], help="linear-inversion tomography")
    t.add_argument("dataset")
    t.add_argument("--state")
    t.set_defaults(func=cmd_tomo)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except BrokenPipeError:  # output piped into head and friends
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except ms.CoverageError as exc:
        print(f"coverage gap: {exc}", file=sys.stderr)
        if exc.missing:
            print("needed: " + " ".join(exc.missing), file=sys.stderr)
        return EXIT_COVERAGE
    except (InputError, ms.MeasurementError, PauliError, IdError, st.StateError,
            StabilizerError, gm.GammaError, CertificationError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
