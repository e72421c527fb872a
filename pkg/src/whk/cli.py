"""Command-line front end.

One invocation dispatches one operation; outputs are a single JSON document
(or CSV for sweeps) on stdout or --out.  Exit status: 0 for definite
verdicts, 2 for unknown/inconclusive verdicts, 1 for errors (with a
machine-readable error object naming the offending field).  Runs are
reproducible from (inputs, seed, tolerance, starts); the seed always appears
in the output header.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

import numpy as np

from . import families, hierarchy, order, serialize, states
from .core import DEFAULT_TOL, Dims
from .errors import (
    NoSeparatorFoundError,
    SchemaError,
    SearchInconclusiveError,
    WhkError,
)
from .states import Witness

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2


def _default_tol() -> float:
    raw = os.environ.get("WHK_DEFAULT_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        value = float(raw)
    except ValueError:
        raise SchemaError(f"WHK_DEFAULT_TOL is not a number: {raw!r}", field="WHK_DEFAULT_TOL")
    if value <= 0:
        raise SchemaError("WHK_DEFAULT_TOL must be positive", field="WHK_DEFAULT_TOL")
    return value


_ERROR_KINDS = {
    "SchemaError": "schema-violation",
    "NoWitnessError": "no-witness-exists",
    "NoSeparatorFoundError": "no-separator-found",
    "NotInOtherObservablesError": "not-in-other-observables",
    "SearchInconclusiveError": "inconclusive",
}


def _error_kind(exc: Exception) -> str:
    name = type(exc).__name__
    if name in _ERROR_KINDS:
        return _ERROR_KINDS[name]
    if name.endswith("Error"):
        name = name[: -len("Error")]
    out = []
    for ch in name:
        if ch.isupper() and out:
            out.append("-")
        out.append(ch.lower())
    return "".join(out)


def _emit(doc: dict, args) -> None:
    serialize.write_json(doc, args.out)


def _emit_csv(header: list, rows: list, args, config: dict) -> None:
    lines = ["# " + " ".join(f"{k}={v!r}" for k, v in config.items())]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_csv_cell(x) for x in row))
    text = "\n".join(lines)
    if args.out is None:
        print(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")


def _csv_cell(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _config(args, command: str) -> dict:
    return {
        "command": command,
        "seed": args.seed,
        "tol": args.tol,
        "starts": args.starts,
    }


def _certified_witness(path: str, args) -> Witness:
    op = serialize.read_operator(path)
    return Witness.certify(op, starts=args.starts, seed=args.seed, tol=args.tol)


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------


def _cmd_classify(args) -> int:
    op = serialize.read_operator(args.input[0])
    label = hierarchy.classify(
        op, effort=args.effort, seed=args.seed, starts=args.starts, tol=args.tol
    )
    _emit(
        {"config": _config(args, "classify"), "stratum": label.stratum, "sub": label.sub},
        args,
    )
    return EXIT_INCONCLUSIVE if label.stratum == hierarchy.STRATUM_UNKNOWN else EXIT_OK


def _cmd_detect(args) -> int:
    w = _certified_witness(args.input[0], args)
    rho = serialize.read_state(args.input[1])
    det = states.detects(w, rho, tol=args.tol)
    _emit({"config": _config(args, "detect"), **serialize.detection_to_dict(det)}, args)
    return EXIT_OK


def _cmd_witness_for(args) -> int:
    rho = serialize.read_state(args.input[0])
    try:
        w = hierarchy.witness_for(
            rho, effort=args.effort, seed=args.seed, starts=args.starts, tol=args.tol
        )
    except SearchInconclusiveError as exc:
        _emit(
            {"config": _config(args, "witness-for"), "inconclusive": True, "reason": str(exc)},
            args,
        )
        return EXIT_INCONCLUSIVE
    _emit({"config": _config(args, "witness-for"), **serialize.witness_to_dict(w)}, args)
    return EXIT_OK


def _cmd_super_witness(args) -> int:
    w = _certified_witness(args.input[0], args)
    pi = hierarchy.super_witness_for(w, seed=args.seed, tol=args.tol)
    doc = {
        "config": _config(args, "super-witness"),
        **serialize.state_to_dict(pi),
        "pairing": states.detects(w, pi, tol=args.tol).value
        if w.op.dims == pi.op.dims
        else None,
    }
    _emit(doc, args)
    return EXIT_OK


def _cmd_ssw(args) -> int:
    op = serialize.read_operator(args.input[0])
    upsilon = hierarchy.super_super_witness_for(
        op, starts=args.starts, seed=args.seed, tol=args.tol
    )
    from .core import pairing

    _emit(
        {
            "config": _config(args, "ssw"),
            **serialize.state_to_dict(upsilon),
            "pairing": pairing(upsilon.op, op),
        },
        args,
    )
    return EXIT_OK


def _cmd_common_state(args) -> int:
    w1 = _certified_witness(args.input[0], args)
    w2 = _certified_witness(args.input[1], args)
    res = hierarchy.common_detected_state(w1, w2, tol=args.tol)
    _emit(
        {
            "config": _config(args, "common-state"),
            "state": serialize.state_to_dict(res.state) if res.state else None,
            "blocking_lambda": res.blocking_lambda,
        },
        args,
    )
    return EXIT_OK


def _cmd_common_witness(args) -> int:
    p1 = serialize.read_state(args.input[0])
    p2 = serialize.read_state(args.input[1])
    res = hierarchy.common_witness(p1, p2, tol=args.tol)
    _emit(
        {
            "config": _config(args, "common-witness"),
            "witness": serialize.witness_to_dict(res.witness) if res.witness else None,
            "blocking_lambda": res.blocking_lambda,
        },
        args,
    )
    return EXIT_OK


def _cmd_distinguish(args) -> int:
    r1 = serialize.read_state(args.input[0])
    r2 = serialize.read_state(args.input[1])
    m = hierarchy.distinguish(r1, r2, tol=args.tol)
    _emit(
        {"config": _config(args, "distinguish"), "operator": serialize.operator_to_dict(m)},
        args,
    )
    return EXIT_OK


def _cmd_delta(args) -> int:
    r1 = serialize.read_state(args.input[0])
    r2 = serialize.read_state(args.input[1])
    res = order.delta(r1, r2)
    _emit(
        {
            "config": _config(args, "delta"),
            "delta": res.delta if np.isfinite(res.delta) else "infinity",
            "mu_star": res.mu_star,
            "support_contained": res.support_contained,
        },
        args,
    )
    return EXIT_OK


def _cmd_finer(args) -> int:
    r1 = serialize.read_state(args.input[0])
    r2 = serialize.read_state(args.input[1])
    res = order.is_finer(r1, r2, seed=args.seed, tol=args.tol)
    _emit(
        {
            "config": _config(args, "finer"),
            "finer": res.finer,
            "epsilon": res.epsilon,
            "p": serialize.state_to_dict(res.p) if res.p is not None else None,
            "counterexample": serialize.operator_to_dict(res.counterexample)
            if res.counterexample is not None
            else None,
        },
        args,
    )
    return EXIT_OK


def _cmd_optimal(args) -> int:
    rho = serialize.read_state(args.input[0])
    res = order.is_optimal(rho, starts=args.starts, seed=args.seed, tol=args.tol)
    _emit(
        {
            "config": _config(args, "optimal"),
            "optimal": res.optimal,
            "witness_vector": serialize.product_vector_to_dict(res.witness_vector)
            if res.witness_vector is not None
            else None,
            "range_gap": res.range_gap,
        },
        args,
    )
    return EXIT_OK


def _cmd_edge(args) -> int:
    rho = serialize.read_state(args.input[0])
    res = order.is_edge(rho, starts=max(args.starts, 200), seed=args.seed, tol=args.tol)
    _emit({"config": _config(args, "edge"), "edge": res}, args)
    return EXIT_OK


def _cmd_optimize(args, command: str = "optimize") -> int:
    rho = serialize.read_state(args.input[0])
    res = order.optimize(rho, max_steps=args.max_steps, seed=args.seed, tol=args.tol)
    if args.format == "csv":
        _emit_csv(
            ["step", "lambda", "residual_trace"],
            [list(r) for r in res.trace_rows],
            args,
            _config(args, command),
        )
        return EXIT_OK
    _emit({"config": _config(args, command), **serialize.bsa_result_to_dict(res)}, args)
    return EXIT_OK


def _cmd_bsa(args) -> int:
    return _cmd_optimize(args, command="bsa")


def _cmd_measure(args) -> int:
    rho = serialize.read_state(args.input[0])
    res = families.measure(rho, seed=args.seed, tol=args.tol)
    _emit(
        {
            "config": _config(args, "measure"),
            "value": res.value,
            "mode": res.mode,
            "achieving_witness": serialize.witness_to_dict(res.achieving_witness)
            if res.achieving_witness is not None
            else None,
        },
        args,
    )
    return EXIT_OK


def _cmd_tiles(args) -> int:
    upb = families.tiles_upb()
    rho = families.upb_complement_state(upb)
    _emit(
        {
            "config": _config(args, "tiles"),
            "upb": serialize.upb_to_dict(upb),
            "complement_state": serialize.state_to_dict(rho),
        },
        args,
    )
    return EXIT_OK


def _cmd_ces_dim(args) -> int:
    value = families.ces_max_dim(args.dims)
    _emit(
        {"config": _config(args, "ces-dim"), "dims": args.dims, "max_ces_dim": value},
        args,
    )
    return EXIT_OK


def _cmd_separate(args) -> int:
    target = serialize.read_operator(args.input[0])
    samples = [serialize.read_operator(p) for p in args.input[1:]]
    if args.random_product_samples > 0:
        rng = np.random.default_rng(args.seed)
        from .separators import _random_product_projectors

        samples.extend(
            _random_product_projectors(target.dims, args.random_product_samples, rng)
        )
    try:
        res = hierarchy.separate(target, samples, iters=args.iters, tol=args.tol)
    except NoSeparatorFoundError as exc:
        _emit(
            {"config": _config(args, "separate"), "found": False, "reason": str(exc)},
            args,
        )
        return EXIT_OK
    _emit(
        {
            "config": _config(args, "separate"),
            "found": True,
            "separator": serialize.operator_to_dict(res.separator),
            "target_value": res.target_value,
            "set_floor": res.set_floor,
        },
        args,
    )
    return EXIT_OK


def sweep_werner(
    grid,
    columns=("trace_pairing", "class"),
    seed: int = 0,
    starts: int = 64,
    tol: float = DEFAULT_TOL,
) -> list:
    """One row per grid point; scalar outputs of the requested quantities.

    Available columns: trace_pairing (pairing with the canonical witness),
    class (stratum string), measure, delta (against the Bell state).
    Bitwise stable for identical inputs.
    """
    grid = list(grid)
    if not grid:
        raise SchemaError("empty sweep grid", field="grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise SchemaError("sweep grid must be strictly ascending", field="grid")
    from .core import pairing

    w0 = families.werner_witness_operator()
    bell = states.pure_state(Dims(2, 2), families.bell_phi_plus())
    rows = []
    for p in grid:
        rho = families.werner(float(p))
        row = {"p": float(p)}
        for col in columns:
            if col == "trace_pairing":
                row[col] = pairing(w0, rho.op)
            elif col == "class":
                label = hierarchy.classify(
                    rho.op, seed=seed, starts=starts, tol=tol
                )
                row[col] = label.stratum
            elif col == "measure":
                row[col] = families.measure(rho, seed=seed, tol=tol).value
            elif col == "delta":
                row[col] = order.delta(rho, bell).delta
            else:
                raise SchemaError(f"unknown sweep column {col!r}", field="columns")
        rows.append(row)
    return rows


def _cmd_werner_sweep(args) -> int:
    if args.steps < 1:
        raise SchemaError("steps must be >= 1", field="steps")
    if args.steps == 1:
        grid = [args.p_min]
    else:
        grid = list(np.linspace(args.p_min, args.p_max, args.steps))
    columns = [c.strip() for c in args.columns.split(",") if c.strip()]
    rows = sweep_werner(grid, columns, seed=args.seed, starts=args.starts, tol=args.tol)
    header = ["p"] + columns
    _emit_csv(
        header,
        [[row[h] for h in header] for row in rows],
        args,
        _config(args, "werner-sweep"),
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="whk",
        description="Classify, order and optimize bipartite quantum operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, n_inputs, help_text, **extra):
        p = sub.add_parser(name, help=help_text)
        if n_inputs > 0:
            nargs = n_inputs if n_inputs >= 0 else "+"
            p.add_argument("input", nargs=nargs, help="operator JSON file(s)")
        elif n_inputs < 0:
            p.add_argument("input", nargs="+", help="operator JSON file(s)")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--starts", type=int, default=64)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["json", "csv"], default=extra.pop("fmt", "json"))
        p.add_argument("--effort", type=int, default=200)
        for flag, kwargs in extra.items():
            p.add_argument(flag.replace("_", "-"), **kwargs)
        p.set_defaults(handler=handler)
        return p

    add("classify", _cmd_classify, 1, "stratum of a Hermitian operator")
    add("detect", _cmd_detect, 2, "pairing of a witness with a state")
    add("witness-for", _cmd_witness_for, 1, "witness detecting an entangled state")
    add("super-witness", _cmd_super_witness, 1, "entangled state detecting a witness")
    add("ssw", _cmd_ssw, 1, "product state detecting a non-block-positive observable")
    add("common-state", _cmd_common_state, 2, "state detected by two witnesses")
    add("common-witness", _cmd_common_witness, 2, "witness detecting two states")
    add("distinguish", _cmd_distinguish, 2, "separator between two states")
    add("delta", _cmd_delta, 2, "witnessed-set infimum ratio")
    add("finer", _cmd_finer, 2, "is the second state finer than the first")
    add("optimal", _cmd_optimal, 1, "no-finer-state test")
    add("edge", _cmd_edge, 1, "edge test for PPT entangled states")
    p_opt = add("optimize", _cmd_optimize, 1, "best separable approximation")
    p_opt.add_argument("--max-steps", type=int, default=200)
    p_bsa = add("bsa", _cmd_bsa, 1, "best separable approximation (trace CSV capable)")
    p_bsa.add_argument("--max-steps", type=int, default=200)
    add("measure", _cmd_measure, 1, "witness-based entanglement measure")
    add("tiles", _cmd_tiles, 0, "tiles UPB and its bound entangled complement")
    p_ces = sub.add_parser("ces-dim", help="largest completely entangled subspace dimension")
    p_ces.add_argument("dims", nargs="+", type=int)
    for flag, kw in [
        ("--tol", dict(type=float, default=None)),
        ("--seed", dict(type=int, default=0)),
        ("--starts", dict(type=int, default=64)),
        ("--out", dict(default=None)),
        ("--format", dict(choices=["json", "csv"], default="json")),
    ]:
        p_ces.add_argument(flag, **kw)
    p_ces.set_defaults(handler=_cmd_ces_dim)
    p_sep = add("separate", _cmd_separate, -1, "separating functional from sampled cone")
    p_sep.add_argument("--iters", type=int, default=2000)
    p_sep.add_argument("--random-product-samples", type=int, default=0)
    p_sweep = sub.add_parser("werner-sweep", help="CSV sweep over the Werner line")
    p_sweep.add_argument("--p-min", type=float, default=0.0)
    p_sweep.add_argument("--p-max", type=float, default=1.0)
    p_sweep.add_argument("--steps", type=int, default=101)
    p_sweep.add_argument("--columns", default="trace_pairing,class")
    p_sweep.add_argument("--tol", type=float, default=None)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--starts", type=int, default=64)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--format", choices=["json", "csv"], default="csv")
    p_sweep.set_defaults(handler=_cmd_werner_sweep)
    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is None:
            args.tol = _default_tol()
        elif args.tol <= 0:
            raise SchemaError("tolerance must be positive", field="tol")
        if getattr(args, "starts", 1) < 1:
            raise SchemaError("starts must be >= 1", field="starts")
        return args.handler(args)
    except WhkError as exc:
        doc = {"error": {"kind": _error_kind(exc), "message": str(exc)}}
        if isinstance(exc, SchemaError):
            doc["error"]["field"] = exc.field
        serialize.write_json(doc, getattr(args, "out", None))
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
