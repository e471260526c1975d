"""Deterministic command-line runner: every command takes a seed, writes a
JSON artifact embedding the resolved config, and emits CSV for tabular runs.

Exit codes: 0 success, 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import approx, gf, kruskal, symdecomp, varieties
from .tensors import DenseTensor

SCHEMA_VERSION = "1"


def _parse_tensor(literal: str, shape=None) -> DenseTensor:
    """Tensor literals: ``diag:3,2,1`` (diagonal entries) or ``file:path.json``."""
    if literal.startswith("file:"):
        with open(literal[5:], "r", encoding="utf-8") as fh:
            return DenseTensor.from_json(fh.read())
    if literal.startswith("diag:"):
        vals = [float(x) for x in literal[5:].split(",")]
        if shape is None:
            return DenseTensor.from_array(np.asarray(vals))
        if len(vals) > min(shape):
            raise ValueError("too many diagonal entries for the shape")
        arr = np.zeros(shape)
        for i, v in enumerate(vals):
            arr[(i,) * len(shape)] = v
        return DenseTensor.from_array(arr)
    raise ValueError(f"unrecognized tensor literal {literal!r}; "
                     "use diag:... or file:path.json")


def _parse_ints(text: str):
    return tuple(int(x) for x in text.split(","))


def _parse_floats(text: str):
    return tuple(float(x) for x in text.split(","))


def _variety_from_args(args) -> varieties.VarietySpec:
    kind = args.variety
    if kind == "subspace":
        if args.basis is None:
            raise ValueError("subspace requires --basis file:path.json")
        t = _parse_tensor(args.basis)
        return varieties.VarietySpec.subspace(t.array())
    if kind == "diag-quadric":
        if args.coeffs is None:
            raise ValueError("diag-quadric requires --coeffs a1,a2,...")
        return varieties.VarietySpec.diag_quadric(_parse_floats(args.coeffs))
    if kind == "matrix-rank":
        if args.p is None or args.q is None or args.k is None:
            raise ValueError("matrix-rank requires --p --q --k")
        return varieties.VarietySpec.matrix_rank(args.p, args.q, args.k)
    if kind == "tensor-rank-one":
        if args.shape is None:
            raise ValueError("tensor-rank-one requires --shape m1,m2,...")
        return varieties.VarietySpec.tensor_rank_one(_parse_ints(args.shape))
    if kind == "tensor-rank":
        if args.shape is None or args.k is None:
            raise ValueError("tensor-rank requires --shape and --k")
        return varieties.VarietySpec.tensor_rank(_parse_ints(args.shape), args.k)
    raise ValueError(f"unknown variety {kind!r}")


def _variety_shape(v: varieties.VarietySpec):
    if v.kind == "matrix_rank":
        return (v.p, v.q)
    if v.kind in ("tensor_rank_one", "tensor_rank"):
        return v.shape
    return None


def _write_json(path: str, config: dict, result) -> None:
    artifact = {"schema_version": SCHEMA_VERSION, "config": config,
                "result": result}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(artifact, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(path: str, rows) -> None:
    if not rows:
        return
    fields = list(rows[0].keys())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(row[k]) for k in fields})


def _csv_cell(val):
    if isinstance(val, float):
        if math.isinf(val):
            return "inf"
        if math.isnan(val):
            return "nan"
        return repr(val)
    return val


def _config_dict(args, keys):
    cfg = {"command": args.command, "threads": args.threads}
    if getattr(args, "subcommand", None):
        cfg["subcommand"] = args.subcommand
    for key in keys:
        cfg[key] = getattr(args, key)
    return cfg


# ---------------------------------------------------------------------------
# command handlers (return (summary line, rows-or-None))


def _cmd_critpoints(args):
    v = _variety_from_args(args)
    query = _parse_tensor(args.query, shape=_variety_shape(v))
    report = varieties.critical_set(v, query.data, starts=args.starts,
                                    seed=args.seed)
    cfg = _config_dict(args, ["variety", "query", "starts", "seed"])
    _write_json(args.output + ".json", cfg, json.loads(report.to_json()))
    line = (f"critpoints: {len(report.points)} points, "
            f"delta_estimate={report.delta_estimate}, "
            f"distance={report.distance:.6g}")
    return line, None


def _cmd_approx(args):
    t = _parse_tensor(args.tensor)
    if args.symmetric:
        from .tensors import symmetrize
        model = approx.best_rank1_symmetric(symmetrize(t), starts=args.starts,
                                            seed=args.seed)
    elif args.k == 1:
        model = approx.best_rank1(t, starts=args.starts, seed=args.seed)
    else:
        model = approx.best_rank_k(t, args.k, starts=args.starts,
                                   seed=args.seed)
    cfg = _config_dict(args, ["tensor", "k", "symmetric", "starts", "seed"])
    _write_json(args.output + ".json", cfg, json.loads(model.to_json()))
    return (f"approx: objective={model.objective:.6g}, "
            f"escaped={model.escaped}"), None


def _cmd_kruskal(args):
    with open(args.bundle, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    bundle = kruskal.FactorBundle(np.asarray(obj["Y"], dtype=float),
                                  np.asarray(obj["Z"], dtype=float),
                                  np.asarray(obj["W"], dtype=float))
    cert = kruskal.certify(bundle)
    cfg = _config_dict(args, ["bundle", "seed"])
    _write_json(args.output + ".json", cfg, json.loads(cert.to_json()))
    return f"kruskal: {cert.verdict} (kappas={cert.kappas}, r={cert.r})", None


def _cmd_decomp(args):
    if args.mode == "mixed":
        s = symdecomp.mixed_power(_parse_floats(args.u), _parse_floats(args.v),
                                  args.k, args.d)
        result = json.loads(s.to_json())
        line = f"decomp mixed: S_({args.k},{args.d - args.k})"
    elif args.mode == "vandermonde":
        comb = symdecomp.vandermonde_decompose(
            _parse_floats(args.u), _parse_floats(args.v), args.k, args.d)
        result = json.loads(comb.to_json())
        line = f"decomp vandermonde: {len(comb.terms)} pure powers"
    elif args.mode == "power-basis":
        vectors = symdecomp.power_basis(args.m, args.d)
        result = {"m": args.m, "d": args.d,
                  "vectors": [list(v) for v in vectors]}
        line = f"decomp power-basis: {len(vectors)} vectors, det != 0"
    else:
        raise ValueError(f"unknown decomp mode {args.mode!r}")
    cfg = _config_dict(args, ["mode", "u", "v", "k", "d", "m", "seed"])
    _write_json(args.output + ".json", cfg, result)
    return line, None


def _cmd_gf(args):
    if args.subcommand == "example64":
        t = gf.example64_tensor()
        result = {"rank": gf.rank_exhaustive(t, 4),
                  "srank": gf.srank_exhaustive(t, 4)}
        line = f"gf example64: rank={result['rank']}, srank={result['srank']}"
    elif args.subcommand in ("rank", "srank"):
        with open(args.tensor, "r", encoding="utf-8") as fh:
            t = gf.GFTensor.from_json(fh.read())
        fn = gf.rank_exhaustive if args.subcommand == "rank" \
            else gf.srank_exhaustive
        value = fn(t, args.max_terms)
        result = {args.subcommand: value}
        line = f"gf {args.subcommand}: {value}"
    elif args.subcommand == "prop61":
        res = gf.prop61_witness(args.p, args.m, args.d)
        result = json.loads(res.to_json())
        line = (f"gf prop61: span_dim={res.span_dim}/{res.sym_dim}, "
                f"witness={'present' if res.witness else 'absent'}")
    else:
        raise ValueError(f"unknown gf subcommand {args.subcommand!r}")
    cfg = _config_dict(args, ["seed"])
    _write_json(args.output + ".json", cfg, result)
    return line, None


def _cmd_experiment(args):
    sub = args.subcommand
    rows = None
    if sub == "thm71":
        summary, rows = approx.experiment_thm71(
            args.m, args.d, args.trials, args.starts, args.seed)
        line = (f"experiment thm71: fraction_symmetric="
                f"{summary['fraction_symmetric']:.3f}, "
                f"fraction_unique={summary['fraction_unique']:.3f}")
    elif sub == "thm72":
        summary, rows = approx.experiment_thm72(
            args.m, args.d, args.k, args.noise, args.trials, args.starts,
            args.seed)
        line = (f"experiment thm72: fraction_symmetric="
                f"{summary['fraction_symmetric']:.3f}, "
                f"escapes={summary['escapes']}")
    elif sub == "lipschitz":
        v = _variety_from_args(args)
        ratio = varieties.lipschitz_probe(v, args.trials, args.seed,
                                          starts=args.starts)
        summary = {"variety": args.variety, "trials": args.trials,
                   "seed": args.seed, "max_ratio": ratio}
        line = f"experiment lipschitz: max_ratio={ratio:.12f}"
    elif sub == "uniqueness":
        v = _variety_from_args(args)
        frac = varieties.uniqueness_probe(v, args.trials, args.seed,
                                          starts=args.starts)
        summary = {"variety": args.variety, "trials": args.trials,
                   "seed": args.seed, "fraction_unique": frac}
        line = f"experiment uniqueness: fraction_unique={frac:.3f}"
    else:
        raise ValueError(f"unknown experiment {sub!r}")
    cfg = _config_dict(args, [k for k in
                              ("m", "d", "k", "noise", "trials", "starts",
                               "seed", "variety")
                              if hasattr(args, k)])
    _write_json(args.output + ".json", cfg, summary)
    if rows is not None:
        _write_csv(args.output + ".csv", rows)
    return line, rows


# ---------------------------------------------------------------------------


def _add_common(p, seed_default=0):
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--output", type=str, default="edcrit_run")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("EDCRIT_THREADS", "0")) or None)


def _add_variety_flags(p):
    p.add_argument("--variety", required=True,
                   choices=["subspace", "diag-quadric", "matrix-rank",
                            "tensor-rank-one", "tensor-rank"])
    p.add_argument("--basis", type=str, default=None)
    p.add_argument("--coeffs", type=str, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--shape", type=str, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edcrit",
        description="Critical points, tensor approximation, and certification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("critpoints", help="critical set of a distance query")
    _add_variety_flags(p)
    p.add_argument("--query", required=True)
    p.add_argument("--starts", type=int, default=200)
    _add_common(p)

    p = sub.add_parser("approx", help="best rank-1 or rank-k approximation")
    p.add_argument("--tensor", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--starts", type=int, default=50)
    _add_common(p)

    p = sub.add_parser("kruskal", help="certify a factor bundle")
    p.add_argument("--bundle", required=True,
                   help="JSON file with matrices Y, Z, W")
    _add_common(p)

    p = sub.add_parser("decomp", help="exact symmetric decompositions")
    p.add_argument("--mode", required=True,
                   choices=["mixed", "vandermonde", "power-basis"])
    p.add_argument("--u", type=str, default=None)
    p.add_argument("--v", type=str, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("gf", help="finite-field rank computations")
    gsub = p.add_subparsers(dest="subcommand", required=True)
    g = gsub.add_parser("example64")
    _add_common(g)
    for name in ("rank", "srank"):
        g = gsub.add_parser(name)
        g.add_argument("--tensor", required=True)
        g.add_argument("--max-terms", type=int, default=4)
        _add_common(g)
    g = gsub.add_parser("prop61")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    _add_common(g)

    p = sub.add_parser("experiment", help="seeded statistical experiments")
    esub = p.add_subparsers(dest="subcommand", required=True)
    for name in ("thm71", "thm72"):
        e = esub.add_parser(name)
        e.add_argument("--m", type=int, required=True)
        e.add_argument("--d", type=int, required=True)
        if name == "thm72":
            e.add_argument("--k", type=int, required=True)
            e.add_argument("--noise", type=float, default=0.0)
        e.add_argument("--trials", type=int, default=100)
        e.add_argument("--starts", type=int, default=50)
        _add_common(e)
    for name in ("lipschitz", "uniqueness"):
        e = esub.add_parser(name)
        _add_variety_flags(e)
        e.add_argument("--trials", type=int, default=100)
        e.add_argument("--starts", type=int, default=60)
        _add_common(e)

    return parser


_HANDLERS = {
    "critpoints": _cmd_critpoints,
    "approx": _cmd_approx,
    "kruskal": _cmd_kruskal,
    "decomp": _cmd_decomp,
    "gf": _cmd_gf,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        line, _ = _HANDLERS[args.command](args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
