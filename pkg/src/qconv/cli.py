"""Command-line front end: channel ingestion, bound grids, CSV/JSON emission.

Subcommands: depol, bound, classical, capacity, chi, minentropy. Grid
commands emit rows with the columns

    n,epsilon,test_class,beta,bound_bits,rate_bits_per_use,wall_ms

sorted by (n, epsilon). Numbers are serialized with 12 significant digits
and no locale dependence, so identical configurations produce identical
output bytes. The wall_ms column is 0 unless --timing is passed (measured
times would break byte-for-byte reproducibility).

Exit codes: 0 success, 2 validation error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from . import bounds, linalg, quantum
from .bounds import SolverFailure, TestClass

CSV_HEADER = "n,epsilon,test_class,beta,bound_bits,rate_bits_per_use,wall_ms"


def fmt(x) -> str:
    """Serialize a number with 12 significant digits."""
    if isinstance(x, mp.mpf):
        return mp.nstr(x, 12)
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return f"{x:.11e}"


def _parse_complex_entry(entry) -> complex:
    if (not isinstance(entry, (list, tuple))) or len(entry) != 2:
        raise ValueError(f"complex entries must be [re, im] pairs, got {entry!r}")
    return complex(float(entry[0]), float(entry[1]))


def _parse_matrix(data, rows: int, cols: int) -> np.ndarray:
    if len(data) != rows or any(len(r) != cols for r in data):
        raise ValueError(f"matrix data must be {rows}x{cols}")
    return np.array([[_parse_complex_entry(e) for e in row] for row in data])


def parse_channel(spec: dict) -> quantum.QuantumChannel:
    """Build a channel from the JSON schema {dimIn, dimOut, representation, data}."""
    try:
        dim_in = int(spec["dimIn"])
        dim_out = int(spec["dimOut"])
        rep = spec["representation"]
        data = spec["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"channel spec missing field: {exc}") from exc
    if dim_in < 1 or dim_out < 1:
        raise ValueError("channel dimensions must be positive")
    if rep == "kraus":
        kraus = [_parse_matrix(m, dim_out, dim_in) for m in data]
        return quantum.QuantumChannel(kraus, atol=1e-8)
    if rep == "choi":
        choi = _parse_matrix(data, dim_in * dim_out, dim_in * dim_out)
        return quantum.channel_from_choi(choi, dim_in, dim_out, atol=1e-8)
    raise ValueError(f"representation must be 'kraus' or 'choi', got {rep!r}")


def load_channel(path: str) -> quantum.QuantumChannel:
    with open(path, encoding="utf-8") as fh:
        return parse_channel(json.load(fh))


def load_state(path: str) -> quantum.DensityMatrix:
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)
    d = int(spec["dim"])
    return quantum.DensityMatrix(_parse_matrix(spec["data"], d, d), atol=1e-8)


def load_ensemble(path: str) -> list[tuple[float, quantum.DensityMatrix]]:
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)
    probs = [float(p) for p in spec["probs"]]
    states = spec["states"]
    if len(probs) != len(states):
        raise ValueError("ensemble needs one probability per state")
    out = []
    for pr, st in zip(probs, states):
        d = len(st)
        out.append((pr, quantum.DensityMatrix(_parse_matrix(st, d, d), atol=1e-8)))
    return out


def parse_eps_list(text: str) -> list[float]:
    values = [float(tok) for tok in text.split(",") if tok]
    if not values or any(not 0.0 < v < 1.0 for v in values):
        raise ValueError(f"eps values must lie in (0, 1): {text!r}")
    return values


def parse_n_list(text: str) -> list[int]:
    out: list[int] = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ".." in tok:
            a, b = tok.split("..")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(tok))
    if not out or min(out) < 1:
        raise ValueError(f"n values must be >= 1: {text!r}")
    return out


@dataclass
class Row:
    n: int
    epsilon: float
    test_class: str
    beta: object
    bound_bits: float
    wall_ms: float

    def fields(self) -> list[str]:
        return [fmt(self.n), fmt(self.epsilon), self.test_class, fmt(self.beta),
                fmt(self.bound_bits), fmt(self.bound_bits / self.n), fmt(self.wall_ms)]


def emit_rows(rows: list[Row], path: str, form: str) -> None:
    rows = sorted(rows, key=lambda r: (r.n, r.epsilon))
    if form == "csv":
        text = "\n".join([CSV_HEADER] + [",".join(r.fields()) for r in rows]) + "\n"
    else:
        names = CSV_HEADER.split(",")
        payload = []
        for r in rows:
            obj = {}
            for name, value in zip(names, r.fields()):
                if name == "test_class":
                    obj[name] = value
                    continue
                num = float(value)
                mantissa = float(value.lower().split("e")[0])
                if num == 0.0 and mantissa != 0.0:
                    obj[name] = value  # beta below float64 range stays a string
                else:
                    obj[name] = num
            payload.append(obj)
        text = json.dumps(payload, indent=1) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _thread_count(args) -> int:
    env = os.environ.get("QCONV_THREADS")
    if env:
        return max(1, int(env))
    if args.threads:
        return max(1, int(args.threads))
    return os.cpu_count() or 1


def _grid(args, work, points) -> list[Row]:
    timing = bool(args.timing)

    def run_point(point):
        start = time.perf_counter()
        row = work(point)
        row.wall_ms = (time.perf_counter() - start) * 1e3 if timing else 0.0
        return row

    threads = _thread_count(args)
    if threads == 1:
        return [run_point(pt) for pt in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_point, points))


def cmd_depol(args) -> int:
    eps_list = parse_eps_list(args.eps)
    n_list = parse_n_list(args.n)

    def work(point):
        n, eps = point
        res = bounds.depolarising_exact(args.d, args.p, n, eps)
        return Row(n, eps, res.test_class.value, res.beta, res.bits, 0.0)

    rows = _grid(args, work, [(n, e) for n in n_list for e in eps_list])
    emit_rows(rows, args.out, args.format)
    return 0


def cmd_bound(args) -> int:
    channel = load_channel(args.channel)
    eps_list = parse_eps_list(args.eps)
    n_list = parse_n_list(args.n)
    cls = TestClass(args.cls.upper())

    def work(point):
        n, eps = point
        chan_n = quantum.tensor_power(channel, n) if n > 1 else channel
        if args.rho == "optimize":
            res = bounds.ea_bound_opt_rho(chan_n, eps, cls)
        else:
            if args.rho == "maximally-mixed":
                rho = quantum.maximally_mixed(chan_n.dim_in)
            else:
                rho = load_state(args.rho)
            res = bounds.ea_bound(chan_n, rho, eps, cls)
        return Row(n, eps, res.test_class.value, res.beta, res.bits, 0.0)

    rows = _grid(args, work, [(n, e) for n in n_list for e in eps_list])
    emit_rows(rows, args.out, args.format)
    return 0


def cmd_classical(args) -> int:
    with open(args.channel, encoding="utf-8") as fh:
        spec = json.load(fh)
    w = np.array(spec["data"], dtype=float)
    p = None
    if args.p and args.p != "optimize":
        with open(args.p, encoding="utf-8") as fh:
            p = np.array(json.load(fh), dtype=float)
    eps_list = parse_eps_list(args.eps)

    def work(point):
        _, eps = point
        res = bounds.classical_converse(w, eps, p)
        return Row(1, eps, res.test_class.value, res.beta, res.bits, 0.0)

    rows = _grid(args, work, [(1, e) for e in eps_list])
    emit_rows(rows, args.out, args.format)
    return 0


def cmd_capacity(args) -> int:
    channel = load_channel(args.channel)
    if args.rho == "maximally-mixed":
        rho = quantum.maximally_mixed(channel.dim_in)
    else:
        rho = load_state(args.rho)
    print(fmt(quantum.mutual_information(channel, rho)))
    return 0


def cmd_chi(args) -> int:
    channel = load_channel(args.channel)
    ensemble = load_ensemble(args.ensemble)
    eps = parse_eps_list(args.eps)[0]
    print(fmt(bounds.wang_renner_chi(ensemble, channel, eps)))
    return 0


def cmd_minentropy(args) -> int:
    eps = parse_eps_list(args.eps)[0]
    n = parse_n_list(args.n)[0]
    if args.depol_d:
        res = bounds.depolarising_exact(args.depol_d, args.depol_p, n, eps)
    else:
        channel = load_channel(args.channel)
        chan_n = quantum.tensor_power(channel, n) if n > 1 else channel
        res = bounds.ea_bound(chan_n, quantum.maximally_mixed(chan_n.dim_in), eps,
                              TestClass.ALL)
    print(fmt(bounds.noisy_storage_minentropy(args.rate, res)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qconv",
        description="Finite-blocklength converse bounds for quantum channels")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--out", default="-", help="output path, or - for stdout")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--threads", type=int, default=0,
                        help="worker threads (env QCONV_THREADS overrides)")
        sp.add_argument("--timing", action="store_true",
                        help="record measured wall_ms (breaks byte determinism)")

    sp = sub.add_parser("depol", help="exact bound for the depolarising channel")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--eps", required=True, help="comma-separated list in (0,1)")
    sp.add_argument("--n", required=True, help="list/range, e.g. 1..1000 or 1,2,10")
    add_common(sp)
    sp.set_defaults(func=cmd_depol)

    sp = sub.add_parser("bound", help="SDP converse bound for a channel file")
    sp.add_argument("--channel", required=True)
    sp.add_argument("--eps", required=True)
    sp.add_argument("--n", default="1")
    sp.add_argument("--class", dest="cls", choices=("all", "ppt"), default="all")
    sp.add_argument("--rho", default="maximally-mixed",
                    help="maximally-mixed, optimize, or a state JSON path")
    add_common(sp)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("classical", help="converse for a classical stochastic matrix")
    sp.add_argument("--channel", required=True, help="JSON with 'data' = column-stochastic matrix")
    sp.add_argument("--eps", required=True)
    sp.add_argument("--p", default="optimize", help="'optimize' or a JSON distribution path")
    add_common(sp)
    sp.set_defaults(func=cmd_classical)

    sp = sub.add_parser("capacity", help="quantum mutual information of a channel")
    sp.add_argument("--channel", required=True)
    sp.add_argument("--rho", default="maximally-mixed")
    sp.set_defaults(func=cmd_capacity)

    sp = sub.add_parser("chi", help="fixed-ensemble hypothesis-testing bound")
    sp.add_argument("--channel", required=True)
    sp.add_argument("--ensemble", required=True)
    sp.add_argument("--eps", required=True)
    sp.set_defaults(func=cmd_chi)

    sp = sub.add_parser("minentropy", help="noisy-storage min-entropy guarantee")
    sp.add_argument("--channel")
    sp.add_argument("--depol-d", type=int, default=0)
    sp.add_argument("--depol-p", type=float, default=0.0)
    sp.add_argument("--eps", required=True)
    sp.add_argument("--n", default="1")
    sp.add_argument("--rate", type=float, required=True,
                    help="total bits pushed through the storage channel")
    sp.set_defaults(func=cmd_minentropy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
