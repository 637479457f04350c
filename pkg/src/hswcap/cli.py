"""Command-line front end: ``hswcap capacity|contour|scan|sweep``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from contextlib import contextmanager

import numpy as np

from .bloch import BlochDomainError
from .capacity import METHODS, IterConfig, SolverError, capacity_sweep, solve_capacity
from .channels import ChannelError, ChannelKind, load_channel
from .contours import AngularScanRequest, ContourRequest, Plane, cmd_contour, cmd_scan, contour_rows
from .oracle import brute_force_capacity

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3

log = logging.getLogger("hswcap")


class InvalidInput(Exception):
    pass


def _vec(text: str) -> tuple[float, float, float]:
    try:
        parts = [float(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return tuple(parts)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _grid(text: str) -> list[float]:
    """``start:stop:count`` (inclusive linspace) or a comma-separated list."""
    if ":" in text:
        try:
            a, b, n = text.split(":")
            return np.linspace(float(a), float(b), int(n)).tolist()
        except ValueError:
            raise argparse.ArgumentTypeError(f"grid must be start:stop:count, got {text!r}")
    return list(_floats(text))


def _fmt(v) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return "(" + ", ".join(f"{x + 0.0: .4f}" for x in np.asarray(v, dtype=float)) + ")"


@contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_csv(path: str | None, header: list[str], rows) -> None:
    with _output(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def _load(path: str):
    try:
        return load_channel(path)
    except OSError as exc:
        raise InvalidInput(f"cannot read channel spec: {exc}") from exc
    except ChannelError as exc:
        raise InvalidInput(f"invalid channel spec: {exc}") from exc


def report_text(res, p, oracle=None) -> str:
    buf = io.StringIO()
    w = buf.write
    w(f"channel: t = {_fmt(p.t)}, lambda = {_fmt(p.lam)}\n")
    w(f"method: {res.method.value}")
    if res.iterations:
        w(f" ({res.iterations} iterations)")
    w("\n")
    w(f"C1 = {res.capacity_bits:.4f}\n")
    w(f"V = {_fmt(res.average_output)}\n")
    w(f"{'p':>8}  {'input':<28}  {'output':<28}\n")
    for m in res.ensemble.items:
        w(f"{m.prob:8.4f}  {_fmt(m.input):<28}  {_fmt(m.output):<28}\n")
    w(f"equal-distance residual: {res.max_equal_distance_residual:.2e}\n")
    if oracle is not None:
        gap = abs(res.capacity_bits - oracle.capacity_bits)
        w(f"oracle C1 = {oracle.capacity_bits:.4f} (n=4, restarts={oracle.diagnostics['restarts']}), gap = {gap:.2e}\n")
    return buf.getvalue()


def cmd_capacity(args) -> int:
    p = _load(args.channel)
    cfg = IterConfig(seed=args.seed)
    res = solve_capacity(p, args.method, cfg=cfg, seed=args.seed)
    oracle = brute_force_capacity(p, 4, args.restarts, args.seed) if args.verify else None
    if args.json:
        doc = res.to_dict()
        doc["channel"] = {"t": p.t.tolist(), "lambda": p.lam.tolist()}
        if oracle is not None:
            doc["oracle"] = {
                "capacity_bits": oracle.capacity_bits,
                "gap": abs(res.capacity_bits - oracle.capacity_bits),
                "diagnostics": oracle.to_dict()["diagnostics"],
            }
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = report_text(res, p, oracle)
    with _output(args.out) as fh:
        fh.write(text)
    return EXIT_OK


def cmd_contour_cli(args) -> int:
    try:
        req = ContourRequest(args.v, args.levels, Plane(args.plane), args.resolution)
    except (ValueError, BlochDomainError) as exc:
        raise InvalidInput(str(exc)) from exc
    res = cmd_contour(req)
    for lv in res.empty_levels:
        log.warning("level %g is not reached inside the unit disk; no polylines", lv)
    _write_csv(args.out, ["level", "polyline_id", "c1", "c2"], contour_rows(res))
    return EXIT_OK


def cmd_scan_cli(args) -> int:
    p = _load(args.channel)
    v = args.v
    if v is None:
        v = tuple(solve_capacity(p, "auto", IterConfig(seed=args.seed), seed=args.seed).average_output)
    try:
        req = AngularScanRequest(p, v, Plane(args.plane), args.samples)
    except (ValueError, BlochDomainError) as exc:
        raise InvalidInput(str(exc)) from exc
    res = cmd_scan(req)
    _write_csv(args.out, ["theta", "D"], zip(res.theta, res.d))
    return EXIT_OK


def cmd_sweep(args) -> int:
    kind = ChannelKind(args.kind)
    xs = args.grid
    if any(not 0.0 <= x <= 1.0 for x in xs):
        raise InvalidInput("sweep parameters must lie in [0, 1]")
    rows = capacity_sweep(kind, xs, threads=args.threads)
    if args.check_symmetry:
        if kind is not ChannelKind.TWO_PAULI:
            raise InvalidInput("--check-symmetry applies to the two_pauli family")
        worst = two_pauli_symmetry_gap(xs, threads=args.threads)
        ok = worst <= 1e-12
        print(f"two-Pauli symmetry C(1/3 - a) = C(1/3 + 2a): max gap {worst:.3e} ({'ok' if ok else 'FAILED'})", file=sys.stderr)
        if not ok:
            return EXIT_SOLVER
    _write_csv(args.out, ["x", "C1"], rows)
    return EXIT_OK


def two_pauli_symmetry_gap(xs, threads: int = 1) -> float:
    """Largest |C(1/3 - a) - C(1/3 + 2a)| over the pairs the grid allows."""
    alphas = [1.0 / 3.0 - x for x in xs if 0.0 < 1.0 / 3.0 - x <= 1.0 / 3.0]
    if not alphas:
        return 0.0
    left = capacity_sweep(ChannelKind.TWO_PAULI, [1 / 3 - a for a in alphas], threads)
    right = capacity_sweep(ChannelKind.TWO_PAULI, [1 / 3 + 2 * a for a in alphas], threads)
    return max(abs(a[1] - b[1]) for a, b in zip(left, right))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hswcap", description="Product-state classical capacity of qubit channels.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("capacity", help="capacity, optimal ensemble and diagnostics of one channel")
    c.add_argument("--channel", required=True, help="channel spec JSON file")
    c.add_argument("--method", choices=METHODS, default="auto")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--json", action="store_true", help="full-precision JSON instead of the text report")
    c.add_argument("--verify", action="store_true", help="also run the brute-force oracle and report the gap")
    c.add_argument("--restarts", type=int, default=20, help="oracle restarts for --verify")
    c.add_argument("--out")
    c.set_defaults(func=cmd_capacity)

    k = sub.add_parser("contour", help="CSV polylines of constant D(. || v) in a coordinate plane")
    k.add_argument("--v", type=_vec, default=(0.0, 0.0, 0.0), help="second argument, e.g. 0,0.5,0")
    k.add_argument("--levels", type=_floats, required=True, help="comma-separated levels in bits")
    k.add_argument("--plane", choices=[pl.value for pl in Plane], default="xy")
    k.add_argument("--resolution", type=int, default=512)
    k.add_argument("--out")
    k.set_defaults(func=cmd_contour_cli)

    s = sub.add_parser("scan", help="CSV of D(boundary point || v) against the polar angle theta")
    s.add_argument("--channel", required=True)
    s.add_argument("--v", type=_vec, help="defaults to the channel's optimal average output")
    s.add_argument("--plane", choices=[pl.value for pl in Plane], default="xy")
    s.add_argument("--samples", type=int, default=720)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan_cli)

    w = sub.add_parser("sweep", help="CSV of capacity over a named channel family")
    w.add_argument("--kind", choices=[kd.value for kd in ChannelKind], required=True)
    w.add_argument("--grid", type=_grid, default=np.linspace(0, 1, 101).tolist(), help="start:stop:count or a list")
    w.add_argument("--check-symmetry", action="store_true")
    w.add_argument("--threads", type=int, default=1)
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SolverError, BlochDomainError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
