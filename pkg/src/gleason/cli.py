"""Command-line front end.

Exit codes: 0 when the run completes (a FAIL certificate is data), 2 when a
contract check inside the run fails, 1 on input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from jsonschema import ValidationError

from .cconvexity import check_cconvex
from .collar import collar_cover, interior_cover, verify_lemma1
from .core import decompose_at_point, oracle_from_spec, polynomial_oracle
from .domains import CATALOG_KINDS, load_domain, make_domain
from .errors import DimensionMismatch, GleasonError, PointOutsideDomain
from .experiments import continuity_experiment, estimate_K, grange_approach
from .polynomials import Polynomial
from .schemas import validate

THREADS_ENV = "GLEASON_THREADS"


class InputError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, value)


def _domain(spec: str):
    if spec in CATALOG_KINDS:
        return make_domain(spec)
    path = Path(spec)
    if not path.exists():
        raise InputError(f"--domain: no such file or catalog kind {spec!r}")
    try:
        return load_domain(path)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _oracle(spec: str, n: int):
    """``poly:<expression>``, a named oracle, or a polynomial JSON file."""
    if spec.endswith(".json"):
        path = Path(spec)
        try:
            data = json.loads(path.read_text())
            validate(data, "polynomial")
        except OSError as exc:
            raise InputError(f"--f: cannot read {spec!r}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        except ValidationError as exc:
            field = "/".join(str(k) for k in exc.absolute_path) or "<root>"
            raise InputError(f"{path}: field {field}: {exc.message}") from exc
        p = Polynomial.from_json_dict(data)
        if p.n != n:
            raise DimensionMismatch(f"{path}: polynomial has n = {p.n}, domain has n = {n}")
        return polynomial_oracle(p, path.stem)
    return oracle_from_spec(spec, n)


def _point(text: str, n: int) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise InputError(f"--point {text!r}: expected comma separated numbers") from exc
    if len(vals) != 2 * n:
        raise InputError(f"--point {text!r}: expected {2 * n} numbers (re, im per coordinate)")
    return np.array(vals[0::2]) + 1j * np.array(vals[1::2])


def _cover(domain, args):
    if getattr(args, "clearance", None):
        return interior_cover(domain, args.clearance, seed=args.seed)
    strict = domain.kind in ("ball", "ellipsoid") and not args.no_lemma1
    kwargs = {"patch_budget": args.patches or 24}
    if domain.kind == "ellipsoid":
        kwargs = {"patch_budget": args.patches or 48, "radius_factor": 1.05}
    return collar_cover(domain, require_lemma1=strict, seed=args.seed, **kwargs)


def _write_json(path: Path, payload: dict, schema: str) -> None:
    validate(payload, schema)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _summary(command: str, domain, status: str, files: list, **extra) -> dict:
    return {"command": command, "domain": domain.name, "status": status, "files": files, **extra}


# -- commands ---------------------------------------------------------------

def cmd_decompose(args, out: Path) -> int:
    domain = _domain(args.domain)
    f = _oracle(args.f, domain.n)
    points = [_point(p, domain.n) for p in args.point]
    closed = f.polynomial is not None and args.method in ("auto", "closed_form")
    cover = None if closed else _cover(domain, args)

    def run(z):
        return decompose_at_point(f, z, domain, cover, args.method, seed=args.seed)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        reports = list(pool.map(run, points))
    failed = [i for i, r in enumerate(reports) if not r.passed]
    payload = _summary("decompose", domain, "FAILED" if failed else "OK", ["decomposition.json"],
                       function=args.f, reports=[r.to_json_dict() for r in reports])
    _write_json(out / "decomposition.json", payload, "decomposition")
    for r in reports:
        print(f"{r.method}: T = {np.round(r.values, 12).tolist()}  residual = {r.residual:.3e}  {r.status}")
    if failed:
        print(f"residual check failed for point #{failed[0]} ({args.point[failed[0]]})", file=sys.stderr)
        return 2
    return 0


def cmd_check_domain(args, out: Path) -> int:
    domain = _domain(args.domain)
    cert = check_cconvex(domain, n_lines=args.lines, resolution=args.resolution, seed=args.seed)
    cert.write_csv(out / "lines.csv")
    payload = _summary("check-domain", domain, "OK", ["certificate.json", "lines.csv"],
                       certificate=json.loads(json.dumps(cert.to_json_dict())))
    _write_json(out / "certificate.json", payload, "certificate")
    print(f"{domain.name}: {cert.verdict}")
    if cert.witness is not None:
        print(f"witness: {json.dumps(cert.witness)}")
    return 0


def cmd_estimate_k(args, out: Path) -> int:
    domain = _domain(args.domain)
    cover = _cover(domain, args)
    if args.approach_boundary:
        target = _point(args.target, domain.n) if args.target else np.array([1.0, 0.0] + [0.0] * (domain.n - 2))
        rows = grange_approach(domain, cover, target=target, ks=range(args.k_min, args.k_max + 1),
                               degree=args.degree, trials=args.trials, seed=args.seed)
        with (out / "approach.csv").open("w", newline="") as fh:
            fh.write("k,distance,ratio\n")
            for k, dist, ratio in rows:
                fh.write(f"{k},{dist!r},{ratio!r}\n")
        ratios = [r for _, _, r in rows]
        increasing = bool(np.all(np.diff(ratios) > 0))
        payload = _summary("estimate-k", domain, "OK", ["approach.csv", "summary.json"],
                           max_ratio=max(ratios), strictly_increasing=increasing)
        for k, dist, ratio in rows:
            print(f"k={k:2d}  distance={dist:.6f}  ratio={ratio:.6f}")
    else:
        center = _point(args.center, domain.n) if args.center else np.zeros(domain.n)
        table = estimate_K(domain, cover, center, args.radius, degrees=range(1, args.degree + 1),
                           trials=args.trials, seed=args.seed)
        table.to_csv(out / "k_table.csv")
        payload = _summary("estimate-k", domain, "OK", ["k_table.csv", "summary.json"],
                           max_ratio=table.summary, log_slope=table.log_slope)
        print(f"K_emp = {table.summary:.6f}  log-ratio slope = {table.log_slope:.5f}")
    _write_json(out / "summary.json", payload, "summary")
    return 0


def cmd_lemma1(args, out: Path) -> int:
    domain = _domain(args.domain)
    cover = _cover(domain, args)
    report = verify_lemma1(domain, cover, args.samples, seed=args.seed, epsilon=args.epsilon)
    report.to_csv(out / "lemma1.csv")
    payload = _summary("lemma1", domain, "OK", ["lemma1.csv", "summary.json"], violations=int(report.violations),
                       worst_margin=float(report.worst_margin), monotone=report.monotone, sigma=cover.sigma)
    _write_json(out / "summary.json", payload, "summary")
    print(f"violations = {report.violations}  worst margin = {report.worst_margin:.3e}  monotone = {report.monotone}")
    return 0


def cmd_continuity(args, out: Path) -> int:
    domain = _domain(args.domain)
    f = _oracle(args.f, domain.n)
    cover = _cover(domain, args)
    z = _point(args.point[0], domain.n)
    direction = _point(args.direction, domain.n) if args.direction else None
    table = continuity_experiment(f, z, domain, cover, direction=direction, seed=args.seed)
    table.to_csv(out / "continuity.csv")
    payload = _summary("continuity", domain, "OK", ["continuity.csv", "summary.json"],
                       final_delta=table.final_delta, monotone=table.monotone(), max_rate=float(table.rates.max()))
    _write_json(out / "summary.json", payload, "summary")
    for k, dist, di, dt in table.rows:
        print(f"k={k:2d}  |z_n - z|={dist:.3e}  dI={di:.3e}  dT={dt:.3e}")
    return 0


def cmd_grange(args, out: Path) -> int:
    domain = _domain(args.domain) if args.domain else load_domain(
        {"name": "grange", "kind": "grange", "params": {}, "epsilon": 0.1})
    cover = collar_cover(domain, require_lemma1=False, patch_budget=args.patches or 24, seed=args.seed)
    report = verify_lemma1(domain, cover, args.samples, seed=args.seed, epsilon=args.epsilon)
    report.to_csv(out / "lemma1.csv")
    rows = grange_approach(domain, cover, ks=range(args.k_min, args.k_max + 1), degree=args.degree,
                           trials=args.trials, seed=args.seed)
    with (out / "approach.csv").open("w", newline="") as fh:
        fh.write("k,distance,ratio\n")
        for k, dist, ratio in rows:
            fh.write(f"{k},{dist!r},{ratio!r}\n")
    ratios = [r for _, _, r in rows]
    payload = _summary("grange", domain, "OK", ["lemma1.csv", "approach.csv", "summary.json"],
                       violations=int(report.violations), max_ratio=max(ratios),
                       strictly_increasing=bool(np.all(np.diff(ratios) > 0)))
    _write_json(out / "summary.json", payload, "summary")
    eps = domain.holder_epsilon if args.epsilon is None else args.epsilon
    print(f"membership violations (epsilon = {eps:g}) = {report.violations}")
    for k, dist, ratio in rows:
        print(f"k={k:2d}  distance={dist:.6f}  ratio={ratio:.6f}")
    return 0


COMMANDS = {
    "decompose": cmd_decompose,
    "check-domain": cmd_check_domain,
    "estimate-k": cmd_estimate_k,
    "lemma1": cmd_lemma1,
    "continuity": cmd_continuity,
    "grange": cmd_grange,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gleason", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, domain_required=True):
        p.add_argument("--domain", required=domain_required, help="domain JSON file or catalog kind")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--patches", type=int, default=None, help="collar patch budget (24; 48 for ellipsoids)")
        p.add_argument("--no-lemma1", action="store_true", help="build the collar without the sampled membership test")
        p.add_argument("--clearance", type=float, default=None,
                       help="use a patch-free cover with this clearance (non C-convex domains)")

    p = sub.add_parser("decompose", help="T_i(f) at given points")
    common(p)
    p.add_argument("--f", required=True, help="poly:<expression in z1..zn>, a polynomial JSON file or a named oracle")
    p.add_argument("--point", action="append", required=True, help="re1,im1,re2,im2,...")
    p.add_argument("--method", default="auto", choices=("auto", "closed_form", "direct_contour", "sy_system",
                                                        "approximant_limit"))

    p = sub.add_parser("check-domain", help="C-convexity certificate from sampled complex lines")
    common(p)
    p.add_argument("--lines", type=int, default=200)
    p.add_argument("--resolution", type=int, default=256)

    p = sub.add_parser("estimate-k", help="empirical key-estimate constant")
    common(p)
    p.add_argument("--approach-boundary", action="store_true",
                   help="move the test ball toward --target at distances 2^-k")
    p.add_argument("--target", default=None, help="boundary point approached (default (1,0))")
    p.add_argument("--center", default=None)
    p.add_argument("--radius", type=float, default=0.3)
    p.add_argument("--degree", type=int, default=None, help="max degree (table) or fixed degree (approach)")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=8)

    p = sub.add_parser("lemma1", help="sampled collar-membership test")
    common(p)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--epsilon", type=float, default=None, help="exponent of the test (default: the domain's)")

    p = sub.add_parser("continuity", help="deltas of I and T_i along z_n -> z")
    common(p)
    p.add_argument("--f", required=True)
    p.add_argument("--point", action="append", required=True)
    p.add_argument("--direction", default=None)

    p = sub.add_parser("grange", help="membership violations and K growth near the non-Holder point")
    common(p, domain_required=False)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--epsilon", type=float, default=1.0,
                   help="exponent of the membership test (1: the smooth-domain value, which fails here)")
    p.add_argument("--degree", type=int, default=10)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=8)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "degree", 0) is None:
        args.degree = 10 if args.approach_boundary else 15
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, out)
    except (InputError, PointOutsideDomain, DimensionMismatch) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except GleasonError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, SyntaxError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
