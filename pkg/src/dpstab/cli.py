"""Command-line entry point: ``dpstab {eps,dist,gen,verify,bounds,search}``.

Exit codes: 0 on success, 1 when a certificate fails, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import bounds, generators
from .bounds import INFINITE, TWO_SEVENTEENTHS
from .calculus import SupportTooLargeError, dist_to_wcm, epsilon_exact, nearest_wcm, op_norm
from .functionals import check_atom_lemmas
from .model import TOL, Certificate, FunctionalVec, InstanceBundle, ModelError, TopGraphY
from .search import search_extremal
from .stability import construct_discreteY, construct_finiteX, construct_rz

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(v: float) -> str:
    """12 significant digits, with a short fraction when one matches."""
    s = f"{v:.12g}"
    frac = Fraction(v).limit_denominator(1000)
    if frac.denominator > 1 and abs(float(frac) - v) <= 1e-13:
        s += f" (={frac})"
    return s


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload, indent=1) if args.json else text)


def _load(path: str) -> InstanceBundle:
    try:
        return InstanceBundle.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def cmd_eps(args) -> int:
    b = _load(args.instance)
    e, y, wit = epsilon_exact(b.operator)
    pts = b.space_x.points
    payload = {"eps": e, "vertex": b.graph_y.vertices[y],
               "row": b.operator.rows[y].tolist(),
               "subset_a": [pts[i] for i in wit.subset_a],
               "subset_b": [pts[i] for i in wit.subset_b]}
    text = (f"eps={fmt(e)}\nvertex={payload['vertex']}\n"
            f"A={payload['subset_a']}\nB={payload['subset_b']}")
    _emit(args, payload, text)
    return EXIT_OK


def cmd_dist(args) -> int:
    b = _load(args.instance)
    d, wit = dist_to_wcm(b.operator)
    verts, pts = b.graph_y.vertices, b.space_x.points
    payload = {"dist": d,
               "binding_vertex": None if wit.binding_vertex is None
               else verts[wit.binding_vertex],
               "zero_set": [verts[y] for y in wit.zero_set],
               "components": [{"vertices": [verts[y] for y in c], "label": pts[x]}
                              for c, x in zip(wit.components, wit.labels)]}
    lines = [f"dist={fmt(d)}", f"binding_vertex={payload['binding_vertex']}"]
    if args.witness:
        S = nearest_wcm(b.operator)
        payload["wcm"] = {"a": S.a.tolist(),
                          "h": [None if x is None else pts[x] for x in S.h]}
        lines += [f"{verts[y]}: a={fmt(S.a[y])} h={'-' if S.h[y] is None else pts[S.h[y]]}"
                  for y in range(len(verts))]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"family {args.family} needs " +
                         ", ".join("--" + n.replace("_", "-") for n in missing))


def build_family(args) -> InstanceBundle:
    f = args.family
    if f == "recero":
        _need(args, "n", "eps")
        return generators.gen_recero(args.n, args.eps, args.m or 2)
    if f == "interval":
        _need(args, "eps")
        return generators.gen_interval(args.eps, args.m or 201)
    if f == "tripod":
        _need(args, "n")
        return generators.gen_tripod(args.n, args.m or 4)
    if f == "tripod-weighted":
        _need(args, "n")
        return generators.gen_tripod_weighted(args.n, args.m or 4)
    if f == "circles":
        _need(args, "N")
        return generators.gen_circles(args.N, args.m or 16, args.eps)
    if f == "extremal-functional":
        _need(args, "k", "eps")
        return generators.gen_extremal_functional(args.k, args.eps)
    if f == "scaled":
        _need(args, "base", "eps")
        return generators.gen_scaled(_load(args.base), args.eps)
    raise UsageError(f"unknown family {f}")


def cmd_gen(args) -> int:
    b = build_family(args)
    if args.out:
        b.save(args.out)
        print(f"wrote {args.out}: {b.provenance}")
    else:
        print(b.to_json(indent=1))
    return EXIT_OK


def verify_bundle(b: InstanceBundle) -> list[Certificate]:
    """Expected facts plus every construction whose hypotheses the instance meets."""
    T = b.operator
    e, _, _ = epsilon_exact(T)
    d, _ = dist_to_wcm(T)
    certs = []
    if b.expected_eps is not None:
        certs.append(Certificate.check("expected_eps", 0.0, abs(e - b.expected_eps),
                                       notes=[f"eps_exact={e!r}"]))
    if b.expected_dist is not None:
        certs.append(Certificate.check("expected_dist", 0.0, abs(d - b.expected_dist),
                                       notes=[f"dist_to_wcm={d!r}"]))
    if b.eps_bound is not None:
        certs.append(Certificate.check("eps_bound", b.eps_bound, e))
    eps = b.eps_bound if b.eps_bound is not None else e

    if abs(op_norm(T) - 1) > TOL:
        reason = f"operator norm {op_norm(T)!r} is not 1"
        return certs + [Certificate.not_applicable(s, reason) for s in
                        ("construct_finiteX", "construct_discreteY", "construct_rz")]

    if b.x_kind == "sampled-continuum":
        certs.append(Certificate.not_applicable(
            "construct_finiteX", "X samples a connected space"))
    elif eps >= 0.25:
        certs.append(Certificate.not_applicable("construct_finiteX", "eps >= 1/4"))
    else:
        certs.append(construct_finiteX(T, eps)[1])

    if not T.graph_y.is_edgeless:
        certs.append(Certificate.not_applicable("construct_discreteY", "Y has edges"))
    elif eps >= 0.25:
        certs.append(Certificate.not_applicable("construct_discreteY", "eps >= 1/4"))
    else:
        certs.append(construct_discreteY(T, eps)[1])

    if eps < TWO_SEVENTEENTHS:
        certs.append(construct_rz(T, eps)[1])
    else:
        certs.append(Certificate.not_applicable("construct_rz", "needs eps < 2/17"))

    if T.n_vertices == 1:
        certs += check_atom_lemmas(FunctionalVec(T.rows[0]), eps)
    return certs


def all_generator_bundles() -> list[InstanceBundle]:
    g = generators
    out = []
    for n in (2, 3, 4, 5):
        for eps in (0.05, 0.1, 0.23):
            out.append(g.gen_recero(n, eps, 3))
    for eps in (0.01, 0.09, 0.2):
        out.append(g.gen_interval(eps, 41))
    for n in (1, 2):
        rn, tn = g.gen_tripod(n, 4), g.gen_tripod_weighted(n, 4)
        out += [rn, tn, g.gen_scaled(rn, 0.1), g.gen_scaled(tn, 0.05)]
    circles = g.gen_circles(2, 8)
    out += [circles, g.gen_scaled(circles, 0.1), g.gen_circles(1, 16, 0.02)]
    for k in (2, 3, 4, 5):
        for eps in (0.05, 0.2):
            out.append(g.gen_extremal_functional(k, eps))
    out.append(g.gen_scaled(g.gen_extremal_functional(3, 0.23), 0.1))
    return out


def cmd_verify(args) -> int:
    if args.all_generators == bool(args.instance):
        raise UsageError("give an instance file or --all-generators")
    bundles = all_generator_bundles() if args.all_generators else [_load(args.instance)]
    report, failed = [], []
    for b in bundles:
        for c in verify_bundle(b):
            report.append({"instance": b.provenance, **c.to_dict()})
            if c.failed:
                failed.append(f"{b.provenance}: {c.claim_source}")
    if args.json:
        print(json.dumps({"certificates": report, "failed": failed}, indent=1))
    else:
        for r in report:
            if r["status"] == "not-applicable":
                print(f"n/a   {r['instance']}: {r['claim_source']} ({r['notes'][0]})")
            else:
                print(f"{r['status']:<5} {r['instance']}: {r['claim_source']} "
                      f"{fmt(r['achieved_value'])} <= {fmt(r['claimed_bound'])}")
        print(f"{len(report) - len(failed)} ok, {len(failed)} failed")
        for f in failed:
            print(f"FAILED {f}")
    return EXIT_FAIL if failed else EXIT_OK


def parse_grid(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            a, b, step = (Fraction(p) for p in text.split(":"))
            if step <= 0:
                raise UsageError("grid step must be positive")
            count = int((b - a) / step) + 1
            return [float(a + i * step) for i in range(max(count, 0))]
        return [float(Fraction(p)) for p in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad eps grid {text!r}: {exc}") from exc


def parse_card(text: str):
    if text in ("inf", "infinite"):
        return INFINITE
    try:
        return int(text)
    except ValueError as exc:
        raise UsageError(f"bad cardinality {text!r}") from exc


def cmd_bounds(args) -> int:
    text = bounds.bound_table_csv(parse_grid(args.eps_grid), parse_card(args.card))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def parse_graph(spec: str) -> TopGraphY:
    kind, _, size = spec.partition(":")
    if kind == "singleton" and not size:
        return TopGraphY.singleton()
    try:
        n = int(size)
    except ValueError as exc:
        raise UsageError(f"bad graph spec {spec!r}") from exc
    if n < 1:
        raise UsageError("graph needs at least one vertex")
    if kind == "edgeless":
        return TopGraphY.edgeless(n)
    if kind == "path":
        return TopGraphY.path(n)
    raise UsageError(f"bad graph spec {spec!r}")


def cmd_search(args) -> int:
    if args.budget < 1:
        raise UsageError("budget must be at least 1")
    g = parse_graph(args.y)
    res = search_extremal(args.card_x, g, args.eps, args.budget, args.seed)
    bundle = InstanceBundle(
        res.operator, provenance=f"search(k={args.card_x}, y={args.y}, eps={args.eps!r}, "
                                 f"budget={args.budget}, seed={args.seed})",
        meta={"eps_bound": args.eps, "best_dist": res.best_dist})
    if args.out:
        bundle.save(args.out)
    if args.trace:
        Path(args.trace).write_text(res.trace_csv())
    _emit(args, {"best_dist": res.best_dist, "out": args.out, "trace": args.trace},
          f"best_dist={fmt(res.best_dist)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dpstab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eps", help="exact disjointness defect of an instance")
    s.add_argument("instance")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_eps)

    s = sub.add_parser("dist", help="exact distance to weighted composition maps")
    s.add_argument("instance")
    s.add_argument("--witness", action="store_true", help="print the nearest map")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_dist)

    s = sub.add_parser("gen", help="write a generated instance")
    s.add_argument("family", choices=generators.FAMILIES)
    s.add_argument("--n", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--N", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--eps", type=lambda v: float(Fraction(v)))
    s.add_argument("--base", help="instance file to rescale (family 'scaled')")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("verify", help="run every applicable certificate")
    s.add_argument("instance", nargs="?")
    s.add_argument("--all-generators", action="store_true")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("bounds", help="CSV table of the bound functions")
    s.add_argument("--eps-grid", required=True, help="a:b:step or a comma list")
    s.add_argument("--card", default="inf", help="card X, or 'inf'")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("search", help="hill-climb for a far-from-WCM operator")
    s.add_argument("--card-x", type=int, required=True)
    s.add_argument("--y", default="singleton", help="singleton, edgeless:N or path:N")
    s.add_argument("--eps", type=lambda v: float(Fraction(v)), required=True)
    s.add_argument("--budget", type=int, default=10000)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("-o", "--out")
    s.add_argument("--trace")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_search)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ModelError, SupportTooLargeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
