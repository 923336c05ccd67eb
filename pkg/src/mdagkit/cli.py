"""``mdagkit`` command line.

Exit codes: 0 success (or "separated"), 1 "connected" / failed check,
2 domain error, 10-13 classification, 64 usage error, 66 unreadable file.
"""

from __future__ import annotations

import argparse
import json
import sys
from itertools import combinations
from pathlib import Path
from typing import Sequence

from . import __version__
from .checks import SidecarError, run_gallery, shipped_gallery
from .classify import classify, emit_witness
from .equivalence import DEFAULT_MAX_EDGES, enumerate_class
from .graph import GraphError, MDag, format_marked, format_mdag, induced_subgraph, parse_mdag, validate
from .nested import find_nested_constraints, fix_graph
from .oracle import (
    TOL_EXACT,
    TOL_REWEIGHT,
    DiscreteDistribution,
    OracleError,
    chsh_variants,
    ci_gap,
    fix_distribution,
    sample_marginal,
)
from .projection import canonical_dag, latent_project, mag_project
from .separation import e_separated, m_separated, open_path

EXIT_USAGE = 64
EXIT_NOINPUT = 66
EXIT_DOMAIN = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _vset(text: str | None) -> list[str]:
    if not text:
        return []
    return [t for t in (s.strip() for s in text.split(",")) if t]


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise FileNotFoundError(f"cannot read {path}: {exc}") from exc


def _read_graph(path: str, check: bool = True) -> MDag:
    return parse_mdag(_read_text(path), check=check)


def _emit(args, obj: dict, text: str) -> None:
    if args.json:
        print(json.dumps({"schema": 1, **obj}, sort_keys=True))
    else:
        print(text, end="" if text.endswith("\n") else "\n")


# ---------------------------------------------------------------------------
# verbs


def cmd_validate(args) -> int:
    g = _read_graph(args.file, check=False)
    problems = validate(g)
    _emit(args, {"ok": not problems, "violations": problems}, "ok" if not problems else "\n".join(problems))
    return 0 if not problems else EXIT_DOMAIN


def _sep_result(args, g, separated, A, B, C) -> int:
    obj = {"separated": separated}
    text = "separated" if separated else "connected"
    if args.witness and not separated:
        path = open_path(g, A, B, C)
        obj["path"] = [[v, e] for v, e in path]
        text += "\n" + "".join(f" {e} {v}" if e else v for v, e in path)
    _emit(args, obj, text)
    return 0 if separated else 1


def cmd_msep(args) -> int:
    g = _read_graph(args.file)
    A, B, C = _vset(args.a), _vset(args.b), _vset(args.c)
    return _sep_result(args, g, m_separated(g, A, B, C), A, B, C)


def cmd_esep(args) -> int:
    g = _read_graph(args.file)
    A, B, C, D = _vset(args.a), _vset(args.b), _vset(args.c), _vset(args.delete)
    sep = e_separated(g, A, B, C, D)
    h = induced_subgraph(g, g.vertex_set - set(D)) if D else g
    return _sep_result(args, h, sep, A, B, C)


def cmd_project(args) -> int:
    g = _read_graph(args.file)
    h = latent_project(g, _vset(args.keep))
    _emit(args, {"graph": format_mdag(h)}, format_mdag(h))
    return 0


def cmd_canonical(args) -> int:
    cd = canonical_dag(_read_graph(args.file))
    latents = {h: sorted(f) for f, h in cd.latent_map.items()}
    _emit(args, {"graph": format_mdag(cd.dag), "latents": latents}, format_mdag(cd.dag))
    return 0


def cmd_mag(args) -> int:
    m = mag_project(_read_graph(args.file))
    text = format_marked(m, "mag")
    _emit(args, {"graph": text}, text)
    return 0


def cmd_pag(args) -> int:
    cls = enumerate_class(mag_project(_read_graph(args.file)), args.max_edges)
    text = format_marked(cls.pag, "pag")
    _emit(args, {"graph": text}, text)
    return 0


def cmd_class(args) -> int:
    cls = enumerate_class(mag_project(_read_graph(args.file)), args.max_edges)
    obj = {"size": len(cls.members), "pag": format_marked(cls.pag, "pag")}
    text = f"# {len(cls.members)} members\n" + format_marked(cls.pag, "pag")
    if args.list_members:
        obj["members"] = [format_marked(m, "mag") for m in cls.members]
        text += "".join("\n" + format_marked(m, "mag") for m in cls.members)
    _emit(args, obj, text)
    return 0


def cmd_fix(args) -> int:
    h = fix_graph(_read_graph(args.file), args.vertex)
    _emit(args, {"graph": format_mdag(h)}, format_mdag(h))
    return 0


def cmd_nested(args) -> int:
    ws = find_nested_constraints(_read_graph(args.file))
    # the witness list is always JSON
    print(json.dumps([w.as_dict() for w in ws], sort_keys=True))
    return 0


def cmd_classify(args) -> int:
    r = classify(_read_graph(args.file), args.max_edges)
    if args.json:
        print(json.dumps(r.as_dict(), sort_keys=True))
    else:
        print(f"{r.class_tag.value} ({'decided' if r.decided else 'undecided'})")
        for w in r.witnesses:
            print("  " + emit_witness(w)["text"])
        if r.dag is not None:
            print("  DAG: " + ", ".join(f"{a}->{b}" for a, b in sorted(r.dag.directed)))
    return r.class_tag.exit_code


def _cards(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise UsageError(f"--cards expects an integer, got {text!r}")
    if k < 2:
        raise UsageError("--cards must be at least 2")
    return k


def cmd_oracle_sample(args) -> int:
    g = _read_graph(args.file)
    k = _cards(args.cards)
    tol = TOL_EXACT if args.tol is None else args.tol
    seeds = range(args.seed, args.seed + args.seeds)
    if not args.check_msep:
        samples = [{"seed": s, **sample_marginal(g, k, s).to_json()} for s in seeds]
        print(json.dumps({"schema": 1, "samples": samples}, sort_keys=True))
        return 0
    queries = []
    names = list(g.names)
    for a, b in combinations(names, 2):
        rest = [v for v in names if v not in (a, b)]
        for r in range(len(rest) + 1):
            for C in combinations(rest, r):
                if m_separated(g, a, b, C):
                    queries.append((a, b, C))
    worst = 0.0
    failures = []
    for s in seeds:
        p = sample_marginal(g, k, s)
        for a, b, C in queries:
            gap = ci_gap(p, [a], [b], C)
            worst = max(worst, gap)
            if gap > tol:
                failures.append({"seed": s, "A": a, "B": b, "C": list(C), "gap": gap})
    obj = {"seeds": len(seeds), "statements": len(queries), "max_gap": worst, "failures": failures}
    text = f"{len(seeds)} seeds x {len(queries)} separations: max gap {worst:.3e}, {len(failures)} failures"
    _emit(args, obj, text)
    return 0 if not failures else 1


def cmd_oracle_chsh(args) -> int:
    roles = _vset(args.roles)
    if len(roles) != 4:
        raise UsageError("--roles takes four comma-separated vertices")
    tol = TOL_REWEIGHT if args.tol is None else args.tol
    if args.file.endswith(".json"):
        p = DiscreteDistribution.from_json(_read_text(args.file))
        values = [max(chsh_variants(p, *roles))]
    else:
        g = _read_graph(args.file)
        values = [max(chsh_variants(sample_marginal(g, 2, s), *roles)) for s in range(args.seed, args.seed + args.seeds)]
    worst = max(values)
    ok = worst <= 2 + tol
    _emit(args, {"max_chsh": worst, "samples": len(values), "within_bound": ok},
          f"max CHSH {worst:.12f} over {len(values)} distribution(s); bound 2 {'holds' if ok else 'violated'}")
    return 0 if ok else 1


def cmd_oracle_verma(args) -> int:
    g = _read_graph(args.file)
    k = _cards(args.cards)
    tol = TOL_REWEIGHT if args.tol is None else args.tol
    A, B, C = _vset(args.a), _vset(args.b), _vset(args.c)
    worst = 0.0
    for s in range(args.seed, args.seed + args.seeds):
        p = sample_marginal(g, k, s)
        q = fix_distribution(p, g, args.fix, None)
        worst = max(worst, ci_gap(q, A, B, C))
    ok = worst <= tol
    _emit(args, {"max_gap": worst, "holds": ok},
          f"after fixing {args.fix}: max gap {worst:.3e} over {args.seeds} seeds ({'holds' if ok else 'fails'})")
    return 0 if ok else 1


def cmd_gallery(args) -> int:
    directory = Path(args.dir) if args.dir else shipped_gallery()
    if not directory.is_dir():
        raise FileNotFoundError(f"no such directory: {directory}")
    results = run_gallery(directory)
    bad = [r for r in results if not r.ok]
    if args.json:
        print(json.dumps({"schema": 1, "results": [r.__dict__ for r in results]}, sort_keys=True))
    else:
        files = sorted({r.file for r in results})
        for f in files:
            rs = [r for r in results if r.file == f]
            status = "pass" if all(r.ok for r in rs) else "FAIL"
            print(f"{status}  {f}  ({len(rs)} checks)")
            for r in rs:
                if not r.ok:
                    print(f"      {r.check}: {r.detail}")
        print(f"{len(files)} files, {len(results)} checks, {len(bad)} failed")
    return 0 if not bad else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="first random seed (default 0)")
    common.add_argument("--tol", type=float, default=None, help="numerical tolerance for oracle checks")
    common.add_argument("--max-edges", type=int, default=DEFAULT_MAX_EDGES, help="edge cap for class enumeration")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = _Parser(prog="mdagkit", description="Marginal DAG models: separation, projection, fixing and classification.")
    p.add_argument("--version", action="version", version=f"mdagkit {__version__}")
    sub = p.add_subparsers(dest="verb", metavar="VERB", parser_class=_Parser)
    sub.required = True

    def verb(name, func, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(func=func)
        return sp

    sp = verb("validate", cmd_validate, "check a graph file for structural violations")
    sp.add_argument("file")
    for name, func, help_text in (
        ("msep", cmd_msep, "test m-separation of A and B given C"),
        ("esep", cmd_esep, "test m-separation after deleting D"),
    ):
        sp = verb(name, func, help_text)
        sp.add_argument("file")
        sp.add_argument("--a", required=True, help="comma-separated vertex set A")
        sp.add_argument("--b", required=True, help="comma-separated vertex set B")
        sp.add_argument("--c", default="", help="comma-separated conditioning set C")
        if name == "esep":
            sp.add_argument("--del", dest="delete", required=True, help="comma-separated deleted set D")
        sp.add_argument("--witness", action="store_true", help="print an open path when connected")
    sp = verb("project", cmd_project, "latent projection onto a vertex subset")
    sp.add_argument("file")
    sp.add_argument("--keep", required=True, help="comma-separated vertices to keep")
    sp = verb("canonical", cmd_canonical, "canonical DAG with one latent per facet")
    sp.add_argument("file")
    sp = verb("mag", cmd_mag, "maximal ancestral projection")
    sp.add_argument("file")
    sp = verb("pag", cmd_pag, "partial ancestral graph of the Markov equivalence class")
    sp.add_argument("file")
    sp = verb("class", cmd_class, "Markov equivalence class of the maximal ancestral projection")
    sp.add_argument("file")
    sp.add_argument("--list-members", action="store_true", help="print every member MAG")
    sp = verb("fix", cmd_fix, "fix one vertex")
    sp.add_argument("file")
    sp.add_argument("--vertex", required=True)
    sp = verb("nested", cmd_nested, "nested conditional independences (JSON)")
    sp.add_argument("file")
    sp = verb("classify", cmd_classify, "constraint class with witnesses (exit 10-13)")
    sp.add_argument("file")

    op = sub.add_parser("oracle", help="exact numerical checks on sampled distributions")
    osub = op.add_subparsers(dest="oracle_verb", metavar="CHECK", parser_class=_Parser)
    osub.required = True

    def overb(name, func, help_text):
        sp = osub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("file")
        return sp

    sp = overb("sample", cmd_oracle_sample, "sample distributions from the marginal model")
    sp.add_argument("--cards", default="2", help="cardinality of every observed variable")
    sp.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    sp.add_argument("--check-msep", action="store_true", help="verify every m-separation numerically")
    sp = overb("chsh", cmd_oracle_chsh, "largest CHSH value over sign relabelings (graph file or distribution JSON)")
    sp.add_argument("--roles", required=True, help="a,b,c,d: settings a,c; outcomes b,d")
    sp.add_argument("--seeds", type=int, default=100)
    sp = overb("verma", cmd_oracle_verma, "check an independence after fixing one vertex")
    sp.add_argument("--fix", required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--c", default="")
    sp.add_argument("--cards", default="2")
    sp.add_argument("--seeds", type=int, default=100)

    sp = sub.add_parser("gallery", parents=[common], help="check graph files against their JSON sidecars")
    sp.set_defaults(func=cmd_gallery)
    sp.add_argument("dir", nargs="?", help="directory of .mdag files (default: shipped gallery)")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mdagkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"mdagkit: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except (GraphError, OracleError, SidecarError) as exc:
        print(f"mdagkit: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
