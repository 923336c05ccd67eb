"""Expectation sidecars for graph files and the gallery runner behind them.

A sidecar ``name.json`` next to ``name.mdag`` holds ``{"expect": {...}}``;
each key names one check.  Paths inside a sidecar are relative to its
directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .classify import classify, emit_witness, find_collider_3paths, find_fritz_triangles
from .equivalence import build_pag, ci_dag_representable, markov_equivalent
from .graph import MDag, parse_mdag, topological_order, validate
from .nested import find_nested_constraints, fix_graph
from .projection import canonical_dag, latent_project, mag_project
from .separation import districts, e_separated, is_fixable, m_separated, markov_blanket

__all__ = ["CheckResult", "SidecarError", "run_sidecar", "run_gallery", "shipped_gallery"]


class SidecarError(Exception):
    pass


@dataclass(frozen=True)
class CheckResult:
    file: str
    check: str
    ok: bool
    detail: str = ""


def _load(path: Path) -> MDag:
    return parse_mdag(path.read_text(encoding="utf-8"))


def _pairs(xs) -> list[list[str]]:
    return sorted(sorted(p) for p in xs)


def _subset_match(want: dict, got: dict) -> bool:
    for k, v in want.items():
        if k not in got:
            return False
        g = got[k]
        if isinstance(v, dict):
            if not isinstance(g, dict) or not _subset_match(v, g):
                return False
        elif isinstance(v, list) and isinstance(g, list) and k in ("A", "B", "C", "D", "sigma_set"):
            if sorted(v) != sorted(g):
                return False
        elif v != g:
            return False
    return True


def _check(name: str, g: MDag, expected: Any, base: Path) -> tuple[bool, str]:
    if name == "valid":
        problems = validate(g)
        return (not problems) == expected, "; ".join(problems)
    if name == "msep":
        bad = [q for q in expected if m_separated(g, q[0], q[1], q[2]) != q[3]]
        return not bad, f"mismatched {bad}" if bad else ""
    if name == "esep":
        bad = [q for q in expected if e_separated(g, q[0], q[1], q[2], q[3]) != q[4]]
        return not bad, f"mismatched {bad}" if bad else ""
    if name == "markov_blanket":
        got = {v: sorted(markov_blanket(g, v)) for v in expected}
        return got == {v: sorted(x) for v, x in expected.items()}, f"got {got}"
    if name == "fixable":
        got = {v: is_fixable(g, v) for v in expected}
        return got == expected, f"got {got}"
    if name == "districts":
        got = [sorted(d) for d in districts(g)]
        return got == sorted(sorted(d) for d in expected), f"got {got}"
    if name == "topological_order":
        got = list(topological_order(g))
        return got == expected, f"got {got}"
    if name == "mag":
        m = mag_project(g)
        got = {"directed": sorted(list(e) for e in m.directed_edges()), "bidirected": _pairs(m.bidirected_edges())}
        want = {"directed": sorted(expected["directed"]), "bidirected": _pairs(expected["bidirected"])}
        return got == want, f"got {got}"
    if name == "pag_bidirected":
        got = _pairs(build_pag(g).bidirected_edges())
        return got == _pairs(expected), f"got {got}"
    if name == "dag_representable":
        got = ci_dag_representable(g) is not None
        return got == expected, f"got {got}"
    if name == "canonical_of":
        src = _load(base / expected)
        cd = canonical_dag(src)
        other = cd.dag
        same_obs = {(a, b) for a, b in other.directed if a in src.vertex_set} == {
            (a, b) for a, b in g.directed if a in src.vertex_set
        }
        children = sorted(sorted(f) for f in cd.latent_map)
        mine = sorted(sorted(g.ch(h)) for h in g.vertex_set - src.vertex_set)
        return same_obs and children == mine, f"latent children {children} vs {mine}"
    if name == "projects_to":
        got = latent_project(g, expected["keep"])
        want = _load(base / expected["file"])
        return got == want, f"got {got!r}"
    if name == "fix":
        got = fix_graph(g, expected["vertex"])
        want = _load(base / expected["file"])
        return got == want, f"got {got!r}"
    if name == "nested_contains":
        got = [w.as_dict() for w in find_nested_constraints(g)]
        missing = [w for w in expected if not any(_same_witness(w, x) for x in got)]
        return not missing, f"missing {missing}"
    if name == "nested_empty":
        got = find_nested_constraints(g)
        return (not got) == expected, f"{len(got)} witnesses"
    if name == "equivalent_to":
        other = _load(base / expected)
        ok = markov_equivalent(mag_project(g), mag_project(other))
        return ok, "" if ok else "separation signatures differ"
    if name == "collider_3paths":
        got = [{"path": list(w.path), "shape": w.shape} for w in find_collider_3paths(build_pag(g))]
        return got == expected, f"got {got}"
    if name == "fritz":
        got = [list(w.vertices) for w in find_fritz_triangles(g)]
        return got == expected, f"got {got}"
    if name == "classify":
        r = classify(g)
        problems = []
        if r.class_tag.value != expected["class"]:
            problems.append(f"class {r.class_tag.value}")
        if "decided" in expected and r.decided != expected["decided"]:
            problems.append(f"decided {r.decided}")
        emitted = [emit_witness(w) for w in r.witnesses]
        for want in expected.get("witnesses", []):
            if not any(_subset_match(want, e) or _same_witness(want, e) for e in emitted):
                problems.append(f"no witness matching {want}")
        if "dag_equivalent_to" in expected:
            other = _load(base / expected["dag_equivalent_to"])
            if r.dag is None or not markov_equivalent(r.dag, other):
                problems.append("attached DAG not equivalent")
        return not problems, "; ".join(problems)
    raise SidecarError(f"unknown check {name!r}")


def _same_witness(want: dict, got: dict) -> bool:
    keys = ("sigma", "A", "B", "C")
    if not all(k in got for k in keys):
        return False
    if list(want["sigma"]) != list(got["sigma"]) or sorted(want["C"]) != sorted(got["C"]):
        return False
    pair = {frozenset(want["A"]), frozenset(want["B"])}
    return pair == {frozenset(got["A"]), frozenset(got["B"])}


def run_sidecar(graph_path: Path) -> list[CheckResult]:
    graph_path = Path(graph_path)
    side = graph_path.with_suffix(".json")
    if not side.exists():
        raise SidecarError(f"{graph_path.name}: missing sidecar {side.name}")
    try:
        data = json.loads(side.read_text(encoding="utf-8"))
        expect = data["expect"]
        if not isinstance(expect, dict):
            raise TypeError("'expect' must be an object")
    except (ValueError, KeyError, TypeError) as exc:
        raise SidecarError(f"{side.name}: corrupted sidecar ({exc})") from exc
    g = parse_mdag(graph_path.read_text(encoding="utf-8"))
    out = []
    for name in sorted(expect):
        try:
            ok, detail = _check(name, g, expect[name], graph_path.parent)
        except SidecarError:
            raise
        except Exception as exc:  # a crash is a failed check, not a runner error
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(graph_path.name, name, ok, "" if ok else detail))
    return out


def run_gallery(directory: Path, on_result: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    """Run every ``*.mdag`` in ``directory`` (sorted by name) against its sidecar."""
    results = []
    for path in sorted(Path(directory).glob("*.mdag")):
        for r in run_sidecar(path):
            results.append(r)
            if on_result:
                on_result(r)
    return results


def shipped_gallery() -> Path:
    return Path(__file__).with_name("gallery")
