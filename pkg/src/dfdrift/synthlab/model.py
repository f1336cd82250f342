"""Block-structured process models: sampling, exhaustive enumeration and
structural directly-follows sets."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Activity:
    label: str


@dataclass(frozen=True)
class Sequence:
    children: tuple


@dataclass(frozen=True)
class Choice:
    children: tuple
    probabilities: tuple

    def __post_init__(self):
        if len(self.children) != len(self.probabilities):
            raise ModelError("one probability per branch is required")
        if any(p < 0 for p in self.probabilities) or abs(sum(self.probabilities) - 1) > 1e-9:
            raise ModelError(f"branch probabilities must be non-negative and sum to 1: {self.probabilities}")


@dataclass(frozen=True)
class Parallel:
    children: tuple


@dataclass(frozen=True)
class Loop:
    body: "Node"
    repeat: float

    def __post_init__(self):
        if not 0 <= self.repeat < 1:
            raise ModelError(f"loop repeat probability must lie in [0, 1), got {self.repeat}")


@dataclass(frozen=True)
class Skip:
    body: "Node"
    skip: float

    def __post_init__(self):
        if not 0 <= self.skip <= 1:
            raise ModelError(f"skip probability must lie in [0, 1], got {self.skip}")


Node = Union[Activity, Sequence, Choice, Parallel, Loop, Skip]


def seq(*children) -> Sequence:
    return Sequence(tuple(_wrap(c) for c in children))


def xor(*children, probs=None) -> Choice:
    probs = probs or [1 / len(children)] * len(children)
    return Choice(tuple(_wrap(c) for c in children), tuple(probs))


def par(*children) -> Parallel:
    return Parallel(tuple(_wrap(c) for c in children))


def loop(body, repeat: float = 0.3) -> Loop:
    return Loop(_wrap(body), repeat)


def opt(body, skip: float = 0.5) -> Skip:
    return Skip(_wrap(body), skip)


def _wrap(x) -> Node:
    return Activity(x) if isinstance(x, str) else x


# --------------------------------------------------------------------------
# traversal

def children_of(node: Node) -> tuple:
    if isinstance(node, (Sequence, Choice, Parallel)):
        return node.children
    if isinstance(node, (Loop, Skip)):
        return (node.body,)
    return ()


def labels(node: Node) -> list[str]:
    if isinstance(node, Activity):
        return [node.label]
    return [lab for c in children_of(node) for lab in labels(c)]


def validate(node: Node) -> Node:
    labs = labels(node)
    dupes = {x for x in labs if labs.count(x) > 1}
    if dupes:
        raise ModelError(f"activity labels must be unique, repeated: {sorted(dupes)}")
    for c in _walk(node):
        if isinstance(c, (Sequence, Choice, Parallel)) and not c.children:
            raise ModelError(f"{type(c).__name__} block without children")
    return node


def _walk(node: Node) -> Iterator[Node]:
    yield node
    for c in children_of(node):
        yield from _walk(c)


def get_node(node: Node, path: tuple[int, ...]) -> Node:
    for i in path:
        kids = children_of(node)
        if not 0 <= i < len(kids):
            raise ModelError(f"path {path} does not exist in the model")
        node = kids[i]
    return node


def replace_node(node: Node, path: tuple[int, ...], new: Node) -> Node:
    if not path:
        return new
    i, rest = path[0], path[1:]
    kids = list(children_of(node))
    if not 0 <= i < len(kids):
        raise ModelError(f"path {path} does not exist in the model")
    kids[i] = replace_node(kids[i], rest, new)
    return _with_children(node, kids)


def _with_children(node: Node, kids: list) -> Node:
    if isinstance(node, Sequence):
        return Sequence(tuple(kids))
    if isinstance(node, Parallel):
        return Parallel(tuple(kids))
    if isinstance(node, Choice):
        return Choice(tuple(kids), node.probabilities)
    if isinstance(node, Loop):
        return Loop(kids[0], node.repeat)
    if isinstance(node, Skip):
        return Skip(kids[0], node.skip)
    raise ModelError("activities have no children")


def is_acyclic(node: Node) -> bool:
    return not any(isinstance(c, Loop) for c in _walk(node))


# --------------------------------------------------------------------------
# sampling

def sample_trace(model: Node, rng: random.Random) -> list[str]:
    out: list[str] = []
    _sample(model, rng, out)
    return out


def _sample(node: Node, rng: random.Random, out: list[str]) -> None:
    if isinstance(node, Activity):
        out.append(node.label)
    elif isinstance(node, Sequence):
        for c in node.children:
            _sample(c, rng, out)
    elif isinstance(node, Choice):
        (branch,) = rng.choices(node.children, weights=node.probabilities)
        _sample(branch, rng, out)
    elif isinstance(node, Parallel):
        parts = [sample_trace(c, rng) for c in node.children]
        out.extend(_random_interleaving(parts, rng))
    elif isinstance(node, Loop):
        _sample(node.body, rng, out)
        while rng.random() < node.repeat:
            _sample(node.body, rng, out)
    elif isinstance(node, Skip):
        if rng.random() >= node.skip:
            _sample(node.body, rng, out)
    else:
        raise ModelError(f"unknown node {node!r}")


def _random_interleaving(parts: list[list[str]], rng: random.Random) -> list[str]:
    # uniform over all interleavings: shuffle a multiset of part labels
    slots = [i for i, p in enumerate(parts) for _ in p]
    rng.shuffle(slots)
    cursors = [0] * len(parts)
    out = []
    for i in slots:
        out.append(parts[i][cursors[i]])
        cursors[i] += 1
    return out


# --------------------------------------------------------------------------
# languages and directly-follows sets

def language(node: Node, loop_unroll: int = 2) -> frozenset[tuple[str, ...]]:
    """All traces the model can emit, with loops unrolled at most
    ``loop_unroll`` times. Exponential; meant for small models and tests."""
    return _language(node, loop_unroll)


@lru_cache(maxsize=None)
def _language(node: Node, k: int) -> frozenset:
    if isinstance(node, Activity):
        return frozenset({(node.label,)})
    if isinstance(node, Sequence):
        acc = {()}
        for c in node.children:
            acc = {a + b for a in acc for b in _language(c, k)}
        return frozenset(acc)
    if isinstance(node, Choice):
        return frozenset().union(*(
            _language(c, k) for c, p in zip(node.children, node.probabilities) if p > 0
        ))
    if isinstance(node, Parallel):
        acc = {()}
        for c in node.children:
            acc = {t for a in acc for b in _language(c, k) for t in _interleavings(a, b)}
        return frozenset(acc)
    if isinstance(node, Loop):
        body = _language(node.body, k)
        acc, layer = set(body), set(body)
        reps = k if node.repeat > 0 else 1
        for _ in range(reps - 1):
            layer = {a + b for a in layer for b in body}
            acc |= layer
        return frozenset(acc)
    if isinstance(node, Skip):
        body = _language(node.body, k) if node.skip < 1 else frozenset()
        return body | {()} if node.skip > 0 else body
    raise ModelError(f"unknown node {node!r}")


def _interleavings(a: tuple, b: tuple) -> Iterator[tuple]:
    if not a:
        yield b
        return
    if not b:
        yield a
        return
    for rest in _interleavings(a[1:], b):
        yield (a[0],) + rest
    for rest in _interleavings(a, b[1:]):
        yield (b[0],) + rest


def df_of_traces(traces) -> set[tuple[str, str]]:
    return {(t[i], t[i + 1]) for t in traces for i in range(len(t) - 1)}


@dataclass(frozen=True)
class _Profile:
    acts: frozenset
    first: frozenset
    last: frozenset
    df: frozenset
    nullable: bool
    # can emit a non-empty trace at all
    live: bool


def df_relations(model: Node) -> frozenset[tuple[str, str]]:
    """Directly-follows relations reachable in the model, computed
    structurally from first/last activity sets (loops included)."""
    return _profile(model).df


def _profile(node: Node) -> _Profile:
    empty = frozenset()
    if isinstance(node, Activity):
        s = frozenset({node.label})
        return _Profile(s, s, s, empty, False, True)
    if isinstance(node, Sequence):
        ps = [_profile(c) for c in node.children]
        df = set().union(*(p.df for p in ps))
        first, last = set(), set()
        for i, p in enumerate(ps):
            if all(q.nullable for q in ps[:i]):
                first |= p.first
            if all(q.nullable for q in ps[i + 1:]):
                last |= p.last
            for j in range(i + 1, len(ps)):
                df |= {(a, b) for a in p.last for b in ps[j].first}
                if not ps[j].nullable:
                    break
        return _Profile(
            frozenset().union(*(p.acts for p in ps)), frozenset(first), frozenset(last),
            frozenset(df), all(p.nullable for p in ps), any(p.live for p in ps),
        )
    if isinstance(node, Choice):
        ps = [_profile(c) for c, pr in zip(node.children, node.probabilities) if pr > 0]
        return _Profile(
            frozenset().union(*(p.acts for p in ps)), frozenset().union(*(p.first for p in ps)),
            frozenset().union(*(p.last for p in ps)), frozenset().union(*(p.df for p in ps)),
            any(p.nullable for p in ps), any(p.live for p in ps),
        )
    if isinstance(node, Parallel):
        ps = [_profile(c) for c in node.children]
        df = set().union(*(p.df for p in ps))
        for i, p in enumerate(ps):
            for j, q in enumerate(ps):
                if i != j:
                    df |= {(a, b) for a in p.acts for b in q.acts}
        return _Profile(
            frozenset().union(*(p.acts for p in ps)), frozenset().union(*(p.first for p in ps)),
            frozenset().union(*(p.last for p in ps)), frozenset(df),
            all(p.nullable for p in ps), any(p.live for p in ps),
        )
    if isinstance(node, Loop):
        p = _profile(node.body)
        df = set(p.df)
        if node.repeat > 0:
            df |= {(a, b) for a in p.last for b in p.first}
        return _Profile(p.acts, p.first, p.last, frozenset(df), p.nullable, p.live)
    if isinstance(node, Skip):
        if node.skip >= 1:
            return _Profile(empty, empty, empty, empty, True, False)
        p = _profile(node.body)
        return _Profile(p.acts, p.first, p.last, p.df, p.nullable or node.skip > 0, p.live)
    raise ModelError(f"unknown node {node!r}")


# --------------------------------------------------------------------------
# JSON block-tree format

def to_json_obj(node: Node) -> dict:
    if isinstance(node, Activity):
        return {"kind": "activity", "label": node.label}
    if isinstance(node, Sequence):
        return {"kind": "sequence", "children": [to_json_obj(c) for c in node.children]}
    if isinstance(node, Choice):
        return {"kind": "choice", "children": [to_json_obj(c) for c in node.children],
                "probabilities": list(node.probabilities)}
    if isinstance(node, Parallel):
        return {"kind": "parallel", "children": [to_json_obj(c) for c in node.children]}
    if isinstance(node, Loop):
        return {"kind": "loop", "body": to_json_obj(node.body), "repeat": node.repeat}
    if isinstance(node, Skip):
        return {"kind": "optional", "body": to_json_obj(node.body), "skip": node.skip}
    raise ModelError(f"unknown node {node!r}")


def from_json_obj(obj: dict) -> Node:
    kind = obj.get("kind")
    try:
        if kind == "activity":
            return Activity(obj["label"])
        if kind == "sequence":
            return Sequence(tuple(from_json_obj(c) for c in obj["children"]))
        if kind == "choice":
            kids = tuple(from_json_obj(c) for c in obj["children"])
            probs = obj.get("probabilities") or [1 / len(kids)] * len(kids)
            return Choice(kids, tuple(probs))
        if kind == "parallel":
            return Parallel(tuple(from_json_obj(c) for c in obj["children"]))
        if kind == "loop":
            return Loop(from_json_obj(obj["body"]), obj.get("repeat", 0.3))
        if kind == "optional":
            return Skip(from_json_obj(obj["body"]), obj.get("skip", 0.5))
    except KeyError as exc:
        raise ModelError(f"{kind} node is missing field {exc}") from exc
    raise ModelError(f"unknown node kind {kind!r}")


def load_model(text: str) -> Node:
    return validate(from_json_obj(json.loads(text)))


def dump_model(node: Node) -> str:
    return json.dumps(to_json_obj(node), indent=2)


def base_model() -> Node:
    """Default 15-activity model with exclusive choices, a parallel block,
    an optional step, and three alternative endings."""
    return seq(
        "A",
        xor("B", seq("C", "D")),
        par("E", "F"),
        "G",
        opt("H", skip=0.5),
        xor("I", seq("J", "K")),
        xor("L", seq("M", "N"), "O"),
    )
