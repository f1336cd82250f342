"""Control-flow change patterns applied to block-structured models.

Every pattern belongs to one of three families: insertion (I),
resequentialization (R) or optionalization (O). Branching-frequency changes
are not offered; they leave the directly-follows relations untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .model import (
    Activity, Choice, Loop, ModelError, Node, Parallel, Sequence, Skip,
    df_relations, get_node, labels, replace_node, validate,
)


class UndetectablePatternError(ModelError):
    pass


class PatternKind(str, Enum):
    SERIAL_INSERT = "serial_insert"
    CONDITIONAL_INSERT = "conditional_insert"
    PARALLEL_INSERT = "parallel_insert"
    REMOVE_FRAGMENT = "remove_fragment"
    SWAP_FRAGMENTS = "swap_fragments"
    LOOP_FRAGMENT = "loop_fragment"
    SKIP_FRAGMENT = "skip_fragment"
    SEQUENTIALIZE_PARALLEL = "sequentialize_parallel"
    PARALLELIZE_SEQUENCE = "parallelize_sequence"


CATEGORY = {
    PatternKind.SERIAL_INSERT: "I",
    PatternKind.CONDITIONAL_INSERT: "I",
    PatternKind.PARALLEL_INSERT: "I",
    PatternKind.REMOVE_FRAGMENT: "I",
    PatternKind.SWAP_FRAGMENTS: "R",
    PatternKind.SEQUENTIALIZE_PARALLEL: "R",
    PatternKind.PARALLELIZE_SEQUENCE: "R",
    PatternKind.LOOP_FRAGMENT: "O",
    PatternKind.SKIP_FRAGMENT: "O",
}


@dataclass(frozen=True)
class ChangePattern:
    """A change applied at ``target``, a path of child positions from the root.

    serial_insert       target = (*seq_path, position); payload = (label,)
    conditional_insert  target = node path; payload = (label,)  node becomes xor(node, label)
    parallel_insert     target = node path; payload = (label,)  node becomes and(node, label)
    remove_fragment     target = (*seq_path, position) of a sequence child
    swap_fragments      target = (*seq_path, i); second = j, swap children i and j
    loop_fragment       target = node path; probability = repeat probability
    skip_fragment       target = node path; probability = skip probability
    sequentialize_parallel  target = path of a parallel block
    parallelize_sequence    target = (*seq_path, i); second = j, children i..j run in parallel
    """

    kind: PatternKind
    target: tuple[int, ...]
    payload: tuple[str, ...] = ()
    second: int = -1
    probability: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", PatternKind(self.kind))
        object.__setattr__(self, "target", tuple(self.target))
        object.__setattr__(self, "payload", tuple(self.payload))

    @property
    def category(self) -> str:
        return CATEGORY[self.kind]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "target": list(self.target), "payload": list(self.payload),
                "second": self.second, "probability": self.probability}

    @classmethod
    def from_dict(cls, d: dict) -> "ChangePattern":
        return cls(d["kind"], tuple(d["target"]), tuple(d.get("payload", ())),
                   d.get("second", -1), d.get("probability", 0.5))


def _sequence_at(model: Node, path: tuple[int, ...]) -> Sequence:
    node = get_node(model, path)
    if not isinstance(node, Sequence):
        raise ModelError(f"node at {path} is {type(node).__name__}, expected a sequence")
    return node


def _fresh(model: Node, payload: tuple[str, ...], n: int = 1) -> list[str]:
    if len(payload) != n:
        raise ModelError(f"pattern needs {n} new activity label(s), got {payload}")
    taken = set(labels(model))
    clash = [p for p in payload if p in taken]
    if clash:
        raise ModelError(f"payload labels already in the model: {clash}")
    return list(payload)


def _splice(model: Node, path: tuple[int, ...], kids: list) -> Node:
    if not kids:
        raise ModelError("change would leave an empty sequence")
    return replace_node(model, path, Sequence(tuple(kids)))


def apply_change_pattern(model: Node, p: ChangePattern) -> Node:
    """Return the changed model. Raises :class:`UndetectablePatternError` when
    the change leaves the set of reachable directly-follows relations intact."""
    new = _transform(model, p)
    if df_relations(new) == df_relations(model):
        raise UndetectablePatternError(f"{p.kind.value} at {p.target} leaves the directly-follows relations unchanged")
    return new


def _transform(model: Node, p: ChangePattern) -> Node:
    k = p.kind
    if k is PatternKind.SERIAL_INSERT:
        (label,) = _fresh(model, p.payload)
        path, pos = p.target[:-1], p.target[-1]
        kids = list(_sequence_at(model, path).children)
        if not 0 <= pos <= len(kids):
            raise ModelError(f"insert position {pos} out of range")
        kids.insert(pos, Activity(label))
        new = _splice(model, path, kids)
    elif k in (PatternKind.CONDITIONAL_INSERT, PatternKind.PARALLEL_INSERT):
        (label,) = _fresh(model, p.payload)
        node = get_node(model, p.target)
        if k is PatternKind.CONDITIONAL_INSERT:
            block = Choice((node, Activity(label)), (1 - p.probability, p.probability))
        else:
            block = Parallel((node, Activity(label)))
        new = replace_node(model, p.target, block)
    elif k is PatternKind.REMOVE_FRAGMENT:
        path, pos = p.target[:-1], p.target[-1]
        kids = list(_sequence_at(model, path).children)
        if not 0 <= pos < len(kids):
            raise ModelError(f"remove position {pos} out of range")
        del kids[pos]
        new = _splice(model, path, kids)
    elif k in (PatternKind.SWAP_FRAGMENTS, PatternKind.PARALLELIZE_SEQUENCE):
        path, i, j = p.target[:-1], p.target[-1], p.second
        kids = list(_sequence_at(model, path).children)
        if not (0 <= i < j < len(kids)):
            raise ModelError(f"need 0 <= {i} < {j} < {len(kids)}")
        if k is PatternKind.SWAP_FRAGMENTS:
            kids[i], kids[j] = kids[j], kids[i]
        else:
            kids[i:j + 1] = [Parallel(tuple(kids[i:j + 1]))]
        new = _splice(model, path, kids)
    elif k is PatternKind.LOOP_FRAGMENT:
        new = replace_node(model, p.target, Loop(get_node(model, p.target), p.probability))
    elif k is PatternKind.SKIP_FRAGMENT:
        new = replace_node(model, p.target, Skip(get_node(model, p.target), p.probability))
    elif k is PatternKind.SEQUENTIALIZE_PARALLEL:
        node = get_node(model, p.target)
        if not isinstance(node, Parallel):
            raise ModelError(f"node at {p.target} is {type(node).__name__}, expected a parallel block")
        new = replace_node(model, p.target, Sequence(node.children))
    else:
        raise ModelError(f"unsupported pattern {k}")
    return validate(new)


def apply_change_patterns(model: Node, patterns: list[ChangePattern]) -> Node:
    """Apply a composite change, one simple pattern after another. Only the
    end result has to alter the directly-follows relations."""
    new = model
    for p in patterns:
        new = _transform(new, p)
    if df_relations(new) == df_relations(model):
        raise UndetectablePatternError("composite change leaves the directly-follows relations unchanged")
    return new


def df_difference(before: Node, after: Node) -> tuple[frozenset, frozenset]:
    """(added, removed) directly-follows relations."""
    a, b = df_relations(before), df_relations(after)
    return b - a, a - b


# Patterns for the default base model, one per kind.
PRESETS: dict[str, ChangePattern] = {
    "serial_insert": ChangePattern(PatternKind.SERIAL_INSERT, (3,), ("X",)),
    "conditional_insert": ChangePattern(PatternKind.CONDITIONAL_INSERT, (3,), ("X",)),
    "parallel_insert": ChangePattern(PatternKind.PARALLEL_INSERT, (3,), ("X",)),
    "remove_fragment": ChangePattern(PatternKind.REMOVE_FRAGMENT, (3,)),
    "swap_fragments": ChangePattern(PatternKind.SWAP_FRAGMENTS, (2,), second=3),
    "loop_fragment": ChangePattern(PatternKind.LOOP_FRAGMENT, (5,), probability=0.3),
    "skip_fragment": ChangePattern(PatternKind.SKIP_FRAGMENT, (3,), probability=0.5),
    "sequentialize_parallel": ChangePattern(PatternKind.SEQUENTIALIZE_PARALLEL, (2,)),
    "parallelize_sequence": ChangePattern(PatternKind.PARALLELIZE_SEQUENCE, (3,), second=4),
}


def load_pattern(text: str) -> ChangePattern:
    return ChangePattern.from_dict(json.loads(text))
