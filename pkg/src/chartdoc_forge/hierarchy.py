"""Tree-structured entity taxonomy built from a hypernym DAG.

Construction prunes pass-through nodes (A -> B -> C becomes A -> C when B has a
single child) and resolves multiple inheritance by keeping the
lexicographically smallest parent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    CycleDetected,
    InsufficientEntities,
    RootHasNoAncestors,
    UnknownEntity,
    ValidationError,
)

BUNDLED_EDGES = Path(__file__).parent / "data" / "hypernyms.tsv"


@dataclass(frozen=True)
class EntityNode:
    name: str
    parent: str | None = None
    children: tuple[str, ...] = ()


@dataclass(frozen=True)
class EntityHierarchy:
    nodes: Mapping[str, EntityNode]
    roots: tuple[str, ...]

    def __contains__(self, name):
        return name in self.nodes

    def __len__(self):
        return len(self.nodes)

    def children(self, name) -> tuple[str, ...]:
        return self.nodes[name].children

    def depth(self, name) -> int:
        d = 0
        node = self.nodes[name]
        while node.parent is not None:
            d += 1
            node = self.nodes[node.parent]
        return d


@dataclass(frozen=True)
class EntitySample:
    grandparent: str
    parents: tuple[str, ...]
    # entity name -> (parent, grandparent), in sampling order
    entities: Mapping[str, tuple[str, str]] = field(default_factory=dict)

    def names(self) -> list[str]:
        return list(self.entities)

    def to_dict(self):
        return {
            "grandparent": self.grandparent,
            "parents": list(self.parents),
            "entities": {k: list(v) for k, v in self.entities.items()},
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["grandparent"], tuple(d["parents"]),
                   {k: tuple(v) for k, v in d["entities"].items()})


def parse_edges(text: str) -> list[tuple[str, list[str]]]:
    """Parse ``child<TAB>parent[,parent...]`` lines; ``#`` starts a comment."""
    dag = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        child, _, rest = line.partition("\t")
        child = child.strip().lower()
        if not child:
            raise ValidationError(f"line {lineno}: empty node name")
        hypernyms = [p.strip().lower() for p in rest.split(",") if p.strip()]
        dag.append((child, hypernyms))
    return dag


def load_edges(path: str | Path = BUNDLED_EDGES) -> list[tuple[str, list[str]]]:
    return parse_edges(Path(path).read_text(encoding="utf-8"))


def _check_acyclic(parents: dict[str, set[str]]) -> None:
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in parents}
    for start in sorted(parents):
        if color[start] != WHITE:
            continue
        # iterative DFS; stack holds (node, iterator over parents)
        path = [start]
        color[start] = GREY
        stack = [iter(sorted(parents[start]))]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                color[path.pop()] = BLACK
                stack.pop()
                continue
            if color[nxt] == GREY:
                raise CycleDetected(path[path.index(nxt):] + [nxt])
            if color[nxt] == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                stack.append(iter(sorted(parents[nxt])))


def _prune_single_children(parents: dict[str, set[str]]) -> None:
    """Splice out every node with exactly one child until none remain."""
    children: dict[str, set[str]] = {n: set() for n in parents}
    for n, ps in parents.items():
        for p in ps:
            children[p].add(n)
    pending = sorted(n for n, cs in children.items() if len(cs) == 1)
    while pending:
        node = pending.pop()
        if node not in children or len(children[node]) != 1:
            continue
        (only,) = children.pop(node)
        ups = parents.pop(node)
        parents[only].discard(node)
        parents[only] |= ups
        for p in ups:
            children[p].discard(node)
            children[p].add(only)
            if len(children[p]) == 1:
                pending.append(p)


def build_hierarchy(dag: Iterable[tuple[str, Sequence[str]]]) -> EntityHierarchy:
    parents: dict[str, set[str]] = {}
    for node, hypernyms in dag:
        if not node:
            raise ValidationError("empty node name")
        parents.setdefault(node, set()).update(hypernyms)
        for h in hypernyms:
            if not h:
                raise ValidationError(f"empty hypernym for {node!r}")
            parents.setdefault(h, set())
    for node, ps in parents.items():
        if node in ps:
            raise CycleDetected([node, node])
    _check_acyclic(parents)

    _prune_single_children(parents)
    for node, ps in parents.items():
        if len(ps) > 1:
            parents[node] = {min(ps)}
    # dropping edges can leave new pass-through nodes behind
    _prune_single_children(parents)

    children: dict[str, list[str]] = {n: [] for n in parents}
    for n, ps in parents.items():
        for p in ps:
            children[p].append(n)
    nodes = {}
    for n in sorted(parents):
        parent = next(iter(parents[n])) if parents[n] else None
        nodes[n] = EntityNode(n, parent, tuple(sorted(children[n])))
    roots = tuple(n for n in nodes if nodes[n].parent is None)
    return EntityHierarchy(nodes, roots)


def to_edges(h: EntityHierarchy) -> list[tuple[str, list[str]]]:
    return [(n, [node.parent] if node.parent else []) for n, node in sorted(h.nodes.items())]


def dumps(h: EntityHierarchy) -> str:
    """Canonical JSON: nodes sorted by name, children sorted."""
    doc = {
        "roots": list(h.roots),
        "nodes": {
            n: {"parent": node.parent, "children": list(node.children)}
            for n, node in sorted(h.nodes.items())
        },
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def loads(text: str) -> EntityHierarchy:
    doc = json.loads(text)
    nodes = {
        n: EntityNode(n, v["parent"], tuple(v["children"]))
        for n, v in sorted(doc["nodes"].items())
    }
    for n, node in nodes.items():
        refs = [node.parent] if node.parent else []
        for r in refs + list(node.children):
            if r not in nodes:
                raise ValidationError(f"{n!r} references unknown node {r!r}")
    return EntityHierarchy(nodes, tuple(doc["roots"]))


def load_bundled() -> EntityHierarchy:
    return build_hierarchy(load_edges(BUNDLED_EDGES))


def _qualifying_parents(h: EntityHierarchy, gp: str, k_children: int) -> list[str]:
    return [c for c in h.children(gp) if len(h.children(c)) >= k_children]


def sample_entities(h: EntityHierarchy, rng, k_parents: int, k_children: int,
                    grandparent: str | None = None) -> EntitySample:
    if k_parents < 1 or k_children < 1:
        raise ValidationError("k_parents and k_children must be >= 1")
    if grandparent is not None:
        if grandparent not in h:
            raise UnknownEntity(grandparent)
        gp = grandparent
        if len(_qualifying_parents(h, gp, k_children)) < k_parents:
            raise InsufficientEntities(
                f"{gp!r} has fewer than {k_parents} children with {k_children}+ children")
    else:
        candidates = [n for n in h.nodes
                      if len(_qualifying_parents(h, n, k_children)) >= k_parents]
        if not candidates:
            raise InsufficientEntities(
                f"no grandparent with {k_parents} parents of {k_children}+ children")
        gp = rng.choice(candidates)
    parents = rng.sample(_qualifying_parents(h, gp, k_children), k_parents)
    entities = {}
    for p in parents:
        for e in rng.sample(list(h.children(p)), k_children):
            entities[e] = (p, gp)
    return EntitySample(gp, tuple(parents), entities)


def ancestors(h: EntityHierarchy, name: str) -> tuple[str, str]:
    if name not in h:
        raise UnknownEntity(name)
    parent = h.nodes[name].parent
    if parent is None:
        raise RootHasNoAncestors(f"{name!r} is a root")
    grandparent = h.nodes[parent].parent
    if grandparent is None:
        raise RootHasNoAncestors(f"{name!r} sits directly under root {parent!r}")
    return parent, grandparent
