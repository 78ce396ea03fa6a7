"""Graphviz export of generalized SLT-trees."""

from __future__ import annotations

from typing import Iterable

from .engine import FAILURE, FLOUNDER, SUCCESS, UNDEFINED, GeneralizedSltTree
from .parser import render

LEAF_STYLE = {
    SUCCESS: 'shape=box, peripheries=2',
    FAILURE: 'shape=box, style=filled, fillcolor=gray85',
    UNDEFINED: 'shape=box, style=dashed',
    FLOUNDER: 'shape=octagon',
}
LEAF_MARK = {SUCCESS: "[]_t", FAILURE: "[]_f", UNDEFINED: "[]_u*", FLOUNDER: "flounder"}


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def node_label(node) -> str:
    text = render(node.goal) or "[]"
    if node.leaf is not None and node.goal and node.leaf != SUCCESS:
        text += f"  {LEAF_MARK[node.leaf]}"
    elif node.leaf is not None:
        text = LEAF_MARK[node.leaf]
    return f"N{node.id}: {text}"


def to_dot(gt: GeneralizedSltTree, name: str = "slt") -> str:
    """DOT text for one generalized tree; output depends only on the tree."""
    out = [f"digraph {name} {{", '  node [shape=plaintext, fontname="monospace"];']
    for tree in gt.trees:
        out.append(f"  subgraph cluster_t{tree.id} {{")
        out.append(f"    label={_quote(f'T{tree.id}: {render(tree.atom)}')};")
        for i in tree.nodes:
            node = gt.nodes[i]
            attrs = f"label={_quote(node_label(node))}"
            if node.leaf is not None:
                attrs += ", " + LEAF_STYLE[node.leaf]
            out.append(f"    n{node.id} [{attrs}];")
        out.append("  }")
    for node in gt.nodes:
        for c in node.children:
            label = gt.nodes[c].label or ""
            out.append(f"  n{node.id} -> n{c} [label={_quote(label)}];")
        if node.child_tree is not None:
            root = gt.trees[node.child_tree].root
            out.append(f"  n{node.id} -> n{root} [style=dotted];")
        if node.same_as is not None:
            out.append(f"  n{node.id} -> n{node.same_as} [style=dashed, label=\"same goal\"];")
    out.append("}")
    return "\n".join(out) + "\n"


def write_dot(trees: Iterable[GeneralizedSltTree], path: str) -> None:
    """Write every tree of a run; later trees get numbered graph names."""
    with open(path, "w", encoding="utf-8") as f:
        for k, gt in enumerate(trees):
            f.write(to_dot(gt, f"gt{k}"))
