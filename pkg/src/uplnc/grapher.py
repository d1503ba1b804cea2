"""Global-symbol reference graph and its gnuplot rendering.

Nodes are the module's global names: functions, global variables, extern
declarations (including functions that exist only as call targets, printf
being the usual one), and methods under their Struct$method link names.
There is an edge from definition D to name G exactly when D's body refers
to G. Only references from definition bodies count; declarations alone
add no edges.

The emitted script positions nodes on a fixed grid (columns of at most
eight rows), draws one label per node and one arrow per edge, and hides
the axes. Output is deterministic down to the byte.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import Call, Identifier, Module, Storage, walk_expressions


@dataclass(frozen=True)
class RefGraph:
    nodes: tuple[str, ...]                  # sorted
    edges: tuple[tuple[str, str], ...]      # sorted, deduplicated


def build_ref_graph(module: Module) -> RefGraph:
    """Build the reference graph of a checked module (symbols must be
    resolved already)."""
    nodes: set[str] = set()
    for sym in module.globals.values():
        nodes.add(sym.link_name)
    for struct in module.structs.values():
        for m in struct.methods:
            nodes.add(m.link_name)

    edges: set[tuple[str, str]] = set()
    for fn in module.functions():
        src = fn.link_name
        for e in walk_expressions(fn.body):
            if isinstance(e, Identifier):
                sym = e.symbol
                if sym is not None and not sym.is_function and \
                        sym.storage in (Storage.GLOBAL, Storage.EXTERN):
                    edges.add((src, sym.link_name))
            elif isinstance(e, Call):
                if e.callee is not None:
                    edges.add((src, e.callee.link_name))

    for a, b in edges:
        nodes.add(a)
        nodes.add(b)
    return RefGraph(tuple(sorted(nodes)), tuple(sorted(edges)))


_ROWS = 8
_COL_SPACING = 4


def _position(index: int) -> tuple[int, int]:
    return (_COL_SPACING * (index // _ROWS), -(index % _ROWS))


def _fmt(v: float) -> str:
    return format(round(v, 3), "g")


def emit_gnuplot(graph: RefGraph) -> str:
    """Render the graph as a gnuplot script: `gnuplot -p script.gp` shows
    the picture. One `set label` per node, one `set arrow` per edge."""
    pos = {name: _position(i) for i, name in enumerate(graph.nodes)}
    ncols = max(1, (len(graph.nodes) + _ROWS - 1) // _ROWS)
    xmax = _COL_SPACING * (ncols - 1)

    lines = [
        f"# reference graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges",
        f"set xrange [-2:{xmax + 2}]",
        f"set yrange [{-_ROWS}:1]",
        "unset border",
        "unset xtics",
        "unset ytics",
        "unset key",
    ]
    for i, name in enumerate(graph.nodes, 1):
        x, y = pos[name]
        lines.append(f'set label {i} "{name}" at {x},{y} center')
    for i, (src, dst) in enumerate(graph.edges, 1):
        x1, y1 = pos[src]
        x2, y2 = pos[dst]
        if src == dst:
            # self-reference: a short arrow beside the node
            lines.append(f"set arrow {i} from {_fmt(x1 + 0.4)},{_fmt(y1 - 0.3)} "
                         f"to {_fmt(x1 + 0.4)},{_fmt(y1 + 0.3)}")
            continue
        # pull both ends in so arrows do not sit on the labels
        sx = x1 + 0.12 * (x2 - x1)
        sy = y1 + 0.12 * (y2 - y1)
        ex = x1 + 0.88 * (x2 - x1)
        ey = y1 + 0.88 * (y2 - y1)
        lines.append(f"set arrow {i} from {_fmt(sx)},{_fmt(sy)} "
                     f"to {_fmt(ex)},{_fmt(ey)}")
    lines.append('plot "-" with points pointsize 0 notitle')
    lines.append("0 0")
    lines.append("e")
    return "\n".join(lines) + "\n"
