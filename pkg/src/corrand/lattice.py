"""Weighted adjacency operators for the two half-plane lattice models.

Both graphs live on subsets of Z>=0 x Z>=0.  The "sym" model glues every
horizontal half-line row to a single vertical spine along column 0, with
spine hopping weight ``gamma``.  The "diag" model threads the rows together
along a staircase: each column ``n1`` carries a vertical segment covering
``n1*ell <= n2 < (n1+1)*ell`` and consecutive segments are joined by a
single diagonal edge of weight ``gamma``.

Finite volumes are Dirichlet truncations: edges leaving the box are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

Vertex = tuple[int, int]


class Kind(str, Enum):
    SYM = "sym"
    DIAG = "diag"


@dataclass(frozen=True)
class GraphSpec:
    """Model kind plus the couplings and truncation sizes of a finite box."""

    kind: Kind
    gamma: float
    cols: int
    rows: int
    ell: int = 1  # staircase step length; ignored for the sym model

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.cols < 2 or self.rows < 2:
            raise ValueError(f"need cols >= 2 and rows >= 2, got {self.cols}x{self.rows}")
        if self.ell < 1:
            raise ValueError(f"ell must be >= 1, got {self.ell}")
        if self.kind is Kind.DIAG and self.rows < self.ell:
            raise ValueError(
                f"diag model needs rows >= ell so one vertical segment fits "
                f"(rows={self.rows}, ell={self.ell})"
            )


@dataclass(eq=False)
class LatticeOperator:
    """Sparse symmetric adjacency matrix with its vertex <-> index bijection."""

    spec: GraphSpec
    vertices: list[Vertex]
    index: dict[Vertex, int] = field(repr=False)
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


def sym_vertices(spec: GraphSpec) -> list[Vertex]:
    """Full grid, row-major by n2 then n1 (keeps the spine stride regular)."""
    return [(n1, n2) for n2 in range(spec.rows) for n1 in range(spec.cols)]


def diag_vertices(spec: GraphSpec) -> list[Vertex]:
    """Staircase vertex set {floor(n2/ell) <= n1 < cols}, row-major."""
    return [
        (n1, n2)
        for n2 in range(spec.rows)
        for n1 in range(n2 // spec.ell, spec.cols)
        if n2 // spec.ell < spec.cols
    ]


def _assemble(spec: GraphSpec, vertices: list[Vertex], edges) -> LatticeOperator:
    index = {v: i for i, v in enumerate(vertices)}
    rows, cols, vals = [], [], []
    for u, v, w in edges:
        i, j = index[u], index[v]
        rows += [i, j]
        cols += [j, i]
        vals += [w, w]
    n = len(vertices)
    a = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    a.sort_indices()
    return LatticeOperator(spec=spec, vertices=vertices, index=index, matrix=a)


def build_sym(spec: GraphSpec) -> LatticeOperator:
    """Horizontal weight-1 rows plus the weight-gamma spine on column 0."""
    if spec.kind is not Kind.SYM:
        raise ValueError(f"build_sym needs kind=sym, got {spec.kind}")
    vertices = sym_vertices(spec)
    edges = []
    for n2 in range(spec.rows):
        for n1 in range(spec.cols - 1):
            edges.append(((n1, n2), (n1 + 1, n2), 1.0))
    for n2 in range(spec.rows - 1):
        edges.append(((0, n2), (0, n2 + 1), spec.gamma))
    return _assemble(spec, vertices, edges)


def build_diag(spec: GraphSpec) -> LatticeOperator:
    """Staircase rows, vertical column segments, and gamma diagonal junctions.

    Column n1 carries vertical edges (n1,n2)-(n1,n2+1) for
    n1*ell <= n2 < (n1+1)*ell - 1; the segment's top vertex
    (n1, (n1+1)*ell - 1) is joined to (n1+1, (n1+1)*ell) by a diagonal edge
    of weight gamma.  Column 0 keeps its vertical segment.
    """
    if spec.kind is not Kind.DIAG:
        raise ValueError(f"build_diag needs kind=diag, got {spec.kind}")
    vertices = diag_vertices(spec)
    vset = set(vertices)
    ell = spec.ell
    edges = []
    for n1, n2 in vertices:
        u = (n1, n2)
        h = (n1 + 1, n2)
        if h in vset:
            edges.append((u, h, 1.0))
        if n1 * ell <= n2 < (n1 + 1) * ell - 1 and (n1, n2 + 1) in vset:
            edges.append((u, (n1, n2 + 1), 1.0))
        if n2 == (n1 + 1) * ell - 1 and (n1 + 1, n2 + 1) in vset:
            edges.append((u, (n1 + 1, n2 + 1), spec.gamma))
    return _assemble(spec, vertices, edges)


def build(spec: GraphSpec) -> LatticeOperator:
    return build_sym(spec) if spec.kind is Kind.SYM else build_diag(spec)


def vertex_to_index(op: LatticeOperator, v: Vertex) -> int:
    try:
        return op.index[tuple(v)]
    except KeyError:
        raise KeyError(f"vertex {tuple(v)} is not in the {op.spec.kind.value} vertex set") from None


def index_to_vertex(op: LatticeOperator, i: int) -> Vertex:
    return op.vertices[i]


def spine_vertices(spec: GraphSpec) -> list[Vertex]:
    """The single through-going walk: column 0 for sym, the staircase for diag."""
    if spec.kind is Kind.SYM:
        return [(0, n2) for n2 in range(spec.rows)]
    walk = []
    for n2 in range(spec.rows):
        n1 = n2 // spec.ell
        if n1 >= spec.cols:
            break
        walk.append((n1, n2))
    return walk


def position_norm(v: Vertex) -> int:
    """Graph position weight |n| = |n1| + |n2|."""
    return abs(v[0]) + abs(v[1])


def edge_list(op: LatticeOperator) -> list[tuple[int, int, float]]:
    """Undirected edges as sorted (i, j, w) triples with i < j."""
    coo = op.matrix.tocoo()
    triples = sorted(
        (int(i), int(j), float(w)) for i, j, w in zip(coo.row, coo.col, coo.data) if i < j
    )
    return triples


def format_edge_list(op: LatticeOperator) -> str:
    """Text golden format: one ``i j w`` line per undirected edge, sorted."""
    lines = [f"{i} {j} {w!r}" for i, j, w in edge_list(op)]
    return "\n".join(lines) + "\n"
