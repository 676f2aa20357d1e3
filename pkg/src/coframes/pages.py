"""Weight bigrading of coframe monomials and the first two pages.

A cell (p, q) holds the degree-p coframe monomials of total index weight
p + q.  The page-0 differential is the weight-preserving part of d, which on
a weight-homogeneous model has constant coefficients; page 1 records its
kernels, images, surviving dimensions, chosen representatives, and the exact
projections used to read classes off arbitrary cell vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import linalg, ratpoly as rp
from .forms import Form, form_zero
from .models import GeometryModel, coframe_d, split_by_cell_weight

CellKey = Tuple[int, int]


@dataclass
class Cell:
    key: CellKey
    weight: int
    basis: List[Tuple[int, ...]]

    @property
    def dim(self) -> int:
        return len(self.basis)


class Page0:
    """All cells of a model, keyed by (degree, weight - degree)."""

    def __init__(self, model: GeometryModel):
        self.model = model
        self.cells: Dict[CellKey, Cell] = {}
        n = model.nvars
        for p in range(n + 1):
            buckets: Dict[int, List[Tuple[int, ...]]] = {}
            for combo in combinations(range(n), p):
                w = model.weight_of(combo)
                buckets.setdefault(w, []).append(combo)
            for w, basis in sorted(buckets.items()):
                key = (p, w - p)
                self.cells[key] = Cell(key=key, weight=w, basis=sorted(basis))

    def cell(self, key: CellKey) -> Optional[Cell]:
        return self.cells.get(key)

    def dims(self) -> Dict[CellKey, int]:
        return {k: c.dim for k, c in sorted(self.cells.items())}

    def degree_dims(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for (p, _), c in self.cells.items():
            out[p] = out.get(p, 0) + c.dim
        return out


def filtration_degree(model: GeometryModel, a: Form) -> Optional[int]:
    """Least total index weight among the terms; None for the zero form."""
    if a.basis != model.basis_tag:
        raise ValueError("filtration degree needs a coframe-basis form")
    if not a.terms:
        return None
    return min(model.weight_of(idx) for idx in a.terms)


def e0_apply(model: GeometryModel, a: Form) -> Form:
    """Weight-preserving part of d: each graded piece keeps its index weight."""
    out = Form(model.nvars, a.degree + 1, a.basis)
    for w, part in split_by_cell_weight(model, a).items():
        d = coframe_d(model, part)
        piece = split_by_cell_weight(model, d).get(w)
        if piece is not None:
            for idx, p in piece.terms.items():
                out.add_term(idx, p)
    return out


def e0_columns(model: GeometryModel, page: Page0,
               src: CellKey) -> Tuple[Optional[CellKey], List[linalg.Vector]]:
    """Matrix columns of the page-0 differential leaving a cell.

    Returns the target key and one column per source basis monomial, as
    coordinates in the target cell basis.  Requires constant entries, which
    weight homogeneity guarantees.
    """
    cell = page.cells[src]
    p, q = src
    tgt = (p + 1, q - 1)
    target = page.cells.get(tgt)
    if target is None:
        return None, [[] for _ in cell.basis]
    pos = {idx: i for i, idx in enumerate(target.basis)}
    cols: List[linalg.Vector] = []
    for mono in cell.basis:
        f = Form(model.nvars, p, model.basis_tag)
        f.add_term(mono, rp.const(1, model.nvars))
        d = coframe_d(model, f)
        piece = split_by_cell_weight(model, d).get(cell.weight)
        col = [Fraction(0)] * target.dim
        if piece is not None:
            for idx, poly in piece.terms.items():
                if not rp.is_constant(poly):
                    raise ValueError(
                        "page-0 differential has a nonconstant entry; "
                        "the model is not weight homogeneous")
                col[pos[idx]] = rp.constant_value(poly)
        cols.append(col)
    return tgt, cols


@dataclass
class CellData:
    cell: Cell
    rank_in: int
    rank_out: int
    dim1: int
    reps: List[linalg.Vector]           # class representatives, cell coords
    image_solver: linalg.ColumnSpaceSolver   # incoming page-0 image
    extract: Callable[[Sequence[Fraction]], linalg.Vector]
    source_cell: Optional[CellKey]      # cell the incoming differential leaves


class Page1:
    """Kernels, images, survivors, and projections of the page-0 complex."""

    def __init__(self, model: GeometryModel):
        self.model = model
        self.page0 = Page0(model)
        self.data: Dict[CellKey, CellData] = {}
        outgoing: Dict[CellKey, Tuple[Optional[CellKey], List[linalg.Vector]]] = {}
        for key in self.page0.cells:
            outgoing[key] = e0_columns(model, self.page0, key)
        for key, cell in self.page0.cells.items():
            p, q = key
            dim = cell.dim
            src = (p - 1, q + 1)
            in_cols: List[linalg.Vector] = []
            source_cell = None
            if src in outgoing:
                tgt, cols = outgoing[src]
                if tgt == key:
                    in_cols = cols
                    source_cell = src
            solver = linalg.ColumnSpaceSolver(in_cols, dim)
            tgt, out_cols = outgoing[key]
            out_rows = ([[out_cols[j][r] for j in range(dim)]
                         for r in range(len(out_cols[0]))]
                        if (tgt is not None and dim and out_cols[0]) else [])
            if out_rows:
                red, pivots = linalg.rref(out_rows)
                kernel = linalg.nullspace(out_rows, dim)
            else:
                pivots = []
                kernel = [linalg.unit_vector(j, dim) for j in range(dim)]
            rank_out = len(pivots)
            # class representatives: kernel vectors extending the image
            ref = linalg.ColumnSpaceSolver([list(c) for c in
                                            solver_columns(solver)], dim)
            reps: List[linalg.Vector] = []
            for v in kernel:
                _, rest = ref.reduce(v)
                if any(rest):
                    reps.append(v)
                    ref = _extend(ref, v, dim)
            # decomposition basis: image + reps + non-kernel coordinates
            cols = solver_columns(solver) + reps + \
                [linalg.unit_vector(c, dim) for c in pivots]
            smat = [[cols[j][r] for j in range(len(cols))]
                    for r in range(dim)]
            if len(cols) != dim:
                raise AssertionError("cell decomposition is not square")
            sinv = linalg.inverse(smat) if dim else []
            lo = solver.rank
            hi = lo + len(reps)

            def make_extract(sinv=sinv, lo=lo, hi=hi):
                def extract(v: Sequence[Fraction]) -> linalg.Vector:
                    coords = linalg.matvec(sinv, list(v))
                    return coords[lo:hi]
                return extract

            self.data[key] = CellData(
                cell=cell, rank_in=solver.rank, rank_out=rank_out,
                dim1=dim - rank_out - solver.rank, reps=reps,
                image_solver=solver, extract=make_extract(),
                source_cell=source_cell)
            if self.data[key].dim1 != len(reps):
                raise AssertionError("page-1 dimension bookkeeping is off")

    def dims(self) -> Dict[CellKey, int]:
        return {k: d.dim1 for k, d in sorted(self.data.items()) if d.dim1}

    def ladder(self) -> List[int]:
        out: Dict[int, int] = {}
        for (p, _), d in self.data.items():
            out[p] = out.get(p, 0) + d.dim1
        top = max(out) if out else 0
        return [out.get(p, 0) for p in range(top + 1)]

    def surviving_cells(self, degree: int) -> List[CellKey]:
        keys = [k for k, d in self.data.items()
                if k[0] == degree and d.dim1 > 0]
        return sorted(keys, key=lambda k: k[1])


def solver_columns(solver: linalg.ColumnSpaceSolver) -> List[linalg.Vector]:
    """Echelon basis columns of a ColumnSpaceSolver's span."""
    return [list(v) for v in solver._ech]


def _extend(ref: linalg.ColumnSpaceSolver, v: linalg.Vector,
            dim: int) -> linalg.ColumnSpaceSolver:
    return linalg.ColumnSpaceSolver(solver_columns(ref) + [list(v)], dim)


def check_function_linear(map_fn: Callable[[Form], Form],
                          sections: Sequence[Form],
                          multipliers: Sequence[rp.Poly]):
    """Does map(f * s) equal f * map(s) for the given sections and functions?

    Returns (ok, failures); each failure names the section index and the
    multiplier that broke linearity.  A genuine differential operator fails
    this, a bundle map passes.
    """
    from .forms import form_pmul, form_sub
    failures = []
    for si, s in enumerate(sections):
        base = map_fn(s)
        for mi, f in enumerate(multipliers):
            lhs = map_fn(form_pmul(s, f))
            rhs = form_pmul(base, f)
            if not form_sub(lhs, rhs).is_zero():
                failures.append({"section": si, "multiplier": mi})
    return not failures, failures
