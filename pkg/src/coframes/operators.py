"""Derived operators between page-1 nodes and their complexes.

Every operator here is produced by one mechanism: lift a class to a form,
apply d, correct the graded pieces below the target weight by solving
constant page-0 systems, and project at the target.  The correction steps are
recorded as a trace, the order of the resulting operator is measured
empirically by probing with powers of coordinate shifts, and whole complexes
are assembled node by node.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import linalg, ratpoly as rp
from .forms import (COORD, Bivector, Form, contract, exterior_d, form_pmul,
                    form_scale, form_sub, form_zero, wedge)
from .models import GeometryModel, coframe_d, split_by_cell_weight, symplectic_data
from .pages import CellKey, Page1, e0_columns

PolyVec = List[rp.Poly]


# #### nodes ###############################################################

@dataclass
class Node:
    """A term of a complex, realized by explicit constant-coefficient forms."""
    label: str
    degree: int
    forms: List[Form]
    weights: List[int]
    cells: List[Tuple[CellKey, int, int]] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.forms)

    def describe(self) -> dict:
        return {"label": self.label, "degree": self.degree, "rank": self.rank,
                "weights": list(self.weights),
                "cells": [[k[0], k[1]] for k, _, _ in self.cells]}


def graded_node(model: GeometryModel, page1: Page1, degree: int,
                cells: Optional[Sequence[CellKey]] = None,
                label: Optional[str] = None) -> Node:
    """Node made of the page-1 survivors of one degree (or chosen cells)."""
    keys = list(cells) if cells is not None else page1.surviving_cells(degree)
    forms: List[Form] = []
    weights: List[int] = []
    ranges: List[Tuple[CellKey, int, int]] = []
    for key in keys:
        data = page1.data[key]
        lo = len(forms)
        for rep in data.reps:
            f = Form(model.nvars, degree, model.basis_tag)
            for j, mono in enumerate(data.cell.basis):
                if rep[j]:
                    f.add_term(mono, rp.const(rep[j], model.nvars))
            forms.append(f)
            weights.append(data.cell.weight)
        ranges.append((key, lo, len(forms)))
    return Node(label=label or ("node%d" % degree), degree=degree,
                forms=forms, weights=weights, cells=ranges)


def span_node(model_nvars: int, degree: int, basis_forms: List[Form],
              weights: List[int], label: str) -> Node:
    return Node(label=label, degree=degree, forms=basis_forms,
                weights=weights, cells=[])


class SpanSolver:
    """Expresses forms in the span of a node's constant basis forms."""

    def __init__(self, node: Node):
        self.node = node
        monos = sorted({idx for f in node.forms for idx in f.terms})
        self.pos = {m: i for i, m in enumerate(monos)}
        cols = []
        for f in node.forms:
            v = [Fraction(0)] * len(monos)
            for idx, p in f.terms.items():
                v[self.pos[idx]] = rp.constant_value(p)
            cols.append(v)
        self.solver = linalg.ColumnSpaceSolver(cols, len(monos))

    def express(self, a: Form) -> PolyVec:
        out: PolyVec = [{} for _ in self.node.forms]
        monos: Dict[Tuple[int, ...], None] = {}
        cols: Dict[Tuple[int, ...], linalg.Vector] = {}
        for idx, p in a.terms.items():
            if idx not in self.pos:
                raise ValueError("form leaves the node span at %s" % (idx,))
            for e in p:
                monos[e] = None
        for e in sorted(monos):
            v = [Fraction(0)] * len(self.pos)
            for idx, p in a.terms.items():
                c = p.get(e)
                if c:
                    v[self.pos[idx]] = c
            x, rest = self.solver.reduce(v)
            if any(rest):
                raise ValueError("form is not in the node span")
            for j, c in enumerate(x):
                if c:
                    out[j][e] = c
        return out


def realize(node: Node, coeffs: Sequence[rp.Poly]) -> Form:
    """The form sum(coeffs[k] * basis form k)."""
    if len(coeffs) != node.rank:
        raise ValueError("expected %d coefficients, got %d"
                         % (node.rank, len(coeffs)))
    first = node.forms[0] if node.forms else None
    if first is None:
        raise ValueError("empty node")
    out = Form(first.nvars, node.degree, first.basis)
    for f, u in zip(node.forms, coeffs):
        if not u:
            continue
        for idx, p in f.terms.items():
            out.add_term(idx, rp.mul(p, u))
    return out


# #### correction machinery ################################################

@dataclass
class CorrectionStep:
    weight: int
    cell: CellKey
    via_cell: CellKey
    killed: List[Tuple[int, ...]]
    solved: Dict[Tuple[int, ...], rp.Poly]
    depth: int


def _reduce_poly_rhs(solver: linalg.ColumnSpaceSolver,
                     vec: PolyVec) -> Tuple[PolyVec, PolyVec]:
    """Column-space reduction with polynomial right-hand sides."""
    monos = sorted({e for p in vec for e in p})
    x: PolyVec = [{} for _ in range(solver.ncols)]
    rest: PolyVec = [{} for _ in vec]
    for e in monos:
        v = [p.get(e, Fraction(0)) for p in vec]
        xe, re = solver.reduce(v)
        for j, c in enumerate(xe):
            if c:
                x[j][e] = c
        for i, c in enumerate(re):
            if c:
                rest[i][e] = c
    return x, rest


class _CellRetract:
    """Splitting of one cell adapted to the cells on either side.

    The image of the incoming page-0 map is parameterized by the source
    cell's pivot coordinates, so a correction preimage always lies in the
    complement of the source kernel.  That consistency between corrections
    and class extraction is what makes the derived operators compose to
    zero on the nose instead of up to lower-order junk.
    """

    __slots__ = ("src_key", "src_pivots", "bcols", "sinv", "rank_in", "dim")

    def __init__(self, src_key: CellKey, src_pivots: List[int],
                 bcols: List[linalg.Vector], sinv: linalg.Matrix, dim: int):
        self.src_key = src_key
        self.src_pivots = src_pivots
        self.bcols = bcols
        self.sinv = sinv
        self.rank_in = len(bcols)
        self.dim = dim


class _Retract:
    """Lazy per-cell retract data for one model's page-0 complex."""

    def __init__(self, model: GeometryModel, page1: Page1):
        self.model = model
        self.page1 = page1
        self._pivots: Dict[CellKey, List[int]] = {}
        self._cols: Dict[CellKey, Tuple[Optional[CellKey],
                                        List[linalg.Vector]]] = {}
        self._cells: Dict[CellKey, Optional[_CellRetract]] = {}

    def _columns(self, key: CellKey):
        hit = self._cols.get(key)
        if hit is None:
            hit = e0_columns(self.model, self.page1.page0, key)
            self._cols[key] = hit
        return hit

    def out_pivots(self, key: CellKey) -> List[int]:
        piv = self._pivots.get(key)
        if piv is None:
            tgt, cols = self._columns(key)
            if tgt is None or not cols or not cols[0]:
                piv = []
            else:
                rows = [[cols[j][r] for j in range(len(cols))]
                        for r in range(len(cols[0]))]
                _, piv = linalg.rref(rows)
            self._pivots[key] = piv
        return piv

    def cell(self, key: CellKey) -> Optional[_CellRetract]:
        if key in self._cells:
            return self._cells[key]
        data = self.page1.data[key]
        out: Optional[_CellRetract] = None
        if data.rank_in:
            src = data.source_cell
            assert src is not None
            upiv = self.out_pivots(src)
            tgt, cols = self._columns(src)
            assert tgt == key and len(upiv) == data.rank_in
            bcols = [list(cols[j]) for j in upiv]
            dim = data.cell.dim
            own_piv = self.out_pivots(key)
            scols = bcols + [list(r) for r in data.reps] + \
                [linalg.unit_vector(c, dim) for c in own_piv]
            smat = [[scols[j][r] for j in range(len(scols))]
                    for r in range(dim)]
            sinv = linalg.inverse(smat)
            if sinv is None:
                raise AssertionError("cell splitting is degenerate")
            out = _CellRetract(src, upiv, bcols, sinv, dim)
        self._cells[key] = out
        return out


def _retract_for(model: GeometryModel, page1: Page1) -> _Retract:
    rt = getattr(page1, "_retract", None)
    if rt is None:
        rt = _Retract(model, page1)
        page1._retract = rt
    return rt


class _LcpRun:
    """One lift-correct sweep of d over ascending weights."""

    def __init__(self, model: GeometryModel, page1: Page1, lift: Form,
                 out_degree: int):
        self.model = model
        self.page1 = page1
        self.retract = _retract_for(model, page1)
        self.degree = out_degree
        eta = coframe_d(model, lift)
        self.parts: Dict[int, PolyVec] = {}
        for w, piece in split_by_cell_weight(model, eta).items():
            cell = page1.page0.cells.get((out_degree, w - out_degree))
            if cell is None:
                raise AssertionError("derivative left the cell table")
            vec: PolyVec = [{} for _ in cell.basis]
            pos = {m: i for i, m in enumerate(cell.basis)}
            for idx, p in piece.terms.items():
                vec[pos[idx]] = p
            self.parts[w] = vec
        self.depth: Dict[int, int] = {w: 1 for w in self.parts}
        self.trace: List[CorrectionStep] = []

    def correct_at(self, w: int) -> None:
        """Remove the reachable part of weight w using the page-0 image."""
        key = (self.degree, w - self.degree)
        vec = self.parts.get(w)
        if vec is None or not any(vec):
            return
        cr = self.retract.cell(key)
        if cr is None:
            return
        zero = Fraction(0)
        monos = sorted({e for p in vec for e in p})
        acoeffs: PolyVec = [{} for _ in range(cr.rank_in)]
        newvec: PolyVec = [dict(p) for p in vec]
        touched = False
        for e in monos:
            v = [p.get(e, zero) for p in vec]
            for i in range(cr.rank_in):
                a = sum((cr.sinv[i][r] * v[r] for r in range(cr.dim)
                         if v[r]), zero)
                if not a:
                    continue
                touched = True
                acoeffs[i][e] = a
                col = cr.bcols[i]
                for r in range(cr.dim):
                    if col[r]:
                        slot = newvec[r]
                        nv = slot.get(e, zero) - a * col[r]
                        if nv:
                            slot[e] = nv
                        elif e in slot:
                            del slot[e]
        if not touched:
            return
        src_cell = self.page1.page0.cells[cr.src_key]
        gamma = Form(self.model.nvars, cr.src_key[0], self.model.basis_tag)
        solved: Dict[Tuple[int, ...], rp.Poly] = {}
        for i, p in enumerate(acoeffs):
            if p:
                mono = src_cell.basis[cr.src_pivots[i]]
                gamma.add_term(mono, p)
                solved[mono] = p
        data = self.page1.data[key]
        killed = [data.cell.basis[r] for r in range(cr.dim)
                  if vec[r] and not newvec[r]]
        d_here = self.depth.get(w, 1)
        self.parts[w] = newvec
        dg = coframe_d(self.model, gamma)
        for w2, piece in split_by_cell_weight(self.model, dg).items():
            if w2 == w:
                continue
            if w2 < w:
                raise AssertionError("correction reached below its weight")
            cell2 = self.page1.page0.cells[(self.degree, w2 - self.degree)]
            vec2 = self.parts.setdefault(w2, [{} for _ in cell2.basis])
            pos2 = {m: i for i, m in enumerate(cell2.basis)}
            for idx, p in piece.terms.items():
                vec2[pos2[idx]] = rp.sub(vec2[pos2[idx]], p)
            self.depth[w2] = max(self.depth.get(w2, 1), d_here + 1)
        self.trace.append(CorrectionStep(
            weight=w, cell=key, via_cell=cr.src_key, killed=killed,
            solved=solved, depth=d_here))

    def part_form(self, w: int) -> Form:
        cell = self.page1.page0.cells.get((self.degree, w - self.degree))
        out = form_zero(self.model.nvars, self.degree, self.model.basis_tag)
        vec = self.parts.get(w)
        if cell is not None and vec is not None:
            for i, p in enumerate(vec):
                if p:
                    out.add_term(cell.basis[i], p)
        return out

    def remaining_form(self, min_w: int) -> Form:
        out = form_zero(self.model.nvars, self.degree,
                        self.model.basis_tag)
        for w in sorted(self.parts):
            if w < min_w:
                continue
            piece = self.part_form(w)
            for idx, p in piece.terms.items():
                out.add_term(idx, p)
        return out


# #### operator handles ####################################################

class OperatorHandle:
    """A derived operator with its trace and measured order."""

    method = "abstract"

    def __init__(self, source: Node, target: Node):
        self.source = source
        self.target = target
        self.order: Optional[int] = None
        self.order_bound: Optional[int] = None
        self.trace: List[CorrectionStep] = []

    def apply(self, coeffs: Sequence[rp.Poly],
              record_trace: bool = False) -> PolyVec:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"method": self.method,
                "source": self.source.label, "target": self.target.label,
                "order": self.order, "order_bound": self.order_bound}


class GradedOperator(OperatorHandle):
    """Class-to-class operator via lift, correction, and cell projection."""

    method = "graded"

    def __init__(self, model: GeometryModel, page1: Page1,
                 source: Node, target: Node):
        super().__init__(source, target)
        self.model = model
        self.page1 = page1
        if not target.cells:
            raise ValueError("graded operator needs a graded target node")
        self.target_cells = {key: (lo, hi) for key, lo, hi in target.cells}
        self.max_weight = max(self.page1.page0.cells[k].weight
                              for k in self.target_cells)

    def apply(self, coeffs: Sequence[rp.Poly],
              record_trace: bool = False,
              lift_extra: Optional[Form] = None) -> PolyVec:
        lift = realize(self.source, coeffs)
        if lift_extra is not None:
            if lift_extra.degree != lift.degree \
                    or lift_extra.basis != lift.basis:
                raise ValueError("lift perturbation must match the lift")
            for idx, p in lift_extra.terms.items():
                lift.add_term(idx, p)
        run = _LcpRun(self.model, self.page1, lift, self.source.degree + 1)
        out: PolyVec = [{} for _ in range(self.target.rank)]
        min_w = min(self.source.weights) + 1 if self.source.weights else 1
        for w in range(min_w, self.max_weight + 1):
            key = (self.source.degree + 1, w - self.source.degree - 1)
            if key not in self.page1.page0.cells:
                continue
            run.correct_at(w)
            if key in self.target_cells:
                lo, hi = self.target_cells[key]
                data = self.page1.data[key]
                vec = run.parts.get(w)
                if vec is None:
                    continue
                monos = sorted({e for p in vec for e in p})
                for e in monos:
                    v = [p.get(e, Fraction(0)) for p in vec]
                    cls = data.extract(v)
                    for j, c in enumerate(cls):
                        if c:
                            slot = out[lo + j]
                            cur = slot.get(e)
                            s = (cur + c) if cur is not None else c
                            if s:
                                slot[e] = s
                            else:
                                del slot[e]
                if w in run.depth:
                    self.order_bound = max(self.order_bound or 0,
                                           run.depth[w])
        if record_trace:
            self.trace = run.trace
        return out


class DeepCorrectedOperator(OperatorHandle):
    """Correct everything below the target span; keep the honest form."""

    method = "deep"

    def __init__(self, model: GeometryModel, page1: Page1,
                 source: Node, target: Node):
        super().__init__(source, target)
        self.model = model
        self.page1 = page1
        self.span = SpanSolver(target)
        support = set(self.span.pos)
        self.correct_weights: List[int] = []
        self.keep_min: Optional[int] = None
        degree = source.degree + 1
        for key, cell in sorted(page1.page0.cells.items(),
                                key=lambda kv: kv[1].weight):
            if key[0] != degree:
                continue
            inside = [m in support for m in cell.basis]
            if all(inside):
                if self.keep_min is None or cell.weight < self.keep_min:
                    self.keep_min = cell.weight
            elif any(inside):
                raise ValueError("target span splits a cell")
            else:
                self.correct_weights.append(cell.weight)
        if self.keep_min is None:
            raise ValueError("target span has no cells")
        self.correct_weights = [w for w in self.correct_weights
                                if w < self.keep_min]

    def apply(self, coeffs: Sequence[rp.Poly],
              record_trace: bool = False) -> PolyVec:
        lift = realize(self.source, coeffs)
        run = _LcpRun(self.model, self.page1, lift, self.source.degree + 1)
        for w in self.correct_weights:
            run.correct_at(w)
            if any(p for p in run.parts.get(w, ())):
                raise ValueError("weight %d is not fully correctable" % w)
        remaining = run.remaining_form(self.keep_min)
        if record_trace:
            self.trace = run.trace
        depths = [run.depth[w] for w in run.parts
                  if w >= self.keep_min and any(run.parts[w])]
        self.order_bound = max(self.order_bound or 0, *(depths or (1,)))
        return self.span.express(remaining)


class SpanDOperator(OperatorHandle):
    """Plain d between span nodes."""

    method = "span_d"

    def __init__(self, model: GeometryModel, source: Node, target: Node):
        super().__init__(source, target)
        self.model = model
        self.span = SpanSolver(target)
        self.order_bound = 1

    def apply(self, coeffs: Sequence[rp.Poly],
              record_trace: bool = False) -> PolyVec:
        form = realize(self.source, coeffs)
        return self.span.express(coframe_d(self.model, form))


# #### symplectic replacement complex ######################################

class RsPlainD(OperatorHandle):
    method = "rs_d"

    def __init__(self, source: Node, target: Node):
        super().__init__(source, target)
        self.span = SpanSolver(target)
        self.order_bound = 1

    def apply(self, coeffs, record_trace=False):
        return self.span.express(exterior_d(realize(self.source, coeffs)))


class RsProjD(OperatorHandle):
    """d followed by the pointwise projection killing the J-trace."""

    method = "rs_proj_d"

    def __init__(self, source: Node, target: Node, jform: Form,
                 jdual: Bivector, half_dim: int):
        super().__init__(source, target)
        self.span = SpanSolver(target)
        self.jform = jform
        self.jdual = jdual
        self.half_dim = half_dim
        self.order_bound = 1

    def apply(self, coeffs, record_trace=False):
        beta = exterior_d(realize(self.source, coeffs))
        trace = contract(beta, self.jdual)
        c = trace.terms.get((), {})
        corr = form_pmul(self.jform, rp.scale(c, Fraction(1, self.half_dim)))
        return self.span.express(form_sub(beta, corr))


class RsMiddle(OperatorHandle):
    """Second-order middle map: solve J ^ gamma = d beta, emit -d gamma."""

    method = "rs_middle"

    def __init__(self, source: Node, target: Node, jform: Form, nvars: int):
        super().__init__(source, target)
        self.span = SpanSolver(target)
        self.jform = jform
        self.nvars = nvars
        # constant matrix of J ^ . from 1-forms to 3-forms
        from itertools import combinations
        self.targets3 = sorted(combinations(range(nvars), 3))
        pos3 = {m: i for i, m in enumerate(self.targets3)}
        cols = []
        for i in range(nvars):
            onef = Form(nvars, 1, COORD)
            onef.add_term((i,), rp.const(1, nvars))
            w = wedge(self.jform, onef)
            v = [Fraction(0)] * len(self.targets3)
            for idx, p in w.terms.items():
                v[pos3[idx]] = rp.constant_value(p)
            cols.append(v)
        self.jsolver = linalg.ColumnSpaceSolver(cols, len(self.targets3))
        self.pos3 = pos3
        self.order_bound = 2

    def apply(self, coeffs, record_trace=False):
        beta = realize(self.source, coeffs)
        dbeta = exterior_d(beta)
        vec: PolyVec = [{} for _ in self.targets3]
        for idx, p in dbeta.terms.items():
            vec[self.pos3[idx]] = p
        x, rest = _reduce_poly_rhs(self.jsolver, vec)
        if any(any(r) for r in rest):
            raise ValueError("d beta is not in the image of J ^ .")
        gamma = Form(self.nvars, 1, COORD)
        for i, p in enumerate(x):
            if p:
                gamma.add_term((i,), p)
        return self.span.express(form_scale(exterior_d(gamma), Fraction(-1)))


# #### complexes ###########################################################

@dataclass
class Resolution:
    name: str
    variant: str
    nodes: List[Node]
    operators: List[OperatorHandle]
    model: Optional[GeometryModel] = None
    nvars: int = 0
    coeff_weights: Tuple[int, ...] = ()

    def ranks(self) -> List[int]:
        return [n.rank for n in self.nodes]

    def orders(self, rng: Optional[random.Random] = None) -> List[int]:
        rng = rng or random.Random(7)
        out = []
        for h in self.operators:
            if h.order is None:
                measure_order(h, rng)
            out.append(h.order)
        return out

    def describe(self) -> dict:
        return {"name": self.name, "variant": self.variant,
                "ranks": self.ranks(),
                "nodes": [n.describe() for n in self.nodes],
                "operators": [h.describe() for h in self.operators]}


def derive_operator(model: GeometryModel,
                    source: Union[int, CellKey, Sequence[CellKey]],
                    target: Union[None, CellKey, Sequence[CellKey]] = None,
                    page1: Optional[Page1] = None) -> OperatorHandle:
    """The derived operator leaving a cell (or a degree's survivors)."""
    page1 = page1 or Page1(model)
    if isinstance(source, int):
        src_cells = page1.surviving_cells(source)
        degree = source
    elif source and isinstance(source[0], int):
        src_cells = [source]  # type: ignore[list-item]
        degree = source[0]
    else:
        src_cells = list(source)  # type: ignore[arg-type]
        degree = src_cells[0][0]
    if target is None:
        tgt_cells = page1.surviving_cells(degree + 1)
    elif target and isinstance(target[0], int):
        tgt_cells = [target]  # type: ignore[list-item]
    else:
        tgt_cells = list(target)  # type: ignore[arg-type]
    src = graded_node(model, page1, degree, src_cells)
    tgt = graded_node(model, page1, degree + 1, tgt_cells)
    return GradedOperator(model, page1, src, tgt)


def named_complex(model: GeometryModel, variant: str = "bgg") -> Resolution:
    """Assemble a named resolution for a builtin model."""
    page1 = Page1(model)
    if variant == "bgg":
        top = max(p for (p, _) in page1.dims())
        nodes = [graded_node(model, page1, p) for p in range(top + 1)]
        ops: List[OperatorHandle] = [
            GradedOperator(model, page1, nodes[p], nodes[p + 1])
            for p in range(top)]
        return Resolution(name=model.name, variant=variant, nodes=nodes,
                          operators=ops, model=model, nvars=model.nvars,
                          coeff_weights=model.weights)
    if model.name == "g2_5" and variant in ("ambient", "basic"):
        return _g2_complex(model, page1, variant)
    raise KeyError("unknown complex variant %r for model %s"
                   % (variant, model.name))


def _g2_complex(model: GeometryModel, page1: Page1,
                variant: str) -> Resolution:
    n = model.nvars
    tag = model.basis_tag

    def cform(monos: Sequence[Tuple[Tuple[int, ...], int]],
              degree: int) -> Form:
        f = Form(n, degree, tag)
        for idx, c in monos:
            f.add_term(idx, rp.const(c, n))
        return f

    node0 = graded_node(model, page1, 0, label="functions")
    node1 = graded_node(model, page1, 1, label="horizontal1")
    if variant == "ambient":
        pairs = [(0, 3), (0, 4), (1, 3), (1, 4), (0, 2), (1, 2), (0, 1)]
        basis2 = [cform([(p, 1)], 2) for p in pairs]
        w2 = [model.weight_of(p) for p in pairs]
        node2 = span_node(n, 2, basis2, w2, "vertical_wedge_1forms")
    else:
        combos2: List[List[Tuple[Tuple[int, ...], int]]] = [
            [((0, 3), 1)], [((0, 4), 1), ((1, 3), 1)], [((1, 4), 1)],
            [((0, 2), 1)], [((1, 2), 1)], [((0, 1), 1)]]
        basis2 = [cform(c, 2) for c in combos2]
        w2 = [model.weight_of(c[0][0]) for c in combos2]
        node2 = span_node(n, 2, basis2, w2, "B2")
    from itertools import combinations as _comb
    if variant == "ambient":
        triples = sorted(_comb(range(n), 3))
        label3 = "all3forms"
    else:
        triples = [t for t in _comb(range(n), 3) if t != (2, 3, 4)]
        label3 = "B3"
    basis3 = [cform([(t, 1)], 3) for t in sorted(triples)]
    node3 = span_node(n, 3, basis3, [model.weight_of(t) for t in
                                     sorted(triples)], label3)
    quads = sorted(_comb(range(n), 4))
    node4 = span_node(n, 4, [cform([(qd, 1)], 4) for qd in quads],
                      [model.weight_of(qd) for qd in quads], "all4forms")
    node5 = span_node(n, 5, [cform([(tuple(range(n)), 1)], 5)],
                      [model.weight_of(tuple(range(n)))], "volume")
    nodes = [node0, node1, node2, node3, node4, node5]
    ops: List[OperatorHandle] = [
        GradedOperator(model, page1, node0, node1),
        DeepCorrectedOperator(model, page1, node1, node2),
        SpanDOperator(model, node2, node3),
        SpanDOperator(model, node3, node4),
        SpanDOperator(model, node4, node5),
    ]
    return Resolution(name=model.name, variant=variant, nodes=nodes,
                      operators=ops, model=model, nvars=n,
                      coeff_weights=model.weights)


def build_rs_complex(half_dim: int) -> Resolution:
    """The symplectic replacement complex on R^{2 half_dim}."""
    if half_dim != 2:
        raise ValueError("only the 4-dimensional case is built in")
    data = symplectic_data(half_dim)
    n = 2 * half_dim
    jform: Form = data["J"]
    jdual: Bivector = data["J_dual"]
    from itertools import combinations as _comb

    def cmono(idx: Tuple[int, ...], degree: int, c: int = 1) -> Form:
        f = Form(n, degree, COORD)
        f.add_term(idx, rp.const(c, n))
        return f

    node0 = span_node(n, 0, [cmono((), 0)], [0], "functions")
    node1 = span_node(n, 1, [cmono((i,), 1) for i in range(n)],
                      [1] * n, "one_forms")
    perp: List[Form] = []
    for pair in sorted(_comb(range(n), 2)):
        f = cmono(pair, 2)
        tr = contract(f, jdual).terms.get((), {})
        if not tr:
            perp.append(f)
    mixed = form_sub(cmono((0, 1), 2), cmono((2, 3), 2))
    perp.append(mixed)
    node2 = span_node(n, 2, perp, [2] * len(perp), "primitive2")
    coef = [f.copy() for f in perp]
    node3 = span_node(n, 2, coef, [4] * len(coef), "coeffective2")
    node4 = span_node(n, 3, [cmono(t, 3) for t in sorted(_comb(range(n), 3))],
                      [5] * 4, "three_forms")
    node5 = span_node(n, 4, [cmono(tuple(range(n)), 4)], [6], "volume")
    nodes = [node0, node1, node2, node3, node4, node5]
    ops: List[OperatorHandle] = [
        RsPlainD(node0, node1),
        RsProjD(node1, node2, jform, jdual, half_dim),
        RsMiddle(node2, node3, jform, n),
        RsPlainD(node3, node4),
        RsPlainD(node4, node5),
    ]
    return Resolution(name="symplectic%d" % n, variant="rs", nodes=nodes,
                      operators=ops, model=None, nvars=n,
                      coeff_weights=(1,) * n)


def rs_pair_d(half_dim: int, degree: int, omega: Form,
              mu: Form) -> Tuple[Form, Form]:
    """The two-slot differential (d omega +/- J ^ mu, d mu)."""
    data = symplectic_data(half_dim)
    jf: Form = data["J"]
    sign = Fraction(1) if degree % 2 == 0 else Fraction(-1)
    top = exterior_d(omega)
    jm = wedge(jf, mu)
    first = top.copy()
    for idx, p in jm.terms.items():
        first.add_term(idx, p if sign > 0 else rp.neg(p))
    return first, exterior_d(mu)


# #### order measurement ###################################################

def _probe_points(nvars: int, rng: random.Random) -> List[List[Fraction]]:
    pts = [[Fraction(0)] * nvars]
    fixed = [Fraction(1, 2), Fraction(-1, 3), Fraction(2, 5), Fraction(-1, 4),
             Fraction(3, 7), Fraction(-2, 5), Fraction(1, 6)]
    pts.append([fixed[i % len(fixed)] for i in range(nvars)])
    pts.append([Fraction(rng.randint(-4, 4), rng.randint(1, 5))
                for _ in range(nvars)])
    return pts


def _monomials_of_degree(nvars: int, k: int) -> List[Tuple[int, ...]]:
    if k == 0:
        return [(0,) * nvars]
    out = []

    def rec(prefix: List[int], left: int, pos: int) -> None:
        if pos == nvars - 1:
            out.append(tuple(prefix + [left]))
            return
        for v in range(left + 1):
            rec(prefix + [v], left - v, pos + 1)
    rec([], k, 0)
    return out


def measure_order(handle: OperatorHandle,
                  rng: Optional[random.Random] = None,
                  kmax: int = 5) -> int:
    """Empirical order: the largest jet degree the output can see.

    Probes each source slot with (x - c)^gamma and evaluates the output at
    c; a nonzero value witnesses order >= |gamma|.  The structural bound
    from the correction cascade caps the search.
    """
    rng = rng or random.Random(11)
    nvars = handle.source.forms[0].nvars
    if handle.order_bound is None:
        generic = [rp.random_poly(rng, nvars, 2, terms=4)
                   for _ in range(handle.source.rank)]
        handle.apply(generic, record_trace=True)
        if handle.order_bound is None:
            handle.order_bound = 1
    bound = min(handle.order_bound, kmax)
    pts = _probe_points(nvars, rng)
    for k in range(bound, -1, -1):
        for gamma in _monomials_of_degree(nvars, k):
            for c in pts:
                probe: rp.Poly = rp.const(1, nvars)
                for i, g in enumerate(gamma):
                    if g:
                        shift = rp.sub(rp.var(i, nvars),
                                       rp.const(c[i], nvars))
                        probe = rp.mul(probe, rp.ppow(shift, g))
                for slot in range(handle.source.rank):
                    coeffs: PolyVec = [{} for _ in range(handle.source.rank)]
                    coeffs[slot] = probe
                    out = handle.apply(coeffs)
                    if any(rp.evaluate(p, c) for p in out if p):
                        handle.order = k
                        return k
    handle.order = 0
    return 0


# #### sections ############################################################

@dataclass
class GradedSection:
    resolution: str
    variant: str
    node: int
    coeffs: PolyVec

    def to_json(self, nvars: int) -> dict:
        return {"model": self.resolution, "variant": self.variant,
                "cell": self.node,
                "coeffs": [rp.poly_to_json(p, nvars) for p in self.coeffs]}

    @staticmethod
    def from_json(obj: dict) -> "GradedSection":
        sel = obj["cell"] if "cell" in obj else obj["node"]
        return GradedSection(
            resolution=obj["model"], variant=obj.get("variant", "bgg"),
            node=int(sel),
            coeffs=[rp.poly_from_json(t) for t in obj["coeffs"]])


def random_section(node: Node, rng: random.Random,
                   max_degree: int = 3) -> PolyVec:
    nvars = node.forms[0].nvars
    return [rp.random_poly(rng, nvars, max_degree, terms=3)
            for _ in range(node.rank)]


def apply_operator(handle: OperatorHandle,
                   section: Sequence[rp.Poly]) -> PolyVec:
    return handle.apply(section)
