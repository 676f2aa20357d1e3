"""Independent checks on computed complexes.

Three layers: bundle ranks against product formulas for highest-weight
labels, palindromy of rank ladders, and a slicewise exactness certificate.
The certificate splits every section space into finite slices by total
weighted degree (slot weight plus coefficient weight), computes ranks of the
incoming and outgoing maps on each slice, and verifies that image plus
kernel dimensions account for the whole slice.  Ranks come from a sparse
modular elimination; a failed modular count falls back to exact rational
elimination.  Image-inside-kernel is always verified by an exact product,
which is what makes the modular rank count a certificate rather than a
heuristic.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg, ratpoly as rp
from .models import GeometryModel
from .operators import Resolution, random_section
from .pages import CellKey, Page1

PRIMES = (1000003, 999983)


# #### rank formulas #######################################################

def schur_dim(label: Sequence[int]) -> int:
    """Dimension of the irreducible with the given highest-weight label."""
    if len(label) == 2:
        a, b = label
        if a > b:
            raise ValueError("label must be nondecreasing")
        return b - a + 1
    if len(label) == 3:
        a, b, c = label
        if not (a <= b <= c):
            raise ValueError("label must be nondecreasing")
        return (b - a + 1) * (c - b + 1) * (c - a + 2) // 2
    raise ValueError("only length-2 and length-3 labels are supported")


SCHUR_LABELS: Dict[str, Dict[CellKey, Tuple[int, ...]]] = {
    "g2_5": {
        (0, 0): (0, 0), (1, 0): (0, 1), (2, 2): (1, 3),
        (3, 3): (2, 4), (4, 5): (4, 5), (5, 5): (5, 5),
    },
    "dist3in6": {
        (0, 0): (0, 0, 0), (1, 0): (0, 0, 1), (2, 1): (0, 1, 2),
        (3, 1): (0, 2, 2), (3, 2): (1, 1, 3), (4, 2): (1, 2, 3),
        (5, 3): (2, 3, 3), (6, 3): (3, 3, 3),
    },
}


@dataclass
class DimReport:
    model: str
    rows: List[Tuple[CellKey, int, Tuple[int, ...], int]]
    palindrome_ok: bool
    ok: bool

    def summary(self) -> str:
        lines = []
        for key, dim, label, want in self.rows:
            mark = "ok" if dim == want else "MISMATCH"
            lines.append("cell %s dim %d label %s formula %d %s"
                         % (key, dim, label, want, mark))
        lines.append("palindrome %s" % ("ok" if self.palindrome_ok else "NO"))
        return "\n".join(lines)


def palindromic_check(seq: Sequence[int]) -> bool:
    return list(seq) == list(reversed(seq))


def cross_check_dims(model: GeometryModel,
                     page1: Optional[Page1] = None) -> DimReport:
    """Compare computed cell dimensions with the label product formulas."""
    page1 = page1 or Page1(model)
    table = SCHUR_LABELS.get(model.name)
    if table is None:
        raise KeyError("no label table for model %s" % model.name)
    dims = page1.dims()
    rows = []
    ok = set(dims) == set(table)
    for key in sorted(table):
        want = schur_dim(table[key])
        got = dims.get(key, 0)
        rows.append((key, got, table[key], want))
        if got != want:
            ok = False
    ladder = page1.ladder()
    pal = palindromic_check(ladder)
    return DimReport(model=model.name, rows=rows, palindrome_ok=pal,
                     ok=ok and pal)


# #### weighted monomial slices ############################################

_MONO_CACHE: Dict[Tuple[Tuple[int, ...], int], List[Tuple[int, ...]]] = {}


def weighted_monomials(weights: Tuple[int, ...], w: int) -> List[Tuple[int, ...]]:
    """All exponent tuples of weighted degree exactly w (weights all >= 1)."""
    if w < 0:
        return []
    key = (weights, w)
    hit = _MONO_CACHE.get(key)
    if hit is not None:
        return hit
    n = len(weights)
    out: List[Tuple[int, ...]] = []

    def rec(prefix: List[int], left: int, pos: int) -> None:
        if pos == n - 1:
            q, r = divmod(left, weights[pos])
            if r == 0:
                out.append(tuple(prefix + [q]))
            return
        step = weights[pos]
        for v in range(left // step + 1):
            rec(prefix + [v], left - v * step, pos + 1)
    rec([], w, 0)
    _MONO_CACHE[key] = out
    return out


class _SliceCache:
    """Slice bases and operator columns for one resolution, memoized."""

    def __init__(self, res: Resolution):
        if not res.coeff_weights or min(res.coeff_weights) < 1:
            raise ValueError("resolution needs positive coefficient weights")
        self.res = res
        self.weights = tuple(res.coeff_weights)
        self._basis: Dict[Tuple[int, int], List[Tuple[int, Tuple[int, ...]]]] = {}
        self._cols: Dict[Tuple[int, int], List[Dict[int, Fraction]]] = {}

    def basis(self, node_idx: int, s: int) -> List[Tuple[int, Tuple[int, ...]]]:
        key = (node_idx, s)
        hit = self._basis.get(key)
        if hit is None:
            node = self.res.nodes[node_idx]
            hit = []
            for slot, wslot in enumerate(node.weights):
                for e in weighted_monomials(self.weights, s - wslot):
                    hit.append((slot, e))
            self._basis[key] = hit
        return hit

    def columns(self, op_idx: int, s: int) -> List[Dict[int, Fraction]]:
        """Matrix columns of operator op_idx on the total-weight-s slice."""
        key = (op_idx, s)
        hit = self._cols.get(key)
        if hit is not None:
            return hit
        handle = self.res.operators[op_idx]
        src = self.res.nodes[op_idx]
        out_pos = {bk: i for i, bk in enumerate(self.basis(op_idx + 1, s))}
        cols: List[Dict[int, Fraction]] = []
        for slot, e in self.basis(op_idx, s):
            coeffs: List[rp.Poly] = [{} for _ in range(src.rank)]
            coeffs[slot] = {e: Fraction(1)}
            out = handle.apply(coeffs)
            col: Dict[int, Fraction] = {}
            for sl, p in enumerate(out):
                for e2, c in p.items():
                    bk = (sl, e2)
                    if bk not in out_pos:
                        raise AssertionError(
                            "operator %d is not weight-homogeneous" % op_idx)
                    col[out_pos[bk]] = c
            cols.append(col)
        self._cols[key] = cols
        return cols


def _rank_certified(cols: List[Dict[int, Fraction]]) -> Tuple[int, str]:
    """Rank of sparse Fraction columns: modular first, exact on demand."""
    live = [c for c in cols if c]
    if not live:
        return 0, "empty"
    for p in PRIMES:
        try:
            modrows = linalg.fraction_rows_to_mod_p(live, p)
        except ZeroDivisionError:
            continue
        return linalg.rank_mod_p(modrows, p), "modp"
    return linalg.sparse_rank_exact(live), "exact"


def _compose_is_zero(cols_in: List[Dict[int, Fraction]],
                     cols_out: List[Dict[int, Fraction]]) -> bool:
    """Exact check that every image column of the first map is killed."""
    for col in cols_in:
        acc: Dict[int, Fraction] = {}
        for row_idx, c in col.items():
            for r2, c2 in cols_out[row_idx].items():
                v = acc.get(r2, Fraction(0)) + c * c2
                if v:
                    acc[r2] = v
                elif r2 in acc:
                    del acc[r2]
        if acc:
            return False
    return True


@dataclass
class NodeExactness:
    node: int
    dim_total: int
    slices_checked: List[int]
    homology_slices: Dict[int, int]
    homology_total: int
    methods: Dict[str, int] = field(default_factory=dict)


@dataclass
class ExactnessReport:
    name: str
    variant: str
    max_degree: int
    nodes: List[NodeExactness]
    expected: List[int]
    composition_ok: bool
    guard_hit: bool
    elapsed: float

    @property
    def totals(self) -> List[int]:
        return [n.homology_total for n in self.nodes]

    @property
    def ok(self) -> bool:
        return (self.totals == self.expected and self.composition_ok
                and not self.guard_hit)

    def summary(self) -> str:
        lines = ["%s/%s exactness to coefficient degree %d"
                 % (self.name, self.variant, self.max_degree)]
        for n in self.nodes:
            extra = ""
            if n.homology_slices:
                extra = " at " + ", ".join(
                    "weight %d: %d" % (s, h)
                    for s, h in sorted(n.homology_slices.items()))
            lines.append("  node %d: %d slice dims, homology %d%s"
                         % (n.node, n.dim_total, n.homology_total, extra))
        lines.append("  composition %s, expected homology %s, %s"
                     % ("ok" if self.composition_ok else "NONZERO",
                        self.expected, "ok" if self.ok else "FAILED"))
        return "\n".join(lines)


def exactness_check(res: Resolution, max_degree: int = 3, buffer: int = 1,
                    expected: Optional[Sequence[int]] = None,
                    guard: int = 10 ** 6) -> ExactnessReport:
    """Certify slicewise exactness for coefficients up to max_degree.

    Every slice whose total weight can be reached by a section with
    polynomial coefficients of degree max_degree (plus a safety buffer)
    is checked.  A slice passes when incoming rank plus outgoing rank
    equals the slice dimension and the exact composition product is zero.
    """
    t0 = time.time()
    cache = _SliceCache(res)
    maxw = max(cache.weights)
    nnodes = len(res.nodes)
    if expected is None:
        expected = [1] + [0] * (nnodes - 1)
    nodes: List[NodeExactness] = []
    composition_ok = True
    guard_hit = False
    for k, node in enumerate(res.nodes):
        smin = min(node.weights)
        smax = max(node.weights) + maxw * max_degree + buffer
        checked: List[int] = []
        hom: Dict[int, int] = {}
        dim_total = 0
        methods: Dict[str, int] = {}
        for s in range(smin, smax + 1):
            dim = len(cache.basis(k, s))
            if dim == 0:
                continue
            cols_in = cache.columns(k - 1, s) if k > 0 else []
            cols_out = (cache.columns(k, s)
                        if k < nnodes - 1 else [])
            load = (dim + sum(len(c) for c in cols_in)
                    + sum(len(c) for c in cols_out))
            if load > guard:
                guard_hit = True
                continue
            rank_in, m_in = _rank_certified(cols_in) if cols_in else (0, "none")
            rank_out, m_out = (_rank_certified(cols_out)
                               if cols_out else (0, "none"))
            h = dim - rank_in - rank_out
            if h != 0 and (m_in == "modp" or m_out == "modp"):
                if cols_in:
                    rank_in = linalg.sparse_rank_exact(
                        [dict(c) for c in cols_in if c])
                    m_in = "exact"
                if cols_out:
                    rank_out = linalg.sparse_rank_exact(
                        [dict(c) for c in cols_out if c])
                    m_out = "exact"
                h = dim - rank_in - rank_out
            if h < 0:
                raise AssertionError(
                    "slice %d at node %d has image outside the kernel" % (s, k))
            if cols_in and cols_out:
                if not _compose_is_zero(cols_in, cols_out):
                    composition_ok = False
            checked.append(s)
            dim_total += dim
            if h:
                hom[s] = h
            for m in (m_in, m_out):
                methods[m] = methods.get(m, 0) + 1
        nodes.append(NodeExactness(
            node=k, dim_total=dim_total, slices_checked=checked,
            homology_slices=hom, homology_total=sum(hom.values()),
            methods=methods))
    return ExactnessReport(
        name=res.name, variant=res.variant, max_degree=max_degree,
        nodes=nodes, expected=list(expected),
        composition_ok=composition_ok, guard_hit=guard_hit,
        elapsed=time.time() - t0)


# #### composition on random sections ######################################

@dataclass
class CompositionReport:
    name: str
    variant: str
    pairs: int
    sections_per_pair: int
    failures: List[Tuple[int, int]]
    elapsed: float

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        state = ("ok" if self.ok
                 else "failed at %s" % (self.failures,))
        return ("%s/%s composition: %d pairs x %d sections %s"
                % (self.name, self.variant, self.pairs,
                   self.sections_per_pair, state))


def composition_check(res: Resolution, rng: Optional[random.Random] = None,
                      sections: int = 20,
                      max_degree: int = 3) -> CompositionReport:
    """Apply consecutive operators to random sections; demand exact zero."""
    rng = rng or random.Random(0)
    t0 = time.time()
    failures: List[Tuple[int, int]] = []
    npairs = len(res.operators) - 1
    for k in range(npairs):
        for t in range(sections):
            sec = random_section(res.nodes[k], rng, max_degree)
            mid = res.operators[k].apply(sec)
            out = res.operators[k + 1].apply(mid)
            if any(p for p in out):
                failures.append((k, t))
    return CompositionReport(
        name=res.name, variant=res.variant, pairs=npairs,
        sections_per_pair=sections, failures=failures,
        elapsed=time.time() - t0)


def rs_h1_witness(res: Resolution) -> bool:
    """The degree-1 homology of the symplectic complex has the tautological
    generator: the 1-form pairing each even coordinate with the next odd one
    is closed for the projected differential and is not a differential."""
    if res.variant != "rs":
        raise ValueError("witness is specific to the symplectic complex")
    n = res.nvars
    node1 = res.nodes[1]
    alpha: List[rp.Poly] = [{} for _ in range(node1.rank)]
    for slot, f in enumerate(node1.forms):
        (idx,) = list(f.terms)
        if idx[0] % 2 == 1:
            alpha[slot] = rp.var(idx[0] - 1, n)
    closed = not any(p for p in res.operators[1].apply(alpha))
    cache = _SliceCache(res)
    cols = cache.columns(0, 2)
    basis = cache.basis(1, 2)
    pos = {bk: i for i, bk in enumerate(basis)}
    vec = [Fraction(0)] * len(basis)
    for slot, p in enumerate(alpha):
        for e, c in p.items():
            vec[pos[(slot, e)]] = c
    dense = [[col.get(i, Fraction(0)) for col in cols] for i in range(len(basis))]
    in_image = linalg.solve(dense, vec) is not None
    return closed and not in_image
