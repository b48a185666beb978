"""Exact feasibility checks for Hölder-Young-Brascamp-Lieb inequalities.

An instance is a list of surjective linear maps ``l_j : Q^n -> Q^{n_j}``
together with exponents ``z_j = 1/p_j``.  The inequality

    |int prod_j f_j(l_j x) dx| <= C prod_j ||f_j||_{p_j}

holds iff the scaling condition ``n = sum_j z_j n_j`` (C1) holds and every
subspace ``V`` satisfies ``dim V <= sum_j z_j dim l_j(V)`` (C2).  Given (C1),
(C2) is equivalent to the codimension form (C3).

Everything here is exact rational arithmetic.  Subspaces are stored as the
rows of their reduced row echelon basis, which is canonical and hashable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

PROVED = "proved"
REFUTED = "refuted"
UNDECIDED = "undecided"

MAX_CANDIDATES = 10_000
# Sum/intersection evaluations allowed while closing the kernel lattice.
MAX_LATTICE_OPERATIONS = 200_000
# Subsets of maps examined when looking for a covering certificate.
MAX_COVER_MAPS = 12


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floating point entries are not accepted; use 'p/q' strings or Fractions")
    return Fraction(x)


def _matrix(rows) -> tuple:
    out = tuple(tuple(_frac(x) for x in row) for row in rows)
    if not out or len({len(r) for r in out}) != 1 or len(out[0]) == 0:
        raise ValueError("a map must be a non-empty rectangular matrix")
    return out


def rref(rows, ncols: int) -> tuple[tuple, tuple]:
    """Reduced row echelon form of ``rows``; returns (nonzero rows, pivots)."""
    m = [[_frac(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return tuple(tuple(row) for row in m[:r]), tuple(pivots)


def rank(rows, ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def span(vectors, n: int) -> tuple:
    """Canonical basis of the span of ``vectors`` in ``Q^n``."""
    return rref(list(vectors), n)[0]


def nullspace(rows, n: int) -> tuple:
    """Canonical basis of ``{x : rows @ x = 0}``."""
    reduced, pivots = rref(rows, n)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            v[pc] = -row[fc]
        basis.append(v)
    return span(basis, n)


def subspace_sum(u, v, n: int) -> tuple:
    return span(list(u) + list(v), n)


def subspace_intersection(u, v, n: int) -> tuple:
    # (U^perp + V^perp)^perp; the standard pairing is nondegenerate over Q
    if not u or not v:
        return ()
    return nullspace(list(nullspace(u, n)) + list(nullspace(v, n)), n)


def image_dim(matrix, basis) -> int:
    """Dimension of ``matrix(V)`` for ``V`` spanned by ``basis``."""
    if not basis:
        return 0
    images = [[sum(a * x for a, x in zip(row, v)) for row in matrix] for v in basis]
    return rank(images, len(matrix))


@dataclass(frozen=True)
class HyblInstance:
    """Maps ``l_j`` (rational matrices, ``n_j x n``) with exponents ``z_j``.

    Every map must have full row rank.  Trivial intersection of the kernels
    is not enforced: when it fails the common kernel violates (C2) and the
    checker reports it as a witness.
    """

    ambient_dim: int
    maps: tuple
    exponents: tuple

    def __post_init__(self):
        n = int(self.ambient_dim)
        if n < 1:
            raise ValueError(f"ambient dimension must be positive, got {n}")
        maps = tuple(_matrix(m) for m in self.maps)
        z = tuple(_frac(x) for x in self.exponents)
        if len(maps) != len(z):
            raise ValueError(f"{len(maps)} maps but {len(z)} exponents")
        if not maps:
            raise ValueError("an instance needs at least one map")
        for j, m in enumerate(maps):
            if len(m[0]) != n:
                raise ValueError(f"map {j} has {len(m[0])} columns, expected {n}")
            if rank(m, n) != len(m):
                raise ValueError(f"map {j} is not surjective (rank {rank(m, n)} < {len(m)})")
        for j, x in enumerate(z):
            if not 0 <= x <= 1:
                raise ValueError(f"exponent z_{j} = {x} outside [0, 1]")
        object.__setattr__(self, "ambient_dim", n)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "exponents", z)

    @property
    def target_dims(self) -> tuple:
        return tuple(len(m) for m in self.maps)

    def kernels(self) -> list:
        return [nullspace(m, self.ambient_dim) for m in self.maps]

    def kernels_trivial(self) -> bool:
        stacked = [row for m in self.maps for row in m]
        return rank(stacked, self.ambient_dim) == self.ambient_dim

    def deficit(self, basis) -> Fraction:
        """``dim V - sum_j z_j dim l_j(V)``; (C2) asks for this to be <= 0."""
        return len(basis) - sum(z * image_dim(m, basis) for z, m in zip(self.exponents, self.maps))

    def codim_slack(self, basis) -> Fraction:
        """``codim V - sum_j z_j codim l_j(V)``; (C3) asks for this to be >= 0."""
        n = self.ambient_dim
        total = sum(z * (len(m) - image_dim(m, basis)) for z, m in zip(self.exponents, self.maps))
        return (n - len(basis)) - total


@dataclass
class FeasibilityVerdict:
    """Outcome of the (C1)-(C3) checks.

    ``c2_holds`` and ``c3_holds`` are one of ``"proved"``, ``"refuted"`` or
    ``"undecided"``.  ``complete`` is True when the (C2) verdict covers every
    subspace (a covering certificate, a closed-form reduction, or a
    refutation); a lattice search that finds nothing sets it False.
    """

    c1_holds: bool
    c2_holds: str
    c3_holds: str
    complete: bool
    witness: Optional[tuple] = None
    c3_witness: Optional[tuple] = None
    candidates_tested: int = 0
    certificate: Optional[dict] = None
    method: str = ""
    exponents: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        def basis(b):
            return None if b is None else [[str(x) for x in row] for row in b]

        cert = None
        if self.certificate is not None:
            cert = {",".join(map(str, k)): str(v) for k, v in sorted(self.certificate.items())}
        return {
            "c1_holds": self.c1_holds,
            "c2_holds": self.c2_holds,
            "c3_holds": self.c3_holds,
            "complete": self.complete,
            "witness": basis(self.witness),
            "c3_witness": basis(self.c3_witness),
            "candidates_tested": self.candidates_tested,
            "certificate": cert,
            "method": self.method,
            "exponents": [str(z) for z in self.exponents],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def check_c1(inst: HyblInstance) -> bool:
    """Scaling condition ``n = sum_j z_j n_j``, exactly."""
    return sum(z * nj for z, nj in zip(inst.exponents, inst.target_dims)) == inst.ambient_dim


def _maximize_cover(columns, z):
    """Exact simplex for ``max sum(theta)`` s.t. ``A theta <= z``, ``theta >= 0``.

    ``columns[s]`` lists the rows (maps) family ``s`` covers.  Slack
    variables give a feasible starting basis because ``z >= 0``; Bland's rule
    prevents cycling.  Returns ``(optimum, theta)``.
    """
    m, k = len(z), len(columns)
    # tableau rows: [A | I | b], objective row: reduced costs
    tab = []
    for j in range(m):
        row = [Fraction(1) if j in columns[s] else Fraction(0) for s in range(k)]
        row += [Fraction(1) if i == j else Fraction(0) for i in range(m)]
        row.append(Fraction(z[j]))
        tab.append(row)
    obj = [Fraction(-1)] * k + [Fraction(0)] * (m + 1)
    basis = [k + j for j in range(m)]
    while True:
        enter = next((c for c in range(k + m) if obj[c] < 0), None)
        if enter is None:
            break
        ratios = [(tab[r][-1] / tab[r][enter], basis[r], r) for r in range(m) if tab[r][enter] > 0]
        if not ratios:
            raise ArithmeticError("cover program is unbounded")
        _, _, r = min(ratios)
        piv = tab[r][enter]
        tab[r] = [x / piv for x in tab[r]]
        for i in range(m):
            if i != r and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [a - f * b for a, b in zip(tab[i], tab[r])]
        f = obj[enter]
        obj = [a - f * b for a, b in zip(obj, tab[r])]
        basis[r] = enter
    theta = [Fraction(0)] * k
    for r, b in enumerate(basis):
        if b < k:
            theta[b] = tab[r][-1]
    return obj[-1], theta


def covering_certificate(inst: HyblInstance) -> Optional[dict]:
    """Weights on jointly injective families of maps proving (C2) for every V.

    If families ``S`` with trivial common kernel carry weights ``theta_S``
    summing to one and each map's total weight is at most ``z_j``, then
    ``dim V <= sum_{j in S} dim l_j(V)`` for each ``S`` and averaging gives
    (C2).  Only minimal injective families are needed.  Returns ``None`` when
    no such weighting exists or there are too many maps to enumerate.
    """
    m, n = len(inst.maps), inst.ambient_dim
    if m > MAX_COVER_MAPS:
        return None
    families = []
    for size in range(1, m + 1):
        for combo in combinations(range(m), size):
            if any(set(f) <= set(combo) for f in families):
                continue
            rows = [row for j in combo for row in inst.maps[j]]
            if rank(rows, n) == n:
                families.append(combo)
    if not families:
        return None
    optimum, theta = _maximize_cover([set(f) for f in families], inst.exponents)
    if optimum < 1:
        return None
    return {f: t / optimum for f, t in zip(families, theta) if t != 0}


def _coordinate_subspaces(n: int):
    for size in range(1, n):
        for combo in combinations(range(n), size):
            yield tuple(tuple(Fraction(int(i == c)) for i in range(n)) for c in combo)


def candidate_subspaces(inst: HyblInstance, extra=(), limit: int = MAX_CANDIDATES,
                        max_operations: int = MAX_LATTICE_OPERATIONS):
    """Kernel lattice closure, coordinate subspaces and ``extra``, deduplicated.

    Returns ``(candidates, exhausted)``; ``exhausted`` is False when the
    enumeration stopped at ``limit`` candidates or ``max_operations``
    lattice operations.
    """
    n = inst.ambient_dim
    operations = 0
    full = span([[Fraction(int(i == j)) for i in range(n)] for j in range(n)], n)
    seen = {}

    def add(b):
        if b and b not in seen:
            seen[b] = None
        return len(seen) <= limit

    for b in [full] + inst.kernels():
        if not add(b):
            return list(seen)[:limit], False
    frontier = list(seen)
    while frontier:
        current = list(seen)
        new = []
        for u in frontier:
            for v in current:
                operations += 2
                if operations > max_operations:
                    return list(seen), False
                for w in (subspace_sum(u, v, n), subspace_intersection(u, v, n)):
                    if w and w not in seen:
                        if not add(w):
                            return list(seen)[:limit], False
                        new.append(w)
        frontier = new
    for b in _coordinate_subspaces(n):
        if not add(b):
            return list(seen)[:limit], False
    for vectors in extra:
        if not add(span(vectors, n)):
            return list(seen)[:limit], False
    return list(seen), True


def check_c2(inst: HyblInstance, subspaces: Optional[Sequence] = None,
             limit: int = MAX_CANDIDATES) -> FeasibilityVerdict:
    """Test (C2) and (C3) on an instance.

    A covering certificate proves (C2) for all subspaces.  Otherwise the
    kernel lattice, the coordinate subspaces and any user-supplied spanning
    sets are searched; a violating subspace is returned as the witness.  If
    nothing violates, (C2) is reported proved on the tested candidates with
    ``complete=False``; if the enumeration hits ``limit`` first the verdict
    is undecided.
    """
    c1 = check_c1(inst)
    cert = covering_certificate(inst)
    if cert is not None and c1 and not subspaces:
        return FeasibilityVerdict(c1, PROVED, PROVED, True, certificate=cert,
                                  method="covering certificate", exponents=inst.exponents)
    candidates, exhausted = candidate_subspaces(inst, subspaces or (), limit)

    # report the most violated subspace, preferring the smallest one
    c2_witness = min((b for b in candidates if inst.deficit(b) > 0),
                     key=lambda b: (-inst.deficit(b), len(b)), default=None)
    c3_witness = min((b for b in candidates if inst.codim_slack(b) < 0),
                     key=lambda b: (inst.codim_slack(b), len(b)), default=None)

    if cert is not None:
        c2, complete, method = PROVED, True, "covering certificate"
    elif c2_witness is not None:
        c2, complete, method = REFUTED, True, "lattice search"
    elif exhausted:
        c2, complete, method = PROVED, False, "lattice search"
    else:
        c2, complete, method = UNDECIDED, False, "lattice search (capped)"

    if c3_witness is not None:
        c3 = REFUTED
    elif c1 and c2 == PROVED:
        # (C1) and (C2) together imply (C3)
        c3 = PROVED
    elif c1 and c2 == REFUTED:
        c3 = REFUTED
        c3_witness = c2_witness
    else:
        c3 = UNDECIDED

    return FeasibilityVerdict(
        c1_holds=c1, c2_holds=c2, c3_holds=c3, complete=complete,
        witness=c2_witness if c2 == REFUTED else None,
        c3_witness=c3_witness if c3 == REFUTED else None,
        candidates_tested=len(candidates), certificate=cert, method=method,
        exponents=inst.exponents,
    )


def paper_family_instance(k: int, d: int, z1, z_last) -> HyblInstance:
    """Maps for a ``k``-th order cumulant bound on ``R^{d(k-1)}``.

    Block projections ``x -> x_j`` (``j < k``) and ``x -> sum_j x_j`` carry
    exponent ``z1``; the identity carries ``z_last``.
    """
    if k < 3:
        raise ValueError(f"k must be at least 3, got {k}")
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    n = d * (k - 1)
    one, zero = Fraction(1), Fraction(0)
    maps = []
    for j in range(k - 1):
        maps.append([[one if c == j * d + r else zero for c in range(n)] for r in range(d)])
    maps.append([[one if c % d == r else zero for c in range(n)] for r in range(d)])
    maps.append([[one if c == r else zero for c in range(n)] for r in range(n)])
    z1 = _frac(z1)
    return HyblInstance(n, maps, [z1] * k + [_frac(z_last)])


def check_paper_family(k: int, d: int, z1, z_last=None) -> FeasibilityVerdict:
    """Closed-form verdict for the cumulant family without subspace search.

    (C1) reads ``d(k-1) = k d z1 + d(k-1) z_last``.  Any ``k-1`` of the ``k``
    block maps are jointly injective, so weights ``z1/(k-1)`` on those
    families and ``z_last`` on the identity form a covering certificate of
    total mass ``k z1/(k-1) + z_last``, which equals one exactly when (C1)
    holds.  ``z_last`` defaults to the value solving (C1).
    """
    if k < 3:
        raise ValueError(f"k must be at least 3, got {k}")
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    z1 = _frac(z1)
    solved = 1 - k * z1 / (k - 1)
    z_last = solved if z_last is None else _frac(z_last)
    for name, z in (("z1", z1), ("z_last", z_last)):
        if not 0 <= z <= 1:
            raise ValueError(f"{name} = {z} outside [0, 1]")
    exps = (z1,) * k + (z_last,)
    if z_last != solved:
        return FeasibilityVerdict(False, UNDECIDED, UNDECIDED, False, method="closed form", exponents=exps)
    families = {tuple(j for j in range(k) if j != skip): z1 / (k - 1) for skip in range(k)}
    if z_last:
        families[(k,)] = z_last
    families = {f: t for f, t in families.items() if t}
    return FeasibilityVerdict(True, PROVED, PROVED, True, certificate=families, method="closed form",
                              exponents=exps)


def admissible_pk(k: int) -> Fraction:
    """Integrability index ``2(k-1)/(k-2)`` for the k-th cumulant density."""
    if k < 3:
        raise ValueError(f"admissible index defined for k >= 3, got {k}")
    return Fraction(2 * (k - 1), k - 2)


def decay_exponent(k: int, d: int, p1) -> Fraction:
    """Rate ``nu = k d (1/2 - (1 - 1/p1))`` of the k-th normalized cumulant.

    Positive exactly when ``p1 < 2``; it is minus the power of ``T`` in the
    cumulant bound.
    """
    p1 = _frac(p1)
    if p1 < 1:
        raise ValueError(f"p1 must be at least 1, got {p1}")
    return k * d * (Fraction(1, 2) - (1 - 1 / p1))


# -- interchange format ---------------------------------------------------

def parse_instance(text: str) -> HyblInstance:
    """Read an instance from the plain-text interchange format::

        ambient 2
        map
        1 0
        end
        map
        1 1
        end
        exponents 1/2 1/2

    Entries are integers or ``p/q`` rationals; ``#`` starts a comment.
    """
    ambient = None
    exponents = None
    maps, current = [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if current is not None:
                if head == "end":
                    maps.append(current)
                    current = None
                else:
                    current.append([Fraction(tok) for tok in line.split()])
            elif head == "ambient":
                ambient = int(rest[0])
            elif head == "map":
                current = []
            elif head == "exponents":
                exponents = [Fraction(tok) for tok in rest]
            else:
                raise ValueError(f"unknown directive {head!r}")
        except (ValueError, IndexError, ZeroDivisionError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if current is not None:
        raise ValueError("unterminated map block")
    if ambient is None or exponents is None:
        raise ValueError("instance needs 'ambient' and 'exponents' lines")
    return HyblInstance(ambient, maps, exponents)


def format_instance(inst: HyblInstance) -> str:
    lines = [f"ambient {inst.ambient_dim}"]
    for m in inst.maps:
        lines.append("map")
        lines.extend(" ".join(str(x) for x in row) for row in m)
        lines.append("end")
    lines.append("exponents " + " ".join(str(z) for z in inst.exponents))
    return "\n".join(lines) + "\n"
