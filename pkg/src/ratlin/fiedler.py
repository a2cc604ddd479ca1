"""Fiedler-like pencils of square rational matrices and their block Kronecker form.

Elementary matrices, pq x pq, in q x q blocks of size p (1-based block indices):

* M_0(X) = diag(I_{(q-1)p}, X) and M_{-q}(X) = M_q(X) = diag(X, I_{(q-1)p});
* for 1 <= i <= q-1, M_i(X) is the identity except for [[X, I], [I, 0]] in block
  rows/columns (q-i, q-i+1), and M_{-i}(X) has [[0, I], [I, X]] there.

With D = sum_k D_k lambda^k the coefficient matrices are M_i^D = M_i(-D_i) for
0 <= i <= q-1 and M_{-i}^D = M_{-i}(D_i) for 1 <= i <= q.

Every product is carried twice: numerically over Q and symbolically with
block tags (zero, +-I, +-name). A symbolic product that needs a real sum or a
product of two named blocks is not operation-free and raises.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from flint import fmpq_mat

from .exactalg import NEG_INF
from .linearize import (
    Pencil,
    SbmbLinearization,
    as_condition,
    block_kronecker_pair,
    build_sbmb,
    complete_pair,
    eye,
    lift_basis_to_sbmb,
    recover_basis,
)
from .minbases import MinimalBasis, sorted_col_degrees
from .polymat import PolyMatrix, RatMatrix, as_poly_matrix, as_rat_matrix
from .sysmat import CertificationError, PreconditionError, StateSpaceRealization, minimal_realization

FAMILIES = ("FP", "properGFP", "FPR", "GFPR")


class NotOperationFree(ValueError):
    """A symbolic block product needed arithmetic between named blocks."""


# ---------------------------------------------------------------------------
# index tuples


@dataclass
class IndexTuple:
    entries: List[int]
    q: int

    def __post_init__(self):
        self.entries = [int(x) for x in self.entries]
        if any(abs(x) > self.q for x in self.entries):
            raise ValueError(f"index out of range for q={self.q}: {self.entries}")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def sip(self) -> bool:
        """Between two occurrences of an index i there is an occurrence of i+1."""
        e = self.entries
        for x in range(len(e)):
            for y in range(x + 1, len(e)):
                if e[x] == e[y]:
                    if e[x] + 1 not in e[x + 1:y]:
                        return False
                    break
        return True


def consecutions_inversions_at_zero(entries: Sequence[int], zero_at: int = None) -> Tuple[int, int]:
    """(c0, i0) counted from the occurrence of 0 at ``zero_at``.

    c0: the largest c with 1, 2, ..., c appearing in this order to the right of 0.
    i0: the largest i with 1, 2, ..., i appearing in this order to the left of 0.
    """
    e = list(entries)
    if zero_at is None:
        if 0 not in e:
            raise ValueError("tuple does not contain 0")
        zero_at = e.index(0)
    if e[zero_at] != 0:
        raise ValueError("no 0 at the given position")
    c, want = 0, 1
    for x in e[zero_at + 1:]:
        if x == want:
            c += 1
            want += 1
    i, want = 0, 1
    for x in reversed(e[:zero_at]):
        if x == want:
            i += 1
            want += 1
    return c, i


# ---------------------------------------------------------------------------
# elementary matrices, numeric and symbolic


def _check_index(i: int, q: int) -> None:
    if abs(i) > q:
        raise ValueError(f"elementary index {i} out of range for q={q}")


def elementary_matrix(i: int, x: fmpq_mat, q: int, p: int) -> fmpq_mat:
    _check_index(i, q)
    if (x.nrows(), x.ncols()) != (p, p):
        raise ValueError("assignment matrix must be p x p")
    out = eye(p * q)

    def put(bi, bj, blk):
        for a in range(p):
            for b in range(p):
                out[bi * p + a, bj * p + b] = blk[a, b] if blk is not None else 0

    ident = eye(p)
    if i == 0:
        put(q - 1, q - 1, x)
    elif abs(i) == q:
        put(0, 0, x)
    else:
        r = q - abs(i) - 1  # 0-based first block of the 2x2 window
        if i > 0:
            put(r, r, x)
            put(r, r + 1, ident)
            put(r + 1, r, ident)
            put(r + 1, r + 1, None)
        else:
            put(r, r, None)
            put(r, r + 1, ident)
            put(r + 1, r, ident)
            put(r + 1, r + 1, x)
    return out


Tag = Optional[Tuple[int, str]]


def elementary_tags(i: int, name: str, q: int) -> List[List[Tag]]:
    _check_index(i, q)
    t: List[List[Tag]] = [[(1, "I") if a == b else None for b in range(q)] for a in range(q)]
    if i == 0:
        t[q - 1][q - 1] = (1, name)
    elif abs(i) == q:
        t[0][0] = (1, name)
    else:
        r = q - abs(i) - 1
        if i > 0:
            t[r][r], t[r][r + 1], t[r + 1][r], t[r + 1][r + 1] = (1, name), (1, "I"), (1, "I"), None
        else:
            t[r][r], t[r][r + 1], t[r + 1][r], t[r + 1][r + 1] = None, (1, "I"), (1, "I"), (1, name)
    return t


def _tag_mul(a: Tag, b: Tag) -> Tag:
    if a is None or b is None:
        return None
    if a[1] == "I":
        return (a[0] * b[0], b[1])
    if b[1] == "I":
        return (a[0] * b[0], a[1])
    raise NotOperationFree(f"product of named blocks {a[1]} and {b[1]}")


def tag_product(a: List[List[Tag]], b: List[List[Tag]]) -> List[List[Tag]]:
    q = len(a)
    out: List[List[Tag]] = [[None] * q for _ in range(q)]
    for i in range(q):
        for j in range(q):
            acc = None
            for k in range(q):
                t = _tag_mul(a[i][k], b[k][j])
                if t is not None:
                    if acc is not None:
                        raise NotOperationFree(f"block ({i + 1},{j + 1}) is a sum")
                    acc = t
            out[i][j] = acc
    return out


def _tag_identity(q: int) -> List[List[Tag]]:
    return [[(1, "I") if a == b else None for b in range(q)] for a in range(q)]


def _tag_neg(t: List[List[Tag]]) -> List[List[Tag]]:
    return [[None if x is None else (-x[0], x[1]) for x in row] for row in t]


# ---------------------------------------------------------------------------
# specs


@dataclass
class FiedlerSpec:
    family: str
    q: int
    t: IndexTuple
    z: IndexTuple
    lt: IndexTuple = None
    lz: IndexTuple = None
    rt: IndexTuple = None
    rz: IndexTuple = None
    # matrix assignments for lt, lz, rz, rt; None means the trivial assignment
    x_assign: Optional[List[fmpq_mat]] = None
    z_assign: Optional[List[fmpq_mat]] = None
    w_assign: Optional[List[fmpq_mat]] = None
    y_assign: Optional[List[fmpq_mat]] = None

    def __post_init__(self):
        q = self.q
        conv = lambda v: v if isinstance(v, IndexTuple) else IndexTuple(list(v or []), q)
        self.t, self.z = conv(self.t), conv(self.z)
        self.lt, self.lz, self.rt, self.rz = conv(self.lt), conv(self.lz), conv(self.rt), conv(self.rz)

    @staticmethod
    def from_json(data, assignments: dict = None) -> "FiedlerSpec":
        from .polymat import const_from_json

        assignments = assignments or {}
        conv = lambda key: [const_from_json(m) for m in assignments[key]] if key in assignments else None
        family = data.get("family") or _guess_family(data)
        return FiedlerSpec(family, int(data["q"]), data.get("t", []), data.get("z", []),
                           data.get("lt", []), data.get("lz", []), data.get("rt", []), data.get("rz", []),
                           conv("X"), conv("Z"), conv("W"), conv("Y"))

    def to_json(self) -> dict:
        return {"family": self.family, "q": self.q, "t": list(self.t), "z": list(self.z),
                "lt": list(self.lt), "lz": list(self.lz), "rt": list(self.rt), "rz": list(self.rz)}

    @property
    def c0(self) -> int:
        return consecutions_inversions_at_zero(list(self.t) + list(self.rt), list(self.t).index(0))[0]

    @property
    def i0(self) -> int:
        full = list(self.lt) + list(self.t)
        return consecutions_inversions_at_zero(full, len(self.lt) + list(self.t).index(0))[1]

    def validate(self) -> None:
        q, fam = self.q, self.family
        t, z = sorted(self.t), sorted(self.z)
        sides = [self.lt, self.lz, self.rt, self.rz]
        if fam not in FAMILIES:
            raise PreconditionError(f"unknown family {fam!r}")
        if q < 2:
            raise PreconditionError("Fiedler-like pencils need q >= 2")
        if fam == "FP":
            if z != [-q] or t != list(range(q)) or any(len(s) for s in sides):
                raise PreconditionError("FP needs z = (-q), t a permutation of 0..q-1, no side tuples")
        elif fam == "properGFP":
            c0 = set(t)
            c1 = {-x for x in z}
            if any(len(s) for s in sides):
                raise PreconditionError("proper GFP takes no side tuples")
            if len(t) != len(c0) or len(z) != len(c1) or c0 & c1 or c0 | c1 != set(range(q + 1)):
                raise PreconditionError("t, -z must partition 0..q")
            if 0 not in c0 or q not in c1:
                raise PreconditionError("proper GFP needs 0 in C_0 and q in C_1")
        else:
            h = max(t) if t else -1
            if t != list(range(h + 1)) or z != list(range(-q, -h)):
                raise PreconditionError("GFPR needs t a permutation of 0..h and z of -q..-h-1")
            if any(not 0 <= x <= h - 1 for x in list(self.lt) + list(self.rt)):
                raise PreconditionError("lt, rt must use indices 0..h-1")
            if any(not -q <= x <= -h - 2 for x in list(self.lz) + list(self.rz)):
                raise PreconditionError("lz, rz must use indices -q..-h-2")
            if not IndexTuple(list(self.lt) + list(self.t) + list(self.rt), q).sip():
                raise PreconditionError("(lt, t, rt) does not satisfy the SIP")
            if not IndexTuple(list(self.lz) + list(self.z) + list(self.rz), q).sip():
                raise PreconditionError("(lz, z, rz) does not satisfy the SIP")
            if fam == "FPR" and any(a is not None for a in
                                    (self.x_assign, self.z_assign, self.w_assign, self.y_assign)):
                raise PreconditionError("FPR uses the trivial matrix assignments")
            for tup, assign, key in ((self.lt, self.x_assign, "X"), (self.lz, self.z_assign, "Z"),
                                     (self.rz, self.w_assign, "W"), (self.rt, self.y_assign, "Y")):
                if assign is not None and len(assign) != len(tup):
                    raise PreconditionError(f"assignment {key} has the wrong length")


def _guess_family(data) -> str:
    if any(data.get(k) for k in ("lt", "lz", "rt", "rz")):
        return "GFPR"
    z = data.get("z", [])
    q = int(data["q"])
    if list(z) == [-q] and sorted(data.get("t", [])) == list(range(q)):
        return "FP"
    return "properGFP"


def intrinsic_d0_position(spec: FiedlerSpec) -> Tuple[int, int]:
    """(q - i0, q - c0), 1-based block coordinates."""
    return spec.q - spec.i0, spec.q - spec.c0


# ---------------------------------------------------------------------------
# assembly


def _coeff_list(d: PolyMatrix, q: int) -> List[fmpq_mat]:
    return [d.coeff(k) for k in range(q + 1)]


def _factors(spec: FiedlerSpec, coeffs: List[fmpq_mat], p: int):
    """(numeric, symbolic) factor lists for the left, z, t and right products."""
    q = spec.q

    def coef(i):
        if i >= 0:
            return -coeffs[i], (-1, f"D{i}")
        return coeffs[-i], (1, f"D{-i}")

    def seq(tup, assign, label):
        out = []
        for k, i in enumerate(tup):
            if assign is None:
                num, tag = coef(i)
            else:
                num = assign[k]
            if label:
                # side tuples keep their own names, so only the intrinsic D_0 is tagged D0
                tag = (1, f"{label}{k + 1}")
            sym = elementary_tags(i, tag[1], q)
            if tag[0] < 0:
                sym = [[(-x[0], x[1]) if x is not None and x[1] == tag[1] else x for x in row]
                       for row in sym]
            out.append((elementary_matrix(i, num, q, p), sym))
        return out

    for (tup, assign) in ((spec.lt, spec.x_assign), (spec.lz, spec.z_assign),
                          (spec.rz, spec.w_assign), (spec.rt, spec.y_assign)):
        for k, i in enumerate(tup):
            if i == 0 or abs(i) == q:
                mat = coef(i)[0] if assign is None else assign[k]
                if mat.rank() < p:
                    raise PreconditionError(f"singular matrix assignment for index {i}")
    left = seq(spec.lt, spec.x_assign, "X") + seq(spec.lz, spec.z_assign, "Z")
    right = seq(spec.rz, spec.w_assign, "W") + seq(spec.rt, spec.y_assign, "Y")
    return left, seq(spec.z, None, ""), seq(spec.t, None, ""), right


def _prod(factors, size: int, q: int):
    num = eye(size)
    sym = _tag_identity(q)
    for m, s in factors:
        num = num * m
        sym = tag_product(sym, s)
    return num, sym


@dataclass
class FiedlerPencil:
    """L_D (numeric coefficients and block tags) of a Fiedler-like pencil."""

    l1: fmpq_mat
    l0: fmpq_mat
    tags1: List[List[Tag]]
    tags0: List[List[Tag]]
    q: int
    p: int


def fiedler_polynomial_pencil(d, spec: FiedlerSpec) -> FiedlerPencil:
    """lambda L_1 + L_0 = M_{lt,lz} (lambda M_z - M_t) M_{rz,rt}."""
    d = as_poly_matrix(d)
    spec.validate()
    q, p = spec.q, d.rows
    if d.rows != d.cols:
        raise PreconditionError("Fiedler-like pencils need a square matrix")
    if d.degree() == NEG_INF or int(d.degree()) != q:
        raise PreconditionError(f"polynomial part must have degree q = {q}")
    coeffs = _coeff_list(d, q)
    left, zf, tf, right = _factors(spec, coeffs, p)
    size = p * q
    ln, ls = _prod(left, size, q)
    rn, rs = _prod(right, size, q)
    zn, zs = _prod(zf, size, q)
    tn, ts = _prod(tf, size, q)
    l1 = ln * zn * rn
    l0 = -(ln * tn * rn)
    tags1 = tag_product(tag_product(ls, zs), rs)
    tags0 = _tag_neg(tag_product(tag_product(ls, ts), rs))
    return FiedlerPencil(l1, l0, tags1, tags0, q, p)


def symbolic_d0_positions(fp: FiedlerPencil) -> List[Tuple[int, int]]:
    return [(i + 1, j + 1) for i in range(fp.q) for j in range(fp.q) if fp.tags0[i][j] == (1, "D0")]


def operation_free(fp: FiedlerPencil) -> bool:
    """Every block tag is zero, +-I or +-(one named matrix); true by construction."""
    return all(x is None or isinstance(x, tuple) for row in fp.tags1 + fp.tags0 for x in row)


@dataclass
class FiedlerLinearization:
    g: RatMatrix
    spec: FiedlerSpec
    pencil: Pencil
    poly_pencil: FiedlerPencil
    realization: StateSpaceRealization
    e_mat: fmpq_mat
    d0_position: Tuple[int, int]
    eps_deg: Optional[int] = None
    eta_deg: Optional[int] = None
    permutation: Optional["KroneckerForm"] = None

    @property
    def n(self) -> int:
        return self.realization.n

    def recovery_matrix(self, side: str) -> fmpq_mat:
        """[0_{p x n}, e_j^T (x) I_p] with j the D_0 block column (right) or row (left)."""
        p, q, n = self.poly_pencil.p, self.spec.q, self.n
        blk = self.d0_position[1] if side == "right" else self.d0_position[0]
        r = fmpq_mat(p, n + p * q)
        for a in range(p):
            r[a, n + (blk - 1) * p + a] = 1
        return r

    def shift(self, side: str) -> int:
        if self.permutation is None:
            self.permutation = permute_to_extended_kronecker(self)
        return self.eps_deg if side == "right" else self.eta_deg

    def lift(self, basis_of_g: MinimalBasis, certify: bool = True) -> MinimalBasis:
        kf = self.permutation or permute_to_extended_kronecker(self)
        b = lift_basis_to_sbmb(kf.sbmb, basis_of_g, certify=certify)
        if basis_of_g.side == "right":
            h = PolyMatrix.from_const(kf.outer(2)) * b.basis
        else:
            h = PolyMatrix.from_const(kf.outer(1).transpose()) * b.basis
        return MinimalBasis(basis_of_g.side, h, sorted_col_degrees(h))

    def to_json(self) -> dict:
        out = self.pencil.to_json()
        out["meta"] = dict(out["meta"], kind="fiedler", spec=self.spec.to_json())
        return out


def build_fiedler_rational(g, spec: FiedlerSpec, realization: StateSpaceRealization = None,
                           e_mat: fmpq_mat = None) -> FiedlerLinearization:
    """[[A - lambda E, e_{q-c0}^T (x) B], [e_{q-i0} (x) C, L_D]]."""
    g = as_rat_matrix(g)
    d, sp = g.decompose()
    fp = fiedler_polynomial_pencil(d, spec)
    q, p = fp.q, fp.p
    pos = intrinsic_d0_position(spec)
    sym = symbolic_d0_positions(fp)
    if spec.family in ("FP", "properGFP") and sym != [pos]:
        raise CertificationError(f"D_0 found at {sym}, expected {pos}")
    if spec.family in ("FPR", "GFPR") and pos not in sym:
        raise CertificationError(f"D_0 not at the intrinsic position {pos}")
    if realization is None:
        real = minimal_realization(sp)
        e_mat = eye(real.n) if e_mat is None else e_mat
        if e_mat.nrows() != real.n or (real.n and e_mat.rank() < real.n):
            raise PreconditionError("E must be nonsingular n x n")
        # C (lambda E - A')^{-1} B' = C (lambda I - A)^{-1} B with A' = E A, B' = E B
        real = StateSpaceRealization(e_mat * real.a_mat, e_mat * real.b_mat, real.c_mat, e_mat)
    else:
        real = realization
        e_mat = real.e_mat if real.e_mat is not None else eye(real.n)
        if not (real.transfer(p, p) == sp):
            raise PreconditionError("realization does not reproduce the strictly proper part")
    n = real.n
    size = n + p * q
    l1, l0 = fmpq_mat(size, size), fmpq_mat(size, size)
    for i in range(n):
        for j in range(n):
            l1[i, j] = -e_mat[i, j]
            l0[i, j] = real.a_mat[i, j]
    bi, bj = pos[0] - 1, pos[1] - 1
    for i in range(n):
        for a in range(p):
            l0[i, n + bj * p + a] = real.b_mat[i, a]
    for a in range(p):
        for j in range(n):
            l0[n + bi * p + a, j] = real.c_mat[a, j]
    for i in range(p * q):
        for j in range(p * q):
            l1[n + i, n + j] = fp.l1[i, j]
            l0[n + i, n + j] = fp.l0[i, j]
    pencil = Pencil(l1, l0, n, {"kind": "fiedler", "family": spec.family})
    return FiedlerLinearization(g, spec, pencil, fp, real, e_mat, pos)


# ---------------------------------------------------------------------------
# block permutations to extended block Kronecker form


@dataclass
class BlockPermutation:
    """Pi = Sigma (x) I_b with Sigma[i, sigma(i)] = 1 (1-based sigma)."""

    sigma: List[int]
    block_size: int

    def __post_init__(self):
        if sorted(self.sigma) != list(range(1, len(self.sigma) + 1)):
            raise ValueError("sigma is not a permutation of 1..q")

    def matrix(self) -> fmpq_mat:
        q, b = len(self.sigma), self.block_size
        out = fmpq_mat(q * b, q * b)
        for i, s in enumerate(self.sigma):
            for t in range(b):
                out[i * b + t, (s - 1) * b + t] = 1
        return out


@dataclass
class KroneckerForm:
    pi1: BlockPermutation
    pi2: BlockPermutation
    eps_deg: int
    eta_deg: int
    sbmb: SbmbLinearization
    certificate: dict
    n: int

    def outer(self, which: int) -> fmpq_mat:
        """diag(I_n, Pi_1) or diag(I_n, Pi_2)."""
        pi = (self.pi1 if which == 1 else self.pi2).matrix()
        size = self.n + pi.nrows()
        out = fmpq_mat(size, size)
        for i in range(self.n):
            out[i, i] = 1
        for i in range(pi.nrows()):
            for j in range(pi.ncols()):
                out[self.n + i, self.n + j] = pi[i, j]
        return out


def _has_coeff(tags) -> bool:
    return any(t is not None and t[1].startswith("D") for t in tags)


def _neg(t: Tag) -> Tag:
    return None if t is None else (-t[0], t[1])


def _chain(t1, t0, lines: List[int], body: List[int], k_deg: int):
    """Order ``body`` as c_1..c_{k+1} with t1(., c_{j+1}) = -t0(., c_j) on ``lines``.

    t1(x, c), t0(x, c) read the tag of line x in body position c. The first element has
    no lambda part on the K lines and the last no constant part.
    """
    if not lines:
        return list(body) if len(body) == 1 else None
    col1 = lambda c: [t1(x, c) for x in lines]
    col0 = lambda c: [_neg(t0(x, c)) for x in lines]
    starts = [c for c in body if all(v is None for v in col1(c))]
    if len(starts) != 1:
        return None
    order = starts
    while len(order) < k_deg + 1:
        target = col0(order[-1])
        nxt = [c for c in body if c not in order and col1(c) == target]
        if len(nxt) != 1:
            return None
        order.append(nxt[0])
    if any(v is not None for v in col0(order[-1])):
        return None
    return order


def _candidates(fp: FiedlerPencil, pos: Tuple[int, int]):
    """Yield (new_rows, new_cols, eps, eta) consistent with the block tags.

    K rows/columns carry no coefficient of D; the body rows/columns are chained by the
    shift relation of L_k. The order of the K rows (columns) is absorbed by Y (Z).
    """
    q = fp.q
    free_rows = [i for i in range(q) if not _has_coeff(fp.tags1[i] + fp.tags0[i])]
    free_cols = [j for j in range(q)
                 if not _has_coeff([fp.tags1[i][j] for i in range(q)] + [fp.tags0[i][j] for i in range(q)])]
    for eps in range(q):
        eta = q - 1 - eps
        for k_rows in _subsets_of_size(free_rows, eps):
            for k_cols in _subsets_of_size(free_cols, eta):
                if any(fp.tags1[i][j] is not None or fp.tags0[i][j] is not None
                       for i in k_rows for j in k_cols):
                    continue
                body_rows = [i for i in range(q) if i not in k_rows]
                body_cols = [j for j in range(q) if j not in k_cols]
                corder = _chain(lambda x, c: fp.tags1[x][c], lambda x, c: fp.tags0[x][c],
                                list(k_rows), body_cols, eps)
                rorder = _chain(lambda x, r: fp.tags1[r][x], lambda x, r: fp.tags0[r][x],
                                list(k_cols), body_rows, eta)
                if corder is None or rorder is None:
                    continue
                if rorder[eta] != pos[0] - 1 or corder[eps] != pos[1] - 1:
                    continue
                yield rorder + list(k_rows), corder + list(k_cols), eps, eta


def _subsets_of_size(items: List[int], k: int):
    """Subsets in lexicographic order; the candidate pools are tiny (at most q)."""
    from itertools import combinations

    return combinations(items, k)


def permute_to_extended_kronecker(lin: FiedlerLinearization) -> KroneckerForm:
    """Block permutations Pi_1, Pi_2 with diag(I, Pi_1) L_G diag(I, Pi_2) extended block Kronecker."""
    last = None
    for found in _candidates(lin.poly_pencil, lin.d0_position):
        try:
            kf = _certify_permutation(lin, *found)
        except (CertificationError, PreconditionError) as exc:
            last = exc
            continue
        lin.eps_deg, lin.eta_deg, lin.permutation = kf.eps_deg, kf.eta_deg, kf
        return kf
    raise CertificationError("no block permutation to block Kronecker form matches the tag pattern"
                             + (f" ({last})" if last else ""))


def _certify_permutation(lin: FiedlerLinearization, new_rows, new_cols, eps, eta) -> KroneckerForm:
    q, p, n = lin.spec.q, lin.poly_pencil.p, lin.n
    pi1 = BlockPermutation([r + 1 for r in new_rows], p)
    # Pi_2 moves old column new_cols[k] to position k: Pi_2[old, new] = 1
    inv = [0] * q
    for k, old in enumerate(new_cols):
        inv[old] = k + 1
    pi2 = BlockPermutation(inv, p)
    kf = KroneckerForm(pi1, pi2, eps, eta, None, {}, n)
    o1, o2 = kf.outer(1), kf.outer(2)
    pl1 = o1 * lin.pencil.l1 * o2
    pl0 = o1 * lin.pencil.l0 * o2
    pm = PolyMatrix.pencil(pl1, pl0)
    d, _ = lin.g.decompose()
    body = pm.submatrix(range(n, n + (eta + 1) * p), range(n, n + (eps + 1) * p))
    asc = as_condition(body, d, eps, eta)
    cert = {"as_condition": bool(asc.get("ok")), "corner_law": bool(asc.get("corner")),
            "b_at_eps_plus_1": new_cols[eps] == lin.d0_position[1] - 1,
            "c_at_eta_plus_1": new_rows[eta] == lin.d0_position[0] - 1}
    # SBMB with T = -E, S = I and the realization (E^{-1}A, -E^{-1}B, -C)
    real = lin.realization
    if n:
        einv = lin.e_mat.inv()
        sreal = StateSpaceRealization(einv * real.a_mat, -(einv * real.b_mat), -real.c_mat)
        t_mat = -lin.e_mat
    else:
        sreal = StateSpaceRealization(fmpq_mat(0, 0), fmpq_mat(0, p), fmpq_mat(p, 0))
        t_mat = None
    sb = build_sbmb(lin.g, _pair_from(pm, n, eta, eps, p, "right"), _pair_from(pm, n, eta, eps, p, "left"),
                    body, t_mat, None, sreal)
    cert["equals_block_kronecker"] = sb.pencil.l1 == pl1 and sb.pencil.l0 == pl0
    kf.sbmb = sb
    kf.certificate = cert
    if not all(cert.values()):
        bad = next(k for k, v in cert.items() if not v)
        raise CertificationError(f"permuted pencil fails {bad}")
    return kf


def _pair_from(pm: PolyMatrix, n: int, eta: int, eps: int, p: int, side: str):
    """Dual pair for Y (L_eps (x) I) (right) or Z (L_eta (x) I) (left) read off the permuted pencil."""
    if side == "right":
        k = pm.submatrix(range(n + (eta + 1) * p, pm.rows), range(n, n + (eps + 1) * p))
        deg = eps
    else:
        k = pm.submatrix(range(n, n + (eta + 1) * p), range(n + (eps + 1) * p, pm.cols)).T()
        deg = eta
    std = block_kronecker_pair(deg, p)
    if k == std.k:
        return std
    return complete_pair(k, std.n_dual, std.k_hat)


def fiedler_recover_basis(lin: FiedlerLinearization, basis_of_l: MinimalBasis,
                          certify: bool = True) -> MinimalBasis:
    """Rows of the D_0 block column (right) or row (left) of a minimal basis of L_G."""
    if lin.permutation is None:
        permute_to_extended_kronecker(lin)
    return recover_basis(lin, basis_of_l, certify)


def recover_via_permutation(lin: FiedlerLinearization, basis_of_l: MinimalBasis,
                            certify: bool = True) -> MinimalBasis:
    """Second path: undo the permutation, then apply the block Kronecker recovery."""
    kf = lin.permutation or permute_to_extended_kronecker(lin)
    if basis_of_l.side == "right":
        h = PolyMatrix.from_const(kf.outer(2).transpose()) * basis_of_l.basis
    else:
        h = PolyMatrix.from_const(kf.outer(1)) * basis_of_l.basis
    return recover_basis(kf.sbmb, MinimalBasis(basis_of_l.side, h, sorted_col_degrees(h)), certify)


def fiedler_tuples(q: int) -> List[FiedlerSpec]:
    """All FPs of degree q (t ranges over permutations of 0..q-1)."""
    from itertools import permutations

    return [FiedlerSpec("FP", q, list(t), [-q]) for t in permutations(range(q))]
