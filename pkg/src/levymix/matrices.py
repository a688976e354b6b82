"""Eigenstructure, real Jordan canonical forms, and compactness of matrix groups.

The central question answered here is whether the cyclic group generated
by a real square matrix has compact closure, i.e. whether the matrix is
similar to an orthogonal matrix.  The classification goes through a
numerically computed real Jordan decomposition; the compact case is then
made effective by averaging Gram matrices over the group (Weyl's trick)
and conjugating by the inverse square root of the average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import DEFAULT_TOLS
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    GroupTooLarge,
    IllConditioned,
    InvalidGenerator,
    NonFiniteInput,
    NotCompact,
    NotSPD,
    SingularMatrix,
)

__all__ = [
    "EigenCluster",
    "BlockKind",
    "RealJordanBlock",
    "RealJordanDecomposition",
    "NoncompactCertificate",
    "as_matrix",
    "matrix_to_json",
    "matrix_from_json",
    "eigen_spectrum",
    "complex_jordan_form",
    "real_jordan_form",
    "jordan_block_power_apply",
    "classify_noncompact_blocks",
    "cyclic_closure_compact",
    "find_noncompact_witness",
    "haar_average_form",
    "spd_sqrt_inverse",
    "weyl_conjugator",
]


# ---------------------------------------------------------------------------
# matrix plumbing


def as_matrix(A) -> np.ndarray:
    """Validate and return A as a dense float square matrix."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteInput("matrix entries must be finite")
    return A


def matrix_to_json(A) -> dict:
    A = as_matrix(A)
    return {"d": int(A.shape[0]), "rows": [[float(v) for v in row] for row in A]}


def matrix_from_json(obj) -> np.ndarray:
    A = as_matrix(obj["rows"])
    if A.shape[0] != int(obj["d"]):
        raise DimensionMismatch("declared order does not match row count")
    return A


def _opnorm(A):
    return float(np.linalg.norm(A, 2))


def in_measure_preserving_group(A, det_tol=DEFAULT_TOLS.det_tol) -> bool:
    """|det A| = 1 within det_tol."""
    return abs(abs(float(np.linalg.det(as_matrix(A)))) - 1.0) <= det_tol


# ---------------------------------------------------------------------------
# eigen clustering


@dataclass(frozen=True)
class EigenCluster:
    """One clustered eigenvalue with its multiplicities."""

    value: complex
    algebraic_mult: int
    geometric_mult: int


def _connected_clusters(w, delta):
    """Single-linkage grouping of eigenvalues at radius delta."""
    n = len(w)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(w[i] - w[j]) <= delta:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _numerical_rank(M, threshold):
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > threshold))


def eigen_spectrum(A, cluster_tol=DEFAULT_TOLS.cluster_tol):
    """Clustered eigenvalues of A with algebraic and geometric multiplicities.

    Raw eigenvalues within cluster_tol of each other (single linkage) are
    merged; the geometric multiplicity is d - rank(value*I - A) with the
    singular-value threshold cluster_tol * ||A||.
    """
    A = as_matrix(A)
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    d = A.shape[0]
    try:
        w = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigenvalue iteration failed: {exc}") from exc
    norm = max(_opnorm(A), np.finfo(float).tiny)
    clusters = []
    for idx in _connected_clusters(w, cluster_tol):
        val = complex(np.mean(w[idx]))
        if abs(val.imag) <= cluster_tol:
            val = complex(val.real, 0.0)
        alg = len(idx)
        geo = d - _numerical_rank(val * np.eye(d) - A, cluster_tol * norm)
        geo = max(1, min(geo, alg))
        clusters.append(EigenCluster(val, alg, geo))
    clusters.sort(key=lambda c: (-abs(c.value), -c.algebraic_mult,
                                 -c.value.real, -c.value.imag))
    return clusters


# ---------------------------------------------------------------------------
# Jordan chains

class _StructureError(Exception):
    """Internal: candidate eigenvalue clustering is inconsistent."""


def _nullspace(M, abs_tol):
    """Orthonormal basis of the numerical nullspace of M."""
    _, s, Vh = np.linalg.svd(M)
    null_mask = np.concatenate([s <= abs_tol, np.ones(M.shape[1] - len(s), bool)])
    return Vh[null_mask].conj().T


def _jordan_chains(A, lam, alg):
    """Jordan chains of A at eigenvalue lam with algebraic multiplicity alg.

    Returns a list of chains, each chain a list [u_1, ..., u_k] with
    M u_j = u_{j-1}, M u_1 = 0 for M = A - lam*I.  Real lam on a real A
    produces real chains.
    """
    d = A.shape[0]
    if np.isrealobj(A) and lam.imag == 0.0:
        M = A - lam.real * np.eye(d)
    else:
        M = A.astype(complex) - lam * np.eye(d)
    normM = max(_opnorm(M), 1.0)
    eps = np.finfo(float).eps

    # Nullspace filtration of M^k until the nullity reaches alg.  No fixed
    # singular-value threshold separates signal from noise across all
    # powers, so the nullity is picked by the largest singular-value gap
    # inside the window allowed by the Weyr characteristic (increments are
    # non-increasing), which is often a single forced value.
    bases = [np.zeros((d, 0), dtype=M.dtype)]
    Mk = np.eye(d, dtype=M.dtype)
    nullities = [0]
    for k in range(1, d + 1):
        Mk = Mk @ M
        _, s, Vh = np.linalg.svd(Mk)
        s = np.maximum(s, d * eps * normM**k)
        lo = nullities[-1] + 1
        hi = alg if k == 1 else min(alg, 2 * nullities[-1] - nullities[-2])
        if lo > hi:
            raise _StructureError(
                "nullspace filtration inconsistent with multiplicity")
        best_ratio, n = -1.0, lo
        for cand in range(lo, hi + 1):
            above = normM**k if cand == d else s[d - cand - 1]
            ratio = above / s[d - cand]
            if ratio > best_ratio:
                best_ratio, n = ratio, cand
        if best_ratio < 10.0:
            raise _StructureError(
                f"no singular value gap at power {k}")
        bases.append(Vh[d - n:].conj().T)
        nullities.append(n)
        if n >= alg:
            break
    m = len(nullities) - 1
    if nullities[m] != alg:
        raise _StructureError("nullspace filtration inconsistent with multiplicity")

    # c[k] = number of blocks of size >= k, e[k] = of size exactly k
    c = [0] * (m + 2)
    for k in range(1, m + 1):
        c[k] = nullities[k] - nullities[k - 1]
    if any(c[k + 1] > c[k] for k in range(1, m + 1)):
        raise _StructureError("Weyr characteristic not monotone")
    e = {k: c[k] - c[k + 1] for k in range(1, m + 1)}
    if sum(k * e[k] for k in e) != alg:
        raise _StructureError("block sizes do not account for multiplicity")

    chains = []
    for k in range(m, 0, -1):
        need = e[k]
        if need == 0:
            continue
        # avoid null(M^{k-1}) plus the level-k vectors of taller chains
        avoid_cols = [bases[k - 1]]
        for chain in chains:
            if len(chain) > k:
                avoid_cols.append(chain[k - 1][:, None])
        avoid = np.hstack(avoid_cols)
        if avoid.shape[1] > 0:
            Q, _ = np.linalg.qr(avoid)
            proj = bases[k] - Q @ (Q.conj().T @ bases[k])
        else:
            proj = bases[k]
        U, s, _ = np.linalg.svd(proj, full_matrices=False)
        if len(s) < need or s[need - 1] < 0.05:
            raise _StructureError("cannot separate new chain tops")
        for t in range(need):
            v = U[:, t]
            chain = [v]
            for _ in range(k - 1):
                chain.insert(0, M @ chain[0])
            scale = max(np.linalg.norm(u) for u in chain)
            chains.append([u / scale for u in chain])
    chains.sort(key=len, reverse=True)
    return chains


def _delta_ladder(cluster_tol):
    # coarse to fine: over-merged clusters fail the chain structure checks,
    # while a split defective cluster can pass the residual check with an
    # ill-conditioned conjugator, so the coarsest consistent radius wins
    deltas = []
    delta = cluster_tol
    while delta <= 0.2:
        deltas.append(delta)
        delta *= 10.0
    yield from reversed(deltas)


def _cluster_guard_ok(clusters, delta):
    vals = [c.value for c in clusters]
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if abs(vals[i] - vals[j]) < 10.0 * delta:
                return False
    return True


def complex_jordan_form(A, tol=DEFAULT_TOLS.reconstruction_tol,
                        cluster_tol=DEFAULT_TOLS.cluster_tol):
    """Complex Jordan form of A.

    Returns (S, blocks) with S invertible complex, blocks a list of
    (size, eigenvalue) pairs, and ||A - S J S^-1|| <= tol * ||A||.

    Defective eigenvalues scatter numerically like eps**(1/r), so the
    clustering radius is escalated through a geometric ladder until the
    reconstruction validates; if no radius works the input is rejected
    as IllConditioned.
    """
    A = as_matrix(A)
    normA = max(_opnorm(A), np.finfo(float).tiny)
    last_err = "no clustering radius produced a consistent structure"
    for delta in _delta_ladder(cluster_tol):
        clusters = eigen_spectrum(A, delta)
        if not _cluster_guard_ok(clusters, delta):
            continue
        try:
            cols, blocks = [], []
            for cl in clusters:
                for chain in _jordan_chains(A, cl.value, cl.algebraic_mult):
                    cols.extend(chain)
                    blocks.append((len(chain), cl.value))
        except _StructureError as exc:
            last_err = str(exc)
            continue
        S = np.column_stack(cols).astype(complex)
        J = _assemble_complex_jordan(blocks)
        try:
            Sinv = np.linalg.inv(S)
        except np.linalg.LinAlgError:
            continue
        resid = _opnorm(A - (S @ J @ Sinv).real) / normA
        if resid <= tol:
            return S, blocks
        last_err = f"residual {resid:.3e} above tolerance at radius {delta:.1e}"
    raise IllConditioned(last_err)


def _assemble_complex_jordan(blocks):
    d = sum(size for size, _ in blocks)
    J = np.zeros((d, d), dtype=complex)
    off = 0
    for size, lam in blocks:
        J[off:off + size, off:off + size] = (
            lam * np.eye(size) + np.eye(size, k=1))
        off += size
    return J


# ---------------------------------------------------------------------------
# real Jordan form


class BlockKind(Enum):
    REAL = "real"
    COMPLEX_PAIR = "complex_pair"


@dataclass(frozen=True)
class RealJordanBlock:
    """One block of a real Jordan form.

    REAL blocks of size a occupy a rows (eta on the diagonal, 1 on the
    super-diagonal); COMPLEX_PAIR blocks of size b occupy 2b rows (2x2
    rotation-scale cells [[c, d], [-d, c]] with identity super-diagonal
    cells), with the representative eigenvalue chosen with positive
    imaginary part.
    """

    kind: BlockKind
    size: int
    eigen: complex

    @property
    def rows(self) -> int:
        return self.size if self.kind is BlockKind.REAL else 2 * self.size

    def materialize(self) -> np.ndarray:
        if self.kind is BlockKind.REAL:
            eta = self.eigen.real
            return eta * np.eye(self.size) + np.eye(self.size, k=1)
        c, s = self.eigen.real, self.eigen.imag
        b = self.size
        K = np.zeros((2 * b, 2 * b))
        cell = np.array([[c, s], [-s, c]])
        for j in range(b):
            K[2 * j:2 * j + 2, 2 * j:2 * j + 2] = cell
            if j + 1 < b:
                K[2 * j:2 * j + 2, 2 * j + 2:2 * j + 4] = np.eye(2)
        return K


@dataclass(frozen=True)
class RealJordanDecomposition:
    """Conjugator T, canonical block list, and relative residual."""

    conjugator: np.ndarray
    blocks: tuple
    residual: float

    @property
    def order(self) -> int:
        return self.conjugator.shape[0]

    def jordan_matrix(self) -> np.ndarray:
        d = self.order
        K = np.zeros((d, d))
        off = 0
        for b in self.blocks:
            K[off:off + b.rows, off:off + b.rows] = b.materialize()
            off += b.rows
        return K

    def block_offsets(self):
        offs, off = [], 0
        for b in self.blocks:
            offs.append(off)
            off += b.rows
        return offs

    def to_json(self) -> dict:
        return {
            "conjugator": matrix_to_json(self.conjugator),
            "blocks": [
                {"kind": b.kind.value, "size": b.size,
                 "eigen": [b.eigen.real, b.eigen.imag]}
                for b in self.blocks
            ],
            "residual": self.residual,
        }


def _canonical_block_sort(items):
    """Sort (block, columns) pairs: real first by (|eta| desc, size desc)."""
    def key(item):
        b = item[0]
        is_pair = 1 if b.kind is BlockKind.COMPLEX_PAIR else 0
        return (is_pair, -abs(b.eigen), -b.size, -b.eigen.real, b.eigen.imag)
    return sorted(items, key=key)


def real_jordan_form(A, tol=DEFAULT_TOLS.reconstruction_tol,
                     cluster_tol=DEFAULT_TOLS.cluster_tol):
    """Real Jordan decomposition A = T K T^-1.

    Blocks are ordered canonically: real blocks first, sorted by
    (|eta| descending, size descending), then complex-pair blocks by
    (|kappa| descending, size descending).
    """
    A = as_matrix(A)
    d = A.shape[0]
    normA = max(_opnorm(A), np.finfo(float).tiny)
    last_err = "no clustering radius produced a consistent structure"
    for delta in _delta_ladder(cluster_tol):
        clusters = eigen_spectrum(A, delta)
        if not _cluster_guard_ok(clusters, delta):
            continue
        try:
            items = _real_blocks_at_radius(A, clusters, max(cluster_tol, delta))
        except _StructureError as exc:
            last_err = str(exc)
            continue
        if items is None:
            continue
        items = _canonical_block_sort(items)
        blocks = tuple(b for b, _ in items)
        if sum(b.rows for b in blocks) != d:
            last_err = "block rows do not sum to the order"
            continue
        T = np.hstack([cols for _, cols in items])
        dec = RealJordanDecomposition(T, blocks, 0.0)
        K = dec.jordan_matrix()
        try:
            Tinv = np.linalg.inv(T)
        except np.linalg.LinAlgError:
            continue
        resid = _opnorm(A - T @ K @ Tinv) / normA
        if resid <= tol:
            return RealJordanDecomposition(T, blocks, float(resid))
        last_err = f"residual {resid:.3e} above tolerance at radius {delta:.1e}"
    raise IllConditioned(last_err)


def _real_blocks_at_radius(A, clusters, rank_rtol):
    """Candidate (RealJordanBlock, real column block) pairs, or None."""
    items = []
    used = set()
    cl_by_id = list(enumerate(clusters))
    for i, cl in cl_by_id:
        if i in used:
            continue
        if cl.value.imag == 0.0:
            used.add(i)
            eta = cl.value.real
            for chain in _jordan_chains(A, complex(eta, 0.0),
                                        cl.algebraic_mult):
                cols = np.column_stack(chain).real
                items.append((RealJordanBlock(BlockKind.REAL, len(chain),
                                              complex(eta, 0.0)), cols))
        else:
            # find the conjugate partner cluster
            partner = None
            for j, other in cl_by_id:
                if j != i and j not in used and \
                        abs(other.value - cl.value.conjugate()) <= \
                        10 * rank_rtol + abs(cl.value.imag) * 1e-6:
                    partner = j
                    break
            if partner is None:
                raise _StructureError("complex eigenvalue without conjugate partner")
            used.add(i)
            used.add(partner)
            if clusters[partner].algebraic_mult != cl.algebraic_mult:
                raise _StructureError("conjugate clusters disagree in multiplicity")
            kappa = 0.5 * (cl.value + clusters[partner].value.conjugate())
            if kappa.imag < 0:
                kappa = kappa.conjugate()
            for chain in _jordan_chains(A, kappa, cl.algebraic_mult):
                cols = []
                for u in chain:
                    cols.append(u.real)
                    cols.append(u.imag)
                items.append((RealJordanBlock(BlockKind.COMPLEX_PAIR,
                                              len(chain), kappa),
                              np.column_stack(cols)))
    return items


# ---------------------------------------------------------------------------
# block powers


def jordan_block_power_apply(block: RealJordanBlock, h: int, x) -> np.ndarray:
    """Apply the h-th power of a REAL Jordan block to x in closed form.

    Uses J_a(eta)^h = sum_j C(h, j) eta^(h-j) N^j, i.e.
    y_l = sum_{i>=l} x_i * C(h, i-l) * eta^(h-(i-l)).
    """
    if block.kind is not BlockKind.REAL:
        raise DimensionMismatch("closed-form power applies to REAL blocks only")
    if h < 0:
        raise ValueError("h must be a non-negative integer")
    x = np.asarray(x, dtype=float)
    a = block.size
    if x.shape != (a,):
        raise DimensionMismatch(f"expected a vector of length {a}")
    eta = block.eigen.real
    y = np.zeros(a)
    for ell in range(1, a + 1):
        acc = 0.0
        for i in range(ell, a + 1):
            j = i - ell
            if j > h:
                continue
            acc += x[i - 1] * math.comb(h, j) * eta ** (h - j)
        y[ell - 1] = acc
    return y


# ---------------------------------------------------------------------------
# compactness classification


@dataclass(frozen=True)
class NoncompactCertificate:
    """Tags of blocks witnessing non-compactness; empty tags mean compact.

    Case letters: A = real block, size >= 2, eigenvalue +-1;
    B = complex-pair block, size >= 2, |kappa| = 1;
    C = real block with |eta| < 1; D = complex-pair block with |kappa| < 1.
    """

    case_tags: tuple  # of (case letter, block index)
    compact: bool


def classify_noncompact_blocks(dec: RealJordanDecomposition,
                               unit_tol=DEFAULT_TOLS.unit_tol):
    tags = []
    for i, b in enumerate(dec.blocks):
        mod = abs(b.eigen)
        on_circle = abs(mod - 1.0) <= unit_tol
        if b.kind is BlockKind.REAL:
            if b.size >= 2 and on_circle:
                tags.append(("A", i))
            elif mod < 1.0 - unit_tol:
                tags.append(("C", i))
        else:
            if b.size >= 2 and on_circle:
                tags.append(("B", i))
            elif mod < 1.0 - unit_tol:
                tags.append(("D", i))
    compact = (not tags
               and all(b.size == 1 for b in dec.blocks)
               and all(abs(abs(b.eigen) - 1.0) <= unit_tol for b in dec.blocks))
    return NoncompactCertificate(tuple(tags), compact)


def cyclic_closure_compact(A, tol=DEFAULT_TOLS.reconstruction_tol,
                           cluster_tol=DEFAULT_TOLS.cluster_tol,
                           unit_tol=DEFAULT_TOLS.unit_tol) -> bool:
    """True iff {A^h : h in Z} is bounded (A similar to an orthogonal matrix)."""
    A = as_matrix(A)
    if abs(np.linalg.det(A)) < 1e-12:
        raise SingularMatrix("cyclic closure is defined for invertible matrices")
    dec = real_jordan_form(A, tol=tol, cluster_tol=cluster_tol)
    return classify_noncompact_blocks(dec, unit_tol=unit_tol).compact


def _dedup_key(M, quantum=1e-9):
    return np.round(M / quantum).astype(np.int64).tobytes()


def find_noncompact_witness(generators, max_word_len=6,
                            det_tol=DEFAULT_TOLS.det_tol):
    """Breadth-first search for a word with non-compact cyclic closure.

    Returns the first such word as a matrix, or None if no word up to
    max_word_len qualifies.  None is inconclusive: it does not certify
    that the generated group is compact.
    """
    gens = [as_matrix(g) for g in generators]
    for g in gens:
        if not in_measure_preserving_group(g, det_tol):
            raise InvalidGenerator("generator must have |det| = 1")
    d = gens[0].shape[0]
    letters = []
    for g in gens:
        letters.append(g)
        letters.append(np.linalg.inv(g))
    seen = {_dedup_key(np.eye(d))}
    frontier = [np.eye(d)]
    for _ in range(max_word_len):
        nxt = []
        for w in frontier:
            for g in letters:
                cand = g @ w
                key = _dedup_key(cand)
                if key in seen:
                    continue
                seen.add(key)
                try:
                    if not cyclic_closure_compact(cand):
                        return cand
                except IllConditioned:
                    pass  # borderline word; keep searching
                nxt.append(cand)
        frontier = nxt
    return None


# ---------------------------------------------------------------------------
# Weyl's trick


def _enumerate_finite_group(generators, cap=10_000):
    gens = [as_matrix(g) for g in generators]
    d = gens[0].shape[0]
    letters = []
    for g in gens:
        letters.append(g)
        letters.append(np.linalg.inv(g))
    elements = {_dedup_key(np.eye(d)): np.eye(d)}
    frontier = [np.eye(d)]
    while frontier:
        nxt = []
        for w in frontier:
            for g in letters:
                cand = g @ w
                key = _dedup_key(cand)
                if key not in elements:
                    if len(elements) >= cap:
                        raise GroupTooLarge(
                            f"group enumeration exceeded cap of {cap}")
                    elements[key] = cand
                    nxt.append(cand)
        frontier = nxt
    return list(elements.values())


def _cesaro_gram_average(A, max_terms, conv_tol, guard=1e8, chunk=1024):
    """Cesaro limit over m of the averaged Gram matrices (A^m)^T A^m.

    The running average converges only like 1/M, far too slow for the
    1e-8 orthogonality post-condition downstream, so the limit is
    evaluated exactly instead: it equals the spectral projection of the
    identity onto the fixed space of X -> A^T X A, an eigenproblem on
    kron(A^T, A^T).  A short plain running average (capped by max_terms)
    cross-checks the result at its own coarse 1/M accuracy.
    """
    A = as_matrix(A)
    d = A.shape[0]

    # divergence guard: a compact cyclic closure keeps powers bounded
    P = np.eye(d)
    for _ in range(200):
        P = P @ A
        if np.max(np.abs(P)) > guard:
            raise NotCompact("matrix powers diverge; no Haar average exists")

    K = np.kron(A.T, A.T)
    w, V = np.linalg.eig(K)
    sel = np.abs(w - 1.0) <= 1e-8
    if not np.any(sel):
        raise NotCompact("no invariant quadratic form; closure is not compact")
    coeffs = np.linalg.solve(V, np.eye(d).reshape(-1, order="F").astype(complex))
    coeffs[~sel] = 0.0
    S = (V @ coeffs).reshape(d, d, order="F").real
    S = 0.5 * (S + S.T)
    if np.min(np.linalg.eigvalsh(S)) <= 0:
        raise NotCompact("Haar average is degenerate; closure is not compact")
    resid = _opnorm(A.T @ S @ A - S) / _opnorm(S)
    if resid > max(conv_tol, 1e-10):
        raise ConvergenceFailure(
            f"invariant form residual {resid:.3e} exceeds tolerance")

    # coarse cross-check against the literal running average
    m_check = int(min(max_terms, 1 << 14))
    chunk = min(chunk, m_check)
    powers = np.empty((chunk, d, d))
    powers[0] = np.eye(d)
    for j in range(1, chunk):
        powers[j] = powers[j - 1] @ A
    step = powers[chunk - 1] @ A
    S0 = np.zeros((d, d))
    lead = np.eye(d)
    count = 0
    while count < m_check:
        C = np.einsum("ij,mjk->mik", lead, powers)
        S0 += np.einsum("mji,mjk->ik", C, C)
        lead = lead @ step
        count += chunk
    if _opnorm(S0 / count - S) > 0.5 * _opnorm(S):
        raise ConvergenceFailure(
            "running Gram average disagrees with the invariant form")
    return S


def haar_average_form(generators, mode="finite", M=1 << 20, conv_tol=1e-9,
                      group_cap=10_000):
    """Haar average S of g^T g over the generated compact group.

    mode="finite": enumerate the group closure (cap group_cap) and
    average exactly.  mode="cesaro": single generator with compact
    cyclic closure; average Gram matrices of powers until the running
    average stabilizes below conv_tol (M caps the term count).
    """
    if mode == "finite":
        elements = _enumerate_finite_group(generators, cap=group_cap)
        S = np.zeros_like(elements[0])
        for g in elements:
            S += g.T @ g
        S /= len(elements)
        return 0.5 * (S + S.T)
    if mode == "cesaro":
        if len(generators) != 1:
            raise InvalidGenerator("cesaro mode takes exactly one generator")
        return _cesaro_gram_average(as_matrix(generators[0]), M, conv_tol)
    raise ValueError(f"unknown mode {mode!r}")


def spd_sqrt_inverse(S) -> np.ndarray:
    """Inverse of the symmetric positive definite square root of S."""
    S = as_matrix(S)
    scale = max(_opnorm(S), 1.0)
    if np.max(np.abs(S - S.T)) > 1e-12 * scale:
        raise NotSPD("matrix is not symmetric")
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    if np.min(w) <= 0:
        raise NotSPD("matrix has non-positive eigenvalues")
    return (V * (1.0 / np.sqrt(w))) @ V.T


def weyl_conjugator(generators, mode="finite", M=1 << 20, tol=1e-8,
                    conv_tol=1e-9, group_cap=10_000) -> np.ndarray:
    """Matrix h with h^-1 g h orthogonal for every generator g.

    h is the inverse SPD square root of the Haar average of g^T g; the
    orthogonality defect of every conjugated generator is checked
    against tol.
    """
    S = haar_average_form(generators, mode=mode, M=M, conv_tol=conv_tol,
                          group_cap=group_cap)
    h = spd_sqrt_inverse(S)
    hinv = np.linalg.inv(h)
    for g in generators:
        Q = hinv @ as_matrix(g) @ h
        defect = _opnorm(Q.T @ Q - np.eye(Q.shape[0]))
        if defect > tol:
            raise ConvergenceFailure(
                f"conjugated generator has orthogonality defect {defect:.3e}")
    return h
