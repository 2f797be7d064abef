"""Sum-rate maximization over coefficients, permutations and powers.

The outer search discretizes the per-source powers on a geometric grid,
selects integer combination coefficients through lattice reduction in the
effective-noise metric, enumerates feasible permutation assignments, and
solves the inner rate maximization in closed form.  Five scheme variants
restrict the search space:

- scf:    common power, symmetric modulo, trivial quantization
- scf-q:  scf plus a searched quantization permutation
- acf:    per-source powers, symmetric modulo, trivial quantization
- acf-m:  acf plus a searched modulo permutation
- acf-mq: acf plus searched quantization and modulo permutations

L = 2 evaluations are vectorized across the whole power grid; other sizes
fall back to a scalar path with cached permutation feasibility.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NoIndependentRowError, NotFullRankError
from .galois import (
    FieldMatrix,
    mat_rank,
    perm_inverse,
    residual_submatrix,
    srm_index_sets,
    srq_index_sets,
)
from .lattice import make_chain_spec
from .pipeline import ChannelInstance, SchemeAssignment
from .rates import (
    RateReport,
    computation_rate,
    max_rates_given_structure,
    second_hop_region,
)

SCHEMES = ("scf", "scf-q", "acf", "acf-m", "acf-mq")

_SCHEME_VARIANT = {
    "scf": "symmetric",
    "scf-q": "srq",
    "acf": "symmetric",
    "acf-m": "srm",
    "acf-mq": "srmq",
}

_COMMON_POWER = {"scf": True, "scf-q": True, "acf": False, "acf-m": False, "acf-mq": False}


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs of the outer search."""

    nBrute: int = 100
    lllDelta: float = 0.75
    maxCoefficient: int = 10
    schemeVariant: str = "acf-mq"
    gammaOpt: int = 257
    maxGridRows: int = 200_000

    def __post_init__(self):
        if self.nBrute < 1:
            raise ConfigError("nBrute must be >= 1")
        if not 0.25 < self.lllDelta < 1.0:
            raise ConfigError("lllDelta must lie in (0.25, 1)")
        if self.schemeVariant not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.schemeVariant!r}")


@dataclass(frozen=True)
class GramContext:
    """Effective-noise metric of one relay and its Cholesky factor."""

    D_m: np.ndarray
    L_m: np.ndarray


def gram_matrix(h_m, p) -> np.ndarray:
    """Metric whose quadratic form in the coefficient row is the
    effective-noise power at the optimal scaling coefficient."""
    h = np.asarray(h_m, dtype=float)
    p = np.asarray(p, dtype=float)
    ph = p * h
    return np.diag(p) - np.outer(ph, ph) / (1.0 + h @ ph)


def gram_context(h_m, p) -> GramContext:
    D = gram_matrix(h_m, p)
    return GramContext(D_m=D, L_m=np.linalg.cholesky(D))


def _gso(B: np.ndarray):
    """Gram-Schmidt data: squared norms of the orthogonalized rows and the
    lower-triangular projection coefficients."""
    n = B.shape[0]
    mu = np.eye(n)
    star = np.zeros_like(B, dtype=float)
    norms2 = np.zeros(n)
    for i in range(n):
        star[i] = B[i]
        for j in range(i):
            mu[i, j] = (B[i] @ star[j]) / norms2[j]
            star[i] = star[i] - mu[i, j] * star[j]
        norms2[i] = star[i] @ star[i]
    return norms2, mu


def is_size_reduced(B, tol: float = 1e-9) -> bool:
    _, mu = _gso(np.asarray(B, dtype=float))
    off = np.tril(mu, -1)
    return bool(np.all(np.abs(off) <= 0.5 + tol))


def satisfies_lovasz(B, delta: float, tol: float = 1e-9) -> bool:
    B = np.asarray(B, dtype=float)
    norms2, mu = _gso(B)
    scale = max(1.0, float(np.max(norms2)))
    for k in range(1, B.shape[0]):
        if norms2[k] < (delta - mu[k, k - 1] ** 2) * norms2[k - 1] - tol * scale:
            return False
    return True


def is_unimodular(T) -> bool:
    T = np.asarray(T)
    if not np.issubdtype(T.dtype, np.integer):
        return False
    return abs(round(float(np.linalg.det(T.astype(float))))) == 1


def lll_reduce(basis, delta: float = 0.75):
    """Lovasz-reduce the rows of ``basis``.

    Returns (reduced, transform) with reduced = transform @ basis and an
    integer transform of determinant +-1."""
    B = np.array(basis, dtype=float)
    n = B.shape[0]
    if B.ndim != 2 or B.shape[1] < n or np.linalg.matrix_rank(B) < n:
        raise NotFullRankError("basis rows are linearly dependent")
    T = np.eye(n, dtype=np.int64)
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            raise RuntimeError("reduction failed to converge")
        norms2, mu = _gso(B)
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q != 0:
                B[k] -= q * B[j]
                T[k] -= q * T[j]
                norms2, mu = _gso(B)
        if norms2[k] >= (delta - mu[k, k - 1] ** 2) * norms2[k - 1]:
            k += 1
        else:
            B[[k - 1, k]] = B[[k, k - 1]]
            T[[k - 1, k]] = T[[k, k - 1]]
            k = max(k - 1, 1)
    return B, T


def _lagrange2(g11, g12, g22):
    """Batched two-dimensional reduction on Gram data.

    Returns the two reduced integer coordinate rows, shorter first."""
    N = g11.shape[0]
    u = np.tile(np.array([1, 0], dtype=np.int64), (N, 1))
    v = np.tile(np.array([0, 1], dtype=np.int64), (N, 1))
    a = g11.astype(float).copy()
    b = g12.astype(float).copy()
    c = g22.astype(float).copy()
    for _ in range(64):
        swap = c < a
        if np.any(swap):
            u[swap], v[swap] = v[swap].copy(), u[swap].copy()
            a[swap], c[swap] = c[swap].copy(), a[swap].copy()
        r = np.rint(b / np.where(a > 0, a, 1.0))
        step = r != 0
        if not np.any(step):
            break
        rs = r[step]
        v[step] -= rs[:, None].astype(np.int64) * u[step]
        c[step] += rs * rs * a[step] - 2.0 * rs * b[step]
        b[step] -= rs * a[step]
    return u, v


def _candidates2(D: np.ndarray):
    """Sorted candidate coefficient rows for one relay at L = 2.

    Candidates are the two reduced basis rows plus the unit vectors,
    sign-normalized, ordered by metric then lexicographically."""
    N = D.shape[0]
    u, v = _lagrange2(D[:, 0, 0], D[:, 0, 1], D[:, 1, 1])
    e1 = np.tile(np.array([1, 0], dtype=np.int64), (N, 1))
    e2 = np.tile(np.array([0, 1], dtype=np.int64), (N, 1))
    cand = np.stack([u, v, e1, e2], axis=1)
    lead = np.where(cand[..., 0] != 0, cand[..., 0], cand[..., 1])
    cand = cand * np.where(lead < 0, -1, 1)[..., None]
    met = np.einsum("nci,nij,ncj->nc", cand, D, cand)
    order = np.lexsort((cand[..., 1], cand[..., 0], met), axis=-1)
    return np.take_along_axis(cand, order[..., None], axis=1)


def _select_A2(D: np.ndarray, gamma: int):
    """Batched coefficient selection at L = 2.

    ``D`` has shape (N, 2, 2, 2), indexed by row then relay.  Returns the
    integer matrices (N, 2, 2) and a mask of rows where a full-rank choice
    modulo gamma exists."""
    c1 = _candidates2(D[:, 0])
    c2 = _candidates2(D[:, 1])
    ok1 = np.any(c1 % gamma != 0, axis=-1)
    idx1 = np.argmax(ok1, axis=1)
    a1 = np.take_along_axis(c1, idx1[:, None, None], axis=1)[:, 0, :]
    valid = ok1.any(axis=1)
    dets = a1[:, None, 0] * c2[..., 1] - a1[:, None, 1] * c2[..., 0]
    ok2 = dets % gamma != 0
    idx2 = np.argmax(ok2, axis=1)
    a2 = np.take_along_axis(c2, idx2[:, None, None], axis=1)[:, 0, :]
    valid &= ok2.any(axis=1)
    return np.stack([a1, a2], axis=1), valid


def select_coefficients(H, p, gamma: int, config: OptimizerConfig) -> np.ndarray:
    """Integer combination coefficients, one row per relay.

    Each relay's candidates come from reducing the identity basis in its
    effective-noise metric; rows are picked greedily by metric under the
    constraint that the stack stays full rank over F_gamma."""
    H = np.asarray(H, dtype=float)
    p = np.asarray(p, dtype=float)
    L = p.shape[0]
    if L == 1:
        return np.array([[1]], dtype=np.int64)
    if L == 2:
        D = np.stack([gram_matrix(H[m], p) for m in range(2)])[None]
        A, valid = _select_A2(D, gamma)
        if not valid[0]:
            raise NoIndependentRowError("no full-rank candidate pair modulo gamma")
        return A[0]
    chosen = []
    for m in range(L):
        ctx = gram_context(H[m], p)
        _, T = lll_reduce(ctx.L_m, config.lllDelta)
        cand = np.concatenate([T, np.eye(L, dtype=np.int64)], axis=0)
        lead_idx = np.argmax(cand != 0, axis=1)
        lead = cand[np.arange(cand.shape[0]), lead_idx]
        cand = cand * np.where(lead < 0, -1, 1)[:, None]
        met = np.einsum("ci,ij,cj->c", cand, ctx.D_m, cand)
        order = np.lexsort(tuple(cand[:, i] for i in reversed(range(L))) + (met,))
        picked = None
        for idx in order:
            trial = chosen + [cand[idx]]
            if mat_rank(FieldMatrix(np.stack(trial), gamma)) == len(trial):
                picked = cand[idx]
                break
        if picked is None:
            raise NoIndependentRowError(f"no candidate row extends rank at relay {m + 1}")
        chosen.append(picked)
    return np.stack(chosen).astype(np.int64)


def pi_d_is_feasible(Q: FieldMatrix, pi_c, pi_d) -> bool:
    for j in range(1, Q.rows + 1):
        sets = srq_index_sets(pi_c, pi_d, j)
        if mat_rank(residual_submatrix(Q, sets.sourceSet, sets.relaySet)) < j:
            return False
    return True


def pi_e_is_feasible(Q: FieldMatrix, pi_s, pi_e) -> bool:
    L = Q.rows
    for i in range(1, L + 1):
        sets = srm_index_sets(pi_s, pi_e, i)
        if mat_rank(residual_submatrix(Q, sets.sourceSet, sets.relaySet)) < L - i + 1:
            return False
    return True


def enumerate_feasible_permutations(Q: FieldMatrix, pi_c, pi_s):
    """All (pi_d, pi_e) pairs whose residual matrices are all full rank.

    The two feasibility conditions are independent, so the result is the
    product of the two filtered sets."""
    perms = list(itertools.permutations(range(1, Q.rows + 1)))
    feas_d = [pd for pd in perms if pi_d_is_feasible(Q, pi_c, pd)]
    feas_e = [pe for pe in perms if pi_e_is_feasible(Q, pi_s, pe)]
    return itertools.product(feas_d, feas_e)


def _power_grid(P: float, n: int) -> np.ndarray:
    """Geometric grid of n candidate powers over (P/n, P]."""
    if n == 1:
        return np.array([float(P)])
    return P * float(n) ** (-(n - 1 - np.arange(n)) / n)


def _rank_perm(key) -> tuple:
    """Permutation assigning position 1 to the smallest key (stable)."""
    key = np.asarray(key)
    order = np.argsort(key, kind="stable")
    perm = np.empty(len(key), dtype=np.int64)
    perm[order] = np.arange(1, len(key) + 1)
    return tuple(int(x) for x in perm)


def _coding_key(p, r_comp):
    """Per-source coding-lattice volume surrogate; smaller means finer.

    Computed in the log domain and rounded so that different but equally
    valid floating-point evaluation orders cannot flip the ranking."""
    r = np.minimum(np.asarray(r_comp, dtype=float), 500.0)
    key = np.log2(np.asarray(p, dtype=float)) - 2.0 * r
    return np.round(key * 1e9) / 1e9


def _comp_rates_batched(p, tau, mask):
    """Computation rates for batched rows.

    p: (N, L) powers; tau: (N, L) per-relay noise powers; mask: (N, L, L)
    nonzero-coefficient indicator indexed (row, relay, source)."""
    worst = np.max(np.where(mask, tau[:, :, None], -np.inf), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = 0.5 * np.log2(p / np.maximum(worst, 1e-300))
    r = np.where(worst <= 0, np.inf, r)
    return np.maximum(r, 0.0)


def _pick_best(cand_vals, cand_r, cand_meta):
    """Largest value, ties broken by lexicographically largest rate tuple.

    cand_vals: (C, N); cand_r: (C, N, L).  Returns (value, row, meta) or
    None when nothing is feasible."""
    vals = np.stack(cand_vals)
    r_all = np.stack(cand_r)
    flat = vals.reshape(-1)
    finite = np.isfinite(flat)
    if not np.any(finite):
        return None
    best = np.max(flat[finite])
    ties = np.flatnonzero(flat == best)
    r_flat = r_all.reshape(-1, r_all.shape[-1])[ties]
    keys = tuple(-r_flat[:, i] for i in reversed(range(r_flat.shape[1])))
    pick = ties[np.lexsort(keys)[0]]
    ci, row = divmod(int(pick), vals.shape[1])
    return float(best), row, cand_meta[ci]


class _Fast2:
    """Vectorized L = 2 evaluation context for one channel draw and one
    power grid."""

    def __init__(self, H, caps, p_rows, gamma):
        self.H = np.asarray(H, dtype=float)
        self.caps = np.asarray(caps, dtype=float)
        self.p = np.asarray(p_rows, dtype=float)
        self.gamma = gamma
        N = self.p.shape[0]
        D = np.empty((N, 2, 2, 2))
        for m in range(2):
            h = self.H[m]
            ph = self.p * h[None, :]
            # same operation order as gram_matrix so both paths agree
            denom = 1.0 + h[0] * ph[:, 0] + h[1] * ph[:, 1]
            D[:, m, 0, 0] = self.p[:, 0] - ph[:, 0] * ph[:, 0] / denom
            D[:, m, 1, 1] = self.p[:, 1] - ph[:, 1] * ph[:, 1] / denom
            D[:, m, 0, 1] = D[:, m, 1, 0] = -(ph[:, 0] * ph[:, 1] / denom)
        self.D = D
        self.A, self.valid = _select_A2(D, gamma)
        self.mask = self.A != 0
        self.Amod = self.A % gamma
        Af = self.A.astype(float)
        self.tau = np.einsum("nmi,nmij,nmj->nm", Af, D, Af)
        self.r_comp = _comp_rates_batched(self.p, self.tau, self.mask)
        self.s_order = np.argsort(self.p, axis=1, kind="stable")
        self.c_order = np.argsort(_coding_key(self.p, self.r_comp), axis=1, kind="stable")

    def evaluate(self, variant):
        N = self.p.shape[0]
        caps = self.caps
        rows = np.arange(N)
        cand_vals, cand_r, cand_meta = [], [], []
        if variant == "symmetric":
            pe = np.max(self.p, axis=1)
            off = 0.5 * np.log2(pe[:, None] / self.p)
            link_caps = np.min(np.where(self.mask, caps[None, :, None], np.inf), axis=1)
            bounds = link_caps - off
            ok = self.valid & np.all(bounds >= 0, axis=1)
            r = np.maximum(np.minimum(self.r_comp, bounds), 0.0)
            cand_vals.append(np.where(ok, np.sum(r, axis=1), -np.inf))
            cand_r.append(r)
            cand_meta.append({"variant": variant})
            return _pick_best(cand_vals, cand_r, cand_meta)
        sigmas = [np.array([0, 1]), np.array([1, 0])]
        l1 = self.c_order[:, 0]
        ls2 = self.s_order[:, 1]
        if variant == "srq":
            for si, sigma in enumerate(sigmas):
                feas = self.valid & (self.Amod[rows, sigma[l1], l1] != 0)
                bounds = np.broadcast_to(caps[sigma][None, :], (N, 2))
                r = np.maximum(np.minimum(self.r_comp, bounds), 0.0)
                cand_vals.append(np.where(feas, np.sum(r, axis=1), -np.inf))
                cand_r.append(r)
                cand_meta.append({"variant": variant, "sigma": si})
        elif variant == "srm":
            for ei, pi_e in enumerate(sigmas):
                # pi_e[m] is the 0-based shaping position of relay m
                me2 = int(np.argmax(pi_e == 1))
                feas = self.valid & (self.Amod[rows, me2, ls2] != 0)
                pe_pow = np.take_along_axis(self.p, self.s_order, axis=1)[rows[:, None], pi_e[None, :]]
                off = 0.5 * np.log2(pe_pow[:, :, None] / self.p[:, None, :])
                bounds = np.min(np.where(self.mask, caps[None, :, None] - off, np.inf), axis=1)
                feas &= np.all(bounds >= 0, axis=1)
                r = np.maximum(np.minimum(self.r_comp, bounds), 0.0)
                cand_vals.append(np.where(feas, np.sum(r, axis=1), -np.inf))
                cand_r.append(r)
                cand_meta.append({"variant": variant, "pi_e": ei})
        elif variant == "srmq":
            for si, sigma in enumerate(sigmas):
                feas_d = self.valid & (self.Amod[rows, sigma[l1], l1] != 0)
                for ei, pi_e in enumerate(sigmas):
                    me2 = int(np.argmax(pi_e == 1))
                    feas = feas_d & (self.Amod[rows, me2, ls2] != 0)
                    pe_pow = np.take_along_axis(self.p, self.s_order, axis=1)[rows[:, None], pi_e[None, :]]
                    bounds = caps[sigma][None, :] - 0.5 * np.log2(pe_pow[:, sigma] / self.p)
                    feas &= np.all(bounds >= 0, axis=1)
                    r = np.maximum(np.minimum(self.r_comp, bounds), 0.0)
                    cand_vals.append(np.where(feas, np.sum(r, axis=1), -np.inf))
                    cand_r.append(r)
                    cand_meta.append({"variant": variant, "sigma": si, "pi_e": ei})
        else:
            raise ConfigError(f"unknown variant {variant!r}")
        return _pick_best(cand_vals, cand_r, cand_meta)

    def winner(self, row, meta):
        """Reconstruct the winning structural choice of one evaluation."""
        p = self.p[row]
        A = self.A[row]
        pi_s = _rank_perm(p)
        pi_c = _rank_perm(_coding_key(p, self.r_comp[row]))
        pi_d = (1, 2)
        pi_e = (1, 2)
        sigmas = [np.array([0, 1]), np.array([1, 0])]
        if "sigma" in meta:
            sigma = sigmas[meta["sigma"]]
            pi_d_arr = np.empty(2, dtype=np.int64)
            for l in range(2):
                pi_d_arr[sigma[l]] = pi_c[l]
            pi_d = tuple(int(x) for x in pi_d_arr)
        if "pi_e" in meta:
            pi_e = tuple(int(x) + 1 for x in sigmas[meta["pi_e"]])
        return p, A, pi_c, pi_s, pi_d, pi_e


class _ScalarRows:
    """Scalar per-row evaluation for general L, with cached permutation
    feasibility keyed by the coefficient matrix."""

    def __init__(self, H, caps, p_rows, gamma, config):
        self.H = np.asarray(H, dtype=float)
        self.caps = np.asarray(caps, dtype=float)
        self.p_rows = np.asarray(p_rows, dtype=float)
        self.gamma = gamma
        self.config = config
        self.L = self.H.shape[0]
        self._pi_d_cache = {}
        self._pi_e_cache = {}
        self.rows = []
        for p in self.p_rows:
            try:
                A = select_coefficients(self.H, p, gamma, config)
            except NoIndependentRowError:
                self.rows.append(None)
                continue
            r_comp = computation_rate(self.H, A, p)
            self.rows.append(
                {
                    "p": p,
                    "A": A,
                    "r_comp": r_comp,
                    "pi_s": _rank_perm(p),
                    "pi_c": _rank_perm(_coding_key(p, r_comp)),
                }
            )

    def _feasible_pi_d_list(self, A, pi_c):
        key = (A.tobytes(), pi_c)
        if key not in self._pi_d_cache:
            Q = FieldMatrix(A, self.gamma)
            perms = itertools.permutations(range(1, self.L + 1))
            self._pi_d_cache[key] = [pd for pd in perms if pi_d_is_feasible(Q, pi_c, pd)]
        return self._pi_d_cache[key]

    def _feasible_pi_e_list(self, A, pi_s):
        key = (A.tobytes(), pi_s)
        if key not in self._pi_e_cache:
            Q = FieldMatrix(A, self.gamma)
            perms = itertools.permutations(range(1, self.L + 1))
            self._pi_e_cache[key] = [pe for pe in perms if pi_e_is_feasible(Q, pi_s, pe)]
        return self._pi_e_cache[key]

    def evaluate(self, variant):
        L = self.L
        caps = self.caps
        best = None

        def push(row_idx, row, bounds, meta):
            nonlocal best
            bounds = np.asarray(bounds, dtype=float)
            if np.any(bounds < 0):
                return
            r = np.maximum(np.minimum(row["r_comp"], bounds), 0.0)
            key = (float(np.sum(r)), tuple(r))
            if best is None or key > best[0]:
                best = (key, row_idx, meta)

        for idx, row in enumerate(self.rows):
            if row is None:
                continue
            p = row["p"]
            A = row["A"]
            mask = A != 0
            if variant == "symmetric":
                pe = np.max(p)
                off = 0.5 * np.log2(pe / p)
                link_caps = np.min(np.where(mask, caps[:, None], np.inf), axis=0)
                push(idx, row, link_caps - off, {"variant": variant, "pi_d": None, "pi_e": None})
            elif variant == "srq":
                for pd in self._feasible_pi_d_list(A, row["pi_c"]):
                    pd_inv = perm_inverse(pd)
                    sigma = [pd_inv[row["pi_c"][l] - 1] - 1 for l in range(L)]
                    push(idx, row, caps[sigma], {"variant": variant, "pi_d": pd, "pi_e": None})
            elif variant == "srm":
                pi_s_inv = perm_inverse(row["pi_s"])
                for pe_perm in self._feasible_pi_e_list(A, row["pi_s"]):
                    pe_pow = np.array([p[pi_s_inv[pe_perm[m] - 1] - 1] for m in range(L)])
                    off = 0.5 * np.log2(pe_pow[:, None] / p[None, :])
                    bounds = np.min(np.where(mask, caps[:, None] - off, np.inf), axis=0)
                    push(idx, row, bounds, {"variant": variant, "pi_d": None, "pi_e": pe_perm})
            elif variant == "srmq":
                pi_s_inv = perm_inverse(row["pi_s"])
                for pd in self._feasible_pi_d_list(A, row["pi_c"]):
                    pd_inv = perm_inverse(pd)
                    sigma = [pd_inv[row["pi_c"][l] - 1] - 1 for l in range(L)]
                    for pe_perm in self._feasible_pi_e_list(A, row["pi_s"]):
                        pe_pow = np.array([p[pi_s_inv[pe_perm[m] - 1] - 1] for m in range(L)])
                        bounds = np.array(
                            [caps[sigma[l]] - 0.5 * np.log2(pe_pow[sigma[l]] / p[l]) for l in range(L)]
                        )
                        push(idx, row, bounds, {"variant": variant, "pi_d": pd, "pi_e": pe_perm})
            else:
                raise ConfigError(f"unknown variant {variant!r}")
        if best is None:
            return None
        return best[0][0], best[1], best[2]

    def winner(self, row_idx, meta):
        row = self.rows[row_idx]
        p = row["p"]
        A = row["A"]
        pi_c = row["pi_c"]
        pi_s = row["pi_s"]
        pi_d = meta.get("pi_d") or tuple(range(1, self.L + 1))
        pi_e = meta.get("pi_e") or tuple(range(1, self.L + 1))
        return p, A, pi_c, pi_s, pi_d, pi_e


def nominal_assignment(L, gamma, pi_c, pi_s, pi_d, pi_e, A, powers, budgets) -> SchemeAssignment:
    """Assignment over a placeholder chain: L strictly nested coding levels
    above L strictly nested shaping levels."""
    spec = make_chain_spec(gamma, 2 * L, 2 * L)
    return SchemeAssignment(
        spec=spec,
        pi_c=pi_c,
        pi_s=pi_s,
        pi_d=pi_d,
        pi_e=pi_e,
        A=A,
        codingLevels=tuple(range(2 * L, L, -1)),
        shapingLevels=tuple(range(L, 0, -1)),
        powers=tuple(powers),
        budgets=tuple(budgets),
    )


def _zero_report(L: int) -> RateReport:
    return RateReport(
        sourceRates=(0.0,) * L,
        forwardingRates=(0.0,) * L,
        sumRate=0.0,
        feasible=True,
        limiting=("computation-limited",) * L,
    )


def _grid_rows(budgets, common: bool, config: OptimizerConfig) -> np.ndarray:
    L = len(budgets)
    if common:
        grid = _power_grid(float(np.min(budgets)), config.nBrute)
        return np.tile(grid[:, None], (1, L))
    n = config.nBrute
    while n > 1 and n**L > config.maxGridRows:
        n -= 1
    axes = [_power_grid(float(b), n) for b in budgets]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def evaluate_all(channel: ChannelInstance, config: OptimizerConfig, schemes=SCHEMES):
    """Evaluate the requested schemes on one channel draw.

    Shares the power grids and coefficient selection across schemes so the
    comparisons are paired.  Returns {scheme: (assignment, report)}, with a
    zero-rate fallback assignment of None when nothing is feasible."""
    L = channel.L
    region = second_hop_region(channel.g, channel.P_R)
    caps = np.asarray(region.perRelayCapacity, dtype=float)
    contexts = {}
    results = {}
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {scheme!r}")
        common = _COMMON_POWER[scheme]
        if common not in contexts:
            rows = _grid_rows(channel.P, common, config)
            if L == 2:
                contexts[common] = _Fast2(channel.H, caps, rows, config.gammaOpt)
            else:
                contexts[common] = _ScalarRows(channel.H, caps, rows, config.gammaOpt, config)
        ctx = contexts[common]
        variant = _SCHEME_VARIANT[scheme]
        picked = ctx.evaluate(variant)
        if picked is None:
            results[scheme] = (None, _zero_report(L))
            continue
        _, row, meta = picked
        p, A, pi_c, pi_s, pi_d, pi_e = ctx.winner(row, meta)
        asg = nominal_assignment(L, config.gammaOpt, pi_c, pi_s, pi_d, pi_e, A, p, channel.P)
        report = max_rates_given_structure(asg, channel.H, region, variant)
        results[scheme] = (asg, report)
    return results


def evaluate_scheme(variant: str, channel: ChannelInstance, config: OptimizerConfig) -> RateReport:
    """Best rate report of one scheme on one channel draw."""
    return evaluate_all(channel, config, (variant,))[variant][1]


def optimize_sum_rate(channel: ChannelInstance, config: OptimizerConfig):
    """Best assignment and rates for the configured scheme."""
    asg, report = evaluate_all(channel, config, (config.schemeVariant,))[config.schemeVariant]
    return asg, report
