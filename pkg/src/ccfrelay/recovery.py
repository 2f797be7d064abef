"""Successive recovery of source codewords at the destination.

Three algorithms, all exact over the digit lattice chain:

- srq: asymmetric quantization with a common shaping lattice; peels one
  coding layer per iteration from fine to coarse.
- srm: asymmetric modulo with trivial quantization; recovers one whole
  codeword per iteration from the finest shaping lattice to the coarsest.
- srmq: both asymmetries; an srq pass above the finest shaping lattice,
  cancellation, then an srm pass below it.

Inputs may carry leading batch axes; every iteration is vectorized over
the batch.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrixError, SingularResidualError, SpecMismatchError
from .galois import mat_inverse, residual_submatrix, srm_index_sets, srq_index_sets
from .lattice import ChainPoint, mod_level, point_add, point_scale, point_sub, quantize_level, zero_point
from .pipeline import SchemeAssignment


def _check_inputs(v, asg: SchemeAssignment) -> None:
    if len(v) != asg.L:
        raise ValueError(f"expected {asg.L} relay outputs, got {len(v)}")
    for v_m in v:
        if v_m.spec != asg.spec:
            raise SpecMismatchError("relay output spec differs from assignment spec")


def _solve_layer(Q_sub, inv_entries, slices, gamma):
    """Left-multiply stacked digit slices by an inverse over F_gamma."""
    U = np.stack(slices, axis=0)
    return np.tensordot(inv_entries, U, axes=(1, 0)) % gamma


def srq(v, asg: SchemeAssignment, common_shaping_level: int):
    """Successive recovery under asymmetric quantization (common shaping).

    ``v[m-1]`` must be the canonical residue of the quantized combination
    of relay m modulo the common shaping lattice.  Returns the recovered
    codewords, indexed by source.
    """
    _check_inputs(v, asg)
    spec = asg.spec
    L = asg.L
    Q = asg.field_image
    batch = v[0].batch_shape
    coding = asg.codingLevels
    if coding[-1] < common_shaping_level:
        raise ValueError("common shaping lattice must be coarser than every coding lattice")

    # layers[l-1][j-1] holds the recovered layer-j component of source l.
    layers = [[None] * L for _ in range(L)]
    v_work = list(v)
    for j in range(1, L + 1):
        k_hi = coding[j - 1]
        k_lo = coding[j] if j < L else common_shaping_level
        sets = srq_index_sets(asg.pi_c, asg.pi_d, j)
        try:
            inv = mat_inverse(residual_submatrix(Q, sets.sourceSet, sets.relaySet))
        except SingularMatrixError:
            raise SingularResidualError("quantization", j) from None
        slices = [v_work[m - 1].digits[..., k_lo:k_hi] for m in sets.relaySet]
        W = _solve_layer(Q, inv.entries, slices, spec.gamma)
        for row, l in enumerate(sets.sourceSet):
            digits = np.zeros(batch + (spec.kMax,), dtype=np.int64)
            digits[..., k_lo:k_hi] = W[row]
            layers[l - 1][j - 1] = ChainPoint(spec, digits, np.zeros(batch + (spec.n,), dtype=np.int64))
        if j < L:
            cumulative = []
            for l in sets.sourceSet:
                acc = zero_point(spec, batch)
                for mu in range(asg.pi_c[l - 1], j + 1):
                    acc = point_add(acc, layers[l - 1][mu - 1])
                cumulative.append((l, acc))
            next_relays = srq_index_sets(asg.pi_c, asg.pi_d, j + 1).relaySet
            for m in next_relays:
                corr = zero_point(spec, batch)
                for l, acc in cumulative:
                    corr = point_add(corr, point_scale(acc, int(asg.A[m - 1, l - 1])))
                corr = quantize_level(corr, asg.quantize_level_of(m))
                v_work[m - 1] = mod_level(point_sub(v[m - 1], corr), common_shaping_level)

    out = []
    for l in range(1, L + 1):
        acc = zero_point(spec, batch)
        for mu in range(asg.pi_c[l - 1], L + 1):
            acc = point_add(acc, layers[l - 1][mu - 1])
        out.append(mod_level(acc, common_shaping_level))
    return out


def srm(v, dithers, asg: SchemeAssignment, fine_level: int = None):
    """Successive recovery under asymmetric modulo (trivial quantization).

    ``v[m-1]`` must be the canonical residue of relay m's combination
    modulo its own modulo lattice.  ``dithers`` is a per-source list of
    ChainPoints or None for the all-zero dithers.  ``fine_level`` is the
    digit level of the common fine lattice the codewords live on; it
    defaults to the finest coding level of the assignment.
    """
    _check_inputs(v, asg)
    spec = asg.spec
    L = asg.L
    Q = asg.field_image
    batch = v[0].batch_shape
    if fine_level is None:
        fine_level = asg.codingLevels[0]
    if dithers is None:
        dithers = [None] * L

    t_hat = [None] * L
    v_work = list(v)
    for i in range(1, L + 1):
        k_i = asg.shapingLevels[i - 1]
        sets = srm_index_sets(asg.pi_s, asg.pi_e, i)
        try:
            inv = mat_inverse(residual_submatrix(Q, sets.sourceSet, sets.relaySet))
        except SingularMatrixError:
            raise SingularResidualError("modulo", i) from None
        slices = [v_work[m - 1].digits[..., k_i:fine_level] for m in sets.relaySet]
        W = _solve_layer(Q, inv.entries, slices, spec.gamma)
        l_star = asg.pi_s.index(i) + 1
        row = sets.sourceSet.index(l_star)
        digits = np.zeros(batch + (spec.kMax,), dtype=np.int64)
        digits[..., k_i:fine_level] = W[row]
        t_hat[l_star - 1] = ChainPoint(spec, digits, np.zeros(batch + (spec.n,), dtype=np.int64))
        if i < L:
            d = dithers[l_star - 1]
            shifted = t_hat[l_star - 1] if d is None else point_sub(t_hat[l_star - 1], d)
            t_tilde = point_sub(t_hat[l_star - 1], quantize_level(shifted, k_i))
            for m in srm_index_sets(asg.pi_s, asg.pi_e, i + 1).relaySet:
                scaled = point_scale(t_tilde, int(asg.A[m - 1, l_star - 1]))
                v_work[m - 1] = mod_level(point_sub(v_work[m - 1], scaled), asg.modulo_level_of(m))
    return t_hat


def srmq(v, dithers, asg: SchemeAssignment):
    """Successive recovery under joint asymmetric quantization and modulo.

    Runs srq on the residues above the finest shaping lattice, cancels the
    recovered fine parts, shifts the dithers, and finishes with srm on the
    remaining coarse system.
    """
    _check_inputs(v, asg)
    spec = asg.spec
    L = asg.L
    batch = v[0].batch_shape
    k_b1 = asg.shapingLevels[0]
    if dithers is None:
        dithers = [None] * L

    v_fine = [mod_level(v_m, k_b1) for v_m in v]
    t_quan = srq(v_fine, asg, k_b1)

    v_quan = []
    for m in range(1, L + 1):
        corr = zero_point(spec, batch)
        for l in range(1, L + 1):
            corr = point_add(corr, point_scale(t_quan[l - 1], int(asg.A[m - 1, l - 1])))
        corr = quantize_level(corr, asg.quantize_level_of(m))
        v_quan.append(mod_level(point_sub(v[m - 1], corr), asg.modulo_level_of(m)))

    d_quan = []
    for l in range(1, L + 1):
        d = zero_point(spec, batch) if dithers[l - 1] is None else dithers[l - 1]
        d_quan.append(point_sub(d, t_quan[l - 1]))

    t_mod = srm(v_quan, d_quan, asg, fine_level=k_b1)

    out = []
    for l in range(1, L + 1):
        combined = point_add(t_quan[l - 1], t_mod[l - 1])
        out.append(mod_level(combined, asg.shaping_level(l)))
    return out
