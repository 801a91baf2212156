"""Independent reference implementations used as test oracles.

Everything here is deliberately written from first principles
(probability-domain enumeration, direct repetition combining) rather
than reusing the library's log-domain kernels.
"""

import numpy as np


def lse(values):
    values = np.asarray(values, dtype=np.float64)
    m = values.max()
    return m + np.log(np.exp(values - m).sum())


def map_despread_oracle(prior_chip_llrs, sv, mapper, field):
    """Brute-force extrinsic chip LLRs: enumerate the 2^s candidate symbols,
    form each position's posterior from chip-wise likelihoods, marginalize."""
    s, L, q = mapper.s, sv.elements.size, field.q
    prior = np.asarray(prior_chip_llrs, dtype=np.float64).reshape(L, s)
    # per-position symbol log-likelihoods up to a constant:
    # log P(chips of lam | priors) = sum_m bit_m(lam) * La_m / 2
    logp = (mapper.signs[None, :, :] * prior[:, None, :] / 2.0).sum(axis=-1)  # (L, Q)
    out = np.empty((L, s))
    for ell in range(L):
        for n in range(s):
            pos, neg = [], []
            for beta in range(q):
                gamma = field.mul_table[beta, sv.elements]
                w = sum(logp[i, gamma[i]] for i in range(L) if i != ell)
                if mapper.signs[gamma[ell], n] > 0:
                    pos.append(w)
                else:
                    neg.append(w)
            out[ell, n] = lse(pos) - lse(neg)
    return out.reshape(-1)


def map_decision_oracle(prior_chip_llrs, sv, mapper, field):
    """Brute-force total bit LLRs: full posterior over the symbol, all L
    positions included, marginalized per info bit."""
    s, L, q = mapper.s, sv.elements.size, field.q
    prior = np.asarray(prior_chip_llrs, dtype=np.float64).reshape(L, s)
    logp = (mapper.signs[None, :, :] * prior[:, None, :] / 2.0).sum(axis=-1)
    out = np.empty(s)
    for n in range(s):
        pos, neg = [], []
        for beta in range(q):
            gamma = field.mul_table[beta, sv.elements]
            w = sum(logp[i, gamma[i]] for i in range(L))
            if mapper.signs[beta, n] > 0:
                pos.append(w)
            else:
                neg.append(w)
        out[n] = lse(pos) - lse(neg)
    return out


def repetition_idma_decoder(y, interleavers, params, iterations, llr_max=50.0,
                            damping=0.5):
    """Conventional repetition-spreading chip-by-chip decoder (s=1 only).

    Independent of the library decoder: the despreader is the direct
    leave-one-out sum over each symbol's L chips, and the decision LLR is
    the plain sum (the info bit equals its chips for any s=1 bijection).
    Returns (decisions, bit_llrs).
    """
    K = len(interleavers)
    T = y.size
    a = params.amplitude
    n0 = params.n0
    L = params.L
    n_sym = T // L
    la_x = np.zeros((K, T))
    la_c = np.zeros((K, T))
    for _ in range(iterations):
        t = np.tanh(la_x / 2.0)
        v = 1.0 - t * t
        st, sv_ = t.sum(axis=0), v.sum(axis=0)
        new = np.empty_like(la_x)
        for k in range(K):
            num = 2.0 * a * (y - a * (st - t[k]))
            den = a * a * (sv_ - v[k]) + n0 / 2.0
            e = np.clip(num / den, -llr_max, llr_max)
            la_c[k] = e[interleavers[k].inv_perm]
            grp = la_c[k].reshape(n_sym, L)
            ext = np.stack(
                [grp[:, [i for i in range(L) if i != ell]].sum(axis=1)
                 for ell in range(L)], axis=1)
            ext = np.clip(ext, -llr_max, llr_max)
            new[k] = ext.reshape(-1)[interleavers[k].perm]
        la_x = damping * la_x + (1.0 - damping) * new
    bit_llrs = np.empty((K, n_sym))
    for k in range(K):
        bit_llrs[k] = la_c[k].reshape(n_sym, L).sum(axis=1)
    decisions = np.where(bit_llrs >= 0, 1, -1).astype(np.int8)
    return decisions, bit_llrs


def random_despread_instance(rng, s_max=4, L_max=4, scale=3.0):
    """Random (field, mapper, sv, priors) tuple for oracle comparisons."""
    from ffspread.codec import random_spreading
    from ffspread.gf import build_field, random_mapper

    s = int(rng.integers(1, s_max + 1))
    L = int(rng.integers(1, L_max + 1))
    field = build_field(s)
    mapper = random_mapper(s, int(rng.integers(2**31)))
    sv = random_spreading(field, L, int(rng.integers(2**31)))
    prior = rng.normal(0.0, scale, size=s * L)
    return field, mapper, sv, prior
