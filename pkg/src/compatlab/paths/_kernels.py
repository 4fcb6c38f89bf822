"""Hot loops: counter-based uniforms/normals, Brownian-bridge knot cache, first passage.

Every kernel has a ``*_nb`` (numba, scalar loops) and a ``*_np`` (vectorised
numpy) twin.  The public names at the bottom dispatch on ``compatlab._accel.BACKEND``.
Both twins produce the same uniforms bit-for-bit; normals agree to a few ulp
because ``log``/``sqrt`` may round differently between numpy and libm.
"""
from __future__ import annotations

import numpy as np

from .._accel import njit, pick

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO_M53 = 1.0 / 9007199254740992.0


# --- splitmix64 finaliser -------------------------------------------------

def mix64_int(z: int) -> int:
    """Pure-python splitmix64 finaliser on a 64-bit integer (key derivation)."""
    mask = (1 << 64) - 1
    z &= mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


@njit
def _mix64_nb(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _mix64_np(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


# --- inverse normal CDF (Wichura AS241, PPND16) ----------------------------

_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)
A_ = np.array(_A)
B_ = np.array(_B)
C_ = np.array(_C)
D_ = np.array(_D)
E_ = np.array(_E)
F_ = np.array(_F)


@njit
def _horner_nb(c, x):
    acc = c[7]
    for i in range(6, -1, -1):
        acc = acc * x + c[i]
    return acc


@njit
def _ppnd_nb(p):
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _horner_nb(A_, r) / _horner_nb(B_, r)
    r = p if q < 0.0 else 1.0 - p
    r = np.sqrt(-np.log(r))
    if r <= 5.0:
        r -= 1.6
        val = _horner_nb(C_, r) / _horner_nb(D_, r)
    else:
        r -= 5.0
        val = _horner_nb(E_, r) / _horner_nb(F_, r)
    return -val if q < 0.0 else val


def _horner_np(c, x):
    acc = np.full_like(x, c[7])
    for i in range(6, -1, -1):
        acc = acc * x + c[i]
    return acc


def ppnd_np(p):
    """Vectorised AS241 inverse normal CDF."""
    p = np.asarray(p, dtype=np.float64)
    q = p - 0.5
    out = np.empty_like(p)
    central = np.abs(q) <= 0.425
    if central.any():
        qc = q[central]
        r = 0.180625 - qc * qc
        out[central] = qc * _horner_np(A_, r) / _horner_np(B_, r)
    tail = ~central
    if tail.any():
        qt = q[tail]
        pt = p[tail]
        r = np.sqrt(-np.log(np.where(qt < 0.0, pt, 1.0 - pt)))
        val = np.empty_like(r)
        near = r <= 5.0
        rn = r[near] - 1.6
        val[near] = _horner_np(C_, rn) / _horner_np(D_, rn)
        rf = r[~near] - 5.0
        val[~near] = _horner_np(E_, rf) / _horner_np(F_, rf)
        out[tail] = np.where(qt < 0.0, -val, val)
    return out


# --- counter-based blocks ---------------------------------------------------

@njit
def _uniform_at_nb(key, counter):
    z = _mix64_nb(key + (np.uint64(counter) + _ONE) * GOLDEN)
    return (np.float64(z >> _S11) + 0.5) * _TWO_M53


@njit
def _uniform_block_nb(keys, offset, count):
    out = np.empty((keys.shape[0], count))
    for p in range(keys.shape[0]):
        for c in range(count):
            out[p, c] = _uniform_at_nb(keys[p], offset + c)
    return out


@njit
def _normal_block_nb(keys, offset, count):
    out = np.empty((keys.shape[0], count))
    for p in range(keys.shape[0]):
        for c in range(count):
            out[p, c] = _ppnd_nb(_uniform_at_nb(keys[p], offset + c))
    return out


def _uniform_block_np(keys, offset, count):
    keys = np.asarray(keys, dtype=np.uint64)
    ctr = np.arange(offset, offset + count, dtype=np.uint64) + _ONE
    z = _mix64_np(keys[:, None] + ctr[None, :] * GOLDEN)
    return ((z >> _S11).astype(np.float64) + 0.5) * _TWO_M53


def _normal_block_np(keys, offset, count):
    return ppnd_np(_uniform_block_np(keys, offset, count))


# --- Brownian-bridge knot cache ----------------------------------------------

@njit
def _bridge_query_nb(times, vals, counts, draws, keys, t, out):
    for p in range(times.shape[0]):
        n = counts[p]
        tq = t[p]
        # binary search for first knot >= tq
        lo = 0
        hi = n
        while lo < hi:
            mid = (lo + hi) // 2
            if times[p, mid] < tq:
                lo = mid + 1
            else:
                hi = mid
        if lo < n and times[p, lo] == tq:
            out[p] = vals[p, lo]
            continue
        z = _ppnd_nb(_uniform_at_nb(keys[p], draws[p]))
        draws[p] += 1
        if lo == n:
            dt = tq - times[p, n - 1]
            v = vals[p, n - 1] + np.sqrt(dt) * z
        else:
            ta = times[p, lo - 1]
            tb = times[p, lo]
            wa = vals[p, lo - 1]
            wb = vals[p, lo]
            lam = (tq - ta) / (tb - ta)
            mean = wa + lam * (wb - wa)
            var = (tb - tq) * (tq - ta) / (tb - ta)
            v = mean + np.sqrt(var) * z
            for j in range(n, lo, -1):
                times[p, j] = times[p, j - 1]
                vals[p, j] = vals[p, j - 1]
        times[p, lo] = tq
        vals[p, lo] = v
        counts[p] = n + 1
        out[p] = v


def _bridge_query_np(times, vals, counts, draws, keys, t, out):
    P = times.shape[0]
    rows = np.arange(P)
    # pad beyond count with +inf so searchsorted per row is well defined
    width = times.shape[1]
    col = np.arange(width)[None, :]
    padded = np.where(col < counts[:, None], times, np.inf)
    pos = (padded < t[:, None]).sum(axis=1)
    hit = (pos < counts) & (padded[rows, np.minimum(pos, width - 1)] == t)
    out[hit] = vals[rows[hit], pos[hit]]
    todo = ~hit
    if not todo.any():
        return
    ctr = draws[todo].astype(np.uint64) + _ONE
    zbits = _mix64_np(np.asarray(keys, dtype=np.uint64)[todo] + ctr * GOLDEN)
    z = ppnd_np(((zbits >> _S11).astype(np.float64) + 0.5) * _TWO_M53)
    draws[todo] += 1
    idx = np.nonzero(todo)[0]
    append = pos[idx] == counts[idx]
    a = idx[append]
    if a.size:
        last = counts[a] - 1
        v = vals[a, last] + np.sqrt(t[a] - times[a, last]) * z[append]
        times[a, counts[a]] = t[a]
        vals[a, counts[a]] = v
        counts[a] += 1
        out[a] = v
    ins = idx[~append]
    zi = z[~append]
    for j, p in enumerate(ins):
        lo = pos[p]
        n = counts[p]
        ta, tb = times[p, lo - 1], times[p, lo]
        wa, wb = vals[p, lo - 1], vals[p, lo]
        lam = (t[p] - ta) / (tb - ta)
        v = wa + lam * (wb - wa) + np.sqrt((tb - t[p]) * (t[p] - ta) / (tb - ta)) * zi[j]
        times[p, lo + 1:n + 1] = times[p, lo:n].copy()
        vals[p, lo + 1:n + 1] = vals[p, lo:n].copy()
        times[p, lo] = t[p]
        vals[p, lo] = v
        counts[p] = n + 1
        out[p] = v


# --- first passage of running sup |M| ------------------------------------------

@njit
def _first_passage_nb(absm, levels, times):
    P, K = absm.shape
    L = levels.shape[0]
    tau = np.full((P, L), np.inf)
    for p in range(P):
        j = 0
        for k in range(K):
            while j < L and absm[p, k] >= levels[j]:
                tau[p, j] = times[k]
                j += 1
            if j == L:
                break
    return tau


def _first_passage_np(absm, levels, times):
    run = np.maximum.accumulate(absm, axis=1)
    tau = np.full((absm.shape[0], levels.shape[0]), np.inf)
    for j, lev in enumerate(levels):
        crossed = run >= lev
        any_ = crossed.any(axis=1)
        first = crossed.argmax(axis=1)
        tau[any_, j] = times[first[any_]]
    return tau


IMPLEMENTATIONS = {
    "uniform_block": (_uniform_block_nb, _uniform_block_np),
    "normal_block": (_normal_block_nb, _normal_block_np),
    "bridge_query": (_bridge_query_nb, _bridge_query_np),
    "first_passage": (_first_passage_nb, _first_passage_np),
}

uniform_block = pick(_uniform_block_nb, _uniform_block_np)
normal_block = pick(_normal_block_nb, _normal_block_np)
bridge_query = pick(_bridge_query_nb, _bridge_query_np)
first_passage = pick(_first_passage_nb, _first_passage_np)
