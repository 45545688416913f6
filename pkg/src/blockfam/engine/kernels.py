"""Compiled inner loops: packing, the micro-kernel, and block scaling.

All element access goes through scatter vectors (rscat/cscat hold element
offsets into the flat storage buffer); an ordinary strided matrix is the
special case where the per-block stride summaries (rbs/cbs) are nonzero and
packing takes the affine fast path. The macro kernel runs the two loops
around the micro-kernel over one packed mc x kc block of A and kc x nc block
of B. Loop bodies keep a fixed ascending k order so results are bit-
reproducible regardless of how the outer loops are partitioned.
"""
from __future__ import annotations

from numba import njit

__all__ = [
    "pack_a_block",
    "pack_b_block",
    "pack_b_block_tridiag",
    "scale_scatter",
    "get_macro_kernel",
]


@njit(cache=True, nogil=True)
def pack_a_block(dst, src, rscat, cscat, rbs, i0, m_eff, k0, k_eff, mr):
    """Pack rows [i0, i0+m_eff) x cols [k0, k0+k_eff) into mr-row micro-panels.

    Layout: panel-major, then k-major, then the mr rows of the panel
    contiguously; short final panels are zero padded. i0 must be a multiple
    of mr so panel p aligns with stride-summary block i0//mr + p.
    """
    n_panels = (m_eff + mr - 1) // mr
    for p in range(n_panels):
        r_lo = p * mr
        rows = m_eff - r_lo
        if rows > mr:
            rows = mr
        base = p * (mr * k_eff)
        s = rbs[i0 // mr + p]
        if s != 0:
            row0 = rscat[i0 + r_lo]
            for kk in range(k_eff):
                c = cscat[k0 + kk]
                o = base + kk * mr
                for i in range(rows):
                    dst[o + i] = src[row0 + i * s + c]
                for i in range(rows, mr):
                    dst[o + i] = 0.0
        else:
            for kk in range(k_eff):
                c = cscat[k0 + kk]
                o = base + kk * mr
                for i in range(rows):
                    dst[o + i] = src[rscat[i0 + r_lo + i] + c]
                for i in range(rows, mr):
                    dst[o + i] = 0.0


@njit(cache=True, nogil=True)
def pack_b_block(dst, src, rscat, cscat, cbs, k0, k_eff, j0, n_eff, nr):
    """Pack rows [k0, k0+k_eff) x cols [j0, j0+n_eff) into nr-col micro-panels.

    Layout: panel-major, then k-major, then the nr columns contiguously,
    zero padded. j0 must be a multiple of nr.
    """
    n_panels = (n_eff + nr - 1) // nr
    for p in range(n_panels):
        c_lo = p * nr
        cols = n_eff - c_lo
        if cols > nr:
            cols = nr
        base = p * (nr * k_eff)
        s = cbs[j0 // nr + p]
        if s != 0:
            col0 = cscat[j0 + c_lo]
            for kk in range(k_eff):
                r = rscat[k0 + kk]
                o = base + kk * nr
                for j in range(cols):
                    dst[o + j] = src[r + col0 + j * s]
                for j in range(cols, nr):
                    dst[o + j] = 0.0
        else:
            for kk in range(k_eff):
                r = rscat[k0 + kk]
                o = base + kk * nr
                for j in range(cols):
                    dst[o + j] = src[r + cscat[j0 + c_lo + j]]
                for j in range(cols, nr):
                    dst[o + j] = 0.0


@njit(cache=True, nogil=True)
def pack_b_block_tridiag(dst, src, rscat, cscat, k0, k_eff, j0, n_eff, nr, tvec, k_total):
    """Pack W = T*S for the block rows [k0, k0+k_eff) without forming W.

    T is the skew-symmetric tridiagonal with subdiagonal tvec, S the full
    k_total-row source; row g of W combines at most two adjacent source rows:
    tvec[g-1]*S[g-1,:] - tvec[g]*S[g+1,:], terms at the edges dropped.
    """
    n_panels = (n_eff + nr - 1) // nr
    for p in range(n_panels):
        c_lo = p * nr
        cols = n_eff - c_lo
        if cols > nr:
            cols = nr
        base = p * (nr * k_eff)
        for kk in range(k_eff):
            g = k0 + kk
            o = base + kk * nr
            for j in range(nr):
                dst[o + j] = 0.0
            if g > 0:
                t_lo = tvec[g - 1]
                r = rscat[g - 1]
                for j in range(cols):
                    dst[o + j] += t_lo * src[r + cscat[j0 + c_lo + j]]
            if g < k_total - 1:
                t_hi = tvec[g]
                r = rscat[g + 1]
                for j in range(cols):
                    dst[o + j] -= t_hi * src[r + cscat[j0 + c_lo + j]]


@njit(cache=True, nogil=True)
def scale_scatter(cbuf, rscat, cscat, m, n, beta, lower_only):
    """c := beta*c over the full matrix or its lower triangle (beta=0 writes zeros)."""
    for i in range(m):
        r = rscat[i]
        jmax = n
        if lower_only and i + 1 < n:
            jmax = i + 1
        if beta == 0.0:
            for j in range(jmax):
                cbuf[r + cscat[j]] = 0.0
        else:
            for j in range(jmax):
                a = r + cscat[j]
                cbuf[a] = beta * cbuf[a]


def _micro_kernel_source(mr: int, nr: int) -> str:
    """Source of the register-blocked micro-kernel for one tile shape.

    The mr*nr accumulators must be named scalars for LLVM to keep them in
    registers, so the unrolled body is generated textually per (mr, nr);
    the k loop stays ascending. Multiply-add contraction is enabled (fuses
    roundings without reordering the summation).
    """
    lines = ["def micro(apack, pa, bpack, pb, kc_eff, tile):"]
    accs = " = ".join(f"c{i}_{j}" for i in range(mr) for j in range(nr))
    lines.append(f"    {accs} = 0.0")
    lines.append("    for kk in range(kc_eff):")
    lines.append(f"        ao = pa + kk * {mr}")
    lines.append(f"        bo = pb + kk * {nr}")
    for i in range(mr):
        lines.append(f"        a{i} = apack[ao + {i}]")
    for j in range(nr):
        lines.append(f"        b{j} = bpack[bo + {j}]")
    for j in range(nr):
        for i in range(mr):
            lines.append(f"        c{i}_{j} += a{i} * b{j}")
    for i in range(mr):
        for j in range(nr):
            lines.append(f"    tile[{i * nr + j}] = c{i}_{j}")
    return "\n".join(lines)


def _build_micro_kernel(mr: int, nr: int):
    namespace: dict = {}
    exec(compile(_micro_kernel_source(mr, nr), f"<micro_{mr}x{nr}>", "exec"), namespace)
    return njit(nogil=True, fastmath={"contract"})(namespace["micro"])


_MACRO_CACHE: dict = {}


def get_macro_kernel(mr: int, nr: int):
    """Macro kernel (the two loops around the micro-kernel) specialized for
    one micro-tile shape."""
    fn = _MACRO_CACHE.get((mr, nr))
    if fn is None:
        fn = _build_macro_kernel(mr, nr)
        _MACRO_CACHE[(mr, nr)] = fn
    return fn


def _build_macro_kernel(mr: int, nr: int):
    micro = _build_micro_kernel(mr, nr)

    @njit(nogil=True)
    def macro_kernel(
        apack,
        bpack,
        kc_eff,
        m_eff,
        n_eff,
        cbuf,
        crscat,
        ccscat,
        i0,
        j0,
        alpha,
        beta,
        lower_only,
        tile,
    ):
        n_panels_j = (n_eff + nr - 1) // nr
        n_panels_i = (m_eff + mr - 1) // mr
        for jp in range(n_panels_j):
            j_lo = jp * nr
            jn = n_eff - j_lo
            if jn > nr:
                jn = nr
            gj = j0 + j_lo
            pb = jp * (nr * kc_eff)
            for ip in range(n_panels_i):
                i_lo = ip * mr
                im = m_eff - i_lo
                if im > mr:
                    im = mr
                gi = i0 + i_lo
                if lower_only and gi + im - 1 < gj:
                    continue
                pa = ip * (mr * kc_eff)
                micro(apack, pa, bpack, pb, kc_eff, tile)
                full_tile = (not lower_only) or (gi >= gj + jn - 1)
                if beta == 0.0:
                    for i in range(im):
                        gi2 = gi + i
                        r = crscat[gi2]
                        to = i * nr
                        if full_tile:
                            for j in range(jn):
                                cbuf[r + ccscat[gj + j]] = alpha * tile[to + j]
                        else:
                            for j in range(jn):
                                if gi2 >= gj + j:
                                    cbuf[r + ccscat[gj + j]] = alpha * tile[to + j]
                else:
                    for i in range(im):
                        gi2 = gi + i
                        r = crscat[gi2]
                        to = i * nr
                        if full_tile:
                            for j in range(jn):
                                a = r + ccscat[gj + j]
                                cbuf[a] = beta * cbuf[a] + alpha * tile[to + j]
                        else:
                            for j in range(jn):
                                if gi2 >= gj + j:
                                    a = r + ccscat[gj + j]
                                    cbuf[a] = beta * cbuf[a] + alpha * tile[to + j]

    return macro_kernel
