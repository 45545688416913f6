"""Command-line front end: correctness check suites, single benchmarks, and
control-tree sweeps emitting CSV.

Exit codes: 0 success, 1 check failure, 2 usage or validation error.
Operand generation is seed-deterministic: SPD inputs are M*M^T + n*I,
skew inputs are M - M^T, with M uniform(-1, 1) from a seeded generator,
so reruns with the same flags reproduce error columns exactly.
"""
from __future__ import annotations

import argparse
import csv
import os
import statistics
import sys
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import control, oracle
from .control import ControlNode, default_tree, enumerate_trees, tree_descriptor
from .engine import default_config, gemm, sandwich_skew, workspace
from .errors import BlockfamError, TreeParseError, TreeValidationError
from .factor import (
    cholesky,
    form_q,
    ltlt_pivoted,
    lu_partial,
    lu_solve,
    pfaffian,
    qr_householder,
    unit_lower_from_storage,
)
from .tensor import ContractionSpec, block_scatter, contract, make_tensor
from .views import DType, Range, make_view, partition_steps

CSV_HEADER = "op,n,tree,mc,kc,nc,mr,nr,ways,time_s,gflops,max_rel_err"
ORACLE_CAP = 512
FAIL_KNOB = "BLOCKFAM_CHECK_FAIL"

BENCH_OPS = ("gemm", "cholesky", "lu", "qr", "ltlt")


# ---------------------------------------------------------------------------
# deterministic operand generation
# ---------------------------------------------------------------------------


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def gen_matrix(op: str, n: int, m: int, k: int, dtype: DType, seed: int) -> dict:
    rng = _rng(seed)
    if op == "gemm":
        return {
            "a": rng.uniform(-1, 1, (m, k)).astype(dtype.np),
            "b": rng.uniform(-1, 1, (k, n)).astype(dtype.np),
        }
    if op == "cholesky":
        mmat = rng.uniform(-1, 1, (n, n))
        return {"a": (mmat @ mmat.T + n * np.eye(n)).astype(dtype.np)}
    if op == "lu":
        return {"a": (rng.uniform(-1, 1, (n, n)) + n * np.eye(n)).astype(dtype.np)}
    if op == "qr":
        return {"a": rng.uniform(-1, 1, (m, n)).astype(dtype.np)}
    if op == "ltlt":
        mmat = rng.uniform(-1, 1, (n, n))
        return {"a": (mmat - mmat.T).astype(dtype.np)}
    raise ValueError(f"unknown op {op!r}")


def _flops(op: str, n: int, m: int, k: int) -> float:
    if op == "gemm":
        return 2.0 * m * n * k
    if op == "cholesky" or op == "ltlt":
        return n**3 / 3.0
    if op == "lu":
        return 2.0 * n**3 / 3.0
    if op == "qr":
        return 2.0 * n * n * (m - n / 3.0)
    raise ValueError(op)


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


@dataclass
class BenchResult:
    time_s: float
    max_rel_err: Optional[float]


def _bench_gemm(data: dict, n: int, m: int, k: int, dtype: DType, tree: ControlNode, repeats: int) -> BenchResult:
    cfg = default_config(dtype).with_overrides(tree.kernel)
    a = make_view(m, k, dtype, fill=data["a"])
    b = make_view(k, n, dtype, fill=data["b"])
    c = make_view(m, n, dtype)
    times = []
    for rep in range(repeats + 1):
        t0 = time.perf_counter()
        gemm(1.0, a, b, 0.0, c, cfg=cfg, ways=tree.ways)
        t1 = time.perf_counter()
        if rep > 0:  # first run is warm-up
            times.append(t1 - t0)
    err = None
    if max(m, n, k) <= ORACLE_CAP:
        cref = make_view(m, n, dtype)
        oracle.gemm_naive(1.0, a, b, 0.0, cref)
        scale = float(np.abs(data["a"]).max() * np.abs(data["b"]).max()) * max(k, 1)
        err = float(np.abs(c.to_numpy() - cref.to_numpy()).max() / max(scale, 1e-300))
    return BenchResult(statistics.median(times), err)


def _bench_factor(op: str, data: dict, n: int, m: int, dtype: DType, tree: ControlNode, repeats: int) -> BenchResult:
    a0 = data["a"]
    times = []
    result: dict = {}
    for rep in range(repeats + 1):
        work = make_view(a0.shape[0], a0.shape[1], dtype, fill=a0)
        t0 = time.perf_counter()
        if op == "cholesky":
            cholesky(work, tree=tree)
        elif op == "lu":
            result["piv"] = lu_partial(work, tree=tree)
        elif op == "qr":
            result["refl"] = qr_householder(work, tree=tree)
        elif op == "ltlt":
            result["piv"], result["tri"] = ltlt_pivoted(work, tree=tree)
        t1 = time.perf_counter()
        if rep > 0:
            times.append(t1 - t0)
        result["work"] = work
    err = _factor_residual(op, a0, result) if max(n, m) <= ORACLE_CAP else None
    return BenchResult(statistics.median(times), err)


def _factor_residual(op: str, a0: np.ndarray, result: dict) -> float:
    wn = result["work"].to_numpy().astype(np.float64)
    a64 = a0.astype(np.float64)
    norm_a = float(np.linalg.norm(a64)) or 1.0
    if op == "cholesky":
        ell = np.tril(wn)
        return float(np.linalg.norm(a64 - ell @ ell.T) / norm_a)
    if op == "lu":
        n = wn.shape[0]
        ell = np.tril(wn, -1) + np.eye(n)
        u = np.triu(wn)
        pa = a64[result["piv"].permutation(n)]
        return float(np.linalg.norm(pa - ell @ u) / norm_a)
    if op == "qr":
        q = form_q(result["work"], result["refl"])
        r = np.triu(wn)
        return float(np.linalg.norm(a64 - q @ r) / norm_a)
    if op == "ltlt":
        n = wn.shape[0]
        ell = unit_lower_from_storage(result["work"])
        t = result["tri"].to_dense()
        perm = result["piv"].permutation(n)
        return float(np.linalg.norm(a64[perm][:, perm] - ell @ t @ ell.T) / norm_a)
    raise ValueError(op)


def bench_row(
    op: str, n: int, m: int, k: int, dtype: DType, tree: ControlNode, repeats: int, seed: int
) -> list[str]:
    data = gen_matrix(op, n, m, k, dtype, seed)
    if op == "gemm":
        res = _bench_gemm(data, n, m, k, dtype, tree, repeats)
    else:
        res = _bench_factor(op, data, n, m, dtype, tree, repeats)
    cfg = default_config(dtype).with_overrides(tree.kernel)
    gflops = _flops(op, n, m, k) / res.time_s / 1e9
    return [
        op,
        str(n),
        tree_descriptor(tree),
        str(cfg.mc),
        str(cfg.kc),
        str(cfg.nc),
        str(cfg.mr),
        str(cfg.nr),
        str(tree.ways),
        repr(res.time_s),
        repr(gflops),
        "" if res.max_rel_err is None else repr(res.max_rel_err),
    ]


# ---------------------------------------------------------------------------
# check suites
# ---------------------------------------------------------------------------


def _suite_views() -> Optional[str]:
    for n, bs in ((0, 3), (5, 2), (7, 7), (64, 5)):
        steps = list(partition_steps(n, bs))
        covered = [i for s in steps for i in range(s.r1.start, s.r1.end)]
        if covered != list(range(n)):
            return f"partition_steps({n},{bs}) does not cover the index range"
    for mn in range(1, 9):
        v = make_view(mn, mn, fill="sequence")
        addrs = v.transposed().addresses().ravel()
        if len(set(addrs.tolist())) != mn * mn:
            return "address map not injective"
    v = make_view(4, 4, fill="sequence")
    s = v.subview(Range(1, 2), Range(1, 2))
    if s.storage is not v.storage or s.item(0, 0) != v.item(1, 1):
        return "subview is not an alias"
    return None


def _suite_gemm() -> Optional[str]:
    rng = _rng(11)
    for dtype in (DType.F64, DType.F32):
        eps = dtype.eps
        for _ in range(10):
            m, n, k = (int(x) for x in rng.integers(1, 49, 3))
            a = make_view(m, k, dtype, fill=rng.uniform(-1, 1, (m, k)))
            b = make_view(k, n, dtype, fill=rng.uniform(-1, 1, (k, n)))
            c = make_view(m, n, dtype)
            cref = make_view(m, n, dtype)
            gemm(1.0, a, b, 0.0, c)
            oracle.gemm_naive(1.0, a, b, 0.0, cref)
            bound = 4 * k * eps * float(
                np.abs(a.to_numpy()).max() * np.abs(b.to_numpy()).max() + 1e-30
            )
            if float(np.abs(c.to_numpy() - cref.to_numpy()).max()) > bound:
                return f"oracle mismatch at {m}x{n}x{k} {dtype}"
    n = 96
    a = make_view(n, n, fill=rng.uniform(-1, 1, (n, n)))
    b = make_view(n, n, fill=rng.uniform(-1, 1, (n, n)))
    outs = []
    for ways in (1, 2, 4):
        c = make_view(n, n)
        gemm(1.0, a, b, 0.0, c, ways=ways)
        outs.append(c.to_numpy().tobytes())
    if not (outs[0] == outs[1] == outs[2]):
        return "outputs differ across ways"
    return None


def _suite_sandwich() -> Optional[str]:
    rng = _rng(13)
    n, k = 24, 18
    x = rng.uniform(-1, 1, (n, n))
    a = make_view(n, k, fill=rng.uniform(-1, 1, (n, k)))
    t = rng.uniform(-1, 1, k - 1)
    fused = make_view(n, n, fill=x)
    workspace.reset_peak()
    sandwich_skew(fused, a, t)
    cfg = default_config(DType.F64)
    if workspace.peak_elements > cfg.mc * cfg.kc + cfg.kc * cfg.nc:
        return f"workspace peak {workspace.peak_elements} exceeds pack-buffer bound"
    td = np.zeros((k, k))
    for i, v in enumerate(t):
        td[i + 1, i] = v
        td[i, i + 1] = -v
    an = a.to_numpy()
    ref = x - an @ td @ an.T
    fn = fused.to_numpy()
    if float(np.abs(np.tril(fn) - np.tril(ref)).max()) > 8 * k * DType.F64.eps * float(np.abs(an).max() ** 2 * np.abs(td).max() * k + 1):
        return "fused product disagrees with the unfused reference"
    if np.triu(fn, 1).tobytes() != np.triu(x, 1).tobytes():
        return "strict upper triangle was modified"
    return None


def _suite_cholesky() -> Optional[str]:
    rng = _rng(17)
    n = 80
    mmat = rng.uniform(-1, 1, (n, n))
    a0 = mmat @ mmat.T + n * np.eye(n)
    ref = make_view(n, n, fill=a0)
    cholesky(ref, tree=ControlNode("cholesky", "unblocked3"))
    lref = np.tril(ref.to_numpy())
    scale = 100 * n * DType.F64.eps * float(np.linalg.norm(a0)) / n
    for var in (1, 2, 3):
        for bs in (7, 32):
            w = make_view(n, n, fill=a0)
            cholesky(w, tree=ControlNode("cholesky", var, bs=bs))
            if float(np.abs(np.tril(w.to_numpy()) - lref).max()) > scale:
                return f"variant {var} bs={bs} disagrees with the unblocked factor"
    wl = make_view(n, n, fill=a0)
    wu = make_view(n, n, fill=a0)
    cholesky(wl, "lower")
    cholesky(wu, "upper")
    if wl.to_numpy().tobytes() != wu.transposed().to_numpy().tobytes():
        return "upper-via-transpose is not bitwise identical"
    return None


def _suite_lu() -> Optional[str]:
    rng = _rng(19)
    n = 60
    a0 = rng.uniform(-1, 1, (n, n)) + n * np.eye(n)
    w = make_view(n, n, fill=a0)
    piv = lu_partial(w, tree=ControlNode("lu", "blocked", bs=8))
    wn = w.to_numpy()
    ell = np.tril(wn, -1) + np.eye(n)
    u = np.triu(wn)
    res = np.linalg.norm(a0[piv.permutation(n)] - ell @ u) / np.linalg.norm(a0)
    if res > 10 * n * DType.F64.eps:
        return f"reconstruction residual {res:.2e}"
    b = make_view(n, 3, fill=rng.uniform(-1, 1, (n, 3)))
    b0 = b.to_numpy().copy()
    lu_solve(w, piv, b)
    res = np.linalg.norm(a0 @ b.to_numpy() - b0) / np.linalg.norm(b0)
    if res > 10 * n * DType.F64.eps:
        return f"solve residual {res:.2e}"
    return None


def _suite_qr() -> Optional[str]:
    rng = _rng(23)
    m, n = 60, 40
    a0 = rng.uniform(-1, 1, (m, n))
    w = make_view(m, n, fill=a0)
    refl = qr_householder(w, tree=ControlNode("qr", "blocked", bs=8))
    q = form_q(w, refl)
    r = np.triu(w.to_numpy())
    if np.linalg.norm(a0 - q @ r) / np.linalg.norm(a0) > 10 * m * DType.F64.eps:
        return "reconstruction residual too large"
    if np.linalg.norm(q.T @ q - np.eye(m)) > 10 * m * DType.F64.eps:
        return "Q drifted from orthogonal"
    return None


def _suite_ltlt() -> Optional[str]:
    rng = _rng(29)
    for n, tree in (
        (32, ControlNode("ltlt", "unblocked")),
        (32, ControlNode("ltlt", "blocked", bs=4)),
    ):
        mmat = rng.uniform(-1, 1, (n, n))
        x0 = mmat - mmat.T
        w = make_view(n, n, fill=x0)
        piv, tri = ltlt_pivoted(w, tree=tree)
        ell = unit_lower_from_storage(w)
        perm = piv.permutation(n)
        res = np.linalg.norm(x0[perm][:, perm] - ell @ tri.to_dense() @ ell.T) / np.linalg.norm(x0)
        if res > 10 * n * DType.F64.eps:
            return f"reconstruction residual {res:.2e} ({tree_descriptor(tree)})"
    for n in (2, 4, 6, 8):
        mmat = rng.uniform(-1, 1, (n, n))
        x0 = mmat - mmat.T
        pf = pfaffian(make_view(n, n, fill=x0))
        pfo = oracle.pfaffian_combinatorial(x0)
        if abs(pf - pfo) > 1e-10 * max(1.0, abs(pfo)):
            return f"pfaffian mismatch at n={n}"
    return None


def _suite_tensor() -> Optional[str]:
    rng = _rng(31)
    t = make_tensor((3, 2, 3), fill="sequence")
    bsv = block_scatter(t, [0, 2], [1], 4, 4)
    for i in range(bsv.m):
        for j in range(bsv.n):
            i0, i2 = divmod(i, 3)
            if t.storage[bsv.rscat[i] + bsv.cscat[j]] != t.item((i0, j, i2)):
                return "scatter addressing mismatch"
    for _ in range(10):
        sizes = {l: int(rng.integers(1, 5)) for l in "abck"}
        spec = ContractionSpec("abk", "kc", "abc")
        a = make_tensor((sizes["a"], sizes["b"], sizes["k"]), fill=rng.uniform(-1, 1, (sizes["a"], sizes["b"], sizes["k"])))
        b = make_tensor((sizes["k"], sizes["c"]), fill=rng.uniform(-1, 1, (sizes["k"], sizes["c"])))
        c1 = make_tensor((sizes["a"], sizes["b"], sizes["c"]))
        c2 = make_tensor((sizes["a"], sizes["b"], sizes["c"]))
        contract(1.0, a, b, 0.0, c1, spec)
        oracle.contract_naive(1.0, a, b, 0.0, c2, spec)
        if not np.allclose(c1.to_numpy(), c2.to_numpy(), atol=4 * sizes["k"] * DType.F64.eps * 2):
            return "contraction disagrees with the nested-loop reference"
        c3 = make_tensor((sizes["a"], sizes["b"], sizes["c"]))
        contract(1.0, a, b, 0.0, c3, spec, fold=False)
        if c1.to_numpy().tobytes() != c3.to_numpy().tobytes():
            return "fold on/off results differ"
    return None


def _suite_control() -> Optional[str]:
    trees = list(enumerate_trees("cholesky", (1, 2, 3), (64, 128), 1))
    if len(trees) != 18:
        return f"expected 18 enumerated trees, got {len(trees)}"
    for tree in trees:
        if control.validate(tree, op="cholesky"):
            return "enumerated tree fails validation"
        back = control.parse_tree(control.tree_to_json(tree))
        if back != tree:
            return "serialize/parse round trip changed the tree"
    try:
        control.parse_tree('{"op":"cholesky","variant":"unblocked1","bs":8}')
        return "bs on an unblocked node was accepted"
    except TreeValidationError:
        pass
    return None


_SUITES: dict[str, Callable[[], Optional[str]]] = {
    "views": _suite_views,
    "control": _suite_control,
    "gemm": _suite_gemm,
    "sandwich": _suite_sandwich,
    "cholesky": _suite_cholesky,
    "lu": _suite_lu,
    "qr": _suite_qr,
    "ltlt": _suite_ltlt,
    "tensor": _suite_tensor,
}


def cmd_check(args: argparse.Namespace) -> int:
    names = list(_SUITES)
    if args.op is not None:
        if args.op not in _SUITES:
            print(f"unknown suite {args.op!r}; choose from {names}", file=sys.stderr)
            return 2
        names = [args.op]
    forced_fail = os.environ.get(FAIL_KNOB, "")
    status = 0
    for name in names:
        detail = _SUITES[name]()
        if detail is None and name == forced_fail:
            detail = f"forced failure via {FAIL_KNOB}"
        if detail is None:
            print(f"PASS {name}")
        else:
            print(f"FAIL {name}: {detail}")
            status = 1
    return status


# ---------------------------------------------------------------------------
# bench / sweep commands
# ---------------------------------------------------------------------------


def _load_tree(args: argparse.Namespace, op: str, n: int, dtype: DType) -> ControlNode:
    if args.tree is not None:
        with open(args.tree, "r", encoding="utf-8") as fh:
            tree = control.parse_tree(fh.read())
        control.check_valid(tree, op=op)
        return tree
    return default_tree(op, n, dtype)


def cmd_bench(args: argparse.Namespace) -> int:
    if args.repeats < 3:
        print("--repeats must be >= 3 (median reported)", file=sys.stderr)
        return 2
    dtype = DType.parse(args.dtype)
    n = args.n
    m = args.m if args.m is not None else n
    k = args.k if args.k is not None else n
    try:
        tree = _load_tree(args, args.op, n, dtype)
        if args.ways is not None:
            tree = tree.with_ways(args.ways)
        row = bench_row(args.op, n, m, k, dtype, tree, args.repeats, args.seed)
    except (TreeParseError, TreeValidationError, OSError) as e:
        print(str(e), file=sys.stderr)
        return 2
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    writer.writerow(row)
    return 0


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.repeats < 3:
        print("--repeats must be >= 3 (median reported)", file=sys.stderr)
        return 2
    dtype = DType.parse(args.dtype)
    n = args.n
    m = args.m if args.m is not None else n
    k = args.k if args.k is not None else n
    variants = _parse_int_list(args.variants)
    block_sizes = _parse_int_list(args.bs)
    ways_list = _parse_int_list(args.ways) if args.ways else [1]
    try:
        trees = list(enumerate_trees(args.op, variants, block_sizes, args.depth))
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return 2
    rows = []
    for tree in trees:
        for ways in ways_list:
            rows.append(bench_row(args.op, n, m, k, dtype, tree.with_ways(ways), args.repeats, args.seed))
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER.split(","))
            writer.writerows(rows)
    except OSError as e:
        print(f"cannot write {args.out}: {e}", file=sys.stderr)
        return 2
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockfam",
        description="Blocked linear-algebra algorithm families: checks, benchmarks, sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run correctness suites")
    p_check.add_argument("op", nargs="?", default=None, help="restrict to one suite")
    p_check.set_defaults(fn=cmd_check)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--op", required=True, choices=BENCH_OPS)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--m", type=int, default=None, help="rows (gemm/qr); defaults to n")
        p.add_argument("--k", type=int, default=None, help="inner dim (gemm); defaults to n")
        p.add_argument("--dtype", default="f64", choices=("f32", "f64"))
        p.add_argument("--repeats", type=int, default=3, help="timed repeats, median reported")
        p.add_argument("--seed", type=int, default=42)

    p_bench = sub.add_parser("bench", help="one timed run; CSV row on stdout")
    add_common(p_bench)
    p_bench.add_argument("--tree", default=None, help="control-tree JSON file")
    p_bench.add_argument("--ways", type=int, default=None)
    p_bench.set_defaults(fn=cmd_bench)

    p_sweep = sub.add_parser("sweep", help="enumerate control trees; CSV file")
    add_common(p_sweep)
    p_sweep.add_argument("--variants", default="1,2,3", help="comma list of blocked variants")
    p_sweep.add_argument("--bs", default="64,128", help="comma list of block sizes")
    p_sweep.add_argument("--depth", type=int, default=1, choices=(1, 2, 3))
    p_sweep.add_argument("--ways", default="1", help="comma list of parallelism widths")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.set_defaults(fn=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BlockfamError as e:
        print(str(e), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
