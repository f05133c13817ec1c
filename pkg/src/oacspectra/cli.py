"""Command-line front end: spectra, censuses, closed forms, reproductions.

Artifacts are CSV files (UTF-8, LF, 17-significant-digit floats) plus a
JSON manifest per run; the reproduce subcommand also renders a PNG next to
each CSV.  Exit codes: 0 ok, 1 library error, 2 usage, 3 budget exceeded,
4 identity violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

from .errors import IdentityViolation, OacError, TooLarge

REPRODUCE_TARGETS = (
    "shift-dist-n",
    "shift-dist-n1",
    "shift-dist-d",
    "hds-all",
    "hds-zoom",
    "psi12-curves",
    "psi3-divergent",
)

_REPRO_N = 20
_REPRO_R = 0.5


def _set_threads(threads: int | None) -> None:
    """Pin BLAS pools before numpy loads; flag wins over SPECTRA_THREADS."""
    value = threads if threads is not None else os.environ.get("SPECTRA_THREADS")
    if value is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(value)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int,)):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_csv(path: Path, header: list[str], rows, *, allow_nan: bool = False) -> str:
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise OacError(f"row width {len(row)} != header width {len(header)}")
        for v in row:
            if isinstance(v, float) and math.isnan(v) and not allow_nan:
                raise OacError(f"NaN in column set {header} of {path.name}")
        lines.append(",".join(_fmt(v) for v in row))
    data = ("\n".join(lines) + "\n").encode("utf-8")
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


class Emitter:
    """Collects artifacts of one run and writes the manifest at the end."""

    def __init__(self, args, command: str, params: dict):
        self.outdir = Path(args.out)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.params = params
        self.outputs: dict[str, str] = {}
        self.t0 = time.perf_counter()
        self.plot = not getattr(args, "no_plot", False)

    def csv(self, stem: str, header: list[str], rows, *, allow_nan: bool = False) -> Path:
        path = self.outdir / f"{stem}.csv"
        digest = _write_csv(path, header, rows, allow_nan=allow_nan)
        self.outputs[path.name] = digest
        print(f"wrote {path} (sha256={digest[:16]}...)")
        return path

    def png(self, stem: str, render) -> None:
        if not self.plot:
            return
        path = self.outdir / f"{stem}.png"
        render(str(path))
        self.outputs[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
        print(f"wrote {path}")

    def finish(self) -> int:
        from . import __version__

        manifest = {
            "tool": "oacspectra",
            "version": __version__,
            "command": self.command,
            "params": self.params,
            "wall_time_s": round(time.perf_counter() - self.t0, 3),
            "outputs": self.outputs,
        }
        path = self.outdir / f"{self.command}.manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")
        return 0


def _rate(args):
    from .algebraic import AlgebraicRate

    if getattr(args, "alpha", None):
        rate = AlgebraicRate.parse(args.alpha)
        return rate, {"alpha": args.alpha, "r": rate.r_float}
    if getattr(args, "r", None) is None:
        raise OacError("need --r or --alpha")
    return args.r, {"r": args.r}


def _rate_flags(sub, *, required: bool = True) -> None:
    group = sub.add_mutually_exclusive_group(required=required)
    group.add_argument("--r", type=float, help="rate as a decimal in (0, 1]")
    group.add_argument("--alpha", help='integer polynomial in x = 2^r, e.g. "x^2-x-1"')


# ---------------------------------------------------------------------------
# handlers


def _cmd_encode(args) -> int:
    from .encoder import BitBlock, CodeParams, encode

    rate, rdesc = _rate(args)
    p = CodeParams(args.n, rate)
    x = BitBlock.from_string(args.word)
    res = encode(x, p)
    print(f"word={x} n={p.n} r={p.r_value:.10g} -> l={res.l:.12g} ell={res.ell:.12g} m={res.m}")
    em = Emitter(args, "encode", {"n": args.n, **rdesc, "word": args.word})
    em.csv("encode", ["word", "l", "ell", "m"], [(str(x), res.l, res.ell, res.m)])
    return em.finish()


def _cmd_partition(args) -> int:
    from .encoder import BitBlock, CodeParams, partition_cosets

    rate, rdesc = _rate(args)
    p = CodeParams(args.n, rate)
    cp = partition_cosets(p)
    em = Emitter(args, "partition", {"n": args.n, **rdesc})
    rows = [
        (m, str(BitBlock.from_word(int(w), p.n)))
        for m in sorted(cp.cosets)
        for w in cp.cosets[m]
    ]
    em.csv("partition", ["m", "word"], rows)
    sizes = cp.sizes
    print("coset sizes:", " ".join(f"{m}:{sizes[m]}" for m in sorted(sizes)))
    return em.finish()


def _cmd_ccs(args) -> int:
    import numpy as np

    from .ccs import backward_ccs, ccs_square_integral, empirical_ccs, solve_asymptotic_ccs
    from .encoder import CodeParams

    rate, rdesc = _rate(args)
    em = Emitter(
        args,
        "ccs",
        {**rdesc, "B": args.bins, "tol": args.tol, "mode": args.mode, "n": args.n},
    )
    if args.mode == "asymptotic":
        grid = solve_asymptotic_ccs(rate, args.bins, args.tol)
    elif args.mode == "backward":
        if args.n is None:
            raise OacError("backward mode needs --n")
        levels = backward_ccs(CodeParams(args.n, rate), args.bins)
        wanted = args.level if args.level is not None else 0
        grid = next(g for g in levels if g.level == wanted)
    else:
        if args.n is None:
            raise OacError("empirical mode needs --n")
        grid = empirical_ccs(CodeParams(args.n, rate), args.bins)
    em.csv("ccs", ["u", "f"], list(zip(grid.nodes.tolist(), grid.bins.tolist())))
    print(f"mode={args.mode} mass={grid.mass():.9f} integral(f^2)={ccs_square_integral(grid):.9f}")
    return em.finish()


def _cmd_hds(args) -> int:
    from .ccs import solve_asymptotic_ccs
    from .encoder import CodeParams
    from .hds import (
        SOFT_REL_TOL_NOTE,
        hds_binomial,
        hds_exhaustive,
        hds_fast,
        hds_hard,
        hds_mixed,
        hds_soft,
    )

    rate, rdesc = _rate(args)
    p = CodeParams(args.n, rate)
    dmin = args.dmin if args.dmin is not None else 0
    dmax = args.dmax if args.dmax is not None else p.n
    ds = range(dmin, dmax + 1)
    needs_f = args.method in ("binomial", "fast", "mixed")
    f = solve_asymptotic_ccs(p.r_value, args.bins, args.tol) if needs_f else None
    if args.method == "exhaustive":
        table = hds_exhaustive(p)
    elif args.method == "binomial":
        table = hds_binomial(p, f)
    elif args.method == "soft":
        table = hds_soft(p, ds, budget=args.budget)
    elif args.method == "hard":
        table = hds_hard(p, ds, budget=args.budget)
    elif args.method == "fast":
        table = hds_fast(p, f, ds if (args.dmin is not None or args.dmax is not None) else None)
    else:
        table = hds_mixed(p, f, budget=args.budget)
    em = Emitter(
        args,
        "hds",
        {"n": args.n, **rdesc, "method": args.method, "dmin": dmin, "dmax": dmax},
    )
    methods = getattr(table, "mixed_methods", None)
    rows = [
        (d, psi, methods[d] if methods else meth)
        for d, psi, meth in table.rows()
        if dmin <= d <= dmax
    ]
    em.csv("hds", ["d", "psi", "method"], rows)
    shown = ", ".join(f"psi({d})={psi:.6g}" for d, psi, _ in rows[-3:])
    print(f"method={args.method}: {shown}")
    if args.method in ("soft", "mixed"):
        print(f"note: {SOFT_REL_TOL_NOTE}")
    return em.finish()


def _cmd_shift_dist(args) -> int:
    from .ccs import solve_asymptotic_ccs
    from .encoder import CodeParams
    from .shifts import IndexSet, shift_census, theoretical_w_pdf

    rate, rdesc = _rate(args)
    p = CodeParams(args.n, rate)
    scope = None
    if args.j:
        scope = IndexSet(tuple(int(t) for t in args.j.split(",")))
    h = shift_census(args.d, p, scope, budget=args.budget)
    rows = [
        (w, fw, "exp")
        for w, fw in zip(h.w_points().tolist(), h.density().tolist())
    ]
    if args.theory != "none":
        f = solve_asymptotic_ccs(p.r_value, args.bins, args.tol)
        w, fw = theoretical_w_pdf(
            p, f, profile=args.theory, k=args.k, d=args.d, bins=1024
        )
        rows += [(float(a), float(b), f"th-{args.theory}") for a, b in zip(w, fw)]
    em = Emitter(
        args,
        "shift-dist",
        {"n": args.n, **rdesc, "d": args.d, "scope": str(scope) if scope else "all"},
    )
    em.csv("shift-dist", ["w", "fW", "scope"], rows)
    print(f"census d={args.d} scope={'all' if scope is None else scope}: {h.total} shifts")
    return em.finish()


def _cmd_psi_closed(args) -> int:
    from .algebraic import psi1_closed, psi2_closed

    if args.r is not None:
        rs = [args.r]
    else:
        steps = args.steps
        rs = [args.rmin + (args.rmax - args.rmin) * i / (steps - 1) for i in range(steps)]
    rows = []
    for r in rs:
        v1, j1 = psi1_closed(r)
        c2 = psi2_closed(r)
        rows.append((r, v1, c2.value, j1, c2.j21, c2.j22))
    em = Emitter(
        args,
        "psi-closed",
        {"r": args.r, "rmin": args.rmin, "rmax": args.rmax, "steps": args.steps},
    )
    em.csv("psi-closed", ["r", "psi1", "psi2", "J1", "J21", "J22"], rows)
    last = rows[-1]
    print(f"r={last[0]:.6g}: psi1={last[1]:.6g} psi2={last[2]:.6g} J1={last[3]} J21={last[4]} J22={last[5]}")
    return em.finish()


def _cmd_psi3(args) -> int:
    from .algebraic import AlgebraicRate, find_zero_pairs, psi3_analytic
    from .encoder import CodeParams
    from .hds import hds_soft

    rate = AlgebraicRate.parse(args.alpha)
    if args.n is not None:
        ns = [args.n]
    else:
        ns = list(range(args.nmin, args.nmax + 1))
    pairs = find_zero_pairs(rate)
    rows = []
    for n in ns:
        res = psi3_analytic(rate, n)
        rows.append((n, res.value, "analytic"))
        if args.with_soft:
            rows.append((n, float(hds_soft(CodeParams(n, rate), [3]).psi[3]), "soft"))
    em = Emitter(args, "psi3", {"alpha": args.alpha, "ns": ns, "with_soft": args.with_soft})
    em.csv("psi3", ["n", "psi", "kind"], rows)
    res = psi3_analytic(rate, ns[-1])
    flag = "" if res.stable else f" (below stabilization horizon n={res.horizon}; truncated sum)"
    print(f"zero pairs: {set(pairs.pairs) if pairs.pairs else '{}'} (search bound {pairs.search_bound})")
    print(f"psi3(n={ns[-1]}) = {res.value:.10g}{flag}")
    return em.finish()


# ---------------------------------------------------------------------------
# reproduce


def _repro_shift_dist_n(args, em: Emitter) -> None:
    from .ccs import solve_asymptotic_ccs
    from .encoder import CodeParams
    from .plots import line_figure
    from .shifts import IndexSet, shift_census, theoretical_w_pdf

    p = CodeParams(_REPRO_N, _REPRO_R)
    f = solve_asymptotic_ccs(p.r_value, 4096, 1e-9)
    h = shift_census(p.n, p, IndexSet.full(p.n), budget=args.budget)
    rows = [(w, fw, "exp") for w, fw in zip(h.w_points().tolist(), h.density().tolist())]
    wt, ft = theoretical_w_pdf(p, f, profile="full", bins=1024)
    rows += [(float(a), float(b), "th") for a, b in zip(wt, ft)]
    em.csv("shift-dist-n", ["w", "fW", "scope"], rows)
    em.png(
        "shift-dist-n",
        lambda path: line_figure(
            path,
            [("th", wt, ft), ("exp", h.w_points(), h.density())],
            xlabel="w",
            ylabel="f_W(w)",
            title=f"normalized shift density, d = n = {p.n}",
        ),
    )


def _repro_shift_dist_n1(args, em: Emitter) -> None:
    from .ccs import solve_asymptotic_ccs
    from .encoder import CodeParams
    from .plots import line_figure
    from .shifts import IndexSet, shift_census, theoretical_w_pdf

    p = CodeParams(_REPRO_N, _REPRO_R)
    f = solve_asymptotic_ccs(p.r_value, 4096, 1e-9)
    rows = []
    series = []
    for k in (1, 2):
        h = shift_census(p.n - 1, p, IndexSet.gap(p.n, k), budget=args.budget)
        rows += [
            (w, fw, f"exp-k{k}")
            for w, fw in zip(h.w_points().tolist(), h.density().tolist())
        ]
        wt, ft = theoretical_w_pdf(p, f, profile="gap", k=k, bins=1024)
        rows += [(float(a), float(b), f"th-k{k}") for a, b in zip(wt, ft)]
        series += [(f"th-k{k}", wt, ft), (f"exp-k{k}", h.w_points(), h.density())]
    em.csv("shift-dist-n1", ["w", "fW", "scope"], rows)
    em.png(
        "shift-dist-n1",
        lambda path: line_figure(
            path, series, xlabel="w", ylabel="f_W(w)",
            title=f"shift density with one gap, d = {p.n - 1}",
        ),
    )


def _repro_shift_dist_d(args, em: Emitter) -> None:
    from .ccs import solve_asymptotic_ccs
    from .encoder import CodeParams
    from .plots import line_figure
    from .shifts import shift_census, theoretical_w_pdf

    p = CodeParams(_REPRO_N, _REPRO_R)
    f = solve_asymptotic_ccs(p.r_value, 4096, 1e-9)
    rows = []
    series = []
    wt, ft = theoretical_w_pdf(p, f, profile="full", bins=1024)
    rows += [(float(a), float(b), "th") for a, b in zip(wt, ft)]
    series.append(("th", wt, ft))
    for d in range(p.n - 1, p.n - 11, -2):
        h = shift_census(d, p, budget=args.budget)
        w64, f64 = h.rebin(128)
        rows += [(float(a), float(b), f"exp-d{d}") for a, b in zip(w64, f64)]
        series.append((f"exp-d{d}", w64, f64))
    em.csv("shift-dist-d", ["w", "fW", "scope"], rows)
    em.png(
        "shift-dist-d",
        lambda path: line_figure(
            path, series, xlabel="w", ylabel="f_W|d(w)",
            title="aggregate shift density for d near n",
        ),
    )


def _hds_five_method_rows(args, dmin: int) -> list[tuple[int, float, str]]:
    from .ccs import solve_asymptotic_ccs
    from .encoder import CodeParams
    from .hds import hds_binomial, hds_exhaustive, hds_fast, hds_soft_and_hard

    p = CodeParams(_REPRO_N, _REPRO_R)
    f = solve_asymptotic_ccs(p.r_value, 4096, 1e-9)
    ds = range(max(1, dmin), p.n + 1)
    rows: list[tuple[int, float, str]] = []
    ex = hds_exhaustive(p)
    rows += [(d, float(ex.psi[d]), "exhaustive") for d in ds]
    bi = hds_binomial(p, f)
    rows += [(d, float(bi.psi[d]), "binomial") for d in ds]
    soft, hard = hds_soft_and_hard(p, ds, budget=args.budget)
    rows += [(d, float(soft.psi[d]), "soft") for d in ds]
    rows += [(d, float(hard.psi[d]), "hard") for d in ds]
    fast = hds_fast(p, f)
    rows += [(d, float(fast.psi[d]), "fast") for d in fast.covered() if d >= dmin]
    return rows


def _repro_hds(args, em: Emitter, *, zoom: bool) -> None:
    from .plots import line_figure

    dmin = _REPRO_N - 6 if zoom else 1
    rows = _hds_five_method_rows(args, dmin)
    stem = "hds-zoom" if zoom else "hds-all"
    em.csv(stem, ["d", "psi", "method"], rows)

    def render(path: str) -> None:
        import numpy as np

        series = []
        for method in ("th-binomial", "th-soft", "th-hard", "th-fast", "exhaustive"):
            name = method.removeprefix("th-")
            pts = sorted((d, v) for d, v, m in rows if m == name)
            if pts:
                label = method if name != "exhaustive" else "exp"
                series.append(
                    (label, np.array([d for d, _ in pts]), np.array([v for _, v in pts]))
                )
        line_figure(
            path, series, xlabel="d", ylabel="psi(d;n)", logy=True,
            title=f"distance spectrum estimates, n = {_REPRO_N}",
        )

    em.png(stem, render)


def _repro_psi12(args, em: Emitter) -> None:
    import numpy as np

    from .algebraic import psi1_closed, psi2_closed
    from .plots import line_figure

    rows = []
    for i in range(101):
        r = 0.5 + 0.005 * i
        v1, j1 = psi1_closed(r)
        c2 = psi2_closed(r)
        rows.append((r, v1, c2.value, j1, c2.j21, c2.j22))
    em.csv("psi12-curves", ["r", "psi1", "psi2", "J1", "J21", "J22"], rows)
    arr = np.array([[row[0], row[1], row[2]] for row in rows])
    em.png(
        "psi12-curves",
        lambda path: line_figure(
            path,
            [("psi1", arr[:, 0], arr[:, 1]), ("psi2", arr[:, 0], arr[:, 2])],
            xlabel="r", ylabel="limit value", title="psi(1) and psi(2) against rate",
        ),
    )


def _repro_psi3(args, em: Emitter) -> None:
    import numpy as np

    from .algebraic import AlgebraicRate, psi3_analytic
    from .encoder import CodeParams
    from .hds import hds_soft
    from .plots import line_figure

    rows = []
    for name, alpha in (("golden", "x^2-x-1"), ("plastic", "x^3-x-1")):
        rate = AlgebraicRate.parse(alpha)
        for n in range(5, 25):
            rows.append((n, psi3_analytic(rate, n).value, f"{name}-analytic"))
            rows.append((n, float(hds_soft(CodeParams(n, rate), [3]).psi[3]), f"{name}-soft"))
    em.csv("psi3-divergent", ["n", "psi", "kind"], rows)

    def render(path: str) -> None:
        series = []
        for kind in ("golden-analytic", "golden-soft", "plastic-analytic", "plastic-soft"):
            pts = sorted((n, v) for n, v, k in rows if k == kind)
            label = ("th-" + kind) if kind.endswith("analytic") else kind
            series.append((label, np.array([n for n, _ in pts]), np.array([v for _, v in pts])))
        line_figure(
            path, series, xlabel="n", ylabel="psi(3;n)",
            title="divergent psi(3;n): analytic law against enumeration",
        )

    em.png("psi3-divergent", render)


def _cmd_reproduce(args) -> int:
    target = args.target
    em = Emitter(args, f"reproduce-{target}", {"target": target, "n": _REPRO_N, "r": _REPRO_R})
    if target == "shift-dist-n":
        _repro_shift_dist_n(args, em)
    elif target == "shift-dist-n1":
        _repro_shift_dist_n1(args, em)
    elif target == "shift-dist-d":
        _repro_shift_dist_d(args, em)
    elif target == "hds-all":
        _repro_hds(args, em, zoom=False)
    elif target == "hds-zoom":
        _repro_hds(args, em, zoom=True)
    elif target == "psi12-curves":
        _repro_psi12(args, em)
    elif target == "psi3-divergent":
        _repro_psi3(args, em)
    else:  # pragma: no cover - argparse choices guard this
        raise OacError(f"unknown target {target}")
    return em.finish()


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oacspectra",
        description="coset cardinality and Hamming distance spectra of overlapped arithmetic codes",
    )
    parser.add_argument("--out", default="spectra-out", help="output directory")
    parser.add_argument("--threads", type=int, help="BLAS thread count (default: all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("encode", help="encode one word")
    s.add_argument("--n", type=int, required=True)
    _rate_flags(s)
    s.add_argument("--word", required=True)
    s.set_defaults(handler=_cmd_encode)

    s = sub.add_parser("partition", help="full coset partition (enumeration scale)")
    s.add_argument("--n", type=int, required=True)
    _rate_flags(s)
    s.set_defaults(handler=_cmd_partition)

    s = sub.add_parser("ccs", help="coset cardinality spectrum")
    _rate_flags(s)
    s.add_argument("--mode", choices=("asymptotic", "backward", "empirical"), default="asymptotic")
    s.add_argument("--n", type=int, help="block length for backward/empirical modes")
    s.add_argument("--level", type=int, help="level to export in backward mode (default 0)")
    s.add_argument("--bins", type=int, default=4096)
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(handler=_cmd_ccs)

    s = sub.add_parser("hds", help="Hamming distance spectrum")
    s.add_argument("--n", type=int, required=True)
    _rate_flags(s)
    s.add_argument(
        "--method",
        choices=("exhaustive", "binomial", "soft", "hard", "fast", "mixed"),
        default="mixed",
    )
    s.add_argument("--dmin", type=int)
    s.add_argument("--dmax", type=int)
    s.add_argument("--bins", type=int, default=4096)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--budget", type=float, default=4.2e9)
    s.set_defaults(handler=_cmd_hds)

    s = sub.add_parser("shift-dist", help="census of the quantized shift function")
    s.add_argument("--n", type=int, required=True)
    _rate_flags(s)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--j", help="comma-separated positions restricting to one index set")
    s.add_argument("--theory", choices=("none", "full", "gap", "generic"), default="none")
    s.add_argument("--k", type=int, help="gap slot for --theory gap")
    s.add_argument("--bins", type=int, default=4096)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--budget", type=float, default=4.2e9)
    s.set_defaults(handler=_cmd_shift_dist)

    s = sub.add_parser("psi-closed", help="closed forms of psi(1) and psi(2)")
    s.add_argument("--r", type=float)
    s.add_argument("--rmin", type=float, default=0.5)
    s.add_argument("--rmax", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=101)
    s.set_defaults(handler=_cmd_psi_closed)

    s = sub.add_parser("psi3", help="analytic psi(3;n) for an algebraic rate")
    s.add_argument("--alpha", required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--nmin", type=int, default=5)
    s.add_argument("--nmax", type=int, default=20)
    s.add_argument("--with-soft", action="store_true")
    s.set_defaults(handler=_cmd_psi3)

    s = sub.add_parser("reproduce", help="rebuild a reference figure's data (and PNG)")
    s.add_argument("target", choices=REPRODUCE_TARGETS)
    s.add_argument("--budget", type=float, default=4.2e9)
    s.add_argument("--no-plot", action="store_true")
    s.set_defaults(handler=_cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _set_threads(args.threads)
    try:
        return args.handler(args)
    except TooLarge as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except IdentityViolation as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except OacError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
