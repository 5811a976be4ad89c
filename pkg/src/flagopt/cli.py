"""Command-line harness: ``bench``, ``separate`` and ``validate``.

Exit codes: 0 success, 1 a run did not converge or a point is invalid,
2 malformed input or configuration.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .errors import FlagOptError, LineSearchFailed
from .flag import EMBEDDINGS, FlagPoint, FlagSignature, embed, flag_validate
from .matcore import random_orthogonal
from .objectives import separation_objective, trace_objective
from .optim import METHODS, StopRule, coordinate_minimization, run_method


@dataclass(frozen=True)
class BenchConfig:
    n: int
    dims: tuple[int, ...]
    methods: tuple[str, ...]
    seed: int = 0
    grad_tol: float = 1e-5
    max_iters: int = 20_000
    repetitions: int = 1
    out: Path = Path("bench-out")
    deterministic: bool = False
    max_seconds: float | None = None

    def __post_init__(self):
        if not self.methods:
            raise ValueError("no methods selected")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; choose from {', '.join(METHODS)}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        FlagSignature(self.n, self.dims)


def bench_instance(sig: FlagSignature, rng: np.random.Generator):
    """Symmetrized standard normal ``A_k`` and a QR-random start."""
    As = []
    for _ in range(sig.d):
        G = rng.standard_normal((sig.n, sig.n))
        As.append((G + G.T) / 2)
    return As, FlagPoint(random_orthogonal(sig.n, rng), sig)


def bench(cfg: BenchConfig, log=print) -> int:
    sig = FlagSignature(cfg.n, cfg.dims)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    timing = not cfg.deterministic
    stop = StopRule(cfg.grad_tol, cfg.max_iters, cfg.max_seconds)
    results: dict[str, list] = {m: [] for m in cfg.methods}
    ok = True
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.repetitions)
    for rep, child in enumerate(children, start=1):
        inst_seq, order_seq = child.spawn(2)
        As, p0 = bench_instance(sig, np.random.default_rng(inst_seq))
        order_seed = int(order_seq.generate_state(1)[0])
        for method in cfg.methods:
            o = trace_objective(As)
            try:
                p, trace = run_method(method, o, p0, stop, seed=order_seed)
            except LineSearchFailed as exc:
                log(f"{method} rep {rep}: {exc}")
                ok = False
                continue
            ok &= trace.converged
            io.write_trace(out / f"trace_{method}_rep{rep}.csv", trace, timing)
            io.write_point(out / f"point_{method}_rep{rep}.csv", p)
            results[method].append(trace)
    rows = []
    for method, traces in results.items():
        if not traces:
            continue
        t = float(np.mean([tr.elapsed_s for tr in traces])) if timing else float("nan")
        iters = float(np.mean([tr.iterations for tr in traces]))
        g = float(max(tr.final_grad_norm for tr in traces))
        rows.append((method, t, iters, g))
        status = ",".join(sorted({tr.status for tr in traces}))
        log(f"{method:<12} mean_time={t:9.4f}s  mean_iters={iters:9.1f}  final_grad={g:.3e}  [{status}]")
    io.write_summary(out / "summary.csv", rows)
    return 0 if ok else 1


def separate(manifest, out, seed: int = 0, order: str = "cyclic", grad_tol: float = 1e-10,
             max_iters: int = 10_000, log=print) -> int:
    inst = io.read_instance(manifest)
    sig = inst.sig
    rng = np.random.default_rng(seed)
    p0 = FlagPoint(random_orthogonal(sig.n, rng), sig)
    o = separation_objective(inst)
    p, trace = coordinate_minimization(o, p0, StopRule(grad_tol, max_iters), order=order, seed=seed)
    io.write_point(out, p)
    log(f"F = {io.fmt(o.value(p))}")
    log(f"sweeps = {trace.iterations}, grad_norm = {trace.final_grad_norm:.3e}, status = {trace.status}")
    return 0


def validate(path, log=print) -> int:
    sig, V = io.read_point(path)
    p = FlagPoint(V, sig)
    for emb in EMBEDDINGS:
        diag = flag_validate(embed(p, emb), sig)
        if not diag:
            log(f"{emb}: {diag.message()}")
            return 1
    log("ok")
    return 0


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flagopt", description="Optimization on flag manifolds.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("bench", help="run the block-trace benchmark")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--dims", type=_ints, required=True, help="comma separated, e.g. 5,10")
    b.add_argument("--methods", default=",".join(METHODS), help=f"subset of {','.join(METHODS)}")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--tol", type=float, default=1e-5)
    b.add_argument("--max-iters", type=int, default=20_000)
    b.add_argument("--max-seconds", type=float, default=None)
    b.add_argument("--reps", type=int, default=1)
    b.add_argument("--out", type=Path, default=Path("bench-out"))
    b.add_argument("--deterministic", action="store_true",
                   help="write timings as nan so outputs are byte-identical across runs")

    s = sub.add_parser("separate", help="solve a subspace separation instance")
    s.add_argument("--manifest", type=Path, required=True)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--order", choices=("cyclic", "randomized", "printed"), default="cyclic")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iters", type=int, default=10_000)

    v = sub.add_parser("validate", help="check a flag point file")
    v.add_argument("file", type=Path)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "bench":
            cfg = BenchConfig(
                args.n, args.dims, tuple(m.strip() for m in args.methods.split(",") if m.strip()),
                args.seed, args.tol, args.max_iters, args.reps, args.out, args.deterministic,
                args.max_seconds,
            )
            return bench(cfg)
        if args.cmd == "separate":
            return separate(args.manifest, args.out, args.seed, args.order, args.tol, args.max_iters)
        return validate(args.file)
    except (FlagOptError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
