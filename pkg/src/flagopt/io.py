"""Plain-text formats: matrix CSV, flag point files, separation manifests,
run traces and benchmark summaries."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BadInstance, BadSignature, FlagOptError
from .flag import FlagPoint, FlagSignature
from .objectives import SeparationInstance, separation_instance
from .optim import RunTrace

TRACE_HEADER = ("method", "iter", "objective", "grad_norm", "elapsed_s")
SUMMARY_HEADER = ("method", "mean_elapsed_s", "mean_iters", "final_grad_norm")


class ParseError(FlagOptError, ValueError):
    pass


def fmt(x: float) -> str:
    """Shortest round-trip representation."""
    return repr(float(x))


def format_matrix(A: np.ndarray) -> str:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return "".join(",".join(fmt(x) for x in row) + "\n" for row in A)


def parse_matrix(lines: Iterable[str]) -> np.ndarray:
    rows = []
    for i, line in enumerate(lines):
        line = line.strip()
        if not line:
            continue
        try:
            rows.append([float(x) for x in line.split(",")])
        except ValueError as exc:
            raise ParseError(f"line {i + 1}: {exc}") from None
    if not rows:
        raise ParseError("no matrix rows")
    if len({len(r) for r in rows}) != 1:
        raise ParseError("rows have different lengths")
    return np.array(rows)


def write_matrix(path, A: np.ndarray) -> None:
    Path(path).write_text(format_matrix(A))


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text().splitlines())


def parse_header(line: str) -> FlagSignature:
    """``"n;n_1,...,n_d"``."""
    try:
        n, dims = line.strip().split(";")
        return FlagSignature(int(n), tuple(int(x) for x in dims.split(",")))
    except BadSignature:
        raise
    except (ValueError, TypeError) as exc:
        raise ParseError(f"bad signature header {line.strip()!r}: {exc}") from None


def write_point(path, p: FlagPoint) -> None:
    Path(path).write_text(p.sig.header() + "\n" + format_matrix(p.V))


def read_point(path) -> tuple[FlagSignature, np.ndarray]:
    """Signature and raw ``V`` (not validated, so callers can diagnose it)."""
    lines = Path(path).read_text().splitlines()
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ParseError("empty point file")
    sig = parse_header(lines[0])
    V = parse_matrix(lines[1:])
    if V.shape != (sig.n, sig.n):
        raise ParseError(f"V has shape {V.shape}, header says n={sig.n}")
    return sig, V


def parse_manifest(path) -> tuple[list[Path], list[int]]:
    """``file1.csv,file2.csv;m1,m2`` with paths relative to the manifest."""
    path = Path(path)
    text = " ".join(ln.strip() for ln in path.read_text().splitlines() if ln.strip())
    if not text:
        raise ParseError("empty manifest")
    try:
        files, sizes = text.split(";")
        names = [f.strip() for f in files.split(",") if f.strip()]
        ms = [int(x) for x in sizes.split(",")]
    except ValueError as exc:
        raise ParseError(f"bad manifest: {exc}") from None
    if len(names) != len(ms):
        raise BadInstance(f"{len(names)} files but {len(ms)} block sizes")
    return [path.parent / f for f in names], ms


def read_instance(path) -> SeparationInstance:
    files, ms = parse_manifest(path)
    bases = []
    for f, m in zip(files, ms):
        U = read_matrix(f)
        if U.shape[1] != m:
            raise BadInstance(f"{f.name} has {U.shape[1]} columns, manifest says {m}")
        bases.append(U)
    return separation_instance(bases)


def write_instance(path, inst: SeparationInstance, stem: str = "U") -> None:
    path = Path(path)
    names = []
    for j, U in enumerate(inst.bases):
        name = f"{stem}{j + 1}.csv"
        write_matrix(path.parent / name, U)
        names.append(name)
    path.write_text(",".join(names) + ";" + ",".join(str(m) for m in inst.sizes) + "\n")


def trace_rows(trace: RunTrace, timing: bool = True) -> list[list[str]]:
    return [
        [trace.method, str(r.iter), fmt(r.objective), fmt(r.grad_norm), fmt(r.elapsed_s) if timing else "nan"]
        for r in trace.records
    ]


def write_trace(path, trace: RunTrace, timing: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        w.writerows(trace_rows(trace, timing))


def read_trace(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_summary(path, rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for method, t, iters, g in rows:
            w.writerow([method, fmt(t), fmt(iters), fmt(g)])
