"""File formats: edge lists, CSV emitters, binary snapshots, manifests.

All text output is locale-independent ('.' decimal separator), floats carry
17 significant digits, and files are written atomically (temp + rename) so
interrupted runs never leave half-written outputs.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .dissim import DissimilarityMatrix
from .graphs import AdjacencyTimeSeries
from .isomirror import IsoMirror
from .localize import PiecewiseLinearFit
from .mirror import MirrorEmbedding

__all__ = [
    "fmt",
    "atomic_write_text",
    "write_edge_lists",
    "read_edge_lists",
    "write_snapshot_npz",
    "read_snapshot_npz",
    "write_dissimilarity_csv",
    "read_dissimilarity_csv",
    "write_mirror_csv",
    "write_isomirror_csv",
    "fit_text_block",
    "fit_csv_row",
    "write_manifest",
]


def fmt(x: float) -> str:
    """17-significant-digit decimal text; round-trips every double."""
    return f"{float(x):.17g}"


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path: Path, blob: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- edge-list format ----------------------------------------------------
#
# One file per time, named snapshot_<index>.edges, one edge per line
# "u v" (0-based), '#'-prefixed header carrying n and directedness, plus a
# times.csv sidecar mapping snapshot index to time value.


def write_edge_lists(tsg: AdjacencyTimeSeries, out_dir: Path,
                     directed: bool = False) -> list[Path]:
    out_dir = Path(out_dir)
    written = []
    for idx in range(tsg.m):
        a = tsg.graphs[idx]
        if directed:
            us, vs = np.nonzero(a)
        else:
            us, vs = np.nonzero(np.triu(a, 1))
        lines = [f"# n={tsg.n} directed={int(directed)}"]
        lines += [f"{u} {v}" for u, v in zip(us.tolist(), vs.tolist())]
        path = out_dir / f"snapshot_{idx:04d}.edges"
        atomic_write_text(path, "\n".join(lines) + "\n")
        written.append(path)
    times_path = out_dir / "times.csv"
    rows = ["index,time"] + [f"{i},{fmt(t)}" for i, t in enumerate(tsg.times)]
    atomic_write_text(times_path, "\n".join(rows) + "\n")
    written.append(times_path)
    return written


def _parse_edge_file(path: Path) -> tuple[int, bool, np.ndarray]:
    n = None
    directed = False
    pairs = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                key, _, value = token.partition("=")
                if key == "n":
                    n = int(value)
                elif key == "directed":
                    directed = bool(int(value))
            continue
        u, v = line.split()
        pairs.append((int(u), int(v)))
    if n is None:
        raise ValueError(f"{path}: missing '# n=...' header")
    a = np.zeros((n, n), dtype=np.uint8)
    for u, v in pairs:
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"{path}: edge ({u}, {v}) outside vertex range [0, {n})")
        a[u, v] = 1
        if not directed:
            a[v, u] = 1
    return n, directed, a


def read_edge_lists(in_dir: Path) -> tuple[AdjacencyTimeSeries, bool]:
    """Load a snapshot_*.edges directory; returns (series, directed)."""
    in_dir = Path(in_dir)
    files = sorted(in_dir.glob("snapshot_*.edges"))
    if not files:
        raise FileNotFoundError(f"no snapshot_*.edges files in {in_dir}")
    times_path = in_dir / "times.csv"
    if times_path.exists():
        rows = times_path.read_text().splitlines()[1:]
        times = np.array([float(r.split(",")[1]) for r in rows if r.strip()])
    else:
        times = np.arange(1, len(files) + 1, dtype=float)
    if len(times) != len(files):
        raise ValueError(
            f"times.csv lists {len(times)} snapshots but {len(files)} edge files found"
        )
    graphs = []
    n0 = directed0 = None
    for path in files:
        n, directed, a = _parse_edge_file(path)
        if n0 is None:
            n0, directed0 = n, directed
        elif (n, directed) != (n0, directed0):
            raise ValueError(f"{path}: inconsistent n/directedness across snapshots")
        graphs.append(a)
    tsg = AdjacencyTimeSeries(n=n0, times=times, graphs=np.stack(graphs))
    return tsg, bool(directed0)


# --- binary snapshot ------------------------------------------------------


def write_snapshot_npz(tsg: AdjacencyTimeSeries, path: Path) -> None:
    # Hand-rolled npz with frozen zip timestamps: np.savez stamps entries
    # with wall-clock time, which would break the byte-identical-rerun
    # contract of the CLI.
    import io
    import zipfile

    arrays = {"n": np.asarray(tsg.n), "times": np.asarray(tsg.times),
              "graphs": np.asarray(tsg.graphs)}
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name, arr in arrays.items():
            payload = io.BytesIO()
            np.lib.format.write_array(payload, arr, allow_pickle=False)
            info = zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, payload.getvalue())
    atomic_write_bytes(path, buffer.getvalue())


def read_snapshot_npz(path: Path) -> AdjacencyTimeSeries:
    with np.load(path) as data:
        return AdjacencyTimeSeries(
            n=int(data["n"]), times=data["times"], graphs=data["graphs"]
        )


# --- CSV emitters ---------------------------------------------------------


def write_dissimilarity_csv(dmat: DissimilarityMatrix, path: Path) -> None:
    """Headerless m rows of m comma-separated 17-digit floats."""
    rows = [",".join(fmt(x) for x in row) for row in dmat.values]
    atomic_write_text(path, "\n".join(rows) + "\n")


def read_dissimilarity_csv(path: Path, kind: str = "estimated_dmv") -> DissimilarityMatrix:
    values = np.array([
        [float(x) for x in line.split(",")]
        for line in Path(path).read_text().splitlines() if line.strip()
    ])
    return DissimilarityMatrix(values=values, kind=kind)


def write_mirror_csv(me: MirrorEmbedding, times, path: Path,
                     spectrum_path: Path | None = None) -> None:
    header = "time," + ",".join(f"psi_{k + 1}" for k in range(me.kept))
    rows = [header]
    for t, row in zip(times, me.coords):
        rows.append(",".join([fmt(t)] + [fmt(x) for x in row]))
    atomic_write_text(path, "\n".join(rows) + "\n")
    if spectrum_path is not None:
        spec_rows = ["index,eigenvalue"]
        spec_rows += [f"{i + 1},{fmt(v)}" for i, v in enumerate(me.spectrum)]
        atomic_write_text(spectrum_path, "\n".join(spec_rows) + "\n")


def write_isomirror_csv(iso: IsoMirror, times, path: Path) -> None:
    rows = [f"# k_used={iso.k_used} knn_symmetrization=union", "time,value"]
    rows += [f"{fmt(t)},{fmt(v)}" for t, v in zip(times, iso.values)]
    atomic_write_text(path, "\n".join(rows) + "\n")


def fit_text_block(fit: PiecewiseLinearFit) -> str:
    lines = [
        f"t_hat = {fmt(fit.t_hat)}",
        f"knot_index = {fit.knot_index}",
        f"alpha = {fmt(fit.alpha)}",
        f"beta_left = {fmt(fit.beta_left)}",
        f"beta_right = {fmt(fit.beta_right)}",
        f"objective = {fmt(fit.objective)}",
        f"slope_change = {fmt(abs(fit.beta_right - fit.beta_left))}",
        f"n_tied_knots = {fit.n_tied_knots}",
    ]
    return "\n".join(lines) + "\n"


def fit_csv_row(fit: PiecewiseLinearFit) -> str:
    header = "t_hat,alpha,beta_left,beta_right,objective"
    row = ",".join(fmt(x) for x in
                   (fit.t_hat, fit.alpha, fit.beta_left, fit.beta_right, fit.objective))
    return header + "\n" + row + "\n"


# --- manifest ---------------------------------------------------------------


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir: Path, command: str, config: dict,
                   outputs: list[Path]) -> Path:
    """Record the fully-resolved config and a digest of every output file."""
    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "config": config,
        "outputs": {
            os.path.relpath(p, out_dir): file_digest(p) for p in sorted(map(Path, outputs))
        },
    }
    path = out_dir / "manifest.json"
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
