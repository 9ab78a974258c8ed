"""Command-line surface: simulate -> analyze -> mc / sweep-dim / detect / summaries.

Every command writes its outputs atomically into --out and finishes with a
manifest.json echoing the fully-resolved configuration plus a SHA-256 digest
of each output file, so results are traceable to inputs.  Exit status is 0
iff every requested output was written and validated.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .embed import estimated_dissimilarity_matrix, select_dimension
from .experiments import (
    NOT_IMPLEMENTED_PIPELINES,
    aggregate_report,
    config_digest,
    _mc_job,
    dimension_sweep,
    largest_common_component,
    network_summaries,
    run_parallel,
)
from .graphs import AdjacencyTimeSeries, sample_tsg
from .isomirror import iso_reduce
from .localize import bootstrap_detect, detection_statistic, localize
from .mirror import cmds, first_dimension
from .serialize import (
    atomic_write_text,
    fit_csv_row,
    fit_text_block,
    fmt,
    read_edge_lists,
    write_dissimilarity_csv,
    write_edge_lists,
    write_isomirror_csv,
    write_manifest,
    write_mirror_csv,
    write_snapshot_npz,
)
from .walks import simulate_walk

MC_HEADER = ("pipeline,n,m,cmds_dim,replicates,mse,std,ci_low,ci_high,"
             "tie_fraction,n_failed,config_digest,status")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, NotImplementedError, RuntimeError) as exc:
        print(f"netmirror: error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netmirror",
        description="Mirror estimation and changepoint localization for network time series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a latent-walk time series of graphs")
    sim.add_argument("--config", required=True, type=Path)
    sim.add_argument("--out", required=True, type=Path)
    sim.add_argument("--seed", type=int, default=None)
    sim.set_defaults(func=_cmd_simulate)

    ana = sub.add_parser("analyze", help="embed, mirror, and localize an observed series")
    ana.add_argument("--input", required=True, type=Path)
    ana.add_argument("--out", required=True, type=Path)
    ana.add_argument("--ase-dim", default="auto",
                     help="ASE dimension, integer or 'auto' (scree elbow)")
    ana.add_argument("--cmds-dim", type=int, default=1)
    ana.add_argument("--use-isomap", action="store_true")
    ana.add_argument("--time-window", default=None, metavar="A:B",
                     help="keep snapshots with time value in [A, B]")
    ana.add_argument("--config", type=Path, default=None,
                     help="null-model config enabling bootstrap detection")
    ana.add_argument("--replicates", type=int, default=None)
    ana.add_argument("--level", type=float, default=None)
    ana.add_argument("--seed", type=int, default=0)
    ana.set_defaults(func=_cmd_analyze)

    mc = sub.add_parser("mc", help="Monte Carlo localization-error report")
    mc.add_argument("--config", required=True, type=Path)
    mc.add_argument("--out", required=True, type=Path)
    mc.add_argument("--seed", type=int, default=None)
    mc.add_argument("--replicates", type=int, default=None)
    mc.set_defaults(func=_cmd_mc)

    swp = sub.add_parser("sweep-dim", help="MSE vs CMDS embedding dimension")
    swp.add_argument("--config", required=True, type=Path)
    swp.add_argument("--out", required=True, type=Path)
    swp.add_argument("--seed", type=int, default=None)
    swp.add_argument("--replicates", type=int, default=None)
    swp.set_defaults(func=_cmd_sweep)

    det = sub.add_parser("detect", help="bootstrap changepoint detection")
    det.add_argument("--input", required=True, type=Path)
    det.add_argument("--config", required=True, type=Path,
                     help="null-model config ([walk] with p == q, [tsg], [detect])")
    det.add_argument("--out", required=True, type=Path)
    det.add_argument("--ase-dim", default="1")
    det.add_argument("--cmds-dim", type=int, default=1)
    det.add_argument("--replicates", type=int, default=None)
    det.add_argument("--level", type=float, default=None)
    det.add_argument("--seed", type=int, default=0)
    det.add_argument("--time-window", default=None, metavar="A:B")
    det.set_defaults(func=_cmd_detect)

    summ = sub.add_parser("summaries", help="marginal network statistics and control chart")
    summ.add_argument("--input", required=True, type=Path)
    summ.add_argument("--out", required=True, type=Path)
    summ.add_argument("--time-window", default=None, metavar="A:B")
    summ.set_defaults(func=_cmd_summaries)

    return parser


# --- shared helpers -------------------------------------------------------


def _finish(out_dir: Path, command: str, config: dict, outputs: list[Path]) -> int:
    for path in outputs:
        if not Path(path).is_file() or Path(path).stat().st_size == 0:
            raise RuntimeError(f"output {path} missing or empty")
    write_manifest(out_dir, command, config, outputs)
    return 0


def _parse_window(raw: str | None):
    if raw is None:
        return None
    lo, _, hi = raw.partition(":")
    try:
        return float(lo), float(hi)
    except ValueError:
        raise ValueError(f"bad --time-window {raw!r}, expected A:B") from None


def _load_series(input_dir: Path, window_raw: str | None):
    tsg, directed = read_edge_lists(input_dir)
    window = _parse_window(window_raw)
    if window is not None:
        lo, hi = window
        keep = (tsg.times >= lo) & (tsg.times <= hi)
        if not keep.any():
            raise ValueError(f"time window {window_raw} leaves no snapshots")
        tsg = AdjacencyTimeSeries(n=tsg.n, times=tsg.times[keep], graphs=tsg.graphs[keep])
    return tsg, directed


def _symmetrized(tsg: AdjacencyTimeSeries) -> AdjacencyTimeSeries:
    sym = np.maximum(tsg.graphs, tsg.graphs.transpose(0, 2, 1))
    return AdjacencyTimeSeries(n=tsg.n, times=tsg.times, graphs=sym)


def _resolve_ase_dim(raw: str, tsg: AdjacencyTimeSeries) -> int:
    if raw != "auto":
        return int(raw)
    max_d = max(1, min(10, tsg.n - 2))
    elbows = [select_dimension(a, max_d) for a in tsg.graphs]
    # one shared dimension is required for alignment; use the modal elbow
    counts = Counter(elbows)
    top = max(counts.values())
    return min(d for d, c in counts.items() if c == top)


def _summaries_csv(summaries, times) -> str:
    rows = ["index,time,edge_density,avg_path_length,reciprocity,"
            "frobenius_step,strongly_connected"]
    for i, (t, s) in enumerate(zip(times, summaries)):
        apl = "disconnected" if s.avg_path_length is None else fmt(s.avg_path_length)
        rec = "undefined" if s.reciprocity is None else fmt(s.reciprocity)
        rows.append(
            f"{i},{fmt(t)},{fmt(s.edge_density)},{apl},{rec},"
            f"{fmt(s.frobenius_step)},{int(s.strongly_connected)}"
        )
    return "\n".join(rows) + "\n"


# --- simulate --------------------------------------------------------------


def _cmd_simulate(args) -> int:
    run_cfg = load_config(args.config)
    run_cfg.require("walk", "tsg")
    cfg = run_cfg.walk_config(seed_override=args.seed)
    n = run_cfg.n_vertices()
    latents = simulate_walk(cfg, n)
    tsg = sample_tsg(latents, seed=cfg.seed)

    out = Path(args.out)
    outputs = write_edge_lists(tsg, out)
    header = "vertex," + ",".join(fmt(t) for t in latents.times)
    rows = [header] + [
        f"{j}," + ",".join(fmt(x) for x in latents.positions[j])
        for j in range(latents.n)
    ]
    latents_path = out / "latents.csv"
    atomic_write_text(latents_path, "\n".join(rows) + "\n")
    outputs.append(latents_path)
    npz_path = out / "tsg.npz"
    write_snapshot_npz(tsg, npz_path)
    outputs.append(npz_path)

    resolved = run_cfg.resolved()
    resolved["walk"]["seed"] = cfg.seed
    resolved["walk"]["delta"] = cfg.delta
    return _finish(out, "simulate", resolved, outputs)


# --- analyze ---------------------------------------------------------------


def _cmd_analyze(args) -> int:
    tsg, directed = _load_series(args.input, args.time_window)
    if tsg.m < 4:
        raise ValueError(f"analyze needs at least 4 aligned networks, got {tsg.m}")
    out = Path(args.out)
    outputs = []

    summaries = network_summaries(list(tsg.graphs))
    summaries_path = out / "summaries.csv"
    atomic_write_text(summaries_path, _summaries_csv(summaries, tsg.times))
    outputs.append(summaries_path)

    spectral_tsg = _symmetrized(tsg) if directed else tsg
    ase_dim = _resolve_ase_dim(args.ase_dim, spectral_tsg)
    dmat = estimated_dissimilarity_matrix(spectral_tsg, d=ase_dim)
    dmat_path = out / "dissimilarity.csv"
    write_dissimilarity_csv(dmat, dmat_path)
    outputs.append(dmat_path)

    me = cmds(dmat, args.cmds_dim)
    mirror_path = out / "mirror.csv"
    spectrum_path = out / "mirror_spectrum.csv"
    write_mirror_csv(me, tsg.times, mirror_path, spectrum_path)
    outputs += [mirror_path, spectrum_path]

    if args.use_isomap:
        iso = iso_reduce(me.coords)
        iso_path = out / "isomirror.csv"
        write_isomirror_csv(iso, tsg.times, iso_path)
        outputs.append(iso_path)
        ys = iso.values
    else:
        ys = first_dimension(me)

    fit = localize(tsg.times, ys)
    fit_txt = out / "fit.txt"
    atomic_write_text(fit_txt, fit_text_block(fit))
    fit_csv = out / "fit.csv"
    atomic_write_text(fit_csv, fit_csv_row(fit))
    outputs += [fit_txt, fit_csv]

    config = {
        "input": str(args.input), "ase_dim": ase_dim, "cmds_dim": args.cmds_dim,
        "use_isomap": bool(args.use_isomap), "time_window": args.time_window,
        "directed_input": directed, "symmetrized": directed,
        "procrustes": dmat.procrustes, "seed": args.seed,
    }

    if args.config is not None:
        outputs += _detection_outputs(
            out, args.config, fit, args.replicates, args.level, args.seed,
            ase_dim, args.cmds_dim,
        )
        config["null_config"] = str(args.config)

    return _finish(out, "analyze", config, outputs)


def _detection_outputs(out: Path, null_config: Path, fit, replicates, level,
                       seed, ase_dim, cmds_dim) -> list[Path]:
    run_cfg = load_config(null_config)
    run_cfg.require("walk", "tsg", "detect")
    cfg = run_cfg.walk_config()
    n = run_cfg.n_vertices()
    replicates = replicates if replicates is not None else run_cfg.get("detect", "replicates", 300)
    level = level if level is not None else run_cfg.get("detect", "level", 0.05)
    observed = detection_statistic(fit)
    result = bootstrap_detect(cfg, n, observed, replicates, level, seed,
                              ase_dim=ase_dim, cmds_dim=cmds_dim)
    lines = [
        f"observed = {fmt(result.observed)}",
        f"critical_value = {fmt(result.critical_value)}",
        f"p_value = {fmt(result.p_value)}",
        f"reject = {int(result.reject)}",
        f"level = {fmt(level)}",
        f"replicates = {replicates}",
        f"n_failed = {result.n_failed}",
    ]
    det_path = out / "detection.txt"
    atomic_write_text(det_path, "\n".join(lines) + "\n")
    null_path = out / "null_statistics.csv"
    atomic_write_text(null_path, "statistic\n" +
                      "\n".join(fmt(s) for s in result.null_statistics) + "\n")
    gp_path = out / "detection.gp"
    atomic_write_text(gp_path, _detect_plot_script(result))
    return [det_path, null_path, gp_path]


def _detect_plot_script(result) -> str:
    width = max(result.null_statistics.max() / 30, 1e-6)
    return (
        "# Null distribution of the slope-change statistic with critical value\n"
        "set datafile separator ','\n"
        "set xlabel '|beta_R - beta_L| under the null'\n"
        "set ylabel 'count'\n"
        f"binwidth = {fmt(width)}\n"
        "bin(x) = binwidth * floor(x / binwidth) + binwidth / 2\n"
        f"set arrow from {fmt(result.critical_value)}, graph 0 "
        f"to {fmt(result.critical_value)}, graph 1 nohead dashtype 2\n"
        "plot 'null_statistics.csv' every ::1 using (bin($1)):(1.0) "
        "smooth freq with boxes notitle\n"
    )


# --- mc ---------------------------------------------------------------------


def _resumable_replicates(partial_path: Path, payloads) -> dict:
    """Run per-replicate jobs, skipping those already in the partial file."""
    done: dict[int, tuple] = {}
    if partial_path.exists():
        for line in partial_path.read_text().splitlines():
            parts = line.strip().split(",")
            if len(parts) != 3:
                continue
            r, sq, tied = parts
            try:
                done[int(r)] = (("fail", None, False) if sq == "fail"
                                else ("ok", float(sq), bool(int(tied))))
            except ValueError:
                continue
    missing = [(r, p) for r, p in enumerate(payloads) if r not in done]
    partial_path.parent.mkdir(parents=True, exist_ok=True)
    chunk = 64
    for start in range(0, len(missing), chunk):
        batch = missing[start:start + chunk]
        results = run_parallel(_mc_job, [p for _, p in batch])
        with open(partial_path, "a") as handle:
            for (r, _), res in zip(batch, results):
                status, value, tied = res
                if status == "ok":
                    handle.write(f"{r},{fmt(value)},{int(tied)}\n")
                else:
                    handle.write(f"{r},fail,0\n")
                done[r] = res if status == "ok" else ("fail", None, False)
    return done


def _mc_single_report(cfg, n, pipeline, replicates, seed, cmds_dim, ase_dim,
                      partial_dir: Path):
    digest = config_digest(cfg, n=n, pipeline=pipeline, replicates=replicates,
                           master_seed=seed, cmds_dim=cmds_dim, ase_dim=ase_dim)
    payloads = [(cfg, n, pipeline, seed, r, cmds_dim, ase_dim)
                for r in range(replicates)]
    done = _resumable_replicates(partial_dir / f"partial_{digest}.csv", payloads)
    ordered = [done[r] for r in range(replicates)]
    ok = [(sq, tied) for status, sq, tied in ordered if status == "ok"]
    n_failed = replicates - len(ok)
    if n_failed > 0.01 * replicates:
        raise RuntimeError(f"{n_failed}/{replicates} replicates failed for digest {digest}")
    return aggregate_report(
        [sq for sq, _ in ok], [t for _, t in ok], cfg=cfg, pipeline=pipeline,
        n=n, cmds_dim=cmds_dim, replicates=replicates, n_failed=n_failed,
        digest=digest,
    )


def _report_row(rep) -> str:
    return ",".join([
        rep.pipeline, str(rep.n), str(rep.m), str(rep.cmds_dim),
        str(rep.replicates), fmt(rep.mse), fmt(rep.std), fmt(rep.ci_low),
        fmt(rep.ci_high), fmt(rep.tie_fraction), str(rep.n_failed),
        rep.config_digest, "ok",
    ])


def _cmd_mc(args) -> int:
    run_cfg = load_config(args.config)
    run_cfg.require("walk", "tsg", "mc")
    mc_section = run_cfg.sections["mc"]
    pipeline = mc_section.get("pipeline", "mirror_dim_1")
    replicates = args.replicates if args.replicates is not None else mc_section.get("replicates")
    if replicates is None:
        raise ValueError("replicate count required ([mc] replicates or --replicates)")
    seed = args.seed if args.seed is not None else run_cfg.get("walk", "seed", 0)
    cmds_dim = mc_section.get("cmds_dim", 1)
    ase_dim = mc_section.get("ase_dim", 1)
    n_values = mc_section.get("n_values") or [run_cfg.n_vertices()]
    m_values = mc_section.get("m_values") or [run_cfg.get("walk", "m")]

    out = Path(args.out)
    rows = [MC_HEADER]
    not_implemented = pipeline in NOT_IMPLEMENTED_PIPELINES
    for n in n_values:
        for m in m_values:
            cfg = run_cfg.walk_config(seed_override=seed, m_override=m)
            if not_implemented:
                digest = config_digest(cfg, n=n, pipeline=pipeline,
                                       replicates=replicates, master_seed=seed,
                                       cmds_dim=cmds_dim, ase_dim=ase_dim)
                rows.append(",".join([
                    pipeline, str(n), str(m), str(cmds_dim), str(replicates),
                    "", "", "", "", "", "", digest, "not_implemented",
                ]))
                continue
            rep = _mc_single_report(cfg, n, pipeline, replicates, seed,
                                    cmds_dim, ase_dim, out / "partial")
            rows.append(_report_row(rep))

    report_path = out / "mc_report.csv"
    atomic_write_text(report_path, "\n".join(rows) + "\n")
    outputs = [report_path]
    if len(n_values) > 1:
        gp = out / "mse_vs_n.gp"
        atomic_write_text(gp, _mc_plot_script("n", 2))
        outputs.append(gp)
    if len(m_values) > 1 or len(n_values) == 1:
        gp = out / "mse_vs_m.gp"
        atomic_write_text(gp, _mc_plot_script("m", 3))
        outputs.append(gp)
    resolved = run_cfg.resolved()
    resolved.setdefault("mc", {})["replicates"] = replicates
    resolved["mc"]["pipeline"] = pipeline
    resolved["walk"]["seed"] = seed
    return _finish(out, "mc", resolved, outputs)


def _mc_plot_script(axis: str, column: int) -> str:
    return (
        f"# Localization MSE against {axis} (changepoint-accuracy axes)\n"
        "set datafile separator ','\n"
        f"set xlabel '{axis}'\n"
        "set ylabel 'MSE of t-hat'\n"
        "set key off\n"
        f"plot 'mc_report.csv' every ::1 using {column}:6 with linespoints pointtype 7\n"
    )


# --- sweep-dim ----------------------------------------------------------------


def _cmd_sweep(args) -> int:
    run_cfg = load_config(args.config)
    run_cfg.require("walk", "tsg", "sweep")
    sweep = run_cfg.sections["sweep"]
    d_values = sweep.get("d_values")
    if not d_values:
        raise ValueError("[sweep] d_values required")
    replicates = args.replicates if args.replicates is not None else sweep.get("replicates")
    if replicates is None:
        raise ValueError("replicate count required ([sweep] replicates or --replicates)")
    seed = args.seed if args.seed is not None else run_cfg.get("walk", "seed", 0)
    cfg = run_cfg.walk_config(seed_override=seed)
    n = run_cfg.n_vertices()
    reports = dimension_sweep(cfg, n, d_values, replicates, seed,
                              ase_dim=sweep.get("ase_dim", 1))
    rows = [MC_HEADER] + [_report_row(rep) for rep in reports]
    out = Path(args.out)
    report_path = out / "sweep_report.csv"
    atomic_write_text(report_path, "\n".join(rows) + "\n")
    gp_path = out / "mse_vs_dim.gp"
    atomic_write_text(gp_path, (
        "# Localization MSE against CMDS embedding dimension (U-shape axes)\n"
        "set datafile separator ','\n"
        "set xlabel 'CMDS embedding dimension d'\n"
        "set ylabel 'MSE of t-hat'\n"
        "set key off\n"
        "plot 'sweep_report.csv' every ::1 using 4:6 with linespoints pointtype 7\n"
    ))
    resolved = run_cfg.resolved()
    resolved["sweep"]["replicates"] = replicates
    resolved["walk"]["seed"] = seed
    return _finish(out, "sweep-dim", resolved, [report_path, gp_path])


# --- detect ---------------------------------------------------------------------


def _cmd_detect(args) -> int:
    tsg, directed = _load_series(args.input, args.time_window)
    if tsg.m < 4:
        raise ValueError(f"detect needs at least 4 aligned networks, got {tsg.m}")
    spectral_tsg = _symmetrized(tsg) if directed else tsg
    ase_dim = _resolve_ase_dim(args.ase_dim, spectral_tsg)
    dmat = estimated_dissimilarity_matrix(spectral_tsg, d=ase_dim)
    me = cmds(dmat, args.cmds_dim)
    fit = localize(tsg.times, first_dimension(me))

    out = Path(args.out)
    outputs = _detection_outputs(out, args.config, fit, args.replicates,
                                 args.level, args.seed, ase_dim, args.cmds_dim)
    fit_txt = out / "fit.txt"
    atomic_write_text(fit_txt, fit_text_block(fit))
    outputs.append(fit_txt)
    config = {
        "input": str(args.input), "null_config": str(args.config),
        "ase_dim": ase_dim, "cmds_dim": args.cmds_dim, "seed": args.seed,
        "time_window": args.time_window,
    }
    return _finish(out, "detect", config, outputs)


# --- summaries --------------------------------------------------------------------


def _cmd_summaries(args) -> int:
    tsg, directed = _load_series(args.input, args.time_window)
    summaries = network_summaries(list(tsg.graphs))
    out = Path(args.out)
    summaries_path = out / "summaries.csv"
    atomic_write_text(summaries_path, _summaries_csv(summaries, tsg.times))
    vertices, _ = largest_common_component(list(tsg.graphs))
    lcc_path = out / "common_component.txt"
    atomic_write_text(lcc_path, (
        f"size = {len(vertices)}\n"
        "vertices = " + " ".join(str(v) for v in vertices.tolist()) + "\n"
    ))
    config = {"input": str(args.input), "time_window": args.time_window,
              "directed_input": directed}
    return _finish(out, "summaries", config, [summaries_path, lcc_path])


if __name__ == "__main__":
    sys.exit(main())
