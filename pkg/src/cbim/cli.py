"""Command-line entry point: distance sweeps and admission-trace replay.

    cbim run --config cfg.json [--out-dir out] [--plots]
    cbim replay --config cfg.json --trace events.txt [--out-dir out]
    cbim --validate [--config cfg.json]
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

from .assignment import AssignmentEngine, Outcome, OutOfScopeRequest, TrafficRequest
from .config import ConfigValidationError, RunConfig, load_config
from .geometry import build_cluster
from .scenarios import MetricsRecord, run_sweep
from .spectrum import TrafficClass, init_spectrum

log = logging.getLogger("cbim")

METRICS_HEADER = ("distance_km", "scenario", "sinr_db", "capacity_bps_hz", "outage_prob")
DECISIONS_HEADER = ("seq", "outcome", "channel_id", "displaced_request", "side_effect_count")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class TraceError(ValueError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    kind: str  # "admit" or "release"
    traffic_class: TrafficClass | None = None
    position: tuple[float, float] | None = None
    request_id: int | None = None


def _fmt(x: float) -> str:
    # locale-independent fixed point; avoid "-0.000000"
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def metrics_csv(records: Sequence[MetricsRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRICS_HEADER)
    for r in records:
        writer.writerow([_fmt(r.distance_km), r.scenario.value, _fmt(r.sinr_db),
                         _fmt(r.capacity_bps_hz), _fmt(r.outage_prob)])
    return buf.getvalue()


def summary_table(records: Sequence[MetricsRecord]) -> str:
    lines = [f"{'scenario':<22} {'min_sinr_db':>12} {'max_outage':>11}"]
    seen = []
    for r in records:
        if r.scenario not in seen:
            seen.append(r.scenario)
    for kind in seen:
        rows = [r for r in records if r.scenario is kind]
        lines.append(f"{kind.value:<22} {min(r.sinr_db for r in rows):>12.3f} "
                     f"{max(r.outage_prob for r in rows):>11.6f}")
    return "\n".join(lines)


def parameter_table(cfg: RunConfig) -> str:
    env = cfg.environment
    rows = [
        ("Original channel at each cell", f"{cfg.channels_per_cell}"),
        ("Center frequency", f"{env.f_c:g} MHz"),
        ("Transmitted signal power by the BS", f"{env.p_tx / 1000:.2f} kW"),
        ("Cell radius", f"{cfg.cell_radius:g} km"),
        ("Penetration loss", f"{env.l_ow:g} dB"),
        ("Threshold value of SINR (gamma)", f"{env.gamma_db:g} dB"),
        ("Height of the BS", f"{env.h_b:g} m"),
        ("Height of the mobile antenna", f"{env.h_m:g} m"),
    ]
    extra = cfg.resolved()
    for key in ("inner_ratio", "a_th", "b_th", "donors_per_group", "tier_count", "d_start",
                "d_stop", "d_step", "borrowed_band", "noise_w", "inner_power_factor"):
        rows.append((key, str(extra[key])))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def write_plots(records: Sequence[MetricsRecord], out_dir: Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    metrics = (("sinr_db", "SINR (dB)", "sinr.svg"),
               ("capacity_bps_hz", "Capacity (bps/Hz)", "capacity.svg"),
               ("outage_prob", "Outage probability", "outage.svg"))
    kinds = []
    for r in records:
        if r.scenario not in kinds:
            kinds.append(r.scenario)
    for attr, label, name in metrics:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for kind in kinds:
            rows = [r for r in records if r.scenario is kind]
            ax.plot([r.distance_km for r in rows], [getattr(r, attr) for r in rows],
                    marker="o", label=kind.value)
        ax.set_xlabel("Distance from BS (km)")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out_dir / name
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written


def run(cfg: RunConfig, out_dir: Path | None = None, plots: bool = False,
        stdout: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    out_dir = Path(out_dir if out_dir is not None else cfg.out_dir)
    layout = build_cluster(cfg.cell_radius, cfg.tier_count)
    records = run_sweep(layout, cfg.environment, cfg.distances, cfg.kinds, cfg.settings)
    text = metrics_csv(records)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "metrics.csv").write_text(text, encoding="utf-8", newline="")
        if plots:
            write_plots(records, out_dir)
    except OSError as exc:
        print(f"error: cannot write output to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(summary_table(records), file=stdout)
    return EXIT_OK


def parse_trace(text: str) -> list[TraceEvent]:
    events = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            seq = int(parts[0])
        except ValueError:
            raise TraceError(line_no, f"sequence number expected, got {parts[0]!r}") from None
        if len(parts) >= 2 and parts[1] == "admit":
            if len(parts) != 5 or parts[2] not in ("RT", "NRT"):
                raise TraceError(line_no, "expected '<seq> admit <RT|NRT> <x_km> <y_km>'")
            try:
                pos = (float(parts[3]), float(parts[4]))
            except ValueError:
                raise TraceError(line_no, "coordinates must be numbers") from None
            events.append(TraceEvent(seq, "admit", TrafficClass(parts[2]), pos))
        elif len(parts) >= 2 and parts[1] == "release":
            if len(parts) != 3:
                raise TraceError(line_no, "expected '<seq> release <request_id>'")
            try:
                events.append(TraceEvent(seq, "release", request_id=int(parts[2])))
            except ValueError:
                raise TraceError(line_no, "request id must be an integer") from None
        else:
            raise TraceError(line_no, f"unknown event in {raw.strip()!r}")
    return events


def replay(cfg: RunConfig, trace_path: Path, out_dir: Path | None = None,
           stdout: TextIO | None = None) -> int:
    """Feed a trace through the admission engine and write ``decisions.csv``.

    Request ids are the sequence numbers of their admit events.
    """
    stdout = stdout or sys.stdout
    out_dir = Path(out_dir if out_dir is not None else cfg.out_dir)
    try:
        events = parse_trace(Path(trace_path).read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"error: cannot read trace {trace_path}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except TraceError as exc:
        print(f"error: {trace_path}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    layout = build_cluster(cfg.cell_radius, cfg.tier_count)
    plan = init_spectrum([c.id for c in layout.cells if c.tier <= 1], cfg.channels_per_cell)
    engine = AssignmentEngine(plan, layout, cfg.policy, cfg.inner_ratio)

    rows = []
    for ev in events:
        try:
            if ev.kind == "admit":
                d = engine.admit(TrafficRequest(ev.seq, ev.traffic_class, ev.position))
                displaced = d.displaced[0] if d.displaced else ""
                channel = d.channel_id if d.channel_id is not None else ""
                rows.append((ev.seq, d.outcome.value, channel, displaced, len(d.side_effects)))
            else:
                channel = engine.calls[ev.request_id].channel_id if ev.request_id in engine.calls else None
                effects = engine.release(ev.request_id)
                rows.append((ev.seq, "Released", channel, "", len(effects)))
        except (KeyError, ValueError, OutOfScopeRequest) as exc:
            msg = exc.args[0] if exc.args else exc
            print(f"error: event {ev.seq}: {msg}", file=sys.stderr)
            return EXIT_FAILURE

    problems = engine.check_invariants()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DECISIONS_HEADER)
    writer.writerows(rows)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "decisions.csv").write_text(buf.getvalue(), encoding="utf-8", newline="")
    except OSError as exc:
        print(f"error: cannot write output to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    counts = {o: sum(r[1] == o.value for r in rows) for o in Outcome}
    print(", ".join(f"{o.value}={n}" for o, n in counts.items()), file=stdout)
    for p in problems:
        print(f"invariant violated: {p}", file=stdout)
    print(f"conservation check: {'pass' if not problems else 'FAIL'}", file=stdout)
    return EXIT_OK if not problems else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbim", description=__doc__.splitlines()[0])
    parser.add_argument("--validate", action="store_true",
                        help="print the resolved parameter table and exit")
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="run the distance sweep and write metrics.csv")
    p_run.add_argument("--config", dest="sub_config")
    p_run.add_argument("--out-dir")
    p_run.add_argument("--plots", action="store_true", help="also write SVG plots")
    p_run.add_argument("--validate", dest="sub_validate", action="store_true")

    p_rep = sub.add_parser("replay", help="replay an admit/release trace")
    p_rep.add_argument("--config", dest="sub_config")
    p_rep.add_argument("--trace", required=True)
    p_rep.add_argument("--out-dir")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    config_path = getattr(args, "sub_config", None) or args.config
    try:
        cfg = load_config(config_path)
    except ConfigValidationError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.validate or getattr(args, "sub_validate", False):
        print(parameter_table(cfg))
        return EXIT_OK
    if args.command == "run":
        return run(cfg, args.out_dir, args.plots)
    if args.command == "replay":
        return replay(cfg, args.trace, args.out_dir)
    parser.print_help()
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
