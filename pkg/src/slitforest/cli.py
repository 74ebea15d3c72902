"""Command line front end: simulate, analyze, fit, compose, serve, export.

Delimited output goes to stdout or --out; whenever --out names a file the
matching figure is rendered next to it as PNG unless --no-plot is given.
"""
from __future__ import annotations

import argparse
import asyncio
import csv
import sys
from dataclasses import replace
from pathlib import Path

from .agents import AgentSpec, PlanningError, run_agent
from .analytics import (
    ChannelHistogram,
    ContrastUndefinedError,
    build_histogram,
    compose_coherent,
    compose_incoherent,
    contrast,
    ensemble_stats,
    flag_artifact_channels,
    normalize,
)
from .config import load_config, resolve_data_dir
from .engine import WorldConfig
from .fitting import FlatDataError, fit_interference
from .physics import (
    ModelParams,
    Screen,
    model_intensity,
    validate_geometry,
    x_for_channel,
)
from .recording import RecordError, read_session, write_session
from .recording import replay as replay_file
from . import plots
from .server import serve_tcp, serve_websocket, start_static_server

SCREENS = {s.value: s for s in Screen}


def add_world_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, metavar="YAML",
                        help="world defaults file")
    parser.add_argument("--screen", choices=sorted(SCREENS))
    parser.add_argument("--lambda", dest="lam", type=float, metavar="L")
    parser.add_argument("--d", type=float)
    parser.add_argument("--D", type=float)
    parser.add_argument("--t", type=float)
    parser.add_argument("--w", type=float)
    parser.add_argument("--s", type=float)
    parser.add_argument("--n-channels", type=int)
    parser.add_argument("--mushrooms", type=int, metavar="M")
    parser.add_argument("--mushroom-radius", type=float)
    parser.add_argument("--lateral-speed", type=float)
    parser.add_argument("--vertical-speed", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--warmup", action="store_true", default=None)
    parser.add_argument("--trajectory-stride", type=int)


def build_world(args) -> WorldConfig:
    config = load_config(getattr(args, "config", None))
    geometry_overrides = {}
    for arg_name, field in (("t", "t"), ("w", "w"), ("lam", "lam"),
                            ("d", "d"), ("D", "D"), ("s", "s"),
                            ("n_channels", "n_channels")):
        value = getattr(args, arg_name, None)
        if value is not None:
            geometry_overrides[field] = value
    geometry = config.geometry
    if geometry_overrides:
        # slit centers track the (possibly new) separation
        geometry = replace(geometry, slit_centers=(), **geometry_overrides)
    world_overrides = {}
    for arg_name, field in (("mushrooms", "mushroom_count"),
                            ("mushroom_radius", "mushroom_radius"),
                            ("lateral_speed", "lateral_speed"),
                            ("vertical_speed", "vertical_speed"),
                            ("seed", "rng_seed"),
                            ("warmup", "warmup"),
                            ("trajectory_stride", "trajectory_stride")):
        value = getattr(args, arg_name, None)
        if value is not None:
            world_overrides[field] = value
    if getattr(args, "screen", None):
        world_overrides["screen"] = SCREENS[args.screen]
    return replace(config, geometry=geometry, **world_overrides)


def write_rows(out: Path | None, header: list[str], rows) -> None:
    if out is None:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
        return
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def plot_target(args) -> Path | None:
    if args.no_plot or args.out is None:
        return None
    return Path(args.out).with_suffix(".png")


def pooled_histogram(records) -> ChannelHistogram:
    sessions = [r.to_session() for r in records]
    total = None
    registered = 0
    for session in sessions:
        h = build_histogram(session)
        total = h.bins if total is None else total + h.bins
        registered += h.n_attempts_registered
    return ChannelHistogram(bins=total, n_attempts_registered=registered)


def common_screen(records) -> Screen:
    screens = {r.config.screen for r in records}
    if len(screens) != 1:
        raise ValueError(f"files mix screen configurations: "
                         f"{sorted(s.value for s in screens)}")
    return screens.pop()


def cmd_model(args) -> int:
    world = build_world(args)
    geometry = world.geometry
    if args.eq == 1:
        screen = world.screen if world.screen.is_two_slit else Screen.TWO_SLIT
        sign = +1
    else:
        screen = world.screen if not world.screen.is_two_slit else Screen.ONE_SLIT_CENTER
        sign = -1
    geometry = replace(geometry, slit_centers=tuple(screen.slit_centers(geometry.d)))
    params = ModelParams(geometry=geometry, hd=args.hd, interference_sign=sign)
    violations = validate_geometry(geometry)
    if violations:
        print(f"note: geometry outside the validated chain: "
              f"{'; '.join(violations)}", file=sys.stderr)
    values = args.scale * model_intensity(params, geometry.channel_xs()) + args.C
    rows = [(c, x_for_channel(c, geometry.n_channels), v)
            for c, v in enumerate(values, start=1)]
    write_rows(args.out, ["channel", "x", "value"], rows)
    target = plot_target(args)
    if target is not None:
        plots.save_curve_plot(values, target, screen=screen,
                              title=f"eq {args.eq} model")
    return 0


def cmd_simulate(args) -> int:
    world = build_world(args)
    params = None
    if args.agent == "model-sampler":
        sign = +1 if world.screen.is_two_slit else -1
        geometry = replace(world.geometry,
                           slit_centers=tuple(world.screen.slit_centers(world.geometry.d)))
        params = ModelParams(geometry=geometry, interference_sign=sign)
    agent_seed = args.agent_seed
    if agent_seed is None:
        agent_seed = world.rng_seed + 1  # keep the two streams apart
    spec = AgentSpec(kind=args.agent, attempts=args.attempts,
                     rng_seed=agent_seed, params=params)
    subject = dict(item.split("=", 1) for item in args.subject)
    session = run_agent(spec, world, subject=subject)
    if args.out is not None:
        path = Path(args.out)
    else:
        directory = resolve_data_dir(args.data_dir)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{session.id}.jsonl"
    write_session(session, path)
    record = read_session(path)
    counts = " ".join(f"{k}={v}" for k, v in record.counts.items())
    print(f"{path} {counts}")
    return 0


def cmd_analyze(args) -> int:
    records = [read_session(path) for path in args.files]
    screen = common_screen(records)
    target = plot_target(args)
    if len(records) > 1 and not args.pool:
        k = args.normalize if args.normalize is not None else 1000.0
        stats = ensemble_stats([r.to_session() for r in records], k=k)
        rows = [(c + 1, stats.mean[c], stats.sigma[c])
                for c in range(stats.mean.size)]
        write_rows(args.out, ["channel", "mean", "sigma"], rows)
        print(f"sessions={stats.n_sessions} mean_sigma={stats.mean_sigma:.4f}",
              file=sys.stderr)
        if target is not None:
            plots.save_ensemble_plot(stats, target, screen=screen)
        return 0
    h = pooled_histogram(records)
    if args.normalize is not None:
        h = normalize(h, args.normalize)
    rows = [(c + 1, h.bins[c]) for c in range(h.n_channels)]
    write_rows(args.out, ["channel", "value"], rows)
    summary = f"files={len(records)} registered={h.n_attempts_registered}"
    try:
        summary += f" contrast={contrast(h):.4f}"
    except ContrastUndefinedError:
        summary += " contrast=undefined"
    print(summary, file=sys.stderr)
    if target is not None:
        plots.save_histogram_plot(h, target, screen=screen)
    return 0


def cmd_fit(args) -> int:
    records = [read_session(path) for path in args.files]
    screen = common_screen(records)
    h = pooled_histogram(records)
    geometry = records[0].config.geometry
    free = tuple(args.free.split(","))
    mask = set(int(ch) for ch in args.mask.split(",")) if args.mask else set()
    if args.mask_artifacts:
        mask |= flag_artifact_channels(h, screen, d=geometry.d)
    fit = fit_interference(h, screen, free=free, mask=tuple(sorted(mask)),
                           geometry=geometry)
    lines = [
        f"lambda={fit.lam}",
        f"D={fit.D} ({'fitted' if 'D' in free else 'fixed'})",
        f"d={fit.d}",
        f"scale={fit.scale}",
        f"residual={fit.residual}",
        f"minima={fit.minima_count}",
        "mask=" + (",".join(str(ch) for ch in fit.mask) if fit.mask else "none"),
    ]
    report = "\n".join(lines) + "\n"
    if args.out is not None:
        Path(args.out).write_text(report, encoding="utf-8")
    print(report, end="")
    target = plot_target(args)
    if target is not None:
        plots.save_histogram_plot(h, target, screen=screen, model=fit.curve(),
                                  title=f"fit lambda={fit.lam}")
    return 0


def cmd_compose(args) -> int:
    left = read_session(args.left)
    right = read_session(args.right)
    k = args.normalize
    h_left = normalize(build_histogram(left.to_session()), k)
    h_right = normalize(build_histogram(right.to_session()), k)
    if args.mode == "incoherent":
        composed = compose_incoherent(h_left, h_right, shift=args.shift)
    else:
        geometry = left.config.geometry
        geometry = replace(geometry, slit_centers=(-geometry.d / 2, geometry.d / 2))
        composed = compose_coherent(h_left, h_right, ModelParams(geometry=geometry),
                                    shift=args.shift,
                                    amplitude_factor=args.amplitude_factor)
    rows = [(c + 1, composed.bins[c]) for c in range(composed.n_channels)]
    write_rows(args.out, ["channel", "value"], rows)
    target = plot_target(args)
    if target is not None:
        plots.save_histogram_plot(composed, target, screen=Screen.TWO_SLIT,
                                  title=f"{args.mode} composition")
    return 0


def cmd_export(args) -> int:
    record = read_session(args.file)
    h = build_histogram(record.to_session())
    if args.normalize is not None:
        h = normalize(h, args.normalize)
    rows = [(c + 1, h.bins[c]) for c in range(h.n_channels)]
    write_rows(args.out, ["channel", "value"], rows)
    target = plot_target(args)
    if target is not None:
        plots.save_histogram_plot(h, target, screen=record.config.screen)
    return 0


def cmd_replay(args) -> int:
    session = replay_file(args.file)
    registered = sum(1 for a in session.attempts if a.channel is not None)
    print(f"ok attempts={len(session.attempts)} registered={registered}")
    return 0


def cmd_serve(args) -> int:
    world = build_world(args)
    data_dir = resolve_data_dir(args.data_dir)

    async def main() -> None:
        kwargs = dict(attempts=args.attempts, data_dir=data_dir,
                      tick_rate=args.tick_rate)
        if args.transport == "tcp":
            server = await serve_tcp(world, args.host, args.port, **kwargs)
        else:
            server = await serve_websocket(world, args.host, args.port, **kwargs)
        port = server.sockets[0].getsockname()[1]
        print(f"listening on {args.transport}://{args.host}:{port}")
        if args.static is not None:
            httpd = start_static_server(args.static, args.host, args.static_port)
            print(f"static files on http://{args.host}:{httpd.server_port}")
        await asyncio.Event().wait()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slitforest",
        description="Steerable two-slit experiment: simulate, serve, analyze.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", help="emit a model curve as CSV")
    p.add_argument("--eq", type=int, choices=(1, 2), required=True)
    p.add_argument("--hd", type=float, default=None)
    p.add_argument("--C", type=float, default=0.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("-o", "--out", type=Path)
    p.add_argument("--no-plot", action="store_true")
    add_world_args(p)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("simulate", help="run a synthetic agent session")
    p.add_argument("--agent", required=True,
                   choices=("model-sampler", "uniform", "ballistic"))
    p.add_argument("--attempts", type=int, default=1000)
    p.add_argument("--agent-seed", type=int, default=None)
    p.add_argument("--subject", action="append", default=[], metavar="K=V")
    p.add_argument("-o", "--out", type=Path)
    p.add_argument("--data-dir", type=Path, default=None)
    add_world_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="histogram one or more session files")
    p.add_argument("files", nargs="+", type=Path)
    p.add_argument("--pool", action="store_true",
                   help="merge all files into one histogram")
    p.add_argument("--normalize", type=float, default=None, metavar="K")
    p.add_argument("-o", "--out", type=Path)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="fit the interference model to sessions")
    p.add_argument("files", nargs="+", type=Path)
    p.add_argument("--free", default="lambda", metavar="lambda[,D]",
                   choices=("lambda", "lambda,D"))
    p.add_argument("--mask", default=None, metavar="CH,CH")
    p.add_argument("--mask-artifacts", action="store_true")
    p.add_argument("-o", "--out", type=Path)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compose", help="combine two one-slit histograms")
    p.add_argument("left", type=Path)
    p.add_argument("right", type=Path)
    p.add_argument("--mode", default="incoherent",
                   choices=("incoherent", "coherent"))
    p.add_argument("--shift", type=int, default=7)
    p.add_argument("--amplitude-factor", type=float, default=0.5)
    p.add_argument("--normalize", type=float, default=1000.0, metavar="K")
    p.add_argument("-o", "--out", type=Path)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("export", help="session file to CSV")
    p.add_argument("file", type=Path)
    p.add_argument("--normalize", type=float, default=None, metavar="K")
    p.add_argument("-o", "--out", type=Path)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("replay", help="verify and re-run a session file")
    p.add_argument("file", type=Path)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="host realtime sessions")
    p.add_argument("--transport", default="tcp", choices=("tcp", "websocket"))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--attempts", type=int, default=100)
    p.add_argument("--tick-rate", type=float, default=30.0)
    p.add_argument("--static", type=Path, default=None,
                   help="also serve this directory over HTTP")
    p.add_argument("--static-port", type=int, default=8080)
    p.add_argument("--data-dir", type=Path, default=None)
    add_world_args(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RecordError, FlatDataError, PlanningError, ContrastUndefinedError,
            FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
