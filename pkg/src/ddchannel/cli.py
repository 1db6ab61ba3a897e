"""
Command-line front end.

    ddchannel probe     build a probe sequence file
    ddchannel simulate  push a probe through a channel, write the echo
    ddchannel estimate  recover the channel from probe + echo
    ddchannel sweep     Monte Carlo sweep from a key=value config
    ddchannel bench     op-count complexity fits from a key=value config
    ddchannel figure    figure data (CSV, PGM) from a key=value config

Exit status is 0 on success, 1 on I/O failure and 2 on bad arguments or
invalid inputs. Every command writes a manifest next to its outputs that
records the argument vector, seeds, library version and output files.
"""

from __future__ import annotations

import argparse
import math
import os
import shlex
import sys
from dataclasses import dataclass, field

from . import __version__
from .channel import (ChannelError, NoiseModel, add_noise, apply_channel, random_channel,
                      read_scenario, write_scenario)
from .estimators import (MATCHING_RULES, DEFAULT_PASSES, Thresholds, cross_method, format_report,
                         incidence_method, pr_method)
from .evalharness import (METHODS, BenchResult, ConfigError, FigureKind, SweepConfig,
                          bench_complexity, bench_sparsity, export_figure_data, run_sweep,
                          sweep_csv, trial_seeds)
from .plane import AffineLine, INFINITY, ModulusContext, PlaneError
from .sequences import (chirp, format_spec, multi_chirp, parse_spec, pseudo_random,
                        random_line_set, read_sequence, write_sequence)

KIND_LINES = {"chirp": 1, "double": 2, "triple": 3}
METHOD_KIND = {"cross": "double", "incidence": "triple"}


class UsageError(ValueError):
    """Bad or inconsistent command-line input; ``flag`` names the culprit."""

    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


# -- manifest -----------------------------------------------------------------

@dataclass
class RunManifest:
    command: str
    argv: list[str]
    seeds: list[int] = field(default_factory=list)
    version: str = __version__
    outputs: list[str] = field(default_factory=list)

    def text(self) -> str:
        return (f"command={self.command}\n"
                f"argv={shlex.join(self.argv)}\n"
                f"seeds={','.join(str(s) for s in self.seeds)}\n"
                f"version={self.version}\n"
                f"outputs={','.join(self.outputs)}\n")

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.text())


def read_manifest(path: str) -> RunManifest:
    fields = read_config(path)
    if "command" not in fields or "argv" not in fields:
        raise ConfigError(f"{path}: not a manifest (needs command= and argv=)")
    split = lambda s: [x for x in s.split(",") if x]
    return RunManifest(fields["command"], shlex.split(fields["argv"]),
                       [int(s) for s in split(fields.get("seeds", ""))],
                       fields.get("version", ""), split(fields.get("outputs", "")))


def rerun_manifest(path: str) -> int:
    """Run the argument vector recorded in a manifest again."""
    return main(read_manifest(path).argv)


# -- config files -------------------------------------------------------------

def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment, blank lines ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = (t.strip() for t in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_config(path: str) -> dict[str, str]:
    with open(path) as fh:
        return parse_config(fh.read(), path)


class _Fields:
    """Typed access to config values with errors that name the key."""

    def __init__(self, source: str, fields: dict[str, str], allowed: set[str]):
        unknown = sorted(set(fields) - allowed)
        if unknown:
            raise ConfigError(f"{source}: unknown key {unknown[0]!r}; allowed: {', '.join(sorted(allowed))}")
        self.source, self.fields = source, fields

    def _conv(self, key, conv, default, required):
        if key not in self.fields:
            if required:
                raise ConfigError(f"{self.source}: missing required key {key!r}")
            return default
        try:
            return conv(self.fields[key])
        except ValueError as exc:
            raise ConfigError(f"{self.source}: key {key!r}: {exc}") from None

    def int(self, key, default=None, required=False):
        return self._conv(key, int, default, required)

    def float(self, key, default=None, required=False):
        return self._conv(key, _real, default, required)

    def ints(self, key, default=None, required=False):
        return self._conv(key, lambda s: tuple(int(x) for x in s.split(",")), default, required)

    def floats(self, key, default=None, required=False):
        return self._conv(key, lambda s: tuple(_real(x) for x in s.split(",")), default, required)

    def str(self, key, default=None, required=False):
        return self._conv(key, str.strip, default, required)

    def methods(self, key="methods", required=True):
        def conv(s):
            names = [x.strip().lower() for x in s.split(",")]
            bad = [n for n in names if n not in METHODS]
            if bad:
                raise ValueError(f"unknown method {bad[0]!r}")
            return tuple(METHODS[n] for n in names)
        return self._conv(key, conv, None, required)


def _real(s: str) -> float:
    s = s.strip().lower()
    return math.inf if s in ("inf", "infinity", "noiseless") else float(s)


def _thresholds(f: _Fields, snr_hint: float = math.inf) -> Thresholds:
    d = Thresholds()
    return Thresholds(f.float("T", d.T), f.float("T1", d.T1), f.float("T2", d.T2),
                      snr_hint, f.float("leak", d.leak))


# -- probe --------------------------------------------------------------------

def _ctx(n: int, flag: str = "--n") -> ModulusContext:
    try:
        return ModulusContext(n)
    except PlaneError:
        raise UsageError(flag, f"N must be an odd prime, got {n}") from None


def _parse_lines(ctx: ModulusContext, text: str, flag: str):
    try:
        return [parse_spec(ctx, tok) for tok in text.split(";") if tok.strip()]
    except (ValueError, PlaneError) as exc:
        raise UsageError(flag, f"expected 'slope,b;slope,b' with slope an integer or inf ({exc})") from None


def probe_descriptor(header: dict[str, str], ctx: ModulusContext):
    """Kind and chirp specs recorded in a sequence file header."""
    kind = header.get("kind")
    specs = _parse_lines(ctx, header["lines"], "lines header") if header.get("lines") else []
    return kind, specs


def cmd_probe(args, manifest: RunManifest) -> list[str]:
    ctx = _ctx(args.n)
    header = {"kind": args.kind}
    if args.kind == "pr":
        if args.lines:
            raise UsageError("--lines", "a pseudo-random probe takes no lines")
        if args.seed is None:
            raise UsageError("--seed", "a pseudo-random probe needs an explicit seed")
        seq = pseudo_random(ctx, args.seed)
        header["seed"] = str(args.seed)
        manifest.seeds.append(args.seed)
    else:
        want = KIND_LINES[args.kind]
        if args.lines:
            specs = _parse_lines(ctx, args.lines, "--lines")
            if len(specs) != want:
                raise UsageError("--lines", f"kind {args.kind} needs {want} line(s), got {len(specs)}")
        else:
            if args.seed is None:
                raise UsageError("--seed", "random lines need an explicit seed (or pass --lines)")
            specs = random_line_set(ctx, want, args.seed)
            header["seed"] = str(args.seed)
            manifest.seeds.append(args.seed)
        if len({s.line for s in specs}) != len(specs):
            raise UsageError("--lines", "probe lines must be pairwise distinct")
        seq = chirp(ctx, specs[0]) if want == 1 else multi_chirp(ctx, specs)
        header["lines"] = ";".join(format_spec(s) for s in specs)
    write_sequence(args.out, seq, header)
    return [args.out]


# -- simulate -----------------------------------------------------------------

def cmd_simulate(args, manifest: RunManifest) -> list[str]:
    probe, header = read_sequence(args.probe)
    ctx = probe.ctx
    if args.scenario and args.random is not None:
        raise UsageError("--random", "give either --scenario or --random, not both")
    if args.scenario:
        channel = read_scenario(args.scenario)
        if channel.ctx != ctx:
            raise UsageError("--scenario", f"scenario has N={channel.ctx.N}, probe has N={ctx.N}")
    elif args.random is not None:
        if args.seed is None:
            raise UsageError("--seed", "--random needs an explicit seed")
        try:
            channel = random_channel(ctx, args.random, trial_seeds(args.seed)["channel"],
                                     min_alpha=args.min_alpha_ratio / math.sqrt(args.random))
        except ChannelError as exc:
            raise UsageError("--random", str(exc)) from None
    else:
        raise UsageError("--scenario", "give a scenario file or --random R")
    if args.noiseless == (args.snr is not None):
        raise UsageError("--snr", "give exactly one of --snr or --noiseless")
    echo = apply_channel(channel, probe)
    if not args.noiseless:
        if args.seed is None:
            raise UsageError("--seed", "noise needs an explicit seed")
        try:
            model = NoiseModel(args.snr, trial_seeds(args.seed)["noise"])
        except ChannelError as exc:
            raise UsageError("--snr", str(exc)) from None
        echo = add_noise(echo, probe.norm_sq(), model)
    if args.seed is not None:
        manifest.seeds.append(args.seed)
    write_sequence(args.out, echo, header)
    scenario_out = args.scenario_out or args.out + ".scenario"
    write_scenario(scenario_out, channel)
    return [args.out, scenario_out]


# -- estimate -----------------------------------------------------------------

def cmd_estimate(args, manifest: RunManifest) -> list[str]:
    probe, header = read_sequence(args.probe)
    echo, _ = read_sequence(args.echo)
    ctx = probe.ctx
    if echo.ctx != ctx:
        raise UsageError("--echo", f"echo has N={echo.N}, probe has N={ctx.N}")
    th = Thresholds(args.T, args.T1, args.T2, args.snr_hint, args.leak)
    kind, specs = probe_descriptor(header, ctx)
    if args.method == "pr":
        report = pr_method(probe, echo, th)
    else:
        need = METHOD_KIND[args.method]
        if kind != need or len(specs) != KIND_LINES[need]:
            raise UsageError("--probe", f"method {args.method} needs a {need}-chirp probe descriptor "
                                        f"(kind={need}, lines=...) in the probe header; found kind={kind}")
        if args.method == "cross":
            report = cross_method(*specs, echo, th, matching=args.matching, passes=args.passes)
        else:
            report = incidence_method(*specs, echo, th, passes=args.passes)
    with open(args.out, "w") as fh:
        fh.write(format_report(report))
    return [args.out]


# -- sweep / bench / figure -------------------------------------------------------

SWEEP_KEYS = {"N", "r", "snr", "methods", "trials", "seed", "T", "T1", "T2", "leak", "min_alpha_ratio"}


def _seed(f: _Fields, args) -> int:
    if args.seed is not None:
        return args.seed
    seed = f.int("seed")
    if seed is None:
        raise ConfigError(f"{f.source}: missing required key 'seed' (or pass --seed)")
    return seed


def sweep_config(f: _Fields, args) -> SweepConfig:
    return SweepConfig(
        N_list=f.ints("N", required=True),
        r_list=f.ints("r", required=True),
        snr_list=f.floats("snr", (math.inf,)),
        method_list=f.methods(),
        trials_per_cell=f.int("trials", required=True),
        base_seed=_seed(f, args),
        thresholds=_thresholds(f),
        min_alpha_ratio=f.float("min_alpha_ratio", 1.0),
    )


def _out(args, name: str) -> str:
    return os.path.join(args.out_dir, name)


def _ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def _write_text(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def cmd_sweep(args, manifest: RunManifest) -> list[str]:
    f = _Fields(args.config, read_config(args.config), SWEEP_KEYS)
    config = sweep_config(f, args)
    manifest.seeds.append(config.base_seed)
    result = run_sweep(config)
    _ensure_dir(args.out_dir)
    trials, cells = sweep_csv(result, timing=args.timing)
    outs = [_out(args, "sweep_trials.csv"), _out(args, "sweep.csv")]
    _write_text(outs[0], trials)
    _write_text(outs[1], cells)
    return outs


BENCH_KEYS = {"methods", "N", "r", "trials", "seed", "r_list", "r_list_N", "stage"}


def cmd_bench(args, manifest: RunManifest) -> list[str]:
    f = _Fields(args.config, read_config(args.config), BENCH_KEYS)
    methods = f.methods()
    N_list = f.ints("N", required=True)
    r = f.int("r", 4)
    trials = f.int("trials", 3)
    seed = _seed(f, args)
    r_list = f.ints("r_list")
    r_list_N = f.int("r_list_N", N_list[-1])
    stage = f.str("stage", "matching")
    manifest.seeds.append(seed)
    results: list[BenchResult] = []
    for m in methods:
        results.append(bench_complexity(m, N_list, r, trials, seed))
        if r_list and m.value != "PR":
            results.append(bench_sparsity(m, r_list_N, r_list, trials, seed, stage))
    _ensure_dir(args.out_dir)
    outs, summary = [], ["method,variable,stage,slope"]
    for res in results:
        name = f"bench_{res.method.value.lower()}_{res.variable}.csv"
        _write_text(_out(args, name), res.csv())
        outs.append(_out(args, name))
        summary.append(f"{res.method.value},{res.variable},{res.stage or 'total'},{res.slope!r}")
    _write_text(_out(args, "bench.csv"), "\n".join(summary) + "\n")
    return outs + [_out(args, "bench.csv")]


FIGURE_KEYS = {"kind", "f", "g", "stem", "line", "anchor"} | SWEEP_KEYS


def _slope(text: str):
    t = text.strip().lower()
    return INFINITY if t in ("inf", "infinity") else int(t)


def cmd_figure(args, manifest: RunManifest) -> list[str]:
    f = _Fields(args.config, read_config(args.config), FIGURE_KEYS)
    kinds = {k.value: k for k in FigureKind}
    kind_name = f.str("kind", required=True)
    if kind_name not in kinds:
        raise ConfigError(f"{args.config}: key 'kind': expected one of {', '.join(kinds)}, got {kind_name!r}")
    kind = kinds[kind_name]
    stem = f.str("stem", kind_name)
    base = os.path.dirname(os.path.abspath(args.config))
    resolve = lambda p: p if os.path.isabs(p) else os.path.join(base, p)
    _ensure_dir(args.out_dir)
    if kind is FigureKind.SWEEP_TABLE:
        config = sweep_config(f, args)
        manifest.seeds.append(config.base_seed)
        inputs = run_sweep(config)
    else:
        fseq, _ = read_sequence(resolve(f.str("f", required=True)))
        gseq = read_sequence(resolve(f.str("g")))[0] if f.str("g") else fseq
        if gseq.ctx != fseq.ctx:
            raise ConfigError(f"{args.config}: key 'g': N={gseq.N} does not match f's N={fseq.N}")
        inputs = (fseq, gseq)
        if kind is FigureKind.SLICE_PROFILE:
            ctx = fseq.ctx
            try:
                line = ctx.line(_slope(f.str("line", required=True)))
                anchor = ctx.point(*f.ints("anchor", (0, 0)))
                inputs = (fseq, gseq, AffineLine(ctx, line, anchor))
            except (ValueError, TypeError, PlaneError) as exc:
                raise ConfigError(f"{args.config}: keys 'line'/'anchor': {exc}") from None
    return export_figure_data(kind, inputs, args.out_dir, stem)


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ddchannel", description=__doc__.split("\n\n")[0].strip(),
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    pr = sub.add_parser("probe", help="build a probe sequence file")
    pr.add_argument("--n", type=int, required=True, help="sequence length N in samples (odd prime)")
    pr.add_argument("--kind", choices=["chirp", "double", "triple", "pr"], required=True,
                    help="probe family: single chirp, double chirp, triple chirp or pseudo-random")
    pr.add_argument("--lines", help="chirp parameters 'slope,b;slope,b' with slope in Z_N or inf "
                                    "and b in Z_N (grid units); random lines if omitted")
    pr.add_argument("--seed", type=int, help="integer RNG seed (required for pr or random lines)")
    pr.add_argument("--out", required=True, help="output sequence file path")

    sm = sub.add_parser("simulate", help="apply a channel (and noise) to a probe")
    sm.add_argument("--probe", required=True, help="probe sequence file path")
    sm.add_argument("--scenario", help="channel scenario file path (attenuation, delay and "
                                       "Doppler in grid units)")
    sm.add_argument("--random", type=int, metavar="R", help="draw a random channel with R paths (count)")
    sm.add_argument("--min-alpha-ratio", type=float, default=1.0,
                    help="smallest |alpha| of a random channel as a fraction of 1/sqrt(R) "
                         "(dimensionless, default 1: equal magnitudes)")
    sm.add_argument("--snr", type=float, help="signal-to-noise ratio <S,S>/E<W,W> (linear, not dB)")
    sm.add_argument("--noiseless", action="store_true", help="no additive noise")
    sm.add_argument("--seed", type=int, help="integer RNG seed (required for --random or --snr)")
    sm.add_argument("--out", required=True, help="output echo sequence file path")
    sm.add_argument("--scenario-out", help="where to write the channel used "
                                           "(default: <out>.scenario)")

    es = sub.add_parser("estimate", help="recover channel parameters from probe and echo")
    es.add_argument("--method", choices=["pr", "cross", "incidence"], required=True,
                    help="estimator: pseudo-random scan, cross method or incidence method")
    es.add_argument("--probe", required=True, help="probe sequence file path (its header "
                                                   "carries the line parameters)")
    es.add_argument("--echo", required=True, help="echo sequence file path")
    d = Thresholds()
    es.add_argument("--T", type=float, default=d.T,
                    help="peak factor for pr/incidence, in multiples of the noise envelope (dimensionless)")
    es.add_argument("--T1", type=float, default=d.T1,
                    help="cross peak factor, in multiples of the noise envelope (dimensionless)")
    es.add_argument("--T2", type=float, default=d.T2,
                    help="cross hypothesis factor, in multiples of the noise envelope (dimensionless)")
    es.add_argument("--snr-hint", type=_real, default=d.snr_hint,
                    help="SNR the receiver assumes (linear; 'inf' for noiseless)")
    es.add_argument("--leak", type=float, default=d.leak,
                    help="leakage floor factor, in multiples of the leakage rms (dimensionless)")
    es.add_argument("--passes", type=int, default=DEFAULT_PASSES,
                    help="maximum detect/match/cancel rounds for cross and incidence (count)")
    es.add_argument("--matching", choices=MATCHING_RULES, default="assignment",
                    help="how the cross method pairs peaks")
    es.add_argument("--out", required=True, help="output report file path")

    for name, helptext in (("sweep", "Monte Carlo sweep over (N, r, snr, method)"),
                           ("bench", "op-count scaling fits"),
                           ("figure", "export figure data")):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("--config", required=True, help="key=value config file path")
        c.add_argument("--out-dir", required=True, help="output directory")
        c.add_argument("--seed", type=int, help="integer base seed (overrides the config's seed key)")
        if name == "sweep":
            c.add_argument("--timing", action="store_true",
                           help="include wall time in seconds in the summary (breaks byte-identical reruns)")
    return p


COMMANDS = {"probe": cmd_probe, "simulate": cmd_simulate, "estimate": cmd_estimate,
            "sweep": cmd_sweep, "bench": cmd_bench, "figure": cmd_figure}


def _manifest_path(args, outputs: list[str]) -> str:
    if getattr(args, "out_dir", None):
        return os.path.join(args.out_dir, "manifest.txt")
    return outputs[0] + ".manifest"


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    manifest = RunManifest(args.command, argv)
    try:
        outputs = COMMANDS[args.command](args, manifest)
        manifest.outputs = outputs
        manifest.write(_manifest_path(args, outputs))
    except OSError as exc:
        where = f" ({exc.filename})" if getattr(exc, "filename", None) else ""
        print(f"ddchannel {args.command}: I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"ddchannel {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
