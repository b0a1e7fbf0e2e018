"""Command-line interface.

Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage error.
Values can also come from a plain ``key = value`` file passed with
``--config``; flags given on the command line win.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .bounds import finite_n_bound, theorem_rate, uniform_conv_gap
from .engine import GameParams, Variant, play_streaming, triangular_start
from .exact import DEFAULT_CAP, stationary_exact, total_variation
from .experiments import (
    alpha_marginal_check,
    cycle_detect,
    default_rounds,
    limit_shape_experiment,
    popov_comparison,
    stationary_experiment,
)
from .partitions import Partition, boundary, exponential, rescale, sort_composition
from .rng import MAX_SEED
from .serialize import emit_csv, emit_json
from .svg import emit_svg_plot

SUBCOMMANDS = (
    "simulate",
    "limit-shape",
    "stationary",
    "stationary-exact",
    "cycle",
    "marginals",
    "bounds",
    "popov",
)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    n: Optional[int] = None
    p: Optional[float] = None
    variant: str = "card_based"
    seed: int = 0
    m: Optional[int] = None
    trials: int = 1
    epsilon: float = 0.1
    burn_in: Optional[int] = None
    thinning: int = 10
    samples: int = 10_000
    ks: tuple[int, ...] = (1, 10, 50)
    start: str = "triangular"
    record_every: int = 1
    out: Optional[str] = None
    json: Optional[str] = None
    plot: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        d["ks"] = list(self.ks)
        return d


def _ks(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bulgarian",
        description="Stochastic Bulgarian solitaire: simulation, limit-shape distances, exact small-n oracle.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    sub.required = True

    def common(sp, *, seed=True):
        sp.add_argument("--config", help="key = value file; command-line flags override it")
        if seed:
            sp.add_argument("--seed", type=int, default=0, help="64-bit master seed")
        sp.add_argument("--out", help="CSV output path")
        sp.add_argument("--json", help="JSON output path")

    def game(sp, *, p_default=None, start=True):
        sp.add_argument("--n", type=int, default=None, help="number of cards")
        sp.add_argument("--p", type=float, default=p_default, help="pick probability")
        if start:
            sp.add_argument(
                "--start",
                default="triangular",
                help="initial state: 'triangular', 'single' (one pile) or parts like 4+4+2+1+1",
            )

    fmt = argparse.ArgumentDefaultsHelpFormatter
    sp = sub.add_parser("simulate", help="play one game and record per-round summaries", formatter_class=fmt)
    game(sp, p_default=0.01)
    sp.add_argument("--variant", default="card_based", help="card_based | pile_based | deterministic (or card, pile)")
    sp.add_argument("--rounds", "-m", dest="m", type=int, default=200)
    sp.add_argument("--record-every", type=int, default=1, help="measure sup-distance every this many rounds")
    sp.add_argument("--plot", help="SVG of the final rescaled boundary")
    common(sp)

    sp = sub.add_parser("limit-shape", help="ensemble of card-based runs vs e^{-x}", formatter_class=fmt)
    game(sp, p_default=0.01)
    sp.add_argument("--rounds", "-m", dest="m", type=int, default=None, help="default ceil(f(eps) n) + 1")
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--trials", type=int, default=10)
    common(sp)

    sp = sub.add_parser("stationary", help="long-chain sampling of the stationary law", formatter_class=fmt)
    game(sp, p_default=0.3)
    sp.add_argument("--burn-in", type=int, default=None, help="default 10*ceil(1/p)")
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--thinning", type=int, default=10)
    common(sp)

    sp = sub.add_parser("stationary-exact", help="exact stationary law for small n", formatter_class=fmt)
    game(sp, p_default=0.3, start=False)
    common(sp, seed=False)

    sp = sub.add_parser("cycle", help="deterministic game: tail and cycle from a start", formatter_class=fmt)
    game(sp, start=True)
    common(sp, seed=False)

    sp = sub.add_parser("marginals", help="bowl-size moments against the binomial law", formatter_class=fmt)
    game(sp, p_default=0.02)
    sp.add_argument("--rounds", "-m", dest="m", type=int, default=100)
    sp.add_argument("--ks", type=_ks, default=(1, 10, 50), help="bowl indices, e.g. 1,10,50")
    sp.add_argument("--trials", type=int, default=2000)
    common(sp)

    sp = sub.add_parser("bounds", help="explicit finite-n deviation bound", formatter_class=fmt)
    game(sp, p_default=0.01, start=False)
    sp.add_argument("--epsilon", type=float, default=0.3)
    sp.add_argument("--rounds", "-m", dest="m", type=int, default=None, help="default ceil(f(eps) n) + 1")
    common(sp, seed=False)

    sp = sub.add_parser("popov", help="pile-based shapes next to card-based ones", formatter_class=fmt)
    game(sp, p_default=0.1)
    sp.add_argument("--rounds", "-m", dest="m", type=int, default=1000)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--plot", help="SVG of the first pile-based snapshot")
    common(sp)
    return parser


def read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config {path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _validate(cfg: RunConfig) -> None:
    def bad(flag, msg):
        raise UsageError(f"argument --{flag}: {msg}")

    if cfg.n is None:
        if not (cfg.subcommand == "cycle" and cfg.start not in ("triangular", "single")):
            bad("n", "required")
    elif cfg.n < 1:
        bad("n", f"must be >= 1, got {cfg.n}")
    if cfg.p is not None and not 0.0 <= cfg.p <= 1.0:
        bad("p", f"must lie in [0, 1], got {cfg.p}")
    needs_open_p = cfg.subcommand in ("limit-shape", "stationary", "stationary-exact", "bounds", "marginals")
    if needs_open_p and not 0.0 < cfg.p < 1.0:
        bad("p", f"must lie in (0, 1) for {cfg.subcommand}, got {cfg.p}")
    if not 0 <= cfg.seed <= MAX_SEED:
        bad("seed", "must be a 64-bit unsigned integer")
    if cfg.m is not None and cfg.m < 0:
        bad("rounds", f"must be >= 0, got {cfg.m}")
    if cfg.subcommand in ("limit-shape", "bounds") and cfg.m is not None and cfg.m < 1:
        bad("rounds", "must be >= 1")
    if cfg.trials < 1:
        bad("trials", f"must be >= 1, got {cfg.trials}")
    if cfg.subcommand == "marginals" and cfg.trials < 2:
        bad("trials", "must be >= 2")
    if not cfg.epsilon > 0:
        bad("epsilon", f"must be positive, got {cfg.epsilon}")
    if cfg.samples < 1:
        bad("samples", "must be >= 1")
    if cfg.thinning < 1:
        bad("thinning", "must be >= 1")
    if cfg.burn_in is not None and cfg.burn_in < 0:
        bad("burn-in", "must be >= 0")
    if cfg.record_every < 1:
        bad("record-every", "must be >= 1")
    if cfg.subcommand == "simulate":
        try:
            Variant.parse(cfg.variant)
        except ValueError as exc:
            bad("variant", str(exc))
    if cfg.subcommand == "marginals" and any(k < 1 or k > (cfg.m or 0) for k in cfg.ks):
        bad("ks", f"bowl indices must lie in [1, rounds={cfg.m}]")
    if cfg.subcommand == "stationary-exact" and cfg.n is not None and cfg.n > DEFAULT_CAP:
        bad("n", f"exact oracle supports n <= {DEFAULT_CAP}")


def parse_cli(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parse ``argv`` into a validated :class:`RunConfig`.

    Raises ``SystemExit(2)`` on any usage error, naming the offending flag.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    ns = parser.parse_args(argv)
    sp = _subparser(parser, ns.subcommand)
    try:
        if getattr(ns, "config", None):
            values = read_config_file(ns.config)
            dests = {a.dest: a for a in sp._actions}
            defaults = {}
            for key, value in values.items():
                if key == "rounds":
                    key = "m"
                if key not in dests or key in ("config", "help"):
                    raise UsageError(f"--config: unknown key {key!r} for {ns.subcommand}")
                defaults[key] = value
            sp.set_defaults(**defaults)
            ns = parser.parse_args(argv)
        known = {f for f in RunConfig.__dataclass_fields__}
        cfg = RunConfig(**{k: v for k, v in vars(ns).items() if k in known})
        cfg.extra = {k: v for k, v in vars(ns).items() if k not in known}
        _validate(cfg)
    except UsageError as exc:
        sp.error(str(exc))
    return cfg


def _initial_state(cfg: RunConfig) -> Partition:
    if cfg.start == "triangular":
        return triangular_start(cfg.n)
    if cfg.start == "single":
        return Partition((cfg.n,))
    try:
        parts = sorted((int(t) for t in cfg.start.split("+")), reverse=True)
        lam = Partition(parts)
    except ValueError:
        raise UsageError(f"argument --start: cannot read {cfg.start!r} as a partition") from None
    if cfg.n is not None and lam.n != cfg.n:
        raise UsageError(f"argument --start: parts sum to {lam.n}, not --n {cfg.n}")
    return lam


def _emit(report, cfg: RunConfig) -> None:
    if cfg.out:
        emit_csv(report, cfg.out)
    if cfg.json:
        emit_json(report, cfg.json, cfg.as_dict(), cfg.seed)


def run(cfg: RunConfig) -> str:
    """Execute a parsed configuration; returns a one-line summary."""
    name = cfg.subcommand
    if name == "simulate":
        initial = _initial_state(cfg)
        params = GameParams(cfg.n, cfg.p, cfg.variant, cfg.seed)
        run_ = play_streaming(params, initial, cfg.m, record_every=cfg.record_every)
        _emit(run_, cfg)
        final = run_.final
        lam = sort_composition(final) if params.variant is Variant.CARD_BASED else final
        if cfg.plot:
            if params.variant is Variant.CARD_BASED:
                step = rescale(boundary(lam), 1.0 / params.p, params.n)
                emit_svg_plot(step, cfg.plot, exponential(), f"n={params.n}, p={params.p}, {cfg.m} rounds")
            else:
                step = rescale(boundary(lam), math.sqrt(params.n), params.n)
                emit_svg_plot(step, cfg.plot, None, f"{params.variant.value}, n={params.n}, {cfg.m} rounds")
        last = run_.distances[-1] if cfg.m else float("nan")
        return f"final state has {len(lam)} piles; sup-distance {last:.6g}"
    if name == "limit-shape":
        params = GameParams(cfg.n, cfg.p, Variant.CARD_BASED, cfg.seed)
        rep = limit_shape_experiment(params, _initial_state(cfg), cfg.m, cfg.epsilon, cfg.trials)
        _emit(rep, cfg)
        b = rep.finite_n_bound
        return (
            f"m={rep.m}: {rep.count_within}/{rep.trials} within eps={rep.epsilon}; "
            f"median sup-distance {rep.quantiles['q50']:.6g}; finite-n failure bound {b.combined:.3g}"
        )
    if name == "stationary":
        params = GameParams(cfg.n, cfg.p, Variant.CARD_BASED, cfg.seed)
        rep = stationary_experiment(params, cfg.burn_in, cfg.samples, cfg.thinning, _initial_state(cfg))
        _emit(rep, cfg)
        if rep.distribution is not None:
            tv = total_variation(rep.distribution, stationary_exact(cfg.n, cfg.p))
            return f"{rep.samples} samples; total variation to exact stationary law {tv:.6g}"
        return f"{rep.samples} samples; median sup-distance {rep.quantiles['q50']:.6g}"
    if name == "stationary-exact":
        pi = stationary_exact(cfg.n, cfg.p)
        _emit(pi, cfg)
        return f"{len(pi.index)} states; most likely {pi.index[int(pi.probs.argmax())]}"
    if name == "cycle":
        lam = _initial_state(cfg)
        rep = cycle_detect(lam)
        _emit(rep, cfg)
        return f"tail {rep.tail_length}, cycle length {rep.cycle_length}, all near-triangular: {all(rep.near_triangular)}"
    if name == "marginals":
        stats = alpha_marginal_check(cfg.n, cfg.p, cfg.m, cfg.ks, cfg.trials, cfg.seed, _initial_state(cfg))
        _emit(stats, cfg)
        return "; ".join(f"k={s.k}: z={s.z_mean:+.2f}, var ratio {s.variance_ratio:.3f}" for s in stats)
    if name == "bounds":
        m = cfg.m if cfg.m is not None else default_rounds(cfg.epsilon, cfg.n)
        bound = finite_n_bound(cfg.n, cfg.p, cfg.epsilon, m)
        _emit(bound, cfg)
        return (
            f"f(eps)={theorem_rate(cfg.epsilon):.6g}, m={m}: regime1 {bound.regime1:.3g}, "
            f"regime2 {bound.regime2:.3g}, combined {bound.combined:.3g}; "
            f"uniform gap(p) {uniform_conv_gap(cfg.p):.3g}"
        )
    if name == "popov":
        rep = popov_comparison(cfg.n, cfg.p, cfg.m, cfg.trials, cfg.seed, initial=_initial_state(cfg))
        _emit(rep, cfg)
        if cfg.plot:
            emit_svg_plot(rep.pile_snapshots[0], cfg.plot, None, f"pile-based, n={cfg.n}, p={cfg.p}")
        return f"mean piles {rep.pile_lengths.mean():.1f}, mean largest pile {rep.pile_largest.mean():.1f}"
    raise UsageError(f"unknown subcommand {name!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg = parse_cli(argv)
    try:
        print(run(cfg))
    except UsageError as exc:
        print(f"bulgarian {cfg.subcommand}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"bulgarian {cfg.subcommand}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
