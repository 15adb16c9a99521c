"""Command-line experiment runner.

Every experiment writes one CSV (data) and one JSON file (resolved
configuration and run status) next to it. Plotting is left to other tools.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .channel import SquareNoiseMode
from .core import (DEFAULT_C_DIM, ChannelModel, LinkParams, ReceiverKind,
                   db_to_linear)
from .montecarlo import SimConfig, point_seed, sweep
from .theory import average_optimal_rho, capacity

log = logging.getLogger("splitrx")

BER_COLUMNS = ["rho", "snr_db", "receiver", "m_order", "ns", "sigma_e2",
               "ber_theory", "ber_sim", "ci95_low", "ci95_high", "trials", "seed"]
CAPACITY_COLUMNS = ["rho", "snr_db", "receiver", "m_order", "capacity",
                    "stderr", "draws", "seed"]
OPTIMAL_RHO_COLUMNS = ["snr_db", "receiver", "sigma_e2", "channel", "rho_opt",
                       "stderr", "draws", "seed"]

KINDS = ("ber-vs-rho", "ber-vs-snr", "capacity-vs-rho", "optimal-rho")
PAPER_NAKAGAMI = ChannelModel.nakagami(1.12, 0.05, 0.59)


class SpecError(ValueError):
    pass


# ---------------------------------------------------------------------------
# value parsing
# ---------------------------------------------------------------------------

def parse_grid(text: str) -> tuple[float, ...]:
    """``"a:step:b"`` (inclusive) or a comma list ``"a,b,c"``."""
    text = str(text).strip()
    if not text:
        raise SpecError("empty grid")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise SpecError(f"grid {text!r} must look like start:step:stop")
        start, step, stop = (float(x) for x in parts)
        if step <= 0 or stop < start:
            raise SpecError(f"grid {text!r} is empty or has a non-positive step")
        n = int(math.floor((stop - start) / step + 1e-9))
        return tuple(float(round(start + i * step, 12)) for i in range(n + 1))
    return tuple(float(x) for x in text.split(",") if x.strip())


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt_list(xs) -> str:
    return ",".join(_fmt_float(x) if isinstance(x, float) else str(x) for x in xs)


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


def parse_channel(name: str, nakagami: Optional[str] = None,
                  normalize: bool = False) -> ChannelModel:
    name = name.strip().lower()
    if name == "gaussian":
        return ChannelModel.gaussian()
    if name == "nakagami":
        if nakagami:
            m, om, z = (float(v) for v in nakagami.split(","))
        else:
            m, om, z = PAPER_NAKAGAMI.m_shape, PAPER_NAKAGAMI.omega, PAPER_NAKAGAMI.z_gen
        return ChannelModel.nakagami(m, om, z, normalize)
    raise SpecError(f"unknown channel {name!r}")


# ---------------------------------------------------------------------------
# experiment description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a sweep axis plus the fixed coordinates around it.

    ``rho`` is a number or ``"opt"`` (the fading-averaged optimal ratio,
    only meaningful for ``ber-vs-snr``). ``snr_db`` is the swept grid for
    ``ber-vs-snr``/``optimal-rho`` and a list of fixed values otherwise.
    """

    name: str = "experiment"
    kind: str = "ber-vs-rho"
    receivers: tuple[str, ...] = ("sdjd",)
    rho_grid: tuple[float, ...] = tuple(float(round(i * 0.01, 12)) for i in range(101))
    snr_db: tuple[float, ...] = (9.0,)
    rho: str = "0.5"
    m_orders: tuple[int, ...] = (2,)
    ns: tuple[int, ...] = (1,)
    c_dim: float = DEFAULT_C_DIM
    sigma_e2: tuple[float, ...] = (0.0,)
    channel: str = "gaussian"
    nakagami: str = "1.12,0.05,0.59"
    normalize_fading: bool = False
    symbols: int = 1_000_000
    draws: int = 100_000
    seed: int = 1
    workers: int = 1
    square_noise: str = "gaussian"
    out: str = "results.csv"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown experiment kind {self.kind!r}")
        for r in self.receivers:
            ReceiverKind.parse(r)
        SquareNoiseMode(self.square_noise)
        self.channel_model()
        if self.rho != "opt":
            float(self.rho)

    # the flat file format: one ``key = value`` per line, '#' comments
    def to_config(self) -> str:
        lines = [f"# splitrx experiment {self.name}"]
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                s = _fmt_list(v)
            elif isinstance(v, bool):
                s = "true" if v else "false"
            elif isinstance(v, float):
                s = _fmt_float(v)
            else:
                s = str(v)
            lines.append(f"{f.name} = {s}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_config(cls, text: str, base: "ExperimentSpec | None" = None) -> "ExperimentSpec":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SpecError(f"line {lineno}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            values[k.replace("-", "_")] = v
        return (base or cls()).updated(values)

    def updated(self, values: dict) -> "ExperimentSpec":
        known = {f.name: f for f in fields(self)}
        kw = {}
        for k, v in values.items():
            if k not in known:
                raise SpecError(f"unknown key {k!r}")
            if not isinstance(v, str):
                kw[k] = v
                continue
            cur = getattr(self, k)
            if k == "receivers":
                kw[k] = tuple(x.strip().lower() for x in v.split(",") if x.strip())
            elif k in ("m_orders", "ns"):
                kw[k] = tuple(int(x) for x in v.split(",") if x.strip())
            elif k in ("rho_grid", "snr_db", "sigma_e2"):
                kw[k] = parse_grid(v)
            elif isinstance(cur, bool):
                kw[k] = v.lower() in ("1", "true", "yes", "on")
            elif isinstance(cur, int):
                kw[k] = int(float(v))
            elif isinstance(cur, float):
                kw[k] = float(v)
            else:
                kw[k] = v
        try:
            return replace(self, **kw)
        except (TypeError, ValueError) as exc:
            raise SpecError(str(exc)) from exc

    def channel_model(self) -> ChannelModel:
        return parse_channel(self.channel, self.nakagami, self.normalize_fading)

    def link(self, snr_db: float, m_order: int, ns: int, sigma_e2: float,
             rho: float = 0.5) -> LinkParams:
        return LinkParams.from_snr_db(snr_db, m_order=m_order, rho=rho,
                                      c_dim=self.c_dim, ns=ns, sigma_e2=sigma_e2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["resolved_channel"] = self.channel_model().describe()
        return d


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def _presets() -> dict[str, tuple[str, list[ExperimentSpec]]]:
    both = ("gaussian", "nakagami")
    rho01 = parse_grid("0:0.01:1")
    return {
        "fig3": ("capacity vs rho, 2-PPM, SNR 6 and 9 dB, Gaussian and generalized Nakagami", [
            ExperimentSpec(name=f"fig3_{ch}", kind="capacity-vs-rho",
                           receivers=("cd", "ed", "sdsd", "sdjd"), rho_grid=rho01,
                           snr_db=(6.0, 9.0), channel=ch)
            for ch in both]),
        "fig5": ("BER vs rho, 2-PPM and 4-PPM, SNR 9 dB, sigma_e2 = 0 and 0.001, both channels", [
            ExperimentSpec(name=f"fig5_{ch}", kind="ber-vs-rho", receivers=("sdsd", "sdjd"),
                           rho_grid=rho01, snr_db=(9.0,), m_orders=(2, 4),
                           sigma_e2=(0.0, 0.001), channel=ch)
            for ch in both]),
        "fig6": ("BER vs rho with spreading, 2-PPM, Ns = 1 and 2, SNR 6 and 9 dB, Nakagami", [
            ExperimentSpec(name="fig6_nakagami", kind="ber-vs-rho", receivers=("sdsd", "sdjd"),
                           rho_grid=rho01, snr_db=(6.0, 9.0), ns=(1, 2), channel="nakagami")]),
        "fig7": ("optimal rho vs SNR, sigma_e2 = 0 and 0.0001, both channels", [
            ExperimentSpec(name=f"fig7_{ch}", kind="optimal-rho", receivers=("sdsd", "sdjd"),
                           snr_db=parse_grid("0:1:20"), sigma_e2=(0.0, 0.0001), channel=ch,
                           draws=200_000)
            for ch in both]),
        "fig8": ("average BER vs SNR at the averaged optimal rho, sigma_e2 = 0 and 0.0001, Nakagami", [
            ExperimentSpec(name="fig8_nakagami", kind="ber-vs-snr",
                           receivers=("ed", "cd", "sdsd", "sdjd"), snr_db=parse_grid("0:2:20"),
                           rho="opt", sigma_e2=(0.0, 0.0001), channel="nakagami")]),
    }


PRESETS = _presets()


def list_presets() -> list[dict]:
    rows = []
    for name, (desc, specs) in PRESETS.items():
        s = specs[0]
        rows.append({
            "name": name,
            "figure": f"Fig. {name[3:]}",
            "description": desc,
            "kind": s.kind,
            "channels": ",".join(sp.channel for sp in specs),
            "nakagami": s.nakagami,
            "receivers": ",".join(s.receivers),
        })
    return rows


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _series_tag(*parts) -> str:
    return "|".join(str(p) for p in parts)


def _averaged_rho_rule(kind, channel, sigma_e2, draws):
    def rule(cfg):
        return average_optimal_rho(kind, cfg.params.snr, cfg.params.c_dim, channel,
                                   sigma_e2, n_draws=draws, seed=cfg.seed)[0]
    return rule


def _run_ber(spec: ExperimentSpec):
    channel = spec.channel_model()
    rows, errors = [], []
    axis = "rho" if spec.kind == "ber-vs-rho" else "snr_db"
    fixed_snr = spec.snr_db if axis == "rho" else (None,)
    for m in spec.m_orders:
        for ns in spec.ns:
            for se2 in spec.sigma_e2:
                for snr in fixed_snr:
                    for rname in spec.receivers:
                        kind = ReceiverKind.parse(rname)
                        tag = _series_tag(axis, m, ns, snr)
                        base_rho = 0.5 if spec.rho == "opt" else float(spec.rho)
                        params = spec.link(snr if snr is not None else 0.0, m, ns, se2, base_rho)
                        template = SimConfig(params, channel, kind, spec.symbols,
                                             point_seed(spec.seed, tag, 0.0), spec.workers,
                                             spec.square_noise)
                        rule = None
                        if axis == "snr_db" and spec.rho == "opt" and kind in (
                                ReceiverKind.SDSD, ReceiverKind.SDJD):
                            rule = _averaged_rho_rule(kind, channel, se2, spec.draws)
                        grid = spec.rho_grid if axis == "rho" else spec.snr_db
                        for pt in sweep(axis, grid, template, rho_for_point=rule,
                                        theory_draws=spec.draws):
                            p = pt.config.params
                            if pt.error:
                                errors.append({"receiver": rname, axis: pt.point, "error": pt.error})
                            rows.append({
                                "rho": kind.effective_rho(p.rho) if kind in (
                                    ReceiverKind.CD, ReceiverKind.ED) else p.rho,
                                "snr_db": snr if axis == "rho" else pt.point,
                                "receiver": kind.value, "m_order": m, "ns": ns,
                                "sigma_e2": se2,
                                "ber_theory": pt.theory.ber if pt.theory else None,
                                "ber_sim": pt.sim.ber if pt.sim else None,
                                "ci95_low": pt.sim.ci95_low if pt.sim else None,
                                "ci95_high": pt.sim.ci95_high if pt.sim else None,
                                "trials": pt.sim.trials if pt.sim else None,
                                "seed": pt.config.seed,
                            })
    return BER_COLUMNS, rows, errors


def _run_capacity(spec: ExperimentSpec):
    channel = spec.channel_model()
    rows, errors = [], []
    for m in spec.m_orders:
        for snr in spec.snr_db:
            for rname in spec.receivers:
                kind = ReceiverKind.parse(rname)
                for rho in spec.rho_grid:
                    seed = point_seed(spec.seed, _series_tag("capacity", m, snr), rho)
                    try:
                        est = capacity(kind, float(db_to_linear(snr)), kind.effective_rho(rho),
                                       spec.c_dim, m, channel, spec.draws, seed)
                        cap, se = est.capacity, est.stderr
                    except Exception as exc:  # noqa: BLE001
                        errors.append({"receiver": rname, "rho": rho, "error": str(exc)})
                        cap = se = None
                    rows.append({"rho": kind.effective_rho(rho), "snr_db": snr,
                                 "receiver": kind.value, "m_order": m, "capacity": cap,
                                 "stderr": se, "draws": spec.draws, "seed": seed})
    return CAPACITY_COLUMNS, rows, errors


def _run_optimal_rho(spec: ExperimentSpec):
    channel = spec.channel_model()
    channels = [("gaussian", ChannelModel.gaussian())]
    if channel.is_fading:
        channels.append(("nakagami", channel))
    rows, errors = [], []
    for cname, ch in channels:
        for se2 in spec.sigma_e2:
            for rname in spec.receivers:
                kind = ReceiverKind.parse(rname)
                for snr in spec.snr_db:
                    seed = point_seed(spec.seed, _series_tag("rho*", cname, se2), snr)
                    try:
                        mean, se = average_optimal_rho(kind, float(db_to_linear(snr)),
                                                       spec.c_dim, ch, se2, spec.draws, seed)
                    except Exception as exc:  # noqa: BLE001
                        errors.append({"receiver": rname, "snr_db": snr, "error": str(exc)})
                        mean = se = None
                    draws = spec.draws if (ch.is_fading or se2 > 0) else 0
                    rows.append({"snr_db": snr, "receiver": kind.value, "sigma_e2": se2,
                                 "channel": cname, "rho_opt": mean, "stderr": se,
                                 "draws": draws, "seed": seed})
    return OPTIMAL_RHO_COLUMNS, rows, errors


def render_csv(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([r[c] if isinstance(r[c], str) else _num(r[c]) for c in columns])
    return buf.getvalue()


def run_experiment(spec: ExperimentSpec) -> int:
    """Run ``spec``, write ``<out>`` (CSV) and ``<out>.json``; return the exit status."""
    if spec.kind in ("ber-vs-rho", "ber-vs-snr"):
        columns, rows, errors = _run_ber(spec)
    elif spec.kind == "capacity-vs-rho":
        columns, rows, errors = _run_capacity(spec)
    else:
        columns, rows, errors = _run_optimal_rho(spec)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_csv(columns, rows))
    summary = {
        "version": __version__,
        "spec": spec.to_dict(),
        "columns": list(columns),
        "rows": len(rows),
        "errors": errors,
        "status": "error" if errors else "ok",
    }
    with open(out.with_suffix(".json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("wrote %s (%d rows, %d errors)", out, len(rows), len(errors))
    return 1 if errors else 0


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

_FLAG_TO_KEY = {
    "receiver": "receivers", "m_order": "m_orders", "snr_db": "snr_db",
    "c_dim": "c_dim", "ns": "ns", "sigma_e2": "sigma_e2", "channel": "channel",
    "nakagami": "nakagami", "symbols": "symbols", "seed": "seed",
    "workers": "workers", "out": "out", "square_noise": "square_noise",
    "draws": "draws",
}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--receiver", help="comma list of cd, ed, sdsd, sdjd")
    p.add_argument("--m-order", help="comma list of PPM orders")
    p.add_argument("--snr-db", help="dB value, comma list or start:step:stop")
    p.add_argument("--rho", help="rho grid (start:step:stop or list), or a value/'opt' for ber-vs-snr")
    p.add_argument("--c-dim", type=float)
    p.add_argument("--ns", help="comma list of spreading lengths")
    p.add_argument("--sigma-e2", help="comma list of estimation-error variances")
    p.add_argument("--channel", choices=["gaussian", "nakagami"])
    p.add_argument("--nakagami", metavar="M,OMEGA,Z")
    p.add_argument("--normalize-fading", action="store_true", default=None)
    p.add_argument("--symbols", type=int)
    p.add_argument("--draws", type=int, help="Monte Carlo draws for theory/capacity expectations")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--square-noise", choices=["gaussian", "gamma"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splitrx", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "ber-vs-rho": "simulated and theoretical BER over a splitting-ratio grid",
        "ber-vs-snr": "simulated and theoretical BER over an SNR grid",
        "capacity-vs-rho": "Monte Carlo capacity over a splitting-ratio grid",
        "optimal-rho": "closed-form and fading-averaged optimal splitting ratio",
    }
    for kind in KINDS:
        _add_common(sub.add_parser(kind, help=helps[kind]))
    rp = sub.add_parser("reproduce", help="run a figure preset")
    rp.add_argument("preset", choices=sorted(PRESETS))
    _add_common(rp)
    sub.add_parser("list-presets", help="show the figure presets")
    return parser


def _overrides(args, kind: str) -> dict:
    values = {}
    for flag, key in _FLAG_TO_KEY.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = str(v)
    if getattr(args, "rho", None) is not None:
        if kind == "ber-vs-snr":
            values["rho"] = args.rho
        else:
            values["rho_grid"] = args.rho
    if getattr(args, "normalize_fading", None):
        values["normalize_fading"] = "true"
    return values


def _spec_from_args(args, base: ExperimentSpec) -> ExperimentSpec:
    spec = base
    if args.config:
        spec = ExperimentSpec.from_config(Path(args.config).read_text(encoding="utf-8"), spec)
    return spec.updated(_overrides(args, spec.kind))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list-presets":
            for row in list_presets():
                print(f"{row['name']:6s} {row['figure']:7s} {row['description']} "
                      f"[nakagami m,omega,z = 1.12,0.05,0.59]")
            return 0
        if args.command == "reproduce":
            _, specs = PRESETS[args.preset]
            outdir = Path(args.out or args.preset)
            status = 0
            for base in specs:
                spec = _spec_from_args(args, base)
                if args.channel is not None:
                    log.warning("--channel is ignored by presets")
                spec = replace(spec, channel=base.channel, out=str(outdir / f"{base.name}.csv"))
                status |= run_experiment(spec)
            return status
        base = ExperimentSpec(name=args.command, kind=args.command)
        if args.command != "ber-vs-rho":
            base = replace(base, receivers=("sdsd", "sdjd"))
        if args.command == "ber-vs-snr":
            base = replace(base, snr_db=parse_grid("0:2:20"))
        spec = _spec_from_args(args, base)
        return run_experiment(spec)
    except (SpecError, ValueError, OSError) as exc:
        print(f"splitrx: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
