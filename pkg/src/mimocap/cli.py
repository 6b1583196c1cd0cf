"""Command line front end emitting capacity sweep tables as CSV.

Subcommands: ergodic, outage, ofdm, waterfill-compare, asymptotic.  Every
flag can also come from a ``--config`` file of ``key=value`` lines (keys
spelled like the long flags, ``#`` comments allowed); explicit flags win
over file entries.  Exit status is 0 on success, 1 on an I/O failure and
2 on a usage error.
"""

import argparse
import os
import sys
from dataclasses import dataclass

from .channels import (
    AntennaConfig,
    CorrelationProfile,
    expdecay_tap_powers,
    uniform_tap_powers,
)
from .errors import InvalidProfileError, UsageError
from .estimators import SweepConfig, snr_sweep

_SUBCOMMANDS = ("ergodic", "outage", "ofdm", "waterfill-compare", "asymptotic")

_COMMON_FLAGS = ("tx", "rx", "snr-db", "trials", "seed", "workers", "out")
_PROFILE_FLAGS = ("taps", "corr", "tap-powers")
_FLAGS = {
    "ergodic": _COMMON_FLAGS,
    "outage": _COMMON_FLAGS + ("percent",),
    "ofdm": _COMMON_FLAGS + _PROFILE_FLAGS + ("tones",),
    "waterfill-compare": _COMMON_FLAGS,
    "asymptotic": ("rx", "snr-db", "out") + _PROFILE_FLAGS,
}

_HELP = {
    "tx": "transmit antennas (default 1)",
    "rx": "receive antennas (default 1)",
    "snr-db": "SNR grid in dB: start:stop:step, or a single value",
    "trials": "Monte Carlo trials per SNR point (default 10000)",
    "seed": "base RNG seed; trial t uses stream (seed, t) (default 42)",
    "workers": "worker processes; output is identical for any count",
    "taps": "number of channel taps L (default 1)",
    "corr": "receive correlation coefficient in [0, 1); 0 disables (default 0)",
    "tap-powers": "tap power profile: uniform or expdecay:<rate> (default uniform)",
    "tones": "subcarrier count n (default 64)",
    "percent": "outage percent x in (0, 100) (default 10)",
    "out": "output CSV path, or - for standard output (default -)",
    "config": "key=value file mirroring the flags; flags win on conflict",
}


@dataclass(frozen=True)
class CliInvocation:
    """A fully validated run: what to compute and where to write it."""

    subcommand: str
    sweep: SweepConfig
    out_path: str


class _Parser(argparse.ArgumentParser):
    # surface argparse failures as UsageError so main() owns the exit code
    def error(self, message):
        raise UsageError("%s\n%s" % (message, self.format_usage().rstrip()))


def _build_parser():
    parser = _Parser(
        prog="mimocap",
        description="Capacity simulations for multi-antenna fading channels.",
    )
    subparsers = parser.add_subparsers(
        dest="command",
        required=True,
        metavar="{%s}" % ",".join(_SUBCOMMANDS),
    )
    descriptions = {
        "ergodic": "Mean capacity of the flat-fading channel versus SNR.",
        "outage": "Outage capacity quantiles of the flat-fading channel.",
        "ofdm": "Tone-averaged mutual information of the multitap channel.",
        "waterfill-compare": "Uniform power versus transmitter-side water-filling.",
        "asymptotic": "Deterministic many-transmit-antenna and low-SNR formulas.",
    }
    for name in _SUBCOMMANDS:
        sub = subparsers.add_parser(name, description=descriptions[name])
        for flag in _FLAGS[name] + ("config",):
            sub.add_argument("--" + flag, help=_HELP[flag])
    return parser


def _parse_int(text):
    return int(str(text), 10)


def _parse_snr(text):
    parts = str(text).split(":")
    if len(parts) == 1:
        value = float(parts[0])
        return (value, value, 1.0)
    if len(parts) == 3:
        start, stop, step = (float(p) for p in parts)
        return (start, stop, step)
    raise ValueError("expected start:stop:step or a single value")


class _Resolver:
    """Merges flag values over config file values over defaults."""

    def __init__(self, args, config_values):
        self._args = args
        self._config = config_values

    def get(self, key, convert, default=None, required=False):
        raw = getattr(self._args, key.replace("-", "_"))
        if raw is None:
            raw = self._config.get(key)
        if raw is None:
            if required:
                raise UsageError("--%s is required" % key)
            return default
        try:
            return convert(raw)
        except (TypeError, ValueError) as exc:
            raise UsageError("bad value for --%s: %s" % (key, exc))


def _read_config(path, allowed):
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.readlines()
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError("config line %d is not key=value: %r" % (lineno, line))
        key = key.strip()
        if key not in allowed:
            raise UsageError(
                "config key %r is not a flag of this subcommand" % (key,)
            )
        values[key] = value.strip()
    return values


def _tap_power_tuple(spec, n_taps):
    text = str(spec)
    if text == "uniform":
        return uniform_tap_powers(n_taps)
    head, sep, tail = text.partition(":")
    if head == "expdecay" and sep:
        try:
            rate = float(tail)
        except ValueError:
            raise UsageError("bad value for --tap-powers: rate %r is not a number" % (tail,))
        return expdecay_tap_powers(n_taps, rate)
    raise UsageError(
        "--tap-powers must be 'uniform' or 'expdecay:<rate>', got %r" % (text,)
    )


def _build_profile(resolver):
    n_taps = resolver.get("taps", _parse_int, default=1)
    coefficient = resolver.get("corr", float, default=0.0)
    power_spec = resolver.get("tap-powers", str, default="uniform")
    kind = "uncorrelated" if coefficient == 0.0 else "exponential"
    powers = _tap_power_tuple(power_spec, n_taps)
    return CorrelationProfile(kind=kind, coefficient=coefficient, tap_powers=powers)


def _glue_negative_snr(argv):
    # argparse reads a bare "-20:0:10" as an option string, so attach
    # dash-leading SNR values to their flag with '=' before parsing
    merged = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--snr-db" and i + 1 < len(argv):
            nxt = argv[i + 1]
            if len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == "."):
                merged.append(tok + "=" + nxt)
                i += 2
                continue
        merged.append(tok)
        i += 1
    return merged


def parse_args(argv):
    """Validated CliInvocation from raw arguments; raises UsageError."""
    args = _build_parser().parse_args(_glue_negative_snr(list(argv)))
    command = args.command
    config_values = {}
    if args.config is not None:
        config_values = _read_config(args.config, allowed=set(_FLAGS[command]))
    resolver = _Resolver(args, config_values)

    snr_start, snr_stop, snr_step = resolver.get("snr-db", _parse_snr, required=True)
    out_path = resolver.get("out", str, default="-")
    try:
        if command == "asymptotic":
            sweep = SweepConfig(
                antenna=AntennaConfig(tx=1, rx=resolver.get("rx", _parse_int, default=1)),
                snr_start_db=snr_start,
                snr_stop_db=snr_stop,
                snr_step_db=snr_step,
                trials=1,
                seed=0,
                estimator="asymptotic",
                profile=_build_profile(resolver),
                workers=1,
            )
            return CliInvocation(subcommand=command, sweep=sweep, out_path=out_path)
        antenna = AntennaConfig(
            tx=resolver.get("tx", _parse_int, default=1),
            rx=resolver.get("rx", _parse_int, default=1),
        )
        common = dict(
            antenna=antenna,
            snr_start_db=snr_start,
            snr_stop_db=snr_stop,
            snr_step_db=snr_step,
            trials=resolver.get("trials", _parse_int, default=10000),
            seed=resolver.get("seed", _parse_int, default=42),
            workers=resolver.get("workers", _parse_int, default=os.cpu_count() or 1),
        )
        if command == "ergodic":
            sweep = SweepConfig(estimator="ergodic", **common)
        elif command == "outage":
            sweep = SweepConfig(
                estimator="outage",
                outage_percent=resolver.get("percent", float, default=10.0),
                **common,
            )
        elif command == "ofdm":
            sweep = SweepConfig(
                estimator="ergodic",
                profile=_build_profile(resolver),
                n_tones=resolver.get("tones", _parse_int, default=64),
                **common,
            )
        else:
            sweep = SweepConfig(estimator="waterfill-compare", **common)
    except (ValueError, InvalidProfileError) as exc:
        raise UsageError(str(exc))
    return CliInvocation(subcommand=command, sweep=sweep, out_path=out_path)


def run(invocation):
    """Executes a parsed invocation and writes its CSV; returns exit status."""
    table = snr_sweep(invocation.sweep)
    text = table.to_csv()
    if invocation.out_path == "-":
        sys.stdout.write(text)
    else:
        with open(invocation.out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    return 0


def main(argv=None):
    try:
        invocation = parse_args(sys.argv[1:] if argv is None else list(argv))
        return run(invocation)
    except UsageError as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
