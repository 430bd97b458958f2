"""Flat ``key = value`` run configuration.

Lines look like ``flow.omega = 1.0``; ``#`` starts a comment.  Unknown keys and
bad values are reported with their line number.
"""
from __future__ import annotations

from pathlib import Path

from .dynamics import FlowParams, InitialData, SimConfig
from .spectral import KernelSpec


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def _float_list(text: str) -> list:
    return [float(x) for x in text.replace(",", " ").split()]


def _sign(text: str) -> int:
    t = text.strip()
    if t in ("+", "+1", "1", "plus"):
        return 1
    if t in ("-", "-1", "minus"):
        return -1
    raise ValueError(f"sign must be + or -, got {t!r}")


def _positive(conv):
    def check(text):
        v = conv(text)
        if not v > 0:
            raise ValueError("must be positive")
        return v
    return check


def _nonnegative(conv):
    def check(text):
        v = conv(text)
        if v < 0:
            raise ValueError("must be nonnegative")
        return v
    return check


def _kind(text: str) -> str:
    if text not in ("isotropic", "nematic", "fourier", "even"):
        raise ValueError("must be isotropic, nematic, fourier or even")
    return text


# key -> (parser, default)
SCHEMA = {
    "kernel.b": (_nonnegative(float), 6.0),
    "flow.omega": (float, 0.0),
    "flow.s": (_nonnegative(float), 0.0),
    "flow.alpha": (float, 0.0),
    "n_modes": (_positive(int), 64),
    "dt": (_positive(float), 1e-3),
    "t_end": (_positive(float), 10.0),
    "record_every": (_positive(int), 100),
    "seed": (_nonnegative(int), 0),
    "initial.kind": (_kind, "fourier"),
    "initial.sign": (_sign, 1),
    "initial.amplitude": (float, 0.05),
    "initial.decay": (float, 0.7),
    "steady.sign": (_sign, 1),
    "linear.n_modes": (_positive(int), 64),
    "classify.tol_s": (_positive(float), 1e-7),
    "classify.tol_var": (_positive(float), 1e-3),
    "classify.max_iters": (_positive(int), 200),
    "sweep.b": (_float_list, [0.5, 6.0]),
    "sweep.s": (_float_list, [0.05]),
    "sweep.omega": (_float_list, [1.0]),
}


def defaults() -> dict:
    return {k: (list(v) if isinstance(v, list) else v) for k, (_, v) in SCHEMA.items()}


def parse_config(text: str, source: str = "<config>") -> dict:
    values = defaults()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno, source)
        try:
            values[key] = SCHEMA[key][0](val)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno, source) from None
    return values


def load_config(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", None, str(p)) from None
    return parse_config(text, str(p))


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, list):
        return ", ".join(f"{x:.17g}" for x in v)
    return str(v)


def dump_config(values: dict) -> str:
    """Inverse of :func:`parse_config` for the known keys."""
    lines = []
    for key in SCHEMA:
        v = values[key]
        if key.endswith("sign"):
            v = "+" if v > 0 else "-"
        lines.append(f"{key} = {format_value(v)}")
    return "\n".join(lines) + "\n"


def to_sim_config(values: dict) -> SimConfig:
    init = InitialData(kind=values["initial.kind"], sign=values["initial.sign"],
                       seed=values["seed"], amplitude=values["initial.amplitude"],
                       decay=values["initial.decay"])
    return SimConfig(
        kernel=KernelSpec.maier_saupe(values["kernel.b"]),
        flow=FlowParams(values["flow.omega"], values["flow.s"], values["flow.alpha"]),
        n_modes=values["n_modes"],
        dt=values["dt"],
        t_end=values["t_end"],
        record_every=values["record_every"],
        initial=init,
    )
