"""Run configuration: JSON parsing, schema validation, and object assembly.

A configuration is a JSON document with nested sections. Validation walks
the whole document before anything is built, so a bad config reports every
problem at once, each tagged with its dotted field path. Unknown keys are
rejected rather than ignored; a typo should never silently fall back to a
default.

Required fields: grid.n_modes (even, >= 32), time.t_end, initial.m,
initial.n. Everything else has documented defaults.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

from . import littlewood as lp
from . import model as md
from . import stepping as st

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "output_root"]

ENV_OUTPUT_ROOT = "CHBESOV_OUTPUT_ROOT"

_SCHEDULE_KEYS = {
    "constant": ({"value"}, set()),
    "exp_decay": ({"amplitude", "rate"}, set()),
    "table": ({"points"}, set()),
    "zero": (set(), set()),
}

_INITIAL_KEYS = {
    "cosine": (set(), {"wavenumber", "amplitude", "offset"}),
    "fourier_modes": ({"modes"}, set()),
    "gaussian_bump": (set(), {"center", "width", "amplitude"}),
    "random_band_limited": ({"max_mode"}, {"amplitude", "seed"}),
    "zero": (set(), set()),
}

_OVERRIDE_NAMES = {"lifespan", "critical", "noncritical", "lambda", "uniform"}

_FORMS = ("nonlocal", "damped_forq", "damped_sqq")


class ConfigError(ValueError):
    """Carries the full list of field-path validation messages."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings plus builders for the working objects."""

    n_modes: int
    t_end: float
    cfl: float
    dt_max: float
    dt_min: float
    series_every: int
    snapshot_every: int
    form: str
    lam: float | None
    alpha_spec: dict
    gamma_spec: dict
    m_spec: dict
    n_spec: dict
    lp_filter: str
    constant_c: float
    epsilon: float
    r: float
    overrides: dict
    output_dir: str
    raw: dict = field(repr=False)

    def integrator(self) -> st.IntegratorConfig:
        return st.IntegratorConfig(
            t_end=self.t_end,
            dt_max=self.dt_max,
            dt_min=self.dt_min,
            cfl=self.cfl,
            series_every=self.series_every,
            snapshot_every=self.snapshot_every,
        )

    def filter_bank(self) -> lp.DyadicFilterBank:
        return lp.build_filter_bank(self.n_modes, self.lp_filter)

    def alpha(self):
        return md.schedule_from_spec(self.alpha_spec)

    def gamma(self):
        return md.schedule_from_spec(self.gamma_spec)

    def initial(self) -> md.State:
        return md.State(
            md.initial_from_spec(self.m_spec, self.n_modes),
            md.initial_from_spec(self.n_spec, self.n_modes),
        )

    def dynamics(self):
        if self.form == "nonlocal":
            return md.NonlocalDynamics(self.alpha(), self.gamma())
        reduction = "forq" if self.form == "damped_forq" else "sqq"
        return md.DampedDynamics(self.lam, form=reduction)

    def resolved_output_dir(self) -> str:
        if os.path.isabs(self.output_dir):
            return self.output_dir
        return os.path.join(output_root(), self.output_dir)


def output_root() -> str:
    return os.environ.get(ENV_OUTPUT_ROOT, os.getcwd())


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


class _Walker:
    """Accumulates path-tagged messages while picking values out of the tree."""

    def __init__(self, raw):
        self.raw = raw
        self.errors = []

    def fail(self, path, message):
        self.errors.append(f"{path}: {message}")

    def section(self, name, allowed):
        sec = self.raw.get(name)
        if sec is None:
            return {}
        if not isinstance(sec, dict):
            self.fail(name, "must be a mapping")
            return {}
        for key in sec:
            if key not in allowed:
                self.fail(f"{name}.{key}", "unknown key")
        return sec

    def number(self, sec, path, key, default=None, required=False,
               minimum=None, exclusive=False, maximum=None):
        if key not in sec:
            if required:
                self.fail(f"{path}.{key}", "required field is missing")
            return default
        v = sec[key]
        if not _is_number(v):
            self.fail(f"{path}.{key}", f"must be a number, got {type(v).__name__}")
            return default
        v = float(v)
        if minimum is not None and (v <= minimum if exclusive else v < minimum):
            word = "greater than" if exclusive else "at least"
            self.fail(f"{path}.{key}", f"must be {word} {minimum}, got {v:g}")
            return default
        if maximum is not None and v > maximum:
            self.fail(f"{path}.{key}", f"must be at most {maximum}, got {v:g}")
            return default
        return v

    def integer(self, sec, path, key, default=None, required=False, minimum=None):
        if key not in sec:
            if required:
                self.fail(f"{path}.{key}", "required field is missing")
            return default
        v = sec[key]
        if not isinstance(v, int) or isinstance(v, bool):
            self.fail(f"{path}.{key}", f"must be an integer, got {type(v).__name__}")
            return default
        if minimum is not None and v < minimum:
            self.fail(f"{path}.{key}", f"must be at least {minimum}, got {v}")
            return default
        return v

    def choice(self, sec, path, key, options, default=None):
        if key not in sec:
            return default
        v = sec[key]
        if v not in options:
            self.fail(f"{path}.{key}", f"must be one of {', '.join(options)}, got {v!r}")
            return default
        return v

    def typed_spec(self, sec, path, key, table, required=False, default=None):
        """Validate a {"type": ..., ...} sub-document against a key table."""
        if key not in sec:
            if required:
                self.fail(f"{path}.{key}", "required field is missing")
            return default
        spec = sec[key]
        full = f"{path}.{key}"
        if not isinstance(spec, dict):
            self.fail(full, "must be a mapping with a 'type' key")
            return default
        kind = spec.get("type")
        if kind not in table:
            self.fail(f"{full}.type", f"must be one of {', '.join(sorted(table))}, got {kind!r}")
            return default
        needed, optional = table[kind]
        for k in spec:
            if k != "type" and k not in needed and k not in optional:
                self.fail(f"{full}.{k}", "unknown key")
        for k in needed:
            if k not in spec:
                self.fail(f"{full}.{k}", "required field is missing")
        return spec


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON configuration document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"document: invalid JSON ({exc})"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["document: top level must be a mapping"])

    w = _Walker(raw)
    for key in raw:
        if key not in ("grid", "time", "model", "coefficients", "initial",
                       "lp", "harness", "output"):
            w.fail(key, "unknown section")

    grid = w.section("grid", {"n_modes"})
    n_modes = w.integer(grid, "grid", "n_modes", required=True, minimum=32)
    if n_modes is not None and n_modes % 2 != 0:
        w.fail("grid.n_modes", f"must be even, got {n_modes}")

    time_sec = w.section(
        "time", {"t_end", "cfl", "dt_max", "dt_min", "series_every", "snapshot_every"}
    )
    t_end = w.number(time_sec, "time", "t_end", required=True, minimum=0.0, exclusive=True)
    cfl = w.number(time_sec, "time", "cfl", default=0.4, minimum=0.0, exclusive=True, maximum=1.0)
    dt_max = w.number(time_sec, "time", "dt_max", default=0.01, minimum=0.0, exclusive=True)
    dt_min = w.number(time_sec, "time", "dt_min", default=1e-10, minimum=0.0, exclusive=True)
    series_every = w.integer(time_sec, "time", "series_every", default=1, minimum=1)
    snapshot_every = w.integer(time_sec, "time", "snapshot_every", default=0, minimum=0)
    if dt_max is not None and dt_min is not None and dt_min >= dt_max:
        w.fail("time.dt_min", f"must be smaller than dt_max, got {dt_min:g} >= {dt_max:g}")

    model_sec = w.section("model", {"form", "lambda"})
    form = w.choice(model_sec, "model", "form", _FORMS, default="nonlocal")
    lam = w.number(model_sec, "model", "lambda", minimum=0.0)
    if form in ("damped_forq", "damped_sqq") and "lambda" not in model_sec:
        w.fail("model.lambda", f"required for form {form!r}")
    if form == "nonlocal" and "lambda" in model_sec:
        w.fail("model.lambda", "only meaningful for the damped forms")

    coeff = w.section("coefficients", {"alpha", "gamma"})
    alpha_spec = w.typed_spec(coeff, "coefficients", "alpha", _SCHEDULE_KEYS,
                              default={"type": "constant", "value": 1.0})
    gamma_spec = w.typed_spec(coeff, "coefficients", "gamma", _SCHEDULE_KEYS,
                              default={"type": "zero"})

    initial_sec = w.section("initial", {"m", "n"})
    if "initial" not in raw:
        w.fail("initial", "required section is missing")
    m_spec = w.typed_spec(initial_sec, "initial", "m", _INITIAL_KEYS, required=True)
    n_spec = w.typed_spec(initial_sec, "initial", "n", _INITIAL_KEYS, required=True)

    lp_sec = w.section("lp", {"filter"})
    lp_filter = w.choice(lp_sec, "lp", "filter", ("smooth", "sharp"), default="smooth")

    harness = w.section("harness", {"constant_C", "epsilon", "r", "overrides"})
    constant_c = w.number(harness, "harness", "constant_C", default=1.0,
                          minimum=0.0, exclusive=True)
    epsilon = w.number(harness, "harness", "epsilon", default=0.25)
    if epsilon is not None and not 0 < epsilon < 0.5:
        w.fail("harness.epsilon", f"must lie in (0, 1/2), got {epsilon:g}")
    r_raw = harness.get("r", 2)
    if r_raw == "inf":
        r_value = math.inf
    elif _is_number(r_raw) and r_raw in (1, 2):
        r_value = float(r_raw)
    else:
        w.fail("harness.r", f"must be 1, 2, or \"inf\", got {r_raw!r}")
        r_value = 2.0
    overrides = harness.get("overrides", {})
    if not isinstance(overrides, dict):
        w.fail("harness.overrides", "must be a mapping")
        overrides = {}
    else:
        for k, v in overrides.items():
            if k not in _OVERRIDE_NAMES:
                w.fail(f"harness.overrides.{k}", "unknown key")
            elif not _is_number(v) or v <= 0:
                w.fail(f"harness.overrides.{k}", f"must be a positive number, got {v!r}")

    out = w.section("output", {"directory"})
    output_dir = out.get("directory", "run")
    if not isinstance(output_dir, str) or not output_dir:
        w.fail("output.directory", "must be a nonempty string")
        output_dir = "run"

    # shape checks inside the data specs that the table-driven pass cannot see
    for label, spec in (("initial.m", m_spec), ("initial.n", n_spec)):
        if spec and spec.get("type") == "fourier_modes":
            modes = spec.get("modes")
            if not isinstance(modes, list) or any(
                not isinstance(t, (list, tuple)) or len(t) != 3 for t in modes
            ):
                w.fail(f"{label}.modes", "must be a list of [n, amplitude, phase] triples")
    for label, spec in (("coefficients.alpha", alpha_spec), ("coefficients.gamma", gamma_spec)):
        if spec and spec.get("type") == "table":
            pts = spec.get("points")
            if not isinstance(pts, list) or any(
                not isinstance(p, (list, tuple)) or len(p) != 2 for p in pts
            ):
                w.fail(f"{label}.points", "must be a list of [time, value] pairs")

    if w.errors:
        raise ConfigError(w.errors)

    return RunConfig(
        n_modes=n_modes,
        t_end=t_end,
        cfl=cfl,
        dt_max=dt_max,
        dt_min=dt_min,
        series_every=series_every,
        snapshot_every=snapshot_every,
        form=form,
        lam=lam,
        alpha_spec=alpha_spec,
        gamma_spec=gamma_spec,
        m_spec=m_spec,
        n_spec=n_spec,
        lp_filter=lp_filter,
        constant_c=constant_c,
        epsilon=epsilon,
        r=r_value,
        overrides=dict(overrides),
        output_dir=output_dir,
        raw=raw,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"document: cannot read {path} ({exc.strerror})"]) from exc
    return parse_config(text)
