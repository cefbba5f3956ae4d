"""JSON configuration documents and deterministic report serialization.

A configuration is a single JSON document.  Every mathematical
expression in it is carried as an object ``{"expr": "<source>"}`` in the
expression language of :mod:`confmass.exprdsl` (bare strings are also
accepted).  Two document kinds exist:

``chart``::

    {
      "schema_version": 1,
      "kind": "chart",
      "name": "isotropic",
      "n": 3, "tau": 0.99, "r_min": 1.0,
      "params": {"m": 1.0},
      "metric": {"11": {"expr": "(1 + m/(2*r))^4"}, ...},
      "lee":    [{"expr": "0"}, ...],
      "spinors": [{"name": "const-plus", "weight": -0.5,
                   "components": [{"re": {"expr": "1"}, "im": {"expr": "0"}},
                                  ...]}]
    }

Metric keys are "ij" with 1-based single digits, i <= j; missing entries
default to the identity.  ``lee`` (optional) lists the n covector
components, default zero.  ``spinors`` (optional) names spinor fields
for flux commands.

``end_system``::

    {
      "schema_version": 1,
      "kind": "end_system",
      "name": "twoends",
      "ends": [{"a": 1.0, "chart": { ...chart fields... }}, ...]
    }

Reports are JSON with sorted keys, two-space indent, and no run
metadata that could vary between identical runs (no timestamps, no host
info), so identical inputs serialize byte-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .chart import ChartError, End, EndSystem, MetricChart, make_chart
from .spinor import SpinorFieldSpec, make_spinor_spec

__all__ = [
    "SCHEMA_VERSION",
    "ConfigError",
    "LoadedConfig",
    "parse_config",
    "load_config",
    "bundled_names",
    "bundled_text",
    "load_expected",
    "dump_report",
]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed configuration document."""


def _expr_source(node, where: str) -> str:
    if isinstance(node, str):
        return node
    if isinstance(node, dict) and set(node) == {"expr"} and isinstance(node["expr"], str):
        return node["expr"]
    raise ConfigError(f"{where}: expected an expression string or {{\"expr\": ...}}, "
                      f"got {node!r}")


def _require(doc: dict, key: str, types, where: str):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field {key!r}")
    v = doc[key]
    if not isinstance(v, types):
        raise ConfigError(f"{where}: field {key!r} has wrong type {type(v).__name__}")
    return v


@dataclass(frozen=True)
class LoadedConfig:
    """A parsed configuration document."""

    kind: str  # "chart" | "end_system"
    name: str
    chart: MetricChart | None
    system: EndSystem | None
    spinors: tuple  # ((name, SpinorFieldSpec), ...)
    doc: dict

    @property
    def n(self) -> int:
        return self.chart.n if self.chart is not None else self.system.n

    def any_chart(self) -> MetricChart:
        """The chart itself, or the first end's chart."""
        return self.chart if self.chart is not None else self.system.ends[0].chart


def _parse_spinors(doc: dict, where: str) -> tuple:
    out = []
    for k, sp in enumerate(doc.get("spinors", ())):
        w = f"{where}.spinors[{k}]"
        if not isinstance(sp, dict):
            raise ConfigError(f"{w}: expected an object")
        name = sp.get("name", f"spinor{k}")
        weight = _require(sp, "weight", (int, float), w)
        comps = _require(sp, "components", list, w)
        pairs = []
        for c, comp in enumerate(comps):
            wc = f"{w}.components[{c}]"
            if not isinstance(comp, dict):
                raise ConfigError(f"{wc}: expected an object with re/im")
            pairs.append((_expr_source(comp.get("re", "0"), wc + ".re"),
                          _expr_source(comp.get("im", "0"), wc + ".im")))
        try:
            spec = make_spinor_spec(pairs, float(weight))
        except (ValueError, ArithmeticError) as e:
            raise ConfigError(f"{w}: {e}") from e
        out.append((str(name), spec))
    return tuple(out)


def _parse_chart_fields(doc: dict, where: str, name: str) -> MetricChart:
    n = _require(doc, "n", int, where)
    tau = _require(doc, "tau", (int, float), where)
    r_min = _require(doc, "r_min", (int, float), where)
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{where}: params must be an object")
    metric_doc = doc.get("metric", {})
    if not isinstance(metric_doc, dict):
        raise ConfigError(f"{where}: metric must be an object of 'ij' entries")
    metric = {k: _expr_source(v, f"{where}.metric.{k}") for k, v in metric_doc.items()}
    lee_doc = doc.get("lee")
    lee = None
    if lee_doc is not None:
        if not isinstance(lee_doc, list):
            raise ConfigError(f"{where}: lee must be a list of {n} components")
        lee = [_expr_source(v, f"{where}.lee[{i}]") for i, v in enumerate(lee_doc)]
    try:
        return make_chart(n, float(tau), float(r_min), metric=metric, lee=lee,
                          params={str(k): float(v) for k, v in params.items()},
                          name=name)
    except (ChartError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from e


def parse_config(doc: dict, source: str = "config") -> LoadedConfig:
    """Validate a parsed JSON document and build its chart(s)."""
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    version = _require(doc, "schema_version", int, source)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{source}: unsupported schema_version {version} "
                          f"(this build reads {SCHEMA_VERSION})")
    kind = _require(doc, "kind", str, source)
    name = str(doc.get("name", source))

    if kind == "chart":
        chart = _parse_chart_fields(doc, source, name)
        return LoadedConfig(kind=kind, name=name, chart=chart, system=None,
                            spinors=_parse_spinors(doc, source), doc=doc)

    if kind == "end_system":
        ends_doc = _require(doc, "ends", list, source)
        if not ends_doc:
            raise ConfigError(f"{source}: end system needs at least one end")
        ends = []
        for k, e in enumerate(ends_doc):
            w = f"{source}.ends[{k}]"
            if not isinstance(e, dict):
                raise ConfigError(f"{w}: expected an object")
            a = e.get("a", 1.0)
            if not isinstance(a, (int, float)) or not a > 0:
                raise ConfigError(f"{w}: 'a' must be a positive number")
            chart_doc = _require(e, "chart", dict, w)
            cname = str(chart_doc.get("name", f"{name}-end{k}"))
            ends.append(End(chart=_parse_chart_fields(chart_doc, w + ".chart", cname),
                            a=float(a)))
        dims = {end.chart.n for end in ends}
        if len(dims) > 1:
            raise ConfigError(f"{source}: all ends must share one dimension, got {dims}")
        system = EndSystem(ends=tuple(ends), name=name)
        return LoadedConfig(kind=kind, name=name, chart=None, system=system,
                            spinors=_parse_spinors(doc, source), doc=doc)

    raise ConfigError(f"{source}: unknown kind {kind!r} (chart | end_system)")


# ---------------------------------------------------------------------------
# bundled documents

def _data_root():
    return resources.files("confmass").joinpath("data")


def bundled_names() -> list:
    """Names of the shipped configuration documents."""
    return sorted(p.name for p in _data_root().iterdir()
                  if p.name.endswith((".chart", ".ends")))


def bundled_text(name: str) -> str | None:
    """Raw text of a bundled document, trying common suffixes."""
    root = _data_root()
    for cand in (name, name + ".chart", name + ".ends"):
        p = root.joinpath(cand)
        if p.is_file():
            return p.read_text()
    return None


def load_config(path_or_name: str) -> LoadedConfig:
    """Load a config from a filesystem path or a bundled name."""
    import os

    if os.path.isfile(path_or_name):
        with open(path_or_name, "r") as f:
            text = f.read()
        source = os.path.basename(path_or_name)
    else:
        text = bundled_text(path_or_name)
        if text is None:
            raise ConfigError(
                f"{path_or_name!r} is neither a file nor a bundled config "
                f"(bundled: {', '.join(bundled_names())})")
        source = path_or_name
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: invalid JSON: {e}") from e
    return parse_config(doc, source)


def load_expected() -> dict:
    """Frozen expected values for the bundled corpus (used by tests)."""
    return json.loads(_data_root().joinpath("expected.json").read_text())


# ---------------------------------------------------------------------------
# reports

def dump_report(report: dict) -> str:
    """Canonical JSON serialization: sorted keys, stable float repr."""
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"
