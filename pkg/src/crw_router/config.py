"""Flat ``name = value`` configuration files and packaged figure recipes.

Besides :class:`~crw_router.model.SystemParams` fields (and the aliases
``omega``, ``g_a``, ``g_s``, ``Omega``) a file may carry run options:

``command``   spectrum | nonreciprocity | scatfreq | validate | wavepacket
``grid``      ``name:start:stop:count``; repeatable, at most two
``quantity``  comma-separated quantity names; repeatable
``engine``    closed | solver | auto
``E``/``Delta``  fixed incident energy or detuning for grids without one
``figure``, ``source``   free text describing where the recipe comes from

Numbers may be written as small expressions in ``pi`` (``3*pi/2``).
"""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError, ViolatedInvariant
from .model import ALIASES, SystemParams, validate

__all__ = ["RunConfig", "parse_config", "load_config", "load_recipe", "list_recipes",
           "parse_grid", "parse_number"]

_OPTION_KEYS = {"command", "grid", "quantity", "engine", "E", "Delta", "figure", "source",
                "carrier_Delta", "energy_spread"}
_REPEATABLE = {"grid", "quantity"}
_TEXT_KEYS = {"command", "engine", "figure", "source"}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_number(text: str) -> float:
    """Evaluate a numeric literal or arithmetic expression in ``pi``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError:
        raise ValueError(f"not a number: {text!r}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        raise ValueError(f"not a number: {text!r}")

    return ev(tree)


def parse_grid(text: str) -> tuple[str, float, float, int]:
    """Split ``name:start:stop:count``."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ValueError(f"grid must be name:start:stop:count, got {text!r}")
    name = parts[0].strip()
    start, stop = parse_number(parts[1]), parse_number(parts[2])
    count = parse_number(parts[3])
    if count != int(count) or count < 1:
        raise ValueError(f"grid count must be a positive integer, got {parts[3]!r}")
    return name, start, stop, int(count)


@dataclass
class RunConfig:
    params: SystemParams
    options: dict = field(default_factory=dict)
    path: str | None = None

    @property
    def grids(self) -> list:
        return list(self.options.get("grid", []))

    @property
    def quantities(self) -> list:
        return list(self.options.get("quantity", []))


def parse_config(text: str, path=None, base: SystemParams | None = None) -> RunConfig:
    values = {}
    alias_values = {}
    options: dict = {}
    fields = set(SystemParams.field_names())
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'name = value', got {raw.strip()!r}", lineno, path)
        key, value = (s.strip() for s in line.split("=", 1))
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno, path)
        try:
            if key in _OPTION_KEYS:
                if key in _TEXT_KEYS:
                    parsed = value
                elif key == "grid":
                    parse_grid(value)
                    parsed = value
                elif key == "quantity":
                    parsed = [q.strip() for q in value.split(",") if q.strip()]
                else:
                    parsed = parse_number(value)
                if key in _REPEATABLE:
                    bucket = options.setdefault(key, [])
                    bucket.extend(parsed if isinstance(parsed, list) else [parsed])
                else:
                    options[key] = parsed
            elif key in fields or key in ALIASES:
                number = parse_number(value)
                if key == "l":
                    if number != int(number):
                        raise ValueError(f"l must be an integer, got {value!r}")
                    number = int(number)
                (alias_values if key in ALIASES else values)[key] = number
            else:
                raise ConfigError(f"unknown key {key!r}", lineno, path)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), lineno, path) from None
    if len(options.get("grid", [])) > 2:
        raise ConfigError("at most two grid axes", None, path)
    params = (base or SystemParams()).with_values(**alias_values).with_values(**values)
    try:
        validate(params)
    except ViolatedInvariant as exc:
        raise ConfigError(str(exc), _line_of(text, exc.field), path) from None
    return RunConfig(params, options, None if path is None else str(path))


def _line_of(text, key):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if "=" in line:
            k = line.split("=", 1)[0].strip()
            if k == key or (k in ALIASES and key in ALIASES[k]):
                return lineno
    return None


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, path) from None
    return parse_config(text, path)


def list_recipes() -> list[str]:
    root = resources.files("crw_router") / "recipes"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".conf"))


def recipe_text(name: str) -> str:
    root = resources.files("crw_router") / "recipes"
    entry = root / f"{name}.conf"
    if not entry.is_file():
        raise ConfigError(f"no recipe named {name!r}")
    return entry.read_text()


def load_recipe(name: str) -> RunConfig:
    return parse_config(recipe_text(name), f"recipes/{name}.conf")
