"""Line-oriented experiment configuration with nested blocks.

Grammar::

    file      := item*
    item      := assignment | block | comment | blank
    assignment:= NAME '=' value-list            (one per line)
    block     := NAME '{' NEWLINE item* '}'      (a line holding only '}')
    value-list:= value (',' value)*
    value     := integer | rational 'p/q' | decimal | bare word
    comment   := '#' to end of line

Repeated assignments or blocks with the same name accumulate into a list.
A value list with one element is stored as a scalar.  Example::

    kind = rankone-disjoint
    seed = 7
    params {
      L = j
      r = 2
      J = 6
    }
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import ConfigSyntaxError, InvalidParameterError, UnknownKindError

KINDS = (
    "markov-verify",
    "rankone-build",
    "rankone-disjoint",
    "poisson-measure",
    "poisson-independence",
    "pentropy",
)

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")
_INT = re.compile(r"^[+-]?\d+$")
_RAT = re.compile(r"^[+-]?\d+/\d+$")
_DEC = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")


def parse_value(text: str):
    text = text.strip()
    if _INT.match(text):
        return int(text)
    if _RAT.match(text):
        return Fraction(text)
    if _DEC.match(text):
        return Fraction(text)
    return text


def _store(target: dict, key: str, value) -> None:
    if key in target:
        prev = target[key]
        if isinstance(prev, _Repeated):
            prev.append(value)
        else:
            target[key] = _Repeated([prev, value])
    else:
        target[key] = value


class _Repeated(list):
    pass


def _finish(d: dict) -> dict:
    return {k: (list(v) if isinstance(v, _Repeated) else v) for k, v in d.items()}


def parse_config(text: str) -> dict[str, Any]:
    root: dict = {}
    stack = [root]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "}":
            if len(stack) == 1:
                raise ConfigSyntaxError(f"line {lineno}: unmatched '}}'")
            done = _finish(stack.pop())
            parent = stack[-1]
            key = parent.pop("__pending__")
            _store(parent, key, done)
            continue
        if line.endswith("{"):
            name = line[:-1].strip()
            if not _NAME.match(name):
                raise ConfigSyntaxError(f"line {lineno}: bad block name {name!r}")
            stack[-1]["__pending__"] = name
            stack.append({})
            continue
        name, eq, rest = line.partition("=")
        name = name.strip()
        if not eq or not _NAME.match(name):
            raise ConfigSyntaxError(f"line {lineno}: expected 'name = value'")
        values = [parse_value(v) for v in rest.split(",")]
        if any(v == "" for v in values):
            raise ConfigSyntaxError(f"line {lineno}: empty value")
        _store(stack[-1], name, values[0] if len(values) == 1 else values)
    if len(stack) != 1:
        raise ConfigSyntaxError("unterminated block")
    return _finish(root)


def _format_value(v) -> str:
    if isinstance(v, list):
        return ", ".join(_format_value(x) for x in v)
    return str(v)


def dump_config(data: dict, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for key, value in data.items():
        blocks = value if isinstance(value, list) and value and isinstance(value[0], dict) else None
        if isinstance(value, dict):
            blocks = [value]
        if blocks is not None:
            for b in blocks:
                lines.append(f"{pad}{key} {{")
                body = dump_config(b, indent + 1)
                if body:
                    lines.append(body.rstrip("\n"))
                lines.append(f"{pad}}}")
        else:
            lines.append(f"{pad}{key} = {_format_value(value)}")
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class ExperimentConfig:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    base: str = "bit"
    samples: int = 1_000_000

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnknownKindError(f"unknown experiment kind {self.kind!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")
        if int(self.samples) < 1:
            raise InvalidParameterError("sample count must be positive")
        self.seed = int(self.seed)
        self.samples = int(self.samples)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        if "kind" not in data:
            raise InvalidParameterError("config needs a 'kind'")
        return cls(
            kind=str(data.pop("kind")),
            params=data.pop("params", {}) or {},
            seed=int(data.pop("seed", 0)),
            out=data.pop("out", None),
            base=str(data.pop("base", "bit")),
            samples=int(data.pop("samples", 1_000_000)),
        )

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(parse_config(text))

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text())

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "seed": self.seed, "base": self.base, "samples": self.samples}
        if self.out is not None:
            d["out"] = self.out
        d["params"] = self.params
        return d

    def to_text(self) -> str:
        return dump_config(self.to_dict())
