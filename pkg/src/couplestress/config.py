"""Scenario configuration files.

Plain INI (``configparser``) with these sections::

    [scenario]   name = verify-identities | compare-bc | missing-term-map
                        | solve | patch-test
                 seed = 42
    [domain]     kind = box | ball ; size = 1.0 (or "1, 2, 1") ; order = 8
                 dirichlet = z0, x1          (or cap:<theta> on the ball)
    [material]   mu, lambda, alpha1, alpha2
    [fields]     u, du, f, u0 : vector literals "[y^3, 0, 0]" or
                 "random:<degree>" (drawn from the seeded generator)
    [solve]      degree = 3 ; traction = corrected | mt ; compare_mt = true
    [patch-test] A = "a11 a12 a13; a21 a22 a23; a31 a32 a33" or random
                 count = 5
    [identities] cases = 200 ; degree = 5
    [output]     dir = out ; traction_dump = false
    [tolerances] any key = float, overriding the scenario defaults

Format version 1.
"""

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constitutive import MaterialParams
from .poly_fields import DEGREE_CAP, parse_vector, random_field

FORMAT_VERSION = 1
SCENARIOS = ("verify-identities", "compare-bc", "missing-term-map", "solve", "patch-test")
REQUIRED = {
    "verify-identities": (),
    "compare-bc": ("u", "du"),
    "missing-term-map": ("u",),
    "solve": ("u",),
    "patch-test": (),
}


class ConfigError(ValueError):
    def __init__(self, message, path=None, line=None):
        where = f"{path}:{line}: " if path and line else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.path, self.line = path, line


@dataclass
class ScenarioConfig:
    name: str
    seed: int
    domain: dict
    material: MaterialParams
    fields: dict
    sections: dict
    tolerances: dict
    output_dir: str = "out"
    traction_dump: bool = False
    source: str = ""
    field_text: dict = field(default_factory=dict)

    def section(self, name):
        return self.sections.get(name, {})


def _line_of(path, section, key):
    current = None
    try:
        lines = Path(path).read_text().splitlines()
    except OSError:
        return None
    for i, raw in enumerate(lines, 1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and s.split("=", 1)[0].strip() == key:
            return i
    return None


def load_config(path, seed=None):
    path = str(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path) from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), path,
                          getattr(exc, "lineno", None)) from exc
    return parse_config({s: dict(cp[s]) for s in cp.sections()}, path, seed)


def parse_config(sections, path="<config>", seed=None):
    def fail(msg, section=None, key=None):
        line = _line_of(path, section, key) if section and key else None
        raise ConfigError(msg, path, line)

    scen = sections.get("scenario", {})
    name = scen.get("name")
    if name not in SCENARIOS:
        fail(f"scenario name must be one of {SCENARIOS}, got {name!r}", "scenario", "name")
    try:
        seed = int(scen.get("seed", 0)) if seed is None else int(seed)
    except ValueError:
        fail("seed must be an integer", "scenario", "seed")
    rng = np.random.default_rng(seed)

    dom = dict(sections.get("domain", {}))
    try:
        size = [float(s) for s in dom.get("size", "1.0").replace(",", " ").split()]
        domain = {
            "kind": dom.get("kind", "box"),
            "size": size[0] if len(size) == 1 else tuple(size),
            "order": int(dom.get("order", 8)),
            "dirichlet": [d.strip() for d in dom.get("dirichlet", "").split(",") if d.strip()],
        }
    except ValueError as exc:
        fail(f"bad domain entry: {exc}", "domain", "size")

    try:
        material = MaterialParams.from_mapping(
            {k: float(v) for k, v in sections.get("material", {}).items()})
        material.validate(require_curvature=False)
    except ValueError as exc:
        fail(f"material: {exc}", "material", next(iter(sections.get("material", {})), None))

    fields, texts = {}, {}
    for key, text in sections.get("fields", {}).items():
        try:
            if text.strip().startswith("random:"):
                degree = int(text.split(":", 1)[1])
                if not 0 <= degree <= DEGREE_CAP:
                    raise ValueError(f"degree {degree} outside [0, {DEGREE_CAP}]")
                fields[key] = random_field(rng, (3,), degree)
            else:
                fields[key] = parse_vector(text)
        except ValueError as exc:
            fail(f"field {key!r}: {exc}", "fields", key)
        texts[key] = text
    for key in REQUIRED[name]:
        if key not in fields:
            fail(f"scenario {name!r} requires field {key!r} in [fields]")

    tolerances = {}
    for key, val in sections.get("tolerances", {}).items():
        try:
            tolerances[key] = float(val)
        except ValueError:
            fail(f"tolerance {key!r} must be a number", "tolerances", key)

    out = sections.get("output", {})
    return ScenarioConfig(
        name=name,
        seed=seed,
        domain=domain,
        material=material,
        fields=fields,
        sections=sections,
        tolerances=tolerances,
        output_dir=out.get("dir", "out"),
        traction_dump=out.get("traction_dump", "false").lower() in ("1", "true", "yes"),
        source=path,
        field_text=texts,
    )
