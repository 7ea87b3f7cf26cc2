"""Plain-text realization and energy-model files.

One ``key = value`` pair per line; ``#`` starts a comment; lists are
comma-separated.  Reals are written with 17 significant digits so that
every double survives a round trip.

Realization keys: ``family``, ``n``, ``dim_X``, ``inner``,
``structure_constants`` (flattened ``c[i][j][k]``, ``k`` fastest),
``unit_coords``, ``action`` (``scale``, ``translate`` or ``linear``).

Energy-model keys: ``energies``, ``temperature``, ``boltzmann`` (default 1).
"""

import math

import numpy as np

from . import categories as cat
from .errors import InvalidAlgebra, SpecError
from .thermo import EnergyModel


def fmt(value):
    """Decimal text with 17 significant digits."""
    return format(float(value), ".17g")


def fmt_list(values):
    return ",".join(fmt(v) for v in np.atleast_1d(values))


def parse_floats(text):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise SpecError(f"not a list of numbers: {text!r}") from None
    if not all(math.isfinite(v) for v in values):
        raise SpecError(f"non-finite number in {text!r}")
    return np.array(values)


def parse_fields(text):
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise SpecError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key in fields:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value.strip()
    return fields


def dump_fields(fields):
    lines = []
    for key, value in fields.items():
        if isinstance(value, (np.ndarray, list, tuple)):
            value = fmt_list(value)
        elif isinstance(value, float):
            value = fmt(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _int(fields, key):
    if key not in fields:
        raise SpecError(f"missing field {key!r}")
    try:
        value = int(fields[key])
    except ValueError:
        raise SpecError(f"field {key!r} must be an integer, got {fields[key]!r}") from None
    if value < 1:
        raise SpecError(f"field {key!r} must be positive")
    return value


def _monoid(family, fields):
    if family == "MatrixMonoid":
        return cat.MatrixMonoid(_int(fields, "n"))
    if family == "HalfSpaceMonoid":
        return cat.HalfSpaceMonoid(_int(fields, "n"))
    if family == "VectorGroup":
        return cat.VectorGroup(_int(fields, "n"))
    if family == "AlgebraMonoid":
        if fields.get("algebra") == "upper_triangular":
            return cat.AlgebraMonoid(cat.upper_triangular_algebra())
        for key in ("structure_constants", "unit_coords"):
            if key not in fields:
                raise SpecError(f"missing field {key!r}")
        spec = cat.AlgebraSpec(parse_floats(fields["structure_constants"]), parse_floats(fields["unit_coords"]))
        return cat.AlgebraMonoid(spec)
    raise SpecError(f"unknown monoid family {family!r}")


def realization_from_fields(fields):
    family = fields.get("family")
    if family is None:
        raise SpecError("missing field 'family'")
    try:
        if family == "OrderCategory":
            return cat.OrderCategory()
        if family == "EntropyCategory":
            return cat.EntropyCategory(_int(fields, "n"))
        if family == "TrivialCategory":
            inner = fields.get("inner")
            if inner is None:
                raise SpecError("missing field 'inner'")
            return cat.TrivialCategory(_int(fields, "dim_X"), _monoid(inner, fields))
        if family == "ActionCategory":
            name = fields.get("action")
            if name is None:
                raise SpecError("missing field 'action'")
            n = 1 if name == "scale" else _int(fields, "n")
            return cat.ActionCategory(cat.builtin_action(name, n))
        return _monoid(family, fields)
    except InvalidAlgebra:
        raise
    except ValueError as exc:
        raise SpecError(str(exc)) from None


def parse_realization(text):
    return realization_from_fields(parse_fields(text))


def load_realization(path):
    with open(path, encoding="utf-8") as fh:
        return parse_realization(fh.read())


def dump_realization(C):
    return dump_fields(C.spec_fields())


def parse_energy_model(text):
    fields = parse_fields(text)
    for key in ("energies", "temperature"):
        if key not in fields:
            raise SpecError(f"missing field {key!r}")
    temperature = parse_floats(fields["temperature"])
    boltzmann = parse_floats(fields.get("boltzmann", "1"))
    if temperature.size != 1 or boltzmann.size != 1:
        raise SpecError("temperature and boltzmann must be single numbers")
    return EnergyModel(tuple(parse_floats(fields["energies"])), float(temperature[0]), float(boltzmann[0]))


def load_energy_model(path):
    with open(path, encoding="utf-8") as fh:
        return parse_energy_model(fh.read())


def dump_energy_model(model):
    return dump_fields({
        "energies": list(model.energies),
        "temperature": float(model.temperature),
        "boltzmann": float(model.boltzmann),
    })
