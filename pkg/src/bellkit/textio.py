"""Plain-text expression format and JSON serialization of quantum objects.

Expression files carry one bracket per line, e.g.::

    1*[ +A2 -B1 +C1 +0 ] % 3
    -3*[ +A1 +B1 +C1 +0 ] % 3
    >= 2

Weights are integers or fractions, party tags are capital letters with a
1-based input index, the trailing integer is the bracket offset, and the last
line gives the comparator and bound.  Parse errors report line and column.

Quantum states and measurement assemblages serialize to JSON with complex
entries as [re, im] pairs and explicit dimensions; round-trips are exact at
double precision.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction

import numpy as np

from .expressions import GE, LE, BellExpression, BracketTerm
from .quantum import Ket, MeasurementAssemblage, Povm, QuantumModel
from .scenario import Scenario

PARTY_LETTERS = "ABCDEFG"


class ExpressionParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_TERM_RE = re.compile(
    r"^\s*(?P<weight>[+-]?\d+(?:/\d+)?)\s*\*\s*\[(?P<body>[^\]]*)\]\s*%\s*"
    r"(?P<mod>\d+)\s*$"
)
_ITEM_RE = re.compile(
    r"\s*(?P<sign>[+-])\s*(?:(?P<coeff>\d+)\s*\*\s*)?"
    r"(?:(?P<party>[A-Za-z])(?P<inp>\d+)|(?P<offset>\d+))"
)
_BOUND_RE = re.compile(r"^\s*(?P<cmp>>=|<=)\s*(?P<bound>[+-]?\d+(?:/\d+)?)\s*$")


def _parse_items(body: str, lineno: int, col0: int, max_parties: int):
    """Bracket-body items -> ({party: (input, coeff)}, offset)."""
    settings: dict[int, tuple[int, int]] = {}
    offset = 0
    pos = 0
    while pos < len(body):
        if body[pos].isspace():
            pos += 1
            continue
        m = _ITEM_RE.match(body, pos)
        if not m:
            raise ExpressionParseError(
                f"unrecognized bracket item near {body[pos:pos + 10]!r}",
                lineno,
                col0 + pos + 1,
            )
        sign = 1 if m.group("sign") == "+" else -1
        if m.group("offset") is not None:
            if m.group("coeff") is not None:
                raise ExpressionParseError(
                    "offset cannot carry a coefficient", lineno, col0 + pos + 1
                )
            offset += sign * int(m.group("offset"))
        else:
            letter = m.group("party")
            if letter not in PARTY_LETTERS[:max_parties]:
                raise ExpressionParseError(
                    f"bad party tag {letter}{m.group('inp')}",
                    lineno,
                    col0 + m.start("party") + 1,
                )
            party = PARTY_LETTERS.index(letter)
            inp = int(m.group("inp"))
            if inp < 1:
                raise ExpressionParseError(
                    "input indices are 1-based", lineno, col0 + m.start("inp") + 1
                )
            if party in settings:
                raise ExpressionParseError(
                    f"party {letter} appears twice in one bracket",
                    lineno,
                    col0 + m.start("party") + 1,
                )
            coeff = sign * int(m.group("coeff") or 1)
            settings[party] = (inp - 1, coeff)
        pos = m.end()
    return settings, offset


def parse_expression(
    text: str,
    scenario: Scenario | None = None,
    max_parties: int = 3,
) -> BellExpression:
    """Parse the bracket text format into a BellExpression.

    Without an explicit scenario the shape is inferred: parties from the
    highest tag used, inputs per party from the highest index used, outputs
    from the modulus.
    """
    raw_terms = []
    comparator = None
    bound = None
    modulus = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _BOUND_RE.match(line)
        if m:
            if comparator is not None:
                raise ExpressionParseError(
                    "duplicate bound line", lineno, line.index(m.group("cmp")) + 1
                )
            comparator = GE if m.group("cmp") == ">=" else LE
            bound = Fraction(m.group("bound"))
            continue
        m = _TERM_RE.match(line)
        if not m:
            raise ExpressionParseError(
                "expected 'weight*[ ... ] % K' or a bound line", lineno, 1
            )
        if comparator is not None:
            raise ExpressionParseError(
                "bracket line after the bound line", lineno, 1
            )
        mod = int(m.group("mod"))
        if mod < 2:
            raise ExpressionParseError(
                "modulus must be >= 2", lineno, line.rindex(m.group("mod")) + 1
            )
        if modulus is None:
            modulus = mod
        elif mod != modulus:
            raise ExpressionParseError(
                f"modulus {mod} conflicts with earlier {modulus}",
                lineno,
                line.rindex(m.group("mod")) + 1,
            )
        settings, offset = _parse_items(
            m.group("body"), lineno, m.start("body"), max_parties
        )
        raw_terms.append((Fraction(m.group("weight")), settings, offset))
    if not raw_terms:
        raise ExpressionParseError("no bracket lines found", 1, 1)
    if comparator is None:
        raise ExpressionParseError(
            "missing bound line ('>= b' or '<= b')", len(text.splitlines()), 1
        )

    if scenario is None:
        parties = 1 + max(max(s) for _, s, _ in raw_terms if s)
        inputs = [1] * parties
        for _, settings, _ in raw_terms:
            for p, (inp, _) in settings.items():
                inputs[p] = max(inputs[p], inp + 1)
        scenario = Scenario(parties, tuple(inputs), modulus)
    elif scenario.outputs != modulus:
        raise ExpressionParseError(
            f"modulus {modulus} does not match scenario outputs {scenario.outputs}",
            1,
            1,
        )

    terms = []
    for weight, settings, offset in raw_terms:
        per_party = tuple(settings.get(p) for p in range(scenario.parties))
        for p, s in enumerate(per_party):
            if s is not None and s[0] >= scenario.inputs_per_party[p]:
                raise ExpressionParseError(
                    f"input {s[0] + 1} out of range for party "
                    f"{PARTY_LETTERS[p]}",
                    1,
                    1,
                )
        terms.append(BracketTerm(weight, per_party, offset))
    return BellExpression(scenario, tuple(terms), comparator, bound)


def _format_weight(w: Fraction) -> str:
    return str(w)


def serialize_expression(expr: BellExpression) -> str:
    """Canonical text form: offsets reduced mod K, explicit +0 offsets."""
    if not isinstance(expr, BellExpression):
        raise TypeError("only bracket expressions have a text form")
    K = expr.scenario.outputs
    lines = []
    for term in expr.terms:
        term = term.canonical(K)
        items = []
        for p, s in enumerate(term.settings):
            if s is None:
                continue
            inp, coeff = s
            sign = "+" if coeff >= 0 else "-"
            mag = abs(coeff)
            tag = f"{PARTY_LETTERS[p]}{inp + 1}"
            items.append(f"{sign}{tag}" if mag == 1 else f"{sign}{mag}*{tag}")
        items.append(f"{'+' if term.offset >= 0 else '-'}{abs(term.offset)}")
        lines.append(f"{_format_weight(term.weight)}*[ {' '.join(items)} ] % {K}")
    cmp_txt = ">=" if expr.comparator == GE else "<="
    lines.append(f"{cmp_txt} {expr.bound}")
    return "\n".join(lines) + "\n"


def _complex_to_json(arr: np.ndarray):
    stacked = np.stack([np.real(arr), np.imag(arr)], axis=-1)
    return stacked.tolist()


def _complex_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def ket_to_json(ket: Ket) -> dict:
    return {
        "type": "ket",
        "dimensions": list(ket.local_dimensions),
        "amplitudes": _complex_to_json(ket.amplitudes),
    }


def ket_from_json(data: dict) -> Ket:
    if data.get("type") != "ket":
        raise ValueError("not a ket record")
    return Ket(
        tuple(int(d) for d in data["dimensions"]),
        _complex_from_json(data["amplitudes"]),
    )


def density_to_json(rho: np.ndarray, dims) -> dict:
    return {
        "type": "density",
        "dimensions": list(dims),
        "matrix": _complex_to_json(np.asarray(rho, dtype=complex)),
    }


def density_from_json(data: dict) -> np.ndarray:
    if data.get("type") != "density":
        raise ValueError("not a density record")
    return _complex_from_json(data["matrix"])


def assemblage_to_json(assemblage: MeasurementAssemblage) -> dict:
    return {
        "type": "assemblage",
        "dimensions": list(assemblage.dimensions),
        "povms": [
            [[_complex_to_json(e) for e in povm.elements] for povm in per_party]
            for per_party in assemblage.povms
        ],
    }


def assemblage_from_json(data: dict) -> MeasurementAssemblage:
    if data.get("type") != "assemblage":
        raise ValueError("not an assemblage record")
    return MeasurementAssemblage(
        tuple(
            tuple(
                Povm(tuple(_complex_from_json(e) for e in povm))
                for povm in per_party
            )
            for per_party in data["povms"]
        )
    )


def model_to_json(model: QuantumModel) -> dict:
    if isinstance(model.state, Ket):
        state = ket_to_json(model.state)
    else:
        state = density_to_json(model.state, model.assemblage.dimensions)
    return {
        "type": "model",
        "state": state,
        "assemblage": assemblage_to_json(model.assemblage),
    }


def model_from_json(data: dict) -> QuantumModel:
    if data.get("type") != "model":
        raise ValueError("not a model record")
    state_rec = data["state"]
    if state_rec.get("type") == "ket":
        state = ket_from_json(state_rec)
    else:
        state = density_from_json(state_rec)
    return QuantumModel(state, assemblage_from_json(data["assemblage"]))


def dump_json(obj: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
