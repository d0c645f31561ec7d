"""LP-format text I/O for :class:`~cbpp.models.MilpModel`.

Writes the ``Minimize / Subject To / Bounds / Generals / End`` subset with
17 significant digits per number. The reader accepts what the writer emits
plus the common keyword spellings, enough for round trips and for the
built-in solver to act as an external LP-file consumer.
"""

from __future__ import annotations

import math
import re

from .errors import EmissionError, LPParseError
from .models import EQ, GE, LE, MilpModel

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\[\]]*$")
_TERMS_PER_LINE = 8
MAX_NAME = 255


def _num(x: float) -> str:
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    if float(x).is_integer() and abs(x) < 1e16:
        return str(int(x))
    return "%.17g" % x


def _check_names(names, what):
    seen = set()
    for n in names:
        if len(n) > MAX_NAME:
            raise EmissionError(f"{what} name longer than {MAX_NAME} chars: {n[:40]}...")
        if not _NAME_RE.match(n):
            raise EmissionError(f"{what} name {n!r} is not a valid LP identifier")
        if n in seen:
            raise EmissionError(f"{what} name collision: {n}")
        seen.add(n)


def _expr(terms, names) -> list[str]:
    out = []
    for k, c in terms:
        if c == 1:
            out.append(f"+ {names[k]}")
        elif c == -1:
            out.append(f"- {names[k]}")
        elif c < 0:
            out.append(f"- {_num(-c)} {names[k]}")
        else:
            out.append(f"+ {_num(c)} {names[k]}")
    return out


def _wrap(head: str, parts: list[str], tail: str = "") -> list[str]:
    chunks = [parts[i:i + _TERMS_PER_LINE] for i in range(0, len(parts), _TERMS_PER_LINE)] or [[]]
    lines = []
    for n, chunk in enumerate(chunks):
        body = " ".join(chunk)
        prefix = head if n == 0 else "   "
        lines.append(f"{prefix} {body}".rstrip())
    if tail:
        lines[-1] = f"{lines[-1]} {tail}"
    return lines


def emit_lp(model: MilpModel) -> str:
    """Render ``model`` as LP-format text; identical models give identical bytes."""
    names = model.names()
    _check_names(names, "variable")
    _check_names([c.name for c in model.constraints], "constraint")
    lines = [f"\\ {model.name}", "Minimize"]
    lines += _wrap(" obj:", _expr(model.objective, names))
    if model.constraints:
        lines.append("Subject To")
        for c in model.constraints:
            terms = c.terms
            if not terms:
                if not names:
                    raise EmissionError(f"row {c.name} has no terms and the model has no variables")
                terms = [(0, 0.0)]
            parts = _expr(terms, names) if any(v for _, v in terms) else [f"0 {names[terms[0][0]]}"]
            lines += _wrap(f" {c.name}:", parts, f"{c.sense} {_num(c.rhs)}")
    bounds = []
    for v in model.variables:
        lb, ub = v.lb, v.ub
        if lb == 0 and math.isinf(ub) and ub > 0:
            continue
        if math.isinf(lb) and math.isinf(ub):
            bounds.append(f" {v.name} free")
        elif math.isinf(ub):
            bounds.append(f" {v.name} >= {_num(lb)}")
        else:
            bounds.append(f" {_num(lb)} <= {v.name} <= {_num(ub)}")
    if bounds:
        lines.append("Bounds")
        lines += bounds
    ints = [v.name for v in model.variables if v.integer]
    if ints:
        lines.append("Generals")
        for i in range(0, len(ints), _TERMS_PER_LINE):
            lines.append(" " + " ".join(ints[i:i + _TERMS_PER_LINE]))
    lines.append("End")
    return "\n".join(lines) + "\n"


_SECTIONS = {
    "minimize": "obj", "minimise": "obj", "minimum": "obj", "min": "obj",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "bound": "bounds",
    "generals": "gen", "general": "gen", "gen": "gen", "integers": "gen",
    "binaries": "bin", "binary": "bin", "bin": "bin",
    "end": "end",
}
_TOKEN = re.compile(r"\s*(<=|>=|=<|=>|<|>|=|:|[+-]|[+-]?inf(?:inity)?\b|"
                    r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[A-Za-z_][A-Za-z0-9_.\[\]]*)", re.I)


def _tokens(text: str, lineno: int) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise LPParseError(f"line {lineno}: cannot tokenize {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def _is_num(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def _sense(tok: str) -> str:
    return {"<": LE, "<=": LE, "=<": LE, ">": GE, ">=": GE, "=>": GE, "=": EQ}[tok]


def _merge_signs(tokens: list[str]) -> list[str]:
    out: list[str] = []
    for tok in tokens:
        if out and out[-1] in ("+", "-") and _is_num(tok):
            out[-1] = out[-1] + tok
        else:
            out.append(tok)
    return out


def read_lp(text: str) -> MilpModel:
    """Parse LP-format text into a :class:`MilpModel` (minimization only)."""
    sections: dict[str, list[tuple[int, str]]] = {"obj": [], "st": [], "bounds": [], "gen": [], "bin": []}
    current = None
    seen_end = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            current = _SECTIONS[key]
            if current == "end":
                seen_end = True
                break
            continue
        if key.startswith(("maximize", "maximise", "max")) and current is None:
            raise LPParseError(f"line {lineno}: only minimization models are supported")
        if current is None:
            raise LPParseError(f"line {lineno}: content before the objective section")
        sections[current].append((lineno, line))
    if not seen_end:
        raise LPParseError("missing End section")

    model = MilpModel(name="lp")
    cols: dict[str, int] = {}

    def col(name: str) -> int:
        if name not in cols:
            cols[name] = model.add_var(name, integer=False, key="z" if name == "z" else name)
        return cols[name]

    def linear(tokens, lineno):
        terms: dict[int, float] = {}
        sign, coef = 1.0, None
        for tok in tokens:
            if tok in "+-":
                sign = -sign if tok == "-" else sign
            elif _is_num(tok):
                coef = float(tok)
            else:
                k = col(tok)
                terms[k] = terms.get(k, 0.0) + sign * (1.0 if coef is None else coef)
                sign, coef = 1.0, None
        if coef is not None:
            raise LPParseError(f"line {lineno}: dangling coefficient")
        return sorted(terms.items())

    obj_toks, first = [], None
    for lineno, line in sections["obj"]:
        first = first or lineno
        obj_toks += _tokens(line, lineno)
    if len(obj_toks) >= 2 and obj_toks[1] == ":":
        obj_toks = obj_toks[2:]
    model.objective = linear(obj_toks, first or 0)

    toks: list[tuple[str, int]] = []
    for lineno, line in sections["st"]:
        toks += [(t, lineno) for t in _tokens(line, lineno)]
    pos, unnamed = 0, 0
    while pos < len(toks):
        if pos + 1 < len(toks) and toks[pos + 1][0] == ":":
            name = toks[pos][0]
            pos += 2
        else:
            unnamed += 1
            name = f"R{unnamed}"
        body = []
        while pos < len(toks) and toks[pos][0] not in ("<", "<=", "=<", ">", ">=", "=>", "="):
            body.append(toks[pos][0])
            pos += 1
        if pos >= len(toks):
            raise LPParseError(f"line {toks[-1][1]}: row {name} has no relation")
        sense = _sense(toks[pos][0])
        lineno = toks[pos][1]
        pos += 1
        sign = 1.0
        if pos < len(toks) and toks[pos][0] in "+-":
            sign = -1.0 if toks[pos][0] == "-" else 1.0
            pos += 1
        if pos >= len(toks) or not _is_num(toks[pos][0]):
            raise LPParseError(f"line {lineno}: row {name} lacks a numeric right-hand side")
        rhs = sign * float(toks[pos][0])
        pos += 1
        terms = [(k, c) for k, c in linear(body, lineno) if c != 0]
        model.add_constraint(name, terms, sense, rhs)

    for lineno, line in sections["bounds"]:
        t = _merge_signs(_tokens(line, lineno))
        low = [x.lower() for x in t]
        if len(t) == 2 and low[1] == "free":
            k = col(t[0])
            model.set_bounds(k, -math.inf, math.inf)
        elif len(t) == 5 and _is_num(t[0]) and _is_num(t[4]):
            k = col(t[2])
            model.set_bounds(k, float(t[0]), float(t[4]))
        elif len(t) == 3 and not _is_num(t[0]) and _is_num(t[2]):
            k = col(t[0])
            s, v = _sense(t[1]), float(t[2])
            if s == GE:
                model.set_bounds(k, lb=v)
            elif s == LE:
                model.set_bounds(k, ub=v)
            else:
                model.set_bounds(k, v, v)
        elif len(t) == 3 and _is_num(t[0]):
            k = col(t[2])
            s, v = _sense(t[1]), float(t[0])
            model.set_bounds(k, **({"ub": v} if s == GE else {"lb": v} if s == LE else {"lb": v, "ub": v}))
        else:
            raise LPParseError(f"line {lineno}: unsupported bound {line!r}")
    for lineno, line in sections["gen"]:
        for name in line.split():
            model.variables[col(name)].integer = True
    for lineno, line in sections["bin"]:
        for name in line.split():
            k = col(name)
            model.variables[k].integer = True
            model.set_bounds(k, 0, 1)
    return model
