"""Line-oriented history-spec documents.

One directive per line, ``#`` starts a comment, tokens are separated by
whitespace::

    system <d>
    init mixed
    init pure <re,im> <re,im> ...          # 2^d amplitudes
    gate <h|x|z|r> <q> [theta=<rad>] [phi=<rad>]
    gate cnot <control> <target>
    premeasure <label> target=<q> [basis=h | basis=r theta=<rad> phi=<rad>]
    measure <label> [<label> ...] [theta=<rad>] [phi=<rad>]

``system`` must come first.  ``gate`` and ``premeasure`` lines are taken in
document order and define the time order; ``measure`` lines may appear
anywhere and refer to any premeasurement label.  ``h`` is ``R(pi/4, 0)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import SpecSemanticError, SpecSyntaxError, ValidationError
from .gates import RotationParams
from .history import GateOp, HistorySpec, PremeasureEvent

_LABEL = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
MAX_SYSTEM_QUBITS = 10


@dataclass(frozen=True)
class Token:
    text: str
    column: int


@dataclass(frozen=True, eq=False)
class SpecDocument:
    text: str
    spec: HistorySpec
    line_map: dict[str, int] = field(default_factory=dict)


def _tokens(line: str) -> list[Token]:
    code = line.split("#", 1)[0]
    return [Token(m.group(), m.start() + 1) for m in re.finditer(r"\S+", code)]


def _float(tok: Token, text: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise SpecSyntaxError(f"expected a number, got {text!r}", lineno, tok.column) from None
    if not math.isfinite(value):
        raise SpecSyntaxError(f"number must be finite, got {text!r}", lineno, tok.column)
    return value


def _int(tok: Token, lineno: int, what: str) -> int:
    if not re.fullmatch(r"[0-9]+", tok.text):
        raise SpecSyntaxError(f"{what} must be a nonnegative integer, got {tok.text!r}", lineno, tok.column)
    return int(tok.text)


def _options(toks: list[Token], allowed: set[str], lineno: int) -> dict[str, tuple[str, Token]]:
    opts: dict[str, tuple[str, Token]] = {}
    for tok in toks:
        key, sep, value = tok.text.partition("=")
        if not sep:
            raise SpecSyntaxError(f"expected key=value, got {tok.text!r}", lineno, tok.column)
        if key not in allowed:
            raise SpecSyntaxError(f"unknown option {key!r}", lineno, tok.column)
        if key in opts:
            raise SpecSyntaxError(f"option {key!r} given twice", lineno, tok.column)
        if not value:
            raise SpecSyntaxError(f"option {key!r} has no value", lineno, tok.column)
        opts[key] = (value, tok)
    return opts


def _angles(opts, lineno: int) -> tuple[float, float]:
    theta = _float(opts["theta"][1], opts["theta"][0], lineno) if "theta" in opts else 0.0
    phi = _float(opts["phi"][1], opts["phi"][0], lineno) if "phi" in opts else 0.0
    return theta, phi


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.d: int | None = None
        self.init: tuple[complex, ...] | None = None
        self.init_seen = False
        self.steps: list = []
        self.measured: list[tuple[str, RotationParams, int, int]] = []
        self.events: dict[str, int] = {}
        self.line_map: dict[str, int] = {}

    def parse(self) -> SpecDocument:
        for lineno, line in enumerate(self.text.splitlines(), start=1):
            toks = _tokens(line)
            if not toks:
                continue
            head = toks[0]
            handler = getattr(self, "_do_" + head.text, None)
            if handler is None:
                raise SpecSyntaxError(f"unknown directive {head.text!r}", lineno, head.column)
            if self.d is None and head.text != "system":
                raise SpecSyntaxError("the first directive must be 'system <d>'", lineno, head.column)
            handler(toks, lineno)
        if self.d is None:
            raise SpecSyntaxError("missing 'system <d>' directive", 1, 1)
        measured = []
        for label, params, lineno, col in self.measured:
            if label not in self.events:
                raise SpecSemanticError(f"measure refers to undefined event {label!r}", lineno, col)
            measured.append((label, params))
        try:
            spec = HistorySpec.build(self.d, self.steps, self.init, measured)
        except ValidationError as exc:
            raise SpecSemanticError(str(exc)) from exc
        return SpecDocument(self.text, spec, self.line_map)

    def _qubit(self, tok: Token, lineno: int) -> int:
        q = _int(tok, lineno, "qubit index")
        if q >= self.d:
            raise SpecSemanticError(f"qubit {q} out of range for a {self.d}-qubit system", lineno, tok.column)
        return q

    def _do_system(self, toks, lineno):
        if self.d is not None:
            raise SpecSyntaxError("'system' given twice", lineno, toks[0].column)
        if len(toks) != 2:
            raise SpecSyntaxError("'system' takes exactly one argument", lineno, toks[0].column)
        d = _int(toks[1], lineno, "system size")
        if not 1 <= d <= MAX_SYSTEM_QUBITS:
            raise SpecSemanticError(f"system size must be 1..{MAX_SYSTEM_QUBITS}, got {d}", lineno, toks[1].column)
        self.d = d
        self.line_map["system"] = lineno

    def _do_init(self, toks, lineno):
        if self.init_seen:
            raise SpecSyntaxError("'init' given twice", lineno, toks[0].column)
        if len(toks) < 2 or toks[1].text not in ("mixed", "pure"):
            col = toks[1].column if len(toks) > 1 else toks[0].column
            raise SpecSyntaxError("expected 'init mixed' or 'init pure <amplitudes>'", lineno, col)
        self.init_seen = True
        self.line_map["init"] = lineno
        if toks[1].text == "mixed":
            if len(toks) != 2:
                raise SpecSyntaxError("'init mixed' takes no further arguments", lineno, toks[2].column)
            return
        amps = toks[2:]
        if len(amps) != 1 << self.d:
            col = amps[-1].column if amps else toks[1].column
            raise SpecSyntaxError(f"'init pure' needs {1 << self.d} amplitudes, got {len(amps)}", lineno, col)
        values = []
        for tok in amps:
            re_s, sep, im_s = tok.text.partition(",")
            if not sep:
                raise SpecSyntaxError(f"amplitude must be 're,im', got {tok.text!r}", lineno, tok.column)
            values.append(complex(_float(tok, re_s, lineno), _float(tok, im_s, lineno)))
        if sum(abs(v) ** 2 for v in values) == 0:
            raise SpecSemanticError("initial state is the zero vector", lineno, toks[2].column)
        self.init = tuple(values)

    def _do_gate(self, toks, lineno):
        if len(toks) < 2:
            raise SpecSyntaxError("'gate' needs a gate name", lineno, toks[0].column)
        name = toks[1].text
        if name not in ("h", "x", "z", "cnot", "r"):
            raise SpecSyntaxError(f"unknown gate {name!r}", lineno, toks[1].column)
        args = toks[2:]
        targets, opts = [], []
        for t in args:
            if "=" in t.text:
                opts.append(t)
            elif opts:
                raise SpecSyntaxError("gate targets must precede options", lineno, t.column)
            else:
                targets.append(t)
        want = 2 if name == "cnot" else 1
        if len(targets) != want:
            col = targets[-1].column if targets else toks[1].column
            raise SpecSyntaxError(f"gate {name} takes {want} target(s), got {len(targets)}", lineno, col)
        allowed = {"theta", "phi"} if name == "r" else set()
        parsed = _options(opts, allowed, lineno)
        qs = [self._qubit(t, lineno) for t in targets]
        if len(set(qs)) != len(qs):
            raise SpecSemanticError("cnot control and target must differ", lineno, targets[1].column)
        theta, phi = _angles(parsed, lineno)
        self.steps.append(GateOp(name, tuple(qs), theta, phi))

    def _do_premeasure(self, toks, lineno):
        if len(toks) < 3:
            raise SpecSyntaxError("'premeasure' needs a label and target=<q>", lineno, toks[0].column)
        label_tok = toks[1]
        if not _LABEL.match(label_tok.text):
            raise SpecSyntaxError(f"invalid event label {label_tok.text!r}", lineno, label_tok.column)
        if label_tok.text in self.events:
            first = self.events[label_tok.text]
            raise SpecSemanticError(
                f"event label {label_tok.text!r} already used on line {first}; each premeasurement needs a fresh ancilla",
                lineno,
                label_tok.column,
            )
        opts = _options(toks[2:], {"target", "basis", "theta", "phi"}, lineno)
        if "target" not in opts:
            raise SpecSyntaxError("'premeasure' needs target=<q>", lineno, toks[0].column)
        value, tok = opts["target"]
        target = self._qubit(Token(value, tok.column + len("target=")), lineno)
        basis = None
        if "basis" in opts:
            b, btok = opts["basis"]
            if b == "h":
                if "theta" in opts or "phi" in opts:
                    raise SpecSyntaxError("basis=h takes no angles", lineno, btok.column)
                basis = GateOp("h", (target,))
            elif b == "r":
                theta, phi = _angles(opts, lineno)
                basis = GateOp("r", (target,), theta, phi)
            else:
                raise SpecSyntaxError(f"basis must be 'h' or 'r', got {b!r}", lineno, btok.column)
        elif "theta" in opts or "phi" in opts:
            key = "theta" if "theta" in opts else "phi"
            raise SpecSyntaxError(f"{key} is only valid with basis=r", lineno, opts[key][1].column)
        self.events[label_tok.text] = lineno
        self.line_map[f"premeasure {label_tok.text}"] = lineno
        self.steps.append(PremeasureEvent(label_tok.text, target, basis))

    def _do_measure(self, toks, lineno):
        labels = [t for t in toks[1:] if "=" not in t.text]
        opts = [t for t in toks[1:] if "=" in t.text]
        if not labels:
            raise SpecSyntaxError("'measure' needs at least one event label", lineno, toks[0].column)
        parsed = _options(opts, {"theta", "phi"}, lineno)
        theta, phi = _angles(parsed, lineno)
        params = RotationParams(theta, phi)
        seen = {m[0]: m[2] for m in self.measured}
        for tok in labels:
            if not _LABEL.match(tok.text):
                raise SpecSyntaxError(f"invalid event label {tok.text!r}", lineno, tok.column)
            if tok.text in seen:
                raise SpecSemanticError(
                    f"event {tok.text!r} already measured on line {seen[tok.text]}", lineno, tok.column
                )
            seen[tok.text] = lineno
            self.measured.append((tok.text, params, lineno, tok.column))
            self.line_map[f"measure {tok.text}"] = lineno


def parse_document(text: str) -> SpecDocument:
    return _Parser(text).parse()


def parse_history_spec(text: str) -> HistorySpec:
    """Parse a history-spec document; errors carry line and column."""
    return parse_document(text).spec


def _num(x: float) -> str:
    return repr(float(x))


def _gate_line(g: GateOp) -> str:
    parts = ["gate", g.name, *map(str, g.targets)]
    if g.name == "r":
        parts += [f"theta={_num(g.theta)}", f"phi={_num(g.phi)}"]
    return " ".join(parts)


def serialize_history_spec(spec: HistorySpec) -> str:
    """Canonical text for ``spec``; ``parse(serialize(s)) == s``."""
    lines = [f"system {spec.d}"]
    if spec.init is None:
        lines.append("init mixed")
    else:
        amps = " ".join(f"{_num(a.real)},{_num(a.imag)}" for a in spec.init)
        lines.append(f"init pure {amps}")
    for step in spec.steps():
        if isinstance(step, GateOp):
            lines.append(_gate_line(step))
            continue
        line = f"premeasure {step.label} target={step.target}"
        if step.basis is not None:
            if step.basis.name == "h":
                line += " basis=h"
            else:
                line += f" basis=r theta={_num(step.basis.theta)} phi={_num(step.basis.phi)}"
        lines.append(line)
    for label, p in spec.measured:
        lines.append(f"measure {label} theta={_num(p.theta)} phi={_num(p.phi)}")
    return "\n".join(lines) + "\n"
