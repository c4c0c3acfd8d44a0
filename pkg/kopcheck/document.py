"""
kopcheck System Documents - line-oriented text form of a system.

Responsibilities:
- Render a System (with its interpretation tabulated) as a document
- Parse a document back into a System, validating every kernel invariant
- Anchor every input failure to the 1-based line that caused it

Invariants:
- render(parse(render(sys))) == render(sys), byte for byte
- Sections appear in a fixed order; nothing is defaulted
- Payloads are canonical single-line JSON; arrays decode to tuples

Layout:
    KOPCHECK 1
    AGENTS <n> "<name_1>" ... "<name_n>"
    HORIZON <T>
    PROPS "<p>" ...
    RUN <index> "<name>"            (one block per run, indices 0, 1, ...)
    STATE <t>                       (t = 0..T, in order)
    ENV <json>
    LOCAL <i> <json>                (i = 1..n, in order)
    HISTORY ["<action>" <agent> <time>]*
    INTERP "<p>" <run> <b_0> ... <b_T>    (one row per proposition and run)
    END

Blank lines and lines starting with '#' are ignored by the parser.
"""

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator

from kopcheck.contracts import InputError
from kopcheck.kernel import (
    Action,
    EnvState,
    GlobalState,
    History,
    HistoryEvent,
    Run,
    System,
)
from kopcheck.logic.interpretation import Interpretation, check_prop_name
from kopcheck.utils import decode_payload, encode_payload


logger = logging.getLogger(__name__)

DOCUMENT_VERSION = 1

INTEGER = re.compile(r"^-?\d+$")

_decoder = json.JSONDecoder()


# =============================================================================
# Rendering
# =============================================================================


def _quote(text: str) -> str:
    return json.dumps(text, ensure_ascii=True)


def _payload(value: Any, where: dict[str, Any]) -> str:
    try:
        return encode_payload(value)
    except TypeError as e:
        raise InputError(f"cannot render payload: {e}", detail=where) from None


def render_system(sys: System) -> str:
    """
    Render sys as a document.

    Predicate-based interpretations are tabulated over every point, so the
    document is always self-contained.
    """
    lines = [
        f"KOPCHECK {DOCUMENT_VERSION}",
        " ".join(["AGENTS", str(sys.agent_count)] + [_quote(n) for n in sys.agent_names]),
        f"HORIZON {sys.horizon}",
        " ".join(["PROPS"] + [_quote(p) for p in sys.interpretation.props]),
    ]
    for r, run in enumerate(sys.runs):
        lines.append(f"RUN {r} {_quote(run.name)}")
        for t, state in enumerate(run.states):
            where = {"run": r, "time": t}
            lines.append(f"STATE {t}")
            lines.append(f"ENV {_payload(state.env.payload, where)}")
            for i, local in enumerate(state.locals, start=1):
                lines.append(f"LOCAL {i} {_payload(local, where)}")
            events = [
                f"{_quote(e.action.label)} {e.agent} {e.time}"
                for e in state.env.history.sorted_events()
            ]
            lines.append(" ".join(["HISTORY"] + events))
    table = sys.interpretation.tabulate(sys)
    for name in sys.interpretation.props:
        for r in range(sys.run_count):
            row = " ".join("1" if v else "0" for v in table[name][r])
            lines.append(f"INTERP {_quote(name)} {r} {row}")
    lines.append("END")
    return "\n".join(lines) + "\n"


def save_system(sys: System, path: Path) -> None:
    """Write sys as a document to path."""
    path.write_text(render_system(sys))
    logger.debug("saved document path=%s runs=%d", path, sys.run_count)


# =============================================================================
# Parsing
# =============================================================================


@dataclass(frozen=True)
class _Line:
    number: int
    keyword: str
    rest: str

    def error(self, message: str) -> InputError:
        return InputError(message, line=self.number)


def _lines(text: str) -> Iterator[_Line]:
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        keyword, _, rest = stripped.partition(" ")
        yield _Line(number, keyword, rest.strip())


def _tokens(line: _Line) -> list[str | int]:
    """Split a line's arguments into quoted strings and integers."""
    text, pos, out = line.rest, 0, []
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        if text[pos] == '"':
            try:
                value, pos = _decoder.raw_decode(text, pos)
            except json.JSONDecodeError as e:
                raise line.error(f"bad quoted string: {e.msg}") from None
            out.append(value)
            continue
        end = pos
        while end < len(text) and not text[end].isspace():
            end += 1
        word = text[pos:end]
        if not INTEGER.match(word):
            raise line.error(f"expected an integer or a quoted string, got {word!r}")
        out.append(int(word))
        pos = end
    return out


class _Reader:
    """Cursor over significant document lines."""

    def __init__(self, text: str):
        self._lines = list(_lines(text))
        self._pos = 0
        self.last_number = self._lines[-1].number if self._lines else 1

    def peek(self) -> _Line | None:
        return self._lines[self._pos] if self._pos < len(self._lines) else None

    def expect(self, keyword: str) -> _Line:
        line = self.peek()
        if line is None:
            raise InputError(f"unexpected end of document, expected {keyword}", line=self.last_number)
        if line.keyword != keyword:
            raise line.error(f"expected {keyword}, got {line.keyword!r}")
        self._pos += 1
        return line


def _ints(line: _Line, tokens: list[str | int], count: int | None = None) -> list[int]:
    if count is not None and len(tokens) != count:
        raise line.error(f"{line.keyword} expects {count} integer(s), got {len(tokens)} token(s)")
    if any(not isinstance(tok, int) for tok in tokens):
        raise line.error(f"{line.keyword} expects integers")
    return tokens  # type: ignore[return-value]


def _strings(line: _Line, tokens: list[str | int]) -> list[str]:
    if any(not isinstance(tok, str) for tok in tokens):
        raise line.error(f"{line.keyword} expects quoted strings")
    return tokens  # type: ignore[return-value]


def _decode(line: _Line, text: str) -> Any:
    try:
        return decode_payload(text)
    except ValueError as e:
        raise line.error(f"bad JSON payload: {e}") from None


def _parse_history(line: _Line) -> History:
    tokens = _tokens(line)
    if len(tokens) % 3:
        raise line.error("HISTORY expects triples of \"action\" agent time")
    events = []
    for k in range(0, len(tokens), 3):
        label, agent, time = tokens[k : k + 3]
        if not isinstance(label, str) or not isinstance(agent, int) or not isinstance(time, int):
            raise line.error("HISTORY expects triples of \"action\" agent time")
        try:
            events.append(HistoryEvent(Action(label), agent, time))
        except InputError as e:
            raise e.at_line(line.number) from None
    return History(frozenset(events))


def _parse_state(reader: _Reader, t: int, n: int) -> tuple[GlobalState, int]:
    header = reader.expect("STATE")
    if _ints(header, _tokens(header), 1) != [t]:
        raise header.error(f"expected STATE {t}")
    env_line = reader.expect("ENV")
    payload = _decode(env_line, env_line.rest)
    locals_ = []
    for i in range(1, n + 1):
        line = reader.expect("LOCAL")
        index, _, rest = line.rest.partition(" ")
        if not INTEGER.match(index) or int(index) != i:
            raise line.error(f"expected LOCAL {i}")
        locals_.append(_decode(line, rest.strip()))
    history = _parse_history(reader.expect("HISTORY"))
    return GlobalState(EnvState(history, payload), tuple(locals_)), header.number


def parse_system(text: str) -> System:
    """
    Parse a document into a System with a table interpretation.

    Raises:
        InputError: Line-anchored, on any syntax error or kernel invariant
            violation.
    """
    reader = _Reader(text)

    line = reader.expect("KOPCHECK")
    (version,) = _ints(line, _tokens(line), 1)
    if version != DOCUMENT_VERSION:
        raise line.error(f"unsupported document version {version}")

    line = reader.expect("AGENTS")
    tokens = _tokens(line)
    if not tokens or not isinstance(tokens[0], int):
        raise line.error("AGENTS expects a count followed by quoted names")
    n = tokens[0]
    names = _strings(line, tokens[1:])
    if n < 1 or len(names) != n:
        raise line.error(f"AGENTS declares {n} agents but names {len(names)}")

    line = reader.expect("HORIZON")
    (horizon,) = _ints(line, _tokens(line), 1)
    if horizon < 0:
        raise line.error(f"horizon must be >= 0, got {horizon}")

    props_line = reader.expect("PROPS")
    props = _strings(props_line, _tokens(props_line))
    if len(set(props)) != len(props):
        raise props_line.error(f"duplicate proposition names: {props}")
    for name in props:
        try:
            check_prop_name(name)
        except InputError as e:
            raise e.at_line(props_line.number) from None

    runs: list[Run] = []
    anchors: dict[tuple[int, int | None], int] = {}
    while (nxt := reader.peek()) is not None and nxt.keyword == "RUN":
        line = reader.expect("RUN")
        tokens = _tokens(line)
        if len(tokens) != 2 or tokens[0] != len(runs) or not isinstance(tokens[1], str):
            raise line.error(f"expected RUN {len(runs)} \"<name>\"")
        r = len(runs)
        anchors[(r, None)] = line.number
        states = []
        for t in range(horizon + 1):
            state, number = _parse_state(reader, t, n)
            anchors[(r, t)] = number
            states.append(state)
        runs.append(Run(tuple(states), name=tokens[1]))
    if not runs:
        raise InputError("a system needs at least one run", line=reader.last_number)

    table: dict[str, dict[int, tuple[bool, ...]]] = {p: {} for p in props}
    while (nxt := reader.peek()) is not None and nxt.keyword == "INTERP":
        line = reader.expect("INTERP")
        tokens = _tokens(line)
        if len(tokens) != horizon + 3 or not isinstance(tokens[0], str):
            raise line.error(f"INTERP expects \"<prop>\" <run> and {horizon + 1} values")
        name, r, *row = tokens
        if name not in table:
            raise line.error(f"undeclared proposition {name!r}")
        if not isinstance(r, int) or not 0 <= r < len(runs):
            raise line.error(f"INTERP run {r} out of range 0..{len(runs) - 1}")
        if r in table[name]:
            raise line.error(f"duplicate INTERP row for {name!r} run {r}")
        if any(not isinstance(v, int) or v not in (0, 1) for v in row):
            raise line.error("INTERP values must be 0 or 1")
        table[name][r] = tuple(v == 1 for v in row)

    end = reader.expect("END")
    if reader.peek() is not None:
        raise reader.peek().error("content after END")

    try:
        interpretation = Interpretation(props=tuple(props), table=table)
        system = System(
            runs=tuple(runs),
            horizon=horizon,
            agent_count=n,
            interpretation=interpretation,
            agent_names=tuple(names),
        )
    except InputError as e:
        run, time = e.detail.get("run"), e.detail.get("time")
        raise e.at_line(anchors.get((run, time), anchors.get((run, None), end.number))) from None

    logger.debug(
        "loaded document runs=%d points=%d agents=%d props=%d",
        system.run_count,
        system.point_count,
        n,
        len(props),
    )
    return system


def load_system(path: Path) -> System:
    """Read and parse a document from path."""
    try:
        text = path.read_text()
    except OSError as e:
        raise InputError(f"cannot read system document {path}: {e.strerror}") from None
    return parse_system(text)
