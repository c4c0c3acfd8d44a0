"""
Formula text syntax, shared by the CLI, documents and tests.

Grammar (precedence ! > & > | > ->, '->' right-associative):

    impl    := or ( '->' impl )?
    or      := and ( '|' and )*
    and     := unary ( '&' unary )*
    unary   := '!' unary
             | 'K' '[' agent ']' unary
             | 'E' '[' '{' agent (',' agent)* '}' ']' unary
             | 'C' '[' '{' agent (',' agent)* '}' ']' unary
             | atom
    atom    := 'true' | 'false'
             | 'does' '[' agent ']' '(' action ')'
             | 'did'  '[' agent ']' '(' action ')'
             | prop
             | '(' impl ')'
    agent   := integer | identifier (resolved against agent names)
"""

import re
from dataclasses import dataclass
from typing import Sequence

from kopcheck.contracts import FormulaSyntaxError, InputError
from kopcheck.kernel import Action, AgentId
from kopcheck.logic.formula import (
    FALSE,
    TRUE,
    And,
    Common,
    DidAtom,
    DoesAtom,
    Everyone,
    Formula,
    Implies,
    Know,
    Not,
    Or,
    Prop,
)


TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<arrow>->)"
    r"|(?P<punct>[!&|()\[\]{},])"
    r"|(?P<word>[A-Za-z_]\w*(?:=\w+)?)"
    r"|(?P<number>\d+)"
    r")"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = TOKEN.match(text, pos)
        if match is None or match.end() == pos:
            raise FormulaSyntaxError("unexpected character", text, pos)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), start))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, agent_names: Sequence[str] | None):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.agent_names = tuple(agent_names) if agent_names else None

    # -- token helpers -------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def accept(self, text: str) -> bool:
        if self.peek().text == text and self.peek().kind != "end":
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        token = self.peek()
        if token.text != text or token.kind == "end":
            self.fail(f"expected {text!r}", token)
        return self.advance()

    def fail(self, message: str, token: Token | None = None) -> None:
        token = token or self.peek()
        found = token.text or "end of input"
        raise FormulaSyntaxError(f"{message}, found {found!r}", self.text, token.pos)

    # -- grammar -------------------------------------------------------------

    def parse(self) -> Formula:
        f = self.implication()
        if self.peek().kind != "end":
            self.fail("unexpected token")
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek().kind == "arrow":
            self.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.accept("|"):
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.accept("&"):
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        token = self.peek()
        if self.accept("!"):
            return Not(self.unary())
        if token.kind == "word" and self.peek(1).text == "[":
            if token.text == "K":
                self.advance()
                self.expect("[")
                agent = self.agent()
                self.expect("]")
                return Know(agent, self.unary())
            if token.text in ("E", "C"):
                self.advance()
                self.expect("[")
                group = self.group()
                self.expect("]")
                operand = self.unary()
                return Everyone(group, operand) if token.text == "E" else Common(group, operand)
        return self.atom()

    def atom(self) -> Formula:
        token = self.peek()
        if self.accept("("):
            f = self.implication()
            self.expect(")")
            return f
        if token.kind != "word":
            self.fail("expected a formula")
        self.advance()
        if token.text == "true":
            return TRUE
        if token.text == "false":
            return FALSE
        if token.text in ("does", "did"):
            self.expect("[")
            agent = self.agent()
            self.expect("]")
            self.expect("(")
            label = self.peek()
            if label.kind != "word":
                self.fail("expected an action label")
            self.advance()
            self.expect(")")
            action = Action(label.text)
            return DoesAtom(agent, action) if token.text == "does" else DidAtom(agent, action)
        if token.text in ("K", "E", "C"):
            self.fail(f"operator {token.text} needs a bracketed argument", token)
        return Prop(token.text)

    def group(self) -> frozenset[AgentId]:
        self.expect("{")
        agents = [self.agent()]
        while self.accept(","):
            agents.append(self.agent())
        self.expect("}")
        return frozenset(agents)

    def agent(self) -> AgentId:
        token = self.peek()
        if token.kind == "number":
            self.advance()
            return int(token.text)
        if token.kind == "word":
            self.advance()
            if self.agent_names and token.text in self.agent_names:
                return self.agent_names.index(token.text) + 1
            raise FormulaSyntaxError(f"unknown agent {token.text!r}", self.text, token.pos)
        self.fail("expected an agent")


def parse_formula(text: str, agent_names: Sequence[str] | None = None) -> Formula:
    """
    Parse formula text.

    Args:
        text: Formula in the text syntax
        agent_names: Names of agents 1..n for resolving named agents

    Raises:
        FormulaSyntaxError: On any syntax error, with the offending column.
    """
    if not isinstance(text, str):
        raise InputError(f"formula text must be a string, got {type(text).__name__}")
    return _Parser(text, agent_names).parse()
