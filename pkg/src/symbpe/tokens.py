"""Atomic token types shared by every tokenization scheme.

An atomic token is a tagged integer: a kind (Bar, Position, Pitch, Duration,
TShift, PitchInterval) plus a payload. Velocity is deliberately not a kind;
it cannot be represented anywhere in the package.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass


class TokenKind(enum.Enum):
    BAR = "Bar"
    POSITION = "Position"
    PITCH = "Pitch"
    DURATION = "Duration"
    TIME_SHIFT = "TShift"
    PITCH_INTERVAL = "PitchInterval"


# Signed payloads; everything else is non-negative.
_SIGNED_KINDS = frozenset({TokenKind.PITCH_INTERVAL})


@dataclass(frozen=True, slots=True)
class AtomicToken:
    """One symbolic unit, e.g. Pitch(60) or TShift(4)."""

    kind: TokenKind
    value: int

    def __post_init__(self) -> None:
        if not isinstance(self.value, int):
            raise TypeError(f"token payload must be int, got {type(self.value).__name__}")
        if self.kind is TokenKind.BAR and self.value != 0:
            raise ValueError("Bar is a marker token and must carry payload 0")
        if self.kind not in _SIGNED_KINDS and self.value < 0:
            raise ValueError(f"{self.kind.value} payload must be non-negative, got {self.value}")

    def render(self) -> str:
        """Human-readable form, e.g. "Duration(4)" or "PitchInterval(+5)".

        Intervals carry an explicit sign except for 0.
        """
        if self.kind in _SIGNED_KINDS and self.value != 0:
            return f"{self.kind.value}({self.value:+d})"
        return f"{self.kind.value}({self.value})"

    def __str__(self) -> str:
        return self.render()


_TOKEN_RE = re.compile(r"^(Bar|Position|Pitch|Duration|TShift|PitchInterval)\(([+-]?\d+)\)$")
_KIND_BY_NAME = {k.value: k for k in TokenKind}


def parse_token(text: str) -> AtomicToken:
    """Inverse of :meth:`AtomicToken.render`."""
    m = _TOKEN_RE.match(text.strip())
    if m is None:
        raise ValueError(f"not a token literal: {text!r}")
    return AtomicToken(_KIND_BY_NAME[m.group(1)], int(m.group(2)))


def render_tokens(tokens: list[AtomicToken], sep: str = ", ") -> str:
    """Render a token list as one line, Fig-style: "Duration(4), TShift(4), ..."."""
    return sep.join(t.render() for t in tokens)


@dataclass(frozen=True, slots=True)
class TokenSequence:
    """One piece's token ids, tied to the vocabulary they index into.

    ``meta`` carries non-contractual bookkeeping (e.g. clamp warning counts);
    it never affects equality of the id stream.
    """

    ids: tuple[int, ...]
    vocab_id: str
    piece_id: str = ""
    meta: dict | None = None

    def __len__(self) -> int:
        return len(self.ids)


def make_sequence(
    ids: list[int] | tuple[int, ...],
    vocab_id: str,
    piece_id: str = "",
    meta: dict | None = None,
) -> TokenSequence:
    return TokenSequence(ids=tuple(ids), vocab_id=vocab_id, piece_id=piece_id, meta=meta)
