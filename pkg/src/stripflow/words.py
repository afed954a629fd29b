"""Exact word algebra for the rank-2 free group F(a, b).

Letters are encoded as signed integers: +1 = a, -1 = a^-1, +2 = b,
-2 = b^-1.  Words are kept reduced at all times; the empty word is the
identity.  Text form uses ``a``/``A``/``b``/``B`` (capital = inverse),
e.g. ``abAB`` for the commutator.
"""
from __future__ import annotations

from typing import Iterable, Iterator, NamedTuple

NUM_GENERATORS = 2

_INT_TO_CHAR = {1: "a", -1: "A", 2: "b", -2: "B"}
_CHAR_TO_INT = {v: k for k, v in _INT_TO_CHAR.items()}


class Letter(NamedTuple):
    """A single generator or its inverse: ``generator`` in {1, 2}, ``sign`` +-1."""

    generator: int
    sign: int

    def encode(self) -> int:
        return self.generator * self.sign


def _as_int(letter) -> int:
    code = letter.encode() if isinstance(letter, Letter) else int(letter)
    if code == 0 or abs(code) > NUM_GENERATORS:
        raise ValueError(f"invalid letter code {letter!r}")
    return code


def reduce_letters(raw: Iterable) -> tuple[int, ...]:
    """Freely reduce a letter sequence (ints or Letters) to a tuple of ints."""
    out: list[int] = []
    for item in raw:
        code = _as_int(item)
        if out and out[-1] == -code:
            out.pop()
        else:
            out.append(code)
    return tuple(out)


class Word:
    """A reduced element of F(a, b).  Immutable and hashable."""

    __slots__ = ("letters",)

    def __init__(self, letters: Iterable = (), *, _reduced: bool = False):
        if _reduced:
            object.__setattr__(self, "letters", tuple(letters))
        else:
            object.__setattr__(self, "letters", reduce_letters(letters))

    def __setattr__(self, name, value):
        raise AttributeError("Word is immutable")

    @classmethod
    def from_text(cls, text: str) -> "Word":
        try:
            return cls(_CHAR_TO_INT[c] for c in text.strip())
        except KeyError as exc:
            raise ValueError(f"invalid word text {text!r}") from exc

    def text(self) -> str:
        return "".join(_INT_TO_CHAR[c] for c in self.letters)

    # group operations ----------------------------------------------------

    def __mul__(self, other: "Word") -> "Word":
        out = list(self.letters)
        for code in other.letters:
            if out and out[-1] == -code:
                out.pop()
            else:
                out.append(code)
        return Word(out, _reduced=True)

    def inverse(self) -> "Word":
        return Word(tuple(-c for c in reversed(self.letters)), _reduced=True)

    def __pow__(self, k: int) -> "Word":
        if k == 0:
            return Word()
        base = self if k > 0 else self.inverse()
        out = base
        for _ in range(abs(k) - 1):
            out = out * base
        return out

    def cyclic_reduce(self) -> tuple["Word", "Word"]:
        """Return (core, conjugator) with self == conjugator * core * conjugator^-1."""
        ls = self.letters
        i, j = 0, len(ls)
        while j - i >= 2 and ls[i] == -ls[j - 1]:
            i += 1
            j -= 1
        return Word(ls[i:j], _reduced=True), Word(ls[:i], _reduced=True)

    # container / comparison ----------------------------------------------

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    def __repr__(self) -> str:
        return f"Word({self.text()!r})" if self.letters else "Word(identity)"

    def __reduce__(self):
        return (Word, (self.letters,))


IDENTITY = Word()


# Operation-style aliases used throughout the package and the CLI.

def reduce(raw: Iterable) -> Word:
    return Word(raw)


def multiply(u: Word, v: Word) -> Word:
    return u * v


def invert(u: Word) -> Word:
    return u.inverse()


def power(u: Word, k: int) -> Word:
    return u ** k


def cyclic_reduce(u: Word) -> tuple[Word, Word]:
    return u.cyclic_reduce()
