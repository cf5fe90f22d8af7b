"""Multiplicities: the two-element semiring {1, ω}."""

from __future__ import annotations

import enum


class Mult(enum.Enum):
    ONE = "1"
    MANY = "ω"

    def __repr__(self) -> str:
        return f"Mult.{self.name}"

    @property
    def ascii(self) -> str:
        return "1" if self is Mult.ONE else "w"

    @classmethod
    def from_ascii(cls, text: str) -> "Mult":
        if text == "1":
            return cls.ONE
        if text in ("w", "ω", "many"):
            return cls.MANY
        raise ValueError(f"not a multiplicity: {text!r}")


ONE = Mult.ONE
MANY = Mult.MANY


def mult_add(p: Mult, q: Mult) -> Mult:
    # Adding two uses always gives an unrestricted use.
    return MANY


def mult_mul(p: Mult, q: Mult) -> Mult:
    return q if p is ONE else MANY
