"""Tableau theorem proving for first-order logic with pronouns."""
from lpro.syntax import Discourse, Gender, parse, parse_discourse, render
from lpro.tableau import Closed, Exhausted, Limits, LimitReached, prove

__all__ = [
    "Closed", "Discourse", "Exhausted", "Gender", "LimitReached", "Limits",
    "parse", "parse_discourse", "prove", "render",
]
