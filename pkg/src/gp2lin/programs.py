"""The bundled example programs, shipped as ``.gp`` sources."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .textio import ProgramSource, parse_program

PROGRAM_NAMES = (
    "transitive-closure",
    "is-cycle-slow",
    "is-cycle",
    "is-tree",
    "is-bin-dag",
    "is-connected",
    "2-colour",
    "top-sort",
)


class UnknownProgramError(KeyError):
    def __init__(self, name: str) -> None:
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unknown program {self.name!r}; choose one of {', '.join(PROGRAM_NAMES)}"


def program_text(name: str) -> str:
    if name not in PROGRAM_NAMES:
        raise UnknownProgramError(name)
    return resources.files(__package__).joinpath("programs", f"{name}.gp").read_text()


@lru_cache(maxsize=None)
def bundled_program(name: str) -> ProgramSource:
    """Parse and return the bundled program called ``name``."""
    return parse_program(program_text(name))
