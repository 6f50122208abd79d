"""Rooted graph programs with constant-time matching of fast rules."""

from .host import HostGraph
from .interpreter import CompiledProgram, execute
from .programs import PROGRAM_NAMES, bundled_program
from .textio import parse_host, parse_program, print_host

__all__ = [
    "CompiledProgram",
    "HostGraph",
    "PROGRAM_NAMES",
    "bundled_program",
    "execute",
    "parse_host",
    "parse_program",
    "print_host",
]
