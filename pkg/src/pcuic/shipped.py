"""The bundled source corpus and its ill-typed mutants."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .checker import CheckedEnv, check_env
from .resolve import Program, load

CORPUS_DIR = Path(__file__).parent / "corpus"
MUTANT_DIR = CORPUS_DIR / "mutants"
_EXPECT = re.compile(r"\(\*\s*expect:\s*([a-z-]+)\s*\*\)")


@dataclass(frozen=True)
class Mutant:
    path: Path
    expected: str


def corpus_paths() -> list[Path]:
    return sorted(CORPUS_DIR.glob("*.pcuic"))


def mutants() -> list[Mutant]:
    out = []
    for p in sorted(MUTANT_DIR.glob("*.pcuic")):
        m = _EXPECT.search(p.read_text())
        if m is None:
            raise ValueError(f"{p.name} has no expect header")
        out.append(Mutant(p, m.group(1)))
    return out


@lru_cache(maxsize=None)
def load_program(name: str) -> Program:
    return load((CORPUS_DIR / f"{name}.pcuic").read_text())


@lru_cache(maxsize=None)
def load_checked(name: str) -> CheckedEnv:
    return check_env(load_program(name).env)


def corpus_names() -> list[str]:
    return [p.stem for p in corpus_paths()]
