import numpy as np
import pytest

from ddchannel.plane import ModulusContext
from ddchannel.sequences import Sequence


def random_sequence(ctx: ModulusContext, rng: np.random.Generator, unit: bool = True) -> Sequence:
    v = rng.normal(size=ctx.N) + 1j * rng.normal(size=ctx.N)
    if unit:
        v = v / np.linalg.norm(v)
    return Sequence(ctx, v)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
