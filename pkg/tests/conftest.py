import pytest
from hypothesis import settings

from dfrc import ArrayGeometry, BeamSpec, build_radar_loss

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


def random_psd(rng, m, rank=None, scale=1.0):
    rank = m if rank is None else rank
    A = rng.standard_normal((m, rank)) + 1j * rng.standard_normal((m, rank))
    return scale * A @ A.conj().T / max(rank, 1)


def random_hermitian(rng, m):
    A = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return A + A.conj().T


@pytest.fixture(scope="session")
def ref_geom():
    return ArrayGeometry(10)


@pytest.fixture(scope="session")
def ref_spec():
    return BeamSpec.reference_default()


@pytest.fixture(scope="session")
def ref_obj(ref_geom, ref_spec):
    return build_radar_loss(ref_geom, ref_spec)


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
