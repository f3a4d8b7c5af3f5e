"""Built-in example ideals and loaders for user-supplied ones.

Builders are pure functions of their seed; the text files shipped under
``data/`` are the builder outputs at the seeds recorded in CORPUS_SEEDS and
can be regenerated with :func:`write_corpus_files`.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import numpy as np

from .errors import InputError
from .polysys import (
    PolySystem,
    Polynomial,
    linear_form,
    parse_system,
    random_dense_form,
    serialize_system,
    unit_coefficients,
    variable,
)

CORPUS_SEEDS = {
    "determinantal_threefold": 20240801,
    "segre_section": 20240802,
    "minors_curve": 20240803,
}


def data_dir() -> Path:
    return Path(__file__).parent / "data"


def corpus_path(name: str) -> Path:
    return data_dir() / f"{name}.poly"


def twisted_cubic() -> PolySystem:
    """The rational normal curve of degree 3 in P^3: three binomial quadrics."""
    w, x, y, z = (variable(j, 4) for j in range(4))
    gens = [x * x - w * y, y * y - x * z, w * z - x * y]
    return PolySystem(gens, var_names=("w", "x", "y", "z"))


def _poly_det(rows: list[list[Polynomial]]) -> Polynomial:
    """Determinant of a square polynomial matrix by Laplace expansion."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = None
    for j in range(n):
        sub = [row[:j] + row[j + 1 :] for row in rows[1:]]
        term = rows[0][j] * _poly_det(sub)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def _random_linear_matrix(shape, num_vars, rng) -> list[list[Polynomial]]:
    nrows, ncols = shape
    return [
        [linear_form(unit_coefficients(num_vars, rng)) for _ in range(ncols)]
        for _ in range(nrows)
    ]


def _matrix_values(entries, x) -> np.ndarray:
    return np.array([[e.evaluate(x) for e in row] for row in entries])


def determinantal_threefold(rng: np.random.Generator) -> PolySystem:
    """The 4x4 minors of a random 4x5 matrix of linear forms in 6 variables.

    Their zero set is a smooth threefold in P^5.  Degenerate draws (the
    matrix dropping rank at random test points) are rejected and redrawn.
    """
    names = tuple(f"x{j}" for j in range(6))
    for _ in range(32):
        entries = _random_linear_matrix((4, 5), 6, rng)
        ok = True
        for _ in range(20):
            point = rng.normal(size=6) + 1j * rng.normal(size=6)
            svals = np.linalg.svd(_matrix_values(entries, point), compute_uv=False)
            if svals[3] <= 1e-8 * svals[0]:
                ok = False
                break
        if not ok:
            continue
        minors = []
        for skip in range(5):
            cols = [c for c in range(5) if c != skip]
            sub = [[entries[i][c] for c in cols] for i in range(4)]
            minors.append(_poly_det(sub))
        return PolySystem(minors, var_names=names)
    raise InputError("could not draw a non-degenerate 4x5 matrix of linear forms")


def segre_section(rng: np.random.Generator) -> PolySystem:
    """A hyperplane section of the Segre image of P^1 x P^3 in P^7.

    Generators are the six 2x2 minors of the 2x4 coordinate matrix plus one
    random hyperplane, kept as an explicit generator so that random ideal
    elements of degree >= 2 absorb it and square systems can include it
    verbatim (it is the last generator).
    """
    names = tuple(f"z{i}{j}" for i in range(2) for j in range(4))
    zz = [[variable(4 * i + j, 8) for j in range(4)] for i in range(2)]
    gens = []
    for a in range(4):
        for b in range(a + 1, 4):
            gens.append(zz[0][a] * zz[1][b] - zz[0][b] * zz[1][a])
    gens.append(linear_form(unit_coefficients(8, rng)))
    return PolySystem(gens, var_names=names)


def conic_negative_case() -> tuple[PolySystem, tuple[int, ...]]:
    """A conic in P^3 and the degree request (3,1,1) that breaks finiteness.

    Two degree-1 elements of the ideal are both multiples of the unique
    plane through the conic, so the square system cuts out an extra line.
    """
    w, x, y, z = (variable(j, 4) for j in range(4))
    plane = z
    quadric = w * y - x * x
    system = PolySystem([plane, quadric], var_names=("w", "x", "y", "z"))
    return system, (3, 1, 1)


def minors_curve_negative_case(
    rng: np.random.Generator,
) -> tuple[PolySystem, tuple[int, ...]]:
    """A curve in P^4 linked to a surface scroll, with the bad request (4,2,2,2).

    The ideal is generated by a random cubic and the three 2x2 minors of a
    random 2x3 matrix of linear forms; the minors alone cut out a surface, so
    degree-2 elements cannot separate the curve from it and the square system
    acquires a residual curve.
    """
    names = tuple(f"x{j}" for j in range(5))
    entries = _random_linear_matrix((2, 3), 5, rng)
    minors = []
    for a in range(3):
        for b in range(a + 1, 3):
            minors.append(entries[0][a] * entries[1][b] - entries[0][b] * entries[1][a])
    cubic = random_dense_form(5, 3, rng)
    system = PolySystem([cubic] + minors, var_names=names)
    return system, (4, 2, 2, 2)


def load_ideal(path) -> PolySystem:
    """Parse a system file in the canonical format."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_system(text)


def degree_histogram(system: PolySystem) -> dict[int, int]:
    return dict(sorted(Counter(system.degrees()).items()))


def write_corpus_files(directory=None) -> list[Path]:
    """Regenerate the shipped corpus files from the builders at fixed seeds."""
    directory = Path(directory) if directory is not None else data_dir()
    directory.mkdir(parents=True, exist_ok=True)
    systems = {
        "twisted_cubic": twisted_cubic(),
        "conic": conic_negative_case()[0],
        "determinantal_threefold": determinantal_threefold(
            np.random.default_rng(CORPUS_SEEDS["determinantal_threefold"])
        ),
        "segre_section": segre_section(
            np.random.default_rng(CORPUS_SEEDS["segre_section"])
        ),
        "minors_curve": minors_curve_negative_case(
            np.random.default_rng(CORPUS_SEEDS["minors_curve"])
        )[0],
    }
    written = []
    for name, system in systems.items():
        path = directory / f"{name}.poly"
        path.write_text(serialize_system(system), encoding="utf-8")
        written.append(path)
    return written
