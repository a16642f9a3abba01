"""On-disk formats: pattern text files, PGM grayscale strips, CSV tables.

Every writer is deterministic byte for byte: fixed header order, "\n" line
endings, floats at 12 significant digits in CSVs and full precision (repr)
in pattern headers so round-trips are exact.

Pattern text format (one sign per line after two header lines):

    thickness_um=3.0
    count=3
    +1
    -1
    +1
"""

import os

import numpy as np

from .physics import DomainPattern

CONVERGENCE_HEADER = ("generation", "best", "mean", "F", "pop_std")
SPECTRUM_HEADER = ("wavelength_nm", "deff_abs", "deff_norm")
BENCH_HEADER = ("algorithm", "average", "max", "min", "std", "mean_time_s",
                "mean_deff_norm")
TRIAL_HEADER = ("trial", "seed", "final_fitness", "time_s")
TIMING_HEADER = ("workers", "median_seconds", "speedup")
BACKEND_HEADER = ("backend", "median_seconds", "speedup_vs_numpy")


class PatternFormatError(ValueError):
    pass


def format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % value
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(v) for v in row) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def write_pattern(pattern: DomainPattern, path) -> None:
    lines = [f"thickness_um={pattern.thickness_um!r}", f"count={pattern.count}"]
    lines.extend("+1" if s > 0 else "-1" for s in pattern.signs)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pattern(path) -> DomainPattern:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2:
        raise PatternFormatError(f"{path}: expected two header lines")
    if not lines[0].startswith("thickness_um="):
        raise PatternFormatError(f"{path}:1: expected 'thickness_um=<value>'")
    if not lines[1].startswith("count="):
        raise PatternFormatError(f"{path}:2: expected 'count=<value>'")
    try:
        thickness = float(lines[0].partition("=")[2])
    except ValueError:
        raise PatternFormatError(f"{path}:1: bad thickness value") from None
    try:
        count = int(lines[1].partition("=")[2])
    except ValueError:
        raise PatternFormatError(f"{path}:2: bad count value") from None
    body = lines[2:]
    if len(body) != count:
        raise PatternFormatError(
            f"{path}: count={count} but file has {len(body)} sign lines"
        )
    signs = np.empty(count, dtype=np.int8)
    for i, token in enumerate(body):
        if token == "+1":
            signs[i] = 1
        elif token == "-1":
            signs[i] = -1
        else:
            raise PatternFormatError(
                f"{path}:{i + 3}: invalid sign {token!r} (must be +1 or -1)"
            )
    return DomainPattern(thickness_um=thickness, signs=signs)


def write_grayscale(pattern: DomainPattern, path, row_height: int = 32) -> None:
    """Binary PGM strip: column j is white (255) for +1, black (0) for -1."""
    if row_height < 1:
        raise ValueError(f"row_height must be >= 1, got {row_height}")
    width = pattern.count
    header = f"P5\n{width} {row_height}\n255\n".encode("ascii")
    row = bytes(255 if s > 0 else 0 for s in pattern.signs)
    with open(path, "wb") as fh:
        fh.write(header)
        for _ in range(row_height):
            fh.write(row)


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return str(path)
