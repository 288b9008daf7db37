"""Benchmark utilities: quasigroup-completion instances and filter matrices.

Provides seeded generators for quasigroup (Latin square) completion boards,
three program encodings of those boards, and a runner that times every
reason-filter/conflict-filter combination over a set of instances.  Results
can be written as CSV, printed as a normalized text matrix, or rendered as
heat-map images saved next to the CSV.
"""

from __future__ import annotations

import csv
import random
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .driver import UNKNOWN, SolverConfig, solve_text
from .iis import FILTER_LETTERS

# Filter choices benchmarked against each other (deletion is left out: its
# oracle cost is quadratic and it is dominated by forward/backward).
MATRIX_FILTERS: Tuple[str, ...] = (
    "simple",
    "forward",
    "backward",
    "range",
    "cc",
    "ccrange",
)

CSV_HEADER = ("reason", "conflict", "avg_time", "avg_conflict_size", "timeouts")


# ---------------------------------------------------------------------------
# Instance generation
# ---------------------------------------------------------------------------


def latin_square(n: int, rng: random.Random) -> List[List[int]]:
    """A uniform-ish random Latin square of order n with symbols 1..n.

    Starts from the cyclic square and scrambles rows, columns and symbols;
    the result is always a complete Latin square.
    """
    rows = list(range(n))
    cols = list(range(n))
    syms = list(range(1, n + 1))
    rng.shuffle(rows)
    rng.shuffle(cols)
    rng.shuffle(syms)
    return [[syms[(rows[i] + cols[j]) % n] for j in range(n)] for i in range(n)]


def quasigroup_board(n: int, fill: float = 0.3, seed: int = 0) -> Dict[Tuple[int, int], int]:
    """A random quasigroup completion board.

    Returns a mapping from (row, col) (1-based) to the prefilled symbol.
    Cells are kept from a random complete Latin square, with the holes
    spread evenly over rows and columns (an independent random Latin square
    serves as the hole pattern).  Balanced hole punching is the standard way
    to obtain uniformly hard completion instances at a given fill rate, and
    the boards are completable by construction.
    """
    rng = random.Random(seed)
    square = latin_square(n, rng)
    pattern = latin_square(n, rng)
    keep_per_row = round(fill * n)
    return {
        (r + 1, c + 1): square[r][c]
        for r in range(n)
        for c in range(n)
        if pattern[r][c] > n - keep_per_row
    }


def completable_board(n: int, fill: float = 0.3, seed: int = 0) -> Dict[Tuple[int, int], int]:
    """A quasigroup board sampled from a complete Latin square (always
    satisfiable); useful when a solution must exist."""
    rng = random.Random(seed)
    square = latin_square(n, rng)
    cells = [(r, c) for r in range(n) for c in range(n)]
    rng.shuffle(cells)
    keep = round(fill * n * n)
    return {(r + 1, c + 1): square[r][c] for (r, c) in cells[:keep]}


def _prefill_facts(board: Dict[Tuple[int, int], int]) -> List[str]:
    return [f"q({r},{c}) $== {v}." for (r, c), v in sorted(board.items())]


def _distinct_statements(n: int) -> List[str]:
    lines = []
    for r in range(1, n + 1):
        elems = ";".join(f"q({r},{c})" for c in range(1, n + 1))
        lines.append(f"$distinct{{{elems}}}.")
    for c in range(1, n + 1):
        elems = ";".join(f"q({r},{c})" for r in range(1, n + 1))
        lines.append(f"$distinct{{{elems}}}.")
    return lines


def choice_encoding(n: int, board: Dict[Tuple[int, int], int]) -> str:
    """Boolean-search encoding: one choice per free cell, linked to theory vars.

    Free cells pick exactly one symbol via a cardinality choice; integrity
    rules force the corresponding `q(r,c) $== v` constraint atom.  Rows and
    columns are constrained with the distinct global, so conflicts surface
    through the constraint engine and exercise conflict filtering.
    """
    lines = [f"$domain(1..{n})."]
    lines.extend(_prefill_facts(board))
    for r in range(1, n + 1):
        for c in range(1, n + 1):
            if (r, c) in board:
                continue
            elems = ";".join(f"set({r},{c},{v})" for v in range(1, n + 1))
            lines.append(f"1{{{elems}}}1.")
            for v in range(1, n + 1):
                lines.append(f":- set({r},{c},{v}), not q({r},{c}) $== {v}.")
    lines.extend(_distinct_statements(n))
    return "\n".join(lines) + "\n"


def csp_distinct_encoding(n: int, board: Dict[Tuple[int, int], int]) -> str:
    """Pure constraint encoding using one distinct global per row/column."""
    lines = [f"$domain(1..{n})."]
    lines.extend(_prefill_facts(board))
    lines.extend(_distinct_statements(n))
    return "\n".join(lines) + "\n"


def csp_pairwise_encoding(n: int, board: Dict[Tuple[int, int], int]) -> str:
    """Pure constraint encoding with pairwise disequalities instead of distinct."""
    lines = [f"$domain(1..{n})."]
    lines.extend(_prefill_facts(board))
    for r in range(1, n + 1):
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                lines.append(f"q({r},{i}) $!= q({r},{j}).")
    for c in range(1, n + 1):
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                lines.append(f"q({i},{c}) $!= q({j},{c}).")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Matrix runner
# ---------------------------------------------------------------------------


@dataclass
class InstanceOutcome:
    """Measurements from solving one instance under one configuration."""

    time: float
    conflict_size: float
    timed_out: bool
    conflicts: int


@dataclass
class BenchRow:
    """One aggregated cell of the filter matrix."""

    reason: str
    conflict: str
    avg_time: float
    avg_conflict_size: float
    timeouts: int

    def as_csv(self) -> List[str]:
        return [
            FILTER_LETTERS[self.reason],
            FILTER_LETTERS[self.conflict],
            f"{self.avg_time:.4f}",
            f"{self.avg_conflict_size:.2f}",
            str(self.timeouts),
        ]


def run_instance(
    text: str,
    reason: str,
    conflict: str,
    timeout: Optional[float] = None,
    seed: int = 0,
    delay: int = 1,
    lookahead: bool = False,
) -> InstanceOutcome:
    """Solve one program text under the given filter pair, first model only."""
    cfg = SolverConfig(
        conflict_filter=conflict,
        reason_filter=reason,
        delay=delay,
        lookahead=lookahead,
        max_models=1,
        seed=seed,
        timeout=timeout,
    )
    start = time.perf_counter()
    result = solve_text(text, cfg)
    elapsed = time.perf_counter() - start
    return InstanceOutcome(
        time=elapsed,
        conflict_size=result.stats.avg_conflict_size,
        timed_out=result.status == UNKNOWN,
        conflicts=result.stats.conflicts,
    )


def run_matrix(
    texts: Sequence[str],
    reasons: Sequence[str] = MATRIX_FILTERS,
    conflicts: Sequence[str] = MATRIX_FILTERS,
    timeout: Optional[float] = None,
    seed: int = 0,
    delay: int = 1,
    lookahead: bool = False,
    progress=None,
) -> List[BenchRow]:
    """Run every reason x conflict pair over all instance texts.

    Returns rows in row-major order (reason outer, conflict inner).  Timed-out
    runs still contribute their elapsed wall time to the average.
    """
    rows: List[BenchRow] = []
    for reason in reasons:
        for conflict in conflicts:
            times: List[float] = []
            sizes: List[float] = []
            timeouts = 0
            for text in texts:
                out = run_instance(
                    text,
                    reason,
                    conflict,
                    timeout=timeout,
                    seed=seed,
                    delay=delay,
                    lookahead=lookahead,
                )
                times.append(out.time)
                sizes.append(out.conflict_size)
                if out.timed_out:
                    timeouts += 1
            row = BenchRow(
                reason=reason,
                conflict=conflict,
                avg_time=sum(times) / len(times) if times else 0.0,
                avg_conflict_size=sum(sizes) / len(sizes) if sizes else 0.0,
                timeouts=timeouts,
            )
            rows.append(row)
            if progress is not None:
                progress(row)
    return rows


def write_csv(rows: Iterable[BenchRow], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv())


def _grid(rows: Sequence[BenchRow], field: str) -> Tuple[List[str], List[str], List[List[float]]]:
    reasons = list(dict.fromkeys(row.reason for row in rows))
    conflicts = list(dict.fromkeys(row.conflict for row in rows))
    lookup = {(row.reason, row.conflict): getattr(row, field) for row in rows}
    grid = [[lookup[(r, c)] for c in conflicts] for r in reasons]
    return reasons, conflicts, grid


def _normalize(grid: List[List[float]]) -> List[List[float]]:
    worst = max((v for line in grid for v in line), default=0.0)
    if worst <= 0:
        return [[0.0 for _ in line] for line in grid]
    return [[100.0 * v / worst for v in line] for line in grid]


def format_matrix(rows: Sequence[BenchRow], field: str = "avg_time") -> str:
    """Normalized percent-of-worst matrix as text (reasons down, conflicts across)."""
    reasons, conflicts, grid = _grid(rows, field)
    norm = _normalize(grid)
    letters = [FILTER_LETTERS[name] for name in conflicts]
    lines = [f"{field} (% of worst)"]
    lines.append("     " + "".join(f"{letter:>7}" for letter in letters))
    for name, line in zip(reasons, norm):
        cells = "".join(f"{value:7.1f}" for value in line)
        lines.append(f"{FILTER_LETTERS[name]:>5}" + cells)
    return "\n".join(lines)


def render_heatmaps(rows: Sequence[BenchRow], csv_path) -> List[Path]:
    """Render percent-of-worst heat maps next to the CSV file.

    Produces one image per measured quantity (wall time and conflict size),
    named `<csv stem>_time.png` and `<csv stem>_conflict_size.png`.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    csv_path = Path(csv_path)
    outputs: List[Path] = []
    for field, suffix, title in (
        ("avg_time", "time", "average wall time"),
        ("avg_conflict_size", "conflict_size", "average conflict size"),
    ):
        reasons, conflicts, grid = _grid(rows, field)
        norm = _normalize(grid)
        fig, ax = plt.subplots(figsize=(6.4, 5.2))
        image = ax.imshow(norm, cmap="viridis", vmin=0.0, vmax=100.0)
        ax.set_xticks(range(len(conflicts)))
        ax.set_xticklabels([FILTER_LETTERS[name] for name in conflicts])
        ax.set_yticks(range(len(reasons)))
        ax.set_yticklabels([FILTER_LETTERS[name] for name in reasons])
        ax.set_xlabel("conflict filter")
        ax.set_ylabel("reason filter")
        ax.set_title(f"{title} (% of worst)")
        for i in range(len(reasons)):
            for j in range(len(conflicts)):
                ax.text(
                    j,
                    i,
                    f"{norm[i][j]:.0f}",
                    ha="center",
                    va="center",
                    color="white" if norm[i][j] < 60 else "black",
                    fontsize=8,
                )
        fig.colorbar(image, ax=ax, shrink=0.85)
        fig.tight_layout()
        out = csv_path.with_name(f"{csv_path.stem}_{suffix}.png")
        fig.savefig(out, dpi=130)
        plt.close(fig)
        outputs.append(out)
    return outputs
