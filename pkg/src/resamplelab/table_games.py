"""Table games: column-wise realization tables with constrained selection.

The game strips the adversary-vs-scheduler interaction down to a table with
one row per object and one column per round.  Columns are built in order:
the adversary fixes each object's distribution, the whole column is realized,
and only then are outcomes readable.  After the last column the adversary
selects one cell per row as the final joint realization, subject to the
constraint that characterizes a scheduler:

* column budget   -- cells from at most c distinct columns (aggregation);
* fixed columns   -- cells only from the landmark set of T;
* marked budget   -- cells must have been marked before their column was
  realized, at most c marks per row (proactive back-off).

``simulate_equivalence`` mechanically translates a live adversary into the
game (reveal exactly the cells the live run would sample, drive the real
scheduler on the sampling pattern, select each row's last sampled column)
and compares joint-realization histograms.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .core import (
    Adversary,
    ConfigurationError,
    History,
    HistoryRow,
    JointState,
    RandomSource,
    SettingRuleError,
    STREAM_ADVERSARY,
    STREAM_VALUES,
    derive_seed,
)
from .schedulers import make_scheduler


class ConstraintViolation(SettingRuleError):
    """Final selection broke the game's constraint."""


@dataclass(frozen=True)
class ColumnBudget:
    max_columns: int

    def __post_init__(self):
        if self.max_columns < 1:
            raise ConfigurationError("column budget must be positive")

    def validate(self, selection: dict, marks: set) -> None:
        used = sorted(set(selection.values()))
        if len(used) > self.max_columns:
            raise ConstraintViolation(
                f"selection uses {len(used)} columns {used}, budget {self.max_columns}"
            )


@dataclass(frozen=True)
class FixedColumns:
    columns: frozenset

    def __post_init__(self):
        if not self.columns:
            raise ConfigurationError("fixed column set must be non-empty")

    def validate(self, selection: dict, marks: set) -> None:
        bad = sorted((u, t) for u, t in selection.items() if t not in self.columns)
        if bad:
            raise ConstraintViolation(f"selections outside the fixed columns: {bad}")


@dataclass(frozen=True)
class MarkedBudget:
    per_row_cap: int

    def __post_init__(self):
        if self.per_row_cap < 1:
            raise ConfigurationError("per-row mark cap must be positive")

    def validate(self, selection: dict, marks: set) -> None:
        bad = sorted((u, t) for u, t in selection.items() if (u, t) not in marks)
        if bad:
            raise ConstraintViolation(f"selected unmarked cells: {bad}")


@dataclass
class Table:
    """Realization table; cells become readable column by column."""

    n: int
    horizon: int
    values: dict = field(default_factory=dict)  # (obj, t) -> value
    marks: set = field(default_factory=set)
    revealed_through: int = 0

    def value(self, obj: int, t: int):
        if t > self.revealed_through:
            raise SettingRuleError(f"column {t} is not realized yet")
        return self.values[(obj, t)]

    def row(self, obj: int) -> list:
        return [self.values[(obj, t)] for t in range(1, self.revealed_through + 1)]


class TableAdversary:
    """Full-visibility game adversary: distributions, marks, final selection."""

    def column_specs(self, t: int, table: Table) -> dict:
        return {}

    def mark_cells(self, t: int, table: Table):
        # Called after column t's specs are fixed, before its realization.
        return ()

    def select(self, table: Table) -> dict:
        raise NotImplementedError


def play_table_game(adversary: TableAdversary, n: int, horizon: int, constraint,
                    initial_specs: dict, seed: int = 0) -> JointState:
    """Build the table column by column and apply the adversary's selection.

    The adversary's specs for a column are installed before any of its cells
    are drawn, marks are placed before the column is realized, and the final
    selection is validated exactly against the constraint.
    """
    if set(initial_specs) != set(range(1, n + 1)):
        raise ConfigurationError("initial specs must cover objects 1..n")
    specs = dict(initial_specs)
    rng = RandomSource(seed, STREAM_VALUES).rng
    table = Table(n, horizon)
    per_row_marks: Counter = Counter()
    for t in range(1, horizon + 1):
        changes = adversary.column_specs(t, table) if t > 1 else {}
        for u, spec in changes.items():
            if u not in specs:
                raise ConfigurationError(f"spec for unknown object {u}")
            specs[u] = spec
        if isinstance(constraint, MarkedBudget):
            for u in adversary.mark_cells(t, table):
                per_row_marks[u] += 1
                if per_row_marks[u] > constraint.per_row_cap:
                    raise ConstraintViolation(
                        f"row {u} marked {per_row_marks[u]} cells, cap {constraint.per_row_cap}"
                    )
                table.marks.add((u, t))
        for u in range(1, n + 1):
            table.values[(u, t)] = specs[u].sample(rng)
        table.revealed_through = t
    selection = adversary.select(table)
    if set(selection) != set(range(1, n + 1)):
        raise ConstraintViolation("selection must pick exactly one cell per row")
    for u, t in selection.items():
        if not 1 <= t <= horizon:
            raise ConstraintViolation(f"row {u} selected nonexistent column {t}")
    constraint.validate(selection, table.marks)
    return JointState({u: (table.values[(u, t)], t) for u, t in selection.items()})


# ---------------------------------------------------------------------------
# Mechanical translation of live adversaries
# ---------------------------------------------------------------------------


def run_live_joint(make_specs, make_adversary, scheduler_name: str, n: int,
                   horizon: int, seed: int, alpha: float = 2.0) -> tuple:
    """One live run; returns (value vector, origins dict)."""
    from .core import World

    scheduler = make_scheduler(scheduler_name, list(range(1, n + 1)), horizon, alpha=alpha)
    world = World(make_specs(), horizon, scheduler, seed=seed)
    adversary = make_adversary(world.adversary_stream())
    world.initialize()
    for t in range(2, horizon + 1):
        world.run_round(adversary, t)
    return tuple(world.state.values_vector()), world.state.origins()


def run_table_joint(make_specs, make_adversary, scheduler_name: str, n: int,
                    horizon: int, seed: int, constraint, alpha: float = 2.0) -> tuple:
    """Translated game run: realize full columns, reveal to the adversary only
    what the live run would, select each row's last sampled column."""
    specs = dict(make_specs())
    if set(specs) != set(range(1, n + 1)):
        raise ConfigurationError("specs must cover objects 1..n")
    rng = RandomSource(seed, STREAM_VALUES).rng
    adversary = make_adversary(RandomSource(seed, STREAM_ADVERSARY).rng)
    scheduler = make_scheduler(scheduler_name, list(range(1, n + 1)), horizon, alpha=alpha)
    history = History()
    table: dict = {}
    origins: dict = {}

    for t in range(1, horizon + 1):
        if t == 1:
            changes: dict = {}
            forced = list(range(1, n + 1))
        else:
            changes = adversary.next_distributions(history)
            for u, spec in changes.items():
                if u not in specs:
                    raise ConfigurationError(f"spec for unknown object {u}")
                specs[u] = spec
            forced = sorted(set(adversary.pick_samples(history)))
        for u in range(1, n + 1):
            table[(u, t)] = specs[u].sample(rng)
        if t == 1:
            sampled = forced
        else:
            due_before = scheduler.peek_due(t)
            for u in forced:
                scheduler.on_adversarial_sample(u, t, was_due=u in due_before)
            algo = scheduler.collect(t, set(forced))
            sampled = sorted(set(forced) | set(algo))
        for u in sampled:
            origins[u] = t
        history.append(
            HistoryRow(t, tuple(sorted(changes)), tuple(sampled),
                       tuple(table[(u, t)] for u in sampled))
        )

    constraint.validate(origins, set())
    values = tuple(table[(u, origins[u])] for u in range(1, n + 1))
    return values, origins


def tv_distance(counts_a: Counter, counts_b: Counter, total_a: int, total_b: int) -> float:
    keys = set(counts_a) | set(counts_b)
    return 0.5 * sum(
        abs(counts_a.get(k, 0) / total_a - counts_b.get(k, 0) / total_b) for k in keys
    )


def simulate_equivalence(make_specs, make_adversary, scheduler_name: str, n: int,
                         horizon: int, trials: int, seed: int, constraint,
                         universe_size: int, alpha: float = 2.0) -> dict:
    """Empirical total-variation distance between the live joint distribution
    and its table-game translation, plus exact per-run legality checks."""
    if universe_size ** n > 64:
        raise ConfigurationError(
            f"universe too large to histogram: {universe_size}^{n} > 64"
        )
    live: Counter = Counter()
    game: Counter = Counter()
    live_origins_ok = 0
    for k in range(trials):
        lv, lorig = run_live_joint(make_specs, make_adversary, scheduler_name, n,
                                   horizon, derive_seed(seed, "live", k), alpha=alpha)
        live[lv] += 1
        try:
            constraint.validate(lorig, set())
            live_origins_ok += 1
        except ConstraintViolation:
            pass
        gv, _ = run_table_joint(make_specs, make_adversary, scheduler_name, n,
                                horizon, derive_seed(seed, "table", k), constraint,
                                alpha=alpha)
        game[gv] += 1
    return {
        "tv": tv_distance(live, game, trials, trials),
        "trials": trials,
        "live_selections_legal": live_origins_ok,
    }
