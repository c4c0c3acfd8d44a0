"""
Interpretations of primitive propositions.

An interpretation assigns a truth value to every declared proposition at
every point. It is given either extensionally (a table of per-run rows)
or by scenario-supplied predicates computed from run contents.

does/did atoms are not part of an interpretation; they are derived from
the environment history by the kernel.
"""

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Mapping, Sequence

from kopcheck.contracts import InputError

if TYPE_CHECKING:
    from kopcheck.kernel import Run, System


PROP_NAME = re.compile(r"^[A-Za-z_]\w*(?:=\w+)?$")
RESERVED = frozenset({"true", "false", "does", "did", "K", "C", "E"})

RunPredicate = Callable[["Run", int], bool]


def check_prop_name(name: str) -> None:
    if not PROP_NAME.match(name) or name in RESERVED:
        raise InputError(f"invalid proposition name: {name!r}")


@dataclass(frozen=True, eq=False)
class Interpretation:
    """
    Total map from (proposition, point) to {True, False}.

    Exactly one of `table` or `predicates` is set. A table maps each
    proposition to {run index: per-time truth row}; rows must cover every
    run and every time 0..T, missing entries are an error (never defaulted).
    """

    props: tuple[str, ...]
    table: Mapping[str, Mapping[int, tuple[bool, ...]]] | None = None
    predicates: Mapping[str, RunPredicate] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if (self.table is None) == (self.predicates is None):
            raise InputError("an interpretation needs exactly one of table or predicates")
        if len(set(self.props)) != len(self.props):
            raise InputError(f"duplicate proposition names: {list(self.props)}")
        for name in self.props:
            check_prop_name(name)
        source = self.table if self.table is not None else self.predicates
        extra = set(source) - set(self.props)
        if extra:
            raise InputError(f"undeclared propositions in interpretation: {sorted(extra)}")

    @classmethod
    def empty(cls) -> "Interpretation":
        return cls(props=(), table={})

    @classmethod
    def from_table(
        cls,
        table: Mapping[str, Mapping[int, Sequence[bool]]],
    ) -> "Interpretation":
        """Build an extensional interpretation; props are the table keys."""
        frozen = {
            name: {run: tuple(bool(v) for v in row) for run, row in rows.items()}
            for name, rows in table.items()
        }
        return cls(props=tuple(table), table=frozen)

    @classmethod
    def from_predicates(cls, predicates: Mapping[str, RunPredicate]) -> "Interpretation":
        """Build an interpretation from (run, time) -> bool predicates."""
        return cls(props=tuple(predicates), predicates=dict(predicates))

    def declares(self, name: str) -> bool:
        return name in self.props

    def truth(self, name: str, run_index: int, run: "Run", time: int) -> bool:
        """Truth of proposition `name` at (run_index, time)."""
        if name not in self.props:
            raise InputError(f"undeclared proposition {name!r}", detail={"prop": name})
        if self.predicates is not None:
            return bool(self.predicates[name](run, time))
        rows = self.table.get(name, {})
        if run_index not in rows:
            raise InputError(
                f"interpretation of {name!r} has no row for run {run_index}",
                detail={"prop": name, "run": run_index},
            )
        return rows[run_index][time]

    def validate(self, sys: "System") -> None:
        """Check totality of a table over Pts(R)."""
        if self.table is None:
            return
        width = sys.horizon + 1
        for name in self.props:
            rows = self.table.get(name, {})
            for r in range(sys.run_count):
                row = rows.get(r)
                if row is None:
                    raise InputError(
                        f"interpretation of {name!r} has no row for run {r}",
                        detail={"prop": name, "run": r},
                    )
                if len(row) != width:
                    raise InputError(
                        f"interpretation of {name!r} for run {r} has {len(row)} "
                        f"values, expected {width}",
                        detail={"prop": name, "run": r},
                    )
            stray = set(rows) - set(range(sys.run_count))
            if stray:
                raise InputError(
                    f"interpretation of {name!r} names unknown runs {sorted(stray)}",
                    detail={"prop": name},
                )

    def tabulate(self, sys: "System") -> dict[str, dict[int, tuple[bool, ...]]]:
        """Extensional form of this interpretation over sys."""
        return {
            name: {
                r: tuple(
                    self.truth(name, r, run, t) for t in range(sys.horizon + 1)
                )
                for r, run in enumerate(sys.runs)
            }
            for name in self.props
        }

    def select_runs(self, kept: Sequence[int]) -> "Interpretation":
        """Re-index the interpretation onto a subset of runs."""
        if self.predicates is not None:
            return self
        return Interpretation(
            props=self.props,
            table={
                name: {new: rows[old] for new, old in enumerate(kept)}
                for name, rows in self.table.items()
            },
        )
