"""Incremental satisfiability oracle over positive/negative clauses on the selectors.

The built-in backend is a backtracking search with watched-literal unit
propagation that keeps its clauses and level-0 assignments between calls;
the formulas seen during enumeration grow by one clause per explanation, so
nothing heavier is needed. python-sat can be plugged in behind the same
add_clause/solve contract.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from errors import InvariantViolation
from xpg_config import get_config

# Optional external oracle
try:
    from pysat.solvers import Solver as PysatSolver
    PYSAT_AVAILABLE = True
except ImportError as e:
    logging.debug(f"python-sat not available: {e}")
    PysatSolver = None
    PYSAT_AVAILABLE = False

SVector = Tuple[int, ...]


class ClausePolarity(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class Polarity(str, Enum):
    """Value given to decision variables the clauses leave open."""
    PREFER_1 = "prefer-1"
    PREFER_0 = "prefer-0"

    @property
    def bit(self) -> int:
        return 1 if self is Polarity.PREFER_1 else 0


@dataclass(frozen=True)
class Clause:
    polarity: ClausePolarity
    vars: FrozenSet[int]

    @classmethod
    def positive(cls, variables: Iterable[int]) -> "Clause":
        return cls(ClausePolarity.POSITIVE, frozenset(variables))

    @classmethod
    def negative(cls, variables: Iterable[int]) -> "Clause":
        return cls(ClausePolarity.NEGATIVE, frozenset(variables))

    def literals(self) -> List[int]:
        """Signed, 1-based DIMACS literals."""
        sign = 1 if self.polarity == ClausePolarity.POSITIVE else -1
        return [sign * (v + 1) for v in sorted(self.vars)]

    def satisfied_by(self, model: Sequence[int]) -> bool:
        want = 1 if self.polarity == ClausePolarity.POSITIVE else 0
        return any(model[v] == want for v in self.vars)


class _DpllBackend:
    """Backtracking search with two watched literals per clause.

    Literals are coded 2*v for s_v and 2*v+1 for its negation. Clauses are
    only ever added, so assignments forced at level 0 stay on the trail
    across solve calls.
    """

    def __init__(self, m: int):
        self.m = m
        self.assign = [-1] * m
        self.trail: List[int] = []
        self.qhead = 0
        self.clauses: List[List[int]] = []
        self.watches: List[List[int]] = [[] for _ in range(2 * m)]
        self.unsat = False

    @staticmethod
    def _code(lit: int) -> int:
        return 2 * (abs(lit) - 1) + (1 if lit < 0 else 0)

    def _value(self, code: int) -> int:
        """1 true, 0 false, -1 unassigned."""
        bit = self.assign[code >> 1]
        if bit == -1:
            return -1
        return 1 if bit != (code & 1) else 0

    def _enqueue(self, code: int) -> None:
        self.assign[code >> 1] = 1 - (code & 1)
        self.trail.append(code)

    def _undo(self, pos: int) -> None:
        for code in self.trail[pos:]:
            self.assign[code >> 1] = -1
        del self.trail[pos:]
        self.qhead = min(self.qhead, pos)

    def _propagate(self) -> bool:
        while self.qhead < len(self.trail):
            false_code = self.trail[self.qhead] ^ 1
            self.qhead += 1
            watching = self.watches[false_code]
            kept: List[int] = []
            for j, ci in enumerate(watching):
                clause = self.clauses[ci]
                if clause[0] == false_code:
                    clause[0], clause[1] = clause[1], clause[0]
                if self._value(clause[0]) == 1:
                    kept.append(ci)
                    continue
                for k in range(2, len(clause)):
                    if self._value(clause[k]) != 0:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches[clause[1]].append(ci)
                        break
                else:
                    kept.append(ci)
                    if self._value(clause[0]) == 0:
                        kept.extend(watching[j + 1:])
                        self.watches[false_code] = kept
                        return False
                    self._enqueue(clause[0])
            self.watches[false_code] = kept
        return True

    def add(self, lits: List[int]) -> None:
        # solve() always returns at level 0, so only permanent assignments are visible here
        if self.unsat:
            return
        codes = list(dict.fromkeys(self._code(lit) for lit in lits))
        if not codes:
            self.unsat = True
            return
        if any(self._value(c) == 1 for c in codes):
            return
        codes.sort(key=lambda c: self._value(c) == 0)
        open_codes = sum(1 for c in codes if self._value(c) == -1)
        if open_codes == 0:
            self.unsat = True
        elif open_codes == 1:
            self._enqueue(codes[0])
            if not self._propagate():
                self.unsat = True
        else:
            ci = len(self.clauses)
            self.clauses.append(codes)
            self.watches[codes[0]].append(ci)
            self.watches[codes[1]].append(ci)

    def solve(self, prefer: int) -> Optional[List[int]]:
        if self.unsat:
            return None
        base = len(self.trail)
        decisions: List[Tuple[int, int, bool]] = []  # (trail position, literal, flipped)
        try:
            while True:
                if not self._propagate():
                    while decisions:
                        pos, code, flipped = decisions.pop()
                        self._undo(pos)
                        if not flipped:
                            decisions.append((pos, code ^ 1, True))
                            self._enqueue(code ^ 1)
                            break
                    else:
                        self.unsat = True
                        return None
                    continue
                var = next((v for v in range(self.m) if self.assign[v] == -1), None)
                if var is None:
                    return list(self.assign)
                decisions.append((len(self.trail), 2 * var + (1 - prefer), False))
                self._enqueue(2 * var + (1 - prefer))
        finally:
            self._undo(base)

    def close(self) -> None:
        pass


def _dpll(m: int, clauses: List[List[int]], prefer: int) -> Optional[List[int]]:
    """One-shot solve of signed DIMACS clauses over m variables."""
    backend = _DpllBackend(m)
    for clause in clauses:
        backend.add(clause)
    return backend.solve(prefer)


class _PysatBackend:
    def __init__(self, m: int):
        self.m = m
        self.solver = PysatSolver(name="g3")

    def add(self, lits: List[int]) -> None:
        self.solver.add_clause(lits)

    def solve(self, prefer: int) -> Optional[List[int]]:
        self.solver.set_phases([(v + 1) if prefer else -(v + 1) for v in range(self.m)])
        if not self.solver.solve():
            return None
        bits = [prefer] * self.m
        for lit in self.solver.get_model() or []:
            v = abs(lit) - 1
            if v < self.m:
                bits[v] = 1 if lit > 0 else 0
        return bits

    def close(self) -> None:
        self.solver.delete()


class ClauseDB:
    """Append-only clause set H over selector variables s_0..s_{m-1}."""

    def __init__(self, m: int, backend: Optional[str] = None):
        self.m = m
        self.clauses: List[Clause] = []
        self.solve_calls = 0
        self.unsat_henceforth = False
        backend = backend or get_config().sat_backend
        if backend == "pysat" and not PYSAT_AVAILABLE:
            logging.warning("python-sat requested but not installed, using the built-in oracle")
            backend = "dpll"
        self.backend = backend
        self._solver = _PysatBackend(m) if backend == "pysat" else _DpllBackend(m)

    def add_clause(self, clause: Clause) -> None:
        bad = [v for v in clause.vars if not 0 <= v < self.m]
        if bad:
            raise ValueError(f"clause mentions variables outside 0..{self.m - 1}: {sorted(bad)}")
        self.clauses.append(clause)
        if not clause.vars:
            logging.debug("Empty clause added; formula is unsatisfiable from now on")
            self.unsat_henceforth = True
        else:
            self._solver.add(clause.literals())

    def solve(self, polarity: Polarity = Polarity.PREFER_1) -> Optional[SVector]:
        """A model as a 0/1 tuple, or None when H is unsatisfiable."""
        self.solve_calls += 1
        if self.unsat_henceforth:
            return None
        prefer = polarity.bit
        model = self._solver.solve(prefer)
        if model is None:
            return None
        for clause in self.clauses:
            if not clause.satisfied_by(model):
                raise InvariantViolation(f"oracle model violates clause {clause.literals()}")
        return tuple(model)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.m} {len(self.clauses)}"]
        lines.extend(" ".join(str(lit) for lit in c.literals() + [0]) for c in self.clauses)
        return "\n".join(lines) + "\n"

    def close(self) -> None:
        if self._solver is not None:
            self._solver.close()
            self._solver = None

    def __len__(self):
        return len(self.clauses)
