"""Per-core signing lines: records from core ``c`` are signed only by line ``c``."""
from __future__ import annotations

from .encoder import EncodedRecord
from .errors import ConfigError, RoutingError
from .prf import DEFAULT_ROUNDS, Key128
from .xlog import Checkpoint, SigningState, line_init

DEFAULT_CORES = 8
DEFAULT_CADENCE = 1024


class Pipeline:
    """N independent signing lines plus the checkpoints they have emitted.

    ``cadence`` k checkpoints every k-th record of a line; ``0`` disables
    periodic checkpoints (terminal ones from :meth:`finalize` still happen).
    """

    def __init__(self, master_seed: Key128, n_cores: int = DEFAULT_CORES,
                 cadence: int = DEFAULT_CADENCE, tau: int = 64, rounds: int = DEFAULT_ROUNDS):
        if n_cores < 1:
            raise ConfigError(f"need at least one core, got {n_cores}")
        if cadence < 0:
            raise ConfigError(f"cadence must be >= 0, got {cadence}")
        self.n_cores = n_cores
        self.cadence = cadence
        self.tau = tau
        self.rounds = rounds
        self.lines = [line_init(master_seed, c, n_cores, tau, rounds) for c in range(n_cores)]
        self.checkpoints = [[] for _ in range(n_cores)]
        self.signed = [0] * n_cores

    @property
    def secret_bytes(self) -> int:
        return sum(line.secret_bytes for line in self.lines)

    def ingest(self, record: EncodedRecord) -> Checkpoint | None:
        c = record.core_id
        if not 0 <= c < self.n_cores:
            raise RoutingError(f"core id {c} outside 0..{self.n_cores - 1}")
        line = self.lines[c]
        want = self.cadence > 0 and (line.index + 1) % self.cadence == 0
        cp = line.sign(record.mac_input, want)
        self.signed[c] += 1
        if cp is not None:
            self.checkpoints[c].append(cp)
        return cp

    def ingest_many(self, records) -> list:
        return [cp for cp in map(self.ingest, records) if cp is not None]

    def finalize(self) -> list:
        """Seal every line with a terminal checkpoint: ``[(core_id, Checkpoint)]``."""
        out = []
        for c, line in enumerate(self.lines):
            cp = line.seal()
            self.checkpoints[c].append(cp)
            out.append((c, cp))
        return out

    def final_tags(self) -> list:
        return [line.tag for line in self.lines]

    def counters(self) -> list:
        return [(c, self.signed[c], len(self.checkpoints[c])) for c in range(self.n_cores)]
