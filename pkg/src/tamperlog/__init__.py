"""Forward-secure, tamper-evident system call audit logging."""
from .archive import KeyFile, LogArchive
from .auditor import (AuditInput, Auditor, AuditVerdict, LineVerdict, attack_delete, attack_insert,
                      attack_modify, attack_reorder, attack_replay, attack_truncate, verify)
from .combiner import Combiner, aggregate, combine, uncombine
from .encoder import AuditEvent, EncodedRecord, SchemaTable, SyscallSchema, decode, default_schema, encode
from .errors import TamperLogError
from .flow import Arrival, FlowConfig, LossReport, required_ring_size, simulate
from .pipeline import Pipeline
from .prf import Tag, chaskey_mac, prf_f
from .reducer import Reducer, ShardedReducer
from .tracegen import TraceSpec, generate
from .workflow import sign_events
from .xlog import Checkpoint, SigningState, line_init, sign, update

__version__ = "0.1.0"
