"""Sign a synthetic trace on four lines, store it, read it back, audit it."""
import os
import tempfile

from tamperlog import KeyFile, LogArchive, TraceSpec, generate, sign_events, verify

key = KeyFile(os.urandom(16), n_cores=4, cadence=64)
events = generate(TraceSpec(duration=2.0, rate=2000, n_cores=4, seed=1))
result = sign_events(events, key)
print(f"signed {result.signed} records on {key.n_cores} lines")

with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "trace.tlog")
    result.archive.save(path)
    print(f"archive: {os.path.getsize(path):,} bytes")
    loaded = LogArchive.load(path)

verdict = verify(loaded.to_audit_input(key.master_seed))
for line in verdict.lines:
    print(f"  line {line.core_id}: {line.status:8s} {line.record_count:5d} records, s = {line.s}")
print("overall:", "intact" if verdict.intact else "TAMPERED")
