"""Duplicate suppression before signing, fixed versus dynamic window."""
import os

from tamperlog import KeyFile, TraceSpec, generate, sign_events, verify

key = KeyFile(os.urandom(16), n_cores=2, cadence=32)
events = generate(TraceSpec(duration=3.0, rate=3000, n_cores=2, dup_rate=0.8, seed=4))
print(f"raw events: {len(events)}")
for mode in (None, "fixed", "dynamic"):
    res = sign_events(events, key, reduce=mode)
    ok = verify(res.archive.to_audit_input(key.master_seed)).intact
    kept = res.signed / len(events)
    print(f"  {str(mode):8s} signed {res.signed:6d} ({100 * kept:5.1f}% kept)  verifies: {ok}")
