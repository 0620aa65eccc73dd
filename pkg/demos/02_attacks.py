"""What the auditor reports after each kind of tampering."""
import os

from tamperlog import (KeyFile, TraceSpec, attack_delete, attack_modify, attack_reorder,
                       attack_truncate, generate, sign_events, verify)

key = KeyFile(os.urandom(16), n_cores=2, cadence=16)
events = generate(TraceSpec(duration=1.0, rate=400, n_cores=2, seed=2))
audit = sign_events(events, key).archive.to_audit_input(key.master_seed)
n = len(audit.records[0])
print(f"line 0 holds {n} records, checkpoints every {key.cadence}")

cases = {
    "untouched": audit,
    "flip one bit in record 100": attack_modify(audit, 0, 99, bit=5),
    "delete record 50": attack_delete(audit, 0, 49),
    "swap records 70 and 71": attack_reorder(audit, 0, 69),
    "truncate to 120 records": attack_truncate(audit, 0, 120),
    "truncate to 112 and show checkpoint 112": attack_truncate(audit, 0, 112, present_checkpoint=True),
}
for label, variant in cases.items():
    v = verify(variant)[0]
    print(f"{label:42s} -> {v.status:8s} trusted prefix 1..{v.prefix_length}")
