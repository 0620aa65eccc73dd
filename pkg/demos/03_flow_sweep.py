"""Loss as a function of buffer sizes and flush periods for one bursty trace."""
from tamperlog import FlowConfig, TraceSpec, generate, required_ring_size, simulate
from tamperlog.flow import KB, MB
from tamperlog.tracegen import to_arrivals

cores = 8
events = generate(TraceSpec(duration=5.0, rate=40_000, n_cores=cores, profile="burst", seed=3))
trace = to_arrivals(events)
print(f"{len(trace)} arrivals, {sum(a.size for a in trace) / MB:.1f} MB")

print(f"{'S_p':>7} {'S_r':>7} {'T_p':>5} {'T_r':>6}  {'loss %':>7}  {'flushes':>7}")
for s_p in (4 * KB, 32 * KB):
    for s_r in (256 * KB, 4 * MB):
        for t_p, t_r in ((50, 200), (200, 1000)):
            rep = simulate(FlowConfig(s_p, s_r, t_p, t_r, cores), trace)
            print(f"{s_p // KB:6d}K {s_r // KB:6d}K {t_p:5d} {t_r:6d}  "
                  f"{100 * rep.p_loss:7.3f}  {rep.flushes:7d}")

need = required_ring_size(cores, 32 * KB, 200, 1000)
print(f"ring needed to absorb full per-core buffers at 200/1000 ms: {need // KB} KB")
