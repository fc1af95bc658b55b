"""Walk one user through a room and watch the handover decisions.

Two APs, three blockers, six wall mirrors. The same walkers and layout are
replayed with and without the mirror array so the two decision logs line up
step by step. Printed are handover executions, the start of each
connectivity hole and the moment a link is kept alive through the mirrors
alone.

    python3 demos/01_walkthrough.py
"""

import dataclasses

from vlcris.config import ScenarioConfig
from vlcris.handover import Decision, HandoverState, blocked_mask, step
from vlcris.scene import World

cfg = ScenarioConfig().replace(aps={"count": 2}, sim={"dt": 0.05, "seed": 7})
world = World.build(cfg, trial=3)
print("APs at", [tuple(round(v, 2) for v in p.position.as_array()) for p in world.scene.aps])
print("mirrors on wall", cfg.ris.wall, "at", [round(e.midpoint.y, 2) for e in world.scene.elements])

modes = {"ris": True, "no-ris": False}
states = {k: HandoverState() for k in modes}
hcfg = {k: dataclasses.replace(cfg.handover, ris_enabled=v) for k, v in modes.items()}
last = {k: None for k in modes}

for k in range(int(20.0 / cfg.sim.dt)):
    t = k * cfg.sim.dt
    ch = world.channel_at(t)
    all_blocked = bool(blocked_mask(ch, cfg.handover).all())
    for name in modes:
        rec = step(states[name], ch, hcfg[name])
        if rec.counted:
            event = f"{rec.decision.value} ({1e6 * rec.latency:.2f} us)"
        elif rec.decision is Decision.HOLE:
            event = "hole"
        elif all_blocked:
            event = "kept via mirrors"
        else:
            event = None
        if event and event != last[name]:
            x, y = ch.rx_xy
            print(f"t={t:5.2f}s  ({x:4.2f},{y:4.2f})  {name:6s}  {event:24s} "
                  f"APs={rec.aps}  {rec.rate / 1e6:6.1f} Mb/s")
        last[name] = event

for name, s in states.items():
    print(f"{name:6s}: hard {s.n_hard}, soft {s.n_soft}, bridges {s.bridge_events}, "
          f"hole steps {s.hole_steps}/{s.steps}, mean rate {s.rate_sum / s.steps / 1e6:.1f} Mb/s")
