"""Replace the greedy element assignment by a small neural network.

The oracle labels a few thousand soft-handover snapshots. A network learns
to map (blockage degrees, receiver position) to one AP per mirror element.
We then compare its choices and the resulting rates with the oracle on
fresh snapshots.

    python3 demos/03_learned_assignment.py
"""

import numpy as np

from vlcris.config import ScenarioConfig
from vlcris.handover import blocked_mask
from vlcris.ris_assign import (
    agreement,
    ann_predict,
    ann_train,
    brute_force_assign,
    generate_dataset,
    init_model,
)
from vlcris.ris_assign.dataset import reference_scene
from vlcris.scene import push_out

cfg = ScenarioConfig()
train = generate_dataset(cfg, 3000, seed=1)
test = generate_dataset(cfg, 500, seed=2)
print(f"{len(train)} training snapshots, {train.n_aps} APs, {train.n_elements} elements; "
      f"oracles used: {sorted(set(train.oracle))}")

model = init_model(train.n_aps, train.n_elements, cfg.ann.hidden, seed=0,
                   scale=(cfg.room.width, cfg.room.depth))
model, loss = ann_train(model, train, epochs=30)
print(f"cross-entropy {loss[0]:.3f} -> {loss[-1]:.3f}")
agree, base = agreement(model, test)
print(f"held-out agreement {agree:.3f} (random choice would give {base:.3f})")

# rate lost by trusting the network instead of the oracle on a few snapshots
scene = reference_scene(cfg)
rng = np.random.default_rng(9)
keep = cfg.mobility.blocker_radius + cfg.mobility.personal_space
losses = []
while len(losses) < 200:
    xy = rng.uniform((0, 0), (cfg.room.width, cfg.room.depth))
    ch = scene.channel(xy, push_out(rng.uniform((0, 0), (5, 5), (cfg.mobility.blockers, 2)), xy, keep))
    blocked = blocked_mask(ch, cfg.handover)
    ok = [int(a) for a, b in zip(ch.ap_ids, blocked) if not b]
    if len(ok) < 2:
        continue
    prob = ch.problem(np.where(blocked, 0.0, 1.0))
    best = prob.rate(brute_force_assign(ok, prob), ok)
    net = prob.rate(ann_predict(model, ch.xi, xy, ok), ok)
    losses.append(1 - net / best)
print(f"rate shortfall vs oracle: mean {100 * np.mean(losses):.3f}%, worst {100 * np.max(losses):.3f}%")
