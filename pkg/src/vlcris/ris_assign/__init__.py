"""Mirror-element to AP assignment: exhaustive, greedy and learned."""

from .ann import (
    AnnModel,
    TrainingDivergedError,
    ann_forward,
    ann_predict,
    ann_train,
    init_model,
    load_model,
    loss_and_grads,
    save_model,
)
from .oracle import (
    ENUMERATION_LIMIT,
    AssignmentProblem,
    EnumerationLimitError,
    brute_force_assign,
    coordinate_ascent_assign,
)
from .dataset import (
    TrainingSet,
    agreement,
    generate_dataset,
    label_instance,
    read_dataset,
    reference_scene,
    write_dataset,
)
