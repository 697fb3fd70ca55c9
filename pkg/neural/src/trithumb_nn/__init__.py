"""Neural decoder and semantic evaluation for trithumb feature stacks."""

from .fts import PLANES, StackFormatError, read_stack
from .images import read_image, write_ppm
from .infer import infer
from .model import (
    HourglassConfig,
    Hourglass,
    LossHead,
    ModelConfigError,
    StackedHourglass,
    apply_zero_planes,
    build_network,
    desk_config,
)
from .semantic import (
    CLASSES,
    ClassVector,
    SemanticModelError,
    class_vector,
    evaluate_dirs,
    semantic_compare,
    top_indices,
)
from .train import (
    TrainingError,
    load_weights,
    save_weights,
    train,
    write_log,
)

__all__ = [
    "PLANES", "StackFormatError", "read_stack",
    "read_image", "write_ppm",
    "infer",
    "HourglassConfig", "Hourglass", "LossHead", "ModelConfigError",
    "StackedHourglass", "apply_zero_planes", "build_network", "desk_config",
    "CLASSES", "ClassVector", "SemanticModelError", "class_vector",
    "evaluate_dirs", "semantic_compare", "top_indices",
    "TrainingError", "load_weights", "save_weights", "train", "write_log",
]
