import re
from typing import Dict, List, Tuple

from sicsim.utils.errors import UnknownRayError

# Table order; ray ids are positions in this list.
RAY_LABELS: Tuple[str, ...] = (
    "y1-", "y2-", "y3-",
    "y1+", "y2+", "y3+",
    "h1", "h2", "h3", "h0",
    "z1", "z2", "z3",
)

_SUBSCRIPTS = str.maketrans("₀₁₂₃⁺⁻", "0123+-")


class LabelResolver:
    """Maps the spellings used in files, CLI flags and reports onto ray ids."""

    def __init__(self, labels: Tuple[str, ...] = RAY_LABELS):
        self.labels = labels
        self.id_by_label: Dict[str, int] = {label: i for i, label in enumerate(labels)}

    def ray_id(self, label: str) -> int:
        key = self._slugify(label)
        ray_id = self.id_by_label.get(key)
        if ray_id is None:
            raise UnknownRayError(label)
        return ray_id

    def label(self, ray_id: int) -> str:
        if not 0 <= ray_id < len(self.labels):
            raise UnknownRayError(ray_id)
        return self.labels[ray_id]

    def labels_for(self, ray_ids: List[int]) -> List[str]:
        return [self.label(r) for r in ray_ids]

    @staticmethod
    def _slugify(text: str) -> str:
        slug = text.strip().translate(_SUBSCRIPTS).lower()
        slug = re.sub(r"[\s_^]+", "", slug)
        # y1p / y1m spellings
        slug = re.sub(r"^(y[123])p$", r"\1+", slug)
        slug = re.sub(r"^(y[123])m$", r"\1-", slug)
        return slug


DEFAULT_RESOLVER = LabelResolver()


def ray_id(label: str) -> int:
    return DEFAULT_RESOLVER.ray_id(label)


def ray_label(ray_id_: int) -> str:
    return DEFAULT_RESOLVER.label(ray_id_)
