"""humancorpus: human-scene image-text corpus construction and evaluation."""

__version__ = "0.1.0"

from .attributes import ATTRIBUTE_NAMES, parse_attribute
from .config import PipelineConfig, load_config
from .records import AttributeLabel, FaceDetection, SampleRecord, Status

__all__ = [
    "ATTRIBUTE_NAMES",
    "AttributeLabel",
    "FaceDetection",
    "PipelineConfig",
    "SampleRecord",
    "Status",
    "__version__",
    "load_config",
    "parse_attribute",
]
