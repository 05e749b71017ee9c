"""Participants, labeled samples, annotation ingestion, and LOSO splits."""

from .manifest import (
    CLASSES,
    COHORTS,
    POSITIVE_CLASS,
    PRIMARY_CLASSES,
    DatasetManifest,
    Participant,
    Sample,
    label_to_target,
    load_manifest,
    write_manifest,
)
from .annotations import (
    DEFAULT_FPS,
    EXCLUDED,
    GESTURES,
    NEUTRAL,
    AnnotationEvent,
    check_no_overlap,
    document_from_events,
    dump_document,
    events_from_document,
    ingest_annotations,
    load_annotation_file,
)
from .splits import (
    MISC_CLASSES,
    SCENARIOS,
    Fold,
    ScenarioSets,
    add_misc_class,
    build_scenario,
    loso_splits,
)
from .synthetic import generate_dataset, render_frame

__all__ = [
    "CLASSES",
    "COHORTS",
    "POSITIVE_CLASS",
    "PRIMARY_CLASSES",
    "DatasetManifest",
    "Participant",
    "Sample",
    "label_to_target",
    "load_manifest",
    "write_manifest",
    "DEFAULT_FPS",
    "EXCLUDED",
    "GESTURES",
    "NEUTRAL",
    "AnnotationEvent",
    "check_no_overlap",
    "document_from_events",
    "dump_document",
    "events_from_document",
    "ingest_annotations",
    "load_annotation_file",
    "MISC_CLASSES",
    "SCENARIOS",
    "Fold",
    "ScenarioSets",
    "add_misc_class",
    "build_scenario",
    "loso_splits",
    "generate_dataset",
    "render_frame",
]
