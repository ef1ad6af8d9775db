"""Unified document-annotation toolkit.

A strict, validated data model for the unified JSON label format, with
per-task projections, a config-driven transform pipeline, format
converters, and the standard evaluation metrics. The heavy lifting lives
in the C++ extension module; this package re-exports its surface.
"""

from davarlabel._core import (
    AnnotationSet,
    LabelError,
    Pipeline,
    average_precision,
    build_pipeline,
    canonical_dumps,
    chargrid,
    coco_map,
    detection_prf,
    evaluate_detection,
    evaluate_kie,
    from_coco,
    from_conll,
    from_icdar,
    kie_macro_f1,
    label_vocabulary,
    match_detections,
    merge_sets,
    ner_to_conll,
    normalize_bbox,
    parse_annotation_file,
    polygon_iou,
    project,
    reading_order_tau,
    registered_stage_names,
    required_keys,
    serialize_canonical,
    set_from_dict,
    stats_summary,
    task_names,
    to_coco,
    to_icdar,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "LabelError",
    "Pipeline",
    "average_precision",
    "build_pipeline",
    "canonical_dumps",
    "chargrid",
    "coco_map",
    "detection_prf",
    "evaluate_detection",
    "evaluate_kie",
    "from_coco",
    "from_conll",
    "from_icdar",
    "kie_macro_f1",
    "label_vocabulary",
    "match_detections",
    "merge_sets",
    "ner_to_conll",
    "normalize_bbox",
    "parse_annotation_file",
    "polygon_iou",
    "project",
    "reading_order_tau",
    "registered_stage_names",
    "required_keys",
    "serialize_canonical",
    "set_from_dict",
    "stats_summary",
    "task_names",
    "to_coco",
    "to_icdar",
    "validate",
]
