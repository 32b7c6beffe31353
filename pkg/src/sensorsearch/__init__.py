"""Context-aware sensor search, selection and ranking engine.

Hard point-based filters narrow a sensor catalog to an eligible set; soft
priorities, captured as comparative slider weights, rank that set by
weighted Euclidean distance to an ideal sensor (CPWI). A heuristic pruning
cascade (CPHF) trades a margin of error for speed on large catalogs.
"""

from .cphf import CphfPlan, build_plan, cphf_accuracy, heuristic_filter
from .errors import (
    DimensionMismatch,
    DuplicateId,
    EmptyCandidates,
    MalformedRow,
    NoCheckedProperties,
    NoSnapshot,
    PlanMismatch,
    QuerySyntaxError,
    SchemaError,
    SensorSearchError,
    UnknownProperty,
)
from .pipeline import (
    SearchRequest,
    SearchResponse,
    SnapshotStore,
    search,
)
from .query import PointQuery, evaluate_filter, parse_query
from .ranking import (
    NormalizedSpace,
    PriorityEntry,
    PriorityProfile,
    RankedResult,
    WeightVector,
    compute_cpwi,
    compute_weights,
    normalize,
    rank_sensors,
    select_top_n,
)
from .registry import (
    BoundingBox,
    CandidateSet,
    Polarity,
    PropertyDef,
    PropertySchema,
    RegistrySnapshot,
    SensorRecord,
    default_schema,
    export_csv,
    generate_synthetic,
    load_catalog,
    schema_from_json,
    schema_to_json,
    snapshot_from_records,
)

__version__ = "0.1.0"
