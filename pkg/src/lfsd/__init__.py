"""Low-fidelity synthetic data toolkit: generation, disclosure risk,
mitigation, and the four release checks."""

from .dataset import Dataset, read_csv, write_csv
from .schema import (
    AffixRule,
    ColumnSpec,
    SchemaDiff,
    SYNTHETIC_BANNER,
    TableSchema,
    diff_schemas,
    infer_schema,
    read_schema,
    validate,
    write_schema,
)
from .synthesis import (
    DatePairTransform,
    MarginalDistribution,
    SynthesisConfig,
    TotalTransform,
    apply_transform_pipeline,
    invert_transform_pipeline,
    synth_from_margins,
    synth_from_metadata,
    synthesize,
)
from .risk import (
    KeySpec,
    RiskReport,
    classify_risky_records,
    count_key_combos,
    detect_singleton_values,
)
from .sdc import (
    MitigationAction,
    coarsen_key,
    pool_categories,
    reduce_precision,
    remove_records,
    remove_records_to_fixpoint,
    top_bottom_code,
)
from .fidelity import MarginComparison, compare_margin, pairwise_association
from .checks import (
    CheckOutcome,
    DocBundle,
    Finding,
    FullReport,
    ReleasePolicy,
    check_disclosure,
    check_labelling,
    check_structure,
    generate_documentation,
)
from .config import PipelineConfig, load_config
from .pipeline import run_all

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
