"""Band-power EEG features and an electrode-set comparison harness."""

from .data import (
    LABEL_COLUMNS,
    LabelConfig,
    Recording,
    SynthSpec,
    binarize,
    binarize_valence,
    synth_dataset,
)
from .electrode_sets import (
    ElectrodeSet,
    literature_set,
    lobe_set,
    parse_selector,
    resolve_indices,
)
from .harness import (
    ComparisonTable,
    CurveData,
    EvalReport,
    SplitSpec,
    compare_sets,
    electrode_count_sweep,
    run_set,
    split,
)
from .io import load_portable, read_features, write_features, write_portable
from .montage import GENEVA_ORDER, LOBES, ElectrodeId, electrode, full_montage
from .neural import (
    NetworkConfig,
    TrainConfig,
    backward,
    build_network,
    forward,
    load_model,
    predict,
    save_model,
    train,
)
from .preprocess import (
    FilterSpec,
    average_reference,
    bandpass,
    downsample,
    prepare,
    trim_baseline,
)
from .spectral import (
    BANDS,
    BandDefinition,
    FeatureSet,
    Spectrum,
    WindowPlan,
    band_power,
    dft_naive,
    extract_features,
    extract_windows,
    fft,
)

__version__ = "0.1.0"
