"""Template-protected multi-biometric indexing with frequent binary patterns."""

from .bitcore import BinaryTemplate, Pattern, concat, hamming_distance, xor
from .datagen import CharacteristicSpec, EmbeddingDataset, SynthSpec, generate
from .errors import (ConfigurationError, DataFormatError, DimensionError, EnrollmentError,
                     ProtocolError)
from .evalbench import (Bench, EvalReport, Protocol, SchemeConfig, closed_set_run, k_sweep,
                        open_set_run)
from .fbp import PatternList, extract_patterns, top_pattern
from .index import BinTable, EnrolRecord, Strategy, assign_bin, build
from .protect import IntegerTemplate, Protector, Scheme, SchemeKey, biohash, iom_grp, sign_binarize
from .retrieve import CandidateList, ProbeSet, exhaustive_search, probe_sequence, search
from .scores import NormStats, fuse, zscore_normalize

__version__ = "0.1.0"

__all__ = [
    "BinaryTemplate", "Pattern", "concat", "hamming_distance", "xor",
    "CharacteristicSpec", "EmbeddingDataset", "SynthSpec", "generate",
    "ConfigurationError", "DataFormatError", "DimensionError", "EnrollmentError", "ProtocolError",
    "Bench", "EvalReport", "Protocol", "SchemeConfig", "closed_set_run", "k_sweep", "open_set_run",
    "PatternList", "extract_patterns", "top_pattern",
    "BinTable", "EnrolRecord", "Strategy", "assign_bin", "build",
    "IntegerTemplate", "Protector", "Scheme", "SchemeKey", "biohash", "iom_grp", "sign_binarize",
    "CandidateList", "ProbeSet", "exhaustive_search", "probe_sequence", "search",
    "NormStats", "fuse", "zscore_normalize",
]
