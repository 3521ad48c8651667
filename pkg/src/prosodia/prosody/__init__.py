from prosodia.prosody.cwt import (
    CwtMatrix,
    WaveletParams,
    cwt_decompose,
    cwt_decompose_direct,
    cwt_reconstruct,
    export_scalogram_csv,
    mexican_hat,
    read_scalogram_csv,
    scale_weights,
)
from prosodia.prosody.f0 import (
    ContinuousF0,
    NormStats,
    denormalize_log_f0,
    interpolate_unvoiced,
    normalize_log_f0,
    pooled_log_f0_stats,
    preprocess_f0,
)

__all__ = [
    "ContinuousF0",
    "CwtMatrix",
    "NormStats",
    "WaveletParams",
    "cwt_decompose",
    "cwt_decompose_direct",
    "cwt_reconstruct",
    "denormalize_log_f0",
    "export_scalogram_csv",
    "interpolate_unvoiced",
    "mexican_hat",
    "normalize_log_f0",
    "pooled_log_f0_stats",
    "preprocess_f0",
    "read_scalogram_csv",
    "scale_weights",
]
