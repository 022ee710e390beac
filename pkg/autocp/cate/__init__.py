from .combine import CateInterval, CateResult, cate_pipeline, combine, combine_bounds

__all__ = ["CateInterval", "CateResult", "cate_pipeline", "combine", "combine_bounds"]
